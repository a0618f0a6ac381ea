"""
Shared plumbing for the pytransmission modules: the exception hierarchy,
coloured console messages and config-file loading.

The numeric modules raise the exceptions defined here; the command line
maps them to exit codes (2 config, 3 numerical fault, 4 case refusal).
"""

# %% Importing required libraries
import logging  # Module-level loggers
import os  # Path checks for output files
import tomllib  # TOML config documents

logger = logging.getLogger(__name__)


# %% Exceptions

class PyTransmissionError(Exception):
    """Base class for every error raised by pytransmission."""


class ConfigError(PyTransmissionError, ValueError):
    """Invalid run configuration: unknown keys, empty grids, bad tolerances."""


class NumericalFault(PyTransmissionError, ArithmeticError):
    """A computation could not deliver a trustworthy number."""


class InsufficientTermsError(NumericalFault, ValueError):
    """The truncation bound of a power series is not met."""


class OutOfRangeError(NumericalFault, ValueError):
    """Argument outside the range an oracle is valid for."""


class NormalizationUnderflowError(NumericalFault):
    """Miller normalization sum fell below the representable range."""


class BesselOverflowError(NumericalFault, OverflowError):
    """Nonfinite intermediate in a Bessel recurrence."""


class NearPoleError(NumericalFault):
    """J_m is numerically zero at the argument (Dirichlet eigenvalue proximity)."""


class BranchError(NumericalFault, ValueError):
    """Square-root symbol evaluated on its branch cut or at its branch point."""


class ScaleFault(NumericalFault, OverflowError):
    """A scaled determinant overflowed despite exponential scaling."""


class ZeroOnContourError(NumericalFault):
    """The function vanishes (numerically) on a contour used for winding."""


class CaseRefusal(PyTransmissionError):
    """The media pair does not satisfy the case conditions of a claim."""


# %% Functions

def cprint(text, text_color="red", bg_color="yellow"):
    """
    Print text with ANSI colours. Used by the command line for refusals and
    numerical faults so they stand out from progress output.

    Parameters:
    - text (str): Message to print.
    - text_color (str): Foreground colour name. Default is red.
    - bg_color (str): Background colour name. Default is yellow.
    """
    colors = {
        "black": "\033[30m",
        "red": "\033[31m",
        "green": "\033[32m",
        "yellow": "\033[33m",
        "blue": "\033[34m",
        "magenta": "\033[35m",
        "cyan": "\033[36m",
        "white": "\033[37m",
    }
    bg_colors = {
        "black": "\033[40m",
        "red": "\033[41m",
        "green": "\033[42m",
        "yellow": "\033[43m",
        "blue": "\033[44m",
        "magenta": "\033[45m",
        "cyan": "\033[46m",
        "white": "\033[47m",
    }

    # Unknown names fall back to red on yellow
    text_code = colors.get(text_color.lower(), "\033[31m")
    bg_code = bg_colors.get(bg_color.lower(), "\033[43m")
    reset_code = "\033[0m"

    print(f"{text_code}{bg_code}{text}{reset_code}")


def load_config_file(file_path):
    """
    Load a TOML key-value document into a flat dictionary.

    Nested tables are flattened with '_' so that `[scan] box = ...` and
    `scan_box = ...` are equivalent; the command line then checks every key
    against the flags it knows.

    Parameters:
    - file_path (str): Path to the config document.

    Returns:
    - dict: Flat mapping of key -> value.

    Raises:
    - ConfigError: If the file does not exist or is not valid TOML.

    Example usage:
    config = load_config_file('runs/weyl60.toml')
    """
    if not os.path.exists(file_path):
        raise ConfigError(f"The config file {file_path} does not exist.")

    try:
        with open(file_path, 'rb') as file:
            content = tomllib.load(file)
    except tomllib.TOMLDecodeError as e:
        raise ConfigError(f"Could not parse {file_path}: {e}") from e

    def flatten(table, prefix=""):
        flat = {}
        for key, value in table.items():
            name = f"{prefix}{key}".replace('-', '_')
            if isinstance(value, dict):
                flat.update(flatten(value, prefix=f"{name}_"))
            else:
                flat[name] = value
        return flat

    flat = flatten(content)
    logger.debug("Loaded %d config keys from %s", len(flat), file_path)
    return flat


def writable_path(path):
    """
    Return the absolute form of an output path after checking that its
    directory exists and is writable.

    Parameters:
    - path (str): Output file path, relative to the working directory or absolute.

    Returns:
    - str: The absolute path.

    Raises:
    - ConfigError: If the directory is missing or not writable.
    """
    full_path = os.path.abspath(os.path.join(os.getcwd(), path))
    directory = os.path.dirname(full_path)
    if not os.path.isdir(directory):
        raise ConfigError(f"Output directory {directory} does not exist.")
    if not os.access(directory, os.W_OK):
        raise ConfigError(f"Output directory {directory} is not writable.")
    return full_path
