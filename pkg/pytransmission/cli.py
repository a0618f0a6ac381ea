"""
Command line for the pytransmission verification runs.

    pytransmission dn-compare --re 100,200,400,800 --im-rule sqrt
    pytransmission scan --pair 1,1,1,4 --box 1,15,0.01,8 --svg scan.svg
    pytransmission free-region --pair 1,1,1,4 --kind strip
    pytransmission weyl --pair 1,1,1,4 --r 60

Every flag can also be given as a key of a TOML document passed with
--config; explicit flags win. Exit codes: 0 success, 2 bad configuration,
3 numerical fault or failed check, 4 case refusal.
"""

# %% Importing required libraries
import argparse
import logging
import os
import time
from dataclasses import dataclass, replace

import pandas as pd

import pytransmission.dn_functions as dn
import pytransmission.parametrix_functions as pf
import pytransmission.plot_functions as plf
import pytransmission.symbol_functions as sf
import pytransmission.table_functions as tf
import pytransmission.transmission_functions as tm
from pytransmission.utility_functions import (
    CaseRefusal,
    ConfigError,
    NumericalFault,
    cprint,
    load_config_file,
    writable_path,
)

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_FAULT = 3
EXIT_REFUSAL = 4

# Keys that never change the numeric content of an output file
NON_NUMERIC_KEYS = {"threads", "out", "svg", "config"}


# %% Value converters

def _float_list(value):
    if isinstance(value, str):
        parts = [part.strip() for part in value.split(',') if part.strip()]
    elif isinstance(value, (list, tuple)):
        parts = list(value)
    else:
        parts = [value]
    if not parts:
        raise ConfigError("empty grid")
    try:
        return [float(part) for part in parts]
    except (TypeError, ValueError) as e:
        raise ConfigError(f"cannot read a list of numbers from {value!r}") from e


def _four_numbers(name, build):
    def convert(value):
        values = _float_list(value)
        if len(values) != 4:
            raise ConfigError(f"{name} needs four numbers, got {value!r}")
        try:
            build(*values)
        except ValueError as e:
            raise ConfigError(f"invalid {name}: {e}") from e
        return values
    return convert


def _number(kind, minimum=None, optional=False):
    def convert(value):
        if optional and value is None:
            return None
        try:
            number = kind(value)
        except (TypeError, ValueError) as e:
            raise ConfigError(f"expected a {kind.__name__}, got {value!r}") from e
        if minimum is not None and number < minimum:
            raise ConfigError(f"value {number} is below the minimum {minimum}")
        return number
    return convert


def _positive(value):
    number = _number(float)(value)
    if not number > 0:
        raise ConfigError(f"value must be positive, got {number}")
    return number


def _flag(value):
    if isinstance(value, str):
        return value.strip().lower() in ("1", "true", "yes", "on")
    return bool(value)


def _text(value):
    return None if value is None else str(value)


def _choice(*choices):
    def convert(value):
        value = str(value)
        if value not in choices:
            raise ConfigError(f"expected one of {', '.join(choices)}, got '{value}'")
        return value
    return convert


def _im_rule(value):
    dn.ImRule.parse(value)
    return str(value).strip().lower()


_pair = _four_numbers("pair", sf.MediumPair)
_box = _four_numbers("box", tm.SearchBox)


# %% Command table: key -> (default, converter, help)

def _common(default_format):
    return {
        "threads": (os.cpu_count() or 1, _number(int, minimum=1), "Worker processes (default: logical cores)."),
        "out": (None, _text, "Output file (default: <command>.<format> in the working directory)."),
        "format": (default_format, _choice("csv", "json"), f"Output format, csv or json (default: {default_format})."),
        "no_progress": (False, _flag, "Disable progress bars."),
        "verbose": (False, _flag, "Log at DEBUG level."),
        "timing": (False, _flag, "Record wall-clock runtime in JSON output."),
    }


COMMANDS = {
    "dn-compare": {
        "help": "Compare the exact disk DN map with the square-root symbol along a frequency grid.",
        "keys": {
            **_common("csv"),
            "re": ("100,200,400,800", _float_list, "Real parts of lambda, or two endpoints with --samples."),
            "im_rule": ("sqrt", _im_rule, "Im(lambda) rule: sqrt, fixed:<value> or power:<epsilon>."),
            "samples": (None, _number(int, minimum=1, optional=True), "Geometric samples between the two --re endpoints."),
            "margin": (3.0, _positive, "Mode-cap margin."),
            "tail_constant": (1e-2, _positive, "Constant of the tail model."),
            "report_threshold": (1e-3, _positive, "Relative threshold for the tail-dominated flag."),
            "theta0": (sf.DEFAULT_THETA0, _positive, "Scaling wedge constant in (0, 1)."),
            "weighted": (False, _flag, "Also report the weighted supremum."),
            "tex": (None, _text, "Also write a LaTeX table to this path."),
        },
    },
    "parametrix-check": {
        "help": "Residual slopes of the elliptic parametrix and the disk symbol identities.",
        "keys": {
            **_common("csv"),
            "re": ("100,200,400,800", _float_list, "Real parts of lambda."),
            "im": (5.0, _number(float), "Imaginary part of lambda."),
            "hm": (1.3, _positive, "Fixed semiclassical mode h m."),
            "samples": (1000, _number(int, minimum=1), "Random points for the symbol identities."),
            "seed": (0, _number(int, minimum=0), "Random seed for the symbol identities."),
        },
    },
    "scan": {
        "help": "Transmission eigenvalues of the disk inside a box of the lambda plane.",
        "keys": {
            **_common("json"),
            "pair": ("1,1,1,4", _pair, "Media c1,n1,c2,n2."),
            "box": ("1,15,0.01,8", _box, "Search box re_min,re_max,im_min,im_max."),
            "m_max": (None, _number(int, minimum=0, optional=True), "Highest Fourier mode (default: automatic)."),
            "svg": (None, _text, "Write a heatmap of log10 min |f_m| to this path."),
            "nx": (128, _number(int, minimum=2), "Heatmap samples along Re."),
            "ny": (96, _number(int, minimum=2), "Heatmap samples along Im."),
        },
    },
    "free-region": {
        "help": "Certify an eigenvalue-free region from a scan of a window.",
        "keys": {
            **_common("json"),
            "pair": ("1,1,1,4", _pair, "Media c1,n1,c2,n2."),
            "kind": ("strip", _choice("strip", "log", "power"), "Region kind: strip, log or power."),
            "C": (None, _number(float, optional=True), "Region constant (default: derived from the scan)."),
            "A": (0.0, _number(float), "Offset of a log region."),
            "epsilon": (0.5, _number(float), "Exponent parameter of a power region."),
            "window": ("1,30,0,10", _box, "Scan window re_min,re_max,im_min,im_max."),
            "m_max": (None, _number(int, minimum=0, optional=True), "Highest Fourier mode (default: automatic)."),
        },
    },
    "weyl": {
        "help": "Eigenvalue counts against the Weyl prediction.",
        "keys": {
            **_common("csv"),
            "pair": ("1,1,1,4", _pair, "Media c1,n1,c2,n2."),
            "r": ("60", _float_list, "Radii |lambda| <= r to count up to."),
            "strip_half_width": (0.05, _positive, "Half width of the near-real strip."),
            "re_start": (0.25, _positive, "Smallest Re(lambda) searched."),
            "m_max": (None, _number(int, minimum=0, optional=True), "Highest Fourier mode (default: automatic)."),
            "tex": (None, _text, "Also write a LaTeX table to this path."),
        },
    },
    "symbols": {
        "help": "Tabulate rho_1, rho_2, tau and the case label over a grid of tangential frequencies.",
        "keys": {
            **_common("csv"),
            "pair": ("1,1,1,4", _pair, "Media c1,n1,c2,n2."),
            "theta": (0.0, _number(float), "Non-reality parameter theta."),
            "xi": ("0.25,0.5,0.75,1.25,1.5,1.75,2.5,3,4", _float_list, "Tangential frequencies."),
        },
    },
}


# %% Run configuration

@dataclass(frozen=True)
class RunConfig:
    """Resolved configuration of one command: defaults, then the TOML file, then flags."""
    command: str
    values: dict

    def __getitem__(self, key):
        return self.values[key]

    @property
    def progress(self):
        return not self.values["no_progress"]

    def embedded(self):
        """The configuration written into output files."""
        content = {key: value for key, value in self.values.items() if key not in NON_NUMERIC_KEYS}
        content["command"] = self.command
        return content


def build_run_config(command, file_values=None, flag_values=None):
    """
    Layer defaults, config-file values and explicit flags for a command.

    Parameters:
    - command (str): One of COMMANDS.
    - file_values (dict, optional): Flat keys from `load_config_file`.
    - flag_values (dict, optional): Flags given on the command line.

    Returns:
    - RunConfig

    Raises:
    - ConfigError: Unknown command or key, or a value that does not convert.

    Example usage:
    config = build_run_config("weyl", {"pair": [1, 1, 1, 4]}, {"r": "30,60"})
    """
    if command not in COMMANDS:
        raise ConfigError(f"unknown command '{command}'")
    keys = COMMANDS[command]["keys"]
    values = {}
    for key, (default, convert, _) in keys.items():
        values[key] = default if default is None or isinstance(default, bool) else convert(default)
    for source in (file_values or {}, flag_values or {}):
        for key, value in source.items():
            if key not in keys:
                raise ConfigError(f"unknown key '{key}' for command {command}")
            try:
                values[key] = keys[key][1](value)
            except ConfigError as e:
                raise ConfigError(f"{key}: {e}") from e
    if values["out"] is None:
        values["out"] = f"{command}.{values['format']}"
    return RunConfig(command, values)


# %% Output helpers

def _write(config, frame, payload):
    """Write `frame` as CSV or `payload` as JSON, whichever the config asks for."""
    path = writable_path(config["out"])
    if config["format"] == "csv":
        tf.write_csv(frame, path, config.embedded())
    else:
        tf.write_json(payload, path, config.embedded())
    return path


def _runtime(config, started):
    return (time.perf_counter() - started) * 1000.0 if config["timing"] else None


# %% Commands

def cmd_dn_compare(config):
    """Discrepancy scan of the disk DN map; exit 0 iff no row is flagged."""
    started = time.perf_counter()
    settings = dn.DiscrepancyConfig(
        margin=config["margin"],
        tail_constant=config["tail_constant"],
        report_threshold=config["report_threshold"],
        theta0=config["theta0"],
    )
    rows = dn.discrepancy_scan(config["re"], config["im_rule"], config["samples"], settings,
                               n_jobs=config["threads"], progress=config.progress)
    if not rows:
        raise ConfigError("empty grid")
    frame = dn.rows_to_frame(rows, weighted=config["weighted"])
    payload = {"rows": frame.to_dict(orient="records"), "runtime_ms": _runtime(config, started)}
    _write(config, frame, payload)
    if config["tex"]:
        tf.write_latex(frame.drop(columns=["flags"]), writable_path(config["tex"]),
                       caption="Disk DN map against the square-root symbol", label="tab:dn-compare")

    flagged = [row for row in rows if row.flags]
    for row in flagged:
        logger.warning("lambda=%s flagged: %s", row.lam, ";".join(row.flags))
    return EXIT_FAULT if flagged else EXIT_OK


def cmd_parametrix_check(config):
    """Elliptic residual slopes and disk identities; exit 0 iff every window is met."""
    started = time.perf_counter()
    lambdas = [complex(re, config["im"]) for re in config["re"]]
    report = pf.parametrix_suite(lambdas, config["hm"], config["samples"], config["seed"],
                                 n_jobs=config["threads"], progress=config.progress)
    payload = {
        "curve": report.curve.to_dict(orient="records"),
        "summary": report.summary(),
        "runtime_ms": _runtime(config, started),
    }
    _write(config, report.curve, payload)
    print(", ".join(f"{key}={value}" for key, value in report.summary().items()))
    return EXIT_OK if report.passed else EXIT_FAULT


def cmd_scan(config):
    """Zero scan of a box with an optional heatmap."""
    started = time.perf_counter()
    pair = sf.MediumPair(*config["pair"])
    box = tm.SearchBox(*config["box"])
    zero_set = tm.scan_zeros(pair, box, config["m_max"], n_jobs=config["threads"], progress=config.progress)
    zero_set = replace(zero_set, runtime_ms=_runtime(config, started))
    _write(config, zero_set.to_frame(), zero_set.to_dict())

    if config["svg"]:
        re_values, im_values, grid = tm.min_modulus_grid(pair, box, zero_set.m_max, config["nx"], config["ny"])
        plf.min_modulus_heatmap(re_values, im_values, grid, writable_path(config["svg"]),
                                zeros=[record.lam for record in zero_set if record.resolved],
                                title=f"pair {','.join(f'{value:g}' for value in config['pair'])}")
    logger.info("Scan found %d zeros", len(zero_set))
    return EXIT_OK


def cmd_free_region(config):
    """Certification of an eigenvalue-free region; exit 0 iff certified."""
    pair = sf.MediumPair(*config["pair"])
    window = tm.SearchBox(*config["window"])
    region = config["kind"]
    if config["C"] is not None:
        region = tm.RegionSpec(config["kind"], config["C"], A=config["A"], epsilon=config["epsilon"])
    report = tm.free_region_check(pair, region, window, config["m_max"],
                                  n_jobs=config["threads"], progress=config.progress)
    summary = pd.DataFrame([{
        **report.region.as_dict(),
        "case": report.case.value,
        "certified": report.certified,
        "empirical_C": report.empirical_C,
        "fit_A": report.fit_A,
        "fit_B": report.fit_B,
        "violations": len(report.violations),
        "flags": ";".join(report.flags),
    }])
    _write(config, summary, report.to_dict())
    return EXIT_OK if report.certified else EXIT_FAULT


def cmd_weyl(config):
    """Weyl counts at each radius."""
    started = time.perf_counter()
    pair = sf.MediumPair(*config["pair"])
    results = [
        tm.weyl_count(pair, r, strip_half_width=config["strip_half_width"], re_start=config["re_start"],
                      m_max=config["m_max"], n_jobs=config["threads"], progress=config.progress)
        for r in config["r"]
    ]
    frame = pd.DataFrame([result.as_record() for result in results],
                         columns=["r", "count", "count_max", "prediction", "ratio", "flags"])
    payload = {"rows": frame.to_dict(orient="records"), "runtime_ms": _runtime(config, started)}
    _write(config, frame, payload)
    if config["tex"]:
        tf.write_latex(frame.drop(columns=["flags"]), writable_path(config["tex"]),
                       caption="Eigenvalue counts against the Weyl prediction", label="tab:weyl")
    return EXIT_OK


def cmd_symbols(config):
    """Symbol table over the xi grid."""
    pair = sf.MediumPair(*config["pair"])
    frame = sf.symbol_table(pair, config["theta"], config["xi"])
    payload = {"case": sf.classify_case(pair).value, "rows": frame.to_dict(orient="records")}
    _write(config, frame, payload)
    return EXIT_OK


HANDLERS = {
    "dn-compare": cmd_dn_compare,
    "parametrix-check": cmd_parametrix_check,
    "scan": cmd_scan,
    "free-region": cmd_free_region,
    "weyl": cmd_weyl,
    "symbols": cmd_symbols,
}


# %% Entry point

def build_parser():
    parser = argparse.ArgumentParser(prog="pytransmission", description=__doc__.strip().splitlines()[0])
    subparsers = parser.add_subparsers(dest="command", required=True)
    for command, table in COMMANDS.items():
        sub = subparsers.add_parser(command, help=table["help"], description=table["help"])
        sub.add_argument("--config", default=argparse.SUPPRESS, help="TOML document with default values for these flags.")
        for key, (default, convert, text) in table["keys"].items():
            flag = f"--{key.replace('_', '-')}"
            if convert is _flag:
                sub.add_argument(flag, dest=key, action="store_true", default=argparse.SUPPRESS, help=text)
            else:
                sub.add_argument(flag, dest=key, default=argparse.SUPPRESS, help=text)
    return parser


def main(argv=None):
    """
    Run one command and return its exit code.

    Example usage:
    main(["symbols", "--pair", "1,1,1,4", "--out", "symbols.csv"])
    """
    parser = build_parser()
    try:
        args = vars(parser.parse_args(argv))
    except SystemExit as e:
        return e.code if isinstance(e.code, int) else EXIT_CONFIG

    command = args.pop("command")
    config_path = args.pop("config", None)
    try:
        file_values = load_config_file(config_path) if config_path else {}
        config = build_run_config(command, file_values, args)
        writable_path(config["out"])
    except ConfigError as e:
        cprint(f"Configuration error: {e}")
        return EXIT_CONFIG

    logging.basicConfig(level=logging.DEBUG if config["verbose"] else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s", force=True)
    logger.info("Running %s with %s", command, config.embedded())

    try:
        return HANDLERS[command](config)
    except CaseRefusal as e:
        cprint(f"Refused: {e}")
        return EXIT_REFUSAL
    except NumericalFault as e:
        cprint(f"Numerical fault: {e}")
        return EXIT_FAULT
    except ValueError as e:
        cprint(f"Configuration error: {e}")
        return EXIT_CONFIG
