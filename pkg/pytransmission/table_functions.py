"""
Result files: versioned CSV and JSON documents that carry the run
configuration, and LaTeX tables for the discrepancy and Weyl runs.
"""

# %% Package Imports
import json  # Machine-readable result files
import logging
import math
import re  # Regular expressions for LaTeX clean-up

import numpy as np
import pandas as pd

logger = logging.getLogger(__name__)

FORMAT_VERSION = "pytransmission/1"
FLOAT_FORMAT = "%.17g"


# %% FUNCTIONS FOR MACHINE-READABLE OUTPUT

def round_significant(value, digits=17):
    """
    Round a float to a number of significant digits; non-finite values become None.

    Sample Usage:
    >>> round_significant(0.1 + 0.2)
    0.30000000000000004
    """
    value = float(value)
    if not math.isfinite(value):
        return None
    return float(f"{value:.{digits}g}")


def jsonable(obj):
    """
    Convert results (dicts, lists, numpy scalars, complex numbers) into plain
    JSON types with floats rounded to 17 significant digits.

    Complex numbers become {"re": ..., "im": ...}; NaN and infinities become null.
    """
    if isinstance(obj, dict):
        return {str(key): jsonable(value) for key, value in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [jsonable(value) for value in obj]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return round_significant(obj)
    if isinstance(obj, (complex, np.complexfloating)):
        return {"re": round_significant(obj.real), "im": round_significant(obj.imag)}
    if obj is None or isinstance(obj, str):
        return obj
    if hasattr(obj, "value"):  # Enums
        return jsonable(obj.value)
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def write_json(payload, path, config):
    """
    Write a result dictionary as JSON with the resolved config and format version embedded.

    Parameters:
    - payload (dict): Result content.
    - path (str): Output file.
    - config (dict): Resolved run configuration.
    """
    document = dict(payload)
    document["format_version"] = FORMAT_VERSION
    document["config"] = config
    with open(path, 'w', encoding='utf-8') as file:
        file.write(json.dumps(jsonable(document), sort_keys=True, indent=2))
        file.write("\n")
    logger.info("Wrote %s", path)


def write_csv(frame, path, config):
    """
    Write a DataFrame as CSV preceded by two comment lines: the format version
    and the JSON-encoded resolved config. Exactly one header row follows.

    Sample Usage:
    >>> write_csv(rows_to_frame(rows), "dn.csv", {"re": [100, 200]})
    """
    with open(path, 'w', encoding='utf-8', newline='') as file:
        file.write(f"# format_version={FORMAT_VERSION}\n")
        file.write(f"# config={json.dumps(jsonable(config), sort_keys=True)}\n")
        frame.to_csv(file, index=False, float_format=FLOAT_FORMAT, lineterminator="\n")
    logger.info("Wrote %s (%d rows)", path, len(frame))


def read_csv(path):
    """Read a CSV written by `write_csv`, returning (frame, config)."""
    config = {}
    with open(path, 'r', encoding='utf-8') as file:
        for line in file:
            if not line.startswith('#'):
                break
            if line.startswith('# config='):
                config = json.loads(line[len('# config='):])
    return pd.read_csv(path, comment='#'), config


# %% FUNCTIONS FOR BRUTE FORCING PROPER FORMATTING IN LATEX FILES

def add_space_after_ampersand(latex_content):
    """
    Add a space after any & symbol in LaTeX content.

    Sample Usage:
    >>> add_space_after_ampersand("0.31 &0.4")
    "0.31 & 0.4"
    """
    return re.sub(r'&(?! )', r'& ', latex_content)


def add_leading_zero_to_small_numbers(latex_content):
    """
    Add a leading zero to numbers below one that lack it.

    Sample Usage:
    >>> add_leading_zero_to_small_numbers("Value is .31 and .4")
    "Value is 0.31 and 0.4"
    """
    return re.sub(r'(?<=\s|&|\\|,|\(|-)\.(\d+)', r'0.\1', latex_content)


def format_latex_content(latex_content):
    latex_content = add_space_after_ampersand(latex_content)
    latex_content = add_leading_zero_to_small_numbers(latex_content)
    return latex_content


# %% Create tables

def _latex_cell(value, digits):
    if isinstance(value, (float, np.floating)):
        if not math.isfinite(value):
            return "--"
        return f"{value:.{digits}g}"
    return str(value).replace('_', '\\_')


def data_to_latex(data, caption="Table", label=None, note=None, caption_position='above',
                  resize_width=0.9, digits=6, custom_column_names=None):
    """
    Generate a LaTeX table from a DataFrame of results.

    Parameters
    ----------
    data : pandas.DataFrame
        Rows to tabulate, e.g. discrepancy rows or Weyl counts.
    caption : str, optional
        Caption for the table. Default is "Table".
    label : str, optional
        Label for the table. Default is None.
    note : str, optional
        Note printed under the table. Default is None.
    caption_position : str, optional
        Either 'above' or 'below'. Default is 'above'.
    resize_width : float, optional
        Fraction of the line width to resize the table to; None disables resizing.
    digits : int, optional
        Significant digits for floats. Default is 6.
    custom_column_names : list of str, optional
        Headers replacing the DataFrame column names.

    Returns
    -------
    str
        LaTeX table.
    """
    if not isinstance(data, pd.DataFrame):
        raise ValueError("Data must be a pandas DataFrame.")
    if caption_position not in ('above', 'below'):
        raise ValueError("caption_position must be 'above' or 'below'.")

    names = custom_column_names or [str(column).replace('_', '\\_') for column in data.columns]
    if len(names) != len(data.columns):
        raise ValueError("custom_column_names must match the number of columns.")
    headers = " & ".join(names)
    rows = [" & ".join(_latex_cell(value, digits) for value in row) + "\\\\"
            for row in data.itertuples(index=False, name=None)]

    table = "\\begin{table}[H]\n"
    table += "\\begin{center}\n"
    if caption_position == 'above':
        table += f"\\caption{{{caption}}}\n"
        if label:
            table += f"\\label{{{label}}}\n"
    if resize_width:
        table += f"\\resizebox{{{resize_width}\\linewidth}}{{!}}{{%\n"
    table += f"\\begin{{tabular}}{{{'r' * len(names)}}}\n"
    table += "\\hline\n"
    table += f"{headers} \\\\\n"
    table += "\\midrule\n"
    for row in rows:
        table += f"{row}\n"
    table += "\\hline\n"
    table += "\\end{tabular}\n"
    if resize_width:
        table += "}% end resizebox\n"
    if note:
        table += "\\vspace{.2cm}\n"
        table += "\\begin{tabular}{@{}p{0.9\\linewidth}@{}}\n"
        table += f"\\small {note}\n"
        table += "\\end{tabular}\n"
    if caption_position == 'below':
        table += f"\\caption{{{caption}}}\n"
        if label:
            table += f"\\label{{{label}}}\n"
    table += "\\end{center}\n"
    table += "\\end{table}\n"

    return format_latex_content(table)


def write_latex(data, path, **kwargs):
    """Write `data_to_latex(data, **kwargs)` to a .tex file."""
    with open(path, 'w', encoding='utf-8') as file:
        file.write(data_to_latex(data, **kwargs))
    logger.info("Wrote %s", path)
