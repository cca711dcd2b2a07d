"""Plain-text serialization for matrices, tables and key=value files.

Matrix CSV format
-----------------
The first non-comment line is a header ``rows,cols,field`` with ``field``
in {``real``, ``complex``}; each following line holds one comma-separated
matrix row.  Lines starting with ``#`` are comments.  Values are written
with Python's shortest round-trippable decimal repr, so write/parse is
lossless for finite values; complex entries use the ``re+imj`` form.

Tables are ordinary CSV with a header row of column names; all cells are
kept as strings on read.  Config and model metadata use flat
``key=value`` lines with ``#`` comments; list values are comma separated.
"""

import numpy as np

from .errors import MatrixFormatError

__all__ = [
    "format_value",
    "parse_value",
    "write_matrix_csv",
    "parse_matrix_csv",
    "write_table",
    "read_table",
    "write_keyvalues",
    "read_keyvalues",
]


def format_value(v):
    """Shortest round-trippable decimal form; complex as ``re+imj``."""
    if isinstance(v, complex) or np.iscomplexobj(v):
        v = complex(v)
        sign = "+" if (v.imag >= 0 or np.isnan(v.imag)) else "-"
        return f"{v.real!r}{sign}{abs(v.imag)!r}j"
    return repr(float(v))


def parse_value(text, complex_field=False):
    text = text.strip()
    try:
        return complex(text) if complex_field else float(text)
    except ValueError:
        raise MatrixFormatError(f"non-numeric cell {text!r}") from None


def write_matrix_csv(path, M):
    """Write a 2-D array in the matrix CSV format described above."""
    M = np.atleast_2d(np.asarray(M))
    if M.ndim != 2:
        raise MatrixFormatError("only 2-D matrices are supported")
    field = "complex" if np.iscomplexobj(M) else "real"
    rows, cols = M.shape
    with open(path, "w") as fh:
        fh.write(f"{rows},{cols},{field}\n")
        for r in range(rows):
            fh.write(",".join(format_value(v) for v in M[r]) + "\n")


def parse_matrix_csv(path):
    """Read a matrix CSV file back into an ndarray.

    Raises :class:`MatrixFormatError` naming the offending 1-based data
    row (and column) for ragged rows or non-numeric cells.
    """
    with open(path) as fh:
        lines = [ln.strip() for ln in fh]
    lines = [ln for ln in lines if ln and not ln.startswith("#")]
    if not lines:
        raise MatrixFormatError(f"{path}: empty matrix file")
    header = lines[0].split(",")
    if len(header) != 3:
        raise MatrixFormatError(f"{path}: header must be 'rows,cols,field'")
    try:
        rows, cols = int(header[0]), int(header[1])
    except ValueError:
        raise MatrixFormatError(f"{path}: non-integer dimensions in header") from None
    field = header[2].strip()
    if field not in ("real", "complex"):
        raise MatrixFormatError(f"{path}: unknown field {field!r}")
    body = lines[1:]
    if len(body) != rows:
        raise MatrixFormatError(
            f"{path}: header promises {rows} rows, file has {len(body)}"
        )
    out = np.empty((rows, cols), dtype=complex if field == "complex" else float)
    for r, line in enumerate(body, start=1):
        cells = line.split(",")
        if len(cells) != cols:
            raise MatrixFormatError(
                f"{path}: row {r} has {len(cells)} cells, expected {cols}"
            )
        for c, cell in enumerate(cells, start=1):
            try:
                out[r - 1, c - 1] = parse_value(cell, field == "complex")
            except MatrixFormatError as exc:
                raise MatrixFormatError(f"{path}: row {r}, column {c}: {exc}") from None
    return out


def write_table(path, header, rows):
    """Write a CSV table: a header of column names, then stringified rows."""
    with open(path, "w") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(str(cell) for cell in row) + "\n")


def read_table(path):
    """Read a CSV table written by :func:`write_table`.

    Returns ``(header, rows)`` with all cells as strings.
    """
    with open(path) as fh:
        lines = [ln.rstrip("\n") for ln in fh]
    lines = [ln for ln in lines if ln and not ln.startswith("#")]
    if not lines:
        raise MatrixFormatError(f"{path}: empty table file")
    header = lines[0].split(",")
    rows = []
    for i, line in enumerate(lines[1:], start=1):
        cells = line.split(",")
        if len(cells) != len(header):
            raise MatrixFormatError(
                f"{path}: row {i} has {len(cells)} cells, expected {len(header)}"
            )
        rows.append(cells)
    return header, rows


def write_keyvalues(path, mapping):
    with open(path, "w") as fh:
        for key, value in mapping.items():
            if isinstance(value, (list, tuple)):
                value = ",".join(str(v) for v in value)
            fh.write(f"{key}={value}\n")


def read_keyvalues(path):
    """Read flat ``key=value`` lines into a dict of strings."""
    out = {}
    with open(path) as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise MatrixFormatError(f"{path}: line {lineno} is not key=value")
            key, value = line.split("=", 1)
            out[key.strip()] = value.strip()
    return out
