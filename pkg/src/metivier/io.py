"""Serialization: grid files (JSON header + raw complex), deterministic CSV."""

import json

import numpy as np

from .fields import GridFunction


def save_grid(path, gf):
    """Write a grid function: one JSON header line, then little-endian
    float64 (re, im) pairs in C order."""
    header = {
        "domain": gf.domain, "n": gf.n, "m": gf.m,
        "shape": list(gf.values.shape),
        "x_extent": gf.x_extent, "u_extent": gf.u_extent,
    }
    with open(path, "wb") as fh:
        fh.write((json.dumps(header, sort_keys=True) + "\n").encode())
        fh.write(np.ascontiguousarray(gf.values, dtype="<c16").tobytes())


def load_grid(path):
    with open(path, "rb") as fh:
        header = json.loads(fh.readline().decode())
        raw = fh.read()
    vals = np.frombuffer(raw, dtype="<c16").reshape(header["shape"])
    return GridFunction(header["domain"], header["n"], header["m"], vals,
                        header["x_extent"], header["u_extent"])


def format_value(v):
    """Deterministic shortest-roundtrip text for CSV cells."""
    if isinstance(v, (np.floating, float)):
        return repr(float(v))
    if isinstance(v, (np.integer, int)):
        return str(int(v))
    if isinstance(v, complex):
        return repr(v)
    return str(v)


def write_csv(path, columns, rows):
    """Byte-deterministic CSV: fixed column order, repr-formatted floats,
    '\n' line endings."""
    lines = [",".join(columns)]
    for row in rows:
        lines.append(",".join(format_value(row[c]) for c in columns))
    with open(path, "w", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


def read_points_csv(path, n, m):
    """Points file with columns x0..x_{2n-1},u0..u_{m-1} (header optional)."""
    from .groups import GroupPoint

    data = np.genfromtxt(path, delimiter=",", names=None, dtype=float,
                         skip_header=0, invalid_raise=False)
    data = np.atleast_2d(data)
    if np.isnan(data[0]).any():
        data = data[1:]
    if data.shape[1] != 2 * n + m:
        raise ValueError(f"points file needs {2*n+m} columns, found {data.shape[1]}")
    return [GroupPoint(r[: 2 * n], r[2 * n:]) for r in data]


PLOTSCRIPT = """\
#!/usr/bin/env python3
\"\"\"Plot the numeric columns of {csv} against {xcol}.\"\"\"
import csv
import matplotlib.pyplot as plt


def is_float(v):
    try:
        float(v)
        return True
    except ValueError:
        return False


rows = list(csv.DictReader(open({csv!r})))
num = {{c: [float(r[c]) for r in rows] for c in rows[0]
       if all(is_float(r[c]) for r in rows)}}
for c in num:
    if c == {xcol!r}:
        continue
    plt.plot(num[{xcol!r}], num[c], marker="o", label=c)
plt.xlabel({xcol!r})
plt.legend()
plt.tight_layout()
plt.savefig({png!r}, dpi=150)
print("wrote", {png!r})
"""


def write_plotscript(path, csv_path, xcol):
    body = PLOTSCRIPT.format(csv=csv_path, xcol=xcol, png=str(csv_path) + ".png")
    with open(path, "w") as fh:
        fh.write(body)
