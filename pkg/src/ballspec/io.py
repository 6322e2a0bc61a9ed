"""File output: MatrixMarket matrices with JSON sidecars, and sweep CSVs."""

import csv
import json
from pathlib import Path

import numpy as np
import scipy.io
import scipy.sparse as sp

__all__ = ["write_matrix", "write_sidecar", "write_sweep_csv", "read_sweep_csv"]


def write_matrix(path, matrix):
    """MatrixMarket in coordinate format; dense vectors become 1 x n matrices."""
    path = Path(path)
    m = matrix if sp.issparse(matrix) else sp.coo_matrix(np.atleast_2d(np.asarray(matrix)))
    scipy.io.mmwrite(str(path), m.tocoo(), precision=17)
    # mmwrite appends .mtx when missing
    return path if path.suffix == ".mtx" else path.with_name(path.name + ".mtx")


def write_sidecar(path, metadata):
    path = Path(path)
    path.write_text(json.dumps(metadata, indent=2, sort_keys=True) + "\n")
    return path


def write_sweep_csv(stream, rows, timing=False):
    """One line per sweep row; the wall-time column stays empty unless ``timing``."""
    from .solver import SweepRow

    w = csv.writer(stream, lineterminator="\n")
    w.writerow(SweepRow.FIELDS)
    for row in rows:
        w.writerow(row.as_list(timing=timing))


def read_sweep_csv(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))
