"""JSON round-trip for recurrence data and CSV emitters for plot data.

The JSON layout is diff-friendly: matrices as row-major nested lists,
degrees 1..N, with the ordering conventions declared up front.  Floats
serialize via Python's shortest round-trip repr, so load(dump(x))
reproduces x bit for bit.
"""

from __future__ import annotations

import json

import numpy as np

from .errors import SchemaError
from .recurrence import RecurrenceData

FORMAT_VERSION = 1
ORDERING = "graded-lex"
LAMBDA_ORDER = "non-increasing"


def recurrence_to_json(rec: RecurrenceData) -> str:
    doc = {
        "format_version": FORMAT_VERSION,
        "d": rec.d,
        "N": rec.max_degree,
        "ordering": ORDERING,
        "lambda_order": LAMBDA_ORDER,
        "A": [[rec.A[n][i].tolist() for i in range(rec.d)]
              for n in range(1, rec.max_degree + 1)],
        "B": [[rec.B[n][i].tolist() for i in range(rec.d)]
              for n in range(1, rec.max_degree + 1)],
        "lambda": None if rec.lam is None
        else [rec.lam[n].tolist() for n in range(1, rec.max_degree + 1)],
    }
    return json.dumps(doc, indent=1, sort_keys=True) + "\n"


def save_recurrence(rec: RecurrenceData, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(recurrence_to_json(rec))


def recurrence_from_json(text: str) -> RecurrenceData:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SchemaError(f"not valid JSON: {exc}") from exc
    for key in ("format_version", "d", "N", "ordering", "lambda_order", "A", "B"):
        if key not in doc:
            raise SchemaError(f"missing key {key!r}")
    if doc["format_version"] != FORMAT_VERSION:
        raise SchemaError(f"unsupported format version {doc['format_version']}")
    d, n_max = doc["d"], doc["N"]
    if not (isinstance(d, int) and d >= 1 and isinstance(n_max, int) and n_max >= 0):
        raise SchemaError("d and N must be a positive and nonnegative integer")
    if len(doc["A"]) != n_max or len(doc["B"]) != n_max:
        raise SchemaError(f"expected {n_max} degrees of matrices, got "
                          f"{len(doc['A'])}/{len(doc['B'])}")
    rec = RecurrenceData(
        d=d, max_degree=n_max,
        A=[None] + [[np.array(m, dtype=float) for m in row] for row in doc["A"]],
        B=[None] + [[np.array(m, dtype=float) for m in row] for row in doc["B"]],
        lam=None if doc.get("lambda") is None
        else [None] + [np.array(v, dtype=float) for v in doc["lambda"]],
    )
    try:
        rec.validate_shapes()
    except ValueError as exc:
        raise SchemaError(f"declared dimensions do not match stored matrices: {exc}") from exc
    if rec.lam is not None:
        for n in range(1, n_max + 1):
            if rec.lam[n].shape != (rec.r(n),):
                raise SchemaError(f"lambda[{n}] has wrong length")
    return rec


def load_recurrence(path) -> RecurrenceData:
    with open(path, encoding="utf-8") as fh:
        return recurrence_from_json(fh.read())


def write_matrix_csv(path, matrix, fmt="%.17g") -> None:
    """Plain rectangular CSV; infinities written as inf/-inf literals."""
    np.savetxt(path, np.atleast_2d(matrix), fmt=fmt, delimiter=",")


def write_log_error_csv(path, error_matrix) -> None:
    """log10 of entry magnitudes of the Gram error matrix (zero -> -inf)."""
    with np.errstate(divide="ignore"):
        write_matrix_csv(path, np.log10(np.abs(error_matrix)))


def write_condition_csv(path, cond_values) -> None:
    rows = [f"{n},{v:.17g}" for n, v in enumerate(cond_values)]
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("degree,cond\n")
        fh.write("\n".join(rows))
        if rows:
            fh.write("\n")


def write_cc_csv(path, cc_rows) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("degree,coord_i,coord_j,res1,res2,res3\n")
        for n, i, j, r1, r2, r3 in cc_rows:
            fh.write(f"{n},{i},{j},{r1:.17g},{r2:.17g},{r3:.17g}\n")


def write_christoffel_csv(path, points, kernel, christoffel_vals) -> None:
    pts = np.asarray(points)
    cols = [pts[:, k] for k in range(pts.shape[1])]
    cols += [np.asarray(kernel), np.asarray(christoffel_vals)]
    header = ",".join([f"x{k + 1}" for k in range(pts.shape[1])]
                      + ["kernel", "christoffel"])
    data = np.stack(cols, axis=1)
    np.savetxt(path, data, fmt="%.17g", delimiter=",", header=header, comments="")
