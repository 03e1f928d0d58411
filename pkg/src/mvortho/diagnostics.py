"""Quality metrics: Gram error matrix, commuting-condition residuals,
condition numbers, and reproducing-kernel (Christoffel) quantities."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import NumericalFailure
from .evaluation import BasisEvaluation
from .measures import DiscreteMeasure
from .recurrence import RecurrenceData

DEFAULT_CHUNK = 131072


@dataclass
class ErrorReport:
    """Gram error of a computed basis w.r.t. its construction measure.

    ``error_matrix`` is blockGram - I over all degrees; ``max_abs`` its
    entrywise maximum magnitude.  ``per_degree_cond`` and
    ``cc_residuals`` are attached by the experiment driver when
    available.
    """

    error_matrix: np.ndarray
    max_abs: float
    per_degree_cond: np.ndarray | None = None
    cc_residuals: list | None = None


def gram_matrix_streaming(evaluate_chunk, measure: DiscreteMeasure, size: int,
                          chunk_size: int = DEFAULT_CHUNK) -> np.ndarray:
    """Accumulate sum_m w_m v(x_m) v(x_m)^T without materializing all values.

    ``evaluate_chunk`` maps an (m, d) point chunk to a (size, m) value
    matrix.
    """
    gram = np.zeros((size, size))
    for lo in range(0, measure.n_nodes, chunk_size):
        sl = slice(lo, min(lo + chunk_size, measure.n_nodes))
        vals = evaluate_chunk(measure.nodes[sl])
        gram += (vals * measure.weights[sl][None, :]) @ vals.T
    return 0.5 * (gram + gram.T)


def gram_error(basis_values: BasisEvaluation, measure: DiscreteMeasure) -> ErrorReport:
    """Gram error matrix of materialized basis values."""
    stacked = basis_values.stacked
    gram = (stacked * measure.weights[None, :]) @ stacked.T
    err = 0.5 * (gram + gram.T) - np.eye(stacked.shape[0])
    return ErrorReport(error_matrix=err, max_abs=float(np.max(np.abs(err))))


def gram_error_streaming(evaluate_chunk, measure: DiscreteMeasure, size: int,
                         chunk_size: int = DEFAULT_CHUNK) -> ErrorReport:
    """Gram error accumulated in node chunks (large node sets)."""
    gram = gram_matrix_streaming(evaluate_chunk, measure, size, chunk_size)
    err = gram - np.eye(size)
    return ErrorReport(error_matrix=err, max_abs=float(np.max(np.abs(err))))


def commuting_residuals(rec: RecurrenceData, max_degree: int | None = None) -> list:
    """Max-norm defects of the three compatibility identities.

    Returns tuples (n, i, j, res1, res2, res3) for 0 <= n < max_degree and
    coordinate pairs i < j.  The first identity applies from n = 0 (the
    degree-0 raising term is vacuous); the other two start at n = 1 and
    are reported as 0 for n = 0.
    """
    n_max = rec.max_degree if max_degree is None else max_degree
    out = []
    for n in range(n_max):
        for i in range(rec.d):
            for j in range(i + 1, rec.d):
                b_i, b_j = rec.B[n + 1][i], rec.B[n + 1][j]
                a_i, a_j = rec.A[n + 1][i], rec.A[n + 1][j]
                defect1 = b_i @ b_j.T - b_j @ b_i.T + a_i @ a_j - a_j @ a_i
                if n >= 1:
                    p_i, p_j = rec.B[n][i], rec.B[n][j]
                    defect1 += p_i.T @ p_j - p_j.T @ p_i
                    defect2 = (p_i @ a_j - p_j @ a_i
                               + rec.A[n][i] @ p_j - rec.A[n][j] @ p_i)
                    defect3 = p_i @ b_j - p_j @ b_i
                    res2 = float(np.max(np.abs(defect2)))
                    res3 = float(np.max(np.abs(defect3)))
                else:
                    res2 = res3 = 0.0
                out.append((n, i, j, float(np.max(np.abs(defect1))), res2, res3))
    return out


def max_commuting_residual(rec: RecurrenceData, max_degree: int | None = None) -> float:
    rows = commuting_residuals(rec, max_degree)
    if not rows:
        return 0.0
    return max(max(row[3:]) for row in rows)


def symmetry_defect(rec: RecurrenceData, max_degree: int | None = None) -> float:
    """Largest |A - A^T| entry over all stored degrees and coordinates."""
    n_max = rec.max_degree if max_degree is None else max_degree
    worst = 0.0
    for n in range(1, n_max + 1):
        for mat in rec.A[n]:
            worst = max(worst, float(np.max(np.abs(mat - mat.T))) if mat.size else 0.0)
    return worst


def rank_margins(rec: RecurrenceData, max_degree: int | None = None):
    """Smallest relative singular values certifying the rank conditions.

    Returns (per-coordinate margin, stacked margin): the minimum over
    degrees of sigma_min/sigma_max for each raising matrix and for the
    vertically stacked raising matrix.
    """
    n_max = rec.max_degree if max_degree is None else max_degree
    per_coord = np.inf
    stacked = np.inf
    for n in range(1, n_max + 1):
        for mat in rec.B[n]:
            svals = np.linalg.svd(mat, compute_uv=False)
            per_coord = min(per_coord, float(svals[-1] / svals[0]))
        svals = np.linalg.svd(rec.stacked_raising(n), compute_uv=False)
        stacked = min(stacked, float(svals[-1] / svals[0]))
    return per_coord, stacked


def condition_numbers(per_degree_matrices) -> np.ndarray:
    """2-norm condition numbers, one per degree.

    Each entry of ``per_degree_matrices`` is either a matrix or a
    sequence of matrices (averaged, as for per-coordinate moment
    matrices).  Singular-to-precision matrices give +inf, not an error.
    """
    out = []
    for entry in per_degree_matrices:
        mats = entry if isinstance(entry, (list, tuple)) else [entry]
        vals = []
        for mat in mats:
            svals = np.linalg.svd(np.atleast_2d(mat), compute_uv=False)
            vals.append(float(svals[0] / svals[-1]) if svals[-1] > 0 else np.inf)
        out.append(float(np.mean(vals)))
    return np.array(out)


def gram_condition_numbers(gram: np.ndarray, cumulative_dims) -> np.ndarray:
    """cond of each leading degree block of a stacked Gram matrix."""
    return condition_numbers([gram[:hi, :hi] for hi in cumulative_dims])


def christoffel(basis_values: BasisEvaluation):
    """Normalized reproducing-kernel diagonal and Christoffel function.

    K(x) = (1/R_N) sum of squared basis values at x; the Christoffel
    function is its reciprocal.  K is a sum of squares, so a
    non-positive value is a numerical breakdown.
    """
    stacked = basis_values.stacked
    kernel = np.sum(stacked ** 2, axis=0) / stacked.shape[0]
    if np.any(kernel <= 0):
        raise NumericalFailure("reproducing-kernel diagonal not positive; "
                               "basis evaluation broke down")
    return kernel, 1.0 / kernel


def christoffel_streaming(evaluate_chunk, points, size: int,
                          chunk_size: int = DEFAULT_CHUNK):
    """Kernel diagonal over a large point set, chunked."""
    pts = np.asarray(points, dtype=float)
    kernel = np.empty(pts.shape[0])
    for lo in range(0, pts.shape[0], chunk_size):
        sl = slice(lo, min(lo + chunk_size, pts.shape[0]))
        vals = evaluate_chunk(pts[sl])
        kernel[sl] = np.sum(vals ** 2, axis=0) / size
    if np.any(kernel <= 0):
        raise NumericalFailure("reproducing-kernel diagonal not positive")
    return kernel, 1.0 / kernel
