"""Degree-by-degree recurrence matrices from moments of the running basis.

Instead of orthogonalizing a fixed spanning set, the algorithm assumes
the recurrence matrices through degree n are known, evaluates the
orthonormal basis with them, forms two families of moment matrices, and
recovers the degree-(n+1) matrices from factorizations of those moments:

* coordinate moments of the current block give the symmetric A matrices
  directly;
* the Gram of the *residual* polynomials (coordinate-shifted blocks with
  their known lower-degree parts removed) equals B B^T, so an
  eigen-decomposition yields the left factor and singular values of each
  raising matrix;
* mixed residual Grams determine the upper blocks of the right singular
  factors, and the remaining rows come from orthonormality (d = 2), a
  kernel argument plus an explicit orthogonal completion (d = 3), or a
  coupled orthogonal Procrustes solve (d > 3, experimental).

For d > 2 the degree-1 raising matrices fall back to the moment method,
whose tiny degree-1 Gram is well-conditioned.  After every degree the new
matrices are rotated into canonical form so the next block can be
evaluated through the diagonal identity.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ClosureError, RankDeficiencyError
from .evaluation import _next_block, fix_column_signs, fix_vector_sign
from .indexing import MultiIndexSet
from .measures import DiscreteMeasure
from .recurrence import RecurrenceData
from . import moment_method
from .wopp import solve_orthogonal_factors

RANK_TOL = 1e-10          # singular values below RANK_TOL * max treated as zero
PSD_CLIP = -1e-10         # most negative admissible eigenvalue of a PSD residual
W_ORTHO_TOL = 1e-8        # orthogonality defect allowed in assembled completions
DEFAULT_CHUNK = 131072


@dataclass
class StieltjesState:
    """Algorithm state after committing degree ``degree``.

    ``recurrence`` holds canonical matrices through ``degree``;
    ``values_cur``/``values_prev`` are the degree blocks of basis values
    over the measure's nodes, consistent with those matrices.  During a
    degree step ``pending_centers`` carries the not-yet-committed A
    matrices needed by the residual basis.
    """

    measure: DiscreteMeasure
    index_set: MultiIndexSet
    recurrence: RecurrenceData
    values_cur: np.ndarray
    values_prev: np.ndarray | None
    degree: int
    pending_centers: list | None = None


@dataclass
class StieltjesDiagnostics:
    """Per-run health metrics.

    ``t_condition[n]`` averages the condition numbers of the symmetric
    residual Grams formed at degree n; ``gram_drift[k]`` bounds the
    orthonormality defect of the block committed at degree k+1;
    ``completion_defect`` records orthonormality defects of assembled
    right-factor columns.
    """

    t_condition: list = field(default_factory=list)
    gram_drift: list = field(default_factory=list)
    completion_defect: list = field(default_factory=list)
    moment_fallbacks: int = 0
    closures_3d: int = 0
    wopp_sweeps: list = field(default_factory=list)


def coordinate_moment(state: StieltjesState, i: int) -> np.ndarray:
    """Symmetrized moment matrix of x_i against the current degree block."""
    w = state.measure.weights * state.measure.nodes[:, i]
    s = (state.values_cur * w[None, :]) @ state.values_cur.T
    return 0.5 * (s + s.T)


def residual_values(state: StieltjesState, i: int) -> np.ndarray:
    """Coordinate-i residual polynomials at the nodes.

    x_i p_n minus its projections onto degrees n and n-1; requires
    ``pending_centers``.  Equals B_{n+1,i} p_{n+1} in exact arithmetic.
    """
    if state.pending_centers is None:
        raise ValueError("pending centers not set for this degree step")
    out = state.measure.nodes[:, i][None, :] * state.values_cur
    out = out - state.pending_centers[i] @ state.values_cur
    if state.degree >= 1:
        out = out - state.recurrence.B[state.degree][i].T @ state.values_prev
    return out


def residual_gram(state: StieltjesState, i: int, j: int) -> np.ndarray:
    """Mixed residual moment matrix; symmetrized when i == j."""
    t = (residual_values(state, i) * state.measure.weights[None, :]) \
        @ residual_values(state, j).T
    return 0.5 * (t + t.T) if i == j else t


def symmetric_factor(t_sym: np.ndarray, rank_tol: float = RANK_TOL,
                     where: str = ""):
    """Left factor and singular values of a raising matrix from its
    symmetric residual Gram T = B B^T.

    Returns (U, s) with eigenvalues sorted non-increasing, s their square
    roots, and U sign-fixed.  Raises RankDeficiencyError when the
    smallest singular value falls below ``rank_tol`` times the largest.
    """
    evals, vecs = np.linalg.eigh(0.5 * (t_sym + t_sym.T))
    order = np.argsort(-evals, kind="stable")
    evals = evals[order]
    vecs = fix_column_signs(vecs[:, order])
    s = np.sqrt(np.clip(evals, 0.0, None))
    if s[-1] <= rank_tol * s[0]:
        raise RankDeficiencyError(
            f"residual Gram rank-deficient{where} "
            f"(singular value ratio {s[-1] / s[0] if s[0] else 0.0:.3e})")
    return vecs, s


def scaled_cross(u_i, s_i, t_ij, u_j, s_j) -> np.ndarray:
    """Sigma_i^-1 U_i^T T_{ij} U_j Sigma_j^-1 for mixed residual moments."""
    return (u_i / s_i[None, :]).T @ t_ij @ (u_j / s_j[None, :])


def rank_one_completion(vhat: np.ndarray, clip_tol: float = PSD_CLIP) -> np.ndarray:
    """Last right-factor row y for d = 2 from y y^T = I - vhat^T vhat.

    Takes the dominant eigenpair of the rank-1 residual; sign fixed
    deterministically (the recurrence is independent of it).  Raises
    ClosureError if the residual has an eigenvalue below ``clip_tol``,
    which signals corrupted upstream moments.
    """
    resid = np.eye(vhat.shape[1]) - vhat.T @ vhat
    evals, vecs = np.linalg.eigh(0.5 * (resid + resid.T))
    if evals[0] < clip_tol:
        raise ClosureError(
            f"orthonormality residual indefinite (min eigenvalue {evals[0]:.3e})")
    top = max(evals[-1], 0.0)
    return fix_vector_sign(vecs[:, -1]) * np.sqrt(top)


def psd_sqrt(mat: np.ndarray, clip_tol: float = PSD_CLIP) -> np.ndarray:
    """Symmetric PSD square root, clipping roundoff-negative eigenvalues.

    Raises ClosureError for eigenvalues below ``clip_tol``.
    """
    evals, vecs = np.linalg.eigh(0.5 * (mat + mat.T))
    if evals[0] < clip_tol:
        raise ClosureError(
            f"matrix not positive semi-definite (min eigenvalue {evals[0]:.3e})")
    return (vecs * np.sqrt(np.clip(evals, 0.0, None))[None, :]) @ vecs.T


def kernel_completion_basis(raising_prev_first: np.ndarray, u_j: np.ndarray,
                            s_j: np.ndarray, expected_dim: int,
                            rank_tol: float = RANK_TOL) -> np.ndarray:
    """Orthonormal kernel basis constraining the unknown right-factor rows.

    The commuting conditions force those rows into the kernel of
    K = B_{n,1} U_j Sigma_j.  Raises RankDeficiencyError when the kernel
    dimension differs from ``expected_dim``.
    """
    k_mat = raising_prev_first @ (u_j * s_j[None, :])
    _, svals, vt = np.linalg.svd(k_mat, full_matrices=True)
    rank = int(np.sum(svals > rank_tol * svals[0])) if svals.size else 0
    if k_mat.shape[1] - rank != expected_dim:
        raise RankDeficiencyError(
            f"kernel dimension {k_mat.shape[1] - rank} != expected {expected_dim}")
    return fix_column_signs(vt[rank:].T)


def orthogonal_completion(block: np.ndarray) -> np.ndarray:
    """Extend an m x m principal block to an (m+1) x (m+1) orthogonal matrix.

    The missing last-row entries are determined up to one overall sign by
    unit-column and pairwise-orthogonality conditions; the last column is
    the unit vector completing the column space.  Signs are fixed
    deterministically.
    """
    m = block.shape[0]
    col_sq = np.sum(block ** 2, axis=0)
    magnitudes = np.sqrt(np.clip(1.0 - col_sq, 0.0, None))
    lead = int(np.argmax(magnitudes))
    last_row = np.zeros(m)
    if magnitudes[lead] > 1e-13:
        last_row[lead] = magnitudes[lead]
        for k in range(m):
            if k != lead:
                last_row[k] = -(block[:, k] @ block[:, lead]) / last_row[lead]
    tall = np.vstack([block, last_row[None, :]])
    u, _, _ = np.linalg.svd(tall)
    last_col = fix_vector_sign(u[:, -1])
    return np.hstack([tall, last_col[:, None]])


def three_dim_completion(vhat_pair, psi_pair, cross_scaled, rank_tol=RANK_TOL,
                         clip_tol=PSD_CLIP, ortho_tol=W_ORTHO_TOL):
    """Remaining right-factor rows for both non-reference coordinates, d = 3.

    The second coordinate's orthogonal degree of freedom is gauged to the
    identity; the third's is recovered from the reduced SVDs of the two
    kernel-restricted weight blocks and an explicit orthogonal completion
    of the resulting principal block.

    Returns (rows_2, rows_3, orthogonality_defect).
    """
    vhat2, vhat3 = vhat_pair
    psi2, psi3 = psi_pair
    dr = psi2.shape[1]
    d2 = np.eye(dr) - psi2.T @ vhat2.T @ vhat2 @ psi2
    d3 = np.eye(dr) - psi3.T @ vhat3.T @ vhat3 @ psi3
    pad = np.zeros((dr, 1))
    e2 = np.hstack([psd_sqrt(d2, clip_tol), pad])
    e3 = np.hstack([psd_sqrt(d3, clip_tol), pad])
    h23 = psi2.T @ (cross_scaled - vhat2.T @ vhat3) @ psi3

    x2, y2, z2t = np.linalg.svd(e2)
    x3, y3, z3t = np.linalg.svd(e3)
    if y2[-1] <= rank_tol * y2[0] or y3[-1] <= rank_tol * y3[0]:
        raise ClosureError("kernel-restricted weight block nearly singular")
    principal = (x2 / y2[None, :]).T @ h23 @ (x3 / y3[None, :])
    w_full = orthogonal_completion(principal)
    defect = float(np.max(np.abs(w_full.T @ w_full - np.eye(dr + 1))))
    if defect > ortho_tol:
        raise ClosureError(
            f"assembled completion not orthogonal (defect {defect:.3e})")
    # w_full plays the role of Z2^T W3^T Z3, so undo the conjugation and
    # transpose to recover the third coordinate's orthogonal factor.
    w3 = (z2t.T @ w_full @ z3t).T
    rows_2 = (psi2 @ e2).T
    rows_3 = (psi3 @ (e3 @ w3)).T
    return rows_2, rows_3, defect


def degree_one_from_moments(measure: DiscreteMeasure) -> list:
    """Degree-1 raising matrices via the moment method (d > 2 start).

    The affine-polynomial Gram is size d+1 and typically well-conditioned,
    so Cholesky-based extraction is safe exactly where the moment
    factorizations alone cannot pin down the right factors.
    """
    iset = MultiIndexSet.build(measure.d, 1)
    gram = moment_method.build_gram(moment_method.monomial_basis(iset), measure)
    if gram.failure_degree is not None:
        raise RankDeficiencyError(
            "measure degenerate on affine polynomials", degree=1)
    return moment_method.extract_recurrence(gram, 1).B[1]


def stieltjes_recurrence(measure: DiscreteMeasure, index_set: MultiIndexSet,
                         max_degree: int, *, allow_high_dim: bool = False,
                         rank_tol: float = RANK_TOL,
                         chunk_size: int = DEFAULT_CHUNK,
                         final_condition: bool = True,
                         wopp_max_iter: int = 500, wopp_tol: float = 1e-10):
    """Compute canonical recurrence matrices through ``max_degree``.

    Parameters
    ----------
    measure : DiscreteMeasure
        Must be non-degenerate through degree 2 * max_degree + 1 and have
        d >= 2 (the univariate problem has its own classical method).
    index_set : MultiIndexSet
        Degree bookkeeping, at least as deep as ``max_degree``.
    allow_high_dim : bool
        Enable the experimental d > 3 path (coupled Procrustes solves).
    final_condition : bool
        Also compute the residual-Gram condition numbers at
        ``max_degree`` so conditioning diagnostics cover every degree.

    Returns
    -------
    (RecurrenceData, StieltjesDiagnostics)
    """
    d = measure.d
    if d < 2:
        raise ValueError("degree advancement requires d >= 2; "
                         "use the univariate routines for d = 1")
    if index_set.d != d:
        raise ValueError("index set dimension does not match the measure")
    if index_set.max_degree < max_degree:
        raise ValueError("index set shallower than requested degree")
    if d > 3 and max_degree > 1 and not allow_high_dim:
        raise ValueError("d > 3 needs the experimental orthogonal-factor "
                         "solver; pass allow_high_dim=True to enable it")

    rec = RecurrenceData(d=d, max_degree=0, A=[None], B=[None], lam=[None])
    p0 = 1.0 / np.sqrt(measure.total_mass)
    state = StieltjesState(
        measure=measure, index_set=index_set, recurrence=rec,
        values_cur=np.full((1, measure.n_nodes), p0),
        values_prev=None, degree=0)
    diags = StieltjesDiagnostics()
    for n in range(max_degree):
        try:
            _advance(state, diags, rank_tol=rank_tol, chunk_size=chunk_size,
                     wopp_max_iter=wopp_max_iter, wopp_tol=wopp_tol)
        except (RankDeficiencyError, ClosureError) as exc:
            exc.degree = n + 1
            raise
    if final_condition:
        centers = [coordinate_moment(state, i) for i in range(d)]
        t_diag, _ = _moment_pass(state, centers, chunk_size, need_pairs=False)
        diags.t_condition.append(_mean_condition(t_diag, d))
    return state.recurrence, diags


def _mean_condition(t_blocks, d) -> float:
    conds = []
    for i in range(d):
        evals = np.linalg.eigvalsh(t_blocks[(i, i)])
        conds.append(float(evals[-1] / evals[0]) if evals[0] > 0 else np.inf)
    return float(np.mean(conds))


def _moment_pass(state: StieltjesState, centers, chunk_size, need_pairs=True):
    """Accumulate residual Grams in node chunks.

    Returns (diagonal blocks {(i,i): T}, mixed blocks {(i,j): T, i<j});
    mixed blocks are skipped when ``need_pairs`` is false.
    """
    d = state.measure.d
    n = state.degree
    r = state.values_cur.shape[0]
    pairs = [(i, j) for i in range(d) for j in range(i, d)
             if need_pairs or i == j]
    acc = {key: np.zeros((r, r)) for key in pairs}
    nodes, w = state.measure.nodes, state.measure.weights
    raising_prev = state.recurrence.B[n] if n >= 1 else None
    for lo in range(0, state.measure.n_nodes, chunk_size):
        sl = slice(lo, min(lo + chunk_size, state.measure.n_nodes))
        pc = state.values_cur[:, sl]
        resid = []
        for i in range(d):
            t = nodes[sl, i][None, :] * pc - centers[i] @ pc
            if raising_prev is not None:
                t -= raising_prev[i].T @ state.values_prev[:, sl]
            resid.append(t)
        for i, j in pairs:
            acc[(i, j)] += (resid[i] * w[sl][None, :]) @ resid[j].T
    diag = {}
    mixed = {}
    for (i, j), mat in acc.items():
        if i == j:
            diag[(i, j)] = 0.5 * (mat + mat.T)
        else:
            mixed[(i, j)] = mat
    return diag, mixed


def _advance(state: StieltjesState, diags: StieltjesDiagnostics, *,
             rank_tol, chunk_size, wopp_max_iter, wopp_tol):
    """Compute, canonicalize, and commit the matrices of degree n+1."""
    measure, iset = state.measure, state.index_set
    d, n = measure.d, state.degree
    r_n = state.values_cur.shape[0]
    r_next = iset.r(n + 1)
    dr_n = r_n - iset.r(n - 1)
    dr_next = r_next - r_n

    centers = [coordinate_moment(state, i) for i in range(d)]
    state.pending_centers = centers
    t_diag, t_mixed = _moment_pass(state, centers, chunk_size)
    diags.t_condition.append(_mean_condition(t_diag, d))

    if d > 2 and n == 0:
        raisings = degree_one_from_moments(measure)
        diags.moment_fallbacks += 1
    else:
        left, sing = [], []
        for i in range(d):
            u_i, s_i = symmetric_factor(t_diag[(i, i)], rank_tol,
                                        where=f" (coordinate {i})")
            left.append(u_i)
            sing.append(s_i)
        vhat = {j: scaled_cross(left[0], sing[0], t_mixed[(0, j)],
                                left[j], sing[j])
                for j in range(1, d)}
        rows = {}
        if d == 2:
            rows[1] = rank_one_completion(vhat[1])[None, :]
        elif d == 3:
            psi = {j: kernel_completion_basis(state.recurrence.B[n][0],
                                              left[j], sing[j], dr_n, rank_tol)
                   for j in (1, 2)}
            cross = scaled_cross(left[1], sing[1], t_mixed[(1, 2)],
                                 left[2], sing[2])
            rows[1], rows[2], defect = three_dim_completion(
                (vhat[1], vhat[2]), (psi[1], psi[2]), cross,
                rank_tol=rank_tol)
            diags.completion_defect.append(defect)
            diags.closures_3d += 1
        else:
            psi, weight_blocks, targets = {}, {}, {}
            for j in range(1, d):
                psi[j] = kernel_completion_basis(state.recurrence.B[n][0],
                                                 left[j], sing[j], dr_n,
                                                 rank_tol)
                block = np.eye(dr_n) - psi[j].T @ vhat[j].T @ vhat[j] @ psi[j]
                weight_blocks[j] = np.hstack(
                    [psd_sqrt(block), np.zeros((dr_n, dr_next - dr_n))])
            for i in range(1, d):
                for j in range(i + 1, d):
                    targets[(i, j)] = psi[i].T @ (
                        scaled_cross(left[i], sing[i], t_mixed[(i, j)],
                                     left[j], sing[j])
                        - vhat[i].T @ vhat[j]) @ psi[j]
            solved = solve_orthogonal_factors(weight_blocks, targets,
                                              max_iter=wopp_max_iter,
                                              tol=wopp_tol)
            diags.wopp_sweeps.append(solved.iterations)
            for j in range(1, d):
                rows[j] = (psi[j] @ (weight_blocks[j] @ solved.W[j])).T

        raisings = [np.hstack([left[0] * sing[0][None, :],
                               np.zeros((r_n, dr_next))])]
        for j in range(1, d):
            right = np.vstack([vhat[j], rows[j]])
            diags.completion_defect.append(
                float(np.max(np.abs(right.T @ right - np.eye(r_n)))))
            raisings.append((left[j] * sing[j][None, :]) @ right.T)

    _commit_degree(state, centers, raisings)
    _evaluate_committed_degree(state, diags, chunk_size)
    state.pending_centers = None


def _commit_degree(state: StieltjesState, centers, raisings,
                   cond_tol: float = 1e-12):
    """Rotate the new degree into canonical form and append it."""
    rec = state.recurrence
    n = state.degree
    gram = np.zeros((raisings[0].shape[1],) * 2)
    for mat in raisings:
        gram += mat.T @ mat
    evals, vecs = np.linalg.eigh(0.5 * (gram + gram.T))
    order = np.argsort(-evals, kind="stable")
    evals = evals[order]
    vecs = fix_column_signs(vecs[:, order])
    if evals[-1] <= cond_tol * evals[0]:
        raise RankDeficiencyError(
            f"stacked raising matrix rank-deficient at degree {n + 1}",
            degree=n + 1)
    rec.A.append([0.5 * (c + c.T) for c in centers])
    rec.B.append([mat @ vecs for mat in raisings])
    rec.lam.append(evals)
    rec.max_degree = n + 1


def _evaluate_committed_degree(state: StieltjesState,
                               diags: StieltjesDiagnostics, chunk_size):
    """Evaluate the committed block over all nodes, tracking Gram drift."""
    measure = state.measure
    n = state.degree
    r_next = state.recurrence.r(n + 1)
    out = np.empty((r_next, measure.n_nodes))
    gram_new = np.zeros((r_next, r_next))
    gram_cross = np.zeros((r_next, state.values_cur.shape[0]))
    for lo in range(0, measure.n_nodes, chunk_size):
        sl = slice(lo, min(lo + chunk_size, measure.n_nodes))
        block = _next_block(state.recurrence, n, measure.nodes[sl],
                            state.values_cur[:, sl],
                            None if state.values_prev is None
                            else state.values_prev[:, sl])
        out[:, sl] = block
        weighted = block * measure.weights[sl][None, :]
        gram_new += weighted @ block.T
        gram_cross += weighted @ state.values_cur[:, sl].T
    drift = max(float(np.max(np.abs(gram_new - np.eye(r_next)))),
                float(np.max(np.abs(gram_cross))))
    diags.gram_drift.append(drift)
    state.values_prev = state.values_cur
    state.values_cur = out
    state.degree = n + 1
