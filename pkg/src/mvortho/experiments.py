"""Experiment driver: builds a measure, runs one construction method, and
reports orthogonality error, conditioning, and compatibility residuals.

Experiments
-----------
jac2, jac3 : tensorized Jacobi measures (exact quadrature; the only
             tags where the explicit tensor-product construction applies)
ann        : uniform measure on the annulus 0.5 <= r <= 1
cur        : uniform measure between two Archimedean spirals
tor        : uniform measure inside a solid torus (d = 3)
hol        : Monte Carlo uniform measure on the square minus the unit ball
cloud      : uniform measure over a user-supplied CSV point cloud

Methods
-------
exact : explicit tensor-product recurrence matrices (jac2/jac3 only)
ms    : degree-advancing moment algorithm (stieltjes module)
mm    : moment method on monomials
ml    : moment method on bounding-box Legendre polynomials
"""

from __future__ import annotations

import dataclasses
import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import __version__, serialization
from .diagnostics import (ErrorReport, christoffel_streaming,
                          commuting_residuals, gram_condition_numbers,
                          gram_error_streaming)
from .errors import NumericalFailure
from .evaluation import evaluator as recurrence_evaluator
from .indexing import MultiIndexSet
from .measures import (annulus_measure, point_cloud_measure, spiral_measure,
                       square_minus_ball, tensor_jacobi, torus_measure)
from .moment_method import (build_gram, extract_recurrence,
                            legendre_box_basis, monomial_basis,
                            orthonormal_evaluator)
from .stieltjes import stieltjes_recurrence
from .tensor_product import canonical_reorder, tensor_recurrence
from .univariate import jacobi_recurrence

EXPERIMENTS = ("jac2", "jac3", "ann", "cur", "tor", "hol", "cloud")
METHODS = ("exact", "ms", "mm", "ml")

JACOBI_PARAMS = {
    "jac2": ((3.80, 0.78), (7.34, 8.26)),
    "jac3": ((1.61, 0.32, 3.01), (-0.89, 9.83, 7.67)),
}
DEFAULT_DEGREE = {2: 39, 3: 15}
CHRISTOFFEL_MAX_ROWS = 20000


@dataclass
class ExperimentConfig:
    """Fully describes one run; unset sizes get degree-based defaults
    large enough that every moment the algorithms need is exact where
    exactness is claimed (Gauss counts N+2 per axis, angular counts
    4N+5), except the spiral's outer angle which is intrinsically
    approximate and defaults to 25000 points."""

    experiment: str
    method: str
    degree: int | None = None
    n_points: int | None = None
    n_radial: int | None = None
    n_angular: int | None = None
    n_azimuthal: int | None = None
    mc_samples: int = 1_000_000
    seed: int = 0
    cloud_path: str | None = None
    output_dir: str = "."
    experimental_wopp: bool = False
    chunk_size: int = 65536


@dataclass
class ExperimentResult:
    config: ExperimentConfig
    d: int
    degree: int
    n_nodes: int
    size: int
    error: ErrorReport | None
    cond: np.ndarray | None
    cc_rows: list | None
    recurrence: object | None
    breakdown_degree: int | None
    failure_message: str | None
    gram_drift: list | None
    diagnostics_counters: dict
    christoffel_mass: float | None
    evaluate_chunk: object | None

    @property
    def failed(self) -> bool:
        return self.breakdown_degree is not None or self.failure_message is not None

    @property
    def effective_error_max(self) -> float:
        """max |E| with breakdown/failure counted as infinitely bad."""
        if self.failed or self.error is None:
            return float("inf")
        return self.error.max_abs


def experiment_dimension(experiment: str, cloud_path=None) -> int:
    if experiment in ("jac2", "ann", "cur", "hol"):
        return 2
    if experiment in ("jac3", "tor"):
        return 3
    if experiment == "cloud":
        if cloud_path is None:
            raise ValueError("cloud experiment requires --cloud PATH")
        return point_cloud_measure(cloud_path).d
    raise ValueError(f"unknown experiment {experiment!r}")


def resolve_config(config: ExperimentConfig) -> ExperimentConfig:
    """Validate tags and fill size defaults; raises ValueError on misuse."""
    if config.experiment not in EXPERIMENTS:
        raise ValueError(f"unknown experiment {config.experiment!r}; "
                         f"choose from {', '.join(EXPERIMENTS)}")
    if config.method not in METHODS:
        raise ValueError(f"unknown method {config.method!r}; "
                         f"choose from {', '.join(METHODS)}")
    if config.method == "exact" and config.experiment not in JACOBI_PARAMS:
        raise ValueError("the exact method applies only to the tensorial "
                         "experiments jac2 and jac3")
    if config.experiment == "cloud" and config.cloud_path is None:
        raise ValueError("cloud experiment requires --cloud PATH")
    out = dataclasses.replace(config)
    d = experiment_dimension(out.experiment, out.cloud_path)
    if out.degree is None:
        out.degree = DEFAULT_DEGREE[d]
    if out.degree < 1:
        raise ValueError("degree must be >= 1")
    n = out.degree
    if out.n_points is None:
        out.n_points = n + 2
    if out.n_radial is None:
        out.n_radial = n + 2
    if out.n_angular is None:
        out.n_angular = 25000 if out.experiment == "cur" else 4 * n + 5
    if out.n_azimuthal is None:
        out.n_azimuthal = 4 * n + 5
    return out


def build_measure(config: ExperimentConfig):
    tag = config.experiment
    if tag in JACOBI_PARAMS:
        alphas, betas = JACOBI_PARAMS[tag]
        return tensor_jacobi(len(alphas), config.n_points, alphas, betas, label=tag)
    if tag == "ann":
        return annulus_measure(config.n_radial, config.n_angular)
    if tag == "cur":
        return spiral_measure(config.n_radial, config.n_angular)
    if tag == "tor":
        return torus_measure(config.n_radial, config.n_angular, config.n_azimuthal)
    if tag == "hol":
        return square_minus_ball(config.mc_samples, config.seed)
    if tag == "cloud":
        return point_cloud_measure(config.cloud_path)
    raise ValueError(f"unknown experiment {tag!r}")


def _run_exact(config, measure, index_set):
    alphas, betas = JACOBI_PARAMS[config.experiment]
    unis = [jacobi_recurrence(config.degree, alphas[i], betas[i])
            for i in range(measure.d)]
    rec = canonical_reorder(tensor_recurrence(unis, index_set, config.degree),
                            index_set)
    cond = np.array([1.0] + [float(rec.lam[n][0] / rec.lam[n][-1])
                             for n in range(1, config.degree + 1)])
    return rec, recurrence_evaluator(rec), cond, None, {}


def _run_ms(config, measure, index_set):
    rec, diags = stieltjes_recurrence(
        measure, index_set, config.degree,
        allow_high_dim=config.experimental_wopp,
        chunk_size=config.chunk_size)
    counters = {
        "moment_fallbacks": diags.moment_fallbacks,
        "closures_3d": diags.closures_3d,
        "wopp_sweeps": diags.wopp_sweeps,
    }
    return (rec, recurrence_evaluator(rec), np.array(diags.t_condition),
            diags.gram_drift, counters)


def _run_moment(config, measure, index_set, kind):
    basis = (monomial_basis(index_set) if kind == "mm"
             else legendre_box_basis(index_set, measure))
    gram = build_gram(basis, measure, chunk_size=config.chunk_size)
    cond = gram_condition_numbers(
        gram.gram, [index_set.cumulative(n) for n in range(config.degree + 1)])
    usable = gram.chol_degree
    rec = None
    evaluate_chunk = None
    if usable >= 1:
        rec = extract_recurrence(gram, usable)
        evaluate_chunk = orthonormal_evaluator(gram, usable)
    elif usable == 0:
        evaluate_chunk = orthonormal_evaluator(gram, 0)
    return rec, evaluate_chunk, cond, None, {}, gram.failure_degree, usable


def run_experiment(config: ExperimentConfig, write: bool = True) -> ExperimentResult:
    """Run one (experiment, method) pair end to end.

    Numerical breakdowns (ill-conditioned Gram factorizations, rank
    failures mid-run) are captured in the result rather than raised;
    usage errors raise ValueError before any computation starts.
    """
    config = resolve_config(config)
    measure = build_measure(config)
    d = measure.d
    degree = config.degree
    index_set = MultiIndexSet.build(d, degree)
    size = index_set.cumulative(degree)

    rec = None
    evaluate_chunk = None
    cond = None
    drift = None
    counters = {}
    breakdown = None
    failure_message = None
    usable_degree = degree
    try:
        if config.method == "exact":
            rec, evaluate_chunk, cond, drift, counters = _run_exact(
                config, measure, index_set)
        elif config.method == "ms":
            rec, evaluate_chunk, cond, drift, counters = _run_ms(
                config, measure, index_set)
        else:
            (rec, evaluate_chunk, cond, drift, counters,
             breakdown, usable_degree) = _run_moment(
                config, measure, index_set, config.method)
    except NumericalFailure as exc:
        failure_message = str(exc)
        breakdown = exc.degree

    error = None
    cc_rows = None
    christoffel_mass = None
    if evaluate_chunk is not None:
        usable_size = index_set.cumulative(usable_degree)
        error = gram_error_streaming(evaluate_chunk, measure, usable_size,
                                     chunk_size=config.chunk_size)
        christoffel_mass = float(
            (np.trace(error.error_matrix) + usable_size) / usable_size)
        if rec is not None:
            cc_rows = commuting_residuals(rec)
            error.cc_residuals = cc_rows
        error.per_degree_cond = cond

    result = ExperimentResult(
        config=config, d=d, degree=degree, n_nodes=measure.n_nodes, size=size,
        error=error, cond=cond, cc_rows=cc_rows, recurrence=rec,
        breakdown_degree=breakdown, failure_message=failure_message,
        gram_drift=drift, diagnostics_counters=counters,
        christoffel_mass=christoffel_mass, evaluate_chunk=evaluate_chunk)
    if write:
        write_outputs(result, measure)
    return result


def write_outputs(result: ExperimentResult, measure) -> dict:
    """Write manifest, recurrence JSON, and plot-ready CSVs to the
    configured output directory.  Identical configurations produce
    byte-identical recurrence/CSV files."""
    out = Path(result.config.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = {}

    manifest = {
        "package_version": __version__,
        "config": dataclasses.asdict(result.config),
        "dimension": result.d,
        "degree": result.degree,
        "basis_size": result.size,
        "nodes": result.n_nodes,
        "breakdown_degree": result.breakdown_degree,
        "failure_message": result.failure_message,
        "error_max": None if result.error is None else result.error.max_abs,
        "christoffel_mass": result.christoffel_mass,
        "gram_drift": result.gram_drift,
        "diagnostics_counters": result.diagnostics_counters,
    }
    paths["manifest"] = out / "manifest.json"
    with open(paths["manifest"], "w", encoding="utf-8") as fh:
        fh.write(json.dumps(manifest, indent=1, sort_keys=True) + "\n")

    if result.recurrence is not None:
        paths["recurrence"] = out / "recurrence.json"
        serialization.save_recurrence(result.recurrence, paths["recurrence"])
    if result.error is not None:
        paths["error_matrix"] = out / "error_matrix.csv"
        serialization.write_log_error_csv(paths["error_matrix"],
                                          result.error.error_matrix)
    if result.cond is not None:
        paths["cond"] = out / "cond.csv"
        serialization.write_condition_csv(paths["cond"], result.cond)
    if result.cc_rows is not None:
        paths["cc"] = out / "cc_residuals.csv"
        serialization.write_cc_csv(paths["cc"], result.cc_rows)
    if result.d == 2 and result.evaluate_chunk is not None:
        stride = max(1, -(-measure.n_nodes // CHRISTOFFEL_MAX_ROWS))
        pts = measure.nodes[::stride]
        usable_size = (result.size if result.breakdown_degree is None
                       else result.error.error_matrix.shape[0])
        kernel, chris = christoffel_streaming(result.evaluate_chunk, pts,
                                              usable_size,
                                              chunk_size=result.config.chunk_size)
        paths["christoffel"] = out / "christoffel.csv"
        serialization.write_christoffel_csv(paths["christoffel"], pts,
                                            kernel, chris)
    return paths
