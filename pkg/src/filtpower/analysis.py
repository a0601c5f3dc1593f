"""Convergence theory and the peak-energy scan driver.

The iteration's speed at a given peak energy is set by the competition
between the two best-filtered eigenvalues: the per-iteration eigenvector
error contracts by R = f(E_b)/f(E_a). The Rayleigh estimate, being
quadratic in the eigenvector error, contracts by R^2. Where two
eigenvalues tie (the turning point E_tp) R hits 1 and convergence stalls;
just past it the selected eigenvalue switches. Scanning e_peak therefore
walks the spectrum as a staircase with slow, visible seams at the turning
points.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from .filtering import FilterConfig, filter_value
from .power import IterationSettings, Status, filtered_power_solve

__all__ = [
    "ConvergenceModel",
    "ErrorDecayFit",
    "ScanRow",
    "ScanResult",
    "convergence_ratio",
    "turning_point",
    "turning_points_of",
    "predicted_iterations",
    "fit_error_decay",
    "scan_peak_energies",
    "scan_ep",
]


@dataclass(frozen=True)
class ConvergenceModel:
    """The two best-filtered eigenvalues and their response ratio.

    e_a wins the filter ranking, e_b is the runner-up (None when the
    spectrum has a single distinct level). ratio = f(e_b)/f(e_a) is the
    eigenvector contraction per iteration; estimate_ratio = ratio^2 is
    the contraction of the Rayleigh estimate, which is what an eigenvalue
    history actually shows.
    """

    e_a: float
    e_b: float | None
    ratio: float

    @property
    def estimate_ratio(self) -> float:
        return self.ratio * self.ratio


def _distinct(values: np.ndarray, rel: float = 1e-9) -> np.ndarray:
    """Collapse degenerate copies: equal eigenvalues share an eigenspace
    and do not compete with each other."""
    vals = np.sort(np.asarray(values, dtype=float))
    if vals.size == 0:
        return vals
    kept = [vals[0]]
    for v in vals[1:]:
        if v - kept[-1] > rel * max(1.0, abs(v)):
            kept.append(v)
    return np.asarray(kept)


def convergence_ratio(spectrum, e_p: float, alpha: float = 1.0) -> ConvergenceModel:
    """Rank a spectrum by filter response at peak e_p; return the top two.

    Spectrum entries must be nonnegative (a zero mode is fine: its
    response is zero, so it never competes).
    """
    if not e_p > 0.0:
        raise ValueError("e_p must be positive")
    levels = _distinct(np.asarray(spectrum, dtype=float))
    if levels.size == 0:
        raise ValueError("spectrum is empty")
    if levels[0] < 0.0:
        raise ValueError("spectrum must be nonnegative; shift the operator first")
    cfg = FilterConfig(e_p, alpha, 1)
    f = np.asarray(filter_value(levels, cfg))
    order = np.argsort(f)
    e_a = float(levels[order[-1]])
    if levels.size == 1:
        return ConvergenceModel(e_a, None, 0.0)
    e_b = float(levels[order[-2]])
    f_a = float(f[order[-1]])
    f_b = float(f[order[-2]])
    ratio = f_b / f_a if f_a > 0.0 else 0.0
    return ConvergenceModel(e_a, e_b, ratio)


def turning_point(e_a: float, e_b: float) -> float:
    """The peak energy where two eigenvalues tie: (e_b - e_a)/ln(e_b/e_a).

    Below it e_a out-filters e_b, above it the roles flip; the value
    always lies strictly between the two (it is their logarithmic mean).
    """
    if not (0.0 < e_a < e_b):
        raise ValueError("need 0 < e_a < e_b")
    return (e_b - e_a) / math.log(e_b / e_a)


def turning_points_of(spectrum) -> np.ndarray:
    """E_tp between each consecutive pair of distinct positive levels.

    Zero modes are skipped: f(0) = 0 at every peak, so there is no tie to
    locate against them.
    """
    levels = _distinct(np.asarray(spectrum, dtype=float))
    levels = levels[levels > 0.0]
    return np.asarray([turning_point(a, b) for a, b in zip(levels[:-1], levels[1:])])


@dataclass(frozen=True)
class ErrorDecayFit:
    """Geometric model |E_k - E| ~ beta * ratio^k fitted from a history.

    c = ln(tol/beta); predicted_k = c/ln(ratio) is the iteration count at
    which the modeled error crosses tol. Natural logs throughout.
    """

    ratio: float
    beta: float
    c: float
    predicted_k: float


def fit_error_decay(history, e_final=None, tol: float = 1e-8) -> ErrorDecayFit | None:
    """Least-squares geometric fit to an eigenvalue-error history.

    Errors are taken against e_final (default: the last history entry).
    Points already at or below tol are dropped (they sit on the tolerance
    floor, not on the geometric slope), then the fit uses the middle 60%
    of what remains: the head is transient mode-mixing, the tail is
    rounding. Returns None when fewer than 5 usable points remain or the
    sequence is not actually decaying.
    """
    h = np.asarray(history, dtype=float)
    if h.size < 10:
        return None
    target = float(h[-1]) if e_final is None else float(e_final)
    err = np.abs(h - target)
    k = np.arange(h.size, dtype=float)
    usable = np.isfinite(err) & (err > tol)
    if int(usable.sum()) < 5:
        return None
    ks = k[usable]
    log_err = np.log(err[usable])
    n = ks.size
    lo = n // 5
    hi = n - lo
    ks = ks[lo:hi]
    log_err = log_err[lo:hi]
    if ks.size < 3:
        return None
    slope, intercept = np.polyfit(ks, log_err, 1)
    if not np.isfinite(slope) or slope >= 0.0:
        return None
    beta = math.exp(intercept)
    c = math.log(tol / beta)
    return ErrorDecayFit(
        ratio=math.exp(slope),
        beta=beta,
        c=c,
        predicted_k=c / slope,
    )


def predicted_iterations(model: ConvergenceModel, fit: ErrorDecayFit) -> float:
    """Iterations to tolerance: fit.c / ln(model.estimate_ratio).

    Uses the estimate contraction (ratio squared), since both c and the
    histories it is fitted from live on the eigenvalue-estimate scale.
    """
    r = model.estimate_ratio
    if not 0.0 < r < 1.0:
        raise ValueError("non-convergent at this peak energy: contraction ratio is not in (0, 1)")
    return fit.c / math.log(r)


@dataclass(frozen=True)
class ScanRow:
    e_p: float
    eigenvalue: float
    iterations: int
    status: Status
    nearest_e_tp: float | None
    predicted_r: float | None
    residual: float


@dataclass(frozen=True)
class ScanResult:
    rows: tuple
    turning_points: np.ndarray

    @property
    def any_converged(self) -> bool:
        return any(r.status is Status.CONVERGED for r in self.rows)

    def converged_rows(self) -> list:
        return [r for r in self.rows if r.status is Status.CONVERGED]


def _scan_solve(payload):
    problem, e_p, alpha, substeps, dtau, scheme, settings = payload
    cfg = FilterConfig.for_operator(e_p, problem.operator, alpha, dtau=dtau, substeps=substeps)
    report = filtered_power_solve(problem.operator, cfg, settings, scheme=scheme)
    return e_p, report


def scan_peak_energies(
    problem,
    e_peaks,
    settings: IterationSettings | None = None,
    *,
    alpha: float = 1.0,
    substeps=None,
    dtau=None,
    scheme: str = "auto",
    workers: int = 1,
) -> ScanResult:
    """One filtered solve per peak energy, annotated against the spectrum.

    Rows that fail to converge are kept: the slow windows near turning
    points are data. Rows come back ordered by e_peak regardless of which
    worker finished first; with a fixed seed the result is deterministic.
    Annotations (nearest turning point, predicted contraction ratio) need
    the problem's discrete spectrum and are None without one.
    """
    settings = settings or IterationSettings()
    e_peaks = [float(e) for e in e_peaks]
    if any(e <= 0.0 for e in e_peaks):
        raise ValueError("peak energies must be positive")
    order = np.argsort(e_peaks)
    payloads = [
        (problem, e_peaks[i], alpha, substeps, dtau, scheme, settings) for i in order
    ]
    if workers > 1 and len(payloads) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            outcomes = list(pool.map(_scan_solve, payloads))
    else:
        outcomes = [_scan_solve(p) for p in payloads]
    outcomes.sort(key=lambda pair: pair[0])

    spectrum = getattr(problem, "discrete", None)
    tps = turning_points_of(spectrum) if spectrum is not None else np.empty(0)
    rows = []
    for e_p, report in outcomes:
        if spectrum is not None:
            nearest = float(tps[np.argmin(np.abs(tps - e_p))]) if tps.size else None
            predicted = convergence_ratio(spectrum, e_p, alpha).ratio
        else:
            nearest = None
            predicted = None
        rows.append(
            ScanRow(
                e_p=e_p,
                eigenvalue=report.eigenvalue,
                iterations=report.iterations,
                status=report.status,
                nearest_e_tp=nearest,
                predicted_r=predicted,
                residual=report.residual,
            )
        )
    return ScanResult(rows=tuple(rows), turning_points=tps)


# short alias, same function
scan_ep = scan_peak_energies
