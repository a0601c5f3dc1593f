"""The spectral filter and its two matrix-free application schemes.

The filter is f(E) = E^alpha * exp(-tau*E). It peaks at E = alpha/tau, so
fixing the peak location e_peak fixes tau. Applying f(H) to a vector
reweights its eigencomponents by f of their eigenvalues; repeated
application therefore amplifies the eigenvector whose eigenvalue sits
closest to the peak, in filter-response terms.

exp(-tau*H) is never formed. It is approximated by M first-order substeps
(I - (tau/M) H)^M, either directly (the polynomial scheme) or with the
potential handled half-implicitly (the split scheme) when a large V would
make the plain substep unstable.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .operators import GridOperator, GridSpec, neighbor_sum

__all__ = [
    "FilterConfig",
    "SplitCoefficients",
    "StabilityReport",
    "FilterInstabilityError",
    "filter_value",
    "polynomial_response",
    "apply_exponential_filter",
    "apply_polynomial_filter",
    "apply_split_filter",
    "check_stability",
]


class FilterInstabilityError(RuntimeError):
    """A substep scheme left (or would leave) its stable region."""


@dataclass(frozen=True)
class FilterConfig:
    """Filter shape and substep count.

    tau is derived as alpha/e_peak so the response always peaks at e_peak.
    substeps is the Taylor order M; dtau = tau/M is the imaginary-time
    width of one substep.
    """

    e_peak: float
    alpha: float = 1.0
    substeps: int = 100

    def __post_init__(self):
        if not self.e_peak > 0.0:
            raise ValueError("e_peak must be positive")
        if not self.alpha >= 1.0:
            raise ValueError("alpha must be at least 1")
        if int(self.substeps) != self.substeps or self.substeps < 1:
            raise ValueError("substeps must be a positive integer")
        object.__setattr__(self, "e_peak", float(self.e_peak))
        object.__setattr__(self, "alpha", float(self.alpha))
        object.__setattr__(self, "substeps", int(self.substeps))

    @property
    def tau(self) -> float:
        return self.alpha / self.e_peak

    @property
    def dtau(self) -> float:
        return self.tau / self.substeps

    @classmethod
    def for_grid(cls, e_peak, grid: GridSpec, alpha: float = 1.0, dtau=None) -> "FilterConfig":
        """Substep count matched to a grid.

        dtau defaults to dx^2/10, a factor 10 inside the diffusion limit;
        M is then tau/dtau rounded, at least 1.
        """
        if not e_peak > 0.0:
            raise ValueError("e_peak must be positive")
        if dtau is None:
            dtau = grid.dx * grid.dx / 10.0
        if not dtau > 0.0:
            raise ValueError("dtau must be positive")
        m = max(1, round((alpha / e_peak) / dtau))
        return cls(e_peak, alpha, m)

    @classmethod
    def for_operator(cls, e_peak, op, alpha: float = 1.0, dtau=None, substeps=None) -> "FilterConfig":
        """Pick substeps for an arbitrary operator.

        Explicit substeps win; grids derive M from dtau (default dx^2/10);
        dense operators take dtau if given, else the stock M=100.
        """
        if substeps is not None:
            return cls(e_peak, alpha, substeps)
        if isinstance(op, GridOperator):
            return cls.for_grid(e_peak, op.grid, alpha, dtau)
        if dtau is not None:
            if not e_peak > 0.0:
                raise ValueError("e_peak must be positive")
            return cls(e_peak, alpha, max(1, round((alpha / e_peak) / dtau)))
        return cls(e_peak, alpha, 100)


def filter_value(e, cfg: FilterConfig):
    """f(E) = E^alpha exp(-tau E). Vectorized; f(0) = 0.

    Meant for nonnegative energies (shift the operator first otherwise).
    """
    arr = np.asarray(e, dtype=float)
    out = np.power(arr, cfg.alpha) * np.exp(-cfg.tau * arr)
    if np.isscalar(e) or arr.ndim == 0:
        return float(out)
    return out


def polynomial_response(e, cfg: FilterConfig):
    """The scalar the polynomial scheme actually multiplies each mode by:

        g(E) = E^alpha (1 - tau E / M)^M

    g -> f pointwise as M grows (first order in 1/M). Unlike f, g can go
    negative or exceed f's envelope for E beyond the stable region, which
    is exactly how undersized M redirects the iteration (selection always
    follows the largest |g|, i.e. in practice the largest g for modest E).
    """
    arr = np.asarray(e, dtype=float)
    out = np.power(arr, cfg.alpha) * (1.0 - cfg.dtau * arr) ** cfg.substeps
    if np.isscalar(e) or arr.ndim == 0:
        return float(out)
    return out


def _whole_alpha(cfg: FilterConfig) -> int:
    if not float(cfg.alpha).is_integer():
        raise ValueError("applying the filter needs a whole-number alpha")
    return int(cfg.alpha)


def apply_exponential_filter(op, v: np.ndarray, cfg: FilterConfig) -> np.ndarray:
    """One application of exp(-tau H) alone: M plain Taylor substeps
    w <- w - (tau/M) H w, no energy prefactor. Non-finite growth is
    reported with the substep that produced it, since that is the knob
    (dtau) the caller must fix.
    """
    dtau = cfg.dtau
    w = np.asarray(v, dtype=float)
    # overflow to inf is the detection mechanism here, not an accident;
    # keep numpy quiet about it
    with np.errstate(over="ignore", invalid="ignore"):
        for k in range(cfg.substeps):
            w = w - dtau * op.apply(w)
            if not np.isfinite(w @ w):
                raise FilterInstabilityError(
                    f"non-finite values after substep {k + 1} of {cfg.substeps}; "
                    "reduce dtau (raise substeps) or use the split scheme"
                )
    return w


def apply_polynomial_filter(op, v: np.ndarray, cfg: FilterConfig) -> np.ndarray:
    """One filter application by plain Taylor substeps.

    Runs the M exponential substeps, then applies H alpha more times:
    M + alpha operator applications in total, M + 1 at the default
    alpha = 1.
    """
    n_post = _whole_alpha(cfg)
    w = apply_exponential_filter(op, v, cfg)
    with np.errstate(over="ignore", invalid="ignore"):
        for _ in range(n_post):
            w = op.apply(w)
        if not np.isfinite(w @ w):
            raise FilterInstabilityError("non-finite values after the final operator application")
    return w


@dataclass(frozen=True)
class SplitCoefficients:
    """Pointwise weights of the half-implicit potential substep.

        a = (1 - V dtau/2) / (1 + V dtau/2)
        b = 1 / (1 + V dtau/2)

    For V >= 0 both stay in (0, 1], which is what keeps the scheme usable
    where the plain substep would blow up.
    """

    a: np.ndarray
    b: np.ndarray

    @classmethod
    def from_potential(cls, potential, dtau: float) -> "SplitCoefficients":
        half = 0.5 * dtau * np.asarray(potential, dtype=float)
        denom = 1.0 + half
        if np.any(denom <= 0.0):
            raise ValueError("dtau too large for this potential: 1 + V*dtau/2 must stay positive")
        return cls(a=(1.0 - half) / denom, b=1.0 / denom)


@dataclass(frozen=True)
class StabilityReport:
    """Outcome of the explicit-diffusion stability check.

    margin = dx^2 / (max(b) * dtau); passing means margin > 1. The stock
    dtau = dx^2/10 gives margin 10 for any nonnegative potential.
    """

    passed: bool
    margin: float


def check_stability(grid: GridSpec, potential, dtau: float) -> StabilityReport:
    """Is the split substep inside the diffusion stability limit?"""
    if potential is None:
        b_max = 1.0
    else:
        b_max = float(SplitCoefficients.from_potential(potential, dtau).b.max())
    margin = grid.dx * grid.dx / (b_max * dtau)
    return StabilityReport(passed=margin > 1.0, margin=margin)


def split_substep(w: np.ndarray, coeffs: SplitCoefficients, grid: GridSpec, dtau: float) -> np.ndarray:
    """One half-implicit diffusion substep of exp(-dtau H).

    psi <- a psi + (b dtau / 2 dx^2) (neighbor sum - 2 ndim psi)

    With V = 0 (a = b = 1) this is exactly the plain Taylor substep.
    """
    a3 = w.reshape(grid.shape[::-1])
    stencil = neighbor_sum(a3, grid.bc) - (2.0 * grid.ndim) * a3
    scale = dtau / (2.0 * grid.dx * grid.dx)
    return coeffs.a * w + (scale * coeffs.b) * stencil.ravel()


def apply_split_filter(op: GridOperator, v: np.ndarray, cfg: FilterConfig) -> np.ndarray:
    """One filter application with the half-implicit split substeps.

    Rejects before doing any work if the substep is outside its stability
    region. The final alpha applications use the full operator, so the
    overall response is still H^alpha times the diffusion propagator.
    """
    if not isinstance(op, GridOperator):
        raise TypeError("the split scheme needs a grid operator")
    n_post = _whole_alpha(cfg)
    grid = op.grid
    report = check_stability(grid, op.potential, cfg.dtau)
    if not report.passed:
        raise FilterInstabilityError(
            f"split substep unstable: margin {report.margin:.3g} <= 1; reduce dtau below dx^2"
        )
    potential = op.potential if op.potential is not None else np.zeros(op.dim)
    coeffs = SplitCoefficients.from_potential(potential, cfg.dtau)
    w = np.asarray(v, dtype=float)
    for k in range(cfg.substeps):
        w = split_substep(w, coeffs, grid, cfg.dtau)
        if not np.isfinite(w @ w):
            raise FilterInstabilityError(
                f"non-finite values after substep {k + 1} of {cfg.substeps}"
            )
    for _ in range(n_post):
        w = op.apply(w)
    return w
