"""Power iterations: plain, imaginary-time, and filtered.

All three share one engine: apply a step, renormalize, take the Rayleigh
quotient, and stop once the estimate has stagnated below tol, the
geometric tail estimate agrees, and (by default) the eigenpair residual
certificate holds. A report that says Converged therefore really carries
an eigenpair of the operator it was given, not just a flat history.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .filtering import (
    FilterConfig,
    FilterInstabilityError,
    SplitCoefficients,
    apply_exponential_filter,
    apply_polynomial_filter,
    apply_split_filter,
    check_stability,
    split_substep,
)
from .operators import GridOperator, materialize

__all__ = [
    "Status",
    "IterationSettings",
    "IterationReport",
    "normalize",
    "rayleigh_quotient",
    "power_solve",
    "exponential_power_solve",
    "filtered_power_solve",
]

# Materialize the filter matrix below this dimension: one matrix power
# replaces M vector sweeps per iteration, which is what makes dense
# problems and small-grid scans cheap.
MATERIALIZE_LIMIT = 1024


class Status(enum.Enum):
    CONVERGED = "converged"
    MAX_ITERATIONS = "max-iterations"
    DIVERGED = "diverged"


@dataclass(frozen=True)
class IterationSettings:
    """Stopping control.

    residual_factor scales the eigenpair certificate: Converged requires
    ||H v - E v|| <= residual_factor * tol * ||v||. None disables the
    certificate (useful when a scheme has a known residual floor, like the
    split update's fixed-point bias).
    """

    tol: float = 1e-8
    max_iter: int = 10 ** 6
    seed: int = 0
    init: np.ndarray | None = None
    residual_factor: float | None = 100.0

    def __post_init__(self):
        if not self.tol > 0.0:
            raise ValueError("tol must be positive")
        if self.max_iter < 1:
            raise ValueError("max_iter must be at least 1")
        if self.residual_factor is not None and not self.residual_factor > 0.0:
            raise ValueError("residual_factor must be positive or None")


@dataclass(frozen=True)
class IterationReport:
    status: Status
    eigenvalue: float
    eigenvector: np.ndarray
    iterations: int
    residual: float
    history: np.ndarray

    @property
    def converged(self) -> bool:
        return self.status is Status.CONVERGED


def normalize(v: np.ndarray, dv: float = 1.0) -> np.ndarray:
    """Scale to unit norm under the dv-weighted inner product."""
    v = np.asarray(v, dtype=float)
    n2 = float(v @ v) * dv
    if not np.isfinite(n2) or n2 <= 0.0:
        raise ValueError("cannot normalize a zero or non-finite vector")
    return v / math.sqrt(n2)


def rayleigh_quotient(op, v: np.ndarray) -> float:
    """<v, H v> / <v, v>. The volume element cancels, so none is taken."""
    v = np.asarray(v, dtype=float)
    return float(v @ op.apply(v)) / float(v @ v)


def _residual(op, v: np.ndarray, e: float) -> float:
    """||H v - e v|| / ||v||, plain Euclidean; scale-free either way."""
    r = op.apply(v) - e * v
    n = float(np.linalg.norm(v))
    if n == 0.0:
        return math.inf
    val = float(np.linalg.norm(r)) / n
    return val if np.isfinite(val) else math.inf


def _initial_vector(op, settings: IterationSettings) -> np.ndarray:
    if settings.init is not None:
        v = np.asarray(settings.init, dtype=float)
        if v.shape != (op.dim,):
            raise ValueError(f"init has shape {v.shape}, operator needs ({op.dim},)")
    else:
        # uniform in (0,1): strictly positive, so the overlap with a
        # nodeless ground state can never be zero, and generically no
        # overlap vanishes
        v = np.random.default_rng(settings.seed).random(op.dim)
    return normalize(v, op.dv)


def _iterate(op, step, settings: IterationSettings, on_step=None) -> IterationReport:
    """The shared engine. `step` maps the current vector to the next,
    unnormalized one; everything else (normalization, estimates, the
    stopping rule, the certificate) happens here.

    Stopping: let d = |E_k - E_{k-1}| and r = d/d_prev. Stagnation alone
    (d < tol) is not enough near slow contractions, where the remaining
    error is about d*r/(1-r); that tail estimate must also fall below tol,
    and then the residual certificate must pass.
    """
    v = _initial_vector(op, settings)
    history: list[float] = []
    status = Status.MAX_ITERATIONS
    residual = None
    e = math.nan
    e_prev = None
    d_prev = None
    k = 0
    for k in range(1, settings.max_iter + 1):
        try:
            with np.errstate(over="ignore", invalid="ignore"):
                w = step(v)
                n2 = float(w @ w) * op.dv
        except FilterInstabilityError:
            status = Status.DIVERGED
            break
        if not np.isfinite(n2) or n2 <= 0.0:
            status = Status.DIVERGED
            break
        v = w / math.sqrt(n2)
        e = rayleigh_quotient(op, v)
        history.append(e)
        if not np.isfinite(e):
            status = Status.DIVERGED
            break
        if on_step is not None:
            on_step(k, e)
        if e_prev is not None:
            d = abs(e - e_prev)
            if d < settings.tol:
                r = d / d_prev if (d_prev is not None and d_prev > 0.0) else 0.0
                est = d * r / (1.0 - r) if 0.0 < r < 1.0 else d
                if est < settings.tol:
                    res = _residual(op, v, e)
                    gate = settings.residual_factor
                    if gate is None or res <= gate * settings.tol:
                        status = Status.CONVERGED
                        residual = res
                        break
            d_prev = d
        e_prev = e

    eigenvalue = history[-1] if history else math.nan
    if residual is None:
        residual = _residual(op, v, eigenvalue) if history else math.inf
    # sign convention: largest-magnitude entry positive, so comparisons
    # against analytic eigenfunctions are deterministic
    if np.all(np.isfinite(v)) and v[int(np.argmax(np.abs(v)))] < 0.0:
        v = -v
    return IterationReport(
        status=status,
        eigenvalue=float(eigenvalue),
        eigenvector=v,
        iterations=k,
        residual=float(residual),
        history=np.asarray(history),
    )


def power_solve(op, settings: IterationSettings | None = None) -> IterationReport:
    """Plain power iteration v <- H v / ||H v||.

    Converges to the eigenvalue of largest magnitude. An init exactly
    orthogonal to the dominant eigenvector can mathematically lock onto a
    subdominant one; either way the certificate guarantees the returned
    pair is an eigenpair.
    """
    return _iterate(op, op.apply, settings or IterationSettings())


def exponential_power_solve(
    op, cfg: FilterConfig | None = None, settings: IterationSettings | None = None
) -> IterationReport:
    """Imaginary-time iteration: the substep machinery without the energy
    prefactor, v <- (I - dtau H)^M v per outer step.

    Every component above the lowest eigenvalue is damped, so this settles
    on the ground state. On a periodic grid that includes the zero mode
    the filtered solve deliberately excludes. cfg supplies only the
    substep schedule (tau, M); without the prefactor there is no peak, so
    the default cfg resolves tau = 1 against the operator.
    """
    settings = settings or IterationSettings()
    if cfg is None:
        cfg = FilterConfig.for_operator(1.0, op)
    if op.dim <= MATERIALIZE_LIMIT:
        filt = _materialized_filter(op, cfg, "polynomial", applies=0)

        def step(v):
            return filt @ v

    else:

        def step(v):
            return apply_exponential_filter(op, v, cfg)

    return _iterate(op, step, settings)


_SCHEMES = ("auto", "polynomial", "split")


def _taylor_step_stable(op, cfg: FilterConfig) -> bool:
    """Cheap worst-case bound: the plain substep needs dtau * E_max < 2.

    Grid kinetic energy tops out at ndim * 2/dx^2; a positive potential
    adds its max. Dense operators get no cheap bound; instability there is
    caught at run time as non-finite growth.
    """
    if not isinstance(op, GridOperator):
        return True
    bound = op.grid.ndim * 2.0 / (op.grid.dx * op.grid.dx)
    if op.potential is not None:
        bound += max(0.0, float(op.potential.max()))
    return cfg.dtau * bound < 2.0


def _pick_scheme(op, cfg: FilterConfig) -> str:
    if _taylor_step_stable(op, cfg):
        return "polynomial"
    if isinstance(op, GridOperator):
        if check_stability(op.grid, op.potential, cfg.dtau).passed:
            return "split"
        raise FilterInstabilityError(
            "neither substep scheme is stable at this dtau; raise substeps"
        )
    return "polynomial"


def _materialized_filter(op, cfg: FilterConfig, scheme: str, applies: int | None = None) -> np.ndarray:
    """F = H^applies T^M as an explicit matrix, T being one substep.

    applies defaults to alpha (the full filter); 0 gives the bare
    propagator for the exponential solve.
    """
    a = materialize(op, max_dim=MATERIALIZE_LIMIT)
    n = op.dim
    if scheme == "polynomial":
        t = np.eye(n) - cfg.dtau * a
    else:
        grid = op.grid
        potential = op.potential if op.potential is not None else np.zeros(n)
        coeffs = SplitCoefficients.from_potential(potential, cfg.dtau)
        t = np.empty((n, n))
        unit = np.zeros(n)
        for j in range(n):
            unit[j] = 1.0
            t[:, j] = split_substep(unit, coeffs, grid, cfg.dtau)
            unit[j] = 0.0
    # an unstable substep overflows here instead of in the sweep loop;
    # the iteration detects the non-finite product either way
    with np.errstate(over="ignore", invalid="ignore"):
        f = np.linalg.matrix_power(t, cfg.substeps)
        if applies is None:
            applies = int(cfg.alpha)
        for _ in range(applies):
            f = a @ f
    return f


def filtered_power_solve(
    op,
    cfg: FilterConfig,
    settings: IterationSettings | None = None,
    scheme: str = "auto",
    on_step=None,
) -> IterationReport:
    """Power iteration through the filter H^alpha exp(-tau H).

    The filter response peaks at cfg.e_peak, so the iteration converges to
    whichever eigenvalue the response ranks highest; sweeping e_peak
    reaches any part of the spectrum without deflation. Interior
    eigenvalues are as reachable as extremal ones.

    scheme: "polynomial" (plain Taylor substeps), "split" (half-implicit
    potential, for large positive V), or "auto" (polynomial unless its
    substep is provably unstable for this grid). Operators of dimension
    <= MATERIALIZE_LIMIT run against an explicit filter matrix instead of
    substep sweeps; same arithmetic to rounding, orders of magnitude
    faster. The Rayleigh quotient and the certificate always use the
    original operator.
    """
    settings = settings or IterationSettings()
    if scheme not in _SCHEMES:
        raise ValueError(f"scheme must be one of {_SCHEMES}")
    if not float(cfg.alpha).is_integer():
        raise ValueError("the solver applies the filter, so alpha must be a whole number")
    if scheme == "auto":
        scheme = _pick_scheme(op, cfg)
    if scheme == "split":
        if not isinstance(op, GridOperator):
            raise ValueError("the split scheme needs a grid operator")
        gate = check_stability(op.grid, op.potential, cfg.dtau)
        if not gate.passed:
            # config-level instability is rejected up front; mid-run
            # numerical blowup is what the Diverged status is for
            raise FilterInstabilityError(
                f"split substep unstable: margin {gate.margin:.3g} <= 1; reduce dtau below dx^2"
            )

    if op.dim <= MATERIALIZE_LIMIT:
        filt = _materialized_filter(op, cfg, scheme)

        def step(v):
            return filt @ v

    elif scheme == "polynomial":

        def step(v):
            return apply_polynomial_filter(op, v, cfg)

    else:

        def step(v):
            return apply_split_filter(op, v, cfg)

    return _iterate(op, step, settings, on_step=on_step)
