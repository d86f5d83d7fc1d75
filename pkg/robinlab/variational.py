"""
Variational – Rayleigh quotient minimisation on a Grid
========================================================
The first Robin eigenvalue is the minimum over nonzero w of

            Σ_cells ω |∇_h w|^p  −  β^p Σ_∂ b |w|^p
    R(w) = ------------------------------------------
                       Σ_nodes m |w|^p

with ∇_h the one-sided cell gradient stored on the Grid.  R is 0-homogeneous,
so the minimiser is searched on the sphere Σ_∂ b |w|^p = 1: every descent
step is followed by a renormalisation.

Descent directions are built from the L²-lumped gradient (nodal gradient
divided by the vertex weights), optionally combined into Polak–Ribière
conjugate directions (``method="cg"``, default).  Steps are chosen by a
backtracking Armijo search with a parabolic trial.  Powers are evaluated after
factoring out the largest magnitude so β^p and |∇w|^p stay representable.

Stopping
--------
  plateau     relative quotient change ≤ plateau_rtol over plateau_window steps
  gradient    lumped gradient norm ≤ tolerance
  stalled     no step length decreases the quotient (rounding floor)
"""

from __future__ import annotations

import math
import numbers
from dataclasses import asdict, dataclass, field
from typing import ClassVar, Literal

import numpy as np

from robinlab.errors import ConvergenceError, ValidationError, ZeroDenominatorError
from robinlab.geometry import Grid, ScalarField, distance_field
from robinlab.log import get_logger

__all__ = [
    "SolverOptions",
    "Diagnostics",
    "EigenPair",
    "rayleigh_quotient",
    "quotient_gradient",
    "minimize",
    "continuation",
    "euler_lagrange_residuals",
    "euler_lagrange_residual",
    "energy_terms",
]

log = get_logger(__name__)

_ARMIJO = 1e-4


@dataclass(frozen=True)
class SolverOptions:
    max_iters: int = 20000
    tolerance: float = 1e-8
    plateau_rtol: float = 1e-10
    plateau_window: int = 5
    method: Literal["cg", "steepest"] = "cg"
    floor: float = 1e-14
    regularization: float = 1e-10
    continuation_factor: float = 1.5

    def __post_init__(self):
        if self.max_iters < 1:
            raise ValidationError(f"max_iters must be ≥ 1, got {self.max_iters}")
        if self.tolerance < 0.0 or self.plateau_rtol < 0.0:
            raise ValidationError("tolerances must be non-negative")
        if self.plateau_window < 1:
            raise ValidationError("plateau_window must be ≥ 1")
        if self.method not in ("cg", "steepest"):
            raise ValidationError(f"unknown descent method {self.method!r}")
        if self.continuation_factor <= 1.0:
            raise ValidationError("continuation_factor must be > 1")


@dataclass(frozen=True)
class Diagnostics:
    iterations: int
    gradient_norm: float
    history_length: int
    stopped_by: str = "plateau"


@dataclass(frozen=True, eq=False)
class EigenPair:
    lam: float
    u: ScalarField
    p: float
    beta: float
    diagnostics: Diagnostics = field(default_factory=lambda: Diagnostics(0, math.nan, 0, "none"))
    solver: ClassVar[str] = "variational"

    @property
    def grid(self) -> Grid:
        return self.u.grid

    @property
    def root(self) -> float:
        return (-self.lam) ** (1.0 / self.p)

    def eigenfunction_on(self, grid: Grid) -> ScalarField:
        if not self.u.grid.same_as(grid):
            raise ValidationError("variational eigenfunctions live on the grid they were solved on")
        return self.u

    def to_dict(self) -> dict:
        return {
            "solver": self.solver,
            "p": self.p,
            "beta": self.beta,
            "domain": self.u.grid.domain.to_dict(),
            "resolution": self.u.grid.shape[0] - 1,
            "lambda": self.lam,
            "root": self.root,
            "diagnostics": asdict(self.diagnostics),
        }


# ---------------------------------------------------------------------------
# Power sums with max-factoring
# ---------------------------------------------------------------------------

def _log_power_sum(weights: np.ndarray, magnitudes: np.ndarray, p: float) -> float:
    """log Σ weights · magnitudes^p, or -inf for an empty / zero sum."""
    active = weights > 0.0
    mags = magnitudes[active]
    if mags.size == 0:
        return -math.inf
    top = float(mags.max())
    if top == 0.0:
        return -math.inf
    return p * math.log(top) + math.log(float(np.dot(weights[active], (mags / top) ** p)))


def _difference_over(log_a: float, log_c: float, log_d: float) -> float:
    """(e^a − e^c) / e^d without forming the large terms."""
    top = max(log_a, log_c)
    if top == -math.inf:
        return 0.0
    diff = math.exp(log_a - top) - math.exp(log_c - top)
    if diff == 0.0:
        return 0.0
    return math.copysign(math.exp(top - log_d + math.log(abs(diff))), diff)


def _check(p: float, beta: float) -> None:
    if not (isinstance(p, numbers.Real) and math.isfinite(p) and p > 1.0):
        raise ValidationError(f"p must be a finite exponent > 1, got {p!r}")
    if not (isinstance(beta, numbers.Real) and math.isfinite(beta) and beta > 0.0):
        raise ValidationError(f"beta must be positive, got {beta!r}")


class _Quotient:
    """Discrete Rayleigh quotient bound to (grid, p, β)."""

    def __init__(self, grid: Grid, p: float, beta: float):
        _check(p, beta)
        self.grid = grid
        self.p = float(p)
        self.beta = float(beta)
        self.log_beta_p = self.p * math.log(beta)
        self.mass = grid.volume_weights
        self.boundary = grid.boundary_weights
        self.cells = grid.cell_weights
        self.ops = grid.gradient_ops

    def cell_gradient(self, w: np.ndarray) -> tuple[list[np.ndarray], np.ndarray]:
        comps = [op @ w for op in self.ops]
        if len(comps) == 1:
            return comps, np.abs(comps[0])
        return comps, np.sqrt(sum(c * c for c in comps))

    def log_terms(self, w: np.ndarray) -> tuple[float, float, float]:
        _, mag = self.cell_gradient(w)
        a = np.abs(w)
        return (
            _log_power_sum(self.cells, mag, self.p),
            _log_power_sum(self.boundary, a, self.p),
            _log_power_sum(self.mass, a, self.p),
        )

    def value(self, w: np.ndarray) -> float:
        log_g, log_b, log_v = self.log_terms(w)
        if log_v == -math.inf:
            raise ZeroDenominatorError("the discrete L^p(Omega) norm of the field is zero")
        return _difference_over(log_g, self.log_beta_p + log_b, log_v)

    def normalize(self, w: np.ndarray) -> tuple[np.ndarray, float]:
        """Scale w to unit discrete L^p(∂Ω) norm; returns (w, factor)."""
        log_b = _log_power_sum(self.boundary, np.abs(w), self.p)
        if log_b == -math.inf:
            raise ValidationError("field vanishes on the boundary; cannot normalise")
        factor = math.exp(-log_b / self.p)
        return w * factor, factor

    def _flux(self, w_hat: np.ndarray, eps: float) -> tuple[np.ndarray, float]:
        """Σ_k D_kᵀ(ω |g|^{p-2} g_k) / gtop^{p-1} and log gtop."""
        comps, mag = self.cell_gradient(w_hat)
        top = float(mag.max())
        if top == 0.0:
            return np.zeros_like(w_hat), -math.inf
        ratio = mag / top
        with np.errstate(divide="ignore", invalid="ignore"):
            if eps > 0.0:
                weight = (ratio * ratio + eps * eps) ** (0.5 * (self.p - 2.0))
            else:
                weight = np.where(ratio > 0.0, ratio ** (self.p - 2.0), 0.0)
        scaled = self.cells * weight / top
        flux = sum(op.T @ (scaled * c) for op, c in zip(self.ops, comps))
        return flux, math.log(top)

    def gradient(self, w: np.ndarray, eps: float = 0.0) -> np.ndarray:
        """Euclidean gradient of R at w (regularised by ``eps`` if positive)."""
        scale = float(np.max(np.abs(w)))
        if scale == 0.0:
            raise ZeroDenominatorError("the discrete L^p(Omega) norm of the field is zero")
        w_hat = w / scale
        r = self.value(w_hat)
        log_v = _log_power_sum(self.mass, np.abs(w_hat), self.p)
        powered = np.sign(w_hat) * np.abs(w_hat) ** (self.p - 1.0)

        flux, log_top = self._flux(w_hat, eps)
        grad = np.zeros_like(w_hat)
        if log_top > -math.inf:
            grad += flux * math.exp((self.p - 1.0) * log_top - log_v)
        grad -= self.boundary * powered * math.exp(self.log_beta_p - log_v)
        grad -= r * self.mass * powered * math.exp(-log_v)
        return self.p * grad / scale

    def residuals(self, w: np.ndarray, lam: float) -> np.ndarray:
        """Weak residual per hat function, divided by ‖w‖_{L^p(Ω)}^{p-1}."""
        scale = float(np.max(np.abs(w)))
        w_hat = w / scale
        log_v = _log_power_sum(self.mass, np.abs(w_hat), self.p)
        log_norm = (self.p - 1.0) / self.p * log_v
        powered = np.sign(w_hat) * np.abs(w_hat) ** (self.p - 1.0)
        flux, log_top = self._flux(w_hat, 0.0)
        res = np.zeros_like(w_hat)
        if log_top > -math.inf:
            res += flux * math.exp((self.p - 1.0) * log_top - log_norm)
        res -= lam * self.mass * powered * math.exp(-log_norm)
        res -= self.boundary * powered * math.exp(self.log_beta_p - log_norm)
        return res


def _values_on(grid: Grid, w: ScalarField) -> np.ndarray:
    if not w.grid.same_as(grid):
        raise ValidationError("field is attached to a different grid")
    return np.asarray(w.values, dtype=float)


# ---------------------------------------------------------------------------
# Public operations
# ---------------------------------------------------------------------------

def rayleigh_quotient(p: float, beta: float, grid: Grid, w: ScalarField) -> float:
    return _Quotient(grid, p, beta).value(_values_on(grid, w))


def quotient_gradient(p: float, beta: float, grid: Grid, w: ScalarField) -> ScalarField:
    """Exact gradient of ``rayleigh_quotient`` with respect to the nodal values."""
    return ScalarField(grid, _Quotient(grid, p, beta).gradient(_values_on(grid, w)))


def _initial_values(init, quotient: _Quotient, floor: float) -> np.ndarray:
    grid = quotient.grid
    if isinstance(init, str):
        if init != "default":
            raise ValidationError(f"init must be a ScalarField or 'default', got {init!r}")
        flat = np.ones(grid.size)
        profile = np.exp(-quotient.beta * distance_field(grid).values)
        return min((flat, profile), key=quotient.value)
    values = _values_on(grid, init)
    if not np.all(values > 0.0):
        raise ValidationError("initial field must be positive")
    return np.maximum(values, floor)


def _line_search(
    quotient: _Quotient,
    x: np.ndarray,
    direction: np.ndarray,
    current: float,
    slope: float,
    t0: float,
    floor: float,
) -> tuple[float, np.ndarray, float]:
    """Backtracking Armijo search with one parabolic trial per round."""

    def trial(t: float) -> tuple[np.ndarray, float]:
        y = np.maximum(x + t * direction, floor)
        try:
            return y, quotient.value(y)
        except ZeroDenominatorError:
            return y, math.inf

    x_size = float(np.max(np.abs(x)))
    d_size = float(np.max(np.abs(direction)))
    t = t0
    for _ in range(60):
        if t * d_size <= 1e-16 * x_size:
            break
        y, f = trial(t)
        best = (t, y, f) if f <= current + _ARMIJO * t * slope else None
        curvature = f - current - slope * t
        if math.isfinite(curvature) and curvature > 0.0:
            ts = min(max(-slope * t * t / (2.0 * curvature), 0.1 * t), 10.0 * t)
            ys, fs = trial(ts)
            if fs <= current + _ARMIJO * ts * slope and (best is None or fs < best[2]):
                best = (ts, ys, fs)
        if best is not None:
            return best
        t *= 0.25
    return 0.0, x, current


def minimize(
    p: float,
    beta: float,
    grid: Grid,
    init: ScalarField | str = "default",
    opts: SolverOptions | None = None,
) -> EigenPair:
    """
    Minimise the discrete Rayleigh quotient.

    The default start is whichever of w ≡ 1 and exp(−βd) has the lower
    quotient.  Raises ConvergenceError (carrying the best iterate) when
    ``opts.max_iters`` steps do not reach a stopping criterion.
    """
    opts = opts or SolverOptions()
    quotient = _Quotient(grid, p, beta)
    mass = grid.volume_weights
    eps = opts.regularization

    x, _ = quotient.normalize(_initial_values(init, quotient, opts.floor))
    current = quotient.value(x)
    grad = quotient.gradient(x, eps)
    lumped = grad / mass
    direction = -lumped
    history = [current]
    step = None
    stopped_by = None

    for _ in range(opts.max_iters):
        gnorm2 = float(np.dot(grad, lumped))
        if math.sqrt(max(gnorm2, 0.0)) <= opts.tolerance:
            stopped_by = "gradient"
            break
        slope = float(np.dot(grad, direction))
        if slope >= 0.0:
            direction = -lumped
            slope = -gnorm2
        if step is None:
            step = 1e-2 * float(np.max(np.abs(x))) / float(np.max(np.abs(direction)))
        t, x_new, value = _line_search(quotient, x, direction, current, slope, 2.0 * step, opts.floor)
        if t == 0.0:
            stopped_by = "stalled"
            break
        step = t
        x, factor = quotient.normalize(x_new)
        direction = direction * factor
        current = value
        history.append(current)

        grad_new = quotient.gradient(x, eps)
        lumped_new = grad_new / mass
        conj = 0.0
        if opts.method == "cg":
            conj = max(0.0, float(np.dot(grad_new, lumped_new - lumped)) / gnorm2)
        direction = -lumped_new + conj * direction
        grad, lumped = grad_new, lumped_new

        window = opts.plateau_window
        if len(history) > window and abs(history[-1 - window] - current) <= opts.plateau_rtol * abs(current):
            stopped_by = "plateau"
            break

    exact = quotient.gradient(x)
    gnorm = math.sqrt(max(float(np.dot(exact, exact / mass)), 0.0))
    if stopped_by is None:
        raise ConvergenceError(
            f"descent did not converge in {opts.max_iters} iterations "
            f"(p={p:g}, beta={beta:g}, quotient={current:.12g}, gradient norm={gnorm:.3e})",
            best=ScalarField(grid, x),
            quotient=current,
            gradient_norm=gnorm,
        )

    lam = quotient.value(x)
    diagnostics = Diagnostics(
        iterations=len(history) - 1,
        gradient_norm=gnorm,
        history_length=len(history),
        stopped_by=stopped_by,
    )
    log.info(
        "variational %s p=%g beta=%g: lambda=%.12g after %d steps (%s)",
        grid.domain.kind, p, beta, lam, diagnostics.iterations, stopped_by,
    )
    return EigenPair(lam=lam, u=ScalarField(grid, x), p=float(p), beta=float(beta), diagnostics=diagnostics)


def continuation(
    p_target: float,
    beta: float,
    grid: Grid,
    opts: SolverOptions | None = None,
    p_start: float = 2.0,
    init: ScalarField | str = "default",
) -> list[EigenPair]:
    """
    Solve at ``p_start`` and step p up by ``opts.continuation_factor``,
    warm-starting each solve from the previous eigenfunction.  Returns the path.
    """
    opts = opts or SolverOptions()
    _check(p_target, beta)
    exponents = [float(p_target)]
    if p_target > p_start:
        exponents = [float(p_start)]
        while exponents[-1] * opts.continuation_factor < p_target:
            exponents.append(exponents[-1] * opts.continuation_factor)
        exponents.append(float(p_target))

    path: list[EigenPair] = []
    for p in exponents:
        log.info("continuation step p=%g", p)
        pair = minimize(p, beta, grid, init, opts)
        path.append(pair)
        init = pair.u
    return path


def euler_lagrange_residuals(pair: EigenPair, grid: Grid | None = None) -> np.ndarray:
    """Per-node weak residual of the eigenvalue equation, tested with hat functions."""
    grid = grid or pair.grid
    return _Quotient(grid, pair.p, pair.beta).residuals(_values_on(grid, pair.u), pair.lam)


def euler_lagrange_residual(pair: EigenPair, grid: Grid | None = None) -> float:
    return float(np.max(np.abs(euler_lagrange_residuals(pair, grid))))


def energy_terms(pair: EigenPair) -> tuple[float, float, float]:
    """(Σ m |u|^p, Σ ω |∇_h u|^p, Σ b |u|^p) for the pair's eigenfunction."""
    quotient = _Quotient(pair.grid, pair.p, pair.beta)
    log_g, log_b, log_v = quotient.log_terms(np.asarray(pair.u.values))
    return math.exp(log_v), math.exp(log_g) if log_g > -math.inf else 0.0, math.exp(log_b)
