"""
Radial – shooting solver for interval, ball and shell domains
===============================================================
Along the radius the Robin eigenvalue problem reduces to

    (s^{n-1} |u'|^{p-2} u')' = μ s^{n-1} u^{p-1},    μ = −λ > 0,

with the interval handled as n = 1 on its half-length.  Instead of (u, q)
with q = |u'|^{p-2} u' we integrate the log-scaled pair

    w = log u,          z = q / u^{p-1},
    w' = φ(z),          z' = μ − (n−1) z / s − (p−1) |z|^{p/(p-1)},

where φ(z) = |z|^{1/(p-1)} sgn z.  z stays of order β^p for every p, so
nothing overflows and u' is recovered as u·φ(z) without the degenerate
derivative at the centre.  The outer Robin condition becomes z(R) = β^p.

Integration uses a classical fixed-step fourth-order Runge–Kutta scheme with
max(2000, 100·p) steps.  The root in μ is bracketed by a geometric scan of
[β^p P/|Ω|, (2β)^{p²/(p-1)} + 10] and polished with scipy's brentq.
"""

from __future__ import annotations

import math
import numbers
from dataclasses import dataclass
from typing import ClassVar

import numpy as np
from scipy import integrate, optimize

from robinlab.errors import BracketError, GeometryError, SolverError, ValidationError
from robinlab.geometry import (
    Ball,
    Domain,
    Grid,
    Interval,
    RADIAL_DOMAINS,
    ScalarField,
    Shell,
    distance_field,
    perimeter_volume_ratio,
    sphere_area,
)
from robinlab.log import get_logger

__all__ = [
    "RadialProfile",
    "RadialEigenPair",
    "default_steps",
    "integrate_radial",
    "solve_eigen_radial",
    "limit_profile",
    "energy_terms",
]

log = get_logger(__name__)

# |z| beyond this is treated as blow-up of the flux ratio (u has hit zero)
_BLOWUP = 1e150
_LOG_MAX = 700.0


def default_steps(p: float) -> int:
    return max(2000, int(math.ceil(100.0 * p)))


def _validate(p: float, beta: float, domain: Domain) -> None:
    if not (isinstance(p, numbers.Real) and math.isfinite(p) and p > 1.0):
        raise ValidationError(f"p must be a finite exponent > 1, got {p!r}")
    if not (isinstance(beta, numbers.Real) and math.isfinite(beta) and beta > 0.0):
        raise ValidationError(f"beta must be positive, got {beta!r}")
    if not isinstance(domain, RADIAL_DOMAINS):
        raise GeometryError(f"radial solver supports interval, ball and shell; got {domain.kind}")


def _setup(domain: Domain, p: float, beta: float, n: int | None) -> tuple[int, float, float, float]:
    """Return (n, s_start, s_end, z_start)."""
    if isinstance(domain, Interval):
        if n not in (None, 1):
            raise ValidationError(f"interval problems use n = 1, got n={n}")
        return 1, 0.0, 0.5 * (domain.b - domain.a), 0.0
    if n not in (None, domain.n):
        raise ValidationError(f"n={n} does not match the domain dimension {domain.n}")
    if isinstance(domain, Ball):
        return domain.n, 0.0, domain.R, 0.0
    # inner Robin condition: q(r) = −β^p u(r)^{p-1}
    return domain.n, domain.r, domain.R, -(beta ** p)


# ---------------------------------------------------------------------------
# Fixed-step integrator
# ---------------------------------------------------------------------------

def _march(
    p: float,
    mu: float,
    n: int,
    s0: float,
    s1: float,
    z0: float,
    steps: int,
    record: bool = False,
):
    """
    RK4 on (w, z) from s0 to s1.

    Returns the final z, or ±inf on blow-up.  With ``record`` also returns the
    node, z and w arrays (None on blow-up).
    """
    h = (s1 - s0) / steps
    k = 1.0 / (p - 1.0)
    e = 1.0 + k
    c = p - 1.0
    m = float(n - 1)

    def rhs(s: float, z: float) -> float:
        if s == 0.0:
            return mu / n
        return mu - m * z / s - c * abs(z) ** e

    def phi(z: float) -> float:
        return math.copysign(abs(z) ** k, z)

    z = z0
    w = 0.0
    if record:
        zs = np.empty(steps + 1)
        ws = np.empty(steps + 1)
        zs[0], ws[0] = z, w

    half = 0.5 * h
    try:
        for i in range(steps):
            s = s0 + i * h
            k1 = rhs(s, z)
            z2 = z + half * k1
            k2 = rhs(s + half, z2)
            z3 = z + half * k2
            k3 = rhs(s + half, z3)
            z4 = z + h * k3
            k4 = rhs(s + h, z4)
            if record:
                w += h / 6.0 * (phi(z) + 2.0 * phi(z2) + 2.0 * phi(z3) + phi(z4))
            z += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
            if not math.isfinite(z) or abs(z) > _BLOWUP:
                raise OverflowError
            if record:
                zs[i + 1], ws[i + 1] = z, w
    except OverflowError:
        hint = math.inf if z > 0 else -math.inf
        return (hint, None) if record else hint

    if record:
        nodes = np.linspace(s0, s1, steps + 1)
        return z, (nodes, zs, ws)
    return z


def _signed_exp(log_magnitude: float, sign: float) -> float:
    if log_magnitude > _LOG_MAX:
        return math.copysign(math.inf, sign)
    return math.copysign(math.exp(log_magnitude), sign)


# ---------------------------------------------------------------------------
# Profiles and eigenpairs
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class RadialProfile:
    nodes: np.ndarray
    values: np.ndarray
    derivatives: np.ndarray
    p: float
    lam: float
    beta: float
    domain: Domain

    def radius_of(self, grid: Grid) -> np.ndarray:
        """Radial coordinate of every grid point in this profile's frame."""
        if not grid.domain == self.domain:
            raise ValidationError("grid and profile are built on different domains")
        s = grid.points[:, 0]
        if isinstance(self.domain, Interval):
            return np.abs(s - 0.5 * (self.domain.a + self.domain.b))
        return s

    def to_field(self, grid: Grid) -> ScalarField:
        """Piecewise-linear interpolation of the profile onto ``grid``."""
        return ScalarField(grid, np.interp(self.radius_of(grid), self.nodes, self.values))

    def to_rows(self) -> tuple[list[str], list[list[float]]]:
        rows = np.column_stack([self.nodes, self.values, self.derivatives]).tolist()
        return ["s", "u", "du"], rows


@dataclass(frozen=True, eq=False)
class RadialEigenPair:
    lam: float
    profile: RadialProfile
    p: float
    beta: float
    domain: Domain
    steps: int
    mismatch: float
    boundary_norm: float
    solver: ClassVar[str] = "radial"

    @property
    def root(self) -> float:
        return (-self.lam) ** (1.0 / self.p)

    def eigenfunction_on(self, grid: Grid) -> ScalarField:
        return self.profile.to_field(grid)

    def to_dict(self) -> dict:
        return {
            "solver": self.solver,
            "p": self.p,
            "beta": self.beta,
            "domain": self.domain.to_dict(),
            "lambda": self.lam,
            "root": self.root,
            "norm": self.boundary_norm,
            "steps": self.steps,
            "mismatch": self.mismatch,
        }


def integrate_radial(
    p: float,
    lam: float,
    n: int | None,
    domain: Domain,
    steps: int | None = None,
    *,
    beta: float,
) -> tuple[RadialProfile | None, float]:
    """
    Integrate the radial equation for a trial eigenvalue ``lam`` < 0.

    Initial data are u = 1 with u' = 0 at the centre (interval, ball) or
    u' = −β^{p/(p-1)} at the inner radius (shell).  Returns the profile and
    the outer Robin mismatch |u'|^{p-2}u' − β^p u^{p-1} at the far end; on
    blow-up the profile is None and the mismatch is ±inf.  A profile whose
    values overflow is also returned as None.
    """
    _validate(p, beta, domain)
    if not (math.isfinite(lam) and lam < 0.0):
        raise ValidationError(f"lambda must be negative, got {lam!r}")
    steps = steps or default_steps(p)
    n, s0, s1, z0 = _setup(domain, p, beta, n)
    z_end, trace = _march(p, -lam, n, s0, s1, z0, steps, record=True)
    if trace is None:
        return None, z_end

    nodes, zs, ws = trace
    diff = z_end - beta ** p
    mismatch = 0.0 if diff == 0.0 else _signed_exp((p - 1.0) * ws[-1] + math.log(abs(diff)), diff)
    if not math.isfinite(mismatch) or float(np.max(ws)) > _LOG_MAX:
        return None, mismatch
    values = np.exp(ws)
    with np.errstate(over="ignore"):
        derivatives = values * np.sign(zs) * np.abs(zs) ** (1.0 / (p - 1.0))
    profile = RadialProfile(nodes, values, derivatives, float(p), float(lam), float(beta), domain)
    return profile, mismatch


def _window(p: float, beta: float, domain: Domain) -> tuple[float, float]:
    """Scan window for μ = −λ."""
    lo = beta ** p * perimeter_volume_ratio(domain)
    log_hi = p * p / (p - 1.0) * math.log(2.0 * beta)
    hi = math.exp(min(log_hi, _LOG_MAX)) + 10.0
    return lo, max(hi, 2.0 * lo)


def solve_eigen_radial(
    p: float,
    beta: float,
    domain: Domain,
    steps: int | None = None,
    tol: float = 1e-12,
) -> RadialEigenPair:
    """First Robin eigenpair by shooting on λ."""
    _validate(p, beta, domain)
    steps = steps or default_steps(p)
    n, s0, s1, z0 = _setup(domain, p, beta, None)
    target = beta ** p

    def mismatch(mu: float) -> float:
        z = _march(p, mu, n, s0, s1, z0, steps)
        if math.isinf(z):
            return z
        return (z - target) / target

    mu_lo, mu_hi = _window(p, beta, domain)
    window = (-mu_hi, -mu_lo)

    a, fa = mu_lo, mismatch(mu_lo)
    if fa > 0.0:
        raise BracketError("mismatch is already positive at the test-function bound", window)
    b, fb = a, fa
    while fb < 0.0:
        if b >= mu_hi:
            raise BracketError("no sign change of the Robin mismatch", window)
        a, fa = b, fb
        b = min(2.0 * a, mu_hi)
        fb = mismatch(b)
    log.debug("bracket found: mu in [%.6g, %.6g] (p=%g, beta=%g)", a, b, p, beta)

    if fa == 0.0:
        mu = a
    elif fb == 0.0:
        mu = b
    else:
        # brentq needs finite end values; blow-up ends are shrunk by bisection
        while math.isinf(fa) or math.isinf(fb):
            mid = 0.5 * (a + b)
            fm = mismatch(mid)
            if fm >= 0.0:
                b, fb = mid, fm
            else:
                a, fa = mid, fm
            if b - a <= tol * b:
                break
        if math.isinf(fa) or math.isinf(fb):
            mu = 0.5 * (a + b)
        else:
            mu = optimize.brentq(mismatch, a, b, xtol=tol * a, rtol=max(tol, 4.0 * np.finfo(float).eps), maxiter=200)

    lam = -mu
    bound = -target * perimeter_volume_ratio(domain)
    if not lam <= bound + 1e-8 * abs(bound):
        raise SolverError(f"shooting eigenvalue {lam:.12g} violates the upper bound {bound:.12g}")

    z_end, trace = _march(p, mu, n, s0, s1, z0, steps, record=True)
    if trace is None:
        raise SolverError(f"profile integration blew up at the root mu={mu:.12g}")
    nodes, zs, ws = trace

    if isinstance(domain, Shell):
        w_top = max(ws[0], ws[-1])
    else:
        w_top = ws[-1]
    values = np.exp(ws - w_top)
    derivatives = values * np.sign(zs) * np.abs(zs) ** (1.0 / (p - 1.0))
    profile = RadialProfile(nodes, values, derivatives, float(p), lam, float(beta), domain)

    diff = z_end - target
    mism = 0.0 if diff == 0.0 else _signed_exp((p - 1.0) * (ws[-1] - w_top) + math.log(abs(diff)), diff)
    _, _, boundary = energy_terms(profile)
    pair = RadialEigenPair(
        lam=lam,
        profile=profile,
        p=float(p),
        beta=float(beta),
        domain=domain,
        steps=steps,
        mismatch=mism,
        boundary_norm=boundary ** (1.0 / p),
    )
    log.info("radial %s p=%g beta=%g: lambda=%.12g root=%.8f", domain.kind, p, beta, lam, pair.root)
    return pair


def energy_terms(profile: RadialProfile) -> tuple[float, float, float]:
    """
    (∫_Ω u^p, ∫_Ω |u'|^p, ∮_∂Ω u^p) for a radial profile.

    Volume integrals use Simpson's rule on the integration nodes.
    """
    domain, p, s, u = profile.domain, profile.p, profile.nodes, profile.values
    if isinstance(domain, Interval):
        density = np.full(s.size, 2.0)
        boundary = 2.0 * u[-1] ** p
    else:
        area = sphere_area(domain.n)
        density = area * s ** (domain.n - 1)
        boundary = area * domain.R ** (domain.n - 1) * u[-1] ** p
        if isinstance(domain, Shell):
            boundary += area * domain.r ** (domain.n - 1) * u[0] ** p
    vol = integrate.simpson(density * u ** p, x=s)
    grad = integrate.simpson(density * np.abs(profile.derivatives) ** p, x=s)
    return float(vol), float(grad), float(boundary)


def limit_profile(beta: float, grid: Grid) -> ScalarField:
    """x ↦ exp(−β d(x, ∂Ω)), equal to 1 on the boundary."""
    if not (math.isfinite(beta) and beta > 0.0):
        raise ValidationError(f"beta must be positive, got {beta!r}")
    d = distance_field(grid)
    return d.with_values(np.exp(-beta * d.values))
