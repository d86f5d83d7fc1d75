"""
Asymptotics – p-sweeps, β-sweeps and the shell/ball comparison
=================================================================
Drivers around the two solvers:

  sweep_p               (−λ)^{1/p} and the sup-norm gap to exp(−βd) as p grows
  extrapolate_limit     largest-p eigenfunction + successive Cauchy gaps
  beta_expansion_check  (λ − leading)/β^p against −(n−1) H_max as β grows
  shell_vs_ball         first eigenvalue of equal-volume shell and ball

Solver failures inside a sweep are recorded on the entry and the sweep moves
on.  Every sweep entry also carries the energy-identity defect

    |(−λ) ∫u^p + ∫|∇u|^p − β^p ∮u^p| / (β^p ∮u^p)

which vanishes for an exact eigenpair.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Literal, Sequence

import numpy as np

from robinlab import radial, variational
from robinlab.errors import RobinLabError, SolverError, ValidationError
from robinlab.geometry import (
    Ball,
    Domain,
    ScalarField,
    Shell,
    make_grid,
    max_mean_curvature,
    perimeter_volume_ratio,
    sphere_area,
)
from robinlab.log import get_logger

__all__ = [
    "SweepRecord",
    "ExpansionRecord",
    "LimitEstimate",
    "ShellBallComparison",
    "sweep_p",
    "extrapolate_limit",
    "boundary_maximum_ok",
    "expansion_target",
    "beta_expansion_check",
    "shell_vs_ball",
]

log = get_logger(__name__)

Solver = Literal["radial", "variational"]


@dataclass(frozen=True, eq=False)
class SweepRecord:
    p: float
    lam: float
    root: float
    profile_gap: float
    solver: str
    energy_defect: float = math.nan
    bounds_ok: bool = False
    error: str | None = None
    field: ScalarField | None = field(default=None, repr=False)

    @property
    def ok(self) -> bool:
        return self.error is None

    def to_row(self) -> list:
        return [self.p, self.lam, self.root, self.profile_gap]


@dataclass(frozen=True)
class ExpansionRecord:
    beta: float
    lam: float
    leading: float
    curvature_coeff: float
    target: float
    error: str | None = None

    @property
    def deviation(self) -> float:
        return abs(self.curvature_coeff - self.target)

    def to_row(self) -> list:
        return [self.beta, self.lam, self.leading, self.curvature_coeff]


@dataclass(frozen=True, eq=False)
class LimitEstimate:
    estimate: ScalarField
    gaps: list[float]
    monotone: bool


@dataclass(frozen=True)
class ShellBallComparison:
    lambda_ball: float
    lambda_shell: float
    ball_radius: float
    shell_radius: float
    inner_radius: float

    @property
    def verdict(self) -> bool:
        return self.lambda_shell > self.lambda_ball

    def to_dict(self) -> dict:
        return {
            "lambda_ball": self.lambda_ball,
            "lambda_shell": self.lambda_shell,
            "verdict": self.verdict,
            "ball_radius": self.ball_radius,
            "shell_outer_radius": self.shell_radius,
            "shell_inner_radius": self.inner_radius,
        }


# ---------------------------------------------------------------------------
# p-sweep
# ---------------------------------------------------------------------------

def _check_exponents(p_list: Sequence[float]) -> list[float]:
    exponents = [float(p) for p in p_list]
    if not exponents:
        raise ValidationError("p_list must not be empty")
    if any(not math.isfinite(p) or p <= 1.0 for p in exponents):
        raise ValidationError(f"every exponent must be > 1, got {exponents}")
    if any(b <= a for a, b in zip(exponents, exponents[1:])):
        raise ValidationError(f"p_list must be strictly increasing, got {exponents}")
    return exponents


def _entry_checks(
    p: float, beta: float, lam: float, domain: Domain, terms: tuple[float, float, float]
) -> tuple[float, bool]:
    """Energy-identity defect and the two-sided root bounds."""
    vol, grad, bdy = terms
    rhs = beta ** p * bdy
    defect = abs(-lam * vol + grad - rhs) / rhs
    root = (-lam) ** (1.0 / p)
    lower = beta * perimeter_volume_ratio(domain) ** (1.0 / p)
    upper = beta * (bdy / vol) ** (1.0 / p)
    ok = root >= lower * (1.0 - 1e-8) and root <= upper * (1.0 + 1e-6)
    return defect, ok


def sweep_p(
    domain: Domain,
    beta: float,
    p_list: Sequence[float],
    solver: Solver = "radial",
    resolution: int = 128,
    opts: variational.SolverOptions | None = None,
    steps: int | None = None,
) -> list[SweepRecord]:
    """
    One record per exponent.  Eigenfunctions are restricted to a common grid
    of the given resolution and sup-normalised before the gap to exp(−βd)
    is taken.  The variational path continues in p from entry to entry.
    """
    exponents = _check_exponents(p_list)
    if solver not in ("radial", "variational"):
        raise ValidationError(f"unknown solver {solver!r}")
    grid = make_grid(domain, resolution)
    target = radial.limit_profile(beta, grid).values

    records: list[SweepRecord] = []
    previous: variational.EigenPair | None = None
    for p in exponents:
        try:
            if solver == "radial":
                pair = radial.solve_eigen_radial(p, beta, domain, steps=steps)
                terms = radial.energy_terms(pair.profile)
            else:
                start = previous.p if previous is not None else 2.0
                init = previous.u if previous is not None else "default"
                pair = variational.continuation(p, beta, grid, opts, p_start=min(start, p), init=init)[-1]
                terms = variational.energy_terms(pair)
                previous = pair
            eigenfunction = pair.eigenfunction_on(grid).sup_normalized()
        except (RobinLabError, OverflowError) as exc:
            log.warning("sweep entry p=%g failed: %s", p, exc)
            records.append(SweepRecord(p, math.nan, math.nan, math.nan, solver, error=str(exc)))
            continue

        defect, bounds_ok = _entry_checks(p, beta, pair.lam, domain, terms)
        gap = float(np.max(np.abs(eigenfunction.values - target)))
        records.append(
            SweepRecord(
                p=p,
                lam=pair.lam,
                root=pair.root,
                profile_gap=gap,
                solver=solver,
                energy_defect=defect,
                bounds_ok=bounds_ok,
                field=eigenfunction,
            )
        )
        log.info("sweep p=%g root=%.8f gap=%.3e defect=%.2e", p, pair.root, gap, defect)
    return records


def extrapolate_limit(
    records: Sequence[SweepRecord], fields: Sequence[ScalarField] | None = None
) -> LimitEstimate:
    """
    The largest-p sup-normalised eigenfunction is the u_∞ estimate; gaps are
    the sup-norm distances between successive members.  A non-decreasing gap
    sequence is flagged, not rejected.
    """
    if fields is None:
        fields = [r.field for r in records if r.field is not None]
    fields = list(fields)
    if len(fields) < 2:
        raise ValidationError("extrapolation needs at least two eigenfunctions")
    if len(fields) < 3:
        log.warning("only %d eigenfunctions; the gap sequence has a single entry", len(fields))
    grid = fields[0].grid
    for f in fields[1:]:
        if not f.grid.same_as(grid):
            raise ValidationError("eigenfunctions are attached to different grids")

    normalized = [f.sup_normalized() for f in fields]
    gaps = [
        float(np.max(np.abs(b.values - a.values))) for a, b in zip(normalized, normalized[1:])
    ]
    monotone = all(b < a for a, b in zip(gaps, gaps[1:]))
    if not monotone:
        log.warning("Cauchy gaps are not strictly decreasing: %s", gaps)
    return LimitEstimate(estimate=normalized[-1], gaps=gaps, monotone=monotone)


def boundary_maximum_ok(field: ScalarField, atol: float = 1e-12) -> bool:
    """True when the discrete maximum is attained on a boundary-tagged point."""
    values = field.values
    return bool(values[field.grid.is_boundary].max() >= values.max() - atol)


# ---------------------------------------------------------------------------
# β → ∞
# ---------------------------------------------------------------------------

def expansion_target(domain: Domain) -> float:
    """−(n−1) H_max, the limit of (λ − leading)/β^p."""
    if not isinstance(domain, (Ball, Shell)):
        raise ValidationError(f"expansion check needs a ball or shell, got {domain.kind}")
    return -(domain.n - 1) * max_mean_curvature(domain)


def beta_expansion_check(
    domain: Domain,
    p: float,
    beta_list: Sequence[float],
    steps: int | None = None,
) -> list[ExpansionRecord]:
    target = expansion_target(domain)
    betas = [float(b) for b in beta_list]
    if not betas:
        raise ValidationError("beta_list must not be empty")
    if any(b <= 0.0 for b in betas) or any(b2 <= b1 for b1, b2 in zip(betas, betas[1:])):
        raise ValidationError(f"beta_list must be positive and increasing, got {betas}")

    records = []
    for beta in betas:
        if beta ** p < 10.0:
            log.warning("beta=%g gives beta^p=%.3g < 10; entry is far from the asymptotic regime", beta, beta ** p)
        leading = -(p - 1.0) * beta ** (p * p / (p - 1.0))
        try:
            lam = radial.solve_eigen_radial(p, beta, domain, steps=steps).lam
        except (SolverError, OverflowError) as exc:
            log.warning("expansion entry beta=%g failed: %s", beta, exc)
            records.append(ExpansionRecord(beta, math.nan, leading, math.nan, target, error=str(exc)))
            continue
        coeff = (lam - leading) / beta ** p
        records.append(ExpansionRecord(beta, lam, leading, coeff, target))
        log.info("expansion beta=%g coeff=%.6f target=%.6f", beta, coeff, target)
    return records


def shell_vs_ball(
    n: int,
    volume: float,
    r: float,
    p: float,
    beta: float,
    steps: int | None = None,
) -> ShellBallComparison:
    """Compare the first eigenvalue of a ball and a shell of equal volume."""
    if not (math.isfinite(volume) and volume > 0.0):
        raise ValidationError(f"volume must be positive, got {volume!r}")
    scaled = n * volume / sphere_area(n)
    ball = Ball(n, scaled ** (1.0 / n))
    shell = Shell(n, r, (scaled + r ** n) ** (1.0 / n))
    lam_ball = radial.solve_eigen_radial(p, beta, ball, steps=steps).lam
    lam_shell = radial.solve_eigen_radial(p, beta, shell, steps=steps).lam
    return ShellBallComparison(lam_ball, lam_shell, ball.R, shell.R, r)