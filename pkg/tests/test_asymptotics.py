"""
test_asymptotics.py – p-sweeps, the u_∞ estimate, the β → ∞ expansion and
the shell-vs-ball comparison.

The three reference sweeps are session fixtures from conftest.py.
"""
import math

import numpy as np
import pytest

from robinlab import asymptotics, radial
from robinlab.errors import ValidationError
from robinlab.geometry import Ball, Interval, Rectangle, ScalarField, Shell, make_grid
from robinlab.variational import SolverOptions

LIMIT_TOLERANCE = 0.1
EXPANSION_TOLERANCE = 0.15
ENERGY_TOLERANCE = 1e-6


def _roots(records):
    return [r.root for r in records]


# ---------------------------------------------------------------------------
# sweep_p on the interval
# ---------------------------------------------------------------------------

def test_interval_sweep_has_one_clean_record_per_exponent(interval_sweep):
    assert [r.p for r in interval_sweep] == [2.0, 4.0, 8.0, 16.0, 32.0, 64.0]
    for record in interval_sweep:
        assert record.ok
        assert record.solver == "radial"
        assert record.lam < 0.0 and record.root > 0.0
        assert record.field is not None
        assert record.field.values.max() == pytest.approx(1.0)


def test_interval_roots_stay_above_riccati_floor(interval_sweep):
    for record in interval_sweep:
        assert record.root >= (record.p - 1.0) ** (1.0 / record.p)


def test_interval_roots_decrease_toward_beta(interval_sweep):
    roots = _roots(interval_sweep)
    # the sequence rises from p=2 to p=4 before turning down
    assert roots[1] > roots[0]
    tail = roots[1:]
    assert all(b < a for a, b in zip(tail, tail[1:]))
    assert abs(roots[-1] - 1.0) < abs(roots[2] - 1.0)
    assert abs(roots[-1] - 1.0) < LIMIT_TOLERANCE


def test_interval_profile_gap_shrinks(interval_sweep):
    gaps = [r.profile_gap for r in interval_sweep]
    assert gaps[0] > 0.1
    tail = gaps[1:]
    assert all(b < a for a, b in zip(tail, tail[1:]))
    assert gaps[-1] < 0.05


def test_interval_sweep_energy_and_bounds(interval_sweep):
    for record in interval_sweep:
        assert record.bounds_ok
        assert record.energy_defect < ENERGY_TOLERANCE


def test_beta_two_doubles_the_limit(interval_sweep_beta2):
    roots = _roots(interval_sweep_beta2)
    assert abs(roots[-1] - 2.0) / 2.0 < LIMIT_TOLERANCE
    assert abs(roots[-1] - 2.0) < abs(roots[2] - 2.0)
    assert all(r.bounds_ok for r in interval_sweep_beta2)


# ---------------------------------------------------------------------------
# sweep_p on the disc
# ---------------------------------------------------------------------------

def test_disc_sweep_converges(ball_sweep):
    roots = _roots(ball_sweep)
    assert roots[-1] >= 64.0 ** (1.0 / 64.0)
    assert abs(roots[-1] - 1.0) < LIMIT_TOLERANCE
    assert abs(roots[-1] - 1.0) < abs(roots[2] - 1.0)
    for record in ball_sweep:
        assert record.bounds_ok
        assert record.energy_defect < ENERGY_TOLERANCE
        assert asymptotics.boundary_maximum_ok(record.field)


def test_disc_sweep_at_beta_two(ball_sweep_beta2):
    roots = _roots(ball_sweep_beta2)
    assert [r.p for r in ball_sweep_beta2] == [2.0, 4.0, 8.0, 16.0, 32.0, 64.0]
    assert abs(roots[-1] - 2.0) / 2.0 < LIMIT_TOLERANCE
    assert roots[-1] >= 2.0 * 64.0 ** (1.0 / 64.0)
    assert abs(roots[-1] - 2.0) < abs(roots[2] - 2.0)
    for record in ball_sweep_beta2:
        assert record.ok and record.bounds_ok
        assert record.energy_defect < ENERGY_TOLERANCE
        assert asymptotics.boundary_maximum_ok(record.field)


def test_variational_sweep_tracks_radial_roots():
    records = asymptotics.sweep_p(Interval(-1.0, 1.0), 1.0, [2.0, 4.0], solver="variational", resolution=100)
    for record in records:
        assert record.ok and record.solver == "variational"
        oracle = radial.solve_eigen_radial(record.p, 1.0, Interval(-1.0, 1.0))
        assert record.root == pytest.approx(oracle.root, rel=0.01)
        assert record.energy_defect < 1e-10


def test_sweep_records_solver_failures_and_moves_on():
    records = asymptotics.sweep_p(
        Interval(-1.0, 1.0), 1.0, [2.0, 3.0], solver="variational", resolution=16, opts=SolverOptions(max_iters=1)
    )
    assert len(records) == 2
    for record in records:
        assert not record.ok
        assert "did not converge" in record.error
        assert math.isnan(record.lam) and record.field is None


def test_sweep_keeps_going_after_an_overflowing_entry():
    # 4 ** 600 is out of float range
    records = asymptotics.sweep_p(Interval(-1.0, 1.0), 4.0, [2.0, 600.0])
    assert records[0].error is None
    assert records[0].root == pytest.approx(radial.solve_eigen_radial(2.0, 4.0, Interval(-1.0, 1.0)).root)
    assert not records[1].ok
    assert records[1].error
    assert math.isnan(records[1].root)


@pytest.mark.parametrize(
    "p_list",
    [[], [2.0, 2.0], [4.0, 2.0], [1.0, 2.0], [2.0, math.inf]],
    ids=["empty", "repeated", "decreasing", "p-one", "infinite"],
)
def test_sweep_rejects_bad_exponent_lists(p_list):
    with pytest.raises(ValidationError):
        asymptotics.sweep_p(Interval(-1.0, 1.0), 1.0, p_list)


def test_sweep_rejects_unknown_solver():
    with pytest.raises(ValidationError):
        asymptotics.sweep_p(Interval(-1.0, 1.0), 1.0, [2.0], solver="both")


# ---------------------------------------------------------------------------
# extrapolate_limit
# ---------------------------------------------------------------------------

def test_interval_cauchy_gaps_decrease(interval_sweep):
    estimate = asymptotics.extrapolate_limit(interval_sweep)
    assert len(estimate.gaps) == len(interval_sweep) - 1
    assert estimate.monotone
    assert np.allclose(estimate.estimate.values, interval_sweep[-1].field.values)
    assert asymptotics.boundary_maximum_ok(estimate.estimate)


def test_identical_fields_have_zero_gap():
    grid = make_grid(Interval(0.0, 1.0), 16)
    field = ScalarField(grid, np.linspace(1.0, 2.0, grid.size))
    estimate = asymptotics.extrapolate_limit([], fields=[field, field, field])
    assert estimate.gaps == [0.0, 0.0]
    assert not estimate.monotone


def test_extrapolation_needs_two_fields_on_one_grid():
    coarse = make_grid(Interval(0.0, 1.0), 8)
    fine = make_grid(Interval(0.0, 1.0), 16)
    with pytest.raises(ValidationError):
        asymptotics.extrapolate_limit([], fields=[ScalarField(coarse, np.ones(coarse.size))])
    with pytest.raises(ValidationError):
        asymptotics.extrapolate_limit(
            [], fields=[ScalarField(coarse, np.ones(coarse.size)), ScalarField(fine, np.ones(fine.size))]
        )


def test_boundary_maximum_detects_interior_peak():
    grid = make_grid(Interval(-1.0, 1.0), 16)
    bump = ScalarField(grid, 2.0 - grid.points[:, 0] ** 2)
    assert not asymptotics.boundary_maximum_ok(bump)
    assert asymptotics.boundary_maximum_ok(bump.with_values(1.0 + grid.points[:, 0] ** 2))


# ---------------------------------------------------------------------------
# β → ∞ expansion
# ---------------------------------------------------------------------------

@pytest.mark.parametrize(
    "domain, target",
    [(Ball(2, 1.0), -1.0), (Ball(3, 1.0), -2.0), (Shell(2, 1.0, 2.0), -0.5)],
    ids=["disc", "ball3", "annulus"],
)
def test_expansion_coefficient_approaches_curvature_term(domain, target):
    assert asymptotics.expansion_target(domain) == pytest.approx(target)
    betas = [2.0, 4.0, 8.0, 16.0] if isinstance(domain, Ball) else [4.0, 8.0, 16.0]
    records = asymptotics.beta_expansion_check(domain, 2.0, betas)
    assert [r.beta for r in records] == betas
    assert all(r.error is None for r in records)
    for r in records:
        assert r.leading == pytest.approx(-(r.beta ** 4))
        assert r.target == pytest.approx(target)
    assert records[-1].deviation < EXPANSION_TOLERANCE
    assert records[-1].deviation <= records[0].deviation


@pytest.mark.parametrize(
    "domain, betas",
    [
        (Interval(-1.0, 1.0), [2.0, 4.0]),
        (Rectangle(1.0, 1.0), [2.0, 4.0]),
        (Ball(2, 1.0), []),
        (Ball(2, 1.0), [4.0, 2.0]),
        (Ball(2, 1.0), [0.0, 2.0]),
    ],
    ids=["interval", "rectangle", "empty", "decreasing", "zero-beta"],
)
def test_expansion_rejects_bad_input(domain, betas):
    with pytest.raises(ValidationError):
        asymptotics.beta_expansion_check(domain, 2.0, betas)


# ---------------------------------------------------------------------------
# shell_vs_ball
# ---------------------------------------------------------------------------

@pytest.mark.parametrize("beta", [6.0, 8.0])
def test_shell_eigenvalue_exceeds_ball(beta):
    result = asymptotics.shell_vs_ball(2, math.pi, 1.0, 2.0, beta)
    assert result.ball_radius == pytest.approx(1.0)
    assert result.shell_radius == pytest.approx(math.sqrt(2.0))
    assert result.verdict
    # curvature terms: (1 − 1/√2)·β^p
    assert (result.lambda_shell - result.lambda_ball) / beta ** 2 == pytest.approx(1.0 - 1.0 / math.sqrt(2.0), abs=0.05)


def test_shell_gap_grows_with_beta():
    gap6 = asymptotics.shell_vs_ball(2, math.pi, 1.0, 2.0, 6.0)
    gap8 = asymptotics.shell_vs_ball(2, math.pi, 1.0, 2.0, 8.0)
    assert gap8.lambda_shell - gap8.lambda_ball > gap6.lambda_shell - gap6.lambda_ball


def test_vanishing_hole_recovers_the_ball():
    result = asymptotics.shell_vs_ball(2, math.pi, 0.01, 2.0, 1.0)
    assert result.lambda_shell == pytest.approx(result.lambda_ball, rel=0.05)
    record = result.to_dict()
    assert set(record) == {
        "lambda_ball", "lambda_shell", "verdict", "ball_radius", "shell_outer_radius", "shell_inner_radius",
    }
    assert record["shell_inner_radius"] == 0.01


def test_shell_vs_ball_rejects_bad_volume():
    with pytest.raises(ValidationError):
        asymptotics.shell_vs_ball(2, 0.0, 1.0, 2.0, 6.0)
