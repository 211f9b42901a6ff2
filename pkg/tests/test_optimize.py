"""Optimizers: dependent-coefficient solving, permitted region, trajectory, DE."""

import numpy as np
import pytest
from numpy.polynomial import polynomial as npoly

from becthresh import (
    DEParams,
    OptimizationSpec,
    analytic_optimize,
    build_p_polynomial,
    certify_positivity,
    de_optimize,
    design_rate,
    de_threshold,
    permitted_region,
    solve_dependent_coefficients,
    trajectory,
    validate,
)
from becthresh.errors import InputError


def traj_spec(d_c=7, K=5, L=17, rate=0.5):
    return OptimizationSpec(target_rate=rate, d_c=d_c, active_degrees=(2, 3, K, L))


def test_spec_validation():
    with pytest.raises(InputError):
        OptimizationSpec(target_rate=0.5, d_c=7, active_degrees=(2, 3, 4, 17))  # K <= 4
    with pytest.raises(InputError):
        OptimizationSpec(target_rate=0.5, d_c=7, active_degrees=(2, 3, 5, 6))  # K >= L-1
    with pytest.raises(InputError):
        OptimizationSpec(target_rate=1.2, d_c=7, active_degrees=20)
    with pytest.raises(InputError):
        OptimizationSpec(target_rate=0.5, d_c=7, active_degrees=3)


def test_spec_json_round_trip():
    spec = traj_spec()
    again = OptimizationSpec.from_json_dict(spec.to_json_dict())
    assert again == spec
    with pytest.raises(InputError):
        OptimizationSpec.from_json_dict({"target_rate": 0.5, "d_c": 7,
                                         "active_degrees": 20, "bogus": 1})


def test_solve_dependent_published_point():
    # the (7,5,17) optimum: epsilon = 0.032242 pins lambda_2 = 0.344439
    spec = traj_spec()
    out = solve_dependent_coefficients(spec, 0.032242, 0.260274)
    assert out is not None
    l2, l3, lK = out
    assert l2 == pytest.approx(1.0 / (0.967758 * 0.5 * 6), abs=1e-9)
    assert 0.0 < l3 < 1.0 and 0.0 < lK < 1.0
    ens = validate({2: l2, 3: l3, 5: lK, 17: 0.260274}, 7)
    assert design_rate(ens) == pytest.approx(0.5, abs=1e-9)


def test_solve_dependent_infeasible_lambda_L_one():
    assert solve_dependent_coefficients(traj_spec(), 0.03, 1.0) is None


def test_solve_dependent_round_trip_rate():
    spec = traj_spec(d_c=6, K=5, L=10)
    rng = np.random.default_rng(11)
    found = 0
    while found < 10:
        eps = rng.uniform(0.0, 0.3)
        lamL = rng.uniform(0.05, 0.5)
        out = solve_dependent_coefficients(spec, eps, lamL)
        if out is None:
            continue
        l2, l3, lK = out
        ens = validate({2: l2, 3: l3, 5: lK, 10: lamL}, 6)
        assert design_rate(ens) == pytest.approx(0.5, abs=1e-9)
        found += 1


def test_permitted_region_nonempty_cases():
    for d_c, K, L in [(7, 5, 17), (6, 5, 10)]:
        region = permitted_region(traj_spec(d_c=d_c, K=K, L=L), resolution=150)
        assert not region.is_empty, (d_c, K, L)
        assert region.feasible.any()
        # every sampled interior point satisfies the inequalities by construction;
        # spot-check one row against solve_dependent_coefficients
        i = int(np.argmax(region.feasible.any(axis=1)))
        j = int(np.argmax(region.feasible[i]))
        out = solve_dependent_coefficients(
            traj_spec(d_c=d_c, K=K, L=L),
            float(region.eps_values[i]), float(region.lamL_values[j]))
        assert out is not None


def test_permitted_region_high_epsilon_excluded():
    # lambda_2(eps) = 1/((1-eps)(1-R)(d_c-1)) diverges past 1 as eps -> 1
    region = permitted_region(traj_spec(), resolution=150)
    assert not region.feasible[-1].any()


def test_trajectory_residuals_and_feasible_window():
    spec = traj_spec()
    points = trajectory(spec, x_bar_grid=np.linspace(0.05, 0.95, 400))
    assert points, "trajectory should produce points"
    fam_spec_checked = 0
    from becthresh.optimize import _FourTermFamily
    fam = _FourTermFamily(spec)
    for pt in points[::25]:
        sol = fam.solve_double_root(pt.x_bar)
        l2, lL = sol
        l3, lK = fam.dependent_34(l2, lL)
        dense = np.zeros(16)
        dense[0], dense[1], dense[3], dense[15] = l2, l3, lK, lL
        from becthresh.optimize import _p_matrix
        coeffs = _p_matrix(7, 17) @ dense
        assert abs(npoly.polyval(pt.x_bar, coeffs)) < 1e-9
        assert abs(npoly.polyval(pt.x_bar, npoly.polyder(coeffs))) < 1e-9
        fam_spec_checked += 1
    assert fam_spec_checked > 5
    feas = [p.x_bar for p in points if p.feasible]
    assert feas and 0.52 < min(feas) < 0.54 and 0.72 < max(feas) < 0.75


def test_trajectory_points_have_double_root():
    # feed a feasible trajectory point back through the p builder and verify a
    # root of multiplicity >= 2 near x_bar via the square-free part
    from becthresh.optimize import _FourTermFamily
    from becthresh.ppositive import _square_free_part
    spec = traj_spec()
    fam = _FourTermFamily(spec)
    pt = next(p for p in trajectory(spec) if p.feasible)
    l2, lL = fam.solve_double_root(pt.x_bar)
    ens = fam.ensemble_at(l2, lL)
    coeffs = np.array(build_p_polynomial(ens).coeffs)
    square_free = _square_free_part(coeffs)
    # degree drops by at least one, and the square-free part vanishes near x_bar
    assert len(square_free) < len(coeffs)
    assert abs(npoly.polyval(pt.x_bar, square_free)) < 1e-6 * max(np.abs(square_free))


def test_analytic_optimize_published_cases():
    res = analytic_optimize(traj_spec())
    assert res.epsilon_opt == pytest.approx(0.032242, abs=1e-4)
    assert res.report.delta_star == pytest.approx(0.483879, abs=1e-4)
    assert res.crossing[0] == pytest.approx(0.527434, abs=2e-3)
    assert res.crossing[1] == pytest.approx(0.735514, abs=2e-3)
    cert = certify_positivity(build_p_polynomial(res.ensemble))
    assert cert.is_p_positive
    assert design_rate(res.ensemble) == pytest.approx(0.5, abs=1e-6)


def test_analytic_optimize_table2_cases(table2):
    for d_c, L, key in [(6, 10, "ppos6_L10"), (7, 15, "ppos7_L15")]:
        res = analytic_optimize(traj_spec(d_c=d_c, K=5, L=L))
        expected = table2[key]["delta"]
        assert res.report.delta_star == pytest.approx(expected, abs=2e-4), key
        for deg, val in table2[key]["lam"].items():
            assert res.ensemble.lambda_coeffs[deg] == pytest.approx(val, abs=5e-3), (key, deg)


def _small_de_spec(d_c=6, L=8, constrained=True, seed=5, generations=150):
    return OptimizationSpec(target_rate=0.5, d_c=d_c, active_degrees=L,
                            p_positive_constrained=constrained,
                            de_params=DEParams(seed=seed, generations=generations))


def test_de_reproducible_bit_for_bit():
    spec = _small_de_spec()
    r1 = de_optimize(spec)
    r2 = de_optimize(spec)
    assert r1.ensemble.lambda_coeffs == r2.ensemble.lambda_coeffs
    assert r1.report.delta_star == r2.report.delta_star
    assert r1.trace == r2.trace


def test_de_constrained_output_contract():
    res = de_optimize(_small_de_spec())
    ens = res.ensemble
    assert design_rate(ens) == pytest.approx(0.5, abs=1e-6)
    assert abs(sum(ens.lambda_coeffs.values()) - 1.0) < 1e-12
    cert = certify_positivity(build_p_polynomial(ens))
    assert cert.is_p_positive
    # constrained-mode threshold is the closed form by construction
    assert res.report.delta_star == pytest.approx(1.0 / (ens.lambda2 * 5), abs=1e-9)
    assert res.report.delta_star == pytest.approx(de_threshold(ens).delta_star, abs=1e-5)
    assert res.seed == 5
    assert res.trace and res.trace[-1][1] >= res.trace[0][1] - 1e-12


def test_de_unconstrained_dominates_constrained():
    con = de_optimize(_small_de_spec(constrained=True, seed=9, generations=250))
    unc = de_optimize(_small_de_spec(constrained=False, seed=9, generations=250))
    assert unc.report.delta_star >= con.report.delta_star - 1e-6


def test_de_infeasible_rate_raises():
    # rate 0.9 with d_c = 3 requires sum(lambda_i / i) = 10/3 > 1/2: impossible
    from becthresh.errors import NoFeasibleCandidate
    spec = OptimizationSpec(target_rate=0.9, d_c=3, active_degrees=8,
                            de_params=DEParams(seed=1, generations=5))
    with pytest.raises(NoFeasibleCandidate):
        de_optimize(spec)
