"""p-polynomial construction, sign-change counting, positivity certification."""

import numpy as np
import pytest
from numpy.polynomial import polynomial as npoly

from becthresh import (
    RegularEnsemble,
    as_check_regular,
    binomial_ensemble,
    build_p_polynomial,
    capacity_gap,
    certify_positivity,
    closed_form_threshold,
    de_threshold,
    fourier_budan_sign_changes,
    is_necessary_condition_met,
    lambda2_for_capacity,
    validate,
)
from becthresh.errors import InputError, NotPPositive, ResultExceedsOne
from conftest import random_valid_ensemble


def brute_force_min(p, samples: int = 1_000_000) -> float:
    xs = np.linspace(0.0, 1.0, samples + 1)[1:]
    return float(npoly.polyval(xs, np.asarray(p.coeffs)).min())


def test_build_two_term_coefficients():
    # omega_2 lambda_2 - (omega_3+1) lambda_3 = 4*0.6 - 10*0.4 = -1.6; then 9*0.4
    p = build_p_polynomial(validate({2: 0.6, 3: 0.4}, 6))
    assert p.coeffs[0] == pytest.approx(-1.6, abs=1e-12)
    assert p.coeffs[1] == pytest.approx(3.6, abs=1e-12)


def test_build_binomial_33():
    # interior coefficients vanish: 1*0.8 - 4*0.2 = 0, leading 3*0.2 = 0.6
    p = build_p_polynomial(binomial_ensemble(3, 3))
    assert p.coeffs[0] == pytest.approx(0.0, abs=1e-12)
    assert p.coeffs[1] == pytest.approx(0.6, abs=1e-12)


def test_build_single_degree_constant():
    p = build_p_polynomial(validate({2: 1.0}, 5))
    assert p.coeffs == (3.0,)  # (d_c - 2) lambda_2


def test_p_at_one_identity(table1, table2):
    rng = np.random.default_rng(7)
    ensembles = [row["ensemble"] for row in table1.values()]
    ensembles += [row["ensemble"] for row in table2.values()]
    ensembles += [random_valid_ensemble(rng) for _ in range(30)]
    for ens in ensembles:
        p = build_p_polynomial(ens)
        assert p(1.0) == pytest.approx((ens.d_c - 1) * ens.lambda2 - 1.0, abs=1e-9)


def test_leading_coefficient_formula(table2):
    for row in table2.values():
        ens = row["ensemble"]
        p = build_p_polynomial(ens)
        L = ens.max_degree
        expected = ((L - 1) * ens.d_c - L) * ens.lambda_coeffs[L]
        assert p.coeffs[-1] == pytest.approx(expected, rel=1e-12)
        assert p.coeffs[-1] > 0.0


def test_certify_tables(table1, table2):
    for group in (table1, table2):
        for name, row in group.items():
            cert = certify_positivity(build_p_polynomial(row["ensemble"]))
            assert cert.is_p_positive == row["certifies"], name
            if not row["certifies"]:
                p = build_p_polynomial(row["ensemble"])
                assert p(cert.witness) < -1e-10, name


def test_rounded_boundary_optima_keep_closed_form_threshold(table1, table2):
    # six-decimal rounding pushes the d_c=7 boundary optima slightly negative,
    # yet their thresholds still sit on [lambda_2 (d_c-1)]^-1
    for row in (table1["ppos7"], table2["ppos7_L15"]):
        ens = row["ensemble"]
        assert not certify_positivity(build_p_polynomial(ens)).is_p_positive
        closed = 1.0 / (ens.lambda2 * (ens.d_c - 1))
        assert de_threshold(ens).delta_star == pytest.approx(closed, abs=1e-6)


def test_certify_binomials(binomial_corpus):
    for key, ens in binomial_corpus.items():
        cert = certify_positivity(build_p_polynomial(ens))
        assert cert.is_p_positive, key
        assert cert.odd_multiplicity_roots_in_unit_interval == 0


def test_certify_agrees_with_brute_force(table1, table2):
    for group in (table1, table2):
        for name, row in group.items():
            p = build_p_polynomial(row["ensemble"])
            oracle = brute_force_min(p) >= -1e-10
            assert certify_positivity(p).is_p_positive == oracle, name


def test_theorem3_term_by_term(binomial_corpus):
    # omega_i lambda_i = (omega_{i+1} + 1) lambda_{i+1} for the binomial family
    for (d_c, L), ens in binomial_corpus.items():
        for i in range(2, L):
            lhs = ((d_c - 1) * (i - 1) - 1) * ens.lambda_coeffs[i]
            rhs = (d_c - 1) * i * ens.lambda_coeffs[i + 1]
            assert lhs == pytest.approx(rhs, abs=1e-12), (d_c, L, i)


def test_sign_changes_four_term_positive_p0():
    # lambda = (0.5, 0.1, 0.2, 0.2) on degrees (2,3,5,8), d_c=6:
    # p_0 = 4*0.5 - 10*0.1 = +1 -> pattern (+,+,-,+,-,+) -> A = 4
    p = build_p_polynomial(validate({2: 0.5, 3: 0.1, 5: 0.2, 8: 0.2}, 6))
    report = fourier_budan_sign_changes(p)
    assert report.A == 4
    assert report.parity_ok
    assert report.B == 0


def test_sign_changes_four_term_negative_p0():
    # p_0 = 4*0.4 - 10*0.3 = -1.4 -> pattern (-,+,-,+,-,+) -> A = 5
    p = build_p_polynomial(validate({2: 0.4, 3: 0.3, 5: 0.15, 8: 0.15}, 6))
    report = fourier_budan_sign_changes(p)
    assert report.A == 5
    assert not report.parity_ok
    assert not is_necessary_condition_met(p)


def test_sign_changes_binomial_zero(binomial_corpus):
    for key, ens in binomial_corpus.items():
        report = fourier_budan_sign_changes(build_p_polynomial(ens))
        assert report.A == 0, key
        assert report.B == 0, key


def test_necessary_condition_on_certified(table1, table2):
    for group in (table1, table2):
        for name, row in group.items():
            if row["certifies"]:
                assert is_necessary_condition_met(build_p_polynomial(row["ensemble"])), name


def test_necessary_condition_ppos7_holds(table1):
    # the parity condition is weaker than certification: it survives the
    # rounding that breaks the d_c=7 tangency (sign pattern gives A = 8)
    report = fourier_budan_sign_changes(build_p_polynomial(table1["ppos7"]["ensemble"]))
    assert report.A == 8
    assert report.parity_ok


def test_necessary_condition_constant():
    assert is_necessary_condition_met(build_p_polynomial(validate({2: 1.0}, 4)))


def test_closed_form_thresholds(table1, table2):
    lam2 = table1["ppos6"]["ensemble"].lambda2
    assert closed_form_threshold(table1["ppos6"]["ensemble"]).delta_star == pytest.approx(
        1.0 / (lam2 * 5), abs=1e-12)
    assert closed_form_threshold(table1["ppos6"]["ensemble"]).delta_star == pytest.approx(
        0.480904, abs=1e-6)
    assert closed_form_threshold(table2["ppos6_L10"]["ensemble"]).delta_star == pytest.approx(
        0.477426, abs=1e-6)
    # the rounded d_c=7 column no longer certifies, but the formula value
    # still reproduces the published threshold
    ens = table2["ppos7_L15"]["ensemble"]
    assert 1.0 / (ens.lambda2 * 6) == pytest.approx(0.488041, abs=1e-6)


def test_closed_form_simple_case():
    report = closed_form_threshold(validate({2: 1.0}, 4))
    assert report.delta_star == pytest.approx(1 / 3, abs=1e-15)
    assert report.gamma == 0.0


def test_closed_form_rejects_uncertified(table1):
    with pytest.raises(NotPPositive):
        closed_form_threshold(table1["free6"]["ensemble"])
    with pytest.raises(NotPPositive):
        closed_form_threshold(as_check_regular(RegularEnsemble(3, 6)))


def test_capacity_gap_values(table1):
    ens = table1["ppos6"]["ensemble"]
    assert capacity_gap(ens, 0.480904) == pytest.approx(0.038192, abs=1e-3)
    # at delta* = 1 - R the gap closes
    assert capacity_gap(ens, 0.5) == pytest.approx(0.0, abs=1e-3)


def test_capacity_gap_published_optimum(table2):
    # delta* = 0.483879 at R = 1/2 gives epsilon = 0.032242
    ens = table2["ppos7_L15"]["ensemble"]  # any rate-1/2 ensemble carries R
    eps = 1.0 - 0.483879 / 0.5
    assert eps == pytest.approx(0.032242, abs=1e-6)
    assert capacity_gap(ens, 0.483879) == pytest.approx(0.032242, abs=1e-3)


def test_lambda2_for_capacity():
    assert lambda2_for_capacity(0.5, 0.0, 6) == pytest.approx(0.4, abs=1e-15)
    value = lambda2_for_capacity(0.5, 0.032242, 7)
    assert value == pytest.approx(1.0 / (0.967758 * 0.5 * 6), abs=1e-12)
    assert value == pytest.approx(0.344442, abs=1e-4)
    with pytest.raises(ResultExceedsOne):
        lambda2_for_capacity(0.9, 0.0, 3)
    with pytest.raises(InputError):
        lambda2_for_capacity(1.5, 0.0, 6)


def test_certify_theorem1_contrapositive(table1):
    # the published unconstrained d_c=6 optimum has threshold 0.481524 strictly
    # below its stability bound 1/(0.415273*5) = 0.481611, so it cannot be
    # p-positive; certification must refuse it
    ens = table1["free6"]["ensemble"]
    bound = 1.0 / (ens.lambda2 * 5)
    assert de_threshold(ens).delta_star < bound - 5e-5
    assert not certify_positivity(build_p_polynomial(ens)).is_p_positive


def test_certificate_shape():
    from becthresh import PositivityCertificate
    with pytest.raises(InputError):
        PositivityCertificate(True, witness=0.5)
    with pytest.raises(InputError):
        PositivityCertificate(False, witness=None)
