"""The p-polynomial of a check-regular ensemble and its positivity class.

For lambda(x) = sum lambda_i x^(i-1) and check degree d_c, define
omega_i = (d_c-1)(i-1) - 1 and

    p(x) = omega_L lambda_L x^(L-2)
         + sum_{i=2}^{L-1} [omega_i lambda_i - (omega_{i+1}+1) lambda_{i+1}] x^(i-2).

A distribution with lambda_2 > 0 is *p-positive* when p(x) >= 0 on (0, 1];
its decoding threshold then has the closed form [lambda_2 (d_c-1)]^-1.
Certification must be exact about grazing contacts: optimized distributions
sit on the boundary where p has a double root, so a sampling pre-check is
backed by Sturm-sequence root counting on the square-free part.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numpy.polynomial import polynomial as npoly

from .ensemble import CheckRegularEnsemble, design_rate
from .errors import InputError, NotPPositive, NumericallyIndeterminate, ResultExceedsOne
from .threshold import ThresholdMethod, ThresholdReport, _golden_min

COEFF_SNAP = 1e-12        # coefficients below this magnitude are treated as zero
NEGATIVE_TOL = 1e-10      # p >= -NEGATIVE_TOL counts as nonnegative
_SAMPLES = 200001


@dataclass(frozen=True)
class PPolynomial:
    """Dense p-polynomial p_0..p_{L-2} plus the ensemble it came from."""

    coeffs: tuple[float, ...]
    source: CheckRegularEnsemble

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    def __call__(self, x):
        return npoly.polyval(x, np.asarray(self.coeffs))


@dataclass(frozen=True)
class SignChangeReport:
    """Coefficient sign changes A and derivative-sequence changes B at x=1."""

    A: int
    B: int
    parity_ok: bool


@dataclass(frozen=True)
class PositivityCertificate:
    is_p_positive: bool
    witness: float | None = None
    odd_multiplicity_roots_in_unit_interval: int | None = None

    def __post_init__(self):
        if self.is_p_positive == (self.witness is not None):
            raise InputError("certificate must carry a witness exactly when negative")


def _omega(i: int, d_c: int) -> int:
    return (d_c - 1) * (i - 1) - 1


def build_p_polynomial(ensemble: CheckRegularEnsemble) -> PPolynomial:
    """Assemble p from the sparse lambda map; absent degrees contribute zero."""
    d_c = ensemble.d_c
    L = ensemble.max_degree
    lam = ensemble.lambda_coeffs
    if L == 2:
        # degenerate single-degree case: p is the positive constant (d_c-2) lambda_2
        return PPolynomial((float((d_c - 2) * lam[2]),), ensemble)
    coeffs = np.zeros(L - 1)
    for i in range(2, L):
        coeffs[i - 2] = (_omega(i, d_c) * lam.get(i, 0.0)
                         - (_omega(i + 1, d_c) + 1) * lam.get(i + 1, 0.0))
    coeffs[L - 2] = _omega(L, d_c) * lam[L]
    assert coeffs[L - 2] > 0.0, "leading coefficient [(L-1)d_c - L] lambda_L must be positive"
    p1_direct = float(coeffs.sum())
    p1_identity = (d_c - 1) * lam.get(2, 0.0) - 1.0
    assert abs(p1_direct - p1_identity) < 1e-9 * max(1.0, abs(p1_identity)), \
        "p(1) must equal (d_c-1) lambda_2 - 1"
    return PPolynomial(tuple(coeffs), ensemble)


# --- low-level real-polynomial helpers (ascending coefficients) ---

def _trim(c: np.ndarray, tol: float = 0.0) -> np.ndarray:
    mask = np.abs(c) > tol
    if not mask.any():
        return np.zeros(1)
    return np.array(c[: int(np.max(np.nonzero(mask))) + 1])


def _normalize(c: np.ndarray) -> np.ndarray:
    scale = np.abs(c).max()
    return c / scale if scale > 0 else c


def _poly_gcd(a: np.ndarray, b: np.ndarray, rel_tol: float = 1e-9) -> np.ndarray:
    """Euclidean gcd with normalized remainders; small remainders snap to zero."""
    a = _normalize(_trim(a, COEFF_SNAP))
    b = _normalize(_trim(b, COEFF_SNAP))
    if len(b) > len(a):
        a, b = b, a
    while len(b) > 1 or abs(b[0]) > 0:
        rem = npoly.polydiv(a, b)[1]
        rem = _trim(rem, rel_tol)
        if len(rem) == 1 and rem[0] == 0.0:
            return b
        a, b = b, _normalize(rem)
        if len(b) == 1:
            break
    return b


def _square_free_part(c: np.ndarray) -> np.ndarray:
    c = _trim(c, COEFF_SNAP)
    if len(c) <= 2:
        return c
    g = _poly_gcd(c, npoly.polyder(c))
    if len(g) == 1:
        return c
    q = _trim(npoly.polydiv(c, g)[0], COEFF_SNAP)
    return q


def _sturm_chain(c: np.ndarray) -> list[np.ndarray]:
    c = _normalize(_trim(c, COEFF_SNAP))
    chain = [c]
    if len(c) == 1:
        return chain
    chain.append(_normalize(_trim(npoly.polyder(c), 0.0)))
    while len(chain[-1]) > 1:
        rem = -npoly.polydiv(chain[-2], chain[-1])[1]
        rem = _trim(rem, 1e-12)
        if len(rem) == 1 and rem[0] == 0.0:
            break
        chain.append(_normalize(rem))
    return chain


def _sign_variations(chain: list[np.ndarray], x: float) -> int:
    signs = []
    for poly in chain:
        v = float(npoly.polyval(x, poly))
        if abs(v) > 1e-10:
            signs.append(1.0 if v > 0 else -1.0)
    return int(sum(1 for s0, s1 in zip(signs, signs[1:]) if s0 * s1 < 0))


def _count_roots(chain: list[np.ndarray], a: float, b: float) -> int:
    return _sign_variations(chain, a) - _sign_variations(chain, b)


def _isolate_roots(chain: list[np.ndarray], a: float, b: float) -> list[float]:
    """Refined locations of the distinct roots of the (square-free) chain head."""
    total = _count_roots(chain, a, b)
    if total <= 0:
        return []
    if b - a < 1e-12:
        # numerically coincident cluster; report the midpoint once
        return [0.5 * (a + b)]
    if total == 1:
        q = chain[0]
        fa = float(npoly.polyval(a, q))
        lo, hi = a, b
        if fa * float(npoly.polyval(b, q)) > 0.0:
            # tangent-like numerics: fall back to Sturm-guided bisection
            while hi - lo > 1e-12:
                mid = 0.5 * (lo + hi)
                if _count_roots(chain, lo, mid) >= 1:
                    hi = mid
                else:
                    lo = mid
            return [0.5 * (lo + hi)]
        while hi - lo > 1e-14:
            mid = 0.5 * (lo + hi)
            fm = float(npoly.polyval(mid, q))
            if fa * fm <= 0.0:
                hi = mid
            else:
                lo, fa = mid, fm
        return [0.5 * (lo + hi)]
    mid = 0.5 * (a + b)
    return _isolate_roots(chain, a, mid) + _isolate_roots(chain, mid, b)


def certify_positivity(p: PPolynomial,
                       negative_tol: float = NEGATIVE_TOL) -> PositivityCertificate:
    """Decide whether p(x) >= 0 on (0, 1] (to tolerance -negative_tol).

    Dense sampling finds any honest violation; Sturm counting on the
    square-free part then adjudicates roots the sampling cannot see, with
    each located root classified by evaluating p on both sides.  Grazing
    double roots (the optimizer's boundary case) classify as touches and
    keep the certificate positive.

    Raises NumericallyIndeterminate when the sampled minimum sits inside
    (-negative_tol, 0) and root classification is degenerate.
    """
    coeffs = np.array(p.coeffs)
    coeffs[np.abs(coeffs) < COEFF_SNAP] = 0.0
    if len(coeffs) == 1 or not np.any(coeffs != 0.0):
        return PositivityCertificate(True, None, 0)
    p1 = float(coeffs.sum())
    if p1 < -negative_tol:
        return PositivityCertificate(False, 1.0, None)

    xs = np.linspace(0.0, 1.0, _SAMPLES)[1:]
    vals = npoly.polyval(xs, coeffs)
    k = int(np.argmin(vals))
    if vals[k] < -negative_tol:
        a = xs[max(k - 1, 0)]
        b = xs[min(k + 1, len(xs) - 1)]
        wx, wv = _golden_min(lambda x: float(npoly.polyval(x, coeffs)), a, b, 1e-13)
        witness = wx if wv <= vals[k] else float(xs[k])
        return PositivityCertificate(False, float(witness), None)
    sampled_min = float(vals[k])

    q = _square_free_part(coeffs)
    chain = _sturm_chain(q)
    roots = _isolate_roots(chain, 0.0, 1.0)
    odd = 0
    indeterminate = False
    witness = None
    for idx, r in enumerate(roots):
        gaps = [r, 1.0 - r]
        if idx > 0:
            gaps.append(r - roots[idx - 1])
        if idx + 1 < len(roots):
            gaps.append(roots[idx + 1] - r)
        h = min(1e-3, min(gaps) / 4.0)
        if h <= 0.0:
            continue
        left = float(npoly.polyval(r - h, coeffs))
        right = float(npoly.polyval(r + h, coeffs))
        if left > negative_tol and right > negative_tol:
            continue  # even-multiplicity touch from above
        side = r - h if left < right else r + h
        lo, hi = max(r - h, 1e-12), min(r + h, 1.0)
        wx, wv = _golden_min(lambda x: float(npoly.polyval(x, coeffs)), lo, hi, 1e-13)
        if min(wv, left, right) < -negative_tol:
            odd += 1
            witness = wx if wv < min(left, right) else side
        elif abs(left) <= negative_tol and abs(right) <= negative_tol:
            indeterminate = True
    if odd > 0:
        return PositivityCertificate(False, float(witness), None)
    if indeterminate and -negative_tol < sampled_min < 0.0:
        raise NumericallyIndeterminate(
            "sampled minimum within tolerance of zero and root classification "
            "degenerate; boundary case")
    return PositivityCertificate(True, None, 0)


def fourier_budan_sign_changes(p: PPolynomial) -> SignChangeReport:
    """Sign changes A in p_0..p_{L-2} and B in the derivative sequence at 1.

    Exact zeros (after snapping at 1e-12) are dropped before counting.  For
    every ensemble the derivative values p'(1), p''(1), ... are positive, so
    B is 0 whenever p(1) > 0; both facts are asserted.
    """
    coeffs = np.array(p.coeffs)
    coeffs[np.abs(coeffs) < COEFF_SNAP] = 0.0
    kept = coeffs[coeffs != 0.0]
    A = int(np.sum(kept[:-1] * kept[1:] < 0.0)) if len(kept) > 1 else 0

    values = []
    noise = []
    d = coeffs.copy()
    d_abs = np.abs(coeffs)
    for _ in range(len(coeffs)):
        values.append(float(d.sum()))
        noise.append(float(d_abs.sum()))
        d = npoly.polyder(d)
        d_abs = npoly.polyder(d_abs)
    signs = []
    for k, (v, s) in enumerate(zip(values, noise)):
        if abs(v) <= max(1e-12 * s, COEFF_SNAP):
            continue
        if k >= 1:
            assert v > 0.0, f"derivative value p^({k})(1)={v} expected positive"
        signs.append(1.0 if v > 0 else -1.0)
    B = int(sum(1 for s0, s1 in zip(signs, signs[1:]) if s0 * s1 < 0))
    if values[0] > max(1e-12 * noise[0], COEFF_SNAP):
        assert B == 0, "derivative sequence at 1 is all-positive when p(1) > 0"
    return SignChangeReport(A=A, B=B, parity_ok=(A % 2 == 0))


def is_necessary_condition_met(p: PPolynomial) -> bool:
    """Even coefficient sign-change count: necessary for p-positivity."""
    return fourier_budan_sign_changes(p).parity_ok


def closed_form_threshold(ensemble: CheckRegularEnsemble,
                          certificate: PositivityCertificate | None = None) -> ThresholdReport:
    """Threshold [lambda_2 (d_c-1)]^-1 of a certified p-positive ensemble."""
    if certificate is None:
        certificate = certify_positivity(build_p_polynomial(ensemble))
    if not certificate.is_p_positive:
        raise NotPPositive("ensemble failed positivity certification")
    l2 = ensemble.lambda2
    if l2 <= 0.0:
        raise NotPPositive("p-positive class requires lambda_2 > 0")
    delta = 1.0 / (l2 * (ensemble.d_c - 1))
    return ThresholdReport(delta_star=delta, method=ThresholdMethod.PPOSITIVE_CLOSED_FORM,
                           gamma=0.0, fixed_points=((0.0, delta),))


def capacity_gap(ensemble: CheckRegularEnsemble, delta_star) -> float:
    """Fractional gap to capacity: epsilon = 1 - delta* / (1 - R)."""
    if isinstance(delta_star, ThresholdReport):
        delta_star = delta_star.delta_star
    rate = design_rate(ensemble)
    return 1.0 - delta_star / (1.0 - rate)


def lambda2_for_capacity(rate: float, epsilon: float, d_c: int) -> float:
    """lambda_2 = [(1 - epsilon)(1 - R)(d_c - 1)]^-1, the capacity-matching value."""
    if not 0.0 < rate < 1.0:
        raise InputError(f"rate {rate} outside (0, 1)")
    if not 0.0 <= epsilon < 1.0:
        raise InputError(f"epsilon {epsilon} outside [0, 1)")
    if d_c < 3:
        raise InputError(f"check degree {d_c} must be >= 3")
    value = 1.0 / ((1.0 - epsilon) * (1.0 - rate) * (d_c - 1))
    if value >= 1.0:
        raise ResultExceedsOne(f"lambda_2 = {value} >= 1 is infeasible")
    return value
