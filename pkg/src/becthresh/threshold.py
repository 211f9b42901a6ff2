"""BEC decoding thresholds for check-regular ensembles, three ways.

* ``de_threshold``      -- bisection over the density-evolution recursion
                           x_{l+1} = delta * lambda(1 - (1-x_l)^(d_c-1)),
                           the empirical oracle;
* ``analytic_threshold`` -- minimum of the key function
                           h(x) = [lambda(x) + (d_c-1)(1-x) lambda'(x)]^-1
                           over the fixed points of the tangency map phi;
* ``regular_threshold``  -- the closed form for (d_v, d_c)-regular codes via
                           the unique fixed point of psi(x) = 1-(1-cx)^((d_c-1)/(d_c-2)).
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from .ensemble import CheckRegularEnsemble, RegularEnsemble, as_check_regular
from .errors import (
    DegreeTooSmall,
    DomainError,
    FixedPointSearchFailed,
    InputError,
    IterationBudgetExhausted,
)

_GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


class ThresholdMethod(enum.Enum):
    DE_BISECTION = "density-evolution-bisection"
    ANALYTIC_FIXED_POINT = "analytic-fixed-point"
    REGULAR_CLOSED_FORM = "regular-closed-form"
    PPOSITIVE_CLOSED_FORM = "p-positive-closed-form"


@dataclass(frozen=True)
class DeRecursionConfig:
    """Stopping parameters for the density-evolution recursion."""

    max_iterations: int = 20000
    convergence_epsilon: float = 1e-10
    stall_epsilon: float = 1e-12
    bisection_tolerance: float = 1e-8

    def __post_init__(self):
        for name in ("max_iterations", "convergence_epsilon", "stall_epsilon",
                     "bisection_tolerance"):
            if getattr(self, name) <= 0:
                raise InputError(f"{name} must be positive")


DEFAULT_CONFIG = DeRecursionConfig()


@dataclass(frozen=True)
class ThresholdReport:
    """Threshold value with the method that produced it.

    ``gamma`` is the abscissa achieving the minimum of h (0 for closed-form
    results, None for the bisection oracle).  ``fixed_points`` lists
    (gamma, h(gamma)) pairs when the analytic method located them.
    """

    delta_star: float
    method: ThresholdMethod
    gamma: float | None = None
    fixed_points: tuple[tuple[float, float], ...] = field(default_factory=tuple)

    def __post_init__(self):
        if not 0.0 < self.delta_star <= 1.0:
            raise InputError(f"threshold {self.delta_star} outside (0, 1]")


def _coerce(ensemble) -> CheckRegularEnsemble:
    if isinstance(ensemble, RegularEnsemble):
        return as_check_regular(ensemble)
    return ensemble


def _recursion_terms(ens: CheckRegularEnsemble):
    """Precomputed (exponent, coefficient) pairs for fast scalar evaluation."""
    return tuple(zip((ens.degrees - 1).tolist(), ens.coeffs.tolist())), ens.d_c - 1


def _step(x: float, delta: float, terms, dcm1: int) -> float:
    # y = 1 - (1-x)^(d_c-1) in a form that keeps relative precision near x = 0
    y = -math.expm1(dcm1 * math.log1p(-x)) if x < 1.0 else 1.0
    acc = 0.0
    for e, c in terms:
        acc += c * y ** e
    return delta * acc


def _map_values(xs: np.ndarray, delta: float, ens: CheckRegularEnsemble) -> np.ndarray:
    y = -np.expm1((ens.d_c - 1) * np.log1p(-xs))
    return delta * (ens.coeffs * y[:, None] ** (ens.degrees - 1)).sum(axis=1)


def de_iterate_converges(ensemble, delta: float, config: DeRecursionConfig = DEFAULT_CONFIG) -> bool:
    """Run the recursion from x_0 = delta; True iff it reaches convergence_epsilon.

    Returns False when the iteration stalls (increment below stall_epsilon
    while still above convergence_epsilon), which signals a positive fixed
    point.  Raises IterationBudgetExhausted if the budget runs out with the
    sequence still moving; near-threshold calls need a larger budget.
    """
    if not 0.0 <= delta <= 1.0:
        raise InputError(f"delta {delta} outside [0, 1]")
    ens = _coerce(ensemble)
    terms, dcm1 = _recursion_terms(ens)
    x = delta
    if x < config.convergence_epsilon:
        return True
    for _ in range(config.max_iterations):
        xn = _step(x, delta, terms, dcm1)
        if xn < config.convergence_epsilon:
            return True
        if abs(xn - x) < config.stall_epsilon:
            return False
        x = xn
    raise IterationBudgetExhausted(
        f"recursion at delta={delta} neither converged nor stalled "
        f"within {config.max_iterations} iterations")


def _golden_min(f, a: float, b: float, tol: float) -> tuple[float, float]:
    """Golden-section search; returns (argmin, min value) of f on [a, b]."""
    c = b - _GOLDEN * (b - a)
    d = a + _GOLDEN * (b - a)
    fc, fd = f(c), f(d)
    while b - a > tol:
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - _GOLDEN * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + _GOLDEN * (b - a)
            fd = f(d)
    return (c, fc) if fc < fd else (d, fd)


def _no_fixed_point_below(ens: CheckRegularEnsemble, delta: float, x_hi: float,
                          x_lo: float) -> bool:
    """True iff the recursion map has no fixed point in (x_lo, x_hi].

    Scans the margin x - delta*lambda(1-(1-x)^(d_c-1)) on a hybrid grid
    (log-spaced overall, linear near x_hi where the iterate parks just above
    a nascent fixed point) and sharpens every local minimum by golden
    section.  A nonpositive margin certifies a fixed point; the sequence
    limit then exceeds x_lo and decoding fails.
    """
    if x_hi <= x_lo:
        return True
    terms, dcm1 = _recursion_terms(ens)
    grid = np.unique(np.concatenate([
        np.geomspace(x_lo, x_hi, 3072),
        np.linspace(0.95 * x_hi, x_hi, 1024),
    ]))
    m = grid - _map_values(grid, delta, ens)
    if m.min() <= 0.0:
        return False

    def margin(x: float) -> float:
        return x - _step(x, delta, terms, dcm1)

    interior = np.where((m[1:-1] <= m[:-2]) & (m[1:-1] <= m[2:]))[0] + 1
    if len(interior) > 32:
        # flat landscapes produce hordes of shallow minima; the decision is
        # carried by the lowest ones
        interior = interior[np.argsort(m[interior], kind="stable")[:32]]
    candidates = list(interior)
    if m[0] <= m[1]:
        candidates.append(0)
    if m[-1] <= m[-2]:
        candidates.append(len(m) - 1)
    for k in candidates:
        a = grid[max(k - 1, 0)]
        b = grid[min(k + 1, len(grid) - 1)]
        if _golden_min(margin, a, b, 1e-13 * max(b, 1e-12))[1] <= 0.0:
            return False
    return True


_PROBE_ITER_CAP = 2500
_PROBE_RELATIVE_STALL = 1e-9


def _probe_converges(ens: CheckRegularEnsemble, delta: float,
                     config: DeRecursionConfig) -> bool:
    """Recursion probe for bisection; ambiguous exits are disambiguated.

    The plain stopping rules cannot separate slow geometric decay to zero
    from capture by a nearby positive fixed point at the accuracy the
    bisection needs, so stalled or budget-exhausted runs are settled by
    scanning the map for fixed points below the current iterate.  Because
    the scan decides those cases exactly, the probe also cuts the recursion
    short once per-step progress is negligible relative to the iterate.
    """
    x = delta
    if x < config.convergence_epsilon:
        return True
    terms, dcm1 = _recursion_terms(ens)
    for _ in range(min(config.max_iterations, _PROBE_ITER_CAP)):
        xn = _step(x, delta, terms, dcm1)
        if xn < config.convergence_epsilon:
            return True
        if x - xn < max(config.stall_epsilon, _PROBE_RELATIVE_STALL * x):
            x = xn
            break
        x = xn
    return _no_fixed_point_below(ens, delta, x, config.convergence_epsilon)


def de_threshold(ensemble, config: DeRecursionConfig = DEFAULT_CONFIG) -> ThresholdReport:
    """Threshold by bisection of the density-evolution recursion over delta."""
    ens = _coerce(ensemble)
    lo, hi = 0.0, 1.0
    for _ in range(60):
        mid = 0.5 * (lo + hi)
        if _probe_converges(ens, mid, config):
            lo = mid
        else:
            hi = mid
    return ThresholdReport(delta_star=lo, method=ThresholdMethod.DE_BISECTION)


def h_function(ensemble, x: float) -> float:
    """h(x) = [lambda(x) + (d_c-1)(1-x) lambda'(x)]^-1.

    At x = 0 this is [lambda_2 (d_c-1)]^-1, or +inf when lambda_2 = 0.
    """
    ens = _coerce(ensemble)
    if x == 0.0:
        l2 = ens.lambda2
        return 1.0 / (l2 * (ens.d_c - 1)) if l2 > 0.0 else math.inf
    den = ens.lambda_eval(x) + (ens.d_c - 1) * (1.0 - x) * ens.lambda_prime(x)
    return 1.0 / den if den > 0.0 else math.inf


def phi_function(ensemble, x: float) -> float:
    """Tangency map phi(x) = 1 - (lambda(x)/((d_c-1) lambda'(x)) + 1 - x)^((d_c-1)/(d_c-2)).

    x = 0 is always a fixed point; the ratio lambda/lambda' tends to 0 there.
    """
    ens = _coerce(ensemble)
    if x == 0.0:
        return 0.0
    base = ens.lambda_eval(x) / ((ens.d_c - 1) * ens.lambda_prime(x)) + 1.0 - x
    if base < 0.0:
        raise DomainError(f"phi base {base} negative at x={x}")
    return 1.0 - base ** ((ens.d_c - 1) / (ens.d_c - 2))


_PHI_GRID = 10001
_TANGENCY_SAMPLE_TOL = 1e-7
_TANGENCY_RESIDUAL_TOL = 1e-9


def _phi_values(ens: CheckRegularEnsemble, xs: np.ndarray) -> np.ndarray:
    lam = (ens.coeffs * xs[:, None] ** (ens.degrees - 1)).sum(axis=1)
    lamp = (ens.coeffs * (ens.degrees - 1) * xs[:, None] ** (ens.degrees - 2)).sum(axis=1)
    ratio = np.zeros_like(xs)
    pos = xs > 0.0
    ratio[pos] = lam[pos] / lamp[pos]
    base = ratio / (ens.d_c - 1) + 1.0 - xs
    return 1.0 - base ** ((ens.d_c - 1) / (ens.d_c - 2))


def analytic_threshold(ensemble) -> ThresholdReport:
    """Threshold as min h(gamma) over the fixed points of phi in [0, 1).

    Sign-change fixed points are bisected to 1e-12; grazing (tangential)
    contacts, which generically arise because the contributing fixed points
    come from tangency conditions, are picked up as local minima of
    |phi(x) - x| and sharpened by golden section.  gamma = 0 participates iff
    lambda_2 > 0 (h(0) is infinite otherwise and can never win).
    """
    ens = _coerce(ensemble)
    xs = np.linspace(0.0, 1.0, _PHI_GRID + 1)[:-1]
    g = _phi_values(ens, xs) - xs

    def resid(x: float) -> float:
        return phi_function(ens, x) - x

    points: list[float] = []
    for k in range(1, len(xs) - 1):
        if g[k] == 0.0:
            points.append(float(xs[k]))
        elif g[k] * g[k + 1] < 0.0:
            a, b = float(xs[k]), float(xs[k + 1])
            fa = resid(a)
            while b - a > 1e-12:
                mid = 0.5 * (a + b)
                fm = resid(mid)
                if fa * fm <= 0.0:
                    b = mid
                else:
                    a, fa = mid, fm
            points.append(0.5 * (a + b))
    # tangential contacts need not change sign; refine shallow grazes
    absg = np.abs(g)
    for k in range(2, len(xs) - 1):
        if absg[k] < _TANGENCY_SAMPLE_TOL and absg[k] <= absg[k - 1] and absg[k] <= absg[k + 1]:
            a, b = float(xs[k - 1]), float(xs[k + 1])
            x_star, r_star = _golden_min(lambda x: abs(resid(x)), a, b, 1e-12)
            if r_star < _TANGENCY_RESIDUAL_TOL:
                points.append(x_star)

    merged: list[float] = []
    for x in sorted(points):
        if not merged or x - merged[-1] > 1e-8:
            merged.append(x)
    if ens.lambda2 > 0.0:
        merged.insert(0, 0.0)
    if not merged:
        raise FixedPointSearchFailed(
            "no fixed point of phi found in [0, 1) for a lambda_2 = 0 ensemble")

    pairs = tuple((gamma, h_function(ens, gamma)) for gamma in merged)
    finite = [(h, gamma) for gamma, h in pairs if math.isfinite(h)]
    if not finite:
        raise FixedPointSearchFailed("h is infinite at every located fixed point")
    h_min, gamma_min = min(finite)
    return ThresholdReport(delta_star=h_min, method=ThresholdMethod.ANALYTIC_FIXED_POINT,
                           gamma=gamma_min, fixed_points=pairs)


def regular_threshold(regular: RegularEnsemble) -> ThresholdReport:
    """Closed-form threshold for (d_v, d_c)-regular codes, d_v >= 3.

    delta* = [(d_c-1)(d_v-1)]^-1 / (gamma^(d_v-2) - c gamma^(d_v-1)) with
    gamma the unique fixed point in (0, 1) of psi(x) = 1 - (1 - c x)^((d_c-1)/(d_c-2))
    and c = (M-1)/M, M = (d_c-1)(d_v-1).
    """
    if regular.d_v < 3:
        raise DegreeTooSmall(
            "regular closed form needs d_v >= 3; route d_v = 2 codes through "
            "analytic_threshold(as_check_regular(...))")
    m_prod = (regular.d_c - 1) * (regular.d_v - 1)
    c = (m_prod - 1) / m_prod
    expo = (regular.d_c - 1) / (regular.d_c - 2)

    def psi_resid(x: float) -> float:
        return 1.0 - (1.0 - c * x) ** expo - x

    xs = np.linspace(1e-6, 1.0 - 1e-9, 2001)
    vals = 1.0 - (1.0 - c * xs) ** expo - xs
    brackets = np.where(vals[:-1] * vals[1:] < 0.0)[0]
    assert len(brackets) == 1, f"psi has {len(brackets)} sign-change brackets, expected 1"
    a, b = float(xs[brackets[0]]), float(xs[brackets[0] + 1])
    fa = psi_resid(a)
    while b - a > 1e-14:
        mid = 0.5 * (a + b)
        fm = psi_resid(mid)
        if fa * fm <= 0.0:
            b = mid
        else:
            a, fa = mid, fm
    gamma = 0.5 * (a + b)
    delta = (1.0 / m_prod) / (gamma ** (regular.d_v - 2) - c * gamma ** (regular.d_v - 1))
    return ThresholdReport(delta_star=delta, method=ThresholdMethod.REGULAR_CLOSED_FORM,
                           gamma=gamma, fixed_points=((gamma, delta),))
