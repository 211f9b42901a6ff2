"""Degree-distribution data model for check-regular LDPC ensembles.

An ensemble is described from the edge perspective: lambda(x) = sum_i
lambda_i x^(i-1) over variable degrees i >= 2, together with a single
check-node degree d_c (rho(x) = x^(d_c-1)).  All types are immutable
values after construction.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path

import numpy as np

from .errors import DegreeTooSmall, InputError, NegativeCoefficient, NonPositiveRate, SumNotOne

# Input coefficient sums within this of 1 are renormalized (published tables
# are rounded to six decimals); larger deviations are rejected.
INPUT_SUM_TOLERANCE = 1e-5

# After construction the simplex constraint must hold to this accuracy.
SIMPLEX_TOLERANCE = 1e-12


@dataclass(frozen=True)
class CheckRegularEnsemble:
    """Edge-perspective variable distribution plus a uniform check degree.

    lambda_coeffs maps variable degree i (>= 2) to the fraction of edges
    lambda_i attached to degree-i variable nodes; the map is sparse (only
    active degrees appear).  Treat instances as immutable.
    """

    lambda_coeffs: dict[int, float]
    d_c: int

    def __post_init__(self):
        if not self.lambda_coeffs:
            raise DegreeTooSmall("ensemble has no active variable degrees")
        if self.d_c < 3:
            raise DegreeTooSmall(f"check degree d_c={self.d_c} must be >= 3")
        for i, c in self.lambda_coeffs.items():
            if i < 2:
                raise DegreeTooSmall(f"variable degree {i} must be >= 2")
            if c < 0.0:
                raise NegativeCoefficient(f"lambda_{i} = {c} is negative")
        total = sum(self.lambda_coeffs.values())
        if abs(total - 1.0) > SIMPLEX_TOLERANCE:
            raise SumNotOne(f"sum of coefficients is {total!r}, not 1")
        degs = np.array(sorted(self.lambda_coeffs), dtype=np.int64)
        cfs = np.array([self.lambda_coeffs[int(i)] for i in degs])
        object.__setattr__(self, "_degrees", degs)
        object.__setattr__(self, "_coeffs", cfs)

    @property
    def degrees(self) -> np.ndarray:
        """Sorted array of active variable degrees."""
        return self._degrees

    @property
    def coeffs(self) -> np.ndarray:
        """Coefficients aligned with ``degrees``."""
        return self._coeffs

    @property
    def max_degree(self) -> int:
        return int(self._degrees[-1])

    @property
    def lambda2(self) -> float:
        return self.lambda_coeffs.get(2, 0.0)

    def lambda_eval(self, x):
        """lambda(x) = sum_i lambda_i x^(i-1); accepts scalars or arrays."""
        x = np.asarray(x, dtype=float)
        val = (self._coeffs * x[..., None] ** (self._degrees - 1)).sum(axis=-1)
        return float(val) if val.ndim == 0 else val

    def lambda_prime(self, x):
        """lambda'(x) = sum_i (i-1) lambda_i x^(i-2)."""
        x = np.asarray(x, dtype=float)
        val = (self._coeffs * (self._degrees - 1) * x[..., None] ** (self._degrees - 2)).sum(axis=-1)
        return float(val) if val.ndim == 0 else val

    def dense_coeffs(self) -> np.ndarray:
        """Dense lambda coefficients indexed by degree 2..L (length L-1)."""
        out = np.zeros(self.max_degree - 1)
        out[self._degrees - 2] = self._coeffs
        return out

    def to_json_dict(self) -> dict:
        return {
            "d_c": self.d_c,
            "lambda": {str(i): self.lambda_coeffs[i] for i in sorted(self.lambda_coeffs)},
        }


@dataclass(frozen=True)
class RegularEnsemble:
    """(d_v, d_c)-regular code: lambda(x) = x^(d_v-1), rho(x) = x^(d_c-1)."""

    d_v: int
    d_c: int

    def __post_init__(self):
        if self.d_v < 2:
            raise DegreeTooSmall(f"variable degree d_v={self.d_v} must be >= 2")
        if self.d_c < 3:
            raise DegreeTooSmall(f"check degree d_c={self.d_c} must be >= 3")
        if self.d_c <= self.d_v:
            raise NonPositiveRate(f"regular ({self.d_v},{self.d_c}) code has rate <= 0")


@dataclass(frozen=True)
class NodePerspectiveDistribution:
    """Node-perspective degree fractions: fractions[i] of variable nodes have degree i."""

    fractions: dict[int, float]

    def __post_init__(self):
        total = sum(self.fractions.values())
        if abs(total - 1.0) > SIMPLEX_TOLERANCE:
            raise SumNotOne(f"node fractions sum to {total!r}, not 1")
        if any(f < 0.0 for f in self.fractions.values()):
            raise NegativeCoefficient("node fraction is negative")

    @property
    def average_degree(self) -> float:
        return sum(i * f for i, f in self.fractions.items())


def validate(raw_coeffs, d_c: int) -> CheckRegularEnsemble:
    """Build a validated ensemble from raw (possibly rounded) coefficients.

    Coefficients whose sum is within 1e-5 of 1 are renormalized; exact
    zeros are dropped from the sparse map.

    Raises:
        NegativeCoefficient, SumNotOne, DegreeTooSmall, NonPositiveRate
    """
    if not raw_coeffs:
        raise DegreeTooSmall("empty coefficient map")
    coeffs: dict[int, float] = {}
    for key, value in raw_coeffs.items():
        try:
            i = int(key)
            c = float(value)
        except (TypeError, ValueError) as exc:
            raise InputError(f"bad coefficient entry {key!r}: {value!r}") from exc
        if c < 0.0:
            raise NegativeCoefficient(f"lambda_{i} = {c} is negative")
        if i < 2:
            raise DegreeTooSmall(f"variable degree {i} must be >= 2")
        if c > 0.0:
            coeffs[i] = c
    if not coeffs:
        raise DegreeTooSmall("all coefficients are zero")
    total = sum(coeffs.values())
    if abs(total - 1.0) > INPUT_SUM_TOLERANCE:
        raise SumNotOne(f"coefficients sum to {total}, outside 1 +/- {INPUT_SUM_TOLERANCE}")
    ensemble = CheckRegularEnsemble({i: c / total for i, c in coeffs.items()}, int(d_c))
    design_rate(ensemble)  # raises NonPositiveRate for degenerate inputs
    return ensemble


def design_rate(ensemble) -> float:
    """Design rate R = 1 - (1/d_c) / sum_i(lambda_i / i).

    For a RegularEnsemble this reduces to 1 - d_v/d_c exactly.
    """
    if isinstance(ensemble, RegularEnsemble):
        return 1.0 - ensemble.d_v / ensemble.d_c
    inv_avg = sum(c / i for i, c in ensemble.lambda_coeffs.items())
    rate = 1.0 - (1.0 / ensemble.d_c) / inv_avg
    if rate <= 0.0:
        raise NonPositiveRate(f"design rate {rate} is not positive")
    return rate


def _generalized_binomial(alpha: Fraction, n: int) -> Fraction:
    """C(alpha, n) = alpha (alpha-1) ... (alpha-n+1) / n! by iterative product."""
    out = Fraction(1)
    for t in range(n):
        out = out * (alpha - t) / (t + 1)
    return out


def binomial_ensemble(d_c: int, max_degree: int) -> CheckRegularEnsemble:
    """Binomial degree family with alpha = 1/(d_c - 1).

    lambda_i = alpha C(alpha, i-1) (-1)^i / (alpha - L C(alpha, L) (-1)^(L+1))
    for i = 2..L.  Computed in exact rational arithmetic, so the simplex
    constraint holds to rounding error and every coefficient is strictly
    positive.
    """
    if d_c < 3:
        raise DegreeTooSmall(f"check degree d_c={d_c} must be >= 3")
    if max_degree < 3:
        raise DegreeTooSmall(f"max degree L={max_degree} must be >= 3")
    L = int(max_degree)
    alpha = Fraction(1, d_c - 1)
    den = alpha - L * _generalized_binomial(alpha, L) * (-1) ** (L + 1)
    lam = {}
    for i in range(2, L + 1):
        value = alpha * _generalized_binomial(alpha, i - 1) * (-1) ** i / den
        assert value > 0, f"binomial coefficient lambda_{i} not positive"
        lam[i] = value
    total = sum(lam.values())  # exactly 1 in rational arithmetic
    assert total == 1
    floats = {i: float(v) for i, v in lam.items()}
    fsum = sum(floats.values())
    return CheckRegularEnsemble({i: v / fsum for i, v in floats.items()}, d_c)


def to_node_perspective(ensemble: CheckRegularEnsemble) -> NodePerspectiveDistribution:
    """Convert edge fractions to node fractions: Lambda_i ∝ lambda_i / i."""
    weights = {i: c / i for i, c in ensemble.lambda_coeffs.items()}
    total = sum(weights.values())
    return NodePerspectiveDistribution({i: w / total for i, w in weights.items()})


def from_node_perspective(node_dist: NodePerspectiveDistribution, d_c: int) -> CheckRegularEnsemble:
    """Inverse of to_node_perspective: lambda_i ∝ i * Lambda_i."""
    weights = {i: i * f for i, f in node_dist.fractions.items() if f > 0.0}
    total = sum(weights.values())
    return CheckRegularEnsemble({i: w / total for i, w in weights.items()}, d_c)


def as_check_regular(regular: RegularEnsemble) -> CheckRegularEnsemble:
    """View a (d_v, d_c)-regular code as the check-regular ensemble lambda_{d_v} = 1."""
    return CheckRegularEnsemble({regular.d_v: 1.0}, regular.d_c)


def load_ensemble(path) -> CheckRegularEnsemble:
    """Read an ensemble JSON file: {"d_c": 6, "lambda": {"2": 0.4159, ...}}."""
    with open(path) as fh:
        data = json.load(fh)
    try:
        return validate(data["lambda"], int(data["d_c"]))
    except (KeyError, TypeError, ValueError) as exc:
        raise InputError(f"malformed ensemble file {path}: {exc}") from exc


def save_ensemble(ensemble: CheckRegularEnsemble, path) -> None:
    Path(path).write_text(json.dumps(ensemble.to_json_dict(), indent=2) + "\n")


def ensemble_hash(ensemble: CheckRegularEnsemble) -> str:
    """Stable sha256 over the canonical JSON form, for output metadata."""
    canonical = json.dumps(ensemble.to_json_dict(), sort_keys=True)
    return hashlib.sha256(canonical.encode()).hexdigest()
