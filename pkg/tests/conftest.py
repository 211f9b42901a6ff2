"""Shared fixtures: published optimal distributions and corpus helpers."""

import json

import numpy as np
import pytest

from becthresh import binomial_ensemble, validate
from becthresh.errors import InputError, NonPositiveRate

# Optimal R=1/2, L=20 distributions (six-decimal published values) and their
# thresholds.  ``ppositive`` is the published column label; ``certifies`` is
# the honest certification outcome of the ROUNDED coefficients: the optima
# sit on the boundary where p grazes zero, and six-decimal rounding pushes
# the d_c=7 tangencies slightly negative (dips of -7.6e-5 and -7.6e-7, far
# beyond the -1e-10 tolerance) without moving the threshold off the closed
# form.
TABLE1 = {
    "ppos6": dict(
        lam={2: 0.415884, 3: 0.165968, 4: 0.095028, 5: 0.106071, 8: 0.070638, 9: 0.146412},
        d_c=6, delta=0.480904, ppositive=True, certifies=True),
    "free6": dict(
        lam={2: 0.415273, 3: 0.160268, 4: 0.142202, 6: 0.034597, 8: 0.247661},
        d_c=6, delta=0.481524, ppositive=False, certifies=False),
    "ppos7": dict(
        lam={2: 0.339162, 3: 0.138401, 4: 0.104711, 5: 0.033138, 7: 0.166166,
             14: 0.104300, 19: 0.114122},
        d_c=7, delta=0.491407, ppositive=True, certifies=False),
    "free7": dict(
        lam={2: 0.338843, 3: 0.140058, 4: 0.104198, 6: 0.087264, 7: 0.104669, 16: 0.224968},
        d_c=7, delta=0.491740, ppositive=False, certifies=False),
}

# Optimal R=1/2 four-term distributions lambda_2, lambda_3, lambda_5, lambda_L.
TABLE2 = {
    "ppos6_L10": dict(
        lam={2: 0.418913, 3: 0.167565, 5: 0.266696, 10: 0.146826},
        d_c=6, delta=0.477426, ppositive=True, certifies=True),
    "de6_L10": dict(
        lam={2: 0.415774, 3: 0.180916, 5: 0.248100, 10: 0.155210},
        d_c=6, delta=0.480325, ppositive=False, certifies=False),
    "ppos7_L15": dict(
        lam={2: 0.341501, 3: 0.142292, 5: 0.248395, 15: 0.267812},
        d_c=7, delta=0.488041, ppositive=True, certifies=False),
    "de7_L15": dict(
        lam={2: 0.339505, 3: 0.140214, 5: 0.259036, 15: 0.261244},
        d_c=7, delta=0.490947, ppositive=False, certifies=False),
}


@pytest.fixture(scope="session")
def table1():
    return {k: dict(v, ensemble=validate(v["lam"], v["d_c"])) for k, v in TABLE1.items()}


@pytest.fixture(scope="session")
def table2():
    return {k: dict(v, ensemble=validate(v["lam"], v["d_c"])) for k, v in TABLE2.items()}


@pytest.fixture(scope="session")
def binomial_corpus():
    return {(d_c, L): binomial_ensemble(d_c, L)
            for d_c in range(3, 9) for L in range(3, 16)}


def random_valid_ensemble(rng: np.random.Generator, max_degree: int = 20):
    """Rejection-sample an ensemble with lambda_2 > 0, d_c in 3..10, L <= 20."""
    while True:
        d_c = int(rng.integers(3, 11))
        extra = int(rng.integers(1, 6))
        degrees = np.concatenate(([2], rng.choice(np.arange(3, max_degree + 1),
                                                  size=extra, replace=False)))
        weights = rng.dirichlet(np.ones(len(degrees)))
        lam = {int(d): float(w) for d, w in zip(degrees, weights)}
        try:
            return validate(lam, d_c)
        except (NonPositiveRate, InputError):
            continue


def write_ensemble_json(path, lam: dict, d_c: int) -> None:
    path.write_text(json.dumps({"d_c": d_c, "lambda": {str(k): v for k, v in lam.items()}}))
