"""Threshold optimization of check-regular degree distributions at fixed rate.

Two optimizers:

* ``de_optimize``       -- constrained differential evolution over the free
  coefficients lambda_4..lambda_L, with (lambda_2, lambda_3) solved from the
  simplex and rate equalities.  In p-positive mode the constraints
  p(x_i) >= 0 are enforced on a uniform grid and the objective reduces to
  minimizing lambda_2 (equivalent to maximizing the closed-form threshold);
  in unconstrained mode the objective is the density-evolution threshold
  written as min over x of (1 - (1-x)^(1/(d_c-1))) / lambda(x).

* ``analytic_optimize`` -- the four-term family lambda_2, lambda_3,
  lambda_K, lambda_L: the permitted region M in the (epsilon, lambda_L)
  plane is the necessary-condition set, and the optimum is located on the
  double-root trajectory p(xbar) = p'(xbar) = 0, whose points solve a 2x2
  linear system once lambda_3 and lambda_K are eliminated.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field

import numpy as np
from numpy.polynomial import polynomial as npoly

from .ensemble import CheckRegularEnsemble, validate
from .errors import (
    InputError,
    NoFeasibleCandidate,
    NoPPositiveSolution,
    SingularSystem,
)
from .ppositive import (
    build_p_polynomial,
    capacity_gap,
    certify_positivity,
    closed_form_threshold,
)
from .threshold import ThresholdReport, analytic_threshold, de_threshold

_TRAJ_RESIDUAL_TOL = 1e-9


@dataclass(frozen=True)
class DEParams:
    """Differential-evolution hyperparameters (rand/1/bin)."""

    population: int | None = None   # None -> 10 x number of free coefficients
    weight: float = 0.5
    crossover: float = 0.9
    generations: int = 2000
    seed: int = 0

    def __post_init__(self):
        if self.population is not None and self.population < 5:
            raise InputError("population must be at least 5")
        if not 0.0 < self.weight <= 2.0:
            raise InputError("weight F outside (0, 2]")
        if not 0.0 <= self.crossover <= 1.0:
            raise InputError("crossover CR outside [0, 1]")
        if self.generations < 1:
            raise InputError("generations must be positive")


@dataclass(frozen=True)
class OptimizationSpec:
    """What to optimize: rate, check degree, degree support, constraints.

    ``active_degrees`` selects the mode: an integer L means DE over all
    degrees 2..L; an explicit four-element set {2, 3, K, L} selects the
    analytic trajectory method (requires 4 < K < L-1 and L >= 7).
    """

    target_rate: float
    d_c: int
    active_degrees: int | tuple[int, ...]
    p_positive_constrained: bool = False
    constraint_grid: int = 100
    de_params: DEParams = field(default_factory=DEParams)

    def __post_init__(self):
        if not 0.0 < self.target_rate < 1.0:
            raise InputError(f"target rate {self.target_rate} outside (0, 1)")
        if self.d_c < 3:
            raise InputError(f"check degree {self.d_c} must be >= 3")
        if self.constraint_grid < 10:
            raise InputError("constraint grid too coarse")
        if isinstance(self.active_degrees, int):
            if self.active_degrees < 4:
                raise InputError("DE mode needs max degree L >= 4")
        else:
            degs = tuple(sorted(int(d) for d in self.active_degrees))
            object.__setattr__(self, "active_degrees", degs)
            if len(degs) != 4 or degs[0] != 2 or degs[1] != 3:
                raise InputError("trajectory mode needs active degrees {2, 3, K, L}")
            K, L = degs[2], degs[3]
            if not (4 < K < L - 1) or L < 7:
                raise InputError(f"trajectory mode needs 4 < K < L-1 and L >= 7, got K={K} L={L}")

    @property
    def mode(self) -> str:
        return "de" if isinstance(self.active_degrees, int) else "trajectory"

    @property
    def max_degree(self) -> int:
        return self.active_degrees if self.mode == "de" else self.active_degrees[3]

    @property
    def edge_sum_target(self) -> float:
        """Required sum of lambda_i / i for the target design rate."""
        return (1.0 / self.d_c) / (1.0 - self.target_rate)

    def to_json_dict(self) -> dict:
        return {
            "target_rate": self.target_rate,
            "d_c": self.d_c,
            "active_degrees": (self.active_degrees if self.mode == "de"
                               else list(self.active_degrees)),
            "p_positive_constrained": self.p_positive_constrained,
            "constraint_grid": self.constraint_grid,
            "de_params": {
                "population": self.de_params.population,
                "weight": self.de_params.weight,
                "crossover": self.de_params.crossover,
                "generations": self.de_params.generations,
                "seed": self.de_params.seed,
            },
        }

    @classmethod
    def from_json_dict(cls, data: dict) -> "OptimizationSpec":
        known = {"target_rate", "d_c", "active_degrees", "p_positive_constrained",
                 "constraint_grid", "de_params"}
        unknown = set(data) - known
        if unknown:
            raise InputError(f"unknown spec keys: {sorted(unknown)}")
        de_raw = dict(data.get("de_params", {}))
        de_known = {"population", "weight", "crossover", "generations", "seed"}
        de_unknown = set(de_raw) - de_known
        if de_unknown:
            raise InputError(f"unknown de_params keys: {sorted(de_unknown)}")
        active = data["active_degrees"]
        if not isinstance(active, int):
            active = tuple(int(d) for d in active)
        return cls(
            target_rate=float(data["target_rate"]),
            d_c=int(data["d_c"]),
            active_degrees=active,
            p_positive_constrained=bool(data.get("p_positive_constrained", False)),
            constraint_grid=int(data.get("constraint_grid", 100)),
            de_params=DEParams(**de_raw),
        )


def load_spec(path) -> OptimizationSpec:
    with open(path) as fh:
        data = json.load(fh)
    if not isinstance(data, dict):
        raise InputError(f"spec file {path} is not a JSON object")
    try:
        return OptimizationSpec.from_json_dict(data)
    except (KeyError, TypeError, ValueError) as exc:
        raise InputError(f"malformed spec file {path}: {exc}") from exc


@dataclass(frozen=True)
class PermittedRegion:
    """Grid evaluation of the necessary-condition set M in the (epsilon, lambda_L) plane."""

    eps_values: np.ndarray
    lamL_values: np.ndarray
    feasible: np.ndarray            # bool, shape (len(eps_values), len(lamL_values))
    boundary: np.ndarray            # (n_segments, 2, 2) polyline pieces
    eps_min: float | None

    @property
    def is_empty(self) -> bool:
        return self.eps_min is None


@dataclass(frozen=True)
class TrajectoryPoint:
    """A double-root point: p(x_bar) = p'(x_bar) = 0 for the induced ensemble."""

    x_bar: float
    epsilon: float
    lambda_L: float
    feasible: bool


@dataclass(frozen=True)
class OptimizationResult:
    ensemble: CheckRegularEnsemble
    report: ThresholdReport
    epsilon_opt: float
    trace: tuple[tuple[int, float], ...] | None = None
    crossing: tuple[float, float] | None = None
    seed: int | None = None


# --- shared linear pieces ---

def _p_matrix(d_c: int, L: int) -> np.ndarray:
    """Matrix C with p_dense = C @ lambda_dense (lambda indexed by degree 2..L)."""
    omega = (d_c - 1) * (np.arange(2, L + 1) - 1) - 1
    C = np.zeros((L - 1, L - 1))
    for i in range(2, L):
        C[i - 2, i - 2] = omega[i - 2]
        C[i - 2, i - 1] = -(omega[i - 1] + 1)
    C[L - 2, L - 2] = omega[L - 2]
    return C


class _FourTermFamily:
    """lambda_2, lambda_3, lambda_K, lambda_L at fixed rate and capacity gap.

    With lambda_2 pinned by epsilon and (lambda_3, lambda_K) solved from the
    simplex and rate equalities, every p coefficient is affine in
    (lambda_2, lambda_L); the class precomputes that affine basis.
    """

    def __init__(self, spec: OptimizationSpec):
        _, _, self.K, self.L = spec.active_degrees
        self.d_c = spec.d_c
        self.rate = spec.target_rate
        self.s_target = spec.edge_sum_target
        self.det34 = 1.0 / self.K - 1.0 / 3.0
        if self.det34 == 0.0:
            raise SingularSystem("degree K must differ from 3")
        C = _p_matrix(self.d_c, self.L)
        base = self._p_dense(0.0, 0.0, C)
        self.c_const = base
        self.c_l2 = self._p_dense(1.0, 0.0, C) - base
        self.c_lL = self._p_dense(0.0, 1.0, C) - base
        self.d_const = npoly.polyder(self.c_const)
        self.d_l2 = npoly.polyder(self.c_l2)
        self.d_lL = npoly.polyder(self.c_lL)

    def dependent_34(self, l2, lL):
        """(lambda_3, lambda_K) from the simplex and rate equalities; affine."""
        s1 = 1.0 - l2 - lL
        s2 = self.s_target - l2 / 2.0 - lL / self.L
        l3 = (s1 / self.K - s2) / self.det34
        lK = (s2 - s1 / 3.0) / self.det34
        return l3, lK

    def _p_dense(self, l2: float, lL: float, C: np.ndarray) -> np.ndarray:
        l3, lK = self.dependent_34(l2, lL)
        lam = np.zeros(self.L - 1)
        lam[0], lam[1], lam[self.K - 2], lam[self.L - 2] = l2, l3, lK, lL
        return C @ lam

    def epsilon_of_lambda2(self, l2):
        return 1.0 - 1.0 / (l2 * (1.0 - self.rate) * (self.d_c - 1))

    def lambda2_of_epsilon(self, eps):
        return 1.0 / ((1.0 - eps) * (1.0 - self.rate) * (self.d_c - 1))

    def p0(self, l2, lL):
        return self.c_const[0] + self.c_l2[0] * l2 + self.c_lL[0] * lL

    def in_region(self, l2, lL) -> bool:
        l3, lK = self.dependent_34(l2, lL)
        eps = self.epsilon_of_lambda2(l2) if l2 > 0 else -np.inf
        return bool(0.0 < l2 < 1.0 and 0.0 < l3 < 1.0 and 0.0 < lK < 1.0
                    and 0.0 < lL < 1.0 and self.p0(l2, lL) > 0.0 and 0.0 < eps < 1.0)

    def solve_double_root(self, x_bar: float):
        """(lambda_2, lambda_L) with p(x_bar) = p'(x_bar) = 0, or None if singular."""
        a11 = npoly.polyval(x_bar, self.c_l2)
        a12 = npoly.polyval(x_bar, self.c_lL)
        a21 = npoly.polyval(x_bar, self.d_l2)
        a22 = npoly.polyval(x_bar, self.d_lL)
        b1 = -npoly.polyval(x_bar, self.c_const)
        b2 = -npoly.polyval(x_bar, self.d_const)
        det = a11 * a22 - a12 * a21
        scale = max(abs(a11), abs(a12), abs(a21), abs(a22), 1.0)
        if abs(det) < 1e-12 * scale * scale:
            return None
        l2 = (b1 * a22 - b2 * a12) / det
        lL = (a11 * b2 - a21 * b1) / det
        return l2, lL

    def point_at(self, x_bar: float) -> TrajectoryPoint | None:
        sol = self.solve_double_root(x_bar)
        if sol is None:
            return None
        l2, lL = sol
        if not l2 > 0.0:
            return None
        resid_p = self.c_const + self.c_l2 * l2 + self.c_lL * lL
        if abs(npoly.polyval(x_bar, resid_p)) > _TRAJ_RESIDUAL_TOL:
            return None
        if abs(npoly.polyval(x_bar, npoly.polyder(resid_p))) > _TRAJ_RESIDUAL_TOL:
            return None
        return TrajectoryPoint(x_bar=float(x_bar),
                               epsilon=float(self.epsilon_of_lambda2(l2)),
                               lambda_L=float(lL),
                               feasible=self.in_region(l2, lL))

    def ensemble_at(self, l2: float, lL: float) -> CheckRegularEnsemble:
        l3, lK = self.dependent_34(l2, lL)
        return validate({2: l2, 3: l3, self.K: lK, self.L: lL}, self.d_c)


def solve_dependent_coefficients(spec: OptimizationSpec, epsilon: float,
                                 lambda_L: float):
    """(lambda_2, lambda_3, lambda_K) for a trajectory-mode spec, or None.

    lambda_2 comes from the capacity-gap formula; lambda_3 and lambda_K from
    the 2x2 linear system given by the simplex and rate equalities.  Returns
    None when any coefficient falls outside (0, 1).
    """
    if spec.mode != "trajectory":
        raise InputError("solve_dependent_coefficients needs a trajectory-mode spec")
    fam = _FourTermFamily(spec)
    if not 0.0 <= epsilon < 1.0 or not 0.0 < lambda_L < 1.0:
        return None
    l2 = fam.lambda2_of_epsilon(epsilon)
    l3, lK = fam.dependent_34(l2, lambda_L)
    if not (0.0 < l2 < 1.0 and 0.0 < l3 < 1.0 and 0.0 < lK < 1.0):
        return None
    return l2, l3, lK


def _marching_squares(eps: np.ndarray, lamL: np.ndarray, mask: np.ndarray) -> np.ndarray:
    """Boundary segments of a binary mask; vertices at cell-edge midpoints."""
    segments = []
    f = mask.astype(np.int8)
    for i in range(f.shape[0] - 1):
        for j in range(f.shape[1] - 1):
            c = f[i, j] | (f[i + 1, j] << 1) | (f[i + 1, j + 1] << 2) | (f[i, j + 1] << 3)
            if c in (0, 15):
                continue
            e_bottom = (0.5 * (eps[i] + eps[i + 1]), lamL[j])
            e_top = (0.5 * (eps[i] + eps[i + 1]), lamL[j + 1])
            e_left = (eps[i], 0.5 * (lamL[j] + lamL[j + 1]))
            e_right = (eps[i + 1], 0.5 * (lamL[j] + lamL[j + 1]))
            table = {
                1: (e_bottom, e_left), 14: (e_bottom, e_left),
                2: (e_bottom, e_right), 13: (e_bottom, e_right),
                3: (e_left, e_right), 12: (e_left, e_right),
                4: (e_top, e_right), 11: (e_top, e_right),
                6: (e_bottom, e_top), 9: (e_bottom, e_top),
                7: (e_left, e_top), 8: (e_left, e_top),
                5: None, 10: None,  # saddle: emit both diagonals
            }
            seg = table[c]
            if seg is None:
                segments.append((e_bottom, e_left))
                segments.append((e_top, e_right))
            else:
                segments.append(seg)
    return np.array(segments) if segments else np.zeros((0, 2, 2))


def permitted_region(spec: OptimizationSpec, resolution: int = 400) -> PermittedRegion:
    """Evaluate the five necessary-condition inequalities on an (epsilon, lambda_L) grid.

    An empty region is a reported outcome (eps_min = None), not an error.
    """
    if spec.mode != "trajectory":
        raise InputError("permitted_region needs a trajectory-mode spec")
    fam = _FourTermFamily(spec)
    eps = np.linspace(0.0, 1.0, resolution + 2)[1:-1]
    lamL = np.linspace(0.0, 1.0, resolution + 2)[1:-1]
    l2 = fam.lambda2_of_epsilon(eps)[:, None]
    lL = lamL[None, :]
    l3, lK = fam.dependent_34(l2, lL)
    p0 = fam.p0(l2, lL)
    mask = ((l2 > 0.0) & (l2 < 1.0) & (l3 > 0.0) & (l3 < 1.0)
            & (lK > 0.0) & (lK < 1.0) & (p0 > 0.0))
    eps_min = float(eps[mask.any(axis=1)].min()) if mask.any() else None
    boundary = _marching_squares(eps, lamL, mask)
    return PermittedRegion(eps_values=eps, lamL_values=lamL, feasible=mask,
                           boundary=boundary, eps_min=eps_min)


def trajectory(spec: OptimizationSpec, x_bar_grid: np.ndarray | None = None) -> list[TrajectoryPoint]:
    """Double-root trajectory points over a grid of tangency abscissas.

    Grid values where the 2x2 system is singular or lambda_2 comes out
    nonpositive are skipped, leaving gaps.
    """
    if spec.mode != "trajectory":
        raise InputError("trajectory needs a trajectory-mode spec")
    fam = _FourTermFamily(spec)
    if x_bar_grid is None:
        x_bar_grid = np.linspace(0.01, 0.99, 2000)
    points = []
    for xb in np.asarray(x_bar_grid, dtype=float):
        pt = fam.point_at(float(xb))
        if pt is not None:
            points.append(pt)
    return points


def _refine_crossing_edge(fam: _FourTermFamily, x_out: float, x_in: float) -> float:
    """Bisect the region-membership indicator; returns a feasible x arbitrarily close
    to the boundary (x_in must be feasible)."""
    for _ in range(60):
        mid = 0.5 * (x_out + x_in)
        pt = fam.point_at(mid)
        if pt is not None and pt.feasible:
            x_in = mid
        else:
            x_out = mid
    return x_in


def analytic_optimize(spec: OptimizationSpec, resolution: int = 400,
                      cross_check: bool = True) -> OptimizationResult:
    """Best certified p-positive four-term distribution for the spec.

    If the region minimum epsilon is already attained by a certified point,
    that is the optimum; otherwise the optimum is the minimum-epsilon
    certified point on the double-root trajectory (ties broken toward
    smaller x_bar).  The winner's closed-form threshold is cross-checked
    against the density-evolution oracle.
    """
    if spec.mode != "trajectory":
        raise InputError("analytic_optimize needs a trajectory-mode spec")
    fam = _FourTermFamily(spec)
    region = permitted_region(spec, resolution=resolution)
    points = trajectory(spec)
    feasible = [p for p in points if p.feasible]

    crossing = None
    if feasible:
        xs = [p.x_bar for p in points]
        left = min(p.x_bar for p in feasible)
        right = max(p.x_bar for p in feasible)
        before = [x for x in xs if x < left]
        after = [x for x in xs if x > right]
        x1 = _refine_crossing_edge(fam, before[-1], left) if before else left
        x2 = _refine_crossing_edge(fam, after[0], right) if after else right
        crossing = (x1, x2)

    def certified_ensemble(l2: float, lL: float):
        ens = fam.ensemble_at(l2, lL)
        cert = certify_positivity(build_p_polynomial(ens))
        return ens if cert.is_p_positive else None

    winner = None
    eps_opt = None

    # branch 1: region minimum reached by a certified point directly
    if region.eps_min is not None:
        i = int(np.argmax(region.feasible.any(axis=1)))
        l2_row = fam.lambda2_of_epsilon(region.eps_values[i])
        for j in np.where(region.feasible[i])[0]:
            ens = certified_ensemble(l2_row, float(region.lamL_values[j]))
            if ens is not None:
                winner = ens
                eps_opt = float(region.eps_values[i])
                break

    # branch 2: walk the feasible trajectory by increasing epsilon
    if winner is None:
        candidates: list[tuple[float, float, float, float]] = []
        if crossing is not None:
            for edge_x in crossing:
                pt = fam.point_at(edge_x)
                if pt is not None and pt.feasible:
                    sol = fam.solve_double_root(edge_x)
                    candidates.append((pt.epsilon, pt.x_bar, sol[0], sol[1]))
        for p in feasible:
            sol = fam.solve_double_root(p.x_bar)
            candidates.append((p.epsilon, p.x_bar, sol[0], sol[1]))
        candidates.sort(key=lambda t: (t[0], t[1]))
        for eps, _xb, l2, lL in candidates:
            ens = certified_ensemble(l2, lL)
            if ens is not None:
                winner = ens
                eps_opt = float(eps)
                break

    if winner is None:
        raise NoPPositiveSolution(
            "no certified p-positive point in the permitted region or on the trajectory")

    report = closed_form_threshold(winner)
    if cross_check:
        oracle = de_threshold(winner).delta_star
        if abs(oracle - report.delta_star) > 1e-5:
            raise NoPPositiveSolution(
                f"closed-form threshold {report.delta_star} disagrees with the "
                f"density-evolution oracle {oracle}")
    return OptimizationResult(ensemble=winner, report=report, epsilon_opt=eps_opt,
                              trace=None, crossing=crossing, seed=None)


# --- differential evolution ---

def de_optimize(spec: OptimizationSpec) -> OptimizationResult:
    """Constrained DE search over lambda_4..lambda_L at fixed rate.

    Selection follows feasibility rules: feasible beats infeasible, feasible
    candidates compare by objective, infeasible ones by total constraint
    violation.  Reproducible bit-for-bit for a fixed spec and seed.
    """
    if spec.mode != "de":
        raise InputError("de_optimize needs a DE-mode spec (integer max degree)")
    L = spec.active_degrees
    d_c = spec.d_c
    params = spec.de_params
    rng = np.random.default_rng(params.seed)

    free_degs = np.arange(4, L + 1)
    dim = len(free_degs)
    npop = params.population or 10 * dim
    inv_free = 1.0 / free_degs
    s_target = spec.edge_sum_target

    def lambda_full(free: np.ndarray) -> np.ndarray:
        a = 1.0 - free.sum(axis=1)
        b = s_target - free @ inv_free
        lam = np.empty((free.shape[0], L - 1))
        lam[:, 0] = 6.0 * b - 2.0 * a       # lambda_2
        lam[:, 1] = a - lam[:, 0]           # lambda_3
        lam[:, 2:] = free
        return lam

    xg = np.arange(spec.constraint_grid + 1) / spec.constraint_grid
    PG = np.vander(xg, L - 1, increasing=True) @ _p_matrix(d_c, L)

    xe = np.linspace(1.0 / 4001, 1.0, 4001)
    env_num = 1.0 - (1.0 - xe) ** (1.0 / (d_c - 1))
    VE = xe[:, None] ** np.arange(1, L)

    def envelope_threshold(lam: np.ndarray) -> np.ndarray:
        lv = np.maximum(lam @ VE.T, 1e-300)
        th = (env_num[None, :] / lv).min(axis=1)
        h0 = 1.0 / np.maximum(lam[:, 0] * (d_c - 1), 1e-300)
        return np.minimum(th, h0)

    def evaluate(free: np.ndarray):
        lam = lambda_full(free)
        viol = np.maximum(0.0, -lam).sum(axis=1)
        if spec.p_positive_constrained:
            viol = viol + np.maximum(0.0, -(lam @ PG.T)).sum(axis=1)
            obj = lam[:, 0]
        else:
            obj = -envelope_threshold(lam)
        return obj, viol

    free = rng.random((npop, dim))
    free *= (rng.uniform(0.05, 0.9, npop) / free.sum(axis=1))[:, None]
    obj, viol = evaluate(free)
    # bounded repair: resample members whose equality-solved coefficients go negative
    for _ in range(100):
        lam = lambda_full(free)
        bad = (lam[:, :2] < 0.0).any(axis=1)
        if not bad.any():
            break
        fresh = rng.random((int(bad.sum()), dim))
        fresh *= (rng.uniform(0.05, 0.9, int(bad.sum())) / fresh.sum(axis=1))[:, None]
        free[bad] = fresh
        obj, viol = evaluate(free)
    else:
        if not (lambda_full(free)[:, :2] >= 0.0).all(axis=1).any():
            raise NoFeasibleCandidate(
                "no candidate satisfies the rate and simplex equalities; the "
                "requested (rate, d_c, L) combination looks infeasible")

    trace = []
    idx = np.arange(npop)
    for gen in range(params.generations):
        r = np.argsort(rng.random((npop, npop)), axis=1)[:, :3]
        for col in range(3):
            clash = r[:, col] == idx
            r[clash, col] = (r[clash, col] + 1) % npop
        mutant = free[r[:, 0]] + params.weight * (free[r[:, 1]] - free[r[:, 2]])
        cross = rng.random((npop, dim)) < params.crossover
        cross[idx, rng.integers(0, dim, npop)] = True
        trial = np.clip(np.where(cross, mutant, free), 0.0, 1.0)
        tobj, tviol = evaluate(trial)
        better = (((tviol == 0.0) & (viol > 0.0))
                  | ((tviol == 0.0) & (viol == 0.0) & (tobj <= obj))
                  | ((tviol > 0.0) & (viol > 0.0) & (tviol <= viol)))
        free = np.where(better[:, None], trial, free)
        obj = np.where(better, tobj, obj)
        viol = np.where(better, tviol, viol)
        feas = viol == 0.0
        if feas.any():
            best = obj[feas].min()
            thr = 1.0 / (best * (d_c - 1)) if spec.p_positive_constrained else -best
            trace.append((gen, float(thr)))

    feas = viol == 0.0
    if not feas.any():
        raise NoFeasibleCandidate("population never reached the feasible set")

    order = np.argsort(np.where(feas, obj, np.inf), kind="stable")
    winner = None
    for k in order:
        if not feas[k]:
            break
        lam_row = lambda_full(free[k: k + 1])[0]
        ens = validate({int(d): float(c) for d, c in zip(range(2, L + 1), lam_row) if c > 0.0},
                       d_c)
        if spec.p_positive_constrained:
            cert = certify_positivity(build_p_polynomial(ens))
            if not cert.is_p_positive:
                continue  # grid feasibility was too coarse for this member
            winner = (ens, closed_form_threshold(ens, cert))
        else:
            winner = (ens, analytic_threshold(ens))
        break
    if winner is None:
        raise NoFeasibleCandidate("no feasible member survived final certification")

    ens, report = winner
    eps_opt = capacity_gap(ens, report.delta_star)
    return OptimizationResult(ensemble=ens, report=report, epsilon_opt=float(eps_opt),
                              trace=tuple(trace), crossing=None, seed=params.seed)


# --- delimited output ---

def write_region_csv(region: PermittedRegion, path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["epsilon", "lambda_L", "feasible"])
        for i, e in enumerate(region.eps_values):
            for j, l in enumerate(region.lamL_values):
                writer.writerow([f"{e:.10g}", f"{l:.10g}", int(region.feasible[i, j])])


def write_trajectory_csv(points: list[TrajectoryPoint], path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["x_bar", "epsilon", "lambda_L", "feasible"])
        for p in points:
            writer.writerow([f"{p.x_bar:.10g}", f"{p.epsilon:.10g}",
                             f"{p.lambda_L:.10g}", int(p.feasible)])


def write_trace_csv(result: OptimizationResult, path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["generation", "best_threshold"])
        for gen, thr in result.trace or ():
            writer.writerow([gen, f"{thr:.10g}"])


def write_p_curve_csv(ensemble: CheckRegularEnsemble, path, samples: int = 2001) -> None:
    p = build_p_polynomial(ensemble)
    xs = np.linspace(0.0, 1.0, samples)
    vals = p(xs)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["x", "p_of_x"])
        for x, v in zip(xs, vals):
            writer.writerow([f"{x:.10g}", f"{v:.10g}"])
