"""Finite-length Monte Carlo validation of computed thresholds.

Tanner graphs are sampled from the configuration model (uniform socket
pairing, parallel edges permitted), each bit is erased independently, and
the peeling decoder resolves any erased variable attached to a check with
exactly one erased socket.  The residual of peeling is a stopping set and
does not depend on resolution order, so waterfall curves are reproducible
from the master seed alone.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass

import numpy as np

from .ensemble import CheckRegularEnsemble, ensemble_hash, to_node_perspective
from .errors import InfeasibleSize, InputError


@dataclass(frozen=True)
class TannerGraph:
    """Bipartite graph in socket form.

    Variable v owns sockets var_ptr[v]:var_ptr[v+1]; socket k attaches to
    check check_of_socket[k].  Every check has degree d_c.
    """

    n: int
    d_c: int
    var_degrees: np.ndarray
    check_of_socket: np.ndarray
    var_ptr: np.ndarray

    def __post_init__(self):
        edge_count = int(self.var_degrees.sum())
        assert edge_count == len(self.check_of_socket), "socket conservation violated"
        assert edge_count % self.d_c == 0, "edges must fill checks exactly"
        counts = np.bincount(self.check_of_socket, minlength=edge_count // self.d_c)
        assert (counts == self.d_c).all(), "check degrees must all equal d_c"

    @property
    def edge_count(self) -> int:
        return int(self.var_degrees.sum())

    @property
    def m(self) -> int:
        return self.edge_count // self.d_c

    @property
    def var_of_socket(self) -> np.ndarray:
        return np.repeat(np.arange(self.n), self.var_degrees)


@dataclass(frozen=True)
class SimRunResult:
    """Waterfall outcome: per-delta residual statistics."""

    n: int
    seed: int
    trials: int
    deltas: tuple[float, ...]
    mean_ber: tuple[float, ...]
    block_failure_rate: tuple[float, ...]


def _node_counts(ensemble: CheckRegularEnsemble, n: int) -> dict[int, int]:
    """Largest-remainder rounding of the node-perspective fractions to n nodes."""
    dist = to_node_perspective(ensemble)
    degrees = sorted(dist.fractions)
    quotas = np.array([dist.fractions[d] * n for d in degrees])
    counts = np.floor(quotas).astype(np.int64)
    shortfall = n - int(counts.sum())
    if shortfall > 0:
        order = np.lexsort((degrees, -(quotas - counts)))
        for k in order[:shortfall]:
            counts[k] += 1
    out = {d: int(c) for d, c in zip(degrees, counts)}
    if any(c < 1 for c in out.values()):
        raise InfeasibleSize(
            f"n={n} too small to give every active degree at least one node")
    return out


def _repair_divisibility(counts: dict[int, int], d_c: int) -> dict[int, int]:
    """Move as few nodes as possible between active degrees so that the edge
    count is a multiple of d_c."""
    edge_count = sum(d * c for d, c in counts.items())
    residue = edge_count % d_c
    if residue == 0:
        return counts
    degrees = sorted(counts)
    pairs = sorted(((i, j) for i in degrees for j in degrees if i != j),
                   key=lambda ij: (abs(ij[1] - ij[0]), ij[0], ij[1]))
    for moves in range(1, 2 * d_c + 1):
        for i, j in pairs:
            if counts[i] > moves and (moves * (j - i)) % d_c == (-residue) % d_c:
                repaired = dict(counts)
                repaired[i] -= moves
                repaired[j] += moves
                return repaired
    raise InfeasibleSize(
        f"cannot balance socket counts: edge count {edge_count} % d_c={d_c} "
        f"leaves residue {residue}")


def _sample_with_rng(ensemble: CheckRegularEnsemble, n: int,
                     rng: np.random.Generator) -> TannerGraph:
    counts = _repair_divisibility(_node_counts(ensemble, n), ensemble.d_c)
    degrees = np.array(sorted(counts), dtype=np.int64)
    reps = np.array([counts[int(d)] for d in degrees], dtype=np.int64)
    var_degrees = np.repeat(degrees, reps)
    edge_count = int(var_degrees.sum())
    perm = rng.permutation(edge_count)
    check_of_socket = perm // ensemble.d_c
    var_ptr = np.zeros(n + 1, dtype=np.int64)
    np.cumsum(var_degrees, out=var_ptr[1:])
    return TannerGraph(n=n, d_c=ensemble.d_c, var_degrees=var_degrees,
                       check_of_socket=check_of_socket, var_ptr=var_ptr)


def sample_graph(ensemble: CheckRegularEnsemble, n: int, seed: int) -> TannerGraph:
    """Sample a configuration-model graph: node counts by largest-remainder
    rounding (repaired so edges divide evenly into checks), sockets uniformly
    paired.  Identical seeds give identical graphs."""
    return _sample_with_rng(ensemble, n, np.random.default_rng(seed))


def peel(graph: TannerGraph, erased) -> np.ndarray:
    """Peeling decode; returns the residual erased mask (a stopping set).

    Processes whole frontiers at once: checks with exactly one erased socket
    reveal their remaining variable, whose other checks then shed one erased
    socket each.  Per-check sums of erased variable indices identify the
    revealed variable without scanning check adjacency.
    """
    erased = np.array(erased, dtype=bool)
    if erased.shape != (graph.n,):
        raise InputError(f"erased mask must have shape ({graph.n},)")
    var_of_socket = graph.var_of_socket
    m = graph.m
    socket_erased = erased[var_of_socket]
    deg_erased = np.bincount(graph.check_of_socket[socket_erased], minlength=m)
    sum_var = np.bincount(graph.check_of_socket[socket_erased],
                          weights=var_of_socket[socket_erased].astype(np.float64),
                          minlength=m).astype(np.int64)
    while True:
        frontier = np.nonzero(deg_erased == 1)[0]
        if frontier.size == 0:
            break
        revealed = np.unique(sum_var[frontier])
        revealed = revealed[erased[revealed]]
        if revealed.size == 0:
            break
        erased[revealed] = False
        counts = graph.var_degrees[revealed]
        starts = graph.var_ptr[revealed]
        total = int(counts.sum())
        ends = np.cumsum(counts)
        offsets = np.arange(total) - np.repeat(ends - counts, counts)
        sockets = np.repeat(starts, counts) + offsets
        checks = graph.check_of_socket[sockets]
        np.subtract.at(deg_erased, checks, 1)
        np.subtract.at(sum_var, checks, np.repeat(revealed, counts))
    # the residual must be a stopping set: no check sees exactly one erased socket
    residual_deg = np.bincount(graph.check_of_socket[erased[var_of_socket]], minlength=m)
    assert not (residual_deg == 1).any(), "peeling stopped before a stopping set"
    return erased


def waterfall(ensemble: CheckRegularEnsemble, n: int, deltas, trials: int,
              seed: int) -> SimRunResult:
    """Monte Carlo residual-erasure curve over the given channel parameters.

    Every trial draws a fresh graph (annealed ensemble average) and an
    i.i.d. erasure pattern.  Per-trial RNG streams are spawned from the
    master seed, so the result does not depend on execution order.
    """
    deltas = [float(d) for d in deltas]
    for d in deltas:
        if not 0.0 <= d <= 1.0:
            raise InputError(f"delta {d} outside [0, 1]")
    if trials < 1:
        raise InputError("trials must be positive")
    children = np.random.SeedSequence(seed).spawn(len(deltas) * trials)
    mean_ber = []
    block_rate = []
    for di, delta in enumerate(deltas):
        ber_acc = 0.0
        blocks = 0
        for t in range(trials):
            rng = np.random.default_rng(children[di * trials + t])
            graph = _sample_with_rng(ensemble, n, rng)
            erased = rng.random(n) < delta
            residual = peel(graph, erased)
            count = int(residual.sum())
            ber_acc += count / n
            blocks += 1 if count else 0
        mean_ber.append(ber_acc / trials)
        block_rate.append(blocks / trials)
    return SimRunResult(n=n, seed=seed, trials=trials, deltas=tuple(deltas),
                        mean_ber=tuple(mean_ber), block_failure_rate=tuple(block_rate))


def write_waterfall_csv(result: SimRunResult, path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["delta", "trials", "mean_ber", "block_failure_rate"])
        for delta, ber, blk in zip(result.deltas, result.mean_ber,
                                   result.block_failure_rate):
            writer.writerow([f"{delta:.10g}", result.trials, f"{ber:.10g}", f"{blk:.10g}"])


def write_waterfall_metadata(result: SimRunResult, ensemble: CheckRegularEnsemble,
                             path) -> None:
    meta = {
        "n": result.n,
        "seed": result.seed,
        "trials": result.trials,
        "deltas": list(result.deltas),
        "ensemble_sha256": ensemble_hash(ensemble),
        "graph_model": "configuration model, parallel edges permitted",
    }
    with open(path, "w") as fh:
        json.dump(meta, fh, indent=2)
        fh.write("\n")
