"""Greedy and exhaustive selection of macro-facets under a laminar quota tree."""

from __future__ import annotations

import heapq
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from . import kernels
from .chronicle import MacroFacetSet, expand, selection_cost
from .errors import InvariantError, LimitExceededError, SchemaError
from .matroid import OracleState, QuotaTree, Verdict, is_independent
from .utility import LiftedUtility, UtilityFunction, WeightedCoverage

TOL = 1e-9
BRUTE_FORCE_LIMIT = 20

NO_POSITIVE_GAIN = "no-positive-gain"
EXHAUSTED = "candidates-exhausted"


@dataclass(frozen=True)
class Iteration:
    candidate: str
    gain: float
    verdict: Verdict
    accepted: bool
    remaining: int  # candidates left after this step

    def as_dict(self):
        return {
            "candidate": self.candidate,
            "gain": self.gain,
            "accepted": self.accepted,
            "violated": self.verdict.violated,
            "checks": [
                {"node": c.node, "count": c.count,
                 "quota": None if c.quota == float("inf") else int(c.quota), "ok": c.ok}
                for c in self.verdict.checks
            ],
            "remaining": self.remaining,
        }


@dataclass
class SelectionTrace:
    iterations: list[Iteration] = field(default_factory=list)
    stop_reason: str | None = None
    evaluations: int = 0

    def as_dict(self):
        return {"iterations": [it.as_dict() for it in self.iterations],
                "stop_reason": self.stop_reason, "evaluations": self.evaluations}


@dataclass
class SelectionResult:
    chosen: list[str]
    value: float
    expansion: frozenset[str] | None = None
    cost: float | None = None
    trace: SelectionTrace | None = None
    algorithm: str = "greedy"

    def as_dict(self, with_trace=True):
        out = {
            "algorithm": self.algorithm,
            "chosen": list(self.chosen),
            "value": self.value,
            "expansion": None if self.expansion is None else sorted(self.expansion),
            "cost": self.cost,
        }
        if with_trace and self.trace is not None:
            out["trace"] = self.trace.as_dict()
        return out


def _prepare(universe, utility, tree):
    universe = tuple(universe)
    if len(set(universe)) != len(universe):
        raise SchemaError("duplicate ids in universe")
    if frozenset(universe) != frozenset(tree.universe):
        raise SchemaError("universe does not match the quota tree's universe")
    missing = frozenset(universe) - frozenset(utility.ground)
    if missing:
        raise SchemaError(f"utility is not defined on {sorted(missing)}")
    return universe


def _finish(chosen, utility, tree, mset, trace, algorithm):
    if not is_independent(tree, chosen):
        raise InvariantError(f"{algorithm} produced a dependent set {chosen}")
    if mset is None and isinstance(utility, LiftedUtility):
        mset = utility.mset
    exp = cost = None
    if mset is not None and all(c in mset for c in chosen):
        exp = expand(mset, chosen)
        cost = selection_cost(mset, chosen)
    value = utility.evaluate(frozenset(chosen))
    return SelectionResult(list(chosen), value, exp, cost, trace, algorithm)


def greedy_select(universe: Iterable[str], utility: UtilityFunction, tree: QuotaTree,
                  mset: MacroFacetSet | None = None) -> SelectionResult:
    """Classic greedy under a matroid oracle.

    Each round takes the candidate with the largest marginal gain (smallest id
    on ties) and stops once that gain is not positive.  The candidate leaves
    the pool whether or not it fits; it is kept only if the oracle accepts it.
    """
    universe = _prepare(universe, utility, tree)
    state = OracleState(tree)
    trace = SelectionTrace()
    chosen: list[str] = []
    current: frozenset[str] = frozenset()
    pool = sorted(universe)
    while pool:
        best, best_gain = None, None
        for m in pool:
            g = utility.gain(current, m)
            trace.evaluations += 1
            if best_gain is None or g > best_gain:
                best, best_gain = m, g
        if best_gain <= 0:
            trace.stop_reason = NO_POSITIVE_GAIN
            break
        pool.remove(best)
        verdict = state.can_add(best)
        if verdict.accepted:
            state.add(best)
            chosen.append(best)
            current = current | {best}
        trace.iterations.append(Iteration(best, best_gain, verdict, verdict.accepted, len(pool)))
    else:
        trace.stop_reason = EXHAUSTED
    return _finish(chosen, utility, tree, mset, trace, "greedy")


def lazy_greedy_select(universe: Iterable[str], utility: UtilityFunction, tree: QuotaTree,
                       mset: MacroFacetSet | None = None) -> SelectionResult:
    """Greedy with stale upper bounds in a priority queue.

    Valid for submodular utilities, where a gain computed against a smaller
    set bounds the current one.  Heap order is (bound descending, id
    ascending), so a freshly evaluated top entry is exactly the element the
    eager scan would pick, ties included.
    """
    universe = _prepare(universe, utility, tree)
    state = OracleState(tree)
    trace = SelectionTrace()
    chosen: list[str] = []
    current: frozenset[str] = frozenset()
    version = 0  # bumps whenever the chosen set grows

    heap = []
    for m in sorted(universe):
        g = utility.gain(current, m)
        trace.evaluations += 1
        heap.append((-g, m, version))
    heapq.heapify(heap)

    while heap:
        neg, m, seen = heapq.heappop(heap)
        if seen != version:
            g = utility.gain(current, m)
            trace.evaluations += 1
            heapq.heappush(heap, (-g, m, version))
            continue
        gain = -neg
        if gain <= 0:
            trace.stop_reason = NO_POSITIVE_GAIN
            break
        verdict = state.can_add(m)
        if verdict.accepted:
            state.add(m)
            chosen.append(m)
            current = current | {m}
            version += 1
        trace.iterations.append(Iteration(m, gain, verdict, verdict.accepted, len(heap)))
    else:
        trace.stop_reason = EXHAUSTED
    return _finish(chosen, utility, tree, mset, trace, "lazy")


def _tree_arrays(universe: Sequence[str], tree: QuotaTree):
    node_ids = list(tree.nodes)
    pos = {nid: i for i, nid in enumerate(node_ids)}
    n = len(universe)
    h = tree.height
    chains = np.full((n, h), -1, dtype=np.int64)
    for i, m in enumerate(universe):
        for t, nid in enumerate(tree.ancestor_chain[m]):
            chains[i, t] = pos[nid]
    quotas = np.array([min(tree.nodes[nid].quota, n + 1) for nid in node_ids], dtype=np.int64)
    return chains, quotas


def brute_force_optimal(universe: Iterable[str], utility: UtilityFunction, tree: QuotaTree,
                        mset: MacroFacetSet | None = None, *, limit: int = BRUTE_FORCE_LIMIT,
                        backend: str | None = None) -> SelectionResult:
    """Exact maximiser over all independent sets.

    Only independent prefixes are extended, which is complete because every
    subset of an independent set is independent.  Among near-equal values
    (within ``TOL``) the lexicographically smallest sorted id list wins.
    Weighted coverage utilities are handed to the compiled kernel.
    """
    universe = _prepare(universe, utility, tree)
    n = len(universe)
    if n > limit:
        raise LimitExceededError(n, limit)
    order = sorted(universe)
    trace = SelectionTrace()

    if isinstance(utility, WeightedCoverage):
        cover = utility.matrix[[utility._row[m] for m in order]]
        chains, quotas = _tree_arrays(order, tree)
        mask, _, visited = kernels.coverage_optimum(cover, utility.weights, chains, quotas,
                                                    tol=TOL, backend=backend)
        trace.evaluations = visited
        best = [order[i] for i in range(n) if (mask >> i) & 1]
    else:
        best, best_value = [], utility.evaluate(frozenset())
        trace.evaluations = 1
        state = OracleState(tree)
        path: list[str] = []

        def extend(start):
            nonlocal best, best_value
            for i in range(start, n):
                m = order[i]
                if not state.can_add(m).accepted:
                    continue
                state.add(m)
                path.append(m)
                v = utility.evaluate(frozenset(path))
                trace.evaluations += 1
                if v > best_value + TOL:
                    best, best_value = list(path), v
                extend(i + 1)
                path.pop()
                state.remove(m)

        extend(0)
    trace.stop_reason = EXHAUSTED
    return _finish(best, utility, tree, mset, trace, "optimal")


def approximation_ratio(greedy: SelectionResult, optimal: SelectionResult,
                        tol: float = TOL) -> float:
    """Greedy value over optimal value; 1.0 when the optimum is 0."""
    if greedy.value > optimal.value + tol:
        raise InvariantError(
            f"greedy value {greedy.value!r} exceeds optimal value {optimal.value!r}")
    if optimal.value <= 0:
        return 1.0
    return greedy.value / optimal.value
