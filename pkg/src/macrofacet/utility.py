"""Set-function utilities and brute-force checks of monotonicity and submodularity.

Every utility maps a subset of its ``ground`` to a non-negative real and
returns 0 on the empty set.  ``gain(s, x)`` is the marginal value of adding
``x`` to ``s``; subclasses override it when they can compute it more cheaply
or more exactly than the difference of two evaluations.
"""

from __future__ import annotations

import itertools
import math
import random
import threading
from dataclasses import dataclass
from typing import Callable, Iterable, Mapping

import numpy as np

from .chronicle import MacroFacetSet, expand
from .errors import LimitExceededError, SchemaError, UnknownIdError

TOL = 1e-9
EXHAUSTIVE_LIMIT = 6
SAMPLED_TRIPLES = 10_000


class UtilityFunction:
    ground: tuple[str, ...] = ()

    def evaluate(self, s: Iterable[str]) -> float:
        raise NotImplementedError

    def gain(self, s: frozenset[str], x: str) -> float:
        return self.evaluate(s | {x}) - self.evaluate(s)

    def check_ids(self, ids: Iterable[str]) -> frozenset[str]:
        ids = frozenset(ids)
        known = self._ground_set()
        for i in ids:
            if i not in known:
                raise UnknownIdError(i, "ground element")
        return ids

    def _ground_set(self):
        gs = self.__dict__.get("_gset")
        if gs is None:
            gs = frozenset(self.ground)
            self.__dict__["_gset"] = gs
        return gs


def marginal_gain(u: UtilityFunction, s: Iterable[str], x) -> float:
    """``u(s | x) - u(s)``; ``x`` may be a single id or an iterable of ids."""
    s = u.check_ids(s)
    xs = u.check_ids([x] if isinstance(x, str) else x)
    return u.evaluate(s | xs) - u.evaluate(s)


class ModularUtility(UtilityFunction):
    """Sum of per-element non-negative weights."""

    def __init__(self, weights: Mapping[str, float]):
        for k, w in weights.items():
            if not w >= 0:
                raise SchemaError(f"weight for {k!r} must be >= 0", f"$.weights.{k}")
        self.weights = dict(weights)
        self.ground = tuple(weights)

    def evaluate(self, s):
        return math.fsum(self.weights[e] for e in sorted(s))

    def gain(self, s, x):
        return 0.0 if x in s else self.weights[x]


class WeightedCoverage(UtilityFunction):
    """Total weight of universe elements covered by the chosen sets.

    Sums use ``math.fsum`` so values are correctly rounded: the marginal gain
    of an element is then exactly non-increasing as the base set grows, which
    keeps lazy and eager greedy in lock-step even on near-ties.
    """

    def __init__(self, weights, covers: Mapping[str, Iterable[int]]):
        self.weights = np.asarray(weights, dtype=np.float64)
        if self.weights.ndim != 1 or self.weights.size == 0:
            raise SchemaError("weights must be a non-empty list", "$.weights")
        if not np.all(self.weights > 0):
            raise SchemaError("weights must be positive", "$.weights")
        self.universe_size = self.weights.size
        self.ground = tuple(covers)
        self.matrix = np.zeros((len(self.ground), self.universe_size), dtype=bool)
        self._row = {}
        for i, (mid, idx) in enumerate(covers.items()):
            idx = list(idx)
            for j in idx:
                if not (isinstance(j, (int, np.integer)) and 0 <= j < self.universe_size):
                    raise SchemaError(f"cover index {j!r} out of range", f"$.covers.{mid}")
            self.matrix[i, idx] = True
            self._row[mid] = i
        self._wlist = self.weights.tolist()

    @property
    def covers(self) -> dict[str, frozenset[int]]:
        return {m: frozenset(np.nonzero(self.matrix[i])[0].tolist()) for m, i in self._row.items()}

    def covered(self, s) -> np.ndarray:
        rows = [self._row[m] for m in s]
        if not rows:
            return np.zeros(self.universe_size, dtype=bool)
        return self.matrix[rows].any(axis=0)

    def evaluate(self, s):
        cov = self.covered(s)
        return math.fsum(self._wlist[j] for j in np.nonzero(cov)[0])

    def gain(self, s, x):
        if x in s:
            return 0.0
        fresh = self.matrix[self._row[x]] & ~self.covered(s)
        return math.fsum(self._wlist[j] for j in np.nonzero(fresh)[0])


class CardinalityPower(UtilityFunction):
    """``|S| ** exponent``; supermodular for exponent > 1.  A negative control."""

    def __init__(self, ground: Iterable[str], exponent: float = 2.0):
        self.ground = tuple(ground)
        self.exponent = exponent

    def evaluate(self, s):
        return float(len(frozenset(s))) ** self.exponent


class FunctionUtility(UtilityFunction):
    def __init__(self, ground: Iterable[str], func: Callable[[frozenset], float]):
        self.ground = tuple(ground)
        self.func = func

    def evaluate(self, s):
        return float(self.func(frozenset(s)))


class LiftedUtility(UtilityFunction):
    """A facet-level utility viewed through macro-facet expansion."""

    def __init__(self, base: UtilityFunction, mset: MacroFacetSet):
        missing = mset.facet_ids() - frozenset(base.ground)
        if missing:
            raise SchemaError(f"base utility is not defined on facets {sorted(missing)}")
        self.base = base
        self.mset = mset
        self.ground = mset.ids
        self._memo: dict[tuple[str, ...], frozenset[str]] = {}
        self._lock = threading.Lock()

    def expansion(self, s) -> frozenset[str]:
        key = tuple(sorted(s))
        hit = self._memo.get(key)
        if hit is None:
            hit = expand(self.mset, key)
            with self._lock:
                self._memo[key] = hit
        return hit

    def evaluate(self, s):
        return self.base.evaluate(self.expansion(s))


def lift(base: UtilityFunction, mset: MacroFacetSet) -> LiftedUtility:
    return LiftedUtility(base, mset)


class ScriptedQueryError(KeyError):
    pass


class ScriptedUtility(UtilityFunction):
    """Replays a recorded table of marginal gains.

    ``trace`` is a list of ``{"selected": [...], "gains": {id: gain}}`` rows:
    the gain of each candidate given exactly the ``selected`` set.  Values of
    sets are known only along scripted accept paths.  In strict mode any
    other query raises; with ``tolerant=True`` a gain query falls back to the
    row for the largest recorded prefix of the query set that scripts the
    candidate.
    """

    def __init__(self, trace, ground: Iterable[str] | None = None, tolerant: bool = False):
        self.rows: dict[frozenset[str], dict[str, float]] = {}
        order = []
        for i, row in enumerate(trace):
            key = frozenset(row["selected"])
            if key in self.rows:
                raise SchemaError("selected set scripted twice", f"$.trace[{i}]")
            self.rows[key] = {k: float(v) for k, v in row["gains"].items()}
            order.append(key)
        if ground is None:
            seen = {}
            for key in order:
                for k in sorted(key):
                    seen.setdefault(k, None)
                for k in self.rows[key]:
                    seen.setdefault(k, None)
            ground = tuple(seen)
        self.ground = tuple(ground)
        self.tolerant = tolerant
        self.values: dict[frozenset[str], float] = {frozenset(): 0.0}
        for key in sorted(order, key=len):
            if key not in self.values:
                continue
            for cand, g in self.rows[key].items():
                self.values.setdefault(key | {cand}, self.values[key] + g)

    def gain(self, s, x):
        s = frozenset(s)
        row = self.rows.get(s)
        if row is not None and x in row:
            return row[x]
        if self.tolerant:
            best = None
            for key, r in self.rows.items():
                if x in r and key <= s and (best is None or len(key) > len(best)):
                    best = key
            if best is not None:
                return self.rows[best][x]
        raise ScriptedQueryError(f"no scripted gain for {x!r} given {sorted(s)}")

    def evaluate(self, s):
        s = frozenset(s)
        try:
            return self.values[s]
        except KeyError:
            raise ScriptedQueryError(f"no scripted value for {sorted(s)}") from None


# -- verification -------------------------------------------------------------

@dataclass(frozen=True)
class SubmodularityReport:
    passed: bool
    property: str | None = None
    witness: tuple = ()
    checked: int = 0

    def as_dict(self):
        w = [sorted(x) if isinstance(x, frozenset) else x for x in self.witness]
        return {"passed": self.passed, "property": self.property, "witness": w,
                "checked": self.checked}


def _powerset(items):
    return itertools.chain.from_iterable(
        itertools.combinations(items, r) for r in range(len(items) + 1))


def verify_monotone_submodular(u: UtilityFunction, *, limit: int = EXHAUSTIVE_LIMIT,
                               sample: bool = False, n_samples: int = SAMPLED_TRIPLES,
                               seed: int = 0, tol: float = TOL) -> SubmodularityReport:
    """Check normalisation, monotonicity and diminishing returns.

    Up to ``limit`` ground elements every triple ``A <= B``, ``e not in B`` is
    scanned.  Above it the check needs ``sample=True`` and draws ``n_samples``
    random triples instead.
    """
    ground = tuple(u.ground)
    n = len(ground)
    if u.evaluate(frozenset()) != 0:
        return SubmodularityReport(False, "normalized", (frozenset(),))

    if n <= limit:
        values = {frozenset(c): u.evaluate(frozenset(c)) for c in _powerset(ground)}
        checked = 0
        for b_tuple in _powerset(ground):
            b = frozenset(b_tuple)
            rest = [e for e in ground if e not in b]
            for e in rest:
                db = values[b | {e}] - values[b]
                if db < -tol:
                    return SubmodularityReport(False, "monotone", (b, e), checked)
                for a_tuple in _powerset(sorted(b, key=ground.index)):
                    a = frozenset(a_tuple)
                    checked += 1
                    if values[a | {e}] - values[a] < db - tol:
                        return SubmodularityReport(False, "submodular", (a, b, e), checked)
        return SubmodularityReport(True, checked=checked)

    if not sample:
        raise LimitExceededError(n, limit)
    rng = random.Random(seed)
    for i in range(n_samples):
        e = rng.choice(ground)
        others = [g for g in ground if g != e]
        b = frozenset(g for g in others if rng.random() < 0.5)
        a = frozenset(g for g in b if rng.random() < 0.5)
        ua, ub = u.evaluate(a), u.evaluate(b)
        da = u.evaluate(a | {e}) - ua
        db = u.evaluate(b | {e}) - ub
        if db < -tol or ub < ua - tol:
            return SubmodularityReport(False, "monotone", (a, b, e), i + 1)
        if da < db - tol:
            return SubmodularityReport(False, "submodular", (a, b, e), i + 1)
    return SubmodularityReport(True, checked=n_samples)


# -- JSON ---------------------------------------------------------------------

def utility_from_json(data, mset: MacroFacetSet | None = None) -> UtilityFunction:
    """Build a utility over macro-facets from its JSON description.

    Modular weights and coverage sets keyed by facet ids are lifted through
    ``mset``; coverage sets keyed by macro-facet ids are used directly.
    """
    if not isinstance(data, dict) or "kind" not in data:
        raise SchemaError("expected an object with 'kind'")
    kind = data["kind"]
    if kind == "modular":
        weights = data.get("weights")
        if not isinstance(weights, dict):
            raise SchemaError("weights must be an object", "$.weights")
        base = ModularUtility({k: float(v) for k, v in weights.items()})
        return _over_macros(base, mset)
    if kind == "coverage":
        weights = data.get("weights")
        covers = data.get("covers")
        if not isinstance(weights, list):
            raise SchemaError("weights must be a list", "$.weights")
        if not isinstance(covers, dict):
            raise SchemaError("covers must be an object", "$.covers")
        size = data.get("universe", len(weights))
        if size != len(weights):
            raise SchemaError(f"universe is {size} but {len(weights)} weights given", "$.universe")
        base = WeightedCoverage(weights, covers)
        return _over_macros(base, mset)
    if kind == "scripted":
        trace = data.get("trace")
        if not isinstance(trace, list):
            raise SchemaError("trace must be a list", "$.trace")
        ground = mset.ids if mset is not None else data.get("ground")
        return ScriptedUtility(trace, ground=ground, tolerant=bool(data.get("tolerant", False)))
    if kind == "cardinality":
        ground = mset.ids if mset is not None else data.get("ground", [])
        return CardinalityPower(ground, float(data.get("exponent", 2.0)))
    raise SchemaError(f"unknown utility kind {kind!r}", "$.kind")


def _over_macros(base: UtilityFunction, mset: MacroFacetSet | None) -> UtilityFunction:
    if mset is None:
        return base
    keys = frozenset(base.ground)
    if keys and keys <= frozenset(mset.ids) and not keys & mset.facet_ids():
        if keys != frozenset(mset.ids):
            base = _pad(base, mset.ids)
        return base
    return LiftedUtility(_pad(base, sorted(mset.facet_ids())), mset)


def _pad(base: UtilityFunction, ids) -> UtilityFunction:
    """Give ids the base utility never mentions a zero contribution."""
    missing = [i for i in ids if i not in frozenset(base.ground)]
    if not missing:
        return base
    if isinstance(base, ModularUtility):
        return ModularUtility({**base.weights, **{m: 0.0 for m in missing}})
    if isinstance(base, WeightedCoverage):
        covers = base.covers
        covers.update({m: () for m in missing})
        return WeightedCoverage(base.weights, covers)
    raise SchemaError(f"utility does not cover ids {missing}")
