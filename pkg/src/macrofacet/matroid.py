"""Laminar quota constraints over macro-facets and their independence oracle.

A family of member sets is laminar when any two sets are nested or disjoint.
With a quota per set, "every quota respected" defines a laminar matroid.  The
family is stored as a tree under a synthetic super-root of unbounded quota;
each element's ancestor chain lists the nodes containing it, leaf-most first,
so a feasibility query costs one counter read per chain node.

Quotas count chosen macro-facets only.  What a macro-facet's closure drags in
is never counted against any node.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Callable, Iterable, Mapping, Sequence

import numpy as np

from . import kernels
from .errors import (InfeasibleError, LaminarityError, LimitExceededError,
                     SchemaError, UnknownIdError)

ROOT = "root"
INF = math.inf
AXIOM_LIMIT = 10


@dataclass(frozen=True)
class QuotaNode:
    id: str
    members: frozenset[str]
    quota: float  # int, or INF for the super-root


@dataclass(frozen=True)
class QuotaTree:
    universe: tuple[str, ...]
    nodes: Mapping[str, QuotaNode]
    parent: Mapping[str, str | None]
    ancestor_chain: Mapping[str, tuple[str, ...]]

    @property
    def height(self) -> int:
        """Longest ancestor chain, super-root included."""
        return max((len(c) for c in self.ancestor_chain.values()), default=1)

    def constraint_nodes(self) -> list[QuotaNode]:
        return [n for nid, n in self.nodes.items() if nid != ROOT]

    def check_ids(self, ids: Iterable[str]) -> frozenset[str]:
        ids = frozenset(ids)
        for i in ids:
            if i not in self.ancestor_chain:
                raise UnknownIdError(i, "macro-facet")
        return ids

    def children(self, nid: str) -> list[str]:
        return [c for c, p in self.parent.items() if p == nid]


def _check_laminar(named: Sequence[tuple[str, frozenset[str]]]) -> None:
    for (ia, a), (ib, b) in itertools.combinations(named, 2):
        common = a & b
        if common and not (a <= b or b <= a):
            raise LaminarityError(ia, ib, common)


def build_quota_tree(universe: Iterable[str], constraints) -> QuotaTree:
    """Validate a laminar family and arrange it as a tree.

    ``constraints`` holds ``(members, quota)`` or ``(node_id, members, quota)``
    tuples.  Unnamed constraints get ids ``A1, A2, ...`` by position.  Sets
    that appear more than once are merged and keep the smallest quota (and the
    first id).
    """
    universe = tuple(universe)
    uset = frozenset(universe)
    if len(uset) != len(universe):
        raise SchemaError("duplicate ids in universe")

    merged: dict[frozenset[str], list] = {}
    for pos, c in enumerate(constraints, start=1):
        if len(c) == 3:
            nid, members, quota = c
        else:
            (members, quota), nid = c, f"A{pos}"
        members = frozenset(members)
        for m in members:
            if m not in uset:
                raise UnknownIdError(m, "macro-facet")
        if isinstance(quota, bool) or quota != quota or quota < 0 or (
                quota != INF and int(quota) != quota):
            raise SchemaError(f"quota for {nid!r} must be a non-negative integer, got {quota!r}")
        quota = INF if quota == INF else int(quota)
        if nid == ROOT:
            raise SchemaError(f"node id {ROOT!r} is reserved for the super-root")
        if members in merged:
            merged[members][1] = min(merged[members][1], quota)
        else:
            merged[members] = [nid, quota]

    named = [(nid, members) for members, (nid, _) in merged.items()]
    ids = [nid for nid, _ in named]
    if len(set(ids)) != len(ids):
        raise SchemaError("duplicate constraint ids")
    _check_laminar(named)

    nodes = {ROOT: QuotaNode(ROOT, uset, INF)}
    for members, (nid, quota) in merged.items():
        nodes[nid] = QuotaNode(nid, members, quota)

    # after the laminarity check, the parent is the smallest strict superset;
    # equal-size supersets cannot exist because duplicates were merged
    order = sorted((n for n in nodes.values() if n.id != ROOT),
                   key=lambda n: (len(n.members), ids.index(n.id)))
    parent: dict[str, str | None] = {ROOT: None}
    for i, node in enumerate(order):
        parent[node.id] = ROOT
        for bigger in order[i + 1:]:
            if node.members < bigger.members:
                parent[node.id] = bigger.id
                break
            if node.members == bigger.members:
                raise AssertionError("unmerged duplicate")  # pragma: no cover

    leaf_of = {}
    for node in order:  # smallest first, so the first hit is the leaf-most
        for m in node.members:
            leaf_of.setdefault(m, node.id)
    chains = {}
    for m in universe:
        chain = []
        nid = leaf_of.get(m, ROOT)
        while nid is not None:
            chain.append(nid)
            nid = parent[nid]
        chains[m] = tuple(chain)

    ordered_nodes = {ROOT: nodes[ROOT]}
    for nid in ids:
        ordered_nodes[nid] = nodes[nid]
    return QuotaTree(universe, ordered_nodes, parent, chains)


def partition_matroid(universe: Iterable[str], groups, overall_budget=None) -> QuotaTree:
    """Disjoint groups with per-group quotas, optionally under one overall budget.

    ``groups`` is a sequence of ``(members, quota)`` or ``(id, members, quota)``.
    """
    universe = tuple(universe)
    named = []
    for pos, g in enumerate(groups, start=1):
        if len(g) == 3:
            named.append(tuple(g))
        else:
            named.append((f"G{pos}", frozenset(g[0]), g[1]))
    for (ia, a, _), (ib, b, _) in itertools.combinations(named, 2):
        common = frozenset(a) & frozenset(b)
        if common:
            raise LaminarityError(ia, ib, common)
    constraints = list(named)
    if overall_budget is not None:
        constraints.append(("budget", frozenset(universe), overall_budget))
    return build_quota_tree(universe, constraints)


@dataclass(frozen=True)
class NodeCheck:
    node: str
    count: int
    quota: float

    @property
    def ok(self) -> bool:
        return self.count < self.quota


@dataclass(frozen=True)
class Verdict:
    accepted: bool
    violated: str | None
    checks: tuple[NodeCheck, ...] = ()

    def __bool__(self):
        return self.accepted


@dataclass
class OracleState:
    """Incremental counters over the quota tree.

    ``reads`` counts counter lookups made by :meth:`can_add`; one query never
    reads more than ``tree.height`` counters.
    """

    tree: QuotaTree
    counters: dict[str, int] = field(default_factory=dict)
    chosen: set[str] = field(default_factory=set)
    reads: int = 0

    def __post_init__(self):
        if not self.counters:
            self.counters = {nid: 0 for nid in self.tree.nodes}

    def can_add(self, m: str) -> Verdict:
        chain = self.tree.ancestor_chain.get(m)
        if chain is None:
            raise UnknownIdError(m, "macro-facet")
        checks = []
        violated = None
        for nid in chain:
            self.reads += 1
            check = NodeCheck(nid, self.counters[nid], self.tree.nodes[nid].quota)
            checks.append(check)
            if violated is None and not check.ok:
                violated = nid
        return Verdict(violated is None, violated, tuple(checks))

    def add(self, m: str) -> "OracleState":
        if m in self.chosen:
            raise InfeasibleError(f"{m!r} is already chosen")
        verdict = self.can_add(m)
        if not verdict.accepted:
            raise InfeasibleError(f"adding {m!r} violates quota of node {verdict.violated!r}")
        for nid in self.tree.ancestor_chain[m]:
            self.counters[nid] += 1
        self.chosen.add(m)
        return self

    def remove(self, m: str) -> "OracleState":
        if m not in self.chosen:
            raise InfeasibleError(f"{m!r} is not chosen")
        for nid in self.tree.ancestor_chain[m]:
            self.counters[nid] -= 1
        self.chosen.discard(m)
        return self

    def recount(self) -> dict[str, int]:
        """Counters recomputed from scratch; used to audit the incremental ones."""
        return {nid: len(self.chosen & node.members) for nid, node in self.tree.nodes.items()}


def can_add(state: OracleState, m: str) -> Verdict:
    return state.can_add(m)


def is_independent(tree: QuotaTree, s: Iterable[str]) -> bool:
    s = tree.check_ids(s)
    return all(len(s & node.members) <= node.quota for node in tree.nodes.values())


def violated_nodes(tree: QuotaTree, s: Iterable[str]) -> list[str]:
    s = tree.check_ids(s)
    return [nid for nid, node in tree.nodes.items() if len(s & node.members) > node.quota]


# -- exhaustive axiom verification --------------------------------------------

@dataclass(frozen=True)
class AxiomReport:
    passed: bool
    axiom: str | None = None
    witness: tuple = ()

    def as_dict(self):
        return {"passed": self.passed, "axiom": self.axiom,
                "witness": [sorted(w) if isinstance(w, frozenset) else w for w in self.witness]}


def _bits_to_set(universe, mask):
    return frozenset(u for i, u in enumerate(universe) if (mask >> i) & 1)


def _member_masks(tree: QuotaTree):
    pos = {u: i for i, u in enumerate(tree.universe)}
    masks, quotas = [], []
    for node in tree.constraint_nodes():
        mm = 0
        for m in node.members:
            mm |= 1 << pos[m]
        masks.append(mm)
        quotas.append(int(node.quota))
    return np.array(masks, dtype=np.int64), np.array(quotas, dtype=np.int64)


def verify_matroid_axioms(tree: QuotaTree, *, limit: int = AXIOM_LIMIT,
                          independent: Callable[[frozenset], bool] | None = None,
                          oracle_factory: Callable[[QuotaTree], OracleState] = OracleState,
                          backend: str | None = None) -> AxiomReport:
    """Exhaustively check the matroid axioms for a small quota tree.

    Checks, in order: the empty set is independent; every independent set
    minus one element is independent; augmentation for every pair of
    independent sets; and that the incremental oracle accepts exactly the
    independent sets when they are built up element by element.

    ``independent`` replaces the stateless membership test and
    ``oracle_factory`` the incremental oracle; both exist so corrupted
    variants can be fed in to show the check catches them.
    """
    n = len(tree.universe)
    if n > limit:
        raise LimitExceededError(n, limit)
    universe = tree.universe

    if independent is None:
        member_masks, quotas = _member_masks(tree)
        table = kernels.independent_masks(member_masks, quotas, n, backend=backend)
    else:
        table = np.array([bool(independent(_bits_to_set(universe, s))) for s in range(1 << n)])

    if not table[0]:
        return AxiomReport(False, "empty", (frozenset(),))
    big, small = kernels.downward_violation(table, n, backend=backend)
    if big >= 0:
        return AxiomReport(False, "downward_closure",
                           (_bits_to_set(universe, big), _bits_to_set(universe, small)))
    a, b = kernels.augmentation_violation(table, n, backend=backend)
    if a >= 0:
        return AxiomReport(False, "augmentation",
                           (_bits_to_set(universe, a), _bits_to_set(universe, b)))

    # incremental oracle vs table: accept every independent set in index order,
    # and reject at least one step of every dependent set
    for s in range(1 << n):
        state = oracle_factory(tree)
        accepted = True
        for i in range(n):
            if (s >> i) & 1:
                if not state.can_add(universe[i]).accepted:
                    accepted = False
                    break
                state.add(universe[i])
        if accepted != bool(table[s]):
            return AxiomReport(False, "oracle_consistency", (_bits_to_set(universe, s),))
        if accepted and state.counters != state.recount():
            return AxiomReport(False, "oracle_counters", (_bits_to_set(universe, s),))
    return AxiomReport(True)


# -- JSON ---------------------------------------------------------------------

def constraints_from_json(data) -> list[tuple[str, frozenset[str], int]]:
    """Parse ``{"constraints": [...], "exclusive": [[...], ...]}``.

    Each ``exclusive`` group becomes a member set with quota 1.
    """
    if not isinstance(data, dict):
        raise SchemaError("expected an object")
    out = []
    raw = data.get("constraints", [])
    if not isinstance(raw, list):
        raise SchemaError("expected a list", "$.constraints")
    for i, c in enumerate(raw):
        path = f"$.constraints[{i}]"
        if not isinstance(c, dict):
            raise SchemaError("expected an object", path)
        members = c.get("members")
        if not isinstance(members, list) or not all(isinstance(m, str) for m in members):
            raise SchemaError("members must be a list of ids", path + ".members")
        quota = c.get("quota")
        if isinstance(quota, bool) or not isinstance(quota, int) or quota < 0:
            raise SchemaError("quota must be a non-negative integer", path + ".quota")
        nid = c.get("id", f"A{i + 1}")
        if not isinstance(nid, str) or not nid:
            raise SchemaError("id must be a non-empty string", path + ".id")
        out.append((nid, frozenset(members), quota))
    excl = data.get("exclusive", [])
    if not isinstance(excl, list):
        raise SchemaError("expected a list", "$.exclusive")
    for i, group in enumerate(excl):
        if not isinstance(group, list) or not all(isinstance(m, str) for m in group):
            raise SchemaError("exclusive group must be a list of ids", f"$.exclusive[{i}]")
        out.append((f"X{i + 1}", frozenset(group), 1))
    return out


def tree_to_json(tree: QuotaTree) -> dict:
    return {
        "universe": list(tree.universe),
        "height": tree.height,
        "nodes": [
            {
                "id": n.id,
                "members": sorted(n.members),
                "quota": None if n.quota == INF else int(n.quota),
                "parent": tree.parent[n.id],
            }
            for n in tree.nodes.values()
        ],
    }
