"""Facet ground sets, implication graphs, and their compilation into macro-facets.

A chronicle is a set of facets plus directed implication edges ``u -> v``
("selecting u entails v").  Compilation condenses the strongly connected
components of the graph into macro-facets; each macro-facet carries the
closure of its members, so selecting it discloses every implied facet.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Iterable, Mapping

from .errors import SchemaError, UnknownIdError, ZeroCostWarning

DEFAULT_COST = 1.0


@dataclass(frozen=True)
class Facet:
    id: str
    label: str = ""
    cost: float = DEFAULT_COST


@dataclass(frozen=True)
class Chronicle:
    facets: tuple[Facet, ...]
    edges: frozenset[tuple[str, str]]
    _index: Mapping[str, int] = field(repr=False, compare=False, default=None)
    _succ: Mapping[str, tuple[str, ...]] = field(repr=False, compare=False, default=None)

    @classmethod
    def build(cls, facets: Iterable[Facet], edges: Iterable[tuple[str, str]] = ()) -> "Chronicle":
        facets = tuple(facets)
        index = {}
        for i, f in enumerate(facets):
            if not isinstance(f.id, str) or not f.id:
                raise SchemaError("facet id must be a non-empty string", f"$.facets[{i}].id")
            if f.id in index:
                raise SchemaError(f"duplicate facet id {f.id!r}", f"$.facets[{i}].id")
            if not f.cost >= 0 or math.isinf(f.cost):
                raise SchemaError(f"cost must be finite and >= 0, got {f.cost!r}",
                                  f"$.facets[{i}].cost")
            if f.cost == 0:
                warnings.warn(f"facet {f.id!r} has zero cost", ZeroCostWarning, stacklevel=2)
            index[f.id] = i

        # self-loops and duplicates never change a closure
        clean = set()
        for src, dst in edges:
            for end in (src, dst):
                if end not in index:
                    raise UnknownIdError(end)
            if src != dst:
                clean.add((src, dst))

        succ = {f.id: [] for f in facets}
        for src, dst in sorted(clean, key=lambda e: (index[e[0]], index[e[1]])):
            succ[src].append(dst)
        return cls(facets, frozenset(clean), index, {k: tuple(v) for k, v in succ.items()})

    @property
    def ids(self) -> tuple[str, ...]:
        return tuple(f.id for f in self.facets)

    def successors(self, fid: str) -> tuple[str, ...]:
        return self._succ[fid]

    def cost_of(self, fid: str) -> float:
        return self.facets[self._index[fid]].cost

    def check_ids(self, ids: Iterable[str]) -> frozenset[str]:
        ids = frozenset(ids)
        for i in ids:
            if i not in self._index:
                raise UnknownIdError(i)
        return ids

    def __len__(self):
        return len(self.facets)


def closure(chronicle: Chronicle, seed: Iterable[str]) -> frozenset[str]:
    """All facets reachable from ``seed`` (seed included)."""
    seen = set(chronicle.check_ids(seed))
    stack = list(seen)
    while stack:
        u = stack.pop()
        for v in chronicle.successors(u):
            if v not in seen:
                seen.add(v)
                stack.append(v)
    return frozenset(seen)


def is_closed(chronicle: Chronicle, s: Iterable[str]) -> bool:
    s = chronicle.check_ids(s)
    return closure(chronicle, s) == s


def macro_id(members: Iterable[str]) -> str:
    return "scc:" + min(members)


@dataclass(frozen=True)
class MacroFacet:
    id: str
    members: frozenset[str]
    closure: frozenset[str]
    cost: float


@dataclass(frozen=True)
class MacroFacetSet:
    macro_facets: tuple[MacroFacet, ...]
    condensation_edges: frozenset[tuple[str, str]]
    facet_to_macro: Mapping[str, str]
    chronicle: Chronicle = field(repr=False, compare=False, default=None)

    def __post_init__(self):
        object.__setattr__(self, "_by_id", {m.id: m for m in self.macro_facets})

    @property
    def ids(self) -> tuple[str, ...]:
        return tuple(m.id for m in self.macro_facets)

    def __getitem__(self, mid: str) -> MacroFacet:
        try:
            return self._by_id[mid]
        except KeyError:
            raise UnknownIdError(mid, "macro-facet") from None

    def __contains__(self, mid) -> bool:
        return mid in self._by_id

    def __len__(self):
        return len(self.macro_facets)

    def check_ids(self, ids: Iterable[str]) -> frozenset[str]:
        ids = frozenset(ids)
        for i in ids:
            if i not in self._by_id:
                raise UnknownIdError(i, "macro-facet")
        return ids

    def facet_ids(self) -> frozenset[str]:
        return frozenset(self.facet_to_macro)


def strongly_connected_components(chronicle: Chronicle) -> list[list[str]]:
    """Iterative Tarjan.  Components come out in reverse topological order (sinks first)."""
    index: dict[str, int] = {}
    low: dict[str, int] = {}
    on_stack: set[str] = set()
    stack: list[str] = []
    comps: list[list[str]] = []
    counter = 0

    for root in chronicle.ids:
        if root in index:
            continue
        work = [(root, 0)]
        index[root] = low[root] = counter
        counter += 1
        stack.append(root)
        on_stack.add(root)
        while work:
            v, i = work[-1]
            succ = chronicle.successors(v)
            if i < len(succ):
                work[-1] = (v, i + 1)
                w = succ[i]
                if w not in index:
                    index[w] = low[w] = counter
                    counter += 1
                    stack.append(w)
                    on_stack.add(w)
                    work.append((w, 0))
                elif w in on_stack:
                    low[v] = min(low[v], index[w])
                continue
            work.pop()
            if work:
                parent = work[-1][0]
                low[parent] = min(low[parent], low[v])
            if low[v] == index[v]:
                comp = []
                while True:
                    w = stack.pop()
                    on_stack.discard(w)
                    comp.append(w)
                    if w == v:
                        break
                comps.append(comp)
    return comps


def compile_chronicle(chronicle: Chronicle) -> MacroFacetSet:
    """Condense SCCs into macro-facets with closures and disclosure costs."""
    comps = strongly_connected_components(chronicle)
    owner = {}
    for comp in comps:
        mid = macro_id(comp)
        for f in comp:
            owner[f] = mid

    cedges = set()
    for src, dst in chronicle.edges:
        a, b = owner[src], owner[dst]
        if a != b:
            cedges.add((a, b))
    children: dict[str, set[str]] = {}
    for a, b in cedges:
        children.setdefault(a, set()).add(b)

    # sinks first, so every child closure is ready before its parents
    closures: dict[str, frozenset[str]] = {}
    for comp in comps:
        mid = owner[comp[0]]
        acc = set(comp)
        for child in children.get(mid, ()):
            acc |= closures[child]
        closures[mid] = frozenset(acc)

    macros = []
    for comp in comps:
        mid = owner[comp[0]]
        cl = closures[mid]
        cost = math.fsum(chronicle.cost_of(f) for f in sorted(cl))
        macros.append(MacroFacet(mid, frozenset(comp), cl, cost))
    macros.sort(key=lambda m: m.id)
    return MacroFacetSet(tuple(macros), frozenset(cedges), dict(sorted(owner.items())), chronicle)


def expand(mset: MacroFacetSet, selection: Iterable[str]) -> frozenset[str]:
    out: set[str] = set()
    for mid in mset.check_ids(selection):
        out |= mset[mid].closure
    return frozenset(out)


def selection_cost(mset: MacroFacetSet, selection: Iterable[str]) -> float:
    """Modular disclosure cost: overlapping closures are counted once per macro-facet."""
    sel = sorted(mset.check_ids(selection))
    return math.fsum(mset[m].cost for m in sel)


# -- JSON ---------------------------------------------------------------------

def chronicle_from_json(data) -> Chronicle:
    if not isinstance(data, dict):
        raise SchemaError("expected an object")
    facets_raw = data.get("facets", [])
    if not isinstance(facets_raw, list):
        raise SchemaError("expected a list", "$.facets")
    facets = []
    for i, raw in enumerate(facets_raw):
        path = f"$.facets[{i}]"
        if not isinstance(raw, dict):
            raise SchemaError("expected an object", path)
        fid = raw.get("id")
        if not isinstance(fid, str) or not fid:
            raise SchemaError("id must be a non-empty string", path + ".id")
        label = raw.get("label", "")
        if not isinstance(label, str):
            raise SchemaError("label must be a string", path + ".label")
        cost = raw.get("cost", DEFAULT_COST)
        if isinstance(cost, bool) or not isinstance(cost, (int, float)):
            raise SchemaError("cost must be a number", path + ".cost")
        facets.append(Facet(fid, label, float(cost)))
    edges_raw = data.get("edges", [])
    if not isinstance(edges_raw, list):
        raise SchemaError("expected a list", "$.edges")
    edges = []
    for i, e in enumerate(edges_raw):
        if (not isinstance(e, (list, tuple)) or len(e) != 2
                or not all(isinstance(x, str) for x in e)):
            raise SchemaError("edge must be a [source, target] pair of ids", f"$.edges[{i}]")
        edges.append((e[0], e[1]))
    return Chronicle.build(facets, edges)


def chronicle_to_json(chronicle: Chronicle) -> dict:
    order = chronicle._index
    return {
        "facets": [{"id": f.id, "label": f.label, "cost": f.cost} for f in chronicle.facets],
        "edges": [list(e) for e in sorted(chronicle.edges, key=lambda e: (order[e[0]], order[e[1]]))],
    }


def mset_to_json(mset: MacroFacetSet) -> dict:
    out = {
        "macro_facets": [
            {
                "id": m.id,
                "members": sorted(m.members),
                "closure": sorted(m.closure),
                "cost": m.cost,
            }
            for m in mset.macro_facets
        ],
        "condensation_edges": [list(e) for e in sorted(mset.condensation_edges)],
        "facet_to_macro": dict(sorted(mset.facet_to_macro.items())),
    }
    if mset.chronicle is not None:
        out["chronicle"] = chronicle_to_json(mset.chronicle)
    return out


def mset_from_json(data) -> MacroFacetSet:
    """Load a compiled file.  When the source chronicle is embedded it is recompiled
    and checked against the stored macro-facets."""
    if not isinstance(data, dict) or "macro_facets" not in data:
        raise SchemaError("expected an object with 'macro_facets'")
    if "chronicle" in data:
        mset = compile_chronicle(chronicle_from_json(data["chronicle"]))
        if mset_to_json(mset)["macro_facets"] != data["macro_facets"]:
            raise SchemaError("stored macro-facets disagree with the embedded chronicle",
                              "$.macro_facets")
        return mset
    macros = []
    for i, raw in enumerate(data["macro_facets"]):
        try:
            macros.append(MacroFacet(raw["id"], frozenset(raw["members"]),
                                     frozenset(raw["closure"]), float(raw["cost"])))
        except (KeyError, TypeError) as exc:
            raise SchemaError(f"malformed macro-facet ({exc})", f"$.macro_facets[{i}]") from None
    owner = {f: m.id for m in macros for f in m.members}
    edges = frozenset(tuple(e) for e in data.get("condensation_edges", []))
    return MacroFacetSet(tuple(sorted(macros, key=lambda m: m.id)), edges, dict(sorted(owner.items())))
