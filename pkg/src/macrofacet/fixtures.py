"""Worked examples shipped as golden fixtures.

``writing_assistant`` is five style rules with a one-tone limit nested in a
three-rule limit.  ``networking`` is a seven-facet chronicle with two
implication cycles, compiled into five macro-facets under three nested
quotas.  Gains are scripted; neither example defines a full set function.
"""

from __future__ import annotations

from .chronicle import Chronicle, Facet, compile_chronicle

# -- writing assistant --------------------------------------------------------

WRITING_LABELS = {
    "m1": "Formal Tone",
    "m2": "Casual Tone",
    "m3": "Uses Emojis",
    "m4": "Cites Academic Sources",
    "m5": "Succinct Phrasing",
}

WRITING_CONSTRAINTS = [
    ("A1", frozenset({"m1", "m2"}), 1),
    ("A2", frozenset({"m1", "m2", "m3", "m4", "m5"}), 3),
]

# The last row is not given in the worked example; m3 must still be the
# top candidate there for the run to end by exhausting candidates.
WRITING_TRACE = [
    {"selected": [], "gains": {"m4": 10, "m1": 8, "m2": 7, "m5": 6, "m3": 4}},
    {"selected": ["m4"], "gains": {"m1": 7, "m5": 5, "m2": 3, "m3": 1}},
    {"selected": ["m4", "m1"], "gains": {"m2": 4, "m5": 3, "m3": 0}},
    {"selected": ["m4", "m1", "m5"], "gains": {"m3": 1}},
]


def writing_assistant_chronicle() -> Chronicle:
    return Chronicle.build([Facet(k, v) for k, v in WRITING_LABELS.items()])


def writing_assistant_macro(trace=WRITING_TRACE, constraints=WRITING_CONSTRAINTS):
    """Same fixture keyed by compiled macro-facet ids (``scc:m1`` ...)."""
    rename = lambda ids: [f"scc:{i}" for i in ids]
    trace = [{"selected": rename(r["selected"]),
              "gains": {f"scc:{k}": v for k, v in r["gains"].items()}} for r in trace]
    constraints = [(nid, frozenset(rename(m)), q) for nid, m, q in constraints]
    return trace, constraints


# -- professional networking --------------------------------------------------

NETWORKING_FACETS = [
    Facet("f1", "(User, prefers, LinkedIn)"),
    Facet("f2", "(User, prefers, TwitterForProfessionalUpdates)"),
    Facet("f3", "(User, prefers, ResearchGate)"),
    Facet("f4", "(User, engages_in, ThoughtLeadershipPosts)"),
    Facet("f5", "(User, wants, DirectMessaging)"),
    Facet("f6", "(User, avoids, PublicDiscussions)"),
    Facet("f7", "(User, has_goal, ConnectWithAcademics)"),
]

NETWORKING_EDGES = [
    ("f1", "f4"), ("f4", "f1"),
    ("f3", "f7"), ("f7", "f3"),
    ("f2", "f6"),
    ("f5", "f1"),
]

# letter names used in the worked example -> compiled ids
NETWORKING_NAMES = {
    "M_A": "scc:f1",
    "M_B": "scc:f3",
    "M_C": "scc:f2",
    "M_D": "scc:f5",
    "M_E": "scc:f6",
}
_N = NETWORKING_NAMES
ALL_NETWORKING = frozenset(_N.values())

# As printed: A3 overlaps A2 in M_C without nesting, so this is rejected.
NETWORKING_CONSTRAINTS_PRINTED = [
    ("A1", ALL_NETWORKING, 3),
    ("A2", frozenset({_N["M_A"], _N["M_B"], _N["M_C"]}), 2),
    ("A3", frozenset({_N["M_C"], _N["M_D"]}), 1),
]

# Laminar repair that keeps every count in the printed feasibility checks:
# M_C moves out of the platform limit so that A3 and A2 are disjoint.
NETWORKING_CONSTRAINTS = [
    ("A1", ALL_NETWORKING, 3),
    ("A2", frozenset({_N["M_A"], _N["M_B"]}), 2),
    ("A3", frozenset({_N["M_C"], _N["M_D"]}), 1),
]

NETWORKING_TRACE = [
    {"selected": [], "gains": {_N["M_A"]: 12, _N["M_B"]: 10, _N["M_D"]: 8, _N["M_C"]: 7, _N["M_E"]: 3}},
    {"selected": [_N["M_A"]], "gains": {_N["M_B"]: 9, _N["M_D"]: 6, _N["M_C"]: 5, _N["M_E"]: 2}},
    {"selected": [_N["M_A"], _N["M_B"]], "gains": {_N["M_D"]: 7, _N["M_C"]: 4, _N["M_E"]: 1}},
    {"selected": [_N["M_A"], _N["M_B"], _N["M_D"]], "gains": {_N["M_C"]: 2, _N["M_E"]: 0}},
]


def networking_chronicle() -> Chronicle:
    return Chronicle.build(NETWORKING_FACETS, NETWORKING_EDGES)


def networking_macro_facets():
    return compile_chronicle(networking_chronicle())


# -- JSON forms ---------------------------------------------------------------

def constraints_json(constraints) -> dict:
    return {"constraints": [{"id": nid, "members": sorted(m), "quota": q}
                            for nid, m, q in constraints]}


def fixture_files() -> dict[str, dict]:
    """Every shipped fixture file, keyed by relative path."""
    from .chronicle import chronicle_to_json

    w_trace, w_constraints = writing_assistant_macro()
    return {
        "writing_assistant/chronicle.json": chronicle_to_json(writing_assistant_chronicle()),
        "writing_assistant/constraints.json": constraints_json(w_constraints),
        "writing_assistant/utility.json": {"kind": "scripted", "trace": w_trace},
        "networking/chronicle.json": chronicle_to_json(networking_chronicle()),
        "networking/constraints.json": constraints_json(NETWORKING_CONSTRAINTS),
        "networking/constraints_as_printed.json": constraints_json(NETWORKING_CONSTRAINTS_PRINTED),
        "networking/utility.json": {"kind": "scripted", "trace": NETWORKING_TRACE},
        "networking/utility_modular.json": {
            "kind": "modular", "weights": {f.id: 1.0 for f in NETWORKING_FACETS}},
    }
