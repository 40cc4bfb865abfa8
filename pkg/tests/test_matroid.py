import itertools
import random

import pytest
from hypothesis import given, settings, strategies as st

from macrofacet import fixtures
from macrofacet.errors import InfeasibleError, LaminarityError, LimitExceededError, UnknownIdError
from macrofacet.matroid import (ROOT, OracleState, build_quota_tree, constraints_from_json,
                                is_independent, partition_matroid, tree_to_json,
                                verify_matroid_axioms, violated_nodes)

from oracles import naive_independent, powerset, random_laminar

M = ["m1", "m2", "m3", "m4", "m5"]


@pytest.fixture
def writing_tree():
    return build_quota_tree(M, fixtures.WRITING_CONSTRAINTS)


def test_writing_tree_shape(writing_tree):
    assert writing_tree.parent == {ROOT: None, "A1": "A2", "A2": ROOT}
    assert writing_tree.ancestor_chain["m1"] == ("A1", "A2", ROOT)
    assert writing_tree.ancestor_chain["m4"] == ("A2", ROOT)
    assert writing_tree.height == 3


def test_networking_as_printed_rejected():
    mset = fixtures.networking_macro_facets()
    with pytest.raises(LaminarityError) as info:
        build_quota_tree(mset.ids, fixtures.NETWORKING_CONSTRAINTS_PRINTED)
    assert set(info.value.witness) == {"A2", "A3"}
    assert info.value.overlap == {"scc:f2"}


def test_networking_repaired_is_laminar():
    mset = fixtures.networking_macro_facets()
    tree = build_quota_tree(mset.ids, fixtures.NETWORKING_CONSTRAINTS)
    assert tree.parent["A2"] == "A1" and tree.parent["A3"] == "A1"


def test_empty_constraints():
    tree = build_quota_tree(M, [])
    assert list(tree.nodes) == [ROOT]
    assert all(is_independent(tree, s) for s in powerset(M))


def test_unknown_member():
    with pytest.raises(UnknownIdError):
        build_quota_tree(M, [({"m1", "zz"}, 1)])


def test_duplicates_merge_to_min_quota():
    tree = build_quota_tree(M, [({"m1", "m2"}, 2), ({"m2", "m1"}, 1)])
    assert len(tree.constraint_nodes()) == 1
    assert tree.nodes["A1"].quota == 1


def test_merging_keeps_independent_family(rng):
    for _ in range(50):
        fam = random_laminar(rng, M)
        dup = fam + [(f"D{i}", s, rng.randint(0, 5)) for i, (_, s, _) in enumerate(fam)]
        tree = build_quota_tree(M, dup)
        merged = [(nid, s, min(q for _, t, q in dup if t == s)) for nid, s, _ in fam]
        for s in powerset(M):
            assert is_independent(tree, s) == naive_independent(merged, s)


def test_can_add_writing_examples(writing_tree):
    st_ = OracleState(writing_tree).add("m4").add("m1")
    v = st_.can_add("m2")
    assert not v.accepted and v.violated == "A1"
    assert st_.can_add("m5").accepted
    assert OracleState(writing_tree).can_add("m3").accepted


def test_can_add_does_not_mutate(writing_tree):
    s = OracleState(writing_tree).add("m4")
    before = dict(s.counters), set(s.chosen)
    s.can_add("m2")
    assert (s.counters, s.chosen) == before


def test_counters_after_adds(writing_tree):
    s = OracleState(writing_tree).add("m4").add("m1")
    assert s.counters == {ROOT: 2, "A1": 1, "A2": 2}
    assert s.counters == s.recount()


def test_add_remove_inverse(writing_tree):
    s = OracleState(writing_tree)
    initial = dict(s.counters)
    s.add("m3").remove("m3")
    assert s.counters == initial and not s.chosen


def test_add_errors(writing_tree):
    s = OracleState(writing_tree).add("m1")
    with pytest.raises(InfeasibleError):
        s.add("m1")
    with pytest.raises(InfeasibleError):
        s.add("m2")
    with pytest.raises(InfeasibleError):
        s.remove("m5")
    with pytest.raises(UnknownIdError):
        s.can_add("zz")


@pytest.mark.parametrize("s, expected", [
    ({"m4", "m1", "m5"}, True),
    ({"m4", "m1", "m5", "m3"}, False),
    (set(), True),
    ({"m1", "m2"}, False),
])
def test_is_independent_writing(writing_tree, s, expected):
    assert is_independent(writing_tree, s) is expected


def test_violated_nodes(writing_tree):
    assert violated_nodes(writing_tree, {"m4", "m1", "m5", "m3"}) == ["A2"]


def test_zero_quota_blocks_members(rng):
    tree = build_quota_tree(M, [({"m2", "m3"}, 0)])
    for order in itertools.permutations(M):
        s = OracleState(tree)
        for m in order:
            if s.can_add(m):
                s.add(m)
        assert not s.chosen & {"m2", "m3"}


def test_pre_closure_counting():
    # scc:f5 discloses f1 and f4 through its closure; only chosen ids count
    mset = fixtures.networking_macro_facets()
    tree = build_quota_tree(mset.ids, [({"scc:f1"}, 1)])
    s = OracleState(tree).add("scc:f5")
    assert s.counters["A1"] == 0
    assert s.can_add("scc:f1").accepted


def test_random_sequences_match_recount(rng):
    ids = [f"e{i}" for i in range(8)]
    for _ in range(100):
        tree = build_quota_tree(ids, random_laminar(rng, ids))
        s = OracleState(tree)
        for _ in range(100):
            if s.chosen and rng.random() < 0.4:
                s.remove(rng.choice(sorted(s.chosen)))
            else:
                m = rng.choice(ids)
                if m not in s.chosen and s.can_add(m):
                    s.add(m)
            assert s.counters == s.recount()
            assert is_independent(tree, s.chosen)


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2 ** 32 - 1))
def test_stateless_matches_definition_and_every_order(seed):
    rng = random.Random(seed)
    ids = [f"e{i}" for i in range(rng.randint(1, 6))]
    fam = random_laminar(rng, ids)
    tree = build_quota_tree(ids, fam)
    for s in powerset(ids):
        indep = is_independent(tree, s)
        assert indep == naive_independent(fam, s)
        if indep:
            for order in itertools.permutations(sorted(s)):
                st_ = OracleState(tree)
                for m in order:
                    st_.add(m)


def test_reads_bounded_by_height(rng):
    ids = [f"e{i}" for i in range(8)]
    for _ in range(50):
        tree = build_quota_tree(ids, random_laminar(rng, ids))
        s = OracleState(tree)
        for m in ids:
            before = s.reads
            s.can_add(m)
            assert s.reads - before <= tree.height


def test_partition_matroid_with_budget():
    ids = [f"m{i:02d}" for i in range(14)]
    groups = [(ids[i::4], 2) for i in range(4)]
    tree = partition_matroid(ids, groups, overall_budget=5)
    assert tree.height == 3
    assert tree.parent["G1"] == "budget" and tree.parent["budget"] == ROOT
    assert verify_matroid_axioms(build_quota_tree(ids[:8], [(ids[:4], 2), (ids[4:8], 1),
                                                            (ids[:8], 2)])).passed


def test_partition_uniform():
    tree = partition_matroid(M, [(M, 2)])
    for s in powerset(M):
        assert is_independent(tree, s) == (len(s) <= 2)


def test_partition_overlap_rejected():
    with pytest.raises(LaminarityError) as info:
        partition_matroid(M, [(["m1", "m2"], 1), (["m2", "m3"], 1)])
    assert info.value.witness == ("G1", "G2")


def test_axioms_writing(writing_tree):
    assert verify_matroid_axioms(writing_tree).passed


def test_axioms_limit():
    ids = [f"e{i}" for i in range(11)]
    with pytest.raises(LimitExceededError):
        verify_matroid_axioms(build_quota_tree(ids, []))


def test_axioms_catch_non_matroid():
    # "at most one of {a,b}" and "at most one of {b,c}" overlap: not laminar,
    # and the induced system fails augmentation ({b} vs {a,c})
    ids = ["a", "b", "c"]
    tree = build_quota_tree(ids, [])

    def bad(s):
        return len(s & {"a", "b"}) <= 1 and len(s & {"b", "c"}) <= 1

    report = verify_matroid_axioms(tree, independent=bad)
    assert not report.passed and report.axiom == "augmentation"
    assert report.witness == (frozenset({"b"}), frozenset({"a", "c"}))


def test_axioms_catch_skipped_counter(writing_tree):
    class SkipA1(OracleState):
        def add(self, m):
            super().add(m)
            if "A1" in self.tree.ancestor_chain[m]:
                self.counters["A1"] -= 1
            return self

    report = verify_matroid_axioms(writing_tree, oracle_factory=SkipA1)
    assert not report.passed and report.axiom in ("oracle_consistency", "oracle_counters")


def test_axioms_catch_downward_break():
    ids = ["a", "b"]
    report = verify_matroid_axioms(build_quota_tree(ids, []),
                                   independent=lambda s: s != frozenset({"a"}))
    assert report.axiom == "downward_closure"


def test_constraints_json_and_exclusive():
    parsed = constraints_from_json({"constraints": [{"members": ["m1", "m2", "m3"], "quota": 2}],
                                    "exclusive": [["m1", "m2"]]})
    tree = build_quota_tree(M, parsed)
    assert tree.nodes["X1"].quota == 1
    assert tree.parent["X1"] == "A1"
    assert not is_independent(tree, {"m1", "m2"})
    out = tree_to_json(tree)
    assert out["nodes"][0] == {"id": ROOT, "members": M, "quota": None, "parent": None}
