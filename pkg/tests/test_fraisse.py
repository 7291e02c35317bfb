"""Engine checks on classical classes: JEP, disjoint AP, the generic
builder, richness, the bounded game, separability."""

import pytest

from amalgam.backends import (
    GRAPH_VOCAB,
    chain_structure,
    graph_class,
    linear_order_class,
    structure_diagram,
    structure_partial_iso,
    structure_position_valid,
    structure_satisfies,
    structure_tuples,
)
from amalgam.errors import AmalgamationFailed
from amalgam.fraisse import (
    UNKNOWN,
    AmalgamationClass,
    back_and_forth_check,
    build_generic,
    check_disjoint_ap,
    check_jep,
    richness_defect,
    separability_witness,
)
from amalgam.structures import (
    Embedding,
    FiniteStructure,
    Vocabulary,
    enumerate_embeddings,
)


def test_linear_orders_have_jep():
    ok, witnesses = check_jep(linear_order_class(), 3)
    assert ok and witnesses


def test_singleton_class_of_empty_structure_has_jep():
    cls = linear_order_class()
    ok, _ = check_jep(cls, 0)
    assert ok


def test_jep_counterexample_with_incompatible_constants():
    vocab = Vocabulary.make(relations={"P": 1, "Q": 1}, constants=["c"])
    M1 = FiniteStructure(vocab, (0,), {"P": {(0,)}, "Q": set()}, {}, {"c": 0})
    M2 = FiniteStructure(vocab, (0,), {"P": set(), "Q": {(0,)}}, {}, {"c": 0})

    def no_amalgam(*args):
        raise AmalgamationFailed("no member satisfies both demands")

    cls = AmalgamationClass(
        name="incompatible-constants",
        seed_model=lambda: M1,
        members=lambda bound: [M1, M2],
        size_of=lambda M: M.size,
        task_pairs=lambda bound: [],
        embeddings=lambda A, M: enumerate_embeddings(A, M),
        embedding_key=lambda e: e.key(),
        touches=lambda e, fresh: True,
        extend=lambda A, B, inc, f, M: None,
        amalgamate=no_amalgam,
        new_ids=lambda old, new: set(),
    )
    ok, counterexample = check_jep(cls, 1)
    assert not ok
    assert counterexample in ((M1, M2), (M2, M1))


def test_linear_orders_disjoint_ap():
    ok, checked = check_disjoint_ap(linear_order_class(), 3)
    assert ok and checked > 0


def test_disjoint_ap_counterexample_on_truncated_class():
    # only the empty order and singletons exist: the two-point extension
    # required by amalgamating two singletons over the empty order is
    # missing, so the hook must fail
    base = linear_order_class()

    def members(bound):
        return [chain_structure(0), chain_structure(1)]

    def amalgamate(M, A, B, f, inc):
        result = base.amalgamate(M, A, B, f, inc)
        if result.size > 1:
            raise AmalgamationFailed("no member of that size")
        return result

    cls = AmalgamationClass(
        name="orders-truncated",
        seed_model=base.seed_model,
        members=members,
        size_of=base.size_of,
        task_pairs=lambda bound: [
            (A, B, inc)
            for B in members(bound) for A in members(bound)
            if A.size < B.size for inc in enumerate_embeddings(A, B)
        ],
        embeddings=base.embeddings,
        embedding_key=base.embedding_key,
        touches=base.touches,
        extend=base.extend,
        amalgamate=amalgamate,
        new_ids=base.new_ids,
    )
    ok, counterexample = check_disjoint_ap(cls, 1)
    assert not ok


def test_generic_linear_order_realizes_old_tasks():
    # finite orders always leave fresh gaps next to the newest points, so
    # richness is measured on the early elements: every task landing in an
    # early chain member is realized in the final top
    cls = linear_order_class()
    approx = build_generic(cls, steps=120, bound=3)
    assert len(approx.chain) > 1
    early = set(approx.chain[min(3, len(approx.chain) - 1)].universe)
    defects = richness_defect(approx.top, cls, 3)
    old_defects = [
        (pair, key) for (pair, key) in defects
        if {image for (_, image) in key} <= early
    ]
    assert old_defects == []
    # and every dequeued task was resolved
    resolved = [t for t in approx.tasks if t.status != "pending"]
    assert resolved and all(t.resolved_at is not None for t in resolved)


def test_zero_steps_returns_seed_chain():
    cls = linear_order_class()
    approx = build_generic(cls, steps=0, bound=2)
    assert len(approx.chain) == 1
    assert all(t.status == "pending" for t in approx.tasks)


def test_generic_is_deterministic():
    cls = linear_order_class()
    a = build_generic(cls, steps=25, bound=3, seed=5)
    b = build_generic(cls, steps=25, bound=3, seed=5)
    assert [t.to_dict() for t in a.tasks] == [t.to_dict() for t in b.tasks]
    assert a.top == b.top


def test_richness_defect_nonempty_for_empty_structure():
    cls = linear_order_class()
    defects = richness_defect(chain_structure(0), cls, 2)
    assert defects


def test_richness_defect_vacuous_at_bound_zero():
    cls = linear_order_class()
    assert richness_defect(chain_structure(0), cls, 0) == []


def test_back_and_forth_reflexive_and_between_generics():
    cls = linear_order_class()
    a = build_generic(cls, steps=40, bound=3, seed=1)
    b = build_generic(cls, steps=40, bound=3, seed=2)
    elements = lambda M: list(M.universe)
    assert back_and_forth_check(a.top, a.top, 3, elements,
                                structure_position_valid)
    assert back_and_forth_check(a.top, b.top, 3, elements,
                                structure_position_valid)


def test_back_and_forth_detects_atomic_difference():
    M = chain_structure(2)
    N = FiniteStructure(GRAPH_VOCAB, (0, 1), {"adj": set()})
    # same vocabulary needed: compare two graphs instead
    G1 = FiniteStructure(GRAPH_VOCAB, (0, 1), {"adj": {(0, 1), (1, 0)}})
    G2 = FiniteStructure(GRAPH_VOCAB, (0, 1), {"adj": set()})
    elements = lambda S: list(S.universe)
    assert not back_and_forth_check(G1, G2, 2, elements,
                                    structure_position_valid)


def test_separability_certifies_graph_edge():
    cls = graph_class()
    edge = FiniteStructure(GRAPH_VOCAB, (0, 1), {"adj": {(0, 1), (1, 0)}})
    result = separability_witness(
        cls, edge, (0, 1), 3,
        structure_diagram, structure_tuples, structure_satisfies,
        structure_partial_iso,
    )
    assert result != UNKNOWN
    assert result.size == 2


def test_separability_unknown_when_fragment_hides_distinctions():
    # the source member leaves a family function undefined (its data lives
    # beyond the truncation), so its diagram cannot forbid another member
    # from interpreting that function off the candidate tuple: the
    # candidate satisfies the diagram but is not closed, hence Unknown
    vocab = Vocabulary.make(functions={"F0": 1}, index_bound=1)
    A = FiniteStructure(vocab, (0,), {}, {"F0": {}})
    E = FiniteStructure(vocab, (0, 1), {}, {"F0": {(0,): 1}})
    cls = AmalgamationClass(
        name="truncated-family",
        seed_model=lambda: A,
        members=lambda bound: [A, E],
        size_of=lambda M: M.size,
        task_pairs=lambda bound: [],
        embeddings=lambda X, M: enumerate_embeddings(X, M),
        embedding_key=lambda e: e.key(),
        touches=lambda e, fresh: True,
        extend=lambda *args: None,
        amalgamate=lambda *args: (_ for _ in ()).throw(AmalgamationFailed("")),
        new_ids=lambda old, new: set(),
    )
    result = separability_witness(
        cls, A, (0,), 2,
        structure_diagram, structure_tuples, structure_satisfies,
        structure_partial_iso,
    )
    assert result == UNKNOWN
