"""Ready-made amalgamation classes over plain finite structures: linear
orders and simple graphs.  These exercise the engine on classical ground
and serve as counterpoints to the witnessed classes."""

from __future__ import annotations

import itertools
from typing import Optional

from .errors import AmalgamationFailed
from .fraisse import AmalgamationClass, DiagramDescriptor
from .structures import (
    Embedding,
    FiniteStructure,
    Vocabulary,
    enumerate_embeddings,
    is_isomorphic,
)

ORDER_VOCAB = Vocabulary.make(relations={"lt": 2})
GRAPH_VOCAB = Vocabulary.make(relations={"adj": 2})


def chain_structure(n: int, start: int = 0) -> FiniteStructure:
    universe = tuple(range(start, start + n))
    lt = {(universe[i], universe[j]) for i in range(n) for j in range(i + 1, n)}
    return FiniteStructure(ORDER_VOCAB, universe, {"lt": lt})


def _order_rank(M: FiniteStructure) -> list[int]:
    """Universe sorted by the order relation."""
    lt = M.relations["lt"]
    return sorted(M.universe, key=lambda x: sum(1 for y in M.universe
                                                if (y, x) in lt))


def _merge_orders(M: FiniteStructure, A: FiniteStructure, B: FiniteStructure,
                  f: Embedding, inc: Embedding) -> FiniteStructure:
    """Insert the new points of B into M respecting all comparisons with
    the image of A; new points fall as low as their constraints allow,
    keeping their B-order among themselves."""
    rank = _order_rank(M)
    position = {x: i for i, x in enumerate(rank)}
    lt_b = B.relations["lt"]
    image = {inc(a): f(a) for a in A.universe}
    new_points = [b for b in _order_rank(B) if b not in image]
    next_id = max(list(M.universe) + list(B.universe), default=-1) + 1
    placed: dict[int, int] = {}
    for b in new_points:
        lower = [image[x] for x in image if (x, b) in lt_b]
        upper = [image[x] for x in image if (b, x) in lt_b]
        lo = max((position[x] for x in lower), default=-1)
        hi = min((position[x] for x in upper), default=len(rank))
        if lo >= hi:
            raise AmalgamationFailed("order constraints collapsed")
        # respect the B-order among already placed new points
        for other, other_id in placed.items():
            if (other, b) in lt_b:
                lo = max(lo, position[other_id])
            elif (b, other) in lt_b:
                hi = min(hi, position[other_id])
        if lo >= hi:
            raise AmalgamationFailed("order constraints collapsed")
        fresh = next_id
        next_id += 1
        rank.insert(lo + 1, fresh)
        position = {x: i for i, x in enumerate(rank)}
        placed[b] = fresh
    lt = {(rank[i], rank[j]) for i in range(len(rank))
          for j in range(i + 1, len(rank))}
    return FiniteStructure(ORDER_VOCAB, tuple(rank), {"lt": lt})


def _structure_pairs(members, bound):
    pairs = []
    for B in members:
        for A in members:
            if A.size >= B.size:
                continue
            for inc in enumerate_embeddings(A, B):
                pairs.append((A, B, inc))
    return pairs


def linear_order_class() -> AmalgamationClass:
    def members(bound: int):
        return [chain_structure(n) for n in range(bound + 1)]

    return AmalgamationClass(
        name="linear-orders",
        seed_model=lambda: chain_structure(0),
        members=members,
        size_of=lambda M: M.size,
        task_pairs=lambda bound: _structure_pairs(members(bound), bound),
        embeddings=lambda A, M: enumerate_embeddings(A, M),
        embedding_key=lambda e: e.key(),
        touches=lambda e, fresh: bool(set(e.mapping.values()) & fresh),
        extend=lambda A, B, inc, f, M: next(iter(enumerate_embeddings(
            B, M, fixed={inc(a): f(a) for a in A.universe}, first_only=True
        )), None),
        amalgamate=lambda M, A, B, f, inc: _merge_orders(M, A, B, f, inc),
        new_ids=lambda old, new: set(new.universe) - set(old.universe),
    )


def _all_graphs(bound: int) -> list[FiniteStructure]:
    out: list[FiniteStructure] = []
    for n in range(bound + 1):
        universe = tuple(range(n))
        possible = [(i, j) for i in range(n) for j in range(i + 1, n)]
        for picks in itertools.product((0, 1), repeat=len(possible)):
            edges = set()
            for chosen, (i, j) in zip(picks, possible):
                if chosen:
                    edges.add((i, j))
                    edges.add((j, i))
            G = FiniteStructure(GRAPH_VOCAB, universe, {"adj": edges})
            if not any(is_isomorphic(G, H) for H in out if H.size == n):
                out.append(G)
    return out


def _merge_graphs(M, A, B, f, inc):
    image = {inc(a): f(a) for a in A.universe}
    next_id = max(list(M.universe) + list(B.universe), default=-1) + 1
    mapping = dict(image)
    for b in B.universe:
        if b not in mapping:
            mapping[b] = next_id
            next_id += 1
    universe = tuple(M.universe) + tuple(
        mapping[b] for b in B.universe if b not in image
    )
    edges = set(M.relations["adj"])
    for (x, y) in B.relations["adj"]:
        edges.add((mapping[x], mapping[y]))
    return FiniteStructure(GRAPH_VOCAB, universe, {"adj": edges})


def graph_class() -> AmalgamationClass:
    return AmalgamationClass(
        name="graphs",
        seed_model=lambda: FiniteStructure(GRAPH_VOCAB, ()),
        members=_all_graphs,
        size_of=lambda M: M.size,
        task_pairs=lambda bound: _structure_pairs(_all_graphs(bound), bound),
        embeddings=lambda A, M: enumerate_embeddings(A, M),
        embedding_key=lambda e: e.key(),
        touches=lambda e, fresh: bool(set(e.mapping.values()) & fresh),
        extend=lambda A, B, inc, f, M: next(iter(enumerate_embeddings(
            B, M, fixed={inc(a): f(a) for a in A.universe}, first_only=True
        )), None),
        amalgamate=_merge_graphs,
        new_ids=lambda old, new: set(new.universe) - set(old.universe),
    )


# ---------------------------------------------------------------------------
# Structure-backend helpers for the game and separability
# ---------------------------------------------------------------------------


def structure_position_valid(M, N, pos_m, pos_n) -> bool:
    """The picked tuples generate isomorphic substructures under the
    positionwise correspondence (functions propagate the match)."""
    from .structures import generate_substructure

    mapping = dict(zip(pos_m, pos_n))
    if len(set(pos_m)) != len(pos_m) or len(set(pos_n)) != len(pos_n):
        return False
    sub_m = generate_substructure(M, set(pos_m))
    sub_n = generate_substructure(N, set(pos_n))
    if sub_m.size != sub_n.size:
        return False
    # propagate function images until the map closes
    changed = True
    while changed:
        changed = False
        for name, table in sub_m.functions.items():
            n_table = sub_n.functions[name]
            for args, value in table.items():
                if all(x in mapping for x in args):
                    target = n_table.get(tuple(mapping[x] for x in args))
                    if target is None:
                        return False
                    if value in mapping:
                        if mapping[value] != target:
                            return False
                    else:
                        if target in mapping.values():
                            return False
                        mapping[value] = target
                        changed = True
    if len(mapping) != sub_m.size:
        return False  # generated points left unmatched
    e = Embedding(sub_m, sub_n, mapping)
    return e.is_valid()


def structure_diagram(A: FiniteStructure, enumeration) -> DiagramDescriptor:
    index = {x: i for i, x in enumerate(enumeration)}
    relations = []
    for name, tuples in sorted(A.relations.items()):
        for t in sorted(tuples):
            relations.append((name, tuple(index[x] for x in t)))
    functions = []
    for name, table in sorted(A.functions.items()):
        for args, value in sorted(table.items()):
            functions.append((name, tuple(index[x] for x in args), index[value]))
    constants = [(name, index[v]) for name, v in sorted(A.constants.items())]
    return DiagramDescriptor(len(enumeration), tuple(relations),
                             tuple(functions), tuple(constants))


def structure_tuples(B: FiniteStructure, size: int):
    return itertools.permutations(B.universe, size)


def structure_satisfies(B: FiniteStructure, candidate, d: DiagramDescriptor) -> bool:
    positive = set(d.relations)
    for name, tuples in B.relations.items():
        arity = B.vocabulary.relation_arity(name)
        for idx in itertools.product(range(len(candidate)), repeat=arity):
            holds = tuple(candidate[i] for i in idx) in tuples
            if holds != ((name, idx) in positive):
                return False
    for name, idx_args, idx_value in d.functions:
        args = tuple(candidate[i] for i in idx_args)
        if B.functions[name].get(args) != candidate[idx_value]:
            return False
    for name, idx in d.constants:
        if B.constants.get(name) != candidate[idx]:
            return False
    return True


def structure_partial_iso(A, enumeration, B, candidate) -> bool:
    mapping = dict(zip(enumeration, candidate))
    if len(set(candidate)) != len(candidate):
        return False
    sub = B.restrict(set(candidate)) if B.is_closed(set(candidate)) else None
    if sub is None:
        return False
    return Embedding(A, sub, mapping).is_valid()
