"""Finite relational/functional structures and embedding search.

Structures carry an ordered universe of small integer ids so every
enumeration in the package is deterministic and reproducible.  Function
symbols may be partial; a substructure is a subset closed under every
defined function application, and closure is computed by fixpoint
iteration under an element cap.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Mapping, Optional

from .errors import ClosureDiverges, InvalidEmbedding, VocabularyMismatch

CLOSURE_CAP = 512


@dataclass(frozen=True)
class Vocabulary:
    """Symbol table: relation and function symbols with arities, constants,
    and an optional index bound for truncated indexed families (R_n, F_n,
    f_n for n below the bound)."""

    relations: tuple[tuple[str, int], ...] = ()
    functions: tuple[tuple[str, int], ...] = ()
    constants: tuple[str, ...] = ()
    index_bound: Optional[int] = None

    def __post_init__(self):
        names = [n for n, _ in self.relations] + [n for n, _ in self.functions] \
            + list(self.constants)
        if len(names) != len(set(names)):
            raise ValueError("symbol names must be unique across kinds")
        for name, arity in self.relations + self.functions:
            if arity < 0:
                raise ValueError(f"negative arity for {name}")
        if self.index_bound is not None and self.index_bound < 1:
            raise ValueError("index bound must be >= 1 when declared")

    @staticmethod
    def make(relations: Mapping[str, int] | None = None,
             functions: Mapping[str, int] | None = None,
             constants: Iterable[str] = (),
             index_bound: Optional[int] = None) -> "Vocabulary":
        return Vocabulary(
            tuple(sorted((relations or {}).items())),
            tuple(sorted((functions or {}).items())),
            tuple(constants),
            index_bound,
        )

    def relation_arity(self, name: str) -> int:
        for n, a in self.relations:
            if n == name:
                return a
        raise KeyError(name)

    def function_arity(self, name: str) -> int:
        for n, a in self.functions:
            if n == name:
                return a
        raise KeyError(name)


def indexed_names(prefix: str, bound: int) -> list[str]:
    """Names of a truncated indexed symbol family: prefix0 .. prefix(bound-1)."""
    return [f"{prefix}{i}" for i in range(bound)]


@dataclass
class FiniteStructure:
    """A finite structure over a vocabulary.

    relations: symbol -> set of tuples; functions: symbol -> partial map
    from argument tuples to values; constants: symbol -> element.
    """

    vocabulary: Vocabulary
    universe: tuple[int, ...]
    relations: dict[str, set[tuple[int, ...]]] = field(default_factory=dict)
    functions: dict[str, dict[tuple[int, ...], int]] = field(default_factory=dict)
    constants: dict[str, int] = field(default_factory=dict)

    def __post_init__(self):
        self.universe = tuple(self.universe)
        for name, _ in self.vocabulary.relations:
            self.relations.setdefault(name, set())
        for name, _ in self.vocabulary.functions:
            self.functions.setdefault(name, {})
        self.validate()

    def validate(self):
        elems = set(self.universe)
        if len(elems) != len(self.universe):
            raise ValueError("universe ids must be distinct")
        for name, tuples in self.relations.items():
            arity = self.vocabulary.relation_arity(name)
            for t in tuples:
                if len(t) != arity or not set(t) <= elems:
                    raise ValueError(f"bad tuple {t} for relation {name}")
        for name, table in self.functions.items():
            arity = self.vocabulary.function_arity(name)
            for args, value in table.items():
                if len(args) != arity or not set(args) <= elems or value not in elems:
                    raise ValueError(f"bad entry {args}->{value} for function {name}")
        for name in self.constants:
            if name not in self.vocabulary.constants:
                raise ValueError(f"undeclared constant {name}")
            if self.constants[name] not in elems:
                raise ValueError(f"constant {name} outside universe")

    def canonical_key(self):
        return (
            self.universe,
            tuple((n, tuple(sorted(ts))) for n, ts in sorted(self.relations.items())),
            tuple((n, tuple(sorted(tb.items()))) for n, tb in sorted(self.functions.items())),
            tuple(sorted(self.constants.items())),
        )

    def __eq__(self, other):
        return isinstance(other, FiniteStructure) and \
            self.vocabulary == other.vocabulary and \
            self.canonical_key() == other.canonical_key()

    def __hash__(self):
        return hash((self.vocabulary, self.canonical_key()))

    @property
    def size(self) -> int:
        return len(self.universe)

    def restrict(self, subset: Iterable[int]) -> "FiniteStructure":
        """Induced structure on a subset (not checked for closure)."""
        keep = set(subset)
        universe = tuple(x for x in self.universe if x in keep)
        relations = {
            name: {t for t in tuples if set(t) <= keep}
            for name, tuples in self.relations.items()
        }
        functions = {
            name: {args: v for args, v in table.items()
                   if set(args) <= keep and v in keep}
            for name, table in self.functions.items()
        }
        constants = dict(self.constants)
        if not all(v in keep for v in constants.values()):
            raise ValueError("restriction drops a constant")
        return FiniteStructure(self.vocabulary, universe, relations,
                               functions, constants)

    def is_closed(self, subset: Iterable[int]) -> bool:
        keep = set(subset)
        if not all(v in keep for v in self.constants.values()):
            return False
        for table in self.functions.values():
            for args, v in table.items():
                if set(args) <= keep and v not in keep:
                    return False
        return True


def generate_substructure(M: FiniteStructure, X: Iterable[int],
                          cap: int = CLOSURE_CAP) -> FiniteStructure:
    """Least substructure of M containing X: close X under constants and
    all defined function applications, then induce."""
    closed = set(X)
    if not closed <= set(M.universe):
        raise ValueError("generators outside the universe")
    closed.update(M.constants.values())
    changed = True
    while changed:
        changed = False
        for table in M.functions.values():
            for args, value in table.items():
                if value not in closed and set(args) <= closed:
                    closed.add(value)
                    changed = True
                    if len(closed) > cap:
                        raise ClosureDiverges(
                            f"closure exceeded the {cap}-element cap"
                        )
    return M.restrict(closed)


@dataclass
class Embedding:
    """An injective map preserving and reflecting relations and commuting
    with all defined functions and constants."""

    source: FiniteStructure
    target: FiniteStructure
    mapping: dict[int, int]

    def __call__(self, x: int) -> int:
        return self.mapping[x]

    def apply(self, t: tuple[int, ...]) -> tuple[int, ...]:
        return tuple(self.mapping[x] for x in t)

    def validate(self):
        A, B, m = self.source, self.target, self.mapping
        if A.vocabulary != B.vocabulary:
            raise VocabularyMismatch("embedding across vocabularies")
        if set(m.keys()) != set(A.universe):
            raise InvalidEmbedding("map not total on the source")
        if len(set(m.values())) != len(m):
            raise InvalidEmbedding("map not injective")
        if not set(m.values()) <= set(B.universe):
            raise InvalidEmbedding("image outside the target")
        for name, tuples in A.relations.items():
            arity = A.vocabulary.relation_arity(name)
            b_tuples = B.relations[name]
            for t in itertools.product(A.universe, repeat=arity):
                if (t in tuples) != (self.apply(t) in b_tuples):
                    raise InvalidEmbedding(f"relation {name} not matched at {t}")
        for name, table in A.functions.items():
            b_table = B.functions[name]
            for args, value in table.items():
                image = b_table.get(self.apply(args))
                if image is None or image != m[value]:
                    raise InvalidEmbedding(f"function {name} not matched at {args}")
        for name, value in A.constants.items():
            if B.constants.get(name) != m[value]:
                raise InvalidEmbedding(f"constant {name} not matched")

    def is_valid(self) -> bool:
        try:
            self.validate()
            return True
        except (InvalidEmbedding, VocabularyMismatch):
            return False

    def compose(self, then: "Embedding") -> "Embedding":
        if then.source is not self.target and then.source != self.target:
            raise InvalidEmbedding("composition endpoints do not meet")
        return Embedding(self.source, then.target,
                         {x: then.mapping[y] for x, y in self.mapping.items()})

    def key(self) -> tuple[tuple[int, int], ...]:
        return tuple(sorted(self.mapping.items()))


def identity(M: FiniteStructure) -> Embedding:
    return Embedding(M, M, {x: x for x in M.universe})


def _consistent_so_far(A: FiniteStructure, B: FiniteStructure,
                       mapping: dict[int, int], newly: int) -> bool:
    """Partial-map checks touching the just-assigned element."""
    assigned = mapping.keys()
    used = set(mapping.values())
    for name, tuples in A.relations.items():
        arity = A.vocabulary.relation_arity(name)
        b_tuples = B.relations[name]
        for t in itertools.product(sorted(assigned), repeat=arity):
            if newly not in t:
                continue
            mt = tuple(mapping[x] for x in t)
            if (t in tuples) != (mt in b_tuples):
                return False
    for name, table in A.functions.items():
        b_table = B.functions[name]
        for args, value in table.items():
            involved = newly in args or value == newly
            if not involved:
                continue
            if not set(args) <= assigned:
                continue
            image = b_table.get(tuple(mapping[x] for x in args))
            if image is None:
                return False
            if value in assigned:
                if image != mapping[value]:
                    return False
            elif image in used:
                return False  # forced image already taken by another element
    return True


def enumerate_embeddings(A: FiniteStructure, B: FiniteStructure,
                         fixed: dict[int, int] | None = None,
                         first_only: bool = False) -> list[Embedding]:
    """All embeddings A -> B by backtracking over the ordered universes.

    ``fixed`` pins part of the map (used for extension tasks).  Results
    come in lexicographic order of the image sequence.
    """
    if A.vocabulary != B.vocabulary:
        raise VocabularyMismatch("cannot embed across vocabularies")
    if A.size > B.size:
        return []
    for name, value in A.constants.items():
        if name not in B.constants:
            return []
    mapping: dict[int, int] = {}
    if fixed:
        for x, y in fixed.items():
            mapping[x] = y
    for name, value in A.constants.items():
        pinned = B.constants[name]
        if mapping.get(value, pinned) != pinned:
            return []
        mapping[value] = pinned
    if len(set(mapping.values())) != len(mapping):
        return []
    order = [x for x in A.universe if x not in mapping]
    results: list[Embedding] = []

    # seed consistency for the pinned part
    for x in list(mapping):
        if not _consistent_so_far(A, B, mapping, x):
            return []

    def search(i: int) -> bool:
        if i == len(order):
            e = Embedding(A, B, dict(mapping))
            if e.is_valid():
                results.append(e)
                return first_only
            return False
        x = order[i]
        used = set(mapping.values())
        for y in B.universe:
            if y in used:
                continue
            mapping[x] = y
            if _consistent_so_far(A, B, mapping, x) and search(i + 1):
                return True
            del mapping[x]
        return False

    search(0)
    return results


def is_isomorphic(A: FiniteStructure, B: FiniteStructure) -> bool:
    """True iff some embedding A -> B is surjective."""
    if A.vocabulary != B.vocabulary:
        raise VocabularyMismatch("cannot compare across vocabularies")
    if A.size != B.size:
        return False
    # cheap invariants first
    for name in A.relations:
        if len(A.relations[name]) != len(B.relations[name]):
            return False
    for name in A.functions:
        if len(A.functions[name]) != len(B.functions[name]):
            return False
    return bool(enumerate_embeddings(A, B, first_only=True))
