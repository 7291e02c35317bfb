"""Amalgamation classes and the generic-model builder.

An AmalgamationClass packages the hooks the engine needs: member
enumeration (one representative per isomorphism type), extension tasks
(pairs of members with a distinguished embedding between them), embedding
enumeration into a growing model, an extension search, and the
amalgamation procedure itself.  The builder runs the classic scheduling
loop: tasks are discovered whenever the chain grows, queued first-in
first-out, and resolved either by finding an extension in the current
top or by amalgamating the missing extension on disjointly.

Everything is deterministic: enumeration orders are fixed, and the run
seed only perturbs tie-breaking among tasks discovered at the same stage,
so distinct seeds give different but equivalent generics.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from typing import Any, Callable, Optional, Sequence

from .errors import AmalgamationFailed, EnumerationOverflow


@dataclass
class Task:
    pair_index: int
    f_key: tuple
    discovered_at: int
    status: str = "pending"  # pending | realized | amalgamated
    resolved_at: Optional[int] = None

    def to_dict(self) -> dict:
        return {
            "pair": self.pair_index,
            "f": [list(p) for p in self.f_key],
            "discovered_at": self.discovered_at,
            "status": self.status,
            "resolved_at": self.resolved_at,
        }


@dataclass
class AmalgamationClass:
    """Hooks defining one amalgamation class.

    ``task_pairs(bound)`` returns triples (A, B, inclusion) with B of size
    at most the bound; ``embeddings(A, M)`` lists embeddings as stable
    keys plus opaque embedding objects; ``extend`` searches for an
    extension of f along the inclusion; ``amalgamate`` must return the
    extended model (the previous top embeds by ids).
    """

    name: str
    seed_model: Callable[[], Any]
    members: Callable[[int], list]
    size_of: Callable[[Any], int]
    task_pairs: Callable[[int], list[tuple[Any, Any, Any]]]
    embeddings: Callable[[Any, Any], list[Any]]
    embedding_key: Callable[[Any], tuple]
    touches: Callable[[Any, set], bool]
    extend: Callable[[Any, Any, Any, Any, Any], Optional[Any]]
    amalgamate: Callable[[Any, Any, Any, Any, Any], Any]
    new_ids: Callable[[Any, Any], set]
    is_member: Optional[Callable[[Any], bool]] = None


@dataclass
class GenericApproximation:
    chain: list
    tasks: list[Task]
    pairs: list[tuple[Any, Any, Any]]
    bound: int
    seed: int
    steps_run: int

    @property
    def top(self):
        return self.chain[-1]

    def pending(self) -> list[Task]:
        return [t for t in self.tasks if t.status == "pending"]

    def to_dict(self) -> dict:
        return {
            "chain_length": len(self.chain),
            "bound": self.bound,
            "seed": self.seed,
            "steps": self.steps_run,
            "tasks": [t.to_dict() for t in self.tasks],
        }


def check_jep(cls: AmalgamationClass, bound: int, budget: int = 10000):
    """Joint embedding on the enumerated fragment: every pair of members
    embeds into the amalgam of the two over the seed model."""
    members = cls.members(bound)
    if len(members) ** 2 > budget:
        raise EnumerationOverflow(f"{len(members)}^2 pairs exceed the budget")
    seed = cls.seed_model()
    witnesses = []
    for i, M1 in enumerate(members):
        for M2 in members[i:]:
            # an enumerated member may already accommodate both
            direct = next(
                (D for D in members
                 if cls.embeddings(M1, D) and cls.embeddings(M2, D)),
                None,
            )
            if direct is not None:
                witnesses.append((M1, M2, direct))
                continue
            f_list = cls.embeddings(seed, M1)
            g_list = cls.embeddings(seed, M2)
            if not f_list or not g_list:
                return False, (M1, M2)
            try:
                result = cls.amalgamate(M1, seed, M2, f_list[0], g_list[0])
            except AmalgamationFailed:
                return False, (M1, M2)
            witnesses.append((M1, M2, result))
    return True, witnesses


def check_disjoint_ap(cls: AmalgamationClass, bound: int, budget: int = 20000):
    """Disjoint amalgamation over the enumerated fragment: for tasks
    A <= B and embeddings A -> C, amalgamate and verify both ranges meet
    only in the base image."""
    pairs = cls.task_pairs(bound)
    members = cls.members(bound)
    checked = 0
    for (A, B, inc) in pairs:
        for C in members:
            for f in cls.embeddings(A, C):
                checked += 1
                if checked > budget:
                    raise EnumerationOverflow("AP search exceeded the budget")
                try:
                    cls.amalgamate(C, A, B, f, inc)
                except AmalgamationFailed:
                    return False, (A, B, C)
    return True, checked


def build_generic(
    cls: AmalgamationClass,
    steps: int,
    bound: int,
    seed: int = 0,
    start: Optional[Any] = None,
) -> GenericApproximation:
    """Run the scheduling loop for the given number of dequeue steps."""
    pairs = cls.task_pairs(bound)
    chain = [start if start is not None else cls.seed_model()]
    tasks: list[Task] = []
    queue: list[int] = []
    seen: set[tuple] = set()
    task_objects: dict[int, tuple] = {}
    rng = random.Random(seed)

    def discover(stage: int, fresh: Optional[set]):
        batch = []
        top = chain[-1]
        for pair_index, (A, B, inc) in enumerate(pairs):
            for f in cls.embeddings(A, top):
                key = (pair_index, cls.embedding_key(f))
                if key in seen:
                    continue
                if fresh is not None and not cls.touches(f, fresh):
                    continue
                seen.add(key)
                batch.append((key, f))
        batch.sort(key=lambda item: (item[0][0], item[0][1]))
        if seed:
            rng.shuffle(batch)
        for key, f in batch:
            index = len(tasks)
            tasks.append(Task(key[0], key[1], stage))
            task_objects[index] = (key[0], f)
            queue.append(index)

    discover(0, None)
    steps_run = 0
    for step in range(steps):
        if not queue:
            break
        index = queue.pop(0)
        task = tasks[index]
        pair_index, f = task_objects[index]
        A, B, inc = pairs[pair_index]
        top = chain[-1]
        found = cls.extend(A, B, inc, f, top)
        if found is not None:
            task.status = "realized"
            task.resolved_at = len(chain) - 1
        else:
            try:
                new_top = cls.amalgamate(top, A, B, f, inc)
            except AmalgamationFailed as err:
                raise AmalgamationFailed(
                    f"step {step}: {err}", triple=(A, B, f)
                ) from err
            fresh = cls.new_ids(top, new_top)
            chain.append(new_top)
            task.status = "amalgamated"
            task.resolved_at = len(chain) - 1
            discover(len(chain) - 1, fresh)
        steps_run += 1
    return GenericApproximation(chain, tasks, pairs, bound, seed, steps_run)


def richness_defect(M: Any, cls: AmalgamationClass, bound: int) -> list[tuple]:
    """All extension tasks into M lacking an extension; empty means rich
    at this bound."""
    defects = []
    for pair_index, (A, B, inc) in enumerate(cls.task_pairs(bound)):
        for f in cls.embeddings(A, M):
            if cls.extend(A, B, inc, f, M) is None:
                defects.append((pair_index, cls.embedding_key(f)))
    return defects


# ---------------------------------------------------------------------------
# Bounded back-and-forth equivalence
# ---------------------------------------------------------------------------


def back_and_forth_check(
    M: Any,
    N: Any,
    depth: int,
    elements: Callable[[Any], Sequence],
    position_valid: Callable[[Any, Any, tuple, tuple], bool],
) -> bool:
    """Does the duplicator survive ``depth`` rounds of the game in which
    positions are tuples generating partially matched substructures?

    ``position_valid`` decides whether the picked tuples generate
    isomorphic substructures under the positionwise correspondence.
    """
    memo: dict = {}

    def survive(pos_m: tuple, pos_n: tuple, remaining: int) -> bool:
        key = (pos_m, pos_n, remaining)
        if key in memo:
            return memo[key]
        if remaining == 0:
            memo[key] = True
            return True
        ok = True
        for c in elements(M):
            if c in pos_m:
                continue
            response = False
            for d in elements(N):
                if d in pos_n:
                    continue
                if position_valid(M, N, pos_m + (c,), pos_n + (d,)) and \
                        survive(pos_m + (c,), pos_n + (d,), remaining - 1):
                    response = True
                    break
            if not response:
                ok = False
                break
        if ok:
            for d in elements(N):
                if d in pos_n:
                    continue
                response = False
                for c in elements(M):
                    if c in pos_m:
                        continue
                    if position_valid(M, N, pos_m + (c,), pos_n + (d,)) and \
                            survive(pos_m + (c,), pos_n + (d,), remaining - 1):
                        response = True
                        break
                if not response:
                    ok = False
                    break
        memo[key] = ok
        return ok

    if not position_valid(M, N, (), ()):
        return False
    return survive((), (), depth)


# ---------------------------------------------------------------------------
# Separability
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class DiagramDescriptor:
    """Quantifier-free atomic diagram of an enumerated member."""

    size: int
    relations: tuple[tuple[str, tuple[int, ...]], ...]  # positive atoms, index form
    functions: tuple[tuple[str, tuple[int, ...], int], ...]
    constants: tuple[tuple[str, int], ...]


UNKNOWN = "unknown"


def separability_witness(
    cls: AmalgamationClass,
    A: Any,
    enumeration: Sequence,
    bound: int,
    diagram_of: Callable[[Any, Sequence], DiagramDescriptor],
    tuples_of: Callable[[Any, int], Sequence],
    satisfies: Callable[[Any, Sequence, DiagramDescriptor], bool],
    partial_iso: Callable[[Any, Sequence, Any, Sequence], bool],
):
    """The diagram formula of the enumeration, when it certifies: every
    tuple in an enumerated member of the same cardinality satisfying the
    diagram must enumerate an isomorphic copy.  Returns the descriptor or
    the string "unknown" when the fragment cannot certify."""
    descriptor = diagram_of(A, enumeration)
    for B in cls.members(bound):
        if cls.size_of(B) < descriptor.size:
            continue
        for candidate in tuples_of(B, descriptor.size):
            if satisfies(B, candidate, descriptor):
                if not partial_iso(A, enumeration, B, candidate):
                    return UNKNOWN
    return descriptor
