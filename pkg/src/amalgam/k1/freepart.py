"""Sparse Boolean functions over named free generators.

The free factor of a structure's element algebra is a free Boolean
algebra on generator ids.  Elements of it are Boolean functions of
finitely many generators, stored in canonical sparse form: the essential
support (a sorted tuple of generator ids) plus a truth table bitmask over
sign patterns of that support.  All operations expand to the joint
support and re-canonicalize, so equality is plain field equality and the
cost of an operation is 2^(joint support), never 2^(all generators).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Mapping

SUPPORT_CAP = 22


class SupportOverflow(Exception):
    """A joint support grew past the expansion cap."""


@dataclass(frozen=True)
class FreeFn:
    support: tuple[int, ...]
    table: int

    def __post_init__(self):
        assert self.support == tuple(sorted(set(self.support)))
        assert 0 <= self.table < (1 << (1 << len(self.support)))

    @property
    def is_zero(self) -> bool:
        return self.table == 0

    @property
    def is_one(self) -> bool:
        return self.table == (1 << (1 << len(self.support))) - 1

    def evaluate(self, point: Mapping[int, int]) -> int:
        """Value at a total assignment (generators absent from the mapping
        read as 0)."""
        pattern = 0
        for i, g in enumerate(self.support):
            if point.get(g, 0):
                pattern |= 1 << i
        return (self.table >> pattern) & 1


ZERO = FreeFn((), 0)
ONE = FreeFn((), 1)


def var(g: int) -> FreeFn:
    return FreeFn((g,), 0b10)


def _expand(fn: FreeFn, joint: tuple[int, ...]) -> int:
    """Truth table of fn over a superset support."""
    positions = [joint.index(g) for g in fn.support]
    out = 0
    for p in range(1 << len(joint)):
        q = 0
        for i, pos in enumerate(positions):
            if p & (1 << pos):
                q |= 1 << i
        if (fn.table >> q) & 1:
            out |= 1 << p
    return out


def _reduce(support: tuple[int, ...], table: int) -> FreeFn:
    """Drop variables the table does not depend on."""
    sup = list(support)
    j = 0
    while j < len(sup):
        width = len(sup)
        essential = False
        for p in range(1 << width):
            if p & (1 << j):
                continue
            if ((table >> p) & 1) != ((table >> (p | (1 << j))) & 1):
                essential = True
                break
        if essential:
            j += 1
            continue
        # drop variable j, keeping its 0-slice
        new_table = 0
        for p in range(1 << width):
            if p & (1 << j):
                continue
            low = p & ((1 << j) - 1)
            high = (p >> (j + 1)) << j
            if (table >> p) & 1:
                new_table |= 1 << (low | high)
        table = new_table
        del sup[j]
    return FreeFn(tuple(sup), table)


def _joint(a: FreeFn, b: FreeFn) -> tuple[int, ...]:
    joint = tuple(sorted(set(a.support) | set(b.support)))
    if len(joint) > SUPPORT_CAP:
        raise SupportOverflow(f"joint support {len(joint)} exceeds {SUPPORT_CAP}")
    return joint


def conj(a: FreeFn, b: FreeFn) -> FreeFn:
    if a.is_zero or b.is_zero:
        return ZERO
    if a.is_one:
        return b
    if b.is_one:
        return a
    joint = _joint(a, b)
    return _reduce(joint, _expand(a, joint) & _expand(b, joint))

def disj(a: FreeFn, b: FreeFn) -> FreeFn:
    if a.is_one or b.is_one:
        return ONE
    if a.is_zero:
        return b
    if b.is_zero:
        return a
    joint = _joint(a, b)
    return _reduce(joint, _expand(a, joint) | _expand(b, joint))


def neg(a: FreeFn) -> FreeFn:
    full = (1 << (1 << len(a.support))) - 1
    return FreeFn(a.support, a.table ^ full)


def signed(a: FreeFn, sign: int) -> FreeFn:
    return a if sign else neg(a)


def implies(a: FreeFn, b: FreeFn) -> bool:
    return conj(a, neg(b)).is_zero


def rename(a: FreeFn, mapping: Mapping[int, int]) -> FreeFn:
    """Substitute generator ids (must stay injective on the support)."""
    new_support = tuple(mapping.get(g, g) for g in a.support)
    if len(set(new_support)) != len(new_support):
        raise ValueError("generator renaming collides on the support")
    order = sorted(range(len(new_support)), key=lambda i: new_support[i])
    sorted_support = tuple(new_support[i] for i in order)
    table = 0
    for p in range(1 << len(a.support)):
        q = 0
        for new_pos, old_pos in enumerate(order):
            if p & (1 << old_pos):
                q |= 1 << new_pos
        if (a.table >> p) & 1:
            table |= 1 << q
    return FreeFn(sorted_support, table)


def conj_many(fns: Iterable[FreeFn]) -> FreeFn:
    out = ONE
    for fn in fns:
        out = conj(out, fn)
        if out.is_zero:
            return ZERO
    return out


def support_components(fns: list[FreeFn]) -> list[list[int]]:
    """Indices grouped by transitive support overlap; constant functions
    each form their own singleton group."""
    parent = list(range(len(fns)))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    owner: dict[int, int] = {}
    for i, fn in enumerate(fns):
        for g in fn.support:
            if g in owner:
                a, b = find(owner[g]), find(i)
                if a != b:
                    parent[b] = a
            else:
                owner[g] = i
    groups: dict[int, list[int]] = {}
    for i in range(len(fns)):
        groups.setdefault(find(i), []).append(i)
    return list(groups.values())


def conj_is_zero(fns: list[FreeFn]) -> bool:
    """Zero test of a conjunction, factorized over support components:
    functions on disjoint supports multiply to zero only if one factor
    does."""
    for fn in fns:
        if fn.is_zero:
            return True
    for group in support_components(fns):
        if conj_many([fns[i] for i in group]).is_zero:
            return True
    return False
