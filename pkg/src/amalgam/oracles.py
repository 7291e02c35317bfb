"""Brute-force oracles.

Each oracle re-derives a result straight from its definition, with no
shared shortcuts with the fast paths it certifies: independence by
quantifying over all nonzero Boolean polynomials, pushout laws by
projecting atoms through the raw embedding images and enumerating
homomorphism pairs, bases by trying every subset.  Slow on purpose and
capped to desk sizes.
"""

from __future__ import annotations

import itertools
from typing import Iterable, Iterator

from .boolalg import (
    BAEmbedding,
    FiniteBooleanAlgebra,
    PrincipalIdeal,
    PushoutResult,
    bits,
    popcount,
)


# ---------------------------------------------------------------------------
# Independence straight from the polynomial definition
# ---------------------------------------------------------------------------


def independence_by_all_polynomials(
    B: FiniteBooleanAlgebra,
    Y: Iterable[int],
    X: Iterable[int],
    I: PrincipalIdeal,
) -> bool:
    """Quantify over every subset of Y, every nonzero polynomial in that
    many variables (a polynomial being any nonempty set of sign patterns),
    and every element of <X> outside I."""
    ys = sorted(set(Y))
    test = [a for a in B.subalgebra_elements(X) if a not in I]
    for size in range(len(ys) + 1):
        for subset in itertools.combinations(ys, size):
            comps = [B.complement(y) for y in subset]
            minterms = []
            for pattern in range(1 << size):
                m = B.full
                for i in range(size):
                    m &= subset[i] if pattern & (1 << i) else comps[i]
                minterms.append(m)
            # each nonempty pattern set is one polynomial in DNF
            for poly in range(1, 1 << len(minterms)):
                value = 0
                for k in bits(poly):
                    value |= minterms[k]
                for a in test:
                    if (value & a) in I:
                        return False
    return True


# ---------------------------------------------------------------------------
# Pushout laws checked from first principles
# ---------------------------------------------------------------------------


def all_embeddings_between(
    C: FiniteBooleanAlgebra, A: FiniteBooleanAlgebra
) -> Iterator[BAEmbedding]:
    """Every unital embedding C -> A, i.e. every way of partitioning A's
    atoms into |At(C)| labeled nonempty blocks."""
    c, a = C.atom_count, A.atom_count
    if c == 0:
        if a == 0:
            yield BAEmbedding(C, A, ())
        return
    for owners in itertools.product(range(c), repeat=a):
        if len(set(owners)) != c:
            continue
        images = [0] * c
        for atom_index, owner in enumerate(owners):
            images[owner] |= 1 << atom_index
        yield BAEmbedding(C, A, tuple(images))


def _atom_projection(iX: BAEmbedding, d_atom_index: int) -> int | None:
    """The unique source atom whose image contains the given target atom,
    computed directly from the embedding's images."""
    mask = 1 << d_atom_index
    found = None
    for i, img in enumerate(iX.atom_images):
        if img & mask:
            if found is not None:
                return None
            found = i
    return found


def check_pushout_square(po: PushoutResult, eA: BAEmbedding, eB: BAEmbedding) -> bool:
    """iA . eA == iB . eB on all of C."""
    C = eA.source
    return all(
        po.into_left(eA(x)) == po.into_right(eB(x)) for x in C.elements()
    )


def check_pushout_disjoint_ranges(
    po: PushoutResult, eA: BAEmbedding, eB: BAEmbedding
) -> bool:
    """range(iA) and range(iB) intersect exactly in the image of C."""
    left = {po.into_left(x) for x in eA.target.elements()}
    right = {po.into_right(x) for x in eB.target.elements()}
    via_c = {po.into_left(eA(x)) for x in eA.source.elements()}
    return left & right == via_c


def check_pushout_order(
    po: PushoutResult, eA: BAEmbedding, eB: BAEmbedding
) -> bool:
    """Internal characterization: for a off C in A and b off C in B,
    a <= b in the pushout iff some element of C sits between them
    (and symmetrically)."""
    A, B, C = eA.target, eB.target, eA.source
    D = po.algebra
    c_elements = list(C.elements())
    a_off = [a for a in A.elements() if eA.preimage(a) is None]
    b_off = [b for b in B.elements() if eB.preimage(b) is None]
    for a in a_off:
        ia = po.into_left(a)
        for b in b_off:
            ib = po.into_right(b)
            below = D.le(ia, ib)
            witness = any(A.le(a, eA(c)) and B.le(eB(c), b) for c in c_elements)
            if below != witness:
                return False
            above = D.le(ib, ia)
            witness = any(B.le(b, eB(c)) and A.le(eA(c), a) for c in c_elements)
            if above != witness:
                return False
    return True


def check_pushout_universal(
    po: PushoutResult,
    eA: BAEmbedding,
    eB: BAEmbedding,
    max_target_atoms: int = 4,
) -> bool:
    """Every homomorphism pair out of A and B agreeing on C factors
    uniquely through the pushout, for all targets with few atoms.

    A homomorphism out of a finite algebra is an atom map of the target
    into the source, so pairs agreeing on C are enumerated by fibering
    target atoms over C's atoms.  Factoring existence and uniqueness
    reduce to an independently computed projection index: each pushout
    atom is projected to its (A-atom, B-atom) pair through the raw
    embedding images.
    """
    A, B, C = eA.target, eB.target, eA.source
    D = po.algebra

    index: dict[tuple[int, int], int] = {}
    for d in range(D.atom_count):
        pa = _atom_projection(po.into_left, d)
        pb = _atom_projection(po.into_right, d)
        if pa is None or pb is None:
            return False  # a pushout atom under two images: not an amalgam
        if (pa, pb) in index:
            return False  # two pushout atoms would give two factorings
        index[(pa, pb)] = d

    fibers_a = [list(bits(img)) for img in eA.atom_images]
    fibers_b = [list(bits(img)) for img in eB.atom_images]
    c = C.atom_count
    for q_atoms in range(1, max_target_atoms + 1):
        # owner: which C-atom each target atom sits over, then all ways of
        # refining that choice into A-atoms and B-atoms
        for owners in itertools.product(range(c), repeat=q_atoms):
            option_pairs = []
            for gamma in owners:
                option_pairs.append(
                    [(pa, pb) for pa in fibers_a[gamma] for pb in fibers_b[gamma]]
                )
            for choice in itertools.product(*option_pairs):
                if any(pair not in index for pair in choice):
                    return False
    return True


def verify_pushout_triple(
    po: PushoutResult,
    eA: BAEmbedding,
    eB: BAEmbedding,
    max_target_atoms: int = 4,
) -> dict[str, bool]:
    return {
        "square": check_pushout_square(po, eA, eB),
        "disjoint_ranges": check_pushout_disjoint_ranges(po, eA, eB),
        "order": check_pushout_order(po, eA, eB),
        "universal": check_pushout_universal(po, eA, eB, max_target_atoms),
    }


# ---------------------------------------------------------------------------
# Basis oracle
# ---------------------------------------------------------------------------


def bases_through_by_enumeration(
    F: FiniteBooleanAlgebra, n: int, b: int
) -> list[tuple[int, ...]]:
    """All n-subsets containing b that are independent and generate F,
    found by trying every subset."""
    if F.atom_count != 1 << n:
        return []
    nontrivial = [x for x in F.elements() if x not in (0, F.full) and x != b]
    found = []
    for rest in itertools.combinations(nontrivial, n - 1):
        J = (b,) + rest
        comps = [F.complement(y) for y in J]
        atoms_seen = 0
        for pattern in range(1 << n):
            m = F.full
            for i in range(n):
                m &= J[i] if pattern & (1 << i) else comps[i]
            if popcount(m) != 1:
                break
            atoms_seen |= m
        else:
            if atoms_seen == F.full:
                found.append(J)
    return found
