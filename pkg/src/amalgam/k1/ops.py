"""Constructive operations: free amalgamation, disjoint amalgamation,
trace-element adjunction, and labeling of good sequences.

The amalgamation follows the four-step recipe: (1) extend the big
structure's element algebra by one fresh designated atom per new atom of
the small extension, each placed by a principal ultrafilter choice that
respects the base traces and avoids the independence witness; (2, 3) the
amalgamation base and the quotient of the free amalgam are implicit in
the product representation, which keeps designated and free coordinates
separated by construction, so the quotient's effect reduces to the
ultrafilter bookkeeping; (4) rebuild the structure: merged value tables,
extended atom bijection, derived traces.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from ..errors import (
    CollapseDetected,
    HarvestFailed,
    PreconditionFailed,
    UltrafilterChoiceFailed,
    WitnessAlignmentFailed,
)
from ..boolalg import PrincipalIdeal, rebase_with_element
from .freepart import ZERO, FreeFn, var
from .p1 import P1Context, P1Element, independent_from_mod_atomic, materialize
from .embeddings import DChoice, MatchEmbedding, TransportMap
from .structure import (
    FreeExtensionWitness,
    K1Structure,
    K1Witness,
)


def derive_free_witness(M: K1Structure) -> FreeExtensionWitness:
    """Free-over-minimal witness for a value-generated member: the bare
    generators form the independent set, every name's tail starts at the
    witness threshold."""
    n_star = M.witness.n_star if M.witness else 0
    independent = [P1Element(0, var(g)) for g in M.gen_ids]
    return FreeExtensionWitness.make(independent, {c: n_star for c in M.p2})


def derive_pair_witness(
    N1: K1Structure, N2: K1Structure, inclusion: MatchEmbedding
) -> FreeExtensionWitness:
    """Witness that N2 freely extends the embedded copy of N1: fresh
    generators of N2 are the independent set."""
    used = set()
    for a in N1.p0:
        used |= set(N2.g1[inclusion.p0(a)].free.support)
    for c in N1.p2:
        for n in range(N1.trunc):
            used |= set(N2.f[(n, inclusion.p2(c))].free.support)
    fresh = [g for g in N2.gen_ids if g not in used]
    independent = [P1Element(0, var(g)) for g in fresh]
    n_star = N2.witness.n_star if N2.witness else 0
    old_p2 = {inclusion.p2(c) for c in N1.p2}
    h = {c: n_star for c in N2.p2 if c not in old_p2}
    return FreeExtensionWitness.make(independent, h)


@dataclass
class AmalgamResult:
    amalgam: K1Structure
    big_transport: TransportMap  # M1 -> M2
    small_embedding: TransportMap  # N2 -> M2
    witness: FreeExtensionWitness  # M1 freely extended by M2
    new_atoms: tuple[int, ...]


def _image_values(A: K1Structure, B: K1Structure, m: MatchEmbedding):
    """Pairs (source element, image element) over A's generator list."""
    pairs = []
    for a in A.p0:
        pairs.append((A.g1[a], B.g1[m.p0(a)]))
    for c in A.p2:
        for n in range(A.trunc):
            pairs.append((A.f[(n, c)], B.f[(n, m.p2(c))]))
    return pairs


def _signed_meet(ctx: P1Context, pairs, signs) -> P1Element:
    out = ctx.top
    for (element, sign) in zip(pairs, signs):
        out = ctx.meet(out, element if sign else ctx.comp(element))
    return out


def _gen_rename(N1: K1Structure, ι1_pairs, ι2_pairs) -> dict[int, int]:
    """Positionwise generator correspondence from the two images of N1:
    the generator of an image value in N2 maps to the generator of the
    corresponding image value in M1."""
    rename: dict[int, int] = {}
    for (src1, img1), (src2, img2) in zip(ι1_pairs, ι2_pairs):
        s2 = img2.free.support
        s1 = img1.free.support
        if len(s1) != len(s2):
            raise WitnessAlignmentFailed(
                "matched values disagree on free support size"
            )
        for g2, g1 in zip(s2, s1):
            if rename.setdefault(g2, g1) != g1:
                raise WitnessAlignmentFailed(
                    "inconsistent generator correspondence between the images"
                )
    from .freepart import rename as rename_fn

    for (_, img1), (_, img2) in zip(ι1_pairs, ι2_pairs):
        moved = rename_fn(img2.free, {g: rename[g] for g in img2.free.support})
        if moved != img1.free:
            raise WitnessAlignmentFailed(
                "image free parts do not correspond under the generator map"
            )
    return rename


def amalgamate_free(
    M1: K1Structure,
    N1: K1Structure,
    N2: K1Structure,
    into_big: MatchEmbedding,
    into_small: MatchEmbedding,
) -> AmalgamResult:
    """Amalgamate the extension N1 <= N2 onto M1 over the embedding of N1.

    Returns the amalgam M2 with transports for both sides and the witness
    that M1 is freely extended by M2.  Every new designated atom of N2 is
    placed inside M1's algebra by a deterministic principal ultrafilter
    choice: the lowest designated atom of the matching base block when one
    exists, else the lexicographically least satisfying point of the
    block's free part (zero on all generators outside the base image, so
    the choice avoids the independence witness).
    """
    pairs1 = _image_values(N1, M1, into_big)
    pairs2 = _image_values(N1, N2, into_small)
    gen_rename = _gen_rename(N1, pairs1, pairs2)

    old_p0 = {into_small.p0(a) for a in N1.p0}
    old_p2 = {into_small.p2(c) for c in N1.p2}
    new_p0 = [a for a in N2.p0 if a not in old_p0]
    new_p2 = [c for c in N2.p2 if c not in old_p2]
    new_atom_count = len(new_p0)

    taken = M1.all_ids() | N2.all_ids()
    next_id = max(taken, default=-1) + 1

    def take(k: int) -> list[int]:
        nonlocal next_id
        out = list(range(next_id, next_id + k))
        next_id += k
        return out

    fresh_atoms = take(new_atom_count)
    fresh_p0 = take(new_atom_count)
    fresh_p2 = take(len(new_p2))
    private_gens = sorted(set(N2.gen_ids) - set(gen_rename))
    fresh_gens = take(len(private_gens))
    gen_map = dict(gen_rename)
    gen_map.update(dict(zip(private_gens, fresh_gens)))

    # ultrafilter choice per new atom of N2
    ctx1 = M1.ctx
    splits: list[tuple[int, DChoice]] = []
    small_atom_map = {}
    for a in N1.p0:
        src_atom = N1.g1[a].atomic.bit_length() - 1
        # positions of N1's designated atoms inside each structure
        small_atom_map[N2.g1[into_small.p0(a)].atomic.bit_length() - 1] = \
            M1.g1[into_big.p0(a)].atomic.bit_length() - 1
    for new_a, atom_id in zip(new_p0, fresh_atoms):
        nu_bit = N2.g1[new_a].atomic
        signs = [bool(img.atomic & nu_bit) for (_, img) in pairs2]
        block_m1 = _signed_meet(ctx1, [img for (_, img) in pairs1], signs)
        if block_m1.free.is_zero:
            # the analog of a nonprincipal ultrafilter needs room off the
            # atoms; a purely atomic block would split an existing atom
            raise UltrafilterChoiceFailed(
                f"no atomless position matches the trace of the new atom {new_a}"
            )
        choice = DChoice("point", point=_least_point(block_m1.free))
        splits.append((atom_id, choice))
        small_atom_map[nu_bit.bit_length() - 1] = atom_id

    big_transport = TransportMap(splits=tuple(splits))

    small_embedding = TransportMap(
        p0_map=tuple(sorted(
            [(into_small.p0(a), into_big.p0(a)) for a in N1.p0] +
            list(zip(new_p0, fresh_p0))
        )),
        p2_map=tuple(sorted(
            [(into_small.p2(c), into_big.p2(c)) for c in N1.p2] +
            list(zip(new_p2, fresh_p2))
        )),
        atom_map=tuple(sorted(small_atom_map.items())),
        gen_map=tuple(sorted(gen_map.items())),
        splits=_extra_atom_splits(M1, N1, into_big, pairs1, pairs2, gen_rename),
    )

    # assemble the amalgam
    atom_ids = tuple(sorted(M1.atom_ids + tuple(fresh_atoms)))
    gen_ids = tuple(sorted(M1.gen_ids + tuple(fresh_gens)))
    g1 = {a: big_transport.apply(M1.g1[a]) for a in M1.p0}
    ctx2 = P1Context(atom_ids)
    for p0_id, atom_id in zip(fresh_p0, fresh_atoms):
        g1[p0_id] = P1Element(1 << atom_id, ZERO)
    f: dict[tuple[int, int], P1Element] = {}
    for c in M1.p2:
        for n in range(M1.trunc):
            f[(n, c)] = big_transport.apply(M1.f[(n, c)])
    for c, c_new in zip(new_p2, fresh_p2):
        for n in range(N2.trunc):
            f[(n, c_new)] = small_embedding.apply(N2.f[(n, c)])

    n_star = max(
        M1.witness.n_star if M1.witness else 0,
        N2.witness.n_star if N2.witness else 0,
    )
    M2 = K1Structure(
        trunc=M1.trunc,
        p0=M1.p0 + tuple(fresh_p0),
        p2=M1.p2 + tuple(fresh_p2),
        atom_ids=atom_ids,
        gen_ids=gen_ids,
        g1=g1,
        f=f,
        named_gens=M1.named_gens,
    )
    M2.witness = K1Witness(n_star, ctx2.b_star)

    # consistency of the two routes into the amalgam over the base
    for c in N1.p2:
        for n in range(N1.trunc):
            via_big = f[(n, into_big.p2(c))]
            via_small = small_embedding.apply(N2.f[(n, into_small.p2(c))])
            if via_big != via_small:
                raise CollapseDetected(
                    f"value ({n}, {c}) disagrees between the two routes"
                )
    for a in N1.p0:
        if g1[into_big.p0(a)] != small_embedding.apply(N2.g1[into_small.p0(a)]):
            raise CollapseDetected(f"atom image of {a} disagrees")

    witness = FreeExtensionWitness.make(
        [P1Element(0, var(g)) for g in fresh_gens],
        {c: n_star for c in fresh_p2},
    )
    return AmalgamResult(M2, big_transport, small_embedding, witness,
                         tuple(fresh_atoms))


def _least_point(fn: FreeFn) -> tuple[tuple[int, int], ...]:
    """Lexicographically least satisfying assignment over the support."""
    if fn.is_zero:
        raise UltrafilterChoiceFailed("empty block has no point")
    for p in range(1 << len(fn.support)):
        if (fn.table >> p) & 1:
            return tuple(
                (g, (p >> i) & 1) for i, g in enumerate(fn.support)
                if (p >> i) & 1
            )
    raise UltrafilterChoiceFailed("unreachable")


def _extra_atom_splits(M1, N1, into_big, pairs1, pairs2, gen_rename):
    """How M1's designated atoms beyond the base sit under transported
    elements of the small side: each such atom follows the principal point
    of its base block, evaluated in the small side's coordinates."""
    base_atoms = {M1.g1[into_big.p0(a)].atomic for a in N1.p0}
    ctx1 = M1.ctx
    inverse = {g1: g2 for g2, g1 in gen_rename.items()}
    splits = []
    for atom_id in M1.atom_ids:
        bit = 1 << atom_id
        if bit in base_atoms:
            continue
        signs = [bool(img.atomic & bit) for (_, img) in pairs1]
        block = _signed_meet(ctx1, [img for (_, img) in pairs1], signs)
        if block.free.is_zero:
            raise CollapseDetected(
                "an off-base designated atom sits in a purely atomic base "
                "block; the base embedding is not faithful"
            )
        point_m1 = _least_point(block.free)
        point_small = tuple(sorted(
            (inverse[g], v) for g, v in point_m1 if g in inverse
        ))
        if len(point_small) != len(point_m1):
            raise CollapseDetected(
                "a base block depends on a generator invisible to the base"
            )
        splits.append((atom_id, DChoice("point", point=point_small)))
    return tuple(splits)


def disjoint_amalgamate_k1(
    M0: K1Structure,
    M1: K1Structure,
    M2: K1Structure,
    into_first: MatchEmbedding,
    into_second: MatchEmbedding,
) -> AmalgamResult:
    """Disjoint amalgam of two member extensions of a common member: run
    the free amalgamation of (M0 <= M2) onto M1 over M0's image."""
    return amalgamate_free(M1, M0, M2, into_first, into_second)


# ---------------------------------------------------------------------------
# Trace-element adjunction
# ---------------------------------------------------------------------------


def adjoin_trace_element(
    M: K1Structure, u: Sequence[int]
) -> tuple[K1Structure, P1Element]:
    """Extend by one named free generator whose designated-atom trace is
    exactly u: the new element is (join of u's atoms) or-ed with a fresh
    generator living below the complement of the atomic top."""
    u = tuple(sorted(set(u)))
    if not set(u) <= set(M.p0):
        raise PreconditionFailed("trace-domain", "u must be a subset of P0")
    g = M.fresh_ids(1)[0]
    mask = 0
    for a in u:
        mask |= M.g1[a].atomic
    b = P1Element(mask, var(g))
    N = M.copy()
    N.gen_ids = tuple(sorted(N.gen_ids + (g,)))
    N.named_gens = tuple(sorted(N.named_gens + (g,)))
    return N, b


# ---------------------------------------------------------------------------
# Good sequences and labeling
# ---------------------------------------------------------------------------


def check_good_sequence(
    chain: Sequence[K1Structure],
    witnesses: Sequence[FreeExtensionWitness],
    b_seq: Sequence[P1Element],
    surplus: int = 2,
    slack: int = 1,
):
    """Clause report for a candidate good sequence along a free chain.

    (a) each link adds at least ``surplus`` new names, (b) each b_n lives
    in the next structure and is free there from the current algebra
    modulo the atomic ideal, (c) old P0 elements eventually leave every
    b_n's trace (``slack`` links of grace).
    """
    from ..report import CheckReport

    r = CheckReport("good-sequence")
    if len(chain) < 2 and b_seq:
        r.add("good.shape", False, "sequence longer than the chain")
        return r
    r.add("good.shape", len(b_seq) <= len(chain) - 1 if chain else not b_seq)

    surplus_ok = True
    for i in range(len(chain) - 1):
        added = set(chain[i + 1].p2) - set(chain[i].p2)
        if len(added) < surplus:
            surplus_ok = False
    r.add("good.surplus", surplus_ok,
          "" if surplus_ok else f"a link adds fewer than {surplus} names")

    free_ok = True
    for i, b in enumerate(b_seq):
        gens = chain[i].generator_elements()
        if not independent_from_mod_atomic([b], gens):
            free_ok = False
    r.add("good.freeness", free_ok,
          "" if free_ok else "some b_n is not free from the current algebra")

    escape_ok = True
    for i, M in enumerate(chain):
        for a in M.p0:
            atom = M.g1[a].atomic
            for n in range(i + slack, len(b_seq)):
                if b_seq[n].atomic & atom:
                    escape_ok = False
    r.add("good.escape", escape_ok,
          "" if escape_ok else "an old P0 element stays inside later traces")
    return r


def label_good_sequence(
    chain: Sequence[K1Structure],
    witnesses: Sequence[FreeExtensionWitness],
    b_seq: Sequence[P1Element],
    surplus: int = 2,
    slack: int = 1,
) -> tuple[K1Structure, int, list[FreeExtensionWitness], FreeExtensionWitness]:
    """Produce a labeled extension: one new name whose value column is the
    good sequence.

    For each link, harvest from the link's independence witness a finite
    set J around b_n's support, rebase it so that b_n itself becomes a
    witness element (working in the flattened algebra over the link's
    support window), and bump the tail thresholds of names whose scheduled
    values were harvested.  The chain top then gains one name c whose
    column is b_0, b_1, ..., padded by fresh generators.

    Returns the labeled structure, the new name, the rebased per-link
    witnesses (with a final link scheduling only the padding), and the
    sharp bottom witness: relative to the chain bottom the whole column is
    fresh, so its tail threshold is 0.
    """
    report = check_good_sequence(chain, witnesses, b_seq, surplus, slack)
    if not report.passed:
        raise PreconditionFailed("good-sequence", str(report.failing()))
    top = chain[-1]
    rebased: list[FreeExtensionWitness] = []
    for i, b in enumerate(b_seq):
        w = witnesses[i]
        if b in w.independent:
            rebased.append(w)
            continue
        rebased.append(_rebase_link(chain[i], chain[i + 1], w, b, i))

    # one new name whose value column is the sequence, padded by fresh
    # generators, with tail threshold 0: every value is a witness element
    labeled = top.copy()
    pad_count = top.trunc - len(b_seq)
    if pad_count < 0:
        raise PreconditionFailed("good-sequence",
                                 "sequence longer than the truncation")
    fresh = labeled.fresh_ids(1 + pad_count)
    c_label, pad_gens = fresh[0], fresh[1:]
    labeled.p2 = labeled.p2 + (c_label,)
    labeled.gen_ids = tuple(sorted(set(labeled.gen_ids) | set(pad_gens)))
    for n, b in enumerate(b_seq):
        labeled.f[(n, c_label)] = b
    pads = []
    for k, g in enumerate(pad_gens):
        value = P1Element(0, var(g))
        labeled.f[(len(b_seq) + k, c_label)] = value
        pads.append(value)
    # labeling absorbs adjoined generators into the value table
    labeled.named_gens = ()
    last_atomic = max(
        [n + 1 for n, b in enumerate(b_seq) if b.atomic] or [0]
    )
    n_star = max(top.witness.n_star if top.witness else 0, last_atomic)
    labeled.witness = K1Witness(n_star, labeled.ctx.b_star)

    # relative to the top only the padding is new content
    final_witness = FreeExtensionWitness.make(pads, {c_label: len(b_seq)})
    link_witnesses = rebased + [final_witness]
    bottom_independent: list[P1Element] = []
    bottom_h: dict[int, int] = {}
    for w in rebased:
        bottom_independent.extend(w.independent)
        bottom_h.update(w.h)
    bottom_independent.extend(pads)
    bottom_h[c_label] = 0
    bottom_witness = FreeExtensionWitness.make(bottom_independent, bottom_h)
    return labeled, c_label, link_witnesses, bottom_witness


def _rebase_link(
    low: K1Structure,
    high: K1Structure,
    w: FreeExtensionWitness,
    b: P1Element,
    link: int,
) -> FreeExtensionWitness:
    """Swap part of a link witness so that b itself becomes a member.

    Harvest the support-connected part J of the witness around b, check b
    is generated by J with the old algebra and the atomic ideal, flatten
    the link onto an explicit algebra and rebase there, then pull the new
    set back and bump the tail thresholds of names whose scheduled values
    were harvested.
    """
    members = list(w.independent)
    needed = set(b.free.support)
    J: list[P1Element] = []
    changed = True
    while changed:
        changed = False
        for x in members:
            if x in J:
                continue
            if set(x.free.support) & needed:
                J.append(x)
                needed |= set(x.free.support)
                changed = True
    if not J:
        raise HarvestFailed(link, "the element shares no support with the witness")

    low_gens = [g for g in (low.generator_elements())]
    ctx = high.ctx
    flatten = J + [b] + low_gens
    B2, masks, sigma = materialize(ctx, flatten, cap=16)
    flat_j = masks[: len(J)]
    flat_b = masks[len(J)]
    flat_low = masks[len(J) + 1:]
    k = len(ctx.atom_ids)
    ideal = PrincipalIdeal(B2, (1 << k) - 1)
    try:
        new_flat = rebase_with_element(B2, flat_low, ideal, flat_j, flat_b)
    except PreconditionFailed as err:
        raise HarvestFailed(link, f"rebase precondition failed: {err}") from err
    from .p1 import unmaterialize

    J_star = [unmaterialize(ctx, sigma, m) for m in new_flat]
    kept = [x for x in members if x not in J]
    h = dict(w.h)
    harvested = set(J)
    for c in h:
        scheduled = [n for n in range(h[c], high.trunc)
                     if high.f[(n, c)] in harvested]
        if scheduled:
            h[c] = max(scheduled) + 1
    return FreeExtensionWitness.make(kept + J_star, h)


# ---------------------------------------------------------------------------
# Chain building helpers
# ---------------------------------------------------------------------------


def extend_with_names(M: K1Structure, count: int) -> tuple[K1Structure, FreeExtensionWitness]:
    """Add ``count`` fresh names with all-generator value columns; the new
    tails (from index 0) form the free-extension witness."""
    N = M.copy()
    ids = N.fresh_ids(count * (1 + N.trunc))
    new_names = ids[:count]
    gens = ids[count:]
    N.p2 = N.p2 + tuple(new_names)
    N.gen_ids = tuple(sorted(set(N.gen_ids) | set(gens)))
    independent = []
    pos = 0
    for c in new_names:
        for n in range(N.trunc):
            value = P1Element(0, var(gens[pos]))
            N.f[(n, c)] = value
            independent.append(value)
            pos += 1
    witness = FreeExtensionWitness.make(independent, {c: 0 for c in new_names})
    return N, witness

