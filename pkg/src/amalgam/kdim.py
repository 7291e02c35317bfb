"""The r-dimensional class: tuple classifications, witness functions,
closure and independence, membership, and frugal disjoint amalgamation of
k-configurations.

A structure carries, for every (r+1)-tuple over its universe, a class
index below the truncation, and witness values f_m for the indices m
below the tuple's class; at and above the class the functions return the
tuple's head, so only the low entries are stored.  Membership demands the
classes partition the tuples, the value coherence just described, and no
independent subset of size r+2 under subalgebra closure.
"""

from __future__ import annotations

import csv
import io
import itertools
import random
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Optional, Sequence

from .errors import FrugalImpossible, NoAmalgam, PreconditionFailed
from .report import CheckReport
from .structures import (
    FiniteStructure,
    Vocabulary,
    generate_substructure,
    indexed_names,
)

DEFAULT_TRUNC = 6


def kr_vocabulary(r: int, trunc: int = DEFAULT_TRUNC) -> Vocabulary:
    return Vocabulary.make(
        relations={name: r + 1 for name in indexed_names("R", trunc)},
        functions={name: r + 1 for name in indexed_names("f", trunc)},
        index_bound=trunc,
    )


@dataclass
class KrStructure:
    r: int
    trunc: int
    universe: tuple[int, ...]
    classes: dict[tuple[int, ...], int] = field(default_factory=dict)
    values: dict[tuple[int, tuple[int, ...]], int] = field(default_factory=dict)

    def __post_init__(self):
        self.universe = tuple(self.universe)

    def tuples(self) -> Iterator[tuple[int, ...]]:
        return itertools.product(self.universe, repeat=self.r + 1)

    def value(self, m: int, t: tuple[int, ...]) -> Optional[int]:
        n = self.classes.get(t)
        if n is None:
            return None
        if m >= n:
            return t[0]
        return self.values.get((m, t))

    def to_structure(self) -> FiniteStructure:
        vocab = kr_vocabulary(self.r, self.trunc)
        relations = {name: set() for name in indexed_names("R", self.trunc)}
        functions = {name: {} for name in indexed_names("f", self.trunc)}
        for t, n in self.classes.items():
            if n < self.trunc:
                relations[f"R{n}"].add(t)
            for m in range(self.trunc):
                v = self.value(m, t)
                if v is not None:
                    functions[f"f{m}"][t] = v
        return FiniteStructure(vocab, self.universe, relations, functions)

    @staticmethod
    def from_structure(M: FiniteStructure, r: int) -> "KrStructure":
        trunc = M.vocabulary.index_bound or DEFAULT_TRUNC
        out = KrStructure(r, trunc, M.universe)
        for n in range(trunc):
            for t in M.relations.get(f"R{n}", ()):
                out.classes[t] = n
        for m in range(trunc):
            for t, v in M.functions.get(f"f{m}", {}).items():
                n = out.classes.get(t)
                if n is not None and m < n:
                    out.values[(m, t)] = v
        return out

    def restriction(self, subset: Iterable[int]) -> "KrStructure":
        keep = set(subset)
        out = KrStructure(self.r, self.trunc, tuple(x for x in self.universe
                                                    if x in keep))
        for t, n in self.classes.items():
            if set(t) <= keep:
                out.classes[t] = n
        for (m, t), v in self.values.items():
            if set(t) <= keep and v in keep:
                out.values[(m, t)] = v
        return out


def closure(M: KrStructure, X: Iterable[int], cap: int = 512) -> set[int]:
    """Subalgebra closure of X under every witness function, computed by
    the core fixpoint closure on the flattened structure."""
    sub = generate_substructure(M.to_structure(), set(X), cap)
    return set(sub.universe)


def is_independent(M: KrStructure, Y: Sequence[int]) -> bool:
    return all(y not in closure(M, [z for z in Y if z != y]) for y in Y)


def max_independent_size(M: KrStructure, cap: int) -> int:
    """Largest size up to the cap of an independent subset, by exhaustive
    subset search."""
    best = 0
    for size in range(1, cap + 1):
        found = False
        for Y in itertools.combinations(M.universe, size):
            if is_independent(M, Y):
                found = True
                break
        if found:
            best = size
        else:
            break
    return best


def check_membership(M: KrStructure) -> CheckReport:
    """The three defining conditions, with witness tuples on failure."""
    r = CheckReport("kr-membership")
    missing = [t for t in M.tuples() if t not in M.classes]
    stray = [t for t in M.classes
             if len(t) != M.r + 1 or not set(t) <= set(M.universe)]
    bad_class = [t for t, n in M.classes.items()
                 if not 0 <= n < M.trunc]
    partition_ok = not missing and not stray and not bad_class
    r.add("kr0.partition", partition_ok,
          "" if partition_ok else
          f"unclassified {missing[:3]} stray {stray[:3]} bad {bad_class[:3]}")

    coherent = True
    detail = ""
    for t, n in M.classes.items():
        for m in range(n):
            v = M.values.get((m, t))
            if v is None or v not in M.universe:
                coherent = False
                detail = f"missing witness value f{m}{t}"
                break
        if not coherent:
            break
    for (m, t) in M.values:
        n = M.classes.get(t)
        if n is None or m >= n:
            coherent = False
            detail = f"stored value f{m}{t} at or above the class index"
            break
    r.add("kr0.coherence", coherent, detail)

    if partition_ok and coherent:
        top = max_independent_size(M, M.r + 2)
        r.add("kr0.independence_bound", top <= M.r + 1,
              "" if top <= M.r + 1 else
              f"independent subset of size {top} found")
    else:
        r.skip("kr0.independence_bound")
    return r


def check_structure_membership(M: FiniteStructure, r: int) -> CheckReport:
    """Membership for the flat form: the partition condition is checked on
    the explicit relation sets (a tuple may sit in several or none there),
    the rest via the compact form."""
    report = CheckReport("kr-membership")
    counts: dict[tuple, int] = {}
    for n in range(M.vocabulary.index_bound or DEFAULT_TRUNC):
        for t in M.relations.get(f"R{n}", ()):
            counts[t] = counts.get(t, 0) + 1
    total = len(M.universe) ** (r + 1)
    over = [t for t, c in counts.items() if c > 1]
    partition_ok = not over and len(counts) == total
    report.add("kr0.partition", partition_ok,
               "" if partition_ok else
               f"{len(over)} tuples multiply classified, "
               f"{total - len(counts)} unclassified")
    compact = KrStructure.from_structure(M, r)
    # coherence on the flat form: every function must return the head at
    # and above the class index
    coherent = True
    detail = ""
    for t, n in compact.classes.items():
        for m in range(compact.trunc):
            v = M.functions.get(f"f{m}", {}).get(t)
            if m >= n:
                if v is not None and v != t[0]:
                    coherent = False
                    detail = f"f{m}{t} must return the head"
            else:
                if v is None:
                    coherent = False
                    detail = f"f{m}{t} missing below the class index"
        if not coherent:
            break
    report.add("kr0.coherence", coherent, detail)
    if partition_ok and coherent:
        top = max_independent_size(compact, r + 2)
        report.add("kr0.independence_bound", top <= r + 1,
                   "" if top <= r + 1 else
                   f"independent subset of size {top} found")
    else:
        report.skip("kr0.independence_bound")
    return report


# ---------------------------------------------------------------------------
# Frugal disjoint amalgamation of k-configurations
# ---------------------------------------------------------------------------


@dataclass
class KConfiguration:
    """Ordered parts over one ambient id space; overlaps are implicit in
    shared ids."""

    parts: tuple[KrStructure, ...]

    def __post_init__(self):
        if not self.parts:
            raise PreconditionFailed("configuration", "no parts")
        rs = {p.r for p in self.parts}
        truncs = {p.trunc for p in self.parts}
        if len(rs) != 1 or len(truncs) != 1:
            raise PreconditionFailed("configuration", "mixed parameters")

    @property
    def union_universe(self) -> tuple[int, ...]:
        seen: list[int] = []
        for p in self.parts:
            for x in p.universe:
                if x not in seen:
                    seen.append(x)
        return tuple(sorted(seen))

    def overlap_signature(self) -> tuple:
        sizes = tuple(sorted(len(p.universe) for p in self.parts))
        pairwise = tuple(sorted(
            len(set(a.universe) & set(b.universe))
            for i, a in enumerate(self.parts)
            for b in self.parts[i + 1:]
        ))
        return sizes + ("|",) + pairwise


def _agreement_ok(config: KConfiguration) -> bool:
    for i, a in enumerate(config.parts):
        for b in config.parts[i + 1:]:
            shared = set(a.universe) & set(b.universe)
            for t in itertools.product(sorted(shared), repeat=a.r + 1):
                if a.classes.get(t) != b.classes.get(t):
                    return False
                n = a.classes.get(t, 0)
                for m in range(n):
                    if a.values.get((m, t)) != b.values.get((m, t)):
                        return False
    return True


def _interior_owner(config: KConfiguration, t: tuple[int, ...]) -> Optional[int]:
    for i, p in enumerate(config.parts):
        if set(t) <= set(p.universe):
            return i
    return None


def _completions(
    config: KConfiguration,
    first_only: bool,
    class_cap: Optional[int] = None,
) -> Iterator[KrStructure]:
    """Backtracking over the cross tuples: classes in increasing index,
    witness values in increasing id order; class members only."""
    r = config.parts[0].r
    trunc = config.parts[0].trunc
    cap = trunc if class_cap is None else min(class_cap, trunc)
    universe = config.union_universe
    base = KrStructure(r, trunc, universe)
    for p in config.parts:
        for t, n in p.classes.items():
            base.classes[t] = n
        for key, v in p.values.items():
            base.values[key] = v
    cross = [t for t in base.tuples() if _interior_owner(config, t) is None]

    def assignments(t: tuple[int, ...]):
        for n in range(cap):
            for vals in itertools.product(universe, repeat=n):
                yield n, vals

    def place(index: int) -> Iterator[KrStructure]:
        if index == len(cross):
            candidate = KrStructure(r, trunc, universe,
                                    dict(base.classes), dict(base.values))
            if max_independent_size(candidate, r + 2) <= r + 1:
                yield candidate
            return
        t = cross[index]
        for n, vals in assignments(t):
            base.classes[t] = n
            for m, v in enumerate(vals):
                base.values[(m, t)] = v
            yield from place(index + 1)
            del base.classes[t]
            for m in range(n):
                del base.values[(m, t)]

    yield from place(0)


def frugal_amalgamate(config: KConfiguration,
                      class_cap: Optional[int] = None) -> KrStructure:
    """First completion of the configuration on exactly the union
    universe, in deterministic search order.

    Preconditions: every part is a member, parts agree on their overlaps,
    and no part already covers the union (else no extension on the union
    universe could be proper).
    """
    union = set(config.union_universe)
    for p in config.parts:
        if set(p.universe) == union:
            raise FrugalImpossible(
                "a part already covers the union of the universes"
            )
        report = check_membership(p)
        if not report.passed:
            raise PreconditionFailed("membership", str(report.failing()))
    if not _agreement_ok(config):
        raise PreconditionFailed("overlap", "parts disagree on shared tuples")
    for solution in _completions(config, first_only=True, class_cap=class_cap):
        return solution
    raise NoAmalgam("completion search exhausted")


def completion_solutions(config: KConfiguration,
                         class_cap: Optional[int] = None) -> list[KrStructure]:
    """Exhaustive completion oracle: every member completion on the union
    universe, in search order."""
    return list(_completions(config, first_only=False, class_cap=class_cap))


# ---------------------------------------------------------------------------
# Configuration survey
# ---------------------------------------------------------------------------


def random_member(rng: random.Random, r: int, trunc: int,
                  universe: Sequence[int], class_cap: int = 2,
                  tries: int = 200) -> Optional[KrStructure]:
    """Seeded random member on the given universe."""
    universe = tuple(universe)
    for _ in range(tries):
        M = KrStructure(r, trunc, universe)
        for t in M.tuples():
            n = rng.randrange(class_cap)
            M.classes[t] = n
            for m in range(n):
                M.values[(m, t)] = rng.choice(universe)
        if check_membership(M).passed:
            return M
    return None


def sample_configurations(
    rng: random.Random, r: int, k: int, size_bound: int, trunc: int,
    budget: int,
) -> Iterator[KConfiguration]:
    """Seeded stream of valid configurations of union cardinality at most
    the bound, parts proper, overlaps agreeing."""
    produced = 0
    attempts = 0
    while produced < budget and attempts < budget * 120:
        attempts += 1
        total = rng.randint(max(2, k), size_bound)
        universe = list(range(total))
        parts = []
        ok = True
        shared = KrStructure(r, trunc, tuple(universe))
        template: Optional[KrStructure] = None
        covers: list[set[int]] = []
        for _ in range(k):
            size = rng.randint(1, total - 1)
            covers.append(set(rng.sample(universe, size)))
        if set().union(*covers) != set(universe):
            continue
        if any(c == set(universe) for c in covers):
            continue
        for cover in covers:
            sub_universe = tuple(sorted(cover))
            M = random_member(rng, r, trunc, sub_universe)
            if M is None:
                ok = False
                break
            parts.append(M)
        if not ok:
            continue
        config = KConfiguration(tuple(parts))
        if not _agreement_ok(config):
            continue
        produced += 1
        yield config


@dataclass
class SurveyTable:
    r: int
    k: int
    rows: dict[tuple, dict[str, int]] = field(default_factory=dict)

    def record(self, signature: tuple, outcome: str):
        row = self.rows.setdefault(signature, {"success": 0, "no_amalgam": 0,
                                               "impossible": 0})
        row[outcome] += 1

    def to_csv(self) -> str:
        buffer = io.StringIO()
        writer = csv.writer(buffer)
        writer.writerow(["r", "k", "signature", "success", "no_amalgam",
                         "impossible"])
        for signature in sorted(self.rows):
            row = self.rows[signature]
            writer.writerow([self.r, self.k,
                             " ".join(str(s) for s in signature),
                             row["success"], row["no_amalgam"],
                             row["impossible"]])
        return buffer.getvalue()

    def pretty(self) -> str:
        lines = [f"survey r={self.r} k={self.k}"]
        for signature in sorted(self.rows):
            row = self.rows[signature]
            lines.append(
                f"  {signature}: success={row['success']} "
                f"no_amalgam={row['no_amalgam']} impossible={row['impossible']}"
            )
        return "\n".join(lines)

    def key_counts(self) -> dict:
        return {sig: dict(row) for sig, row in self.rows.items()}


def survey_k_disjoint_ap(
    r: int, k: int, size_bound: int, budget: int,
    trunc: int = DEFAULT_TRUNC, seed: int = 0,
    class_cap: Optional[int] = 3,
    solver=frugal_amalgamate,
) -> SurveyTable:
    """Sample configurations and tabulate amalgamation outcomes by
    overlap signature; deterministic under a fixed seed."""
    rng = random.Random(seed)
    table = SurveyTable(r, k)
    for config in sample_configurations(rng, r, k, size_bound, trunc, budget):
        signature = config.overlap_signature()
        try:
            solver(config, class_cap)
            table.record(signature, "success")
        except NoAmalgam:
            table.record(signature, "no_amalgam")
        except FrugalImpossible:
            table.record(signature, "impossible")
    return table
