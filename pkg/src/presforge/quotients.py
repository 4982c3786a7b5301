"""Finite-quotient search and coset enumeration.

`hom_search` does exhaustive backtracking over generator images in the
symmetric group S_k, evaluating each relator as soon as all of its symbols
are assigned.  A nontrivial finite quotient exists iff a nontrivial map to
some S_k exists (act on cosets of a proper subgroup), so sweeping k <= K
is the right bounded certificate; the certificate never claims anything
beyond the swept range.

`todd_coxeter` enumerates cosets with relator scanning and immediate
coincidence handling (union-find on coset labels).  A completed table is
re-verified before being returned: the action must be transitive, satisfy
every relator, and fix coset 0 under the subgroup generators.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Iterator, Sequence

from .freewords import Word, render_word
from .presentations import FinitePresentation

Perm = tuple[int, ...]


def identity_perm(k: int) -> Perm:
    return tuple(range(k))


def compose(p: Perm, q: Perm) -> Perm:
    """Apply p first, then q."""
    return tuple(q[p[i]] for i in range(len(p)))


def inverse_perm(p: Perm) -> Perm:
    out = [0] * len(p)
    for i, j in enumerate(p):
        out[j] = i
    return tuple(out)


def perm_order(p: Perm) -> int:
    order = 1
    q = p
    ident = identity_perm(len(p))
    while q != ident:
        q = compose(q, p)
        order += 1
    return order


def group_order(perms: Sequence[Perm], k: int) -> int:
    """Order of the permutation group generated by `perms` (orbit closure)."""
    ident = identity_perm(k)
    seen = {ident}
    frontier = [ident]
    while frontier:
        nxt = []
        for g in frontier:
            for p in perms:
                h = compose(g, p)
                if h not in seen:
                    seen.add(h)
                    nxt.append(h)
        frontier = nxt
    return len(seen)


def _partitions(k: int) -> Iterator[tuple[int, ...]]:
    """Partitions of k, largest part first, lexicographically descending."""
    if k == 0:
        yield ()
        return
    def rec(rest: int, maxp: int) -> Iterator[tuple[int, ...]]:
        if rest == 0:
            yield ()
            return
        for p in range(min(rest, maxp), 0, -1):
            for tail in rec(rest - p, p):
                yield (p,) + tail
    yield from rec(k, k)


def conjugacy_class_reps(k: int) -> list[Perm]:
    """One permutation per cycle type: cycles filled with consecutive points."""
    reps = []
    for part in _partitions(k):
        p = list(range(k))
        pos = 0
        for c in part:
            for i in range(c):
                p[pos + i] = pos + (i + 1) % c
            pos += c
        reps.append(tuple(p))
    return reps


@dataclass(frozen=True)
class PermAssignment:
    """A homomorphism into S_degree given by generator images."""

    degree: int
    images: tuple[tuple[str, Perm], ...]

    def image_of(self, name: str) -> Perm:
        return dict(self.images)[name]

    @property
    def is_trivial(self) -> bool:
        ident = identity_perm(self.degree)
        return all(p == ident for _, p in self.images)

    def evaluate(self, w: Word) -> Perm:
        table = dict(self.images)
        pos = {name: table[name] for name in table}
        neg = {name: inverse_perm(p) for name, p in table.items()}
        acc = identity_perm(self.degree)
        for idx, sign in w.letters:
            name = w.alphabet.symbols[idx]
            acc = compose(acc, pos[name] if sign > 0 else neg[name])
        return acc

    def verify(self, P: FinitePresentation) -> bool:
        ident = identity_perm(self.degree)
        return all(self.evaluate(r) == ident for r in P.relators)

    def image_order(self) -> int:
        return group_order([p for _, p in self.images], self.degree)


def _compiled_relators(P: FinitePresentation) -> list[tuple[int, list[tuple[int, int]]]]:
    """(latest generator index used, letters) per relator."""
    out = []
    for r in P.relators:
        latest = max(idx for idx, _ in r.letters)
        out.append((latest, list(r.letters)))
    return out


def hom_search(
    P: FinitePresentation,
    k: int,
    mode: str = "all",
    prune: bool = True,
    shard: tuple[int, int] | None = None,
) -> list[PermAssignment]:
    """All homomorphisms P -> S_k by backtracking.

    With prune=True the first generator ranges over conjugacy-class
    representatives only, so the result is complete up to conjugating the
    whole homomorphism (every hom whose first-generator image is a
    canonical representative is found verbatim; in particular a nontrivial
    hom exists iff one is found).  With prune=False every homomorphism is
    found verbatim.  Relator evaluation cuts branches as soon as a relator
    becomes fully assigned; this never discards a genuine homomorphism.

    `shard=(s, n)` restricts the first generator's candidate list to every
    n-th entry starting at s; the union over shards equals the unsharded
    result.
    """
    if k < 1:
        raise ValueError("degree must be >= 1")
    if mode not in ("all", "first_nontrivial"):
        raise ValueError(f"unknown mode {mode!r}")
    gens = P.alphabet.symbols
    n = len(gens)
    all_perms = [tuple(p) for p in itertools.permutations(range(k))]
    ident = identity_perm(k)
    first = conjugacy_class_reps(k) if prune else list(all_perms)
    if shard is not None:
        s, nsh = shard
        first = first[s::nsh]
    rel_by_latest: dict[int, list[list[tuple[int, int]]]] = {}
    for latest, letters in _compiled_relators(P):
        rel_by_latest.setdefault(latest, []).append(letters)

    assigned: list[Perm] = []
    inverses: list[Perm] = []
    results: list[PermAssignment] = []

    def relators_ok(level: int) -> bool:
        for letters in rel_by_latest.get(level, ()):
            acc = ident
            for idx, sign in letters:
                acc = compose(acc, assigned[idx] if sign > 0 else inverses[idx])
            if acc != ident:
                return False
        return True

    def rec(level: int) -> bool:
        if level == n:
            hom = PermAssignment(k, tuple(zip(gens, assigned)))
            if mode == "first_nontrivial" and hom.is_trivial:
                return False
            results.append(hom)
            return mode == "first_nontrivial"
        candidates = first if level == 0 else all_perms
        for p in candidates:
            assigned.append(p)
            inverses.append(inverse_perm(p))
            if relators_ok(level) and rec(level + 1):
                return True
            assigned.pop()
            inverses.pop()
        return False

    rec(0)
    for hom in results:
        if not hom.verify(P):
            raise AssertionError("hom_search produced a non-homomorphism (internal error)")
    return results


def brute_force_homs(P: FinitePresentation, k: int) -> list[PermAssignment]:
    """Raw product enumeration (no backtracking); independent oracle for
    small inputs."""
    gens = P.alphabet.symbols
    all_perms = [tuple(p) for p in itertools.permutations(range(k))]
    ident = identity_perm(k)
    out = []
    for combo in itertools.product(all_perms, repeat=len(gens)):
        hom = PermAssignment(k, tuple(zip(gens, combo)))
        if all(hom.evaluate(r) == ident for r in P.relators):
            out.append(hom)
    return out


@dataclass
class QuotientCertificate:
    """Bounded 'no nontrivial finite quotients' certificate: exhaustive up
    to S_max_degree, never a claim about larger degrees."""

    presentation: FinitePresentation
    max_degree: int
    certified: bool
    counterexample: PermAssignment | None
    degrees_checked: list[int]

    def describe(self) -> str:
        if self.certified:
            return (f"no nontrivial homomorphism to S_k for any k <= {self.max_degree} "
                    f"(bounded certificate, not a proof for all k)")
        assert self.counterexample is not None
        return f"nontrivial homomorphism into S_{self.counterexample.degree} found"


def finite_quotient_certificate(P: FinitePresentation, K: int,
                                prune: bool = True) -> QuotientCertificate:
    if K < 2:
        raise ValueError("certificate degree bound must be >= 2")
    checked = []
    for k in range(2, K + 1):
        found = hom_search(P, k, mode="first_nontrivial", prune=prune)
        checked.append(k)
        if found:
            return QuotientCertificate(P, K, False, found[0], checked)
    return QuotientCertificate(P, K, True, None, checked)


# --- coset enumeration -----------------------------------------------------

@dataclass
class CosetTable:
    """Result of coset enumeration.

    status is "complete" (index == number of live cosets, action verified)
    or "overflow" (budget exhausted; never treated as an answer).
    """

    status: str
    index: int | None
    generator_perms: dict[str, Perm] | None
    cosets_defined: int
    max_cosets: int
    subgroup_generators: tuple[str, ...] = ()

    @property
    def complete(self) -> bool:
        return self.status == "complete"

    def evaluate(self, w: Word) -> Perm:
        if not self.complete:
            raise ValueError("cannot evaluate words against an incomplete table")
        assert self.generator_perms is not None
        acc = identity_perm(self.index or 0)
        for idx, sign in w.letters:
            p = self.generator_perms[w.alphabet.symbols[idx]]
            acc = compose(acc, p if sign > 0 else inverse_perm(p))
        return acc

    def acts_trivially(self, w: Word) -> bool:
        """Whether w acts as the identity on the cosets.  Over the trivial
        subgroup this decides the word problem (regular action)."""
        return self.evaluate(w) == identity_perm(self.index or 0)


def todd_coxeter(
    P: FinitePresentation,
    subgroup_gens: Sequence[Word] = (),
    max_cosets: int = 100_000,
) -> CosetTable:
    """Enumerate cosets of <subgroup_gens> in the presented group.

    Deterministic: cosets are processed in creation order; tracing a word
    defines missing edges in scanning order; coincidences are merged
    immediately through a union-find over coset labels.  The count of all
    cosets ever defined (including ones later merged away) is capped by
    max_cosets; exceeding the cap returns an overflow table.
    """
    if max_cosets < 1:
        raise ValueError("max_cosets must be >= 1")
    ngens = P.alphabet.rank
    nlabels = 2 * ngens  # 2i = generator i, 2i+1 = its inverse

    def word_labels(w: Word) -> list[int]:
        return [2 * idx + (0 if sign > 0 else 1) for idx, sign in w.letters]

    # built-in paths g g^-1 and g^-1 g force inverse consistency; scanning
    # them at every coset also guarantees a complete table on termination
    involution_paths = [[2 * i, 2 * i + 1] for i in range(ngens)]
    involution_paths += [[2 * i + 1, 2 * i] for i in range(ngens)]
    relator_paths = [word_labels(r) for r in P.relators] + involution_paths

    labels: list[int] = []
    neighbors: list[list[int | None]] = []

    def add_coset() -> int | None:
        if len(labels) >= max_cosets:
            return None
        c = len(labels)
        labels.append(c)
        neighbors.append([None] * nlabels)
        return c

    def find(c: int) -> int:
        root = c
        while labels[root] != root:
            root = labels[root]
        while labels[c] != root:
            labels[c], c = root, labels[c]
        return root

    def unify(c1: int, c2: int) -> None:
        stack = [(c1, c2)]
        while stack:
            a, b = stack.pop()
            a, b = find(a), find(b)
            if a == b:
                continue
            if a > b:
                a, b = b, a
            labels[b] = a
            ra, rb = neighbors[a], neighbors[b]
            for d in range(nlabels):
                nb = rb[d]
                if nb is None:
                    continue
                if ra[d] is None:
                    ra[d] = nb
                else:
                    stack.append((ra[d], nb))

    overflow = False

    def follow(c: int, path: list[int]) -> int | None:
        nonlocal overflow
        c = find(c)
        for d in path:
            nxt = neighbors[c][d]
            if nxt is None:
                nc = add_coset()
                if nc is None:
                    overflow = True
                    return None
                neighbors[c][d] = nc
                neighbors[nc][d ^ 1] = c
                c = nc
            else:
                c = find(nxt)
        return c

    start = add_coset()
    assert start == 0
    for w in subgroup_gens:
        if w.alphabet != P.alphabet:
            raise ValueError("subgroup generator over the wrong alphabet")
        end = follow(0, word_labels(w))
        if end is None:
            break
        unify(end, 0)

    to_visit = 0
    while not overflow and to_visit < len(labels):
        c = find(to_visit)
        if c == to_visit:
            for path in relator_paths:
                end = follow(c, path)
                if end is None:
                    break
                unify(end, find(c))
            if overflow:
                break
        to_visit += 1

    if overflow:
        return CosetTable(
            status="overflow", index=None, generator_perms=None,
            cosets_defined=len(labels), max_cosets=max_cosets,
            subgroup_generators=tuple(render_word(w) for w in subgroup_gens))

    live = [c for c in range(len(labels)) if find(c) == c]
    renum = {c: i for i, c in enumerate(live)}
    perms: dict[str, Perm] = {}
    for g in range(ngens):
        images = []
        for c in live:
            img = neighbors[c][2 * g]
            if img is None:
                raise AssertionError("incomplete table at termination (internal error)")
            images.append(renum[find(img)])
        perms[P.alphabet.symbols[g]] = tuple(images)

    table = CosetTable(
        status="complete", index=len(live), generator_perms=perms,
        cosets_defined=len(labels), max_cosets=max_cosets,
        subgroup_generators=tuple(render_word(w) for w in subgroup_gens))

    # post-hoc verification: permutation action, relators, subgroup, transitivity
    ident = identity_perm(len(live))
    for r in P.relators:
        if table.evaluate(r) != ident:
            raise AssertionError("coset table violates a relator (internal error)")
    for w in subgroup_gens:
        if table.evaluate(w)[0] != 0:
            raise AssertionError("subgroup generator moves coset 0 (internal error)")
    reached = {0}
    frontier = [0]
    while frontier:
        nxt = []
        for c in frontier:
            for p in perms.values():
                for d in (p[c], inverse_perm(p)[c]):
                    if d not in reached:
                        reached.add(d)
                        nxt.append(d)
        frontier = nxt
    if len(reached) != len(live):
        raise AssertionError("coset action not transitive (internal error)")
    return table


def word_problem_oracle(P: FinitePresentation, max_cosets: int = 100_000):
    """Exact word-problem decision procedure for a presentation whose coset
    enumeration over the trivial subgroup completes (finite groups).

    Returns a callable Word -> bool.  Raises if enumeration overflows.
    """
    table = todd_coxeter(P, (), max_cosets=max_cosets)
    if not table.complete:
        raise RuntimeError(
            f"coset enumeration overflowed ({table.cosets_defined} cosets); "
            "no finite oracle available")
    return table.acts_trivially
