"""Supplementing pairs of Weyl group elements.

Given w1, w2 whose inversion sets meet in a nonempty pairwise orthogonal set
B, the supplement construction enlarges them to w1', w2' with

    Phi+(w1') cap Phi+(w2') = B      and      Phi+(w1') cup Phi+(w2') = Phi+,

and produces a reduced word of an enlargement of w1 whose final |B|
inversion positions are exactly B.  The construction follows the inductive
proof pattern: conjugate B into the simple roots using a prefix that places
B consecutively, run a two-case extension loop, transport back.

Exhaustive verifiers over all ordered pairs back both the construction and
the simple-root dichotomy it relies on.
"""

from __future__ import annotations

import json
import time
from dataclasses import dataclass, field

from .rootsys import (
    RootSystem,
    WeylWord,
    beta_sequence,
    enumerate_group,
    inversions_by_negativity,
    is_reduced,
    longest_element,
    reduce_word,
    simple_root_prefix,
)

GROUP_SIZE_GUARD = 1200


class SupplementError(RuntimeError):
    """The construction could not complete; carries the offending data."""


@dataclass
class SupplementResult:
    w1_prime: WeylWord
    w2_prime: WeylWord
    b_set: frozenset
    tail_word: WeylWord  # reduced word with B in the final |B| beta-positions


def _intersection(rs, w1, w2):
    return inversions_by_negativity(rs, w1) & inversions_by_negativity(rs, w2)


def _pairwise_orthogonal(rs, roots):
    roots = list(roots)
    return all(
        rs.pairing(a, b) == 0
        for i, a in enumerate(roots)
        for b in roots[i + 1 :]
    )


def consecutive_b_word(rs: RootSystem, w1: WeylWord, w2: WeylWord, b_set):
    """Reduced word of w1 with B at consecutive beta-positions i..i+|B|-1.

    Returns (word, start_index).  Recursive: if B is simple, pull it to the
    front; otherwise peel a simple inversion of w1 outside B and recurse on
    the reflected pair.
    """
    b_set = frozenset(b_set)
    simples = set(rs.simple_roots)
    if b_set <= simples:
        w = _front_word(rs, w1, sorted(b_set))
        return w, 0
    inv1 = inversions_by_negativity(rs, w1)
    candidates = sorted(
        beta
        for beta in inv1
        if beta in simples
        and beta not in b_set
        and any(
            all(x <= y for x, y in zip(beta, mu))
            for mu in b_set
            if mu not in simples
        )
    )
    if not candidates:
        candidates = sorted(beta for beta in inv1 if beta in simples and beta not in b_set)
    if not candidates:
        raise SupplementError(
            f"no simple inversion outside B for w1={w1!r}, B={sorted(b_set)}"
        )
    beta = candidates[0]
    i = rs.simple_roots.index(beta)
    si = WeylWord(rs, (i,))
    w1_next = reduce_word(rs, si * w1)
    w2_next = reduce_word(rs, si * w2)
    b_next = frozenset(rs.reflect_simple(i, mu) for mu in b_set)
    inner, start = consecutive_b_word(rs, w1_next, w2_next, b_next)
    out = WeylWord(rs, (i,) + inner.word)
    assert is_reduced(rs, out) and out == w1
    return out, start + 1


def _front_word(rs, w, simple_roots_list):
    """Reduced word of w starting with the given orthogonal simple inversions."""
    head = []
    rest = w
    for alpha in simple_roots_list:
        rest = simple_root_prefix(rs, rest, alpha)
        head.append(rest.word[0])
        rest = reduce_word(rs, WeylWord(rs, rest.word[1:]))
    return WeylWord(rs, tuple(head) + rest.word)


def supplement(rs: RootSystem, w1: WeylWord, w2: WeylWord) -> SupplementResult:
    """Enlarge (w1, w2) so the inversion sets tile Phi+ over B.

    Preconditions: B = Phi+(w1) cap Phi+(w2) nonempty, pairwise orthogonal.
    """
    w1 = reduce_word(rs, w1)
    w2 = reduce_word(rs, w2)
    b_set = frozenset(_intersection(rs, w1, w2))
    if not b_set:
        raise SupplementError("intersection of inversion sets is empty")
    if not _pairwise_orthogonal(rs, b_set):
        raise SupplementError("intersection is not pairwise orthogonal")

    w1_word, start = consecutive_b_word(rs, w1, w2, b_set)
    prefix_letters = w1_word.word[:start]
    prefix = WeylWord(rs, prefix_letters)
    prefix_inv = prefix.inverse()

    v1 = reduce_word(rs, WeylWord(rs, w1_word.word[start:]))
    v2 = reduce_word(rs, prefix_inv * w2)
    b_conj = frozenset(prefix_inv.apply(mu) for mu in b_set)
    simples = set(rs.simple_roots)
    if not b_conj <= simples:
        raise SupplementError("conjugated intersection is not simple")
    assert _intersection(rs, v1, v2) == b_conj

    v1p, v2p = _extend_simple_case(rs, v1, v2, b_conj)

    w1p = reduce_word(rs, prefix * v1p)
    w2p = reduce_word(rs, prefix * v2p)
    result = SupplementResult(w1p, w2p, b_set, None)
    _check_postconditions(rs, w1, w2, result)
    result.tail_word = b_tail_word(rs, result)
    return result


def _extend_simple_case(rs, v1, v2, b_simple):
    """Extension loop for B contained in the simple roots.

    Case 1 appends a new inversion to v1 (smallest simple index first).
    Case 2 rewrites v1 with B occupying the tail and returns the matching
    covering partner directly.
    """
    n_pos = len(rs.positive_roots)
    inv2 = inversions_by_negativity(rs, v2)
    current = _front_word(rs, v1, sorted(b_simple))
    w0 = longest_element(rs)
    while True:
        inv1 = inversions_by_negativity(rs, current)
        if inv1 | inv2 == set(rs.positive_roots):
            return current, v2
        progressed = False
        case2_witness = None
        for i in range(rs.rank):
            gamma = rs.simple_roots[i]
            img2 = (v2.inverse() * current).apply(gamma)
            if not all(c >= 0 for c in img2) or not any(img2):
                continue
            img1 = current.apply(gamma)
            if all(c >= 0 for c in img1):
                # case 1: extend, new inversion stays outside Phi+(v2)
                current = WeylWord(rs, current.word + (i,))
                assert is_reduced(rs, current)
                progressed = True
                break
            case2_witness = gamma
        if progressed:
            continue
        if case2_witness is None:
            raise SupplementError(
                f"extension loop stalled at {current!r} vs {v2!r}"
            )
        # case 2: every candidate gamma has current(gamma) negative; the
        # element already admits a reduced word ending in the commuting
        # reflections over B.  Build it and the covering partner.
        tail = _tail_form(rs, current, frozenset(_intersection(rs, current, v2)))
        z = WeylWord(rs, tail.word[: len(tail.word) - len(b_simple)])
        v2_new = reduce_word(rs, z * w0)
        return tail, v2_new


def _tail_form(rs, w, b_set):
    """Reduced word of w whose final |B| beta-positions are exactly B.

    Requires that the reflections over B can be pulled to the front of
    w^{-1}; their images under w are -B in that situation.
    """
    winv = reduce_word(rs, w.inverse())
    inv = inversions_by_negativity(rs, winv)
    simples = set(rs.simple_roots)
    front = sorted(
        alpha
        for alpha in inv & simples
        if tuple(-c for c in w.apply(alpha)) in b_set
    )
    if len(front) != len(b_set):
        raise SupplementError(
            f"tail construction: expected {len(b_set)} front reflections, "
            f"found {len(front)}"
        )
    winv_word = _front_word(rs, winv, front)
    out = WeylWord(rs, tuple(reversed(winv_word.word)))
    assert out == w and is_reduced(rs, out)
    betas = beta_sequence(rs, out)
    if frozenset(betas[len(betas) - len(b_set) :]) != b_set:
        raise SupplementError("tail construction failed to place B last")
    return out


def _check_postconditions(rs, w1, w2, result: SupplementResult):
    inv1 = inversions_by_negativity(rs, w1)
    inv2 = inversions_by_negativity(rs, w2)
    inv1p = inversions_by_negativity(rs, result.w1_prime)
    inv2p = inversions_by_negativity(rs, result.w2_prime)
    all_pos = set(rs.positive_roots)
    if not (inv1 <= inv1p and inv2 <= inv2p):
        raise SupplementError("enlargement lost an inversion")
    if inv1p & inv2p != result.b_set:
        raise SupplementError("intersection after supplement is not B")
    if inv1p | inv2p != all_pos:
        raise SupplementError("union after supplement is not all of Phi+")


def b_tail_word(rs: RootSystem, result: SupplementResult) -> WeylWord:
    """Reduced word of w1' whose last |B| beta-values are exactly B.

    Built from the factorization through w_bar = w2' w0: the inversions of
    w_bar avoid Phi+(w2'), hence lie in Phi+(w1'), so w1' factors as
    w_bar * x with the |B| inversions of x mapping onto B.
    """
    w0 = longest_element(rs)
    w_bar = reduce_word(rs, result.w2_prime * w0)
    x = reduce_word(rs, w_bar.inverse() * result.w1_prime)
    if x.length() + w_bar.length() != result.w1_prime.length():
        raise SupplementError("w_bar factorization is not length-additive")
    out = WeylWord(rs, w_bar.word + x.word)
    if not is_reduced(rs, out) or out != result.w1_prime:
        raise SupplementError("w_bar factorization failed")
    betas = beta_sequence(rs, out)
    tail = frozenset(betas[len(betas) - len(result.b_set) :])
    if tail != result.b_set:
        raise SupplementError(f"tail is {sorted(tail)}, expected B")
    return out


# ---------------------------------------------------------------------------
# exhaustive verifiers
# ---------------------------------------------------------------------------


@dataclass
class Report:
    kind: str
    type_label: str
    rank: int
    pairs_checked: int = 0
    counterexamples: list = field(default_factory=list)
    elapsed: float = 0.0

    @property
    def ok(self):
        return not self.counterexamples

    def to_json(self):
        return json.dumps(
            {
                "kind": self.kind,
                "type": self.type_label,
                "rank": self.rank,
                "pairs_checked": self.pairs_checked,
                "counterexamples": [str(c) for c in self.counterexamples],
                "elapsed_seconds": round(self.elapsed, 3),
            }
        )

    def summary(self):
        return (
            f"{self.kind} {self.type_label}{self.rank}: "
            f"{len(self.counterexamples)} counterexamples / "
            f"{self.pairs_checked} pairs in {self.elapsed:.2f}s"
        )


def _valid_pairs(rs, elements):
    invs = [inversions_by_negativity(rs, w) for w in elements]
    for i1, w1 in enumerate(elements):
        for i2, w2 in enumerate(elements):
            inter = invs[i1] & invs[i2]
            if not inter:
                continue
            if _pairwise_orthogonal(rs, inter):
                yield w1, w2, inter


def verify_kinb(rs: RootSystem, guard: int = GROUP_SIZE_GUARD) -> Report:
    """Check the simple-root dichotomy for every ordered pair.

    For each (w1, w2) with nonempty pairwise orthogonal intersection B:
    either some simple inversion of w1 lies outside B, or the number of
    simple inversions of w1 equals |B|.
    """
    t0 = time.time()
    elements = enumerate_group(rs, guard)
    report = Report("kinb", rs.type_label, rs.rank)
    simples = set(rs.simple_roots)
    for w1, w2, inter in _valid_pairs(rs, elements):
        report.pairs_checked += 1
        simple_inv = inversions_by_negativity(rs, w1) & simples
        if any(alpha not in inter for alpha in simple_inv):
            continue
        if len(simple_inv) == len(inter):
            continue
        report.counterexamples.append((w1, w2, sorted(inter)))
    report.elapsed = time.time() - t0
    return report


def verify_supplement_exhaustive(
    rs: RootSystem, guard: int = GROUP_SIZE_GUARD
) -> Report:
    """Run the supplement and tail-word constructions on every valid pair and
    assert every postcondition."""
    t0 = time.time()
    elements = enumerate_group(rs, guard)
    report = Report("supplement", rs.type_label, rs.rank)
    n_pos = len(rs.positive_roots)
    for w1, w2, inter in _valid_pairs(rs, elements):
        report.pairs_checked += 1
        try:
            result = supplement(rs, w1, w2)
            if (
                result.w1_prime.length() + result.w2_prime.length()
                != n_pos + len(result.b_set)
            ):
                raise SupplementError("length bookkeeping violated")
        except SupplementError as exc:
            report.counterexamples.append((w1, w2, str(exc)))
    report.elapsed = time.time() - t0
    return report
