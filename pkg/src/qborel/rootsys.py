"""Finite root systems and Weyl group combinatorics.

Roots are coordinate vectors over the simple-root basis.  Weyl group
elements are identified by their integer action matrix on that basis, with
reduced words carried alongside for all word-dependent data (inversion
sequences, deletion sets, prefix extraction).
"""

from __future__ import annotations

from fractions import Fraction
from functools import lru_cache
from itertools import combinations

CARTAN_BUILDERS = {"A", "B", "C", "D", "G"}


def _cartan_matrix(type_label: str, rank: int):
    if type_label == "A":
        if rank < 1:
            raise ValueError("type A needs rank >= 1")
        a = [[0] * rank for _ in range(rank)]
        for i in range(rank):
            a[i][i] = 2
            if i + 1 < rank:
                a[i][i + 1] = -1
                a[i + 1][i] = -1
        d = [1] * rank
        return a, d
    if type_label in ("B", "C"):
        if rank < 2:
            raise ValueError(f"type {type_label} needs rank >= 2")
        a = [[0] * rank for _ in range(rank)]
        for i in range(rank):
            a[i][i] = 2
            if i + 1 < rank:
                a[i][i + 1] = -1
                a[i + 1][i] = -1
        # last simple root short for B, long for C
        if type_label == "B":
            a[rank - 2][rank - 1] = -2
            d = [2] * (rank - 1) + [1]
        else:
            a[rank - 1][rank - 2] = -2
            d = [1] * (rank - 1) + [2]
        return a, d
    if type_label == "D":
        if rank < 3:
            raise ValueError("type D needs rank >= 3")
        a = [[0] * rank for _ in range(rank)]
        for i in range(rank):
            a[i][i] = 2
        for i in range(rank - 2):
            a[i][i + 1] = -1
            a[i + 1][i] = -1
        a[rank - 3][rank - 1] = -1
        a[rank - 1][rank - 3] = -1
        d = [1] * rank
        return a, d
    if type_label == "G":
        if rank != 2:
            raise ValueError("type G needs rank 2")
        a = [[2, -1], [-3, 2]]
        d = [1, 3]
        return a, d
    raise ValueError(f"unsupported type {type_label!r}")


class RootSystem:
    """Root system data: Cartan matrix, bilinear form, positive roots.

    The symmetric bilinear form is normalized so short roots have square
    length 2: (alpha_i, alpha_j) = d_j * c_ij.
    """

    def __init__(self, type_label: str, rank: int):
        a, d = _cartan_matrix(type_label, rank)
        self.type_label = type_label
        self.rank = rank
        self.cartan = a
        self.d = d
        self.simple_roots = [
            tuple(1 if j == i else 0 for j in range(rank)) for i in range(rank)
        ]
        self.positive_roots = self._generate_positive_roots()
        self._pos_set = set(self.positive_roots)
        self._root_set = self._pos_set | {
            tuple(-c for c in r) for r in self.positive_roots
        }

    # -- construction -------------------------------------------------------

    def _generate_positive_roots(self):
        seen = set(self.simple_roots)
        frontier = list(self.simple_roots)
        while frontier:
            nxt = []
            for r in frontier:
                for i in range(self.rank):
                    img = self.reflect_simple(i, r)
                    if all(c >= 0 for c in img) and img not in seen and any(img):
                        seen.add(img)
                        nxt.append(img)
            frontier = nxt
        return sorted(seen, key=lambda r: (sum(r), r))

    # -- basic operations ----------------------------------------------------

    def pairing(self, mu, nu) -> int:
        """Symmetric bilinear form (mu, nu) on the root lattice."""
        total = 0
        for i, ci in enumerate(mu):
            if not ci:
                continue
            for j, cj in enumerate(nu):
                if cj:
                    total += ci * cj * self.d[j] * self.cartan[i][j]
        return total

    def is_root(self, mu) -> bool:
        return tuple(mu) in self._root_set

    def is_positive_root(self, mu) -> bool:
        return tuple(mu) in self._pos_set

    def reflect_simple(self, i: int, mu):
        """Image of mu under the reflection in simple root i (0-based)."""
        c = sum(mu[j] * self.cartan[j][i] for j in range(self.rank))
        out = list(mu)
        out[i] -= c
        return tuple(out)

    def reflect_root(self, beta, mu):
        """Image of mu under the reflection in an arbitrary root beta."""
        num = 2 * self.pairing(mu, beta)
        den = self.pairing(beta, beta)
        c = Fraction(num, den)
        if c.denominator != 1:
            raise ValueError("reflection produced a non-lattice vector")
        return tuple(m - int(c) * b for m, b in zip(mu, beta))

    def height(self, mu) -> int:
        return sum(mu)

    # -- type A interval notation --------------------------------------------

    def interval_form(self, mu):
        """[m1, m2] (1-based) when mu is a 0/1 interval root in type A."""
        if self.type_label != "A":
            return None
        support = [i for i, c in enumerate(mu) if c]
        if not support or any(mu[i] != 1 for i in support):
            return None
        if support != list(range(support[0], support[-1] + 1)):
            return None
        return (support[0] + 1, support[-1] + 1)

    def root_from_interval(self, m1: int, m2: int):
        if not (1 <= m1 <= m2 <= self.rank):
            raise ValueError("interval out of range")
        return tuple(1 if m1 - 1 <= i <= m2 - 1 else 0 for i in range(self.rank))

    def root_name(self, mu) -> str:
        iv = self.interval_form(mu)
        if iv:
            return f"[{iv[0]},{iv[1]}]"
        return "(" + ",".join(str(c) for c in mu) + ")"


def componentwise_lt(a, b) -> bool:
    """Strict in every coordinate."""
    return all(x < y for x, y in zip(a, b))


def componentwise_leq(a, b) -> bool:
    return all(x <= y for x, y in zip(a, b))


def dominated_strictly(a, b) -> bool:
    """Componentwise <= and not equal."""
    return componentwise_leq(a, b) and a != b


# ---------------------------------------------------------------------------
# Weyl words
# ---------------------------------------------------------------------------


class WeylWord:
    """Weyl group element carried as a word in simple reflections.

    Equality and hashing go through the action matrix on the simple-root
    basis, so two words are equal iff they define the same group element.
    """

    __slots__ = ("rs", "word", "matrix")

    def __init__(self, rs: RootSystem, word=()):
        self.rs = rs
        self.word = tuple(word)
        m = _identity(rs.rank)
        for i in self.word:
            if not 0 <= i < rs.rank:
                raise ValueError(f"simple index {i} out of range")
            m = _compose(rs, m, i)
        self.matrix = m

    @staticmethod
    def _from_parts(rs, word, matrix):
        w = WeylWord.__new__(WeylWord)
        w.rs = rs
        w.word = tuple(word)
        w.matrix = matrix
        return w

    def apply(self, mu):
        """w(mu) via the cached action matrix (columns are images of simples)."""
        out = [0] * self.rs.rank
        for j, c in enumerate(mu):
            if c:
                col = self.matrix[j]
                for i in range(self.rs.rank):
                    out[i] += c * col[i]
        return tuple(out)

    def __mul__(self, other):
        return WeylWord._from_parts(
            self.rs,
            self.word + other.word,
            tuple(self.apply(col) for col in other.matrix),
        )

    def inverse(self):
        return WeylWord(self.rs, tuple(reversed(self.word)))

    def __eq__(self, other):
        return isinstance(other, WeylWord) and self.matrix == other.matrix

    def __hash__(self):
        return hash(self.matrix)

    def is_identity(self):
        return self.matrix == _identity(self.rs.rank)

    def length(self) -> int:
        return len(inversion_set(self.rs, reduce_word(self.rs, self)).roots)

    def __repr__(self):
        if not self.word:
            return "e"
        return " ".join(f"s{i + 1}" for i in self.word)


def _identity(n):
    return tuple(tuple(1 if i == j else 0 for i in range(n)) for j in range(n))


def _compose(rs, m, i):
    """Matrix of (current element) * s_i, columns = images of simple roots."""
    cols = list(m)
    # new column j = m(s_i(alpha_j)) = m(alpha_j) - c_{j,i} m(alpha_i)
    new_cols = []
    for j in range(rs.rank):
        c = rs.cartan[j][i]
        col = tuple(a - c * b for a, b in zip(cols[j], cols[i]))
        new_cols.append(col)
    return tuple(new_cols)


def word(rs: RootSystem, indices) -> WeylWord:
    """Build a word from 1-based simple reflection indices."""
    return WeylWord(rs, tuple(i - 1 for i in indices))


def parse_word(rs: RootSystem, text: str) -> WeylWord:
    """Parse 's1 s2 s3' (or 'e' for the identity)."""
    text = text.strip()
    if text in ("", "e", "1"):
        return WeylWord(rs, ())
    idx = []
    for tok in text.split():
        if not tok.startswith("s"):
            raise ValueError(f"bad reflection token {tok!r}")
        idx.append(int(tok[1:]))
    return word(rs, idx)


class InversionSet:
    """Ordered sequence beta_1..beta_l attached to a reduced word."""

    __slots__ = ("rs", "word", "roots")

    def __init__(self, rs, w: WeylWord, roots):
        self.rs = rs
        self.word = w
        self.roots = tuple(roots)

    def as_set(self):
        return frozenset(self.roots)

    def __len__(self):
        return len(self.roots)

    def __iter__(self):
        return iter(self.roots)

    def __repr__(self):
        return "(" + ", ".join(self.rs.root_name(b) for b in self.roots) + ")"


def beta_sequence(rs: RootSystem, w: WeylWord):
    """beta_k = s_{i_1}...s_{i_{k-1}}(alpha_{i_k}); negative entries signal a
    non-reduced word."""
    betas = []
    prefix = WeylWord(rs, ())
    for i in w.word:
        betas.append(prefix.apply(rs.simple_roots[i]))
        prefix = prefix * WeylWord(rs, (i,))
    return betas


def is_reduced(rs: RootSystem, w: WeylWord) -> bool:
    return all(any(c > 0 for c in b) for b in beta_sequence(rs, w))


def reduce_word(rs: RootSystem, w: WeylWord) -> WeylWord:
    """Reduced word for the same element, by repeated pair deletion.

    A word is not reduced iff some beta_k is negative; the offending pair
    (j, k) is located by walking the suffix reflections, then both letters
    are deleted.  Polynomial, no braid-move search.
    """
    letters = list(w.word)
    while True:
        betas = []
        prefix = WeylWord(rs, ())
        bad_k = None
        for k, i in enumerate(letters):
            b = prefix.apply(rs.simple_roots[i])
            if all(c <= 0 for c in b):
                bad_k = k
                break
            betas.append(b)
            prefix = prefix * WeylWord(rs, (i,))
        if bad_k is None:
            out = WeylWord(rs, tuple(letters))
            assert out == w, "reduction changed the group element"
            return out
        # find j < k with s_{i_j}..s_{i_{k-1}}(alpha_{i_k}) = alpha_{i_j}
        target = rs.simple_roots[letters[bad_k]]
        gamma = target
        j = None
        for m in range(bad_k - 1, -1, -1):
            if gamma == rs.simple_roots[letters[m]]:
                j = m
                break
            gamma = rs.reflect_simple(letters[m], gamma)
        else:
            raise AssertionError("exchange pair not found")
        del letters[bad_k]
        del letters[j]


def inversion_set(rs: RootSystem, w: WeylWord) -> InversionSet:
    """Ordered inversion sequence of (a reduced form of) w."""
    wr = w if is_reduced(rs, w) else reduce_word(rs, w)
    return InversionSet(rs, wr, beta_sequence(rs, wr))


def inversions_by_negativity(rs: RootSystem, w: WeylWord):
    """{mu in Phi+ : w^{-1} mu < 0}; the word-free characterization."""
    winv = w.inverse()
    return frozenset(
        mu for mu in rs.positive_roots if all(c <= 0 for c in winv.apply(mu))
    )


def weak_order_leq(rs: RootSystem, v: WeylWord, w: WeylWord) -> bool:
    return inversions_by_negativity(rs, v) <= inversions_by_negativity(rs, w)


def longest_element(rs: RootSystem) -> WeylWord:
    """The longest element, built greedily; sends every positive root down."""
    w = WeylWord(rs, ())
    letters = []
    while True:
        for i in range(rs.rank):
            if any(c > 0 for c in w.apply(rs.simple_roots[i])):
                # appending s_i increases length
                letters.append(i)
                w = w * WeylWord(rs, (i,))
                break
        else:
            return WeylWord(rs, tuple(letters))


def simple_root_prefix(rs: RootSystem, w: WeylWord, alpha) -> WeylWord:
    """A reduced word for w starting with the reflection in the simple alpha."""
    alpha = tuple(alpha)
    try:
        i = rs.simple_roots.index(alpha)
    except ValueError:
        raise ValueError("alpha is not a simple root")
    if alpha not in inversions_by_negativity(rs, w):
        raise ValueError("alpha is not an inversion of w")
    rest = WeylWord(rs, (i,)) * w
    rest = reduce_word(rs, rest)
    out = WeylWord(rs, (i,) + rest.word)
    assert out == w and is_reduced(rs, out)
    return out


def prefix_word(rs: RootSystem, w: WeylWord, alphas) -> WeylWord:
    """Reduced word of w starting with reflections in the given pairwise
    orthogonal simple roots (in the given order)."""
    head = []
    rest = w
    for alpha in alphas:
        rest = simple_root_prefix(rs, rest, alpha)
        head.append(rest.word[0])
        rest = reduce_word(rs, WeylWord(rs, rest.word[1:]))
    return WeylWord(rs, tuple(head) + rest.word)


def strongly_orthogonal(rs: RootSystem, mu, nu) -> bool:
    """True iff no rational combination m*mu + n*nu (m, n nonzero) is a root.

    Requires (mu, nu) = 0.
    """
    if rs.pairing(mu, nu) != 0:
        raise ValueError("roots are not orthogonal")
    for rho in rs._root_set:
        sol = _solve_2d(mu, nu, rho)
        if sol is not None:
            m, n = sol
            if m != 0 and n != 0:
                return False
    return True


def _solve_2d(mu, nu, rho):
    """Rational (m, n) with m*mu + n*nu = rho, or None."""
    # pick two independent coordinates
    n_coords = len(mu)
    for i in range(n_coords):
        for j in range(i + 1, n_coords):
            det = mu[i] * nu[j] - mu[j] * nu[i]
            if det:
                m = Fraction(rho[i] * nu[j] - rho[j] * nu[i], det)
                n = Fraction(mu[i] * rho[j] - mu[j] * rho[i], det)
                if all(m * a + n * b == c for a, b, c in zip(mu, nu, rho)):
                    return (m, n)
                return None
    return None


def t_w_sets(rs: RootSystem, w: WeylWord):
    """All pairwise orthogonal Theta in the inversion set of w whose combined
    reflection drops the length by exactly |Theta|.

    Computed per the deletion criterion on a reduced word and cross-checked
    against the direct length computation.
    """
    wr = w if is_reduced(rs, w) else reduce_word(rs, w)
    betas = beta_sequence(rs, wr)
    l = len(betas)
    out = []
    positions = range(l)
    # orthogonality graph on positions
    orth = {
        (a, b): rs.pairing(betas[a], betas[b]) == 0
        for a in positions
        for b in positions
        if a < b
    }

    def extend(chosen, start):
        out.append(tuple(chosen))
        for k in range(start, l):
            if all(orth[(c, k)] for c in chosen):
                chosen.append(k)
                extend(chosen, k + 1)
                chosen.pop()

    extend([], 0)
    result = []
    for subset in out:
        keep = [i for i in positions if i not in subset]
        deleted = WeylWord(rs, tuple(wr.word[i] for i in keep))
        deletion_ok = is_reduced(rs, deleted)
        # direct cross-check: product of reflections drops length additively
        prod = wr
        for i in subset:
            prod = reflection_word(rs, betas[i]) * prod
        length_ok = reduce_word(rs, prod).length() == l - len(subset)
        if deletion_ok != length_ok:
            raise AssertionError("deletion criterion and length computation disagree")
        if deletion_ok:
            result.append(frozenset(betas[i] for i in subset))
    # deduplicate: distinct position sets give distinct root sets (betas distinct)
    return sorted(set(result), key=lambda s: (len(s), sorted(s)))


def reflection_word(rs: RootSystem, beta) -> WeylWord:
    """The reflection in an arbitrary positive root, as a Weyl word."""
    if beta in rs.simple_roots:
        return WeylWord(rs, (rs.simple_roots.index(beta),))
    # conjugate down: find simple alpha with s_alpha(beta) < beta in height
    for i in range(rs.rank):
        img = rs.reflect_simple(i, beta)
        if sum(img) < sum(beta) and any(c > 0 for c in img):
            inner = reflection_word(rs, img)
            si = WeylWord(rs, (i,))
            return si * inner * si
    raise ValueError(f"not a positive root: {beta}")


def delete_support_reflections(rs: RootSystem, w: WeylWord, supp) -> WeylWord:
    """Product of the reflections in supp times w; equivalently, w with the
    word letters at the supp beta-positions deleted (supp pairwise orthogonal
    inside the inversion set)."""
    prod = w
    for beta in supp:
        prod = reflection_word(rs, beta) * prod
    return reduce_word(rs, prod)


@lru_cache(maxsize=None)
def _group_elements_cached(type_label, rank, guard):
    rs = RootSystem(type_label, rank)
    return enumerate_group(rs, guard)


def enumerate_group(rs: RootSystem, guard: int = 1200):
    """All group elements with shortlex-canonical reduced words (BFS)."""
    ident = WeylWord(rs, ())
    seen = {ident.matrix: ident}
    frontier = [ident]
    while frontier:
        nxt = []
        for w in frontier:
            for i in range(rs.rank):
                # ascent check keeps words reduced
                if any(c > 0 for c in w.apply(rs.simple_roots[i])):
                    ww = w * WeylWord(rs, (i,))
                    if ww.matrix not in seen:
                        seen[ww.matrix] = ww
                        nxt.append(ww)
                        if len(seen) > guard:
                            raise ValueError(
                                f"group size exceeds guard {guard}"
                            )
        frontier = nxt
    return sorted(seen.values(), key=lambda w: (len(w.word), w.word))


def build_root_system(type_label: str, rank: int) -> RootSystem:
    return RootSystem(type_label, rank)
