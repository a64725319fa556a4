"""Exact normal-form engine for the quantized enveloping algebra of sl_n.

Elements are kept in the triangular normal form

    sum  c * F-monomial * K-monomial * E-monomial

where the E- and F-monomials are exponent vectors over the root vectors of a
fixed reduced word for the longest Weyl group element (the convex order),
and the K-monomial is a lattice vector.  Root vectors are built through the
braid-group automorphisms; straightening an arbitrary product into this form
proceeds in two stages:

1. word level: cross E-letters past F-letters with the mixed commutation
   relation, collecting K-terms, until every term reads F-word K E-word;
2. each side is re-expressed in the PBW basis of its degree component by
   exact linear algebra: first reduce modulo an echelonized spanning set of
   the degree component of the two-sided Serre ideal, then solve against the
   (ideal-reduced) expansions of the PBW monomials.

Stage 2 avoids any completion/confluence machinery; canonicity of the normal
form is a consequence of linear algebra, and the associativity and
representation-evaluation suites in the tests double-check the arithmetic.
"""

from __future__ import annotations

from fractions import Fraction
from itertools import product as iproduct

from .coeff import (
    RationalFunction,
    SC_ONE,
    SC_ZERO,
    Scalar,
    rfq_const,
    rfq_qpow,
    sc_const,
    sc_from_rfq,
    sc_qpow,
)
from .rootsys import (
    RootSystem,
    WeylWord,
    beta_sequence,
    build_root_system,
    is_reduced,
    longest_element,
)

MAX_RANK_N = 5


def _as_scalar(c):
    if isinstance(c, RationalFunction):
        from .coeff import is_q_level

        return sc_from_rfq(c) if is_q_level(c) else c
    if isinstance(c, (int, Fraction)):
        return sc_const(c)
    raise TypeError(f"cannot coerce {c!r} to a scalar")


class AlgebraElement:
    """Linear combination of normal-form monomials with scalar coefficients.

    A monomial is a triple (f_exps, k_vec, e_exps): exponents of the F root
    vectors, the K lattice vector, exponents of the E root vectors, all
    relative to the context's convex order.
    """

    __slots__ = ("ctx", "terms")

    def __init__(self, ctx, terms=None):
        self.ctx = ctx
        t = {}
        if terms:
            for m, c in terms.items():
                c = _as_scalar(c)
                if c:
                    t[m] = c
        self.terms = t

    def is_zero(self):
        return not self.terms

    def __bool__(self):
        return bool(self.terms)

    def __eq__(self, other):
        return (
            isinstance(other, AlgebraElement)
            and self.ctx is other.ctx
            and self.terms == other.terms
        )

    def __hash__(self):
        return hash(frozenset(self.terms.items()))

    def __add__(self, other):
        t = dict(self.terms)
        for m, c in other.terms.items():
            v = t.get(m)
            v = c if v is None else v + c
            if v:
                t[m] = v
            else:
                t.pop(m, None)
        out = AlgebraElement.__new__(AlgebraElement)
        out.ctx = self.ctx
        out.terms = t
        return out

    def __neg__(self):
        out = AlgebraElement.__new__(AlgebraElement)
        out.ctx = self.ctx
        out.terms = {m: -c for m, c in self.terms.items()}
        return out

    def __sub__(self, other):
        return self + (-other)

    def scale(self, c):
        c = _as_scalar(c)
        if not c:
            return self.ctx.zero()
        out = AlgebraElement.__new__(AlgebraElement)
        out.ctx = self.ctx
        out.terms = {m: v * c for m, v in self.terms.items()}
        return out

    def __mul__(self, other):
        if isinstance(other, (int, Fraction, RationalFunction, Scalar)):
            return self.scale(other)
        ctx = self.ctx
        acc = {}
        for m1, c1 in self.terms.items():
            for m2, c2 in other.terms.items():
                c12 = c1 * c2
                for m, c in ctx._mono_mul(m1, m2).items():
                    v = acc.get(m)
                    v = c * c12 if v is None else v + c * c12
                    if v:
                        acc[m] = v
                    else:
                        acc.pop(m, None)
        out = AlgebraElement.__new__(AlgebraElement)
        out.ctx = ctx
        out.terms = acc
        return out

    def __rmul__(self, other):
        if isinstance(other, (int, Fraction, RationalFunction, Scalar)):
            return self.scale(other)
        return NotImplemented

    def degrees(self):
        """Set of root-lattice degrees of the monomials (K part is degree 0)."""
        return {self.ctx.monomial_degree(m) for m in self.terms}

    def is_homogeneous(self):
        return len(self.degrees()) <= 1

    def degree(self):
        degs = self.degrees()
        if len(degs) != 1:
            raise ValueError("element is zero or not homogeneous")
        return next(iter(degs))

    def __repr__(self):
        return render_element(self)


class AlgebraContext:
    """Generators, root vectors and straightening data for U_q(sl_n)."""

    def __init__(self, n: int, w0_word=None):
        if not 2 <= n <= MAX_RANK_N:
            raise ValueError(f"rank guard: need 2 <= n <= {MAX_RANK_N}")
        self.n = n
        self.rank = n - 1
        self.rs = build_root_system("A", self.rank)
        if w0_word is None:
            letters = []
            for row in range(self.rank):
                letters.extend(range(row, -1, -1))
            w0 = WeylWord(self.rs, tuple(letters))
        else:
            w0 = w0_word if isinstance(w0_word, WeylWord) else WeylWord(self.rs, tuple(w0_word))
        if not is_reduced(self.rs, w0) or w0 != longest_element(self.rs):
            raise ValueError("w0_word must be a reduced word for the longest element")
        self.w0 = w0
        self.convex_order = tuple(beta_sequence(self.rs, w0))
        self.npos = len(self.convex_order)
        self.root_position = {b: k for k, b in enumerate(self.convex_order)}
        self._zero_k = (0,) * self.rank

        self._push_memo = {}
        self._cross_memo = {}
        self._mono_memo = {}
        self._words_by_degree = {}
        self._ideal_ech = {}
        self._word_bases = {}
        self._econcat_memo = {}
        self._fconcat_memo = {}
        self._emono_words_memo = {}
        self._fmono_words_memo = {}
        self._t_letter_memo = {}

        self._main_e = self.get_word_basis(w0.word, "E")
        self._main_f = self.get_word_basis(w0.word, "F")

    # -- scalars and small helpers ------------------------------------------

    def q_power(self, k: int) -> Scalar:
        return sc_qpow(k)

    def pairing(self, mu, nu) -> int:
        return self.rs.pairing(mu, nu)

    def monomial_degree(self, m):
        f, k, e = m
        out = [0] * self.rank
        for pos, a in enumerate(e):
            if a:
                b = self.convex_order[pos]
                for i in range(self.rank):
                    out[i] += a * b[i]
        for pos, a in enumerate(f):
            if a:
                b = self.convex_order[pos]
                for i in range(self.rank):
                    out[i] -= a * b[i]
        return tuple(out)

    def _deg_of_letters(self, word):
        out = [0] * self.rank
        for i in word:
            out[i] += 1
        return tuple(out)

    def _pair_vec(self, mu, nu):
        return self.rs.pairing(mu, nu)

    # -- element constructors -------------------------------------------------

    def zero(self) -> AlgebraElement:
        return AlgebraElement(self, {})

    def one(self) -> AlgebraElement:
        m = ((0,) * self.npos, self._zero_k, (0,) * self.npos)
        return AlgebraElement(self, {m: SC_ONE})

    def scalar(self, c) -> AlgebraElement:
        return self.one().scale(c)

    def E(self, i: int) -> AlgebraElement:
        """Simple generator E_i, 1-based index."""
        alpha = self.rs.simple_roots[i - 1]
        pos = self.root_position[alpha]
        e = tuple(1 if p == pos else 0 for p in range(self.npos))
        m = ((0,) * self.npos, self._zero_k, e)
        return AlgebraElement(self, {m: SC_ONE})

    def F(self, i: int) -> AlgebraElement:
        alpha = self.rs.simple_roots[i - 1]
        pos = self.root_position[alpha]
        f = tuple(1 if p == pos else 0 for p in range(self.npos))
        m = (f, self._zero_k, (0,) * self.npos)
        return AlgebraElement(self, {m: SC_ONE})

    def K(self, mu) -> AlgebraElement:
        """K_mu for a root-lattice vector mu (tuple of ints, may be negative)."""
        m = ((0,) * self.npos, tuple(mu), (0,) * self.npos)
        return AlgebraElement(self, {m: SC_ONE})

    def K_alpha(self, i: int, power: int = 1) -> AlgebraElement:
        vec = tuple(power if j == i - 1 else 0 for j in range(self.rank))
        return self.K(vec)

    def E_root(self, mu) -> AlgebraElement:
        """Root vector for the positive root mu in the context's convex order."""
        pos = self.root_position[tuple(mu)]
        e = tuple(1 if p == pos else 0 for p in range(self.npos))
        m = ((0,) * self.npos, self._zero_k, e)
        return AlgebraElement(self, {m: SC_ONE})

    def F_root(self, mu) -> AlgebraElement:
        pos = self.root_position[tuple(mu)]
        f = tuple(1 if p == pos else 0 for p in range(self.npos))
        m = (f, self._zero_k, (0,) * self.npos)
        return AlgebraElement(self, {m: SC_ONE})

    # -- word-level crossing ---------------------------------------------------

    def _push(self, e_word, j):
        """Straighten (E-word) * F_j into triples (f_word, k_vec, e_word)."""
        key = (e_word, j)
        hit = self._push_memo.get(key)
        if hit is not None:
            return hit
        if not e_word:
            out = {((j,), self._zero_k, ()): SC_ONE}
            self._push_memo[key] = out
            return out
        head, a = e_word[:-1], e_word[-1]
        out = {}
        for (f, k, e), c in self._push(head, j).items():
            key2 = (f, k, e + (a,))
            out[key2] = out.get(key2, SC_ZERO) + c
        if a == j:
            alpha = self.rs.simple_roots[a]
            d = self.rs.d[a]
            inv = sc_from_rfq(rfq_const(1) / (rfq_qpow(d) - rfq_qpow(-d)))
            head_deg = self._deg_of_letters(head)
            for sign in (1, -1):
                kvec = tuple(sign * x for x in alpha)
                factor = self.q_power(-sign * self._pair_vec(alpha, head_deg))
                coeff = inv * factor if sign == 1 else -(inv * factor)
                key2 = ((), kvec, head)
                v = out.get(key2, SC_ZERO) + coeff
                if v:
                    out[key2] = v
                else:
                    out.pop(key2, None)
        out = {m: c for m, c in out.items() if c}
        self._push_memo[key] = out
        return out

    def _cross(self, e_word, f_word):
        """Straighten (E-word)(F-word) into normal-ordered triples."""
        key = (e_word, f_word)
        hit = self._cross_memo.get(key)
        if hit is not None:
            return hit
        result = {((), self._zero_k, e_word): SC_ONE}
        for j in f_word:
            new = {}
            for (f, k, e), c in result.items():
                for (f2, k2, e2), c2 in self._push(e, j).items():
                    factor = (
                        self.q_power(-self._pair_vec(k, self._deg_of_letters(f2)))
                        if any(k) and f2
                        else SC_ONE
                    )
                    m = (f + f2, _addvec(k, k2), e2)
                    v = new.get(m, SC_ZERO) + c * c2 * factor
                    if v:
                        new[m] = v
                    else:
                        new.pop(m, None)
            result = new
        self._cross_memo[key] = result
        return result

    def _triple_mul(self, t1, t2):
        """Product of two triple-word linear combinations."""
        out = {}
        for (f1, k1, e1), c1 in t1.items():
            for (f2, k2, e2), c2 in t2.items():
                c12 = c1 * c2
                for (fw, kx, ew), cx in self._cross(e1, f2).items():
                    factor = SC_ONE
                    if any(k1) and fw:
                        factor = factor * self.q_power(
                            -self._pair_vec(k1, self._deg_of_letters(fw))
                        )
                    if any(k2) and ew:
                        factor = factor * self.q_power(
                            -self._pair_vec(k2, self._deg_of_letters(ew))
                        )
                    m = (f1 + fw, _addvec(_addvec(k1, kx), k2), ew + e2)
                    v = out.get(m, SC_ZERO) + c12 * cx * factor
                    if v:
                        out[m] = v
                    else:
                        out.pop(m, None)
        return out

    # -- braid automorphism letter values (triple-word form) -------------------

    def _t_letter(self, i, letter_kind, letter, inverse):
        """Value of the braid automorphism (or inverse) on one generator,
        as a triple-word combination.  Type A: Cartan entries 0 or -1."""
        key = (i, letter_kind, letter, inverse)
        hit = self._t_letter_memo.get(key)
        if hit is not None:
            return hit
        rs = self.rs
        alpha_i = rs.simple_roots[i]
        zero = self._zero_k
        if letter_kind == "K":
            raise AssertionError("K letters are handled inline")
        j = letter
        a_ij = rs.cartan[i][j]
        if letter_kind == "E":
            if j == i:
                if not inverse:
                    out = {(((i,), tuple(alpha_i), ())): -SC_ONE}
                else:
                    out = {
                        ((i,), tuple(-x for x in alpha_i), ()): -self.q_power(2)
                    }
            elif a_ij == 0:
                out = {((), zero, (j,)): SC_ONE}
            elif a_ij == -1:
                if not inverse:
                    out = {
                        ((), zero, (i, j)): SC_ONE,
                        ((), zero, (j, i)): -self.q_power(-1),
                    }
                else:
                    out = {
                        ((), zero, (j, i)): SC_ONE,
                        ((), zero, (i, j)): -self.q_power(-1),
                    }
            else:
                raise NotImplementedError("only simply-laced type A is wired")
        else:  # F letters
            if j == i:
                if not inverse:
                    out = {((), tuple(-x for x in alpha_i), (i,)): -SC_ONE}
                else:
                    out = {((), tuple(alpha_i), (i,)): -self.q_power(-2)}
            elif a_ij == 0:
                out = {((j,), zero, ()): SC_ONE}
            elif a_ij == -1:
                if not inverse:
                    out = {
                        ((j, i), zero, ()): SC_ONE,
                        ((i, j), zero, ()): -self.q_power(1),
                    }
                else:
                    out = {
                        ((i, j), zero, ()): SC_ONE,
                        ((j, i), zero, ()): -self.q_power(1),
                    }
            else:
                raise NotImplementedError("only simply-laced type A is wired")
        self._t_letter_memo[key] = out
        return out

    def _t_on_triples(self, i, triples, inverse=False):
        """Apply the braid automorphism letterwise to triple-word terms."""
        rs = self.rs
        out = {}
        for (f, k, e), c in triples.items():
            acc = {((), self._zero_k, ()): c}
            for j in f:
                acc = self._triple_mul(acc, self._t_letter(i, "F", j, inverse))
            if any(k):
                img = [0] * self.rank
                for idx, kc in enumerate(k):
                    if kc:
                        refl = rs.reflect_simple(i, rs.simple_roots[idx])
                        for t in range(self.rank):
                            img[t] += kc * refl[t]
                acc = self._triple_mul(acc, {((), tuple(img), ()): SC_ONE})
            for j in e:
                acc = self._triple_mul(acc, self._t_letter(i, "E", j, inverse))
            for m, cm in acc.items():
                v = out.get(m, SC_ZERO) + cm
                if v:
                    out[m] = v
                else:
                    out.pop(m, None)
        return out

    # -- words of a given multidegree and the quotient solvers -----------------

    def words_of_degree(self, deg):
        key = tuple(deg)
        hit = self._words_by_degree.get(key)
        if hit is not None:
            return hit
        letters = []
        for i, c in enumerate(key):
            letters.extend([i] * c)
        if not letters:
            out = [()]
        else:
            out = sorted(set(_permutations_tuple(tuple(letters))))
        self._words_by_degree[key] = out
        return out

    def _serre_relations(self):
        """Word-level spanning relations of the one-sided Serre ideal."""
        rels = []
        two = sc_qpow(1) + sc_qpow(-1)
        for i in range(self.rank):
            for j in range(self.rank):
                if i == j:
                    continue
                if self.rs.cartan[i][j] == -1:
                    rels.append(
                        {
                            (i, i, j): SC_ONE,
                            (i, j, i): -two,
                            (j, i, i): SC_ONE,
                        }
                    )
                elif self.rs.cartan[i][j] == 0 and i < j:
                    rels.append({(i, j): SC_ONE, (j, i): -SC_ONE})
        return rels

    def _ideal_echelon(self, deg):
        """Fully reduced echelon of the Serre-ideal component in degree deg."""
        key = tuple(deg)
        hit = self._ideal_ech.get(key)
        if hit is not None:
            return hit
        ech = {}
        for rel in self._serre_relations():
            rel_deg = self._deg_of_letters(next(iter(rel)))
            rem = tuple(a - b for a, b in zip(key, rel_deg))
            if any(c < 0 for c in rem):
                continue
            for left_deg in _subdegrees(rem):
                right_deg = tuple(a - b for a, b in zip(rem, left_deg))
                for u in self.words_of_degree(left_deg):
                    for v in self.words_of_degree(right_deg):
                        row = {u + w + v: c for w, c in rel.items()}
                        _echelon_insert(ech, row)
        self._ideal_ech[key] = ech
        return ech

    def get_word_basis(self, word, side):
        key = (tuple(word), side)
        hit = self._word_bases.get(key)
        if hit is None:
            hit = WordBasis(self, tuple(word), side)
            self._word_bases[key] = hit
        return hit

    # -- PBW expansion and coordinates (main convex order) ---------------------

    def _emono_words(self, e_exps):
        hit = self._emono_words_memo.get(e_exps)
        if hit is not None:
            return hit
        acc = {(): SC_ONE}
        for pos, a in enumerate(e_exps):
            for _ in range(a):
                acc = _wp_mul(acc, self._main_e.vector_words(pos))
        self._emono_words_memo[e_exps] = acc
        return acc

    def _fmono_words(self, f_exps):
        hit = self._fmono_words_memo.get(f_exps)
        if hit is not None:
            return hit
        acc = {(): SC_ONE}
        for pos, a in enumerate(f_exps):
            for _ in range(a):
                acc = _wp_mul(acc, self._main_f.vector_words(pos))
        self._fmono_words_memo[f_exps] = acc
        return acc

    def _econcat_coords(self, ew, e_exps):
        """PBW coordinates of (word) * (PBW exponent monomial) on the E side."""
        key = (ew, e_exps)
        hit = self._econcat_memo.get(key)
        if hit is None:
            wp = {ew: SC_ONE}
            if any(e_exps):
                wp = _wp_mul(wp, self._emono_words(e_exps))
            hit = self._main_e.coords(wp)
            self._econcat_memo[key] = hit
        return hit

    def _fconcat_coords(self, f_exps, fw):
        """PBW coordinates of (PBW exponent monomial) * (word) on the F side."""
        key = (f_exps, fw)
        hit = self._fconcat_memo.get(key)
        if hit is None:
            wp = {fw: SC_ONE}
            if any(f_exps):
                wp = _wp_mul(self._fmono_words(f_exps), wp)
            hit = self._main_f.coords(wp)
            self._fconcat_memo[key] = hit
        return hit

    def element_from_triples(self, triples) -> AlgebraElement:
        """Normal form of a triple-word combination."""
        zero_f = (0,) * self.npos
        zero_e = (0,) * self.npos
        acc = {}
        for (fw, k, ew), c in triples.items():
            for fexp, cf in self._fconcat_coords(zero_f, fw).items():
                for eexp, ce in self._econcat_coords(ew, zero_e).items():
                    m = (fexp, k, eexp)
                    v = acc.get(m, SC_ZERO) + c * cf * ce
                    if v:
                        acc[m] = v
                    else:
                        acc.pop(m, None)
        return AlgebraElement(self, acc)

    def monomial_to_triples(self, m):
        """Expand a normal-form monomial into triple-word terms."""
        f, k, e = m
        out = {}
        for fw, cf in self._fmono_words(f).items():
            for ew, ce in self._emono_words(e).items():
                out[(fw, k, ew)] = cf * ce
        return out

    # -- monomial multiplication -----------------------------------------------

    def _mono_mul(self, m1, m2):
        key = (m1, m2)
        hit = self._mono_memo.get(key)
        if hit is not None:
            return hit
        f1, k1, e1 = m1
        f2, k2, e2 = m2
        acc = {}
        for ew1, c_e in self._emono_words(e1).items():
            for fw2, c_f in self._fmono_words(f2).items():
                base = c_e * c_f
                for (fw, kx, ew), cx in self._cross(ew1, fw2).items():
                    factor = SC_ONE
                    if any(k1) and fw:
                        factor = factor * self.q_power(
                            -self._pair_vec(k1, self._deg_of_letters(fw))
                        )
                    if any(k2) and ew:
                        factor = factor * self.q_power(
                            -self._pair_vec(k2, self._deg_of_letters(ew))
                        )
                    c = base * cx * factor
                    kvec = _addvec(_addvec(k1, kx), k2)
                    for fexp, cf in self._fconcat_coords(f1, fw).items():
                        for eexp, ce in self._econcat_coords(ew, e2).items():
                            m = (fexp, kvec, eexp)
                            v = acc.get(m, SC_ZERO) + c * cf * ce
                            if v:
                                acc[m] = v
                            else:
                                acc.pop(m, None)
        self._mono_memo[key] = acc
        return acc


def _addvec(a, b):
    return tuple(x + y for x, y in zip(a, b))


def _wp_mul(w1, w2):
    out = {}
    for a, ca in w1.items():
        for b, cb in w2.items():
            k = a + b
            v = out.get(k, SC_ZERO) + ca * cb
            if v:
                out[k] = v
            else:
                out.pop(k, None)
    return out


def _permutations_tuple(letters):
    if not letters:
        return [()]
    seen = set()
    out = []
    for i in range(len(letters)):
        if letters[i] in seen:
            continue
        seen.add(letters[i])
        rest = letters[:i] + letters[i + 1 :]
        for tail in _permutations_tuple(rest):
            out.append((letters[i],) + tail)
    return out


def _subdegrees(deg):
    """All componentwise subvectors of deg."""
    ranges = [range(c + 1) for c in deg]
    return [tuple(t) for t in iproduct(*ranges)]


def _echelon_insert(ech, row):
    """Insert a row into a fully reduced echelon keyed by pivot word."""
    row = _echelon_reduce(ech, row)
    if not row:
        return
    pivot = max(row)
    c = row[pivot]
    row = {w: v / c for w, v in row.items()}
    # eliminate the new pivot from existing rows
    for p, r in list(ech.items()):
        if pivot in r:
            f = r[pivot]
            nr = dict(r)
            for w, v in row.items():
                nv = nr.get(w, SC_ZERO) - f * v
                if nv:
                    nr[w] = nv
                else:
                    nr.pop(w, None)
            ech[p] = nr
    ech[pivot] = row


def _echelon_reduce(ech, row):
    row = {w: c for w, c in row.items() if c}
    while True:
        hit = None
        for w in row:
            if w in ech:
                hit = w
                break
        if hit is None:
            return row
        c = row[hit]
        for w2, c2 in ech[hit].items():
            nv = row.get(w2, SC_ZERO) - c * c2
            if nv:
                row[w2] = nv
            else:
                row.pop(w2, None)
    return row


class WordBasis:
    """Root vectors and PBW coordinates along one reduced word.

    ``side`` is "E" (braid automorphisms applied to E-generators) or "F"
    (inverse automorphisms applied to F-generators).  Serves both the main
    convex order of a context and the word-adapted bases needed to evaluate
    characters on subalgebras attached to shorter words.
    """

    def __init__(self, ctx: AlgebraContext, word, side):
        self.ctx = ctx
        self.word = tuple(word)
        self.side = side
        w = WeylWord(ctx.rs, self.word)
        if not is_reduced(ctx.rs, w):
            raise ValueError("word basis requires a reduced word")
        self.betas = tuple(beta_sequence(ctx.rs, w))
        self._vectors = {}
        self._pbw_ech = {}
        self._exps_by_degree = {}

    def vector_words(self, k):
        """Word polynomial of the k-th root vector along this word."""
        hit = self._vectors.get(k)
        if hit is not None:
            return hit
        ctx = self.ctx
        letter = self.word[k]
        if self.side == "E":
            t = {((), ctx._zero_k, (letter,)): SC_ONE}
        else:
            t = {((letter,), ctx._zero_k, ()): SC_ONE}
        for j in range(k - 1, -1, -1):
            t = ctx._t_on_triples(self.word[j], t, inverse=(self.side == "F"))
        wp = {}
        for (f, kv, e), c in t.items():
            if self.side == "E":
                if f or any(kv):
                    raise AssertionError("root vector left the positive part")
                wp[e] = c
            else:
                if e or any(kv):
                    raise AssertionError("root vector left the negative part")
                wp[f] = c
        deg = self.betas[k]
        for wrd in wp:
            if self.ctx._deg_of_letters(wrd) != deg:
                raise AssertionError("root vector degree mismatch")
        self._vectors[k] = wp
        return wp

    def exps_of_degree(self, deg):
        """Exponent vectors a with sum a_k beta_k = deg (over this word)."""
        key = tuple(deg)
        hit = self._exps_by_degree.get(key)
        if hit is not None:
            return hit
        n = len(self.word)
        out = []

        def rec(pos, rem, acc):
            if pos == n:
                if not any(rem):
                    out.append(tuple(acc))
                return
            beta = self.betas[pos]
            max_a = min(
                (r // b for r, b in zip(rem, beta) if b), default=0
            )
            for a in range(max_a, -1, -1):
                nrem = tuple(r - a * b for r, b in zip(rem, beta))
                if all(c >= 0 for c in nrem):
                    acc.append(a)
                    rec(pos + 1, nrem, acc)
                    acc.pop()

        rec(0, key, [])
        # pad to the context width when this is the main basis
        self._exps_by_degree[key] = out
        return out

    def _expand_exp(self, exps):
        acc = {(): SC_ONE}
        for pos, a in enumerate(exps):
            for _ in range(a):
                acc = _wp_mul(acc, self.vector_words(pos))
        return acc

    def _solver(self, deg):
        key = tuple(deg)
        hit = self._pbw_ech.get(key)
        if hit is not None:
            return hit
        ideal = self.ctx._ideal_echelon(key)
        rows = []
        for exps in self.exps_of_degree(key):
            wp = self._expand_exp(exps)
            red = _echelon_reduce(ideal, dict(wp))
            rows.append((exps, red))
        # fully reduced echelon of the ideal-projected PBW expansions, each
        # row augmented with its PBW coordinate combination
        ech = {}
        coords = {}
        for exps, red in rows:
            row = dict(red)
            acc = {exps: SC_ONE}
            while True:
                hit2 = None
                for w in row:
                    if w in ech:
                        hit2 = w
                        break
                if hit2 is None:
                    break
                c = row[hit2]
                for w2, c2 in ech[hit2].items():
                    nv = row.get(w2, SC_ZERO) - c * c2
                    if nv:
                        row[w2] = nv
                    else:
                        row.pop(w2, None)
                for a2, c2 in coords[hit2].items():
                    nv = acc.get(a2, SC_ZERO) - c * c2
                    if nv:
                        acc[a2] = nv
                    else:
                        acc.pop(a2, None)
            if not row:
                raise AssertionError("PBW monomials are linearly dependent")
            pivot = max(row)
            c = row[pivot]
            row = {w: v / c for w, v in row.items()}
            acc = {a: v / c for a, v in acc.items()}
            for p in list(ech):
                r = ech[p]
                if pivot in r:
                    f = r[pivot]
                    nr = dict(r)
                    for w, v in row.items():
                        nv = nr.get(w, SC_ZERO) - f * v
                        if nv:
                            nr[w] = nv
                        else:
                            nr.pop(w, None)
                    ech[p] = nr
                    nc = dict(coords[p])
                    for a2, v in acc.items():
                        nv = nc.get(a2, SC_ZERO) - f * v
                        if nv:
                            nc[a2] = nv
                        else:
                            nc.pop(a2, None)
                    coords[p] = nc
            ech[pivot] = row
            coords[pivot] = acc
        out = (ideal, ech, coords)
        self._pbw_ech[key] = out
        return out

    def coords(self, wordpoly):
        """PBW coordinates of a (possibly inhomogeneous) word polynomial.

        Returns a dict exponent-vector -> scalar.  Exponent vectors are padded
        to the word length.
        """
        if not wordpoly:
            return {}
        by_deg = {}
        for w, c in wordpoly.items():
            by_deg.setdefault(self.ctx._deg_of_letters(w), {})[w] = c
        out = {}
        for deg, wp in by_deg.items():
            ideal, ech, coords = self._solver(deg)
            row = _echelon_reduce(ideal, dict(wp))
            acc = {}
            while True:
                hit = None
                for w in row:
                    if w in ech:
                        hit = w
                        break
                if hit is None:
                    break
                c = row[hit]
                for w2, c2 in ech[hit].items():
                    nv = row.get(w2, SC_ZERO) - c * c2
                    if nv:
                        row[w2] = nv
                    else:
                        row.pop(w2, None)
                for a2, c2 in coords[hit].items():
                    nv = acc.get(a2, SC_ZERO) + c * c2
                    if nv:
                        acc[a2] = nv
                    else:
                        acc.pop(a2, None)
            if row:
                raise AssertionError(
                    "word polynomial is not in the span of the PBW monomials"
                )
            for a, c in acc.items():
                v = out.get(a, SC_ZERO) + c
                if v:
                    out[a] = v
                else:
                    out.pop(a, None)
        return out


# ---------------------------------------------------------------------------
# public operations
# ---------------------------------------------------------------------------


def build_algebra(n: int, w0_word=None) -> AlgebraContext:
    return AlgebraContext(n, w0_word)


def normal_form(ctx: AlgebraContext, x: AlgebraElement) -> AlgebraElement:
    """Elements are kept normalized; provided for symmetry and parsing."""
    if isinstance(x, AlgebraElement):
        return x
    raise TypeError("normal_form expects an AlgebraElement; use parse_element")


def lusztig_T(ctx: AlgebraContext, i: int, x: AlgebraElement, inverse=False) -> AlgebraElement:
    """Braid automorphism T_i (1-based index) applied to an element."""
    out = {}
    for m, c in x.terms.items():
        t = ctx.monomial_to_triples(m)
        t = ctx._t_on_triples(i - 1, t, inverse=inverse)
        for m2, c2 in ctx.element_from_triples(t).terms.items():
            v = out.get(m2, SC_ZERO) + c * c2
            if v:
                out[m2] = v
            else:
                out.pop(m2, None)
    return AlgebraElement(ctx, out)


def lusztig_T_word(ctx: AlgebraContext, letters, x: AlgebraElement, inverse=False):
    """Composite T along a word: letters applied right-to-left, so the word
    (i1..ik) computes T_{i1} ... T_{ik}(x); with inverse=True computes
    T_{ik}^{-1} ... T_{i1}^{-1}(x)."""
    if inverse:
        for i in letters:
            x = lusztig_T(ctx, i, x, inverse=True)
        return x
    for i in reversed(letters):
        x = lusztig_T(ctx, i, x)
    return x


def root_vector(ctx: AlgebraContext, mu, sign: str) -> AlgebraElement:
    """The PBW root vector for mu in the context's convex order."""
    if sign == "E":
        return ctx.E_root(mu)
    if sign == "F":
        return ctx.F_root(mu)
    raise ValueError("sign must be 'E' or 'F'")


def q_commutator(ctx: AlgebraContext, x, y, c) -> AlgebraElement:
    """Normal form of x y - c y x."""
    return x * y - (y * x).scale(c)


# ---------------------------------------------------------------------------
# vector representation and tensor powers
# ---------------------------------------------------------------------------

REP_GUARD = 30


class RepMatrix:
    """Sparse operator on the d-th tensor power of the vector representation."""

    __slots__ = ("n", "d", "cols")

    def __init__(self, n, d, cols):
        self.n = n
        self.d = d
        self.cols = cols  # basis tuple -> {basis tuple: Scalar}

    def __eq__(self, other):
        if not isinstance(other, RepMatrix):
            return NotImplemented
        if (self.n, self.d) != (other.n, other.d):
            return False
        keys = set(self.cols) | set(other.cols)
        for k in keys:
            if self.cols.get(k, {}) != other.cols.get(k, {}):
                return False
        return True

    def is_zero(self):
        return all(not col for col in self.cols.values())

    def dense(self):
        basis = list(iproduct(*[range(1, self.n + 1)] * self.d))
        index = {b: i for i, b in enumerate(basis)}
        size = len(basis)
        out = [[SC_ZERO] * size for _ in range(size)]
        for b, col in self.cols.items():
            j = index[b]
            for b2, c in col.items():
                out[index[b2]][j] = c
        return out


def _weight_pairing(ctx, mu, j):
    """(mu, weight of the j-th vector-representation basis vector)."""
    c_prev = mu[j - 2] if j >= 2 and j - 2 < ctx.rank else 0
    c_here = mu[j - 1] if j - 1 < ctx.rank else 0
    return c_here - c_prev


def _apply_letter(ctx, kind, data, vec, d):
    """Apply one generator letter to a sparse vector on basis tuples."""
    n = ctx.n
    out = {}
    if kind == "K":
        mu = data
        for b, c in vec.items():
            power = sum(_weight_pairing(ctx, mu, j) for j in b)
            _vacc(out, b, c * ctx.q_power(power))
        return out
    i = data  # 0-based simple index
    alpha = ctx.rs.simple_roots[i]
    if kind == "E":
        for b, c in vec.items():
            for s in range(d):
                if b[s] == i + 2:
                    power = sum(_weight_pairing(ctx, alpha, b[r]) for r in range(s))
                    nb = b[:s] + (i + 1,) + b[s + 1 :]
                    _vacc(out, nb, c * ctx.q_power(power))
        return out
    if kind == "F":
        for b, c in vec.items():
            for s in range(d):
                if b[s] == i + 1:
                    power = -sum(
                        _weight_pairing(ctx, alpha, b[r]) for r in range(s + 1, d)
                    )
                    nb = b[:s] + (i + 2,) + b[s + 1 :]
                    _vacc(out, nb, c * ctx.q_power(power))
        return out
    raise ValueError(kind)


def _vacc(out, key, c):
    v = out.get(key, SC_ZERO) + c
    if v:
        out[key] = v
    else:
        out.pop(key, None)


def rep_eval(ctx: AlgebraContext, x: AlgebraElement, d: int = 1) -> RepMatrix:
    """Matrix of x on the d-th tensor power of the vector representation."""
    max_height = 0
    for m in x.terms:
        f, k, e = m
        h = sum(
            a * sum(ctx.convex_order[p]) for p, a in enumerate(e)
        ) + sum(a * sum(ctx.convex_order[p]) for p, a in enumerate(f))
        max_height = max(max_height, h)
    if d * max(1, max_height) > REP_GUARD:
        raise ValueError("representation guard exceeded")
    n = ctx.n
    cols = {}
    basis = list(iproduct(*[range(1, n + 1)] * d))
    for b in basis:
        cols[b] = {}
    for m, c in x.terms.items():
        f, k, e = m
        for ew, ce in ctx._emono_words(e).items():
            for fw, cf in ctx._fmono_words(f).items():
                for b in basis:
                    vec = {b: c * ce * cf}
                    for letter in reversed(ew):
                        vec = _apply_letter(ctx, "E", letter, vec, d)
                        if not vec:
                            break
                    if vec and any(k):
                        vec = _apply_letter(ctx, "K", k, vec, d)
                    if vec:
                        for letter in reversed(fw):
                            vec = _apply_letter(ctx, "F", letter, vec, d)
                            if not vec:
                                break
                    for b2, cv in vec.items():
                        _vacc(cols[b], b2, cv)
    return RepMatrix(n, d, cols)


# ---------------------------------------------------------------------------
# rendering and parsing of elements
# ---------------------------------------------------------------------------


def _render_kvec(k):
    parts = []
    for i, c in enumerate(k):
        if not c:
            continue
        name = f"a{i + 1}"
        if c == 1:
            term = name
        elif c == -1:
            term = f"-{name}"
        else:
            term = f"{c}{name}"
        if parts and c > 0:
            parts.append("+" + term)
        else:
            parts.append(term)
    return "".join(parts)


def render_monomial(ctx, m) -> str:
    f, k, e = m
    parts = []
    for pos, a in enumerate(f):
        if a:
            name = f"F{ctx.rs.root_name(ctx.convex_order[pos])}"
            parts.extend([name] * a)
    if any(k):
        if all(c <= 0 for c in k):
            parts.append(f"Kinv[{_render_kvec(tuple(-c for c in k))}]")
        else:
            parts.append(f"K[{_render_kvec(k)}]")
    for pos, a in enumerate(e):
        if a:
            name = f"E{ctx.rs.root_name(ctx.convex_order[pos])}"
            parts.extend([name] * a)
    if not parts:
        return "1"
    return " ".join(parts)


def render_element(x: AlgebraElement) -> str:
    if x.is_zero():
        return "0"
    ctx = x.ctx
    parts = []
    for m in sorted(x.terms):
        c = x.terms[m]
        cs = c.render("lam")
        body = render_monomial(ctx, m)
        if body == "1":
            parts.append(f"({cs})")
        else:
            parts.append(f"({cs}) {body}")
    return " + ".join(parts)


class ElementParseError(ValueError):
    pass


def parse_element(ctx: AlgebraContext, text: str) -> AlgebraElement:
    """Parse the element grammar: products of E1, F2, K[a1+2a2], Kinv[...],
    joined by + and -, with scalar coefficients in parentheses."""
    from .coeff import parse_scalar

    tokens = _tokenize_element(text)
    pos = [0]

    def peek():
        return tokens[pos[0]] if pos[0] < len(tokens) else None

    def advance():
        t = peek()
        pos[0] += 1
        return t

    def parse_factor():
        t = advance()
        if t is None:
            raise ElementParseError("unexpected end of input")
        kind, val = t
        if kind == "gen":
            letter, idx = val
            if letter == "E":
                return ctx.E(idx)
            return ctx.F(idx)
        if kind == "rootgen":
            letter, (m1, m2) = val
            mu = ctx.rs.root_from_interval(m1, m2)
            return ctx.E_root(mu) if letter == "E" else ctx.F_root(mu)
        if kind == "K":
            vec = val
            if len(vec) > ctx.rank:
                raise ElementParseError("lattice vector exceeds rank")
            return ctx.K(vec + (0,) * (ctx.rank - len(vec)))
        if kind == "scalar":
            return ctx.scalar(parse_scalar(val))
        if kind == "one":
            return ctx.one()
        raise ElementParseError(f"unexpected token {t}")

    def parse_term():
        x = parse_factor()
        while peek() and peek()[0] in ("gen", "rootgen", "K", "scalar", "one"):
            x = x * parse_factor()
        return x

    total = ctx.zero()
    sign = 1
    expect_term = True
    while peek() is not None:
        t = peek()
        if t[0] == "op":
            advance()
            if t[1] == "-":
                sign = -sign
            expect_term = True
            continue
        term = parse_term()
        total = total + (term if sign > 0 else -term)
        sign = 1
        expect_term = False
    return total


def _tokenize_element(text):
    out = []
    i = 0
    s = text
    while i < len(s):
        ch = s[i]
        if ch.isspace() or ch == "*":
            i += 1
            continue
        if ch in "+-":
            out.append(("op", ch))
            i += 1
            continue
        if ch in "EF" and i + 1 < len(s) and s[i + 1].isdigit():
            j = i + 1
            while j < len(s) and s[j].isdigit():
                j += 1
            out.append(("gen", (ch, int(s[i + 1 : j]))))
            i = j
            continue
        if ch in "EF" and i + 1 < len(s) and s[i + 1] == "[":
            j = s.index("]", i)
            body = s[i + 2 : j]
            m1, m2 = (int(t) for t in body.split(","))
            out.append(("rootgen", (ch, (m1, m2))))
            i = j + 1
            continue
        if s.startswith("Kinv[", i) or s.startswith("K[", i):
            inv = s.startswith("Kinv[", i)
            j = s.index("]", i)
            body = s[s.index("[", i) + 1 : j]
            vec = _parse_kvec(body)
            if inv:
                vec = tuple(-c for c in vec)
            out.append(("K", vec))
            i = j + 1
            continue
        if ch == "(":
            depth = 1
            j = i + 1
            while j < len(s) and depth:
                if s[j] == "(":
                    depth += 1
                elif s[j] == ")":
                    depth -= 1
                j += 1
            if depth:
                raise ElementParseError("unbalanced parenthesis")
            out.append(("scalar", s[i + 1 : j - 1]))
            i = j
            continue
        if ch == "1":
            out.append(("one", None))
            i += 1
            continue
        raise ElementParseError(f"unexpected character {ch!r}")
    # context rank is fixed later; kvec length checked in parse_element
    return out


_KVEC_RANK = None


def _parse_kvec(body):
    import re

    terms = re.findall(r"([+-]?)(\d*)a(\d+)", body.replace(" ", ""))
    if not terms:
        raise ElementParseError(f"bad lattice literal {body!r}")
    entries = {}
    for sign, coeff, idx in terms:
        c = int(coeff) if coeff else 1
        if sign == "-":
            c = -c
        entries[int(idx)] = entries.get(int(idx), 0) + c
    top = max(entries)
    return tuple(entries.get(i, 0) for i in range(1, top + 1))


def parse_lattice(ctx: AlgebraContext, body: str):
    vec = _parse_kvec(body)
    if len(vec) > ctx.rank:
        raise ElementParseError("lattice vector exceeds rank")
    return vec + (0,) * (ctx.rank - len(vec))
