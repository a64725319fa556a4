import random
from fractions import Fraction

import pytest

from qborel.coeff import (
    SC_LAM,
    SC_ONE,
    q_number,
    rfq_const,
    rfq_qpow,
    sc_const,
    sc_from_rfq,
    sc_qpow,
)
from qborel.coideal import (
    BarElement,
    Character,
    CharacterError,
    c_constant,
    cartan_involution,
    character_shift,
    character_shift_closed,
    coassociativity_check,
    coproduct,
    counit_check,
    psi_twist,
    r_alpha,
    r_alpha_iterated,
    r_alpha_negative,
    r_bar,
    s_alpha_pow,
    s_bar,
    twisted_generator,
    word_root_vector_element,
    z_constant,
)
from qborel.uqalg import build_algebra


@pytest.fixture(scope="module")
def ctx2():
    return build_algebra(2)


@pytest.fixture(scope="module")
def ctx3():
    return build_algebra(3)


@pytest.fixture(scope="module")
def ctx4():
    return build_algebra(4)


def random_positive(ctx, rng, max_deg=3, n_terms=2):
    """Random homogeneous element of the positive part."""
    target = None
    out = ctx.zero()
    for _ in range(n_terms * 3):
        length = rng.randint(1, max_deg)
        word = [rng.randint(1, ctx.rank) for _ in range(length)]
        deg = [0] * ctx.rank
        for i in word:
            deg[i - 1] += 1
        if target is None:
            target = tuple(deg)
        if tuple(deg) != target:
            continue
        x = ctx.one().scale(sc_const(Fraction(rng.randint(-3, 3) or 1, rng.randint(1, 2))))
        for i in word:
            x = x * ctx.E(i)
        out = out + x
        if len(out.terms) >= n_terms:
            break
    return out


class TestCoproduct:
    def test_simple_e(self, ctx3):
        d = coproduct(ctx3, ctx3.E(1))
        expected = {
            (_mono(ctx3, e=(1, 0)), _mono(ctx3)): SC_ONE,
            (_mono(ctx3, k=(1, 0)), _mono(ctx3, e=(1, 0))): SC_ONE,
        }
        assert d.terms == expected

    def test_one(self, ctx3):
        d = coproduct(ctx3, ctx3.one())
        assert d.terms == {(_mono(ctx3), _mono(ctx3)): SC_ONE}

    def test_simple_f(self, ctx3):
        d = coproduct(ctx3, ctx3.F(1))
        expected = {
            (_mono(ctx3, f=(1, 0)), _mono(ctx3, k=(-1, 0))): SC_ONE,
            (_mono(ctx3), _mono(ctx3, f=(1, 0))): SC_ONE,
        }
        assert d.terms == expected

    def test_group_like_k(self, ctx3):
        d = coproduct(ctx3, ctx3.K((1, 1)))
        assert d.terms == {(_mono(ctx3, k=(1, 1)), _mono(ctx3, k=(1, 1))): SC_ONE}

    def test_e1e2_four_terms(self, ctx3):
        d = coproduct(ctx3, ctx3.E(1) * ctx3.E(2))
        assert len(d.terms) == 4

    def test_coassociativity(self, ctx3):
        rng = random.Random(3)
        samples = [
            ctx3.E(1) * ctx3.E(2),
            ctx3.F(1) * ctx3.E(1),
            ctx3.K((1, 0)) * ctx3.F(2) + ctx3.E(1),
            random_positive(ctx3, rng),
        ]
        for x in samples:
            assert coassociativity_check(ctx3, x)
            assert counit_check(ctx3, x)

    def test_multiplicative(self, ctx3):
        x = ctx3.E(1) + ctx3.K((0, 1))
        y = ctx3.F(2) * ctx3.E(2)
        dx = coproduct(ctx3, x)
        dy = coproduct(ctx3, y)
        prod = {}
        for (a1, a2), c1 in dx.terms.items():
            ea1 = _elem(ctx3, a1)
            ea2 = _elem(ctx3, a2)
            for (b1, b2), c2 in dy.terms.items():
                left = ea1 * _elem(ctx3, b1)
                right = ea2 * _elem(ctx3, b2)
                for m1, cl in left.terms.items():
                    for m2, cr in right.terms.items():
                        key = (m1, m2)
                        prod[key] = prod.get(key, sc_const(0)) + c1 * c2 * cl * cr
        dxy = coproduct(ctx3, x * y)
        prod = {k: v for k, v in prod.items() if v}
        assert prod == dxy.terms


def _mono(ctx, f=None, k=None, e=None):
    npos = ctx.npos
    fv = [0] * npos
    ev = [0] * npos
    if f:
        fv[ctx.root_position[_simple_from(ctx, f)]] = 1
    if e:
        ev[ctx.root_position[_simple_from(ctx, e)]] = 1
    kv = tuple(k) if k else ctx._zero_k
    return (tuple(fv), kv, tuple(ev))


def _simple_from(ctx, vec):
    return tuple(vec)


def _elem(ctx, m):
    from qborel.uqalg import AlgebraElement

    return AlgebraElement(ctx, {m: SC_ONE})


class TestSkewDerivations:
    def test_on_generators(self, ctx3):
        a1, a2 = (1, 0), (0, 1)
        assert r_alpha(ctx3, a1, ctx3.E(1), "r") == ctx3.one()
        assert r_alpha(ctx3, a1, ctx3.E(2), "r").is_zero()
        assert r_alpha(ctx3, a1, ctx3.E(1), "r_prime") == ctx3.one()
        assert r_alpha(ctx3, a1, ctx3.one(), "r").is_zero()
        assert r_alpha(ctx3, a1, ctx3.one(), "r_prime").is_zero()

    def test_product_value(self, ctx3):
        x = ctx3.E(1) * ctx3.E(2)
        assert r_alpha(ctx3, (1, 0), x, "r") == ctx3.E(2).scale(sc_qpow(-1))

    def test_rejects_mixed(self, ctx3):
        with pytest.raises(ValueError):
            r_alpha(ctx3, (1, 0), ctx3.F(1), "r")
        with pytest.raises(ValueError):
            r_alpha(ctx3, (1, 0), ctx3.E(1) + ctx3.E(1) * ctx3.E(2), "r")

    @pytest.mark.parametrize("n", [2, 3, 4])
    def test_product_rules(self, n):
        # r(xx') = x r(x') + q^{(a,deg x')} r(x) x'
        # r'(xx') = q^{(a,deg x)} x r'(x') + r'(x) x'
        ctx = build_algebra(n)
        rng = random.Random(50 + n)
        for _ in range(12):
            x = random_positive(ctx, rng, max_deg=2)
            y = random_positive(ctx, rng, max_deg=2)
            if x.is_zero() or y.is_zero():
                continue
            mu, nu = x.degree(), y.degree()
            for i in range(ctx.rank):
                a = ctx.rs.simple_roots[i]
                lhs = r_alpha(ctx, a, x * y, "r")
                rhs = x * r_alpha(ctx, a, y, "r") + (
                    r_alpha(ctx, a, x, "r") * y
                ).scale(sc_qpow(ctx.rs.pairing(a, nu)))
                assert lhs == rhs
                lhs2 = r_alpha(ctx, a, x * y, "r_prime")
                rhs2 = (x * r_alpha(ctx, a, y, "r_prime")).scale(
                    sc_qpow(ctx.rs.pairing(a, mu))
                ) + r_alpha(ctx, a, x, "r_prime") * y
                assert lhs2 == rhs2

    def test_commutations(self, ctx3):
        rng = random.Random(11)
        for _ in range(8):
            x = random_positive(ctx3, rng, max_deg=3)
            for i in range(ctx3.rank):
                for j in range(ctx3.rank):
                    a = ctx3.rs.simple_roots[i]
                    b = ctx3.rs.simple_roots[j]
                    # r_a r'_b = r'_b r_a always
                    lhs = r_alpha(ctx3, a, r_alpha(ctx3, b, x, "r_prime"), "r")
                    rhs = r_alpha(ctx3, b, r_alpha(ctx3, a, x, "r"), "r_prime")
                    assert lhs == rhs
                    if i == j or ctx3.rs.pairing(a, b) == 0:
                        assert r_alpha(ctx3, a, r_alpha(ctx3, b, x, "r"), "r") == r_alpha(
                            ctx3, b, r_alpha(ctx3, a, x, "r"), "r"
                        )

    def test_mixed_commutator_identity(self, ctx3):
        # E_a y - y E_a = (q_a - q_a^-1)^{-1} (K_a r_a(y) - r'_a(y) K_a^{-1})
        # for y in the negative part, maps transported via the involution
        rng = random.Random(23)
        inv = sc_from_rfq(rfq_const(1) / (rfq_qpow(1) - rfq_qpow(-1)))
        for _ in range(6):
            xpos = random_positive(ctx3, rng, max_deg=3)
            y = cartan_involution(ctx3, xpos)
            for i in range(ctx3.rank):
                a = ctx3.rs.simple_roots[i]
                E = ctx3.E(i + 1)
                lhs = E * y - y * E
                ra = r_alpha_negative(ctx3, a, y, "r")
                rp = r_alpha_negative(ctx3, a, y, "r_prime")
                rhs = (
                    ctx3.K(a) * ra - rp * ctx3.K(tuple(-c for c in a))
                ).scale(inv)
                assert lhs == rhs

    def test_zero_patterns_along_convex_order(self, ctx4):
        # with beta_j = alpha in the longest word's order: r'(E_{beta_i}) = 0
        # for i < j and r(E_{beta_i}) = 0 for i > j
        for ctx in (build_algebra(2), build_algebra(3), ctx4):
            for i in range(ctx.rank):
                a = ctx.rs.simple_roots[i]
                j = ctx.convex_order.index(a)
                for pos, beta in enumerate(ctx.convex_order):
                    x = ctx.E_root(beta)
                    if pos < j:
                        assert r_alpha(ctx, a, x, "r_prime").is_zero()
                    if pos > j:
                        assert r_alpha(ctx, a, x, "r").is_zero()

    def test_recursion_constant(self, ctx3):
        # r'^i(x E_b) = c^i q^{(mu,a)} r'^{i-1}(x) r_a(E_b) + r'^i(x) E_b
        rng = random.Random(31)
        for _ in range(6):
            x = random_positive(ctx3, rng, max_deg=2)
            if x.is_zero():
                continue
            mu = x.degree()
            for i_pow in (1, 2, 3):
                for ia in range(ctx3.rank):
                    a = ctx3.rs.simple_roots[ia]
                    for ib in range(ctx3.rank):
                        Eb = ctx3.E(ib + 1)
                        lhs = r_alpha_iterated(ctx3, a, i_pow, x * Eb, "r_prime")
                        delta = ctx3.one() if ia == ib else ctx3.zero()
                        rhs = (
                            r_alpha_iterated(ctx3, a, i_pow - 1, x, "r_prime") * delta
                        ).scale(
                            c_constant(ctx3, a, i_pow)
                            * sc_qpow(ctx3.rs.pairing(mu, a))
                        ) + r_alpha_iterated(ctx3, a, i_pow, x, "r_prime") * Eb
                        assert lhs == rhs


class TestHigherTerms:
    def test_s1_is_rprime(self, ctx2):
        x = ctx2.E(1) * ctx2.E(1)
        assert s_alpha_pow(ctx2, (1,), 1, x) == r_alpha(ctx2, (1,), x, "r_prime")

    def test_z2_value(self, ctx2):
        # z^2 = 1/(q [2])
        z = z_constant(ctx2, (1,), 2)
        expect = sc_from_rfq(rfq_const(1) / (rfq_qpow(1) * q_number(2, 1)))
        assert z == expect

    def test_higher_coproduct_terms_sl2(self, ctx2):
        # Delta(E^2) contains E^i K_{mu-i a} (x) s^i(E^2) for i = 1, 2
        E = ctx2.E(1)
        x = E * E
        d = coproduct(ctx2, x)
        alpha = (1,)
        for i in (1, 2):
            expected = s_alpha_pow(ctx2, alpha, i, x)
            collected = ctx2.zero()
            for (m1, m2), c in d.terms.items():
                f1, k1, e1 = m1
                if any(f1) or k1 != (2 - i,) or sum(e1) != i:
                    continue
                reorder = ctx2.q_power(ctx2.rs.pairing((2 - i,), (i,)))
                collected = collected + _elem(ctx2, m2).scale(c * reorder)
            assert collected == expected

    def test_r_bar_orders_agree(self, ctx4):
        x = ctx4.E(1) * ctx4.E(3)
        bar = (1, 0, 1)
        one_order = r_alpha(
            ctx4, (1, 0, 0), r_alpha(ctx4, (0, 0, 1), x, "r"), "r"
        )
        assert r_bar(ctx4, bar, x, "r") == one_order
        # value is a pure q-power
        assert not one_order.is_zero()

    def test_r_bar_single_reduces(self, ctx3):
        x = ctx3.E(1) * ctx3.E(2)
        assert r_bar(ctx3, (1, 0), x, "r") == r_alpha(ctx3, (1, 0), x, "r")

    def test_r_bar_rejects_nonorthogonal(self, ctx3):
        with pytest.raises(ValueError):
            r_bar(ctx3, (1, 1), ctx3.E(1) * ctx3.E(2), "r")


class TestCartanInvolution:
    def test_generators(self, ctx3):
        assert cartan_involution(ctx3, ctx3.E(1)) == ctx3.F(1)
        assert cartan_involution(ctx3, ctx3.F(2)) == ctx3.E(2)
        assert cartan_involution(ctx3, ctx3.K((1, 1))) == ctx3.K((-1, -1))

    def test_involutive(self, ctx3):
        rng = random.Random(5)
        for _ in range(5):
            x = random_positive(ctx3, rng) * ctx3.F(rng.randint(1, 2))
            assert cartan_involution(ctx3, cartan_involution(ctx3, x)) == x

    def test_algebra_map(self, ctx3):
        x = ctx3.E(1) * ctx3.F(2)
        y = ctx3.K((1, 0)) * ctx3.E(2)
        assert cartan_involution(ctx3, x * y) == cartan_involution(
            ctx3, x
        ) * cartan_involution(ctx3, y)

    def test_conjugation_identity(self, ctx3):
        # r'_a = tau r_a tau with tau applied through the negative transport:
        # both give the same operator on the positive part
        rng = random.Random(17)
        for _ in range(8):
            x = random_positive(ctx3, rng, max_deg=3)
            for i in range(ctx3.rank):
                a = ctx3.rs.simple_roots[i]
                lhs = r_alpha(ctx3, a, x, "r_prime")
                rhs = cartan_involution(
                    ctx3,
                    r_alpha(
                        ctx3,
                        a,
                        cartan_involution(ctx3, cartan_involution(ctx3, x)),
                        "r_prime",
                    ),
                )
                assert cartan_involution(ctx3, rhs) == lhs
                # transported maps agree with conjugation by construction,
                # checked against an independent composition
                assert r_alpha_negative(
                    ctx3, a, cartan_involution(ctx3, x), "r"
                ) == cartan_involution(ctx3, r_alpha(ctx3, a, x, "r"))


class TestCharacters:
    def test_build_validation(self, ctx3):
        with pytest.raises(CharacterError):
            Character.build(ctx3, (0, 1), "minus", {(0, 1): SC_LAM})  # not an inversion... a2 is beta? check
        # non-orthogonal support
        with pytest.raises(CharacterError):
            Character.build(
                ctx3, (0, 1, 0), "minus", {(1, 0): SC_LAM, (1, 1): SC_ONE}
            )

    def test_deletion_criterion(self, ctx3):
        # the middle letter of s1 s2 s1 fails the criterion
        with pytest.raises(CharacterError):
            Character.build(ctx3, (0, 1, 0), "minus", {(1, 1): SC_LAM})
        # end positions are fine
        Character.build(ctx3, (0, 1, 0), "minus", {(1, 0): SC_LAM})

    def test_sl2_shift(self, ctx2):
        phi = Character.build(ctx2, (0,), "minus", {(1,): SC_LAM})
        bar = character_shift(ctx2, ctx2.F(1), phi)
        assert bar.shifted == ctx2.F(1) + ctx2.K_alpha(1, -1).scale(SC_LAM)

    def test_sl3_twisted_shift(self, ctx3):
        phi = Character.build(ctx3, (0, 1), "plus", {(1, 0): SC_LAM})
        X = twisted_generator(ctx3, (0, 1), 1)
        bar = character_shift(ctx3, X, phi)
        expect = X + (ctx3.E(2) * ctx3.K((-1, -1))).scale(
            (SC_ONE - sc_qpow(-2)) * SC_LAM
        )
        assert bar.shifted == expect

    def test_sl3_f_shift(self, ctx3):
        phi = Character.build(ctx3, (0, 1), "minus", {(1, 0): SC_LAM})
        Fba = word_root_vector_element(ctx3, (0, 1), 1, "F")
        bar = character_shift(ctx3, Fba, phi)
        expect = Fba + (ctx3.F(2) * ctx3.K_alpha(1, -1)).scale(
            (sc_qpow(-1) - sc_qpow(1)) * SC_LAM
        )
        assert bar.shifted == expect

    def test_empty_support(self, ctx3):
        phi = Character.build(ctx3, (0, 1), "minus", {})
        x = word_root_vector_element(ctx3, (0, 1), 1, "F")
        assert character_shift(ctx3, x, phi).shifted == x

    def test_closed_form_simple(self, ctx2):
        phi = Character.build(ctx2, (0,), "plus", {(1,): SC_LAM})
        bar = character_shift_closed(ctx2, ctx2.E(1), phi)
        assert bar.shifted == ctx2.E(1) + ctx2.one().scale(SC_LAM)

    @pytest.mark.parametrize("n,supp", [(3, ((1, 0),)), (4, ((1, 0, 0),)), (4, ((1, 0, 0), (0, 0, 1)))])
    def test_closed_form_agreement(self, n, supp):
        ctx = build_algebra(n)
        word = ctx.w0.word
        values = {}
        for idx, root in enumerate(supp):
            values[root] = SC_LAM if idx == 0 else sc_const(Fraction(3, 7))
        phi = Character.build(ctx, word, "plus", values)
        for k in range(len(word)):
            X = twisted_generator(ctx, word, k)
            mu = ctx.convex_order[k]
            direct = character_shift(ctx, X, phi)
            raw = word_root_vector_element(ctx, word, k, "E")
            closed = character_shift_closed(ctx, raw, phi)
            assert closed.shifted * ctx.K(tuple(-c for c in mu)) == direct.shifted

    def test_psi_twist(self, ctx3):
        x = ctx3.E_root((1, 1))
        tw = psi_twist(ctx3, x)
        assert tw == (x * ctx3.K((-1, -1))).scale(sc_qpow(-1))

    def test_shift_multiplicative_on_pair(self, ctx3):
        # the shift of a normal-form product equals the product of shifts
        # inside one coideal
        phi = Character.build(ctx3, (0, 1), "minus", {(1, 0): SC_LAM})
        f1 = word_root_vector_element(ctx3, (0, 1), 0, "F")
        f2 = word_root_vector_element(ctx3, (0, 1), 1, "F")
        b1 = character_shift(ctx3, f1, phi).shifted
        b2 = character_shift(ctx3, f2, phi).shifted
        prod_shift = character_shift(ctx3, f1 * f2, phi).shifted
        assert prod_shift == b1 * b2
