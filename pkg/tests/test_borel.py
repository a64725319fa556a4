from fractions import Fraction

import pytest

from qborel.borel import (
    CandidateData,
    ClosureError,
    PalmShape,
    battery_checks,
    build_rcs,
    classify_small,
    commutator_table,
    degenerate_palm_rcs,
    diamond_word,
    ede_battery,
    induced_hilbert,
    kostant_partition_count,
    ladder_word,
    match_reflected,
    minuscule_action,
    minuscule_commutator_eigenvalue,
    nondegenerate_borel,
    orthogonal_lattice_basis,
    palm_word,
    shape_filter,
    shift_endpoint_sets,
    t_v_reflect,
    two_endpoint_shift_failures,
    v_element,
    weyl_constant,
    _scalar_ratio,
)
from qborel.coeff import (
    SC_LAM,
    SC_ONE,
    parse_rfq,
    rfq_const,
    rfq_qpow,
    sc_const,
    sc_from_rfq,
    sc_qpow,
)
from qborel.coideal import Character
from qborel.rootsys import WeylWord, build_root_system, parse_word, word
from qborel.uqalg import build_algebra, q_commutator


@pytest.fixture(scope="module")
def ctx2():
    return build_algebra(2)


@pytest.fixture(scope="module")
def ctx3():
    return build_algebra(3)


@pytest.fixture(scope="module")
def ctx4():
    return build_algebra(4)


def weyl_pair_values(ctx, roots, lam=SC_LAM):
    t = sc_from_rfq(weyl_constant(ctx, ctx.rs.simple_roots[0]))
    vp, vm = {}, {}
    for idx, r in enumerate(roots):
        v = lam if idx == 0 else sc_const(Fraction(3, 7))
        vp[r] = v
        vm[r] = t * v.inv()
    return vp, vm


class TestWeylConstant:
    def test_derived_value(self, ctx2):
        t = weyl_constant(ctx2, (1,))
        assert t == parse_rfq("q^2/((1-q^2)(q-q^-1))")

    def test_rejects_other_printed_variant(self, ctx2):
        t = weyl_constant(ctx2, (1,))
        assert t != parse_rfq("q^2/((1-q^-2)(q-q^-1))")

    def test_rank_independence(self, ctx3, ctx4):
        assert weyl_constant(ctx3, (1, 0)) == weyl_constant(ctx4, (0, 1, 0))

    def test_numeric_crosscheck(self, ctx2):
        from qborel.coeff import eval_at

        t = weyl_constant(ctx2, (1,))
        assert eval_at(t, 2) == Fraction(4) / (Fraction(-3) * Fraction(3, 2))


class TestLattice:
    def test_orthogonal_basis(self):
        rs = build_root_system("A", 2)
        basis = orthogonal_lattice_basis(rs, [(1, 0)])
        assert len(basis) == 1
        vec = basis[0]
        assert rs.pairing(vec, (1, 0)) == 0
        # alpha1-perp in rank two is spanned by alpha1 + 2 alpha2
        assert vec in ((1, 2), (-1, -2))

    def test_two_roots(self):
        rs = build_root_system("A", 3)
        basis = orthogonal_lattice_basis(rs, [(1, 0, 0), (0, 0, 1)])
        assert len(basis) == 1
        assert all(
            rs.pairing(basis[0], r) == 0 for r in [(1, 0, 0), (0, 0, 1)]
        )


class TestBuildRCS:
    def test_sl2_generators(self, ctx2):
        rcs = nondegenerate_borel(ctx2, [(1,)], {(1,): SC_LAM})
        eb = rcs.e_bars[(1,)]
        fb = rcs.f_bars[(1,)]
        t = sc_from_rfq(weyl_constant(ctx2, (1,)))
        assert eb == ctx2.E(1) * ctx2.K_alpha(1, -1) + ctx2.K_alpha(1, -1).scale(SC_LAM)
        assert fb == ctx2.F(1) + ctx2.K_alpha(1, -1).scale(t * SC_LAM.inv())

    def test_sl2_closure(self, ctx2):
        rcs = build_rcs(
            ctx2,
            (0,),
            (0,),
            {(1,): SC_LAM},
            {(1,): sc_from_rfq(weyl_constant(ctx2, (1,))) * SC_LAM.inv()},
            check_closure=True,
        )
        assert rcs.closure_failures == []

    def test_sl3_degenerate_generator_list(self, ctx3):
        vp, vm = weyl_pair_values(ctx3, [(1, 0)])
        rcs = build_rcs(ctx3, (0, 1), (0, 1), vp, vm)
        lamp = vm[(1, 0)]
        EK = ctx3.E_root((1, 1)) * ctx3.K((-1, -1))
        expect_e = EK + (ctx3.E(2) * ctx3.K((-1, -1))).scale(
            (SC_ONE - sc_qpow(-2)) * SC_LAM
        )
        assert rcs.e_bars[(1, 1)] == expect_e
        import qborel.coideal as ci

        fvec = ci.word_root_vector_element(ctx3, (0, 1), 1, "F")
        expect_f = fvec + (ctx3.F(2) * ctx3.K_alpha(1, -1)).scale(
            (sc_qpow(-1) - sc_qpow(1)) * lamp
        )
        assert rcs.f_bars[(1, 1)] == expect_f

    def test_lattice_orthogonality_enforced(self, ctx3):
        vp, vm = weyl_pair_values(ctx3, [(1, 0)])
        from qborel.coideal import CharacterError

        with pytest.raises(CharacterError):
            build_rcs(ctx3, (0, 1), (0, 1), vp, vm, lattice_basis=[(1, 0)])

    def test_nondegenerate_data(self, ctx3):
        rcs = nondegenerate_borel(ctx3, [(1, 0)], {(1, 0): SC_LAM})
        assert WeylWord(ctx3.rs, rcs.w_plus).length() == 3
        assert rcs.w_minus == (0,)
        assert rcs.supp_plus == frozenset({(1, 0)})
        assert rcs.lattice_basis and all(
            ctx3.rs.pairing(v, (1, 0)) == 0 for v in rcs.lattice_basis
        )

    def test_nondegenerate_rejects_bad_c(self, ctx3):
        with pytest.raises(ValueError):
            nondegenerate_borel(ctx3, [(1, 0), (0, 1)], {})
        with pytest.raises(ValueError):
            nondegenerate_borel(ctx3, [(1, 1)], {(1, 1): SC_LAM})


class TestSl3Table:
    def test_weyl_cell(self, ctx3):
        vp, vm = weyl_pair_values(ctx3, [(1, 0)])
        rcs = build_rcs(ctx3, (0, 1), (0, 1), vp, vm)
        const = sc_from_rfq(rfq_qpow(2) / (rfq_qpow(1) - rfq_qpow(-1)))
        cell = q_commutator(ctx3, rcs.e_bars[(1, 0)], rcs.f_bars[(1, 0)], sc_qpow(2))
        assert cell == ctx3.one().scale(const)

    def test_top_cell_derived_and_printed_form(self, ctx3):
        vp, vm = weyl_pair_values(ctx3, [(1, 0)])
        rcs = build_rcs(ctx3, (0, 1), (0, 1), vp, vm)
        cell = q_commutator(ctx3, rcs.e_bars[(1, 1)], rcs.f_bars[(1, 1)], sc_qpow(2))
        bracket = q_commutator(ctx3, rcs.e_bars[(1, 0)], rcs.f_bars[(1, 0)], SC_ONE)
        # derived chain coefficient for the generators as printed
        assert cell == bracket.scale(-sc_qpow(1))
        # the tabulated form holds verbatim after rescaling the non-simple
        # twisted vector by -q (the q-bracket normalization)
        printed = (rcs.f_bars[(1, 0)] * rcs.e_bars[(1, 0)]).scale(
            sc_qpow(4) - sc_qpow(2)
        ) + ctx3.one().scale(sc_from_rfq(rfq_qpow(4) / (rfq_qpow(1) - rfq_qpow(-1))))
        assert cell.scale(-sc_qpow(1)) == printed

    def test_correction_coefficients_multiply_to_one(self, ctx3):
        vp, vm = weyl_pair_values(ctx3, [(1, 0)])
        rcs = build_rcs(ctx3, (0, 1), (0, 1), vp, vm)
        EK = ctx3.E_root((1, 1)) * ctx3.K((-1, -1))
        c1_elem = rcs.e_bars[(1, 1)] - EK
        c1 = _scalar_ratio(c1_elem, ctx3.E(2) * ctx3.K((-1, -1)))
        import qborel.coideal as ci

        fvec = ci.word_root_vector_element(ctx3, (0, 1), 1, "F")
        c2_elem = rcs.f_bars[(1, 1)] - fvec
        c2 = _scalar_ratio(c2_elem, ctx3.F(2) * ctx3.K_alpha(1, -1))
        assert c1 == (SC_ONE - sc_qpow(-2)) * SC_LAM
        assert c1 * c2 == SC_ONE

    def test_zero_cells(self, ctx3):
        vp, vm = weyl_pair_values(ctx3, [(1, 0)])
        rcs = build_rcs(ctx3, (0, 1), (0, 1), vp, vm)
        a, ab = (1, 0), (1, 1)
        assert q_commutator(ctx3, rcs.e_bars[a], rcs.e_bars[ab], sc_qpow(1)).is_zero()
        assert q_commutator(ctx3, rcs.e_bars[a], rcs.f_bars[ab], sc_qpow(1)).is_zero()
        assert q_commutator(ctx3, rcs.f_bars[a], rcs.e_bars[ab], sc_qpow(-1)).is_zero()
        assert q_commutator(ctx3, rcs.f_bars[a], rcs.f_bars[ab], sc_qpow(-1)).is_zero()

    def test_table_solver(self, ctx3):
        vp, vm = weyl_pair_values(ctx3, [(1, 0)])
        rcs = build_rcs(ctx3, (0, 1), (0, 1), vp, vm)
        table = commutator_table(ctx3, rcs)
        top = table[((1, 1), (1, 1))]
        assert top["expression"] is not None and top["expression"]
        assert table[((1, 0), (1, 1))]["expression"] == {}


class TestBattery:
    def test_paper_candidates_pass(self, ctx2, ctx3):
        rcs = nondegenerate_borel(ctx2, [(1,)], {(1,): SC_LAM})
        assert ede_battery(ctx2, rcs).passed
        rcs = nondegenerate_borel(ctx3, [(1, 0)], {(1, 0): SC_LAM})
        assert ede_battery(ctx3, rcs).passed
        vp, vm = weyl_pair_values(ctx3, [(1, 0)])
        rcs = build_rcs(ctx3, (0, 1), (0, 1), vp, vm)
        assert ede_battery(ctx3, rcs).passed

    def test_wrong_weyl_product_fails(self, ctx2):
        rcs = build_rcs(ctx2, (0,), (0,), {(1,): SC_ONE}, {(1,): SC_ONE})
        report = ede_battery(ctx2, rcs)
        check = report.by_name("weyl_constant_products")
        assert check.verdict == "fail" and check.witness[0] == (1,)

    def test_support_mismatch_fails(self, ctx3):
        report = battery_checks(
            ctx3.rs,
            word(ctx3.rs, [1]),
            word(ctx3.rs, [1]),
            [],
            [],
            lattice_basis=[],
        )
        check = report.by_name("support_meets_simple_intersection")
        assert check.verdict == "fail" and check.witness == (1, 0)

    def test_semisimple_pair_fails(self, ctx3):
        report = battery_checks(
            ctx3.rs,
            word(ctx3.rs, [1]),
            word(ctx3.rs, [1]),
            [],
            [],
            lattice_basis=[(1, 0), (0, 1)],
        )
        check = report.by_name("semisimple_pair")
        assert check.verdict == "fail" and check.witness == (1, 0)

    def test_length_additivity_fails(self, ctx3):
        # enlarging the positive side past the allowed completion
        rs = ctx3.rs
        report = battery_checks(
            rs,
            word(rs, [1, 2, 1]),
            word(rs, [2, 1]),
            [(1, 1)],
            [(1, 1)],
        )
        check = report.by_name("length_additivity")
        assert check.verdict == "fail"

    def test_insulated_root_fails_with_witness(self, ctx4):
        rs = ctx4.rs
        report = battery_checks(
            rs,
            parse_word(rs, "s2 s1 s3 s2"),
            parse_word(rs, "s2 s1 s3 s2"),
            [(0, 1, 0)],
            [(0, 1, 0)],
            ctx=ctx4,
        )
        check = report.by_name("minuscule_insulated_root")
        assert check.verdict == "fail"
        mu, eigen = check.witness
        assert mu == (1, 1, 1)
        assert eigen is not None and not eigen.is_zero()


class TestMinuscule:
    def test_matrix_dimensions(self, ctx3):
        m = minuscule_action(ctx3, ctx3.E(1))
        assert m.n == 3 and m.d == 1

    def test_k_on_highest_vector(self, ctx3):
        m = minuscule_action(ctx3, ctx3.K((1, 0)))
        assert m.cols[(1,)][(1,)] == sc_qpow(1)

    def test_commutator_eigenvalue(self, ctx3):
        val = minuscule_commutator_eigenvalue(ctx3, (1, 0))
        assert val == sc_qpow(1)
        val = minuscule_commutator_eigenvalue(ctx3, (1, 1))
        assert val and not val.is_zero()

    def test_f_chain_action(self, ctx4):
        # F_{k+1} moves the weight-chain vector one step down, others kill it
        for k in range(1, 4):
            m = minuscule_action(ctx4, ctx4.F(k))
            assert m.cols[(k,)] == {(k + 1,): SC_ONE}
            for j in range(1, 5):
                if j != k:
                    assert m.cols.get((j,), {}) == {}


class TestPalms:
    def test_v00_is_simple(self):
        rs = build_root_system("A", 3)
        assert v_element(rs, 2, 0, 0) == word(rs, [2])

    def test_v11_inversions(self):
        rs = build_root_system("A", 3)
        w = v_element(rs, 2, 1, 1)
        assert w.word == (1, 2, 0)

    def test_ladder(self):
        rs = build_root_system("A", 3)
        assert ladder_word(rs, 1, 3) == word(rs, [1, 2, 3])

    def test_diamond(self):
        rs = build_root_system("A", 3)
        d = diamond_word(rs, 2, 1)
        assert d.length() == 4
        assert d == v_element(rs, 2, 1, 1) * v_element(rs, 2, 0, 0)

    def test_bounds(self):
        rs = build_root_system("A", 3)
        with pytest.raises(ValueError):
            v_element(rs, 1, 0, 1)
        with pytest.raises(ValueError):
            diamond_word(rs, 1, 1)
        with pytest.raises(ValueError):
            PalmShape(2, ((1, 1), (1, 0)))

    def test_palm_word_strictly_decreasing(self):
        rs = build_root_system("A", 3)
        shape = PalmShape(2, ((1, 1), (0, 0)))
        w = palm_word(rs, shape)
        assert w.length() == 4


class TestShapeFilter:
    def test_single_reflection(self):
        rs = build_root_system("A", 2)
        out = shape_filter(rs, word(rs, [1]), [(1, 0)])
        assert out["kind"] == "V" and out["supp_ok"]

    def test_height_one_palm(self):
        rs = build_root_system("A", 2)
        out = shape_filter(rs, word(rs, [1, 2]), [(1, 0)])
        assert out["kind"] == "V" and out["params"].params == ((1, 0),)
        assert out["supp_ok"]

    def test_diamond_support(self):
        rs = build_root_system("A", 3)
        w = parse_word(rs, "s2 s1 s3 s2")
        out = shape_filter(rs, w, [(0, 1, 0), (1, 1, 1)])
        assert out["kind"] == "palm"
        assert out["supp_ok"]

    def test_wrong_support_detected(self):
        rs = build_root_system("A", 3)
        w = parse_word(rs, "s2 s1 s3 s2")
        out = shape_filter(rs, w, [(0, 1, 0)])
        assert out["kind"] == "palm" and not out["supp_ok"]

    def test_not_a_palm(self):
        rs = build_root_system("A", 3)
        w = parse_word(rs, "s1 s2 s3")
        # support on the wrong center cannot be a palm at all
        with pytest.raises(ValueError):
            shape_filter(rs, w, [(0, 0, 1)])
        out = shape_filter(rs, parse_word(rs, "s1 s3 s2"), [(1, 0, 0), (0, 0, 1)])
        assert out["kind"] == "none"


class TestDegeneratePalmRCS:
    def test_sl3_relations(self, ctx3):
        out = degenerate_palm_rcs(ctx3, 1, 1, 0, SC_LAM)
        assert out["relation_failures"] == []
        assert set(out["chain_coeffs"].values()) == {-sc_qpow(1)}

    def test_pure_weyl_case(self, ctx3):
        out = degenerate_palm_rcs(ctx3, 1, 0, 0, SC_LAM)
        assert out["relation_failures"] == []
        assert out["chain_coeffs"] == {}

    @pytest.mark.parametrize("i,l,k", [(1, 2, 0), (2, 1, 1), (3, 0, 2)])
    def test_sl4_height_one_palms(self, ctx4, i, l, k):
        out = degenerate_palm_rcs(ctx4, i, l, k, SC_LAM)
        assert out["relation_failures"] == []
        assert all(c == -sc_qpow(1) for c in out["chain_coeffs"].values())
        steps = max(l, k)
        assert len(out["chain_coeffs"]) == l + k


class TestTwoEndpointCheck:
    def test_mixed_endpoints_detected(self, ctx4):
        t = sc_from_rfq(weyl_constant(ctx4, (1, 0, 0)))
        lam2 = sc_const(Fraction(5, 2))
        rcs = build_rcs(
            ctx4,
            (0, 1, 2, 1, 0),
            (0, 2, 1),
            {(1, 0, 0): SC_LAM, (0, 0, 1): lam2},
            {(1, 0, 0): t * SC_LAM.inv(), (0, 0, 1): t * lam2.inv()},
        )
        bad = two_endpoint_shift_failures(ctx4, rcs)
        assert bad and bad[0][0] == (1, 1, 1)

    def test_shared_endpoint_passes(self, ctx4):
        t = sc_from_rfq(weyl_constant(ctx4, (1, 0, 0)))
        lam2 = sc_const(Fraction(5, 2))
        rcs = build_rcs(
            ctx4,
            (0, 1, 2, 1),
            (0, 1, 2, 1),
            {(1, 0, 0): SC_LAM, (0, 0, 1): lam2},
            {(1, 0, 0): t * SC_LAM.inv(), (0, 0, 1): t * lam2.inv()},
        )
        assert two_endpoint_shift_failures(ctx4, rcs) == []
        R, S = shift_endpoint_sets(rcs, (1, 1, 1))
        assert R == S == {(1, 0, 0)}


class TestReflection:
    def test_identity(self, ctx3):
        vp, vm = weyl_pair_values(ctx3, [(1, 0)])
        rcs = build_rcs(ctx3, (0, 1), (0, 1), vp, vm)
        out = t_v_reflect(ctx3, rcs, [])
        for (label, g), (label2, g2) in zip(out, rcs.generators()):
            assert label == label2 and g == g2

    def test_sl3_reflection_to_standard_position(self, ctx3):
        # top-position family (w+ = s1 s2, w- = s2 s1, supp {[1,2]})
        t = sc_from_rfq(weyl_constant(ctx3, (1, 0)))
        rcs = build_rcs(
            ctx3,
            (0, 1),
            (1, 0),
            {(1, 1): SC_LAM},
            {(1, 1): t * SC_LAM.inv()},
        )
        reflected = t_v_reflect(ctx3, rcs, [2])
        # the standard-position target along the matching longest word
        target = build_rcs(
            ctx3,
            (1, 0, 1),
            (0,),
            {(1, 0): SC_LAM},
            {(1, 0): t * SC_LAM.inv()},
        )
        target_gens = [g for g in target.generators()]
        reflected_gens = [
            (label, g) for label, g in reflected if label[0] in ("E", "F")
        ]
        pairs, unmatched = match_reflected(
            ctx3, reflected_gens, [(l, g) for l, g in target_gens if l[0] in ("E", "F")]
        )
        assert unmatched == []
        assert len(pairs) == len(reflected_gens)


class TestInducedHilbert:
    def test_sl2(self, ctx2):
        rcs = nondegenerate_borel(ctx2, [(1,)], {(1,): SC_LAM})
        table = induced_hilbert(ctx2, rcs, 6)
        assert table["dims"] == [1] + [0] * 6
        assert table["laurent_dimension_per_degree"] == 1

    def test_sl3_brute_force(self, ctx3):
        rcs = nondegenerate_borel(ctx3, [(1, 0)], {(1, 0): SC_LAM})
        table = induced_hilbert(ctx3, rcs, 8)
        # independent enumeration of exponent pairs on the two roots outside
        # the support, heights 1 and 2
        for h in range(9):
            count = sum(
                1
                for a in range(h + 1)
                for b in range(h + 1)
                if a * 1 + b * 2 == h
            )
            assert table["dims"][h] == count

    def test_empty_support_is_kostant(self, ctx3):
        # the positive part's graded dimension counts root partitions
        rs = ctx3.rs
        assert kostant_partition_count(rs, (1, 1)) == 2
        assert kostant_partition_count(rs, (2, 1)) == 2
        assert kostant_partition_count(rs, (0, 0)) == 1

    def test_wrong_type_rejected(self, ctx3):
        vp, vm = weyl_pair_values(ctx3, [(1, 0)])
        rcs = build_rcs(ctx3, (0, 1), (0, 1), vp, vm)
        with pytest.raises(ValueError):
            induced_hilbert(ctx3, rcs, 4)


class TestClassification:
    def test_sl2(self):
        out = classify_small(2)
        assert len(out["families"]) == 2
        kinds = sorted(f["kind"] for f in out["families"])
        assert kinds == ["nondegenerate", "standard"]

    def test_sl3(self):
        out = classify_small(3)
        assert len(out["families"]) == 4
        kinds = {}
        for f in out["families"]:
            kinds.setdefault(f["kind"], []).append(f)
        assert len(kinds["standard"]) == 1
        assert len(kinds["nondegenerate"]) == 2
        assert len(kinds["degenerate"]) == 1
        supports = sorted(
            tuple(sorted(f["members"][0].supp)) for f in kinds["nondegenerate"]
        )
        assert supports == [(((1, 0)),), ((1, 1),)]

    def test_sl4_itemized(self):
        out = classify_small(4)
        kinds = {}
        for f in out["families"]:
            kinds.setdefault(f["kind"], []).append(f)
        assert len(kinds["standard"]) == 1
        assert out["nondegenerate_size_classes"] == [1, 2]
        assert len(kinds["degenerate"]) == 5
        itemized = 1 + 2 + 5
        assert itemized == 8

    def test_sl4_degenerate_families_match_worked_cases(self):
        out = classify_small(4)
        rs = build_root_system("A", 3)
        cases = {
            "1.1": CandidateData((0, 1, 2, 1, 0), (0, 1), ((1, 0, 0),)),
            "1.2.1": CandidateData((0, 1, 2, 1), (0, 1, 2), ((1, 0, 0),)),
            "1.2.2": CandidateData((1, 0, 2, 1), (1, 0, 2), ((0, 1, 0),)),
            "2.1": CandidateData(
                (0, 1, 2, 1), (0, 1, 2, 1), ((0, 0, 1), (1, 0, 0))
            ),
            "2.2": CandidateData(
                (1, 0, 2, 1), (1, 0, 2, 1), ((0, 1, 0), (1, 1, 1))
            ),
        }
        orbits = out["degenerate_orbits"]

        def find_orbit(cand):
            for idx, orbit in enumerate(orbits):
                for member in orbit:
                    if (
                        WeylWord(rs, member.w_plus) == WeylWord(rs, cand.w_plus)
                        and WeylWord(rs, member.w_minus) == WeylWord(rs, cand.w_minus)
                        and frozenset(member.supp) == frozenset(cand.supp)
                    ):
                        return idx
            return None

        found = {name: find_orbit(c) for name, c in cases.items()}
        assert all(v is not None for v in found.values()), found
        assert len(set(found.values())) == 5
