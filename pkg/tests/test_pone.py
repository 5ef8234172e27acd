import math
import random
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from conftest import collapse_datum, harness_datum
from oracles import PiecewisePoly, brute_cr_exponent
from padic_cr.chars import Character, chi_eval
from padic_cr.dist import dirac, random_consistent, zero_table
from padic_cr.field import FieldDescriptor, LogNorm, mi_total, monomial
from padic_cr.funcspace import CoverageExceeded, LocalPolynomial, LocallyPolyFunction, polynomial_function, subspace_check
from padic_cr.pone import (
    ConditionRange,
    ExampleParameters,
    InductionDatum,
    PreconditionFailed,
    TwoChartDistribution,
    TwoChartFunction,
    act,
    bruhat_decompose,
    collapse_step_count,
    cond_A_check,
    cond_B_check,
    condition_system,
    datum_analysis,
    equivalence_harness,
    example_summary,
    first_generator,
    funzionicr_truncations,
    global_action_value,
    kappa_AB,
    kappa_BA,
    lattice_generators,
    mat_mul,
    matrix,
    nullity_collapse,
    second_generator,
    w_scalar,
)

Q3 = FieldDescriptor(3, 1, 24)
Q4 = FieldDescriptor(2, 2, 24)
SMALL = ConditionRange(3, 3)


def q3_datum(chi1_lam, chi2_lam, chi2_alg=(0,), J=(0,), d=None):
    chi1 = Character.unramified(Q3.from_fraction(Fraction(chi1_lam)))
    chi2 = Character(Q3, Q3.from_fraction(Fraction(chi2_lam)), chi2_alg)
    return InductionDatum(Q3, set(J), d or {}, chi1, chi2)


def degree_two_datum():
    """J empty, d = 2, psi = unr(3): chart-2 generators are quadratic on units."""
    return q3_datum(Fraction(1, 9), Fraction(1, 3), (0,), (), {0: 2})


def random_unit(field, rng):
    while True:
        x = field.element([rng.randrange(field.p**field.precision_default) for _ in range(field.f)], 0)
        if x.w == 0:
            return x


def random_point(field, rng, low=-2, high=3):
    return random_unit(field, rng).scale_pi(rng.randrange(low, high))


def random_two_chart(datum, rng, degree=3):
    field = datum.field
    coeffs = lambda: {k: field.from_int(rng.randrange(-9, 10)) for k in datum.exponents(degree)}
    return TwoChartFunction(datum, polynomial_function(field, coeffs()), polynomial_function(field, coeffs()))


def random_matrix(field, rng):
    while True:
        entries = [random_point(field, rng, 0, 2) if rng.random() < 0.8 else field.zero() for _ in range(4)]
        g = matrix(field, *entries)
        if not (g[0] * g[3] - g[1] * g[2]).is_zero():
            return g


# -- induction data ------------------------------------------------------------


def test_analysis_trivial_characters():
    datum = InductionDatum(Q3, set(), {0: 0}, Character.trivial(Q3), Character.trivial(Q3))
    a = datum_analysis(datum)
    assert a.r == 0 and a.central_exponent == 0 and a.integral
    assert a.Jprime == frozenset({0})
    assert a.reduced.J == frozenset({0}) and a.reduced_ok


def test_analysis_integral_unit_central_character():
    datum = q3_datum(Fraction(1, 9), Fraction(1, 3), (3,))
    a = datum_analysis(datum)
    assert a.integral and a.inequality
    assert a.r == 2 and a.inequality_value == 2


def hand_substitution(field, k, alpha, alpha_tilde, J1, J2):
    """The two conditions, r and J3 of the unramified x algebraic family, evaluated from their formulas."""
    S = range(field.f)
    cond1 = -(alpha.val_F + alpha_tilde.val_F) + sum(k[s] - 1 for s in S)
    cond2 = -alpha_tilde.val_F + sum(k[s] - 1 for s in S if s not in J1)
    r = alpha.val_F - sum(k[s] - 1 for s in J1)
    J3 = set(J2) | {s for s in S if s not in J2 and k[s] - 1 > r}
    return cond1, cond2, r, J3


EXAMPLE_CASES = [
    # (field, k, alpha, alpha~, J1, J2)
    (Q3, (2,), 1, 3, (), ()),
    (Q3, (4,), 27, 1, (), ()),
    (Q3, (5,), 9, 9, (0,), (0,)),
    (Q4, (3, 2), 4, 2, (), (0,)),
    (Q3, (3,), 1, 27, (), ()),  # fails the inequality
]


@pytest.mark.parametrize("case", EXAMPLE_CASES)
def test_example_family_matches_hand_substitution(case):
    field, k, alpha, alpha_t, J1, J2 = case
    params = ExampleParameters(field, k, field.from_int(alpha), field.from_int(alpha_t), frozenset(J1), frozenset(J2))
    summary = example_summary(params)
    cond1, cond2, r, J3 = hand_substitution(field, k, params.alpha, params.alpha_tilde, J1, J2)
    assert summary["condition1Value"] == cond1
    assert summary["condition2Value"] == cond2
    assert summary["condition1"] == (cond1 == 0)
    assert summary["condition2"] == (cond2 >= 0)
    assert summary["r"] == r
    assert summary["J3"] == frozenset(J3)


def test_example_family_weight_two_instance():
    params = ExampleParameters(Q3, (2,), Q3.one(), Q3.from_int(3), frozenset(), frozenset())
    summary = example_summary(params)
    assert summary["condition1Value"] == 0 and summary["condition2Value"] == 0 and summary["r"] == 0
    failing = example_summary(ExampleParameters(Q3, (3,), Q3.one(), Q3.from_int(27), frozenset(), frozenset()))
    assert not failing["condition2"] and failing["completionZero"]


@settings(max_examples=40, deadline=None)
@given(st.integers(-3, 4), st.integers(-3, 4), st.integers(0, 5), st.booleans())
def test_reduced_datum_satisfies_bound(v1, v2, d, in_J):
    chi1 = Character.unramified(Q3.pi_power(v1))
    chi2 = Character.unramified(Q3.pi_power(v2))
    datum = InductionDatum(Q3, {0} if in_J else set(), {} if in_J else {0: d}, chi1, chi2)
    a = datum_analysis(datum)
    assert a.reduced_ok
    assert a.central_exponent == v1 + v2 + mi_total(datum.d_full)
    assert a.integral == (a.central_exponent == 0)
    if not in_J and d + 1 > a.r:
        assert a.Jprime == frozenset({0}) and a.chi2prime.alg_exp == (d,)


def test_datum_json_round_trip():
    datum = degree_two_datum()
    back = InductionDatum.from_json(datum.to_json(), 24)
    assert back.to_json() == datum.to_json()
    assert back.r == datum.r and back.d == datum.d


# -- the action ----------------------------------------------------------------


def sample_points(field, rng, count):
    return [random_point(field, rng) for _ in range(count)]


def charts_agree(f, g, field, rng, count=8):
    for _ in range(count):
        y, w = random_unit(field, rng).scale_pi(rng.randrange(0, 3)), random_unit(field, rng).scale_pi(rng.randrange(0, 3))
        if not (f.eval1(y) - g.eval1(y)).is_zero() or not (f.eval2(w) - g.eval2(w)).is_zero():
            return False
    return True


@pytest.mark.parametrize("make", [harness_datum, degree_two_datum])
def test_act_identity(make):
    datum = make()
    rng = random.Random(1)
    fn = random_two_chart(datum, rng)
    assert charts_agree(act(matrix(datum.field, 1, 0, 0, 1), fn), fn, datum.field, rng)


@pytest.mark.parametrize("make", [harness_datum, degree_two_datum])
def test_act_central(make):
    datum = make()
    field = datum.field
    rng = random.Random(2)
    for _ in range(10):
        fn = random_two_chart(datum, rng)
        lam = random_point(field, rng)
        moved = act(matrix(field, lam, 0, 0, lam), fn)
        scalar = chi_eval(datum.chi1, lam) * chi_eval(datum.chi2, lam) * monomial(lam, datum.d_full)
        assert charts_agree(moved, fn.scale(scalar), field, rng, 3)


@pytest.mark.parametrize("make", [harness_datum, degree_two_datum])
def test_act_matches_global_formula(make):
    datum = make()
    field = datum.field
    rng = random.Random(3)
    for _ in range(10):
        fn = random_two_chart(datum, rng)
        g = random_matrix(field, rng)
        moved = act(g, fn)
        for z in sample_points(field, rng, 5):
            den = g[0] - g[2] * z
            if den.is_zero() or (g[3] * z - g[1]).is_zero():
                continue
            assert (moved.value(z) - global_action_value(g, fn, z)).is_zero()


@pytest.mark.parametrize("make", [harness_datum, degree_two_datum])
def test_act_composition(make):
    datum = make()
    field = datum.field
    rng = random.Random(4)
    for _ in range(8):
        fn = random_two_chart(datum, rng)
        g1, g2 = random_matrix(field, rng), random_matrix(field, rng)
        assert charts_agree(act(g1, act(g2, fn)), act(mat_mul(g1, g2), fn), field, rng, 4)


def test_bruhat_factors_multiply_back():
    rng = random.Random(5)
    for _ in range(20):
        g = random_matrix(Q3, rng)
        prod = matrix(Q3, 1, 0, 0, 1)
        for h in bruhat_decompose(g):
            prod = mat_mul(prod, h)
        assert all((x - y).is_zero() for x, y in zip(prod, g))


def test_act_rejects_singular_matrix():
    datum = harness_datum()
    with pytest.raises(ValueError):
        act(matrix(datum.field, 1, 2, 2, 4), random_two_chart(datum, random.Random(0)))


# -- generators ------------------------------------------------------------------


def test_generators_at_cutoff_zero():
    datum = harness_datum()
    gens = lattice_generators(datum, 0)
    assert [(g.family, g.k) for g in gens] == [(1, (0,)), (2, (0,))]
    rng = random.Random(6)
    field = datum.field
    one, second = gens[0].function, gens[1].function
    for _ in range(5):
        z = random_point(field, rng, 0, 3)
        assert (one.value(z) - 1).is_zero()
        assert one.value(z.scale_pi(-1) if z.w == 0 else field.pi_power(-1)).is_zero()
        outside = random_unit(field, rng).scale_pi(-rng.randrange(0, 3))
        expected = w_scalar(datum) * chi_eval(datum.psi, outside)
        assert (second.value(outside) - expected).is_zero()


@pytest.mark.parametrize("make", [harness_datum, degree_two_datum])
def test_w_maps_first_family_onto_second(make):
    datum = make()
    field = datum.field
    w = matrix(field, 0, 1, 1, 0)
    rng = random.Random(7)
    firsts = [g for g in lattice_generators(datum, 2) if g.family == 1]
    seconds = {g.k: g for g in lattice_generators(datum, 2) if g.family == 2}
    assert set(seconds) == {g.k for g in firsts}
    for gen in firsts:
        assert charts_agree(act(w, gen.function), seconds[gen.k].function, field, rng, 5)


def test_generator_charts_in_subspace():
    datum = degree_two_datum()
    for gen in lattice_generators(datum, 2):
        for chart in (gen.function.chart1, gen.function.chart2):
            assert isinstance(chart, LocallyPolyFunction)
            assert subspace_check(chart, datum.J, datum.d)


# -- collapse --------------------------------------------------------------------


def test_collapse_trivial_target():
    datum = collapse_datum()
    cert = nullity_collapse(datum, datum.field.one())
    assert len(cert.terms) == 1 and cert.depth == 0 and cert.m == 0
    assert cert.verify(10)


@pytest.mark.parametrize("t", [1, 2, 3])
def test_collapse_certificates(t):
    datum = collapse_datum()
    field = datum.field
    lam = field.pi_power(-t)
    cert = nullity_collapse(datum, lam)
    # smallest m with val(chi_2(p^m)) = -m below val(lam) = -t
    assert cert.m == collapse_step_count(datum, lam) == t + 1
    assert len(cert.terms) == field.q ** (t + 1)
    assert cert.coefficients_integral()
    assert cert.verify(30, seed=t)


def test_collapse_with_disk_and_monomial():
    field = Q3
    datum = InductionDatum(field, set(), {0: 1}, Character.trivial(field), Character.unramified(field.pi_power(-2)))
    assert datum.inequality_value == -1
    cert = nullity_collapse(datum, field.pi_power(-1), n=1, i=(1,))
    assert cert.depth == 1
    # k in {0, 1} for each of the q^m centers, minus the vanishing c_a^1 term at c_a = 0
    assert len(cert.terms) == field.q**cert.m * 2 - 1
    assert cert.verify(20)


def test_collapse_certificate_detects_tampering():
    datum = collapse_datum()
    cert = nullity_collapse(datum, datum.field.pi_power(-1))
    cert.terms[0].coefficient = cert.terms[0].coefficient + 1
    assert not cert.verify(20)


def test_collapse_preconditions():
    with pytest.raises(PreconditionFailed):
        nullity_collapse(harness_datum(), Q3.pi_power(-1))
    with pytest.raises(PreconditionFailed):
        nullity_collapse(collapse_datum(), collapse_datum().field.pi_power(-6), budget=1000)


# -- condition systems -------------------------------------------------------------


def covering_tables(datum, window, build):
    level, degree = condition_system(datum, window).requirements()
    return build(level, degree)


def point_mass_pair(datum, y, w, window):
    def build(level, degree):
        first = dirac(y, level, degree) if y is not None else zero_table(datum.field, level, degree)
        second = dirac(w, level, degree) if w is not None else zero_table(datum.field, level, degree)
        return TwoChartDistribution(first, second)

    return covering_tables(datum, window, build)


def test_zero_distribution_constants():
    datum = harness_datum()
    mu = covering_tables(datum, SMALL, lambda l, m: TwoChartDistribution(zero_table(Q3, l, m), zero_table(Q3, l, m)))
    for report in (cond_A_check(mu, datum, SMALL), cond_B_check(mu, datum, SMALL)):
        assert report.total.is_zero()
    record = equivalence_harness(mu, datum, SMALL)
    assert record.a_to_b and record.b_to_a


def test_dirac_pair_b_constants():
    datum = harness_datum()
    mu = point_mass_pair(datum, datum.field.zero(), None, SMALL)
    report = cond_B_check(mu, datum, SMALL)
    assert report.constants["unocrit"] == LogNorm(0)
    assert report.constants["duecrit"].is_zero()
    assert report.constants["trecrit"].is_zero()


def point_integral(datum, y, w, region, weight):
    """Integral of weight over region against the point masses that chart masses at y and w describe on F."""
    field = datum.field
    total = field.zero()
    if y is not None:
        z = y * field.pi_power(1)
        if region(z):
            total = total + weight(z)
    if w is not None and not w.is_zero():
        z = w.inverse()
        if region(z):
            total = total + chi_eval(datum.psi, w) * monomial(w, datum.d_full) * weight(z)
    return total


def test_a_side_functionals_match_point_masses():
    datum = harness_datum()
    field = datum.field
    system = condition_system(datum, SMALL)
    rng = random.Random(9)
    psi, d = datum.psi, datum.d_full
    for _ in range(3):
        y = random_point(field, rng, 0, 2)
        w = random_point(field, rng, 0, 2)
        mu = point_mass_pair(datum, y, w, SMALL)
        for item in system.items["puno"]:
            a, n, k = item.a, item.n, item.k
            inside = lambda z: (z - a).w >= n
            expected = point_integral(datum, y, w, inside, lambda z: monomial(z - a, k))
            assert (item.functional.evaluate(mu) - expected).is_zero()
        for item in system.items["pdue"]:
            a, n, k = item.a, item.n, item.k
            outside = lambda z: (z - a).w < n + 1
            dk = tuple(x - e for x, e in zip(d, k))
            weight = lambda z: chi_eval(psi, z - a) * monomial(z - a, dk)
            expected = point_integral(datum, y, w, outside, weight)
            assert (item.functional.evaluate(mu) - expected).is_zero()


def test_reports_scale_with_the_distribution():
    datum = harness_datum()
    mu = covering_tables(datum, SMALL, lambda l, m: TwoChartDistribution(random_consistent(Q3, 1, l, m), random_consistent(Q3, 2, l, m)))
    scaled = TwoChartDistribution(mu.mu1.scale(Q3.pi_power(1)), mu.mu2.scale(Q3.pi_power(1)))
    for check in (cond_A_check, cond_B_check):
        base, moved = check(mu, datum, SMALL), check(scaled, datum, SMALL)
        for name, value in base.constants.items():
            assert moved.constants[name] == LogNorm(1) * value


def test_vanishing_residual_after_projection():
    datum = harness_datum()
    field = datum.field

    def build(level, degree):
        mu1 = random_consistent(field, 11, level, degree)
        v0, v1 = mu1.value(0, (0,), (0,)), mu1.value(0, (0,), (1,))
        # delta_0 has moments (1, 0) and delta_1 has (1, 1) on O_F for k = 0, 1
        mu1 = mu1 - dirac(field.one(), level, degree).scale(v1) - dirac(field.zero(), level, degree).scale(v0 - v1)
        return TwoChartDistribution(mu1, zero_table(field, level, degree))

    mu = covering_tables(datum, SMALL, build)
    assert mu.mu1.value(0, (0,), (0,)).is_zero() and mu.mu1.value(0, (0,), (1,)).is_zero()
    report = cond_B_check(mu, datum, SMALL)
    assert report.constants["funo"].is_zero()
    assert not report.constants["unocrit"].is_zero()


def test_inversion_disks_biject_with_chart_two_indices():
    datum = harness_datum()
    system = condition_system(datum, SMALL)
    away = set()
    for item in system.items["puno"]:
        a, n = item.a, item.n
        if a.is_zero() or a.w >= 1 or a.w >= n:
            continue
        b = a.inverse()
        level = n - 2 * a.w
        away.add((b.coset_key(level), level, item.k))
    tre = {(it.a.coset_key(it.n), it.n, it.k) for it in system.items["trecrit"]}
    assert away == tre
    assert len(tre) == len(system.items["trecrit"])


def test_coverage_error_for_small_tables():
    datum = harness_datum()
    mu = TwoChartDistribution(zero_table(Q3, 1, 1), zero_table(Q3, 1, 1))
    with pytest.raises(CoverageExceeded):
        cond_A_check(mu, datum, SMALL)


# -- constants and preconditions ---------------------------------------------------


def test_kappa_values_for_the_harness_datum():
    datum = harness_datum()
    kab, details = kappa_AB(datum)
    # psi(z) = z^3 near 1: coefficients binom(3, h) are units or zero, n0 = 1, r = 2
    assert details["n0"] == 1 and details["C1"] == LogNorm(0)
    assert kab == LogNorm.q_power(2)
    kba, extra = kappa_BA(datum)
    # C is the C^2 bound of 1_{units} z^(3-k), k = 0, 1; compare with the enumeration oracle
    oracle = min(
        brute_cr_exponent(PiecewisePoly(3, 1, {c: [Fraction(math.comb(j, m) * c ** (j - m)) for m in range(j + 1)] for c in (1, 2)}), 2, 3)
        for j in (3, 2)
    )
    assert extra["C"] == LogNorm(oracle)
    assert kba == LogNorm.q_power(2) * max(LogNorm(0), extra["C"])


def test_equivalence_preconditions():
    mu = TwoChartDistribution(zero_table(Q3, 1, 1), zero_table(Q3, 1, 1))
    not_integral = q3_datum(Fraction(1, 9), Fraction(1, 3), (2,))
    with pytest.raises(PreconditionFailed):
        equivalence_harness(mu, not_integral, SMALL)
    with pytest.raises(PreconditionFailed):
        equivalence_harness(mu, collapse_datum(), SMALL)
    unreduced = q3_datum(Fraction(1, 3), Fraction(1, 3), (0,), (), {0: 2})
    assert unreduced.Jprime != unreduced.J
    with pytest.raises(PreconditionFailed):
        equivalence_harness(mu, unreduced, SMALL)


def test_equivalence_on_random_tables():
    datum = harness_datum()
    window = ConditionRange(3, 3)
    for seed in range(3):
        mu = covering_tables(
            datum, window, lambda l, m: TwoChartDistribution(random_consistent(Q3, seed, l, m), random_consistent(Q3, seed + 50, l, m))
        )
        record = equivalence_harness(mu, datum, window)
        assert record.a_to_b and record.b_to_a
        assert record.to_json()["AimpliesB"] is True


# -- truncations -----------------------------------------------------------------


def test_truncations_reject_non_strict_exponents():
    with pytest.raises(PreconditionFailed):
        funzionicr_truncations(harness_datum(), 2, [(2,)])


def test_truncation_decay_r_one():
    field = Q3
    datum = InductionDatum(field, {0}, {}, Character.unramified(field.pi_power(-1)), Character.algebraic(field, (1,)))
    assert datum.r == 1 and datum.central_exponent == 0
    (report,) = funzionicr_truncations(datum, 5, [(0,)])
    base = report.differences[0]
    for n, diff in enumerate(report.differences):
        # rescaling the unit shell to p^n O^x costs at most q^(n r) times |psi(p^n)| = q^(-2 n r)
        assert diff <= base * LogNorm.q_power(-n * datum.r)
    assert all(b < a for a, b in zip(report.differences, report.differences[1:]))


def test_truncations_harness_datum():
    datum = harness_datum()
    reports = funzionicr_truncations(datum, 3, [(0,), (1,)], enumerate_level=5)
    for rep in reports:
        slope = datum.r - mi_total(rep.k)
        for n, (upper, lower) in enumerate(zip(rep.differences, rep.enumerated)):
            assert lower <= upper <= LogNorm.q_power(-n * slope) * rep.differences[0]
        for fn in rep.functions:
            assert subspace_check(fn, datum.Jprime, datum.reduced().d)
        rng = random.Random(0)
        last = rep.functions[-1]
        for _ in range(10):
            u = random_unit(datum.field, rng)
            z = u.scale_pi(rng.randrange(0, 3))
            expected = chi_eval(datum.psi, z) * monomial(z, tuple(-x for x in rep.k))
            assert (last(z) - expected).is_zero()
