"""Acceptance criteria 1-9, each printing one PASS/FAIL line with its runtime."""

import json
import random
import subprocess
import sys
import time
from fractions import Fraction

import pytest

from conftest import collapse_datum, harness_datum
from padic_cr.dist import dirac, growth_table, pair, random_consistent, translate_scale_action, velu_check, zero_table
from padic_cr.field import FieldDescriptor, LogNorm, mi_total
from padic_cr.funcspace import (
    LocallyPolyFunction,
    LocalPolynomial,
    cr_norm_enum,
    cr_norm_upper,
    indicator,
    polynomial_function,
    scale_into_disk,
)
from padic_cr.pone import (
    ConditionRange,
    ExampleParameters,
    TwoChartDistribution,
    collapse_step_count,
    condition_system,
    equivalence_harness,
    example_summary,
    nullity_collapse,
)


@pytest.fixture
def verdict(capsys):
    def record(number, title, ok, elapsed, budget):
        passed = bool(ok) and elapsed < budget
        with capsys.disabled():
            print(f"\nCRITERION {number} {'PASS' if passed else 'FAIL'}: {title} ({elapsed:.2f} s, budget {budget} s)")
        assert ok, f"criterion {number} check failed"
        assert elapsed < budget, f"criterion {number} took {elapsed:.2f} s"

    return record


def test_criterion_1_field_laws(verdict):
    start = time.perf_counter()
    rng = random.Random(1)
    ok = True
    for p, f in ((3, 1), (2, 2)):
        for prec in (16, 32):
            field = FieldDescriptor(p, f, prec)
            ok &= field.pi_power(1).val_F == field.e * field.f
            for _ in range(5_000):
                x, y, z = (
                    field.element([rng.randrange(p**prec) for _ in range(f)], rng.randrange(-3, 4), prec) for _ in range(3)
                )
                ok &= (x + y) + z == x + (y + z)
                ok &= (x * y) * z == x * (y * z)
                ok &= x * (y + z) == x * y + x * z
                ok &= (x + y).norm() <= max(x.norm(), y.norm())
    verdict(1, "ring laws and ultrametric inequality, 10^4 triples per field over both precisions", ok, time.perf_counter() - start, 5)


def test_criterion_2_cr_norm_closed_forms(verdict):
    start = time.perf_counter()
    field = FieldDescriptor(3, 1, 24)
    ok = True
    for n in range(1, 5):
        for r in (Fraction(1, 2), Fraction(1), Fraction(3, 2)):
            fn = indicator(field, field.zero(), n)
            expected = LogNorm.q_power((n - 1) * r)
            ok &= cr_norm_enum(fn, r) == expected
            ok &= cr_norm_upper(fn, r) == expected
    verdict(2, "C^r norm of 1_{D(0,n)} equals q^((n-1)r)", ok, time.perf_counter() - start, 30)


def fuzzed_function(field, rng):
    level, degree = rng.randrange(0, 3), rng.randrange(0, 4)
    pieces = {}
    for rep in field.coset_reps(level):
        if rng.random() < 0.7:
            coeffs = {(m,): field.from_fraction(Fraction(rng.randrange(-40, 41), 3 ** rng.randrange(0, 3))) for m in range(degree + 1)}
            pieces[rep.coset_key(level)] = LocalPolynomial(rep, coeffs)
    return LocallyPolyFunction(field, level, pieces)


def test_criterion_3_disk_scaling_bound(verdict):
    start = time.perf_counter()
    field = FieldDescriptor(3, 1, 24)
    rng = random.Random(3)
    ok = True
    for _ in range(100):
        fn = fuzzed_function(field, rng)
        for n in range(4):
            for r in (Fraction(1, 2), Fraction(1), Fraction(2)):
                ok &= cr_norm_upper(scale_into_disk(fn, n), r) <= LogNorm.q_power(n * r) * cr_norm_upper(fn, r)
    verdict(3, "||g||_r <= q^(nr) ||f||_r on 100 fuzzed functions", ok, time.perf_counter() - start, 60)


def test_criterion_4_velu_on_diracs(verdict):
    start = time.perf_counter()
    field = FieldDescriptor(3, 1, 24)
    rng = random.Random(4)
    ok = True
    for _ in range(20):
        a = field.from_int(rng.randrange(3**12))
        table = dirac(a, 6, 2)
        for r in (0, Fraction(1, 2), 1, 2):
            ok &= velu_check(table, r, budget=1).satisfied is True
    for s, r in ((1, 0), (2, 1), (3, 2)):
        report = velu_check(growth_table(field, 6, 2, s), r, budget=1)
        ok &= report.satisfied is False and report.witness[1] == 6
    verdict(4, "Dirac tables satisfied at C = 1, growth tables rejected at level 6", ok, time.perf_counter() - start, 20)


def test_criterion_5_action_identity(verdict):
    start = time.perf_counter()
    datum = harness_datum()
    field, r = datum.field, datum.r
    ks = datum.exponents(3)
    generators = {k: polynomial_function(field, {k: field.one()}) for k in ks}
    reps = field.coset_reps(3)
    ok = True
    for seed in range(20):
        table = random_consistent(field, 500 + seed, 4, 3)
        for n in range(5):
            for a in reps:
                moved = translate_scale_action(table, n, a, datum)
                for k in ks:
                    lhs = pair(moved, generators[k]).norm()
                    rhs = LogNorm.q_power(n * (mi_total(k) - r)) * table.moment(a, n, k).norm()
                    ok &= lhs == rhs
    verdict(5, "|mu(g gen)| = q^(n(|k|-r)) |mu(recentered gen)| on 20 tables", ok, time.perf_counter() - start, 60)


def equivalence_samples(field, level, degree):
    """100 seeded two-chart tables: random tables at several valuation floors, point-mass pairs and zero."""
    rng = random.Random(6)
    samples = []
    for i in range(70):
        floor = i % 4
        samples.append(
            TwoChartDistribution(
                random_consistent(field, 1000 + i, level, degree, floor), random_consistent(field, 2000 + i, level, degree, floor)
            )
        )
    for _ in range(29):
        y, w = field.from_int(rng.randrange(3**8)), field.from_int(rng.randrange(3**8))
        c = field.from_int(rng.randrange(1, 50))
        samples.append(TwoChartDistribution(dirac(y, level, degree), dirac(w, level, degree).scale(c)))
    samples.append(TwoChartDistribution(zero_table(field, level, degree), zero_table(field, level, degree)))
    return samples


def test_criterion_6_equivalence_budgets(verdict):
    start = time.perf_counter()
    datum = harness_datum()
    window = ConditionRange(5, 3)
    level, degree = condition_system(datum, window).requirements()
    violations = 0
    for mu in equivalence_samples(datum.field, level, degree):
        record = equivalence_harness(mu, datum, window)
        violations += (not record.a_to_b) + (not record.b_to_a)
    verdict(6, f"C_B <= k_AB C_A and C_A <= k_BA C_B on 100 tables, {violations} violations", violations == 0, time.perf_counter() - start, 300)


def test_criterion_7_nullity_collapse(verdict):
    start = time.perf_counter()
    datum = collapse_datum()
    field = datum.field
    ok = datum.inequality_value == -1
    for t in range(1, 5):
        lam = field.pi_power(-t)
        cert = nullity_collapse(datum, lam)
        m = collapse_step_count(datum, lam)
        ok &= cert.m == m and len(cert.terms) == field.q**m
        ok &= cert.verify(30, seed=t)
    verdict(7, "collapse certificates for lambda = p^-t, t = 1..4", ok, time.perf_counter() - start, 30)


def test_criterion_8_example_analyzer(verdict):
    start = time.perf_counter()
    q3, q4 = FieldDescriptor(3, 1, 20), FieldDescriptor(2, 2, 20)
    cases = [
        # field, k, alpha, alpha~, J1, J2, hand values (condition 1, condition 2, r, J3); val_F(2) = 2 on the quadratic field
        (q3, (2,), 1, 3, (), (), (0, 0, 0, {0})),
        (q3, (4,), 27, 1, (), (), (0, 3, 3, set())),
        (q3, (5,), 81, 1, (0,), (0,), (0, 0, 0, {0})),
        (q4, (3, 2), 4, 2, (), (0,), (-3, 1, 4, {0})),
        (q3, (3,), 1, 27, (), (), (-1, -1, 0, {0})),
    ]
    ok = True
    for field, k, alpha, alpha_t, J1, J2, (c1, c2, r, J3) in cases:
        s = example_summary(ExampleParameters(field, k, field.from_int(alpha), field.from_int(alpha_t), frozenset(J1), frozenset(J2)))
        ok &= (s["condition1Value"], s["condition2Value"], s["r"], s["J3"]) == (c1, c2, r, frozenset(J3))
        ok &= s["condition1"] == (c1 == 0) and s["condition2"] == (c2 >= 0)
    ok &= any(c[-1][0] != 0 or c[-1][1] < 0 for c in cases)
    verdict(8, "example conditions, r and J3 against hand substitution", ok, time.perf_counter() - start, 1)


def test_criterion_9_selftest_golden(verdict, tmp_path):
    start = time.perf_counter()
    outputs = []
    for name in ("first.json", "second.json"):
        target = tmp_path / name
        subprocess.run([sys.executable, "-m", "padic_cr.cli", "selftest", "--seed", "0", "--out", str(target)], check=True)
        outputs.append(target.read_bytes())
    report = json.loads(outputs[0])
    sections = {"fieldLaws", "crNormClosedForms", "diskScaling", "velu", "actionIdentity", "equivalence", "collapse", "example"}
    ok = outputs[0] == outputs[1] and report["passed"] is True and sections <= set(report)
    verdict(9, "selftest passes and is byte-identical across two runs", ok, time.perf_counter() - start, 60)
