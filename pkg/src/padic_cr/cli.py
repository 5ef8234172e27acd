"""Command-line front end: JSON in, JSON out."""

from __future__ import annotations

import argparse
import json
import random
import sys
from fractions import Fraction

from .chars import Character
from .dist import (
    MomentTable,
    consistency_check,
    dirac,
    growth_table,
    pair,
    random_consistent,
    translate_scale_action,
    velu_check,
    zero_table,
)
from .field import FieldDescriptor, LogNorm, PadicElement, fraction_json, mi_total
from .funcspace import (
    CoverageExceeded,
    LocallyPolyFunction,
    LocalPolynomial,
    cr_norm_enum,
    cr_norm_upper,
    indicator,
    polynomial_function,
    remainder_profile,
    scale_into_disk,
)
from .pone import (
    ConditionRange,
    ExampleParameters,
    InductionDatum,
    PreconditionFailed,
    TwoChartDistribution,
    cond_A_check,
    cond_B_check,
    datum_analysis,
    equivalence_harness,
    example_datum,
    example_summary,
    nullity_collapse,
)

EXIT_OK, EXIT_PARSE, EXIT_PRECONDITION, EXIT_COVERAGE = 0, 2, 3, 4


class InputError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        sys.exit(EXIT_PARSE)


# -- parsing helpers ---------------------------------------------------------


def parse_field(text: str, precision: int = 32) -> FieldDescriptor:
    try:
        parts = [int(x) for x in text.split(",")]
    except ValueError as exc:
        raise InputError(f"bad --field value {text!r}") from exc
    if len(parts) not in (1, 2):
        raise InputError("--field expects p or p,f")
    p, f = parts[0], parts[1] if len(parts) == 2 else 1
    try:
        return FieldDescriptor(p, f, precision)
    except ValueError as exc:
        raise InputError(str(exc)) from exc


def parse_fraction(text: str) -> Fraction:
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError) as exc:
        raise InputError(f"bad rational {text!r}") from exc


def parse_index_list(text: str | None) -> list:
    if not text:
        return []
    try:
        return [int(x) for x in text.split(",") if x.strip()]
    except ValueError as exc:
        raise InputError(f"bad index list {text!r}") from exc


def load_json(path: str):
    try:
        with open(path) as fh:
            return json.load(fh)
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}: invalid JSON ({exc})") from exc


def _guarded(what: str, build):
    try:
        return build()
    except (KeyError, TypeError, ValueError, IndexError) as exc:
        raise InputError(f"malformed {what}: {exc}") from exc


def load_datum(path: str) -> InductionDatum:
    data = load_json(path)
    return _guarded("datum", lambda: InductionDatum.from_json(data))


def load_template(data: dict) -> ExampleParameters:
    field = FieldDescriptor.from_json(data["field"])
    return ExampleParameters(
        field,
        tuple(int(x) for x in data["k"]),
        PadicElement.from_json(field, data["alpha"]),
        PadicElement.from_json(field, data["alphaTilde"]),
        frozenset(int(s) for s in data.get("J1", [])),
        frozenset(int(s) for s in data.get("J2", [])),
    )


def load_distribution(path: str, field: FieldDescriptor) -> TwoChartDistribution:
    data = load_json(path)
    return _guarded("distribution", lambda: TwoChartDistribution.from_json(data, field))


def emit(report, out: str | None):
    text = json.dumps(report, sort_keys=True, indent=2) + "\n"
    if out:
        with open(out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


# -- subcommands -------------------------------------------------------------


def cmd_analyze(args) -> dict:
    data = load_json(args.input)
    if "template" in data:
        params = _guarded("template", lambda: load_template(data["template"]))
        datum = _guarded("template", lambda: example_datum(params))
        summary = example_summary(params)
        report = {"analysis": datum_analysis(datum).to_json(), "datum": datum.to_json()}
        report["example"] = {
            "condition1Value": fraction_json(summary["condition1Value"]),
            "condition1": summary["condition1"],
            "condition2Value": fraction_json(summary["condition2Value"]),
            "condition2": summary["condition2"],
            "r": fraction_json(summary["r"]),
            "J3": sorted(summary["J3"]),
            "completionZero": summary["completionZero"],
        }
        return report
    datum = _guarded("datum", lambda: InductionDatum.from_json(data))
    return {"analysis": datum_analysis(datum).to_json(), "datum": datum.to_json()}


def _load_function(args) -> LocallyPolyFunction:
    data = load_json(args.input)
    if "field" in data:
        field = _guarded("field", lambda: FieldDescriptor.from_json(data["field"]))
    elif args.field:
        field = parse_field(args.field)
    else:
        raise InputError("function file has no field; pass --field p,f")
    return _guarded("function", lambda: LocallyPolyFunction.from_json(field, data))


def cmd_crnorm(args) -> dict:
    fn = _load_function(args)
    r = parse_fraction(args.r)
    if r < 0:
        raise PreconditionFailed("r must be nonnegative")
    M = args.range_n
    upper = cr_norm_upper(fn, r)
    enum = cr_norm_enum(fn, r, M)
    profile = remainder_profile(fn, r, range(0, fn.level + 1), M)
    report = {
        "r": fraction_json(r),
        "lower": enum.to_json(),
        "upper": upper.to_json(),
        "profile": profile.to_json(),
    }
    if args.scale is not None:
        scaled = scale_into_disk(fn, args.scale)
        scaled_upper = cr_norm_upper(scaled, r)
        bound = LogNorm.q_power(args.scale * r) * upper
        report["scaled"] = {
            "n": args.scale,
            "upper": scaled_upper.to_json(),
            "bound": bound.to_json(),
            "boundRespected": scaled_upper <= bound,
        }
    return report


def cmd_avv(args) -> dict:
    data = load_json(args.input)
    table = _guarded("moment table", lambda: MomentTable.from_json(data))
    r = parse_fraction(args.r)
    J = parse_index_list(args.J) if args.J is not None else None
    d = {}
    if args.d:
        for s, v in enumerate(parse_index_list(args.d)):
            d[s] = v
    budget = parse_fraction(args.budget) if args.budget is not None else 1
    bad = consistency_check(table)
    report = velu_check(table, r, J, d, budget).to_json(table.field.p)
    report["consistent"] = not bad
    if bad:
        n, key, m = bad[0]
        report["firstInconsistency"] = {"n": n, "key": list(key), "m": list(m)}
    return report


def _window(args) -> ConditionRange:
    window = ConditionRange()
    if args.range_n is not None:
        window.level = args.range_n
    if args.range_deg is not None:
        window.degree = args.range_deg
    if window.level < 0 or window.degree < 0:
        raise InputError("ranges must be nonnegative")
    return window


def cmd_cond(args) -> dict:
    datum = load_datum(args.datum)
    mu = load_distribution(args.input, datum.field)
    window = _window(args)
    return {"A": cond_A_check(mu, datum, window).to_json(), "B": cond_B_check(mu, datum, window).to_json()}


def cmd_equiv(args) -> dict:
    datum = load_datum(args.datum)
    mu = load_distribution(args.input, datum.field)
    return equivalence_harness(mu, datum, _window(args)).to_json()


def cmd_collapse(args) -> dict:
    datum = load_datum(args.input)
    field = datum.field
    lam = field.pi_power(-args.lambda_exp)
    i = tuple(parse_index_list(args.i)) if args.i else None
    cert = nullity_collapse(datum, lam, args.n, i)
    report = cert.to_json()
    report["verified"] = cert.verify(args.points, args.seed)
    report["coefficientsIntegral"] = cert.coefficients_integral()
    return report


# -- selftest ------------------------------------------------------------------


def _selftest_field(rng: random.Random) -> dict:
    out = {}
    for p, f in ((3, 1), (2, 2)):
        for prec in (16, 32):
            field = FieldDescriptor(p, f, prec)
            ok = True
            for _ in range(200):
                xs = [
                    field.element([rng.randrange(p**prec) for _ in range(f)], rng.randrange(-3, 4), prec)
                    for _ in range(3)
                ]
                x, y, z = xs
                ok &= ((x + y) + z) == (x + (y + z))
                ok &= ((x * y) * z) == (x * (y * z))
                ok &= (x * (y + z)) == (x * y + x * z)
                ok &= (x + y).norm() <= max(x.norm(), y.norm())
            ok &= field.pi_power(1).val_F == field.e * field.f
            out[f"p{p}f{f}N{prec}"] = bool(ok)
    return out


def _selftest_crnorm() -> dict:
    field = FieldDescriptor(3, 1, 24)
    out = {}
    for n in range(1, 4):
        for r in (Fraction(1, 2), Fraction(1), Fraction(3, 2)):
            fn = indicator(field, field.zero(), n)
            expected = LogNorm.q_power((n - 1) * r)
            out[f"n{n}r{r}"] = cr_norm_enum(fn, r) == expected and cr_norm_upper(fn, r) == expected
    return out


def _fuzzed_function(field: FieldDescriptor, rng: random.Random, level: int, degree: int) -> LocallyPolyFunction:
    pieces = {}
    for rep in field.coset_reps(level):
        if rng.random() < 0.7:
            coeffs = {(m,): field.from_int(rng.randrange(-20, 21)) for m in range(degree + 1)}
            pieces[rep.coset_key(level)] = LocalPolynomial(rep, coeffs)
    return LocallyPolyFunction(field, level, pieces)


def _selftest_scaling(rng: random.Random) -> dict:
    field = FieldDescriptor(3, 1, 24)
    ok = True
    for _ in range(10):
        fn = _fuzzed_function(field, rng, rng.randrange(0, 3), rng.randrange(0, 4))
        for n in range(0, 3):
            for r in (Fraction(1, 2), Fraction(1), Fraction(2)):
                ok &= cr_norm_upper(scale_into_disk(fn, n), r) <= LogNorm.q_power(n * r) * cr_norm_upper(fn, r)
    return {"respected": bool(ok)}


def _selftest_velu(rng: random.Random) -> dict:
    field = FieldDescriptor(3, 1, 24)
    ok = True
    for _ in range(5):
        a = field.element([rng.randrange(3**12)], 0, 24)
        table = dirac(a, 4, 2)
        for r in (0, Fraction(1, 2), 1, 2):
            ok &= bool(velu_check(table, r, None, {}, 1).satisfied)
    growth = velu_check(growth_table(field, 4, 2, 1), 0, None, {}, 1)
    return {
        "diracSatisfied": bool(ok),
        "growthRejected": growth.satisfied is False,
        "growthWitnessLevel": growth.witness[1],
    }


def _selftest_action(datum: InductionDatum, rng: random.Random) -> dict:
    field = datum.field
    r = datum.r
    ok = True
    for seed in range(2):
        table = random_consistent(field, rng.randrange(10**6), 4, 2)
        for n in range(0, 3):
            for a in field.coset_reps(1):
                moved = translate_scale_action(table, n, a, datum)
                for k in datum.exponents(2):
                    lhs = pair(moved, polynomial_function(field, {k: field.one()})).norm()
                    rhs = LogNorm.q_power(n * (mi_total(k) - r)) * table.moment(a, n, k).norm()
                    ok &= lhs == rhs
    return {"identity": bool(ok)}


def _selftest_equivalence(datum: InductionDatum, rng: random.Random) -> dict:
    window = ConditionRange(3, 3)
    field = datum.field
    results = []
    for _ in range(3):
        mu = TwoChartDistribution(
            random_consistent(field, rng.randrange(10**6), 3, 3), random_consistent(field, rng.randrange(10**6), 3, 3)
        )
        rec = equivalence_harness(mu, datum, window)
        results.append({"AimpliesB": rec.a_to_b, "BimpliesA": rec.b_to_a, "CA": rec.A.total.to_json(), "CB": rec.B.total.to_json()})
    zero = TwoChartDistribution(zero_table(field, 3, 3), zero_table(field, 3, 3))
    rec = equivalence_harness(zero, datum, window)
    return {"tables": results, "zeroTable": {"CA": rec.A.total.to_json(), "CB": rec.B.total.to_json()}}


def _selftest_collapse() -> dict:
    field = FieldDescriptor(3, 1, 20)
    datum = InductionDatum(field, {0}, {}, Character.trivial(field), Character.unramified(field.from_fraction(Fraction(1, 3))))
    out = {}
    for t in (1, 2):
        cert = nullity_collapse(datum, field.pi_power(-t))
        out[f"t{t}"] = {"m": cert.m, "terms": len(cert.terms), "verified": cert.verify(10, t)}
    return out


def _selftest_example() -> dict:
    field = FieldDescriptor(3, 1, 20)
    cases = [
        (2, Fraction(1), Fraction(3)),
        (3, Fraction(1, 3), Fraction(9)),
        (4, Fraction(1), Fraction(1, 27)),
    ]
    out = {}
    for idx, (k, alpha, alpha_t) in enumerate(cases):
        params = ExampleParameters(field, (k,), field.from_fraction(alpha), field.from_fraction(alpha_t), frozenset(), frozenset())
        s = example_summary(params)
        out[f"case{idx}"] = {
            "condition1": fraction_json(s["condition1Value"]),
            "condition2": fraction_json(s["condition2Value"]),
            "r": fraction_json(s["r"]),
            "J3": sorted(s["J3"]),
        }
    return out


def selftest_report(seed: int = 0) -> dict:
    rng = random.Random(seed)
    field = FieldDescriptor(3, 1, 24)
    datum = InductionDatum(
        field,
        {0},
        {},
        Character.unramified(field.from_fraction(Fraction(1, 9))),
        Character(field, field.from_fraction(Fraction(1, 3)), (3,)),
    )
    report = {
        "seed": seed,
        "fieldLaws": _selftest_field(rng),
        "crNormClosedForms": _selftest_crnorm(),
        "diskScaling": _selftest_scaling(rng),
        "velu": _selftest_velu(rng),
        "actionIdentity": _selftest_action(datum, rng),
        "equivalence": _selftest_equivalence(datum, rng),
        "collapse": _selftest_collapse(),
        "example": _selftest_example(),
    }
    report["passed"] = _all_true(report)
    return report


def _all_true(obj) -> bool:
    if isinstance(obj, bool):
        return obj
    if isinstance(obj, dict):
        checks = [
            _all_true(v)
            for k, v in obj.items()
            if k not in ("seed", "CA", "CB", "m", "terms", "growthWitnessLevel", "condition1", "condition2", "r", "J3")
        ]
        return all(checks)
    if isinstance(obj, list):
        return all(_all_true(v) for v in obj)
    return True


def cmd_selftest(args) -> dict:
    return selftest_report(args.seed)


# -- entry point -----------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="padic-cr", description="p-adic C^r functions, moment distributions and two-chart criteria")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(sp):
        sp.add_argument("--field", help="p,f (used when the input carries no field)")
        sp.add_argument("--range-n", type=int, dest="range_n")
        sp.add_argument("--range-deg", type=int, dest="range_deg")
        sp.add_argument("--seed", type=int, default=0)
        sp.add_argument("--out")

    sp = sub.add_parser("analyze", help="analyze an induction datum or example template")
    sp.add_argument("input")
    common(sp)
    sp.set_defaults(handler=cmd_analyze)

    sp = sub.add_parser("crnorm", help="certified C^r norm interval of a locally polynomial function")
    sp.add_argument("input")
    sp.add_argument("--r", required=True)
    sp.add_argument("--scale", type=int, help="also check the bound for the function moved into D(0,n)")
    common(sp)
    sp.set_defaults(handler=cmd_crnorm)

    sp = sub.add_parser("avv", help="growth criterion for a moment table")
    sp.add_argument("input")
    sp.add_argument("--r", required=True)
    sp.add_argument("--J", help="comma separated embeddings in J (default: all)")
    sp.add_argument("--d", help="comma separated degree caps for embeddings outside J")
    sp.add_argument("--budget", help="constant C (rational)")
    common(sp)
    sp.set_defaults(handler=cmd_avv)

    for name, handler, text in (
        ("cond", cmd_cond, "conditions (A) and (B) on a two-chart distribution"),
        ("equiv", cmd_equiv, "equivalence harness with explicit constants"),
    ):
        sp = sub.add_parser(name, help=text)
        sp.add_argument("input", help="two-chart distribution file")
        sp.add_argument("--datum", required=True)
        common(sp)
        sp.set_defaults(handler=handler)

    sp = sub.add_parser("collapse", help="collapse certificate for a datum with negative inequality value")
    sp.add_argument("input", help="datum file")
    sp.add_argument("--lambda-exp", type=int, dest="lambda_exp", default=1, help="lambda = p^-t")
    sp.add_argument("--n", type=int, default=0)
    sp.add_argument("--i", help="comma separated exponent multi-index")
    sp.add_argument("--points", type=int, default=30)
    common(sp)
    sp.set_defaults(handler=cmd_collapse)

    sp = sub.add_parser("selftest", help="reduced acceptance checks with a deterministic report")
    common(sp)
    sp.set_defaults(handler=cmd_selftest)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        report = args.handler(args)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except CoverageExceeded as exc:
        print(f"coverage exceeded: {exc}", file=sys.stderr)
        return EXIT_COVERAGE
    except (PreconditionFailed, ValueError, ZeroDivisionError) as exc:
        print(f"precondition failed: {exc}", file=sys.stderr)
        return EXIT_PRECONDITION
    emit(report, args.out)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
