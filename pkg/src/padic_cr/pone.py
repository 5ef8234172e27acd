"""Two-chart model of the induced representation on P^1(F).

A function f on F (with the usual behaviour at infinity) is stored as the
pair of functions on O_F

    f1(y) = f(p y),        f2(w) = psi(w) w^d f(1/w),      psi = chi_2 / chi_1,

and a distribution as a pair of moment tables (mu1, mu2) with
mu(f) = mu1(f1) + mu2(f2).
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, field as dc_field
from fractions import Fraction
from typing import Callable

from .chars import (
    Character,
    affine_character_expansion,
    analyticity_level,
    analyticity_level_at_1,
    chi_eval,
    chi_local_expansion,
    chi_val_p,
)
from .dist import MomentTable
from .field import (
    INF,
    FieldDescriptor,
    LogNorm,
    PadicElement,
    coset_coefficients,
    coset_key_string,
    fraction_json,
    mi_below,
    mi_binomial,
    mi_le,
    mi_sub,
    mi_total,
    mi_zero,
    monomial,
    multi_indices,
    norm_max,
)
from .funcspace import (
    CoverageExceeded,
    LocallyPolyFunction,
    LocalPolynomial,
    cr_norm_enum,
    cr_norm_upper,
    polynomial_function,
    subspace_check,
)


class PreconditionFailed(ValueError):
    """The induction datum does not satisfy a requirement of the operation."""


# ---------------------------------------------------------------------------
# induction data


@dataclass
class InductionDatum:
    field: FieldDescriptor
    J: frozenset
    d: dict  # sigma outside J -> d_sigma >= 0
    chi1: Character
    chi2: Character

    def __post_init__(self):
        f = self.field.f
        self.J = frozenset(self.J)
        if not self.J <= frozenset(range(f)):
            raise ValueError("J must be a subset of the embeddings")
        self.d = {int(s): int(v) for s, v in self.d.items() if int(s) not in self.J}
        for s in range(f):
            if s not in self.J:
                self.d.setdefault(s, 0)
        if any(v < 0 for v in self.d.values()):
            raise ValueError("degrees d_sigma must be nonnegative")

    @property
    def d_full(self) -> tuple:
        return tuple(self.d.get(s, 0) if s not in self.J else 0 for s in range(self.field.f))

    @property
    def psi(self) -> Character:
        return self.chi2 / self.chi1

    @property
    def r(self) -> Fraction:
        return -chi_val_p(self.chi1)

    @property
    def central_exponent(self) -> Fraction:
        """val(chi_1(p)) + val(chi_2(p)) + |d|; zero iff the central character is integral."""
        return chi_val_p(self.chi1) + chi_val_p(self.chi2) + mi_total(self.d_full)

    @property
    def inequality_value(self) -> Fraction:
        """val(chi_2(p)) + |d|, required to be >= 0."""
        return chi_val_p(self.chi2) + mi_total(self.d_full)

    @property
    def Jprime(self) -> frozenset:
        r = self.r
        return self.J | frozenset(s for s in range(self.field.f) if s not in self.J and self.d[s] + 1 > r)

    @property
    def chi2prime(self) -> Character:
        extra = tuple(self.d[s] if s in self.Jprime and s not in self.J else 0 for s in range(self.field.f))
        return self.chi2 * Character.algebraic(self.field, extra)

    def reduced(self) -> "InductionDatum":
        Jp = self.Jprime
        return InductionDatum(self.field, Jp, {s: v for s, v in self.d.items() if s not in Jp}, self.chi1, self.chi2prime)

    def exponents(self, degree: int) -> list:
        """Multi-indices k with k_sigma <= d_sigma off J and |k| <= degree."""
        return multi_indices(self.field.f, degree, {s: self.d[s] for s in range(self.field.f) if s not in self.J})

    def strict_exponents(self, degree: int) -> list:
        return [k for k in self.exponents(degree) if self.r - mi_total(k) > 0]

    def to_json(self) -> dict:
        return {
            "field": self.field.to_json(),
            "J": sorted(self.J),
            "d": [self.d[s] if s not in self.J else None for s in range(self.field.f)],
            "chi1": self.chi1.to_json(),
            "chi2": self.chi2.to_json(),
        }

    @classmethod
    def from_json(cls, data: dict, precision: int = 32) -> "InductionDatum":
        field = FieldDescriptor.from_json(data["field"], precision)
        J = frozenset(int(s) for s in data.get("J", []))
        d = {s: int(v) for s, v in enumerate(data.get("d", [])) if v is not None and s not in J}
        return cls(field, J, d, Character.from_json(field, data["chi1"]), Character.from_json(field, data["chi2"]))


@dataclass
class DatumAnalysis:
    r: Fraction
    central_exponent: Fraction
    integral: bool
    inequality_value: Fraction
    inequality: bool
    Jprime: frozenset
    chi2prime: Character
    reduced: InductionDatum
    reduced_ok: bool

    @property
    def completion_may_be_nonzero(self) -> bool:
        return self.integral and self.inequality

    def to_json(self) -> dict:
        return {
            "r": fraction_json(self.r),
            "centralExponent": fraction_json(self.central_exponent),
            "integral": self.integral,
            "inequalityValue": fraction_json(self.inequality_value),
            "inequality": self.inequality,
            "Jprime": sorted(self.Jprime),
            "chi2prime": self.chi2prime.to_json(),
            "reducedDatum": self.reduced.to_json(),
            "reducedSatisfiesBound": self.reduced_ok,
            "completionZero": not self.completion_may_be_nonzero,
        }


def datum_analysis(datum: InductionDatum) -> DatumAnalysis:
    red = datum.reduced()
    r = datum.r
    reduced_ok = all(red.d[s] + 1 <= r for s in range(datum.field.f) if s not in red.J)
    return DatumAnalysis(
        r=r,
        central_exponent=datum.central_exponent,
        integral=datum.central_exponent == 0,
        inequality_value=datum.inequality_value,
        inequality=datum.inequality_value >= 0,
        Jprime=datum.Jprime,
        chi2prime=datum.chi2prime,
        reduced=red,
        reduced_ok=reduced_ok,
    )


# -- the unramified x algebraic example family -------------------------------


@dataclass
class ExampleParameters:
    field: FieldDescriptor
    k: tuple  # weights k_sigma > 1
    alpha: PadicElement
    alpha_tilde: PadicElement
    J1: frozenset
    J2: frozenset


def example_datum(params: ExampleParameters) -> InductionDatum:
    """chi_1 = unr(alpha^-1) prod_{J1} sigma^(k-1), chi_2 = unr(p alpha~^-1) prod_{J1} sigma^-1 prod_{J2-J1} sigma^(k-2)."""
    field = params.field
    f = field.f
    J1, J2 = frozenset(params.J1), frozenset(params.J2)
    if not J1 <= J2:
        raise ValueError("J1 must be contained in J2")
    if any(x < 2 for x in params.k):
        raise ValueError("weights must be > 1")
    a1 = tuple(params.k[s] - 1 if s in J1 else 0 for s in range(f))
    a2 = tuple(-1 if s in J1 else (params.k[s] - 2 if s in J2 else 0) for s in range(f))
    chi1 = Character(field, params.alpha.inverse(), a1)
    chi2 = Character(field, field.pi_power(1) * params.alpha_tilde.inverse(), a2)
    d = {s: params.k[s] - 2 for s in range(f) if s not in J2}
    return InductionDatum(field, J2, d, chi1, chi2)


def example_summary(params: ExampleParameters) -> dict:
    """The two displayed conditions, r and J3, read off the generic analysis."""
    datum = example_datum(params)
    analysis = datum_analysis(datum)
    return {
        "condition1Value": analysis.central_exponent,
        "condition1": analysis.integral,
        "condition2Value": analysis.inequality_value,
        "condition2": analysis.inequality,
        "r": analysis.r,
        "J3": analysis.Jprime,
        "completionZero": not analysis.completion_may_be_nonzero,
    }


# ---------------------------------------------------------------------------
# matrices and two-chart functions


Matrix = tuple  # (a, b, c, d) of PadicElements


def matrix(field: FieldDescriptor, a, b, c, d) -> Matrix:
    conv = lambda x: x if isinstance(x, PadicElement) else (field.from_int(x) if isinstance(x, int) else field.from_fraction(x))
    return (conv(a), conv(b), conv(c), conv(d))


def mat_mul(g: Matrix, h: Matrix) -> Matrix:
    a, b, c, d = g
    e, f, k, l = h
    return (a * e + b * k, a * f + b * l, c * e + d * k, c * f + d * l)


def mat_det(g: Matrix) -> PadicElement:
    a, b, c, d = g
    return a * d - b * c


def translation_matrix(field: FieldDescriptor, n: int, a: PadicElement) -> Matrix:
    """[[p^n, a], [0, 1]]."""
    return (field.pi_power(n), a, field.zero(), field.one())


def bruhat_decompose(g: Matrix) -> list:
    """Factor g into central, diagonal [[1,0],[0,l]], unipotent [[1,l],[0,1]] and [[0,p],[1,0]] matrices.

    For c != 0: g = P [[0,p],[1,0]] [[1,d/c],[0,1]] with P = [[(b - a d/c)/p, a], [0, c]].
    Upper triangular [[a,b],[0,d]] = a * [[1,0],[0,d/a]] * [[1,b/a],[0,1]].
    """
    a, b, c, d = g
    field = a.field
    if mat_det(g).is_zero():
        raise ValueError("matrix is not invertible")
    one, zero = field.one(), field.zero()
    if c.is_zero():
        return _upper_factors(a, b, d)
    x = (b - a * d / c) / field.pi_power(1)
    w = (zero, field.pi_power(1), one, zero)
    unip = (one, d / c, zero, one)
    return _upper_factors(x, a, c) + [w, unip]


def _upper_factors(a, b, d) -> list:
    field = a.field
    one, zero = field.one(), field.zero()
    out = []
    if not (a - one).is_zero():
        out.append((a, zero, zero, a))
    if not (d / a - one).is_zero():
        out.append((one, zero, zero, d / a))
    if not b.is_zero():
        out.append((one, b / a, zero, one))
    if not out:
        out.append((one, zero, zero, one))
    return out


def _chart_call(chart, x: PadicElement) -> PadicElement:
    if isinstance(chart, LocallyPolyFunction):
        return chart.evaluate(x)
    return chart(x)


@dataclass
class TwoChartFunction:
    """Chart functions on O_F: LocallyPolyFunction instances or exact evaluators."""

    datum: InductionDatum
    chart1: object
    chart2: object

    def eval1(self, y: PadicElement) -> PadicElement:
        return _chart_call(self.chart1, y)

    def eval2(self, w: PadicElement) -> PadicElement:
        return _chart_call(self.chart2, w)

    def value(self, z: PadicElement) -> PadicElement:
        """The function on F at a finite point z."""
        field = self.datum.field
        if z.w >= 1:
            return self.eval1(z / field.pi_power(1))
        w = z.inverse()
        return self.eval2(w) / (chi_eval(self.datum.psi, w) * monomial(w, self.datum.d_full))

    def is_materialized(self) -> bool:
        return isinstance(self.chart1, LocallyPolyFunction) and isinstance(self.chart2, LocallyPolyFunction)

    def scale(self, s: PadicElement) -> "TwoChartFunction":
        if self.is_materialized():
            return TwoChartFunction(self.datum, self.chart1.scale(s), self.chart2.scale(s))
        c1, c2 = self.chart1, self.chart2
        return TwoChartFunction(self.datum, lambda y: s * _chart_call(c1, y), lambda w: s * _chart_call(c2, w))


def zero_function(datum: InductionDatum) -> TwoChartFunction:
    zero = polynomial_function(datum.field, {})
    return TwoChartFunction(datum, zero, zero)


def combination(datum: InductionDatum, terms: list) -> TwoChartFunction:
    """sum c_i f_i, evaluated lazily."""
    def chart(which):
        def ev(x):
            total = datum.field.zero()
            for c, fn in terms:
                total = total + c * (fn.eval1(x) if which == 1 else fn.eval2(x))
            return total
        return ev
    return TwoChartFunction(datum, chart(1), chart(2))


def act_generic(g: Matrix, fn: TwoChartFunction) -> TwoChartFunction:
    """One application of the four chart-transfer formulas (any invertible g).

    Chart 1, y in O_F, L = a - c p y, x' = (d p y - b) / L:
        x' in pO:  chi_1(det) psi(L) L^d f1(x'/p)
        else:      chi_1(det) psi(d p y - b) (d p y - b)^d f2(L / (d p y - b))
    Chart 2, w in O_F, M = a w - c, x' = (d - b w) / M:
        x' in pO:  chi_1(det) psi(M) M^d f1(x'/p)
        else:      chi_1(det) psi(d - b w) (d - b w)^d f2(M / (d - b w))
    """
    datum = fn.datum
    field = datum.field
    a, b, c, d = g
    det = mat_det(g)
    if det.is_zero():
        raise ValueError("matrix is not invertible")
    scal = chi_eval(datum.chi1, det)
    psi = datum.psi
    dd = datum.d_full
    pi = field.pi_power(1)

    def transfer(num: PadicElement, den: PadicElement) -> PadicElement:
        # point x' = num / den of P^1, prefactor attached to den (resp. num)
        if not den.is_zero():
            x = num / den
            if x.w >= 1:
                return scal * chi_eval(psi, den) * monomial(den, dd) * fn.eval1(x / pi)
        u = den / num
        return scal * chi_eval(psi, num) * monomial(num, dd) * fn.eval2(u)

    def chart1(y: PadicElement) -> PadicElement:
        return transfer(d * pi * y - b, a - c * pi * y)

    def chart2(w: PadicElement) -> PadicElement:
        return transfer(d - b * w, a * w - c)

    return TwoChartFunction(datum, chart1, chart2)


def act(g: Matrix, fn: TwoChartFunction) -> TwoChartFunction:
    """Action of g, applied generator by generator along a Bruhat factorization."""
    out = fn
    for h in reversed(bruhat_decompose(g)):
        out = act_generic(h, out)
    return out


def global_action_value(g: Matrix, fn: TwoChartFunction, z: PadicElement) -> PadicElement:
    """(g f)(z) = chi_1(det g) psi(-c z + a) (-c z + a)^d f((d z - b) / (-c z + a)), z finite."""
    datum = fn.datum
    a, b, c, d = g
    den = a - c * z
    num = d * z - b
    scal = chi_eval(datum.chi1, mat_det(g)) * chi_eval(datum.psi, den) * monomial(den, datum.d_full)
    return scal * fn.value(num / den)


# ---------------------------------------------------------------------------
# lattice generators


def unit_shell_function(psi: Character, exponent: tuple, level: int, degree: int = 8, J=None, deg_bound=None) -> LocallyPolyFunction:
    """1_{O_F^x}(z) psi(z) z^exponent, expanded on the unit disks of ``level``."""
    field = psi.field
    pieces = {}
    for key in coset_coefficients(field.p, field.f, level, True):
        center = field.rep_from_key(key)
        pieces[key] = affine_character_expansion(psi, field.zero(), field.one(), center, level, degree, 1, exponent)
    return LocallyPolyFunction(field, level, pieces, J, deg_bound or {})


def _shell_exact(datum: InductionDatum, exponent: tuple, scalar: PadicElement | None = None):
    psi = datum.psi

    def ev(w: PadicElement) -> PadicElement:
        if w.w != 0:
            return datum.field.zero()
        out = chi_eval(psi, w) * monomial(w, exponent)
        return out if scalar is None else scalar * out

    return ev


def w_scalar(datum: InductionDatum) -> PadicElement:
    """chi_2(-1) (-1)^|d|: the constant in w (1_O z^k) = c 1_{F - pO} psi(z) z^(d-k)."""
    field = datum.field
    return chi_eval(datum.chi2, field.from_int(-1)) * field.from_int((-1) ** mi_total(datum.d_full))


@dataclass
class Generator:
    family: int  # 1: 1_O z^k, 2: its image under [[0,1],[1,0]]
    k: tuple
    function: TwoChartFunction
    exact: bool


def first_generator(datum: InductionDatum, k: tuple, degree: int = 8) -> Generator:
    field = datum.field
    level = analyticity_level(datum.psi)
    chart1 = polynomial_function(field, {k: field.pi_power(mi_total(k))})
    exponent = tuple(a - b for a, b in zip(datum.d_full, k))
    total = tuple(x + e for x, e in zip(datum.psi.alg_exp, exponent))
    exact = all(t >= 0 for t in total) and sum(total) <= degree
    if exact:
        chart2 = unit_shell_function(datum.psi, exponent, level, degree, datum.J, datum.d)
    else:
        chart2 = _shell_exact(datum, exponent)
    return Generator(1, k, TwoChartFunction(datum, chart1, chart2), exact)


def second_generator(datum: InductionDatum, k: tuple) -> Generator:
    field = datum.field
    zero = polynomial_function(field, {})
    chart2 = polynomial_function(field, {k: w_scalar(datum)}, datum.J, datum.d)
    return Generator(2, k, TwoChartFunction(datum, zero, chart2), True)


def lattice_generators(datum: InductionDatum, cutoff: int) -> list:
    """Both generator families for |k| <= cutoff (k_sigma <= d_sigma off J)."""
    out = []
    for k in datum.exponents(cutoff):
        out.append(first_generator(datum, k))
    for k in datum.exponents(cutoff):
        out.append(second_generator(datum, k))
    return out


# ---------------------------------------------------------------------------
# collapse certificates


@dataclass
class CollapseTerm:
    coefficient: PadicElement
    level: int  # matrix [[p^level, shift], [0, 1]]
    shift: PadicElement
    generator: tuple  # exponent k of 1_O z^k


@dataclass
class CollapseCertificate:
    datum: InductionDatum
    lam: PadicElement
    n: int
    i: tuple
    m: int
    depth: int
    terms: list

    def target(self) -> TwoChartFunction:
        datum, lam, n, i = self.datum, self.lam, self.n, self.i
        field = datum.field
        pi = field.pi_power(1)

        def chart1(y):
            z = pi * y
            if z.w < n:
                return field.zero()
            return lam * monomial(z, i)

        def chart2(w):
            if n > 0 or w.w != 0:
                return field.zero()
            return lam * chi_eval(datum.psi, w) * monomial(w, tuple(a - b for a, b in zip(datum.d_full, i)))

        return TwoChartFunction(datum, chart1, chart2)

    def combination(self) -> TwoChartFunction:
        gens = {}
        terms = []
        field = self.datum.field
        for t in self.terms:
            if t.generator not in gens:
                gens[t.generator] = first_generator(self.datum, t.generator).function
            g = translation_matrix(field, t.level, t.shift)
            terms.append((t.coefficient, act(g, gens[t.generator])))
        return combination(self.datum, terms)

    def coefficients_integral(self) -> bool:
        return all(t.coefficient.w >= 0 for t in self.terms)

    def verify(self, points: int = 30, seed: int = 0) -> bool:
        rng = random.Random(seed)
        field = self.datum.field
        target = self.target()
        combo = self.combination()
        prec = field.precision_default
        for _ in range(points):
            y = field.element([rng.randrange(field.p**prec) for _ in range(field.f)], 0, prec)
            w = field.element([rng.randrange(field.p**prec) for _ in range(field.f)], 0, prec)
            if not (combo.eval1(y) - target.eval1(y)).is_zero():
                return False
            if not (combo.eval2(w) - target.eval2(w)).is_zero():
                return False
        return True

    def to_json(self) -> dict:
        return {
            "lambda": self.lam.to_json(),
            "n": self.n,
            "i": list(self.i),
            "m": self.m,
            "recursionDepth": self.depth,
            "termCount": len(self.terms),
            "terms": [
                {"coefficient": t.coefficient.to_json(), "matrixLevel": t.level, "shift": t.shift.to_json(), "generator": list(t.generator)}
                for t in self.terms
            ],
        }


def collapse_step_count(datum: InductionDatum, lam: PadicElement) -> int:
    """Smallest m >= 1 with val_F(chi_2(p^m) p^(m|d|)) < val_F(lam)."""
    field = datum.field
    m = 1
    while True:
        v = (chi_eval(datum.chi2, field.pi_power(m)) * field.pi_power(m * mi_total(datum.d_full))).val_F
        if v < lam.val_F:
            return m
        m += 1
        if m > 10_000:
            raise PreconditionFailed("no step count found")


def nullity_collapse(datum: InductionDatum, lam: PadicElement, n: int = 0, i: tuple | None = None, budget: int = 100_000) -> CollapseCertificate:
    """Write lam 1_{D(0,n)} z^i as an O_E-combination of P-translates of the generators 1_O z^k.

    With m as in collapse_step_count and a running over O_F / p^m:
        lam z^i 1_{D(0,n)} = sum_a sum_{k <= i} lam binom(i,k) c_a^(i-k) (z - c_a)^k 1_{D(c_a, n+m)},
    c_a = p^n a, and each summand is c * [[p^(n+m), c_a], [0, 1]] (1_O z^k) with
    c = lam binom(i,k) c_a^(i-k) p^((n+m)|k|) / (chi_2(p^(n+m)) p^((n+m)|d|)).
    """
    field = datum.field
    i = mi_zero(field.f) if i is None else tuple(i)
    if datum.inequality_value >= 0:
        raise PreconditionFailed("the datum satisfies val(chi_2(p)) + |d| >= 0; nothing collapses")
    if any(i[s] > datum.d[s] for s in range(field.f) if s not in datum.J):
        raise PreconditionFailed("exponent exceeds d outside J")
    if n < 0:
        raise PreconditionFailed("disk level must be nonnegative")
    if lam.is_integral() and n == 0 and not any(i):
        term = CollapseTerm(lam, 0, field.zero(), i)
        return CollapseCertificate(datum, lam, n, i, 0, 0, [term])
    m = collapse_step_count(datum, lam)
    N = n + m
    lower = [k for k in mi_below(i)]
    if field.q**m * len(lower) > budget:
        raise PreconditionFailed(f"certificate needs {field.q ** m * len(lower)} terms, budget {budget}")
    scal = chi_eval(datum.chi2, field.pi_power(N)) * field.pi_power(N * mi_total(datum.d_full))
    inv = scal.inverse()
    terms = []
    for a in field.coset_reps(m):
        center = a.scale_pi(n) if not a.is_zero() else field.zero()
        for k in lower:
            coeff = lam * monomial(center, mi_sub(i, k)) * mi_binomial(i, k) if any(mi_sub(i, k)) else lam
            if coeff.is_zero():
                continue
            coeff = coeff * field.pi_power(N * mi_total(k)) * inv
            terms.append(CollapseTerm(coeff, N, center, k))
    return CollapseCertificate(datum, lam, n, i, m, mi_total(i), terms)


# ---------------------------------------------------------------------------
# two-chart distributions and compiled linear functionals


@dataclass
class TwoChartDistribution:
    mu1: MomentTable
    mu2: MomentTable

    def pair(self, fn: TwoChartFunction) -> PadicElement:
        from .dist import pair

        if not fn.is_materialized():
            raise ValueError("pairing needs materialized chart functions")
        return pair(self.mu1, fn.chart1) + pair(self.mu2, fn.chart2)

    def to_json(self) -> dict:
        return {"mu1": self.mu1.to_json(), "mu2": self.mu2.to_json()}

    @classmethod
    def from_json(cls, data: dict, field: FieldDescriptor | None = None) -> "TwoChartDistribution":
        return cls(MomentTable.from_json(data["mu1"], field), MomentTable.from_json(data["mu2"], field))


@dataclass
class Factor:
    """w -> psi^power(alpha + beta w) (alpha + beta w)^exp."""

    alpha: PadicElement
    beta: PadicElement
    power: int
    exp: tuple


@dataclass
class Region:
    """D(center, level) minus D(hole_center, hole_level) (hole optional), in chart coordinates."""

    center: PadicElement
    level: int
    hole: tuple | None = None


class Functional:
    """A linear functional on (mu1, mu2): sum of coefficients times stored moments."""

    def __init__(self, field: FieldDescriptor):
        self.field = field
        self.terms: dict = {}  # (chart, level, key, k) -> coefficient
        self.exact = True

    def add_moment(self, chart: int, center: PadicElement, level: int, m: tuple, coeff: PadicElement):
        key = center.coset_key(level)
        rep = self.field.rep_from_key(key)
        shift = rep - center
        for k in mi_below(m):
            c = coeff
            if any(mi_sub(m, k)):
                if shift.is_zero():
                    continue
                c = c * monomial(shift, mi_sub(m, k)) * mi_binomial(m, k)
            if c.is_zero():
                continue
            node = (chart, level, key, k)
            self.terms[node] = self.terms[node] + c if node in self.terms else c

    def add_polynomial(self, chart: int, level: int, pol: LocalPolynomial):
        for m, c in pol.coeffs.items():
            self.add_moment(chart, pol.center, level, m, c)

    def requirements(self) -> tuple:
        levels = [node[1] for node in self.terms]
        degs = [mi_total(node[3]) for node in self.terms]
        return max(levels, default=0), max(degs, default=0)

    def evaluate(self, mu: TwoChartDistribution) -> PadicElement:
        total = self.field.zero()
        tables = {1: mu.mu1, 2: mu.mu2}
        for (chart, level, key, k), c in self.terms.items():
            v = tables[chart].value(level, key, k)
            if not v.is_zero():
                total = total + c * v
        return total


def _admissible(factors: list, center: PadicElement, level: int, psi: Character) -> bool:
    for fac in factors:
        total = tuple(fac.power * a + e for a, e in zip(psi.alg_exp, fac.exp))
        if fac.power == 0 and all(t >= 0 for t in total):
            continue
        value = fac.alpha + fac.beta * center
        if value.is_zero():
            return False
        gap = fac.beta.w + level - value.w
        if gap < 1:
            return False
        if fac.power and psi.conductor and gap < psi.conductor:
            return False
    return True


def _disks(region: Region, factors: list, psi: Character, max_level: int):
    field = psi.field
    reps1 = field.coset_reps(1)
    units1 = field.coset_reps(1, True)

    def refine(center, level):
        if _admissible(factors, center, level, psi):
            yield center, level
            return
        if level >= max_level:
            raise CoverageExceeded(f"integrand needs disks below level {max_level} near {center}")
        for e in reps1:
            yield from refine(center + e.scale_pi(level) if not e.is_zero() else center, level + 1)

    if region.hole is None:
        yield from refine(region.center, region.level)
        return
    hc, hl = region.hole
    if hl < region.level or (hc - region.center).w < region.level:
        raise ValueError("hole must lie inside the region disk")
    for j in range(region.level, hl):
        for u in units1:
            yield from refine(hc + u.scale_pi(j), j + 1)


def compile_integral(func: Functional, chart: int, region: Region, factors: list, scalar: PadicElement,
                     psi: Character, max_level: int, max_degree: int):
    """Add scalar * int_region prod(factors) d mu_chart to the functional."""
    for center, level in _disks(region, factors, psi, max_level):
        pol = LocalPolynomial(center, {mi_zero(psi.field.f): scalar})
        for fac in factors:
            total = tuple(fac.power * a + e for a, e in zip(psi.alg_exp, fac.exp))
            if any(t < 0 for t in total):
                func.exact = False
            pol = pol * affine_character_expansion(psi, fac.alpha, fac.beta, center, level, max_degree, fac.power, fac.exp)
        if pol.degree() > max_degree:
            if func.exact:
                raise CoverageExceeded(f"integrand degree {pol.degree()} exceeds table degree {max_degree}")
            pol = pol.truncate(max_degree)
        func.add_polynomial(chart, level, pol)


def _psi_factors_disk(datum, a, k):
    """Chart-2 factors of 1_{D(a,n)} (z - a)^k: psi(w) w^(d-k) (1 - a w)^k."""
    field = datum.field
    dk = tuple(x - y for x, y in zip(datum.d_full, k))
    return [Factor(field.zero(), field.one(), 1, dk), Factor(field.one(), -a, 0, k)]


def puno_functional(datum: InductionDatum, a: PadicElement, n: int, k: tuple, max_level: int, max_degree: int) -> Functional:
    """mu(1_{D(a,n)} (z - a)^k) over F, split along the two charts."""
    field = datum.field
    psi = datum.psi
    pi = field.pi_power(1)
    func = Functional(field)
    one = field.one()
    chart1_factor = [Factor(-a, pi, 0, k)]
    contains_zero = a.is_zero() or a.w >= n
    if contains_zero:
        if n >= 1:
            compile_integral(func, 1, Region(a / pi if not a.is_zero() else field.zero(), n - 1), chart1_factor, one, psi, max_level, max_degree)
        else:
            compile_integral(func, 1, Region(field.zero(), 0), chart1_factor, one, psi, max_level, max_degree)
            compile_integral(func, 2, Region(field.zero(), 0, (field.zero(), 1 - n)), _psi_factors_disk(datum, a, k), one, psi, max_level, max_degree)
    elif a.w >= 1:
        compile_integral(func, 1, Region(a / pi, n - 1), chart1_factor, one, psi, max_level, max_degree)
    else:
        compile_integral(func, 2, Region(a.inverse(), n - 2 * a.w), _psi_factors_disk(datum, a, k), one, psi, max_level, max_degree)
    return func


def pdue_functional(datum: InductionDatum, a: PadicElement, n: int, k: tuple, max_level: int, max_degree: int) -> Functional:
    """mu(1_{F - D(a,n+1)} psi(z - a) (z - a)^(d-k)) over F, split along the two charts."""
    field = datum.field
    psi = datum.psi
    pi = field.pi_power(1)
    one = field.one()
    func = Functional(field)
    dk = tuple(x - y for x, y in zip(datum.d_full, k))
    f1 = [Factor(-a, pi, 1, dk)]
    f2 = [Factor(one, -a, 1, dk), Factor(field.zero(), one, 0, k)]
    contains_zero = a.is_zero() or a.w >= n + 1
    if contains_zero:
        if n + 1 >= 1:
            centre = a / pi if not a.is_zero() else field.zero()
            compile_integral(func, 1, Region(field.zero(), 0, (centre, n)), f1, one, psi, max_level, max_degree)
            compile_integral(func, 2, Region(field.zero(), 0), f2, one, psi, max_level, max_degree)
        else:
            compile_integral(func, 2, Region(field.zero(), -n), f2, one, psi, max_level, max_degree)
    elif a.w >= 1:
        compile_integral(func, 1, Region(field.zero(), 0, (a / pi, n)), f1, one, psi, max_level, max_degree)
        compile_integral(func, 2, Region(field.zero(), 0), f2, one, psi, max_level, max_degree)
    else:
        compile_integral(func, 1, Region(field.zero(), 0), f1, one, psi, max_level, max_degree)
        compile_integral(func, 2, Region(field.zero(), 0, (a.inverse(), n + 1 - 2 * a.w)), f2, one, psi, max_level, max_degree)
    return func


def chart_moment_functional(field: FieldDescriptor, chart: int, center: PadicElement, level: int, k: tuple) -> Functional:
    func = Functional(field)
    func.add_moment(chart, center, level, k, field.one())
    return func


# ---------------------------------------------------------------------------
# condition reports


@dataclass
class ConditionItem:
    condition: str
    a: PadicElement
    n: int
    k: tuple
    functional: Functional
    sign: int  # +1: bound q^(n (r - |k|)); -1: bound q^(n (|k| - r))
    coordinates: str = "F"  # or "chart1" / "chart2" for direct moment items

    def exponent(self, value: PadicElement, r: Fraction) -> float:
        if value.is_zero():
            return INF
        return value.w + self.sign * self.n * (r - mi_total(self.k))


@dataclass
class ConditionReport:
    side: str
    constants: dict  # condition -> LogNorm
    witnesses: dict  # condition -> (a, n, k, coordinates) or None
    range: dict
    notes: list = dc_field(default_factory=list)

    @property
    def total(self) -> LogNorm:
        return norm_max(self.constants.values())

    def to_json(self) -> dict:
        out = {"side": self.side, "range": self.range, "constant": self.total.to_json(), "conditions": {}}
        for name in sorted(self.constants):
            w = self.witnesses.get(name)
            out["conditions"][name] = {
                "constant": self.constants[name].to_json(),
                "witness": None if w is None else {"a": w[0].to_json(), "n": w[1], "k": list(w[2]), "coordinates": w[3]},
            }
        out["notes"] = list(self.notes)
        return out


@dataclass
class ConditionRange:
    level: int = 6
    degree: int = 4

    def to_json(self) -> dict:
        return {"level": self.level, "degree": self.degree, "scope": "declared finite window"}


class ConditionSystem:
    """All A-side and B-side items of a finite window, compiled once per datum."""

    def __init__(self, datum: InductionDatum, window: ConditionRange):
        self.datum = datum
        self.window = window
        self.r = datum.r
        self.items: dict = {}
        self._build()

    def _add(self, condition, a, n, k, func, sign, coordinates="F"):
        self.items.setdefault(condition, []).append(ConditionItem(condition, a, n, k, func, sign, coordinates))

    def _build(self):
        datum, L, D = self.datum, self.window.level, self.window.degree
        field = datum.field
        p, f = field.p, field.f
        ks = datum.exponents(D)
        strict = set(datum.strict_exponents(D))
        pi = field.pi_power(1)
        zero = field.zero()
        # (A) disk conditions
        for level in range(L + 1):
            for x in field.coset_reps(level):
                a = x * pi if not x.is_zero() else zero
                for k in ks:
                    self._add("puno", a, level + 1, k, puno_functional(datum, a, level + 1, k, L, D), 1)
                    self._add("unocrit", x, level, k, chart_moment_functional(field, 1, x, level, k), 1, "chart1")
        for level in range(1, L + 1):
            for b in field.coset_reps(level):
                if b.is_zero() or b.w >= level:
                    continue
                a = b.inverse()
                n = level - 2 * b.w
                for k in ks:
                    self._add("puno", a, n, k, puno_functional(datum, a, n, k, L, D), 1)
                    self._add("trecrit", b, level, k, chart_moment_functional(field, 2, b, level, k), 1, "chart2")
        for n in range(1 - L, 1):
            for k in ks:
                func = puno_functional(datum, zero, n, k, L, D)
                self._add("puno", zero, n, k, func, 1)
                if n == 1 - L and k in strict:
                    self._add("funo", zero, n, k, func, 1)
        # (A) complement conditions; the outermost level per center gives the vanishing residual
        outer: dict = {}
        def record(a, n, k, func):
            self._add("pdue", a, n, k, func, -1)
            if k in strict:
                key = (_element_key(a), k)
                if key not in outer or n < outer[key][1]:
                    outer[key] = (a, n, k, func)
        for level in range(L + 1):
            for x in field.coset_reps(level):
                a = x * pi if not x.is_zero() else zero
                for k in ks:
                    record(a, level, k, pdue_functional(datum, a, level, k, L, D))
        for level in range(1, L + 1):
            for b in field.coset_reps(level):
                if b.is_zero() or b.w >= level:
                    continue
                a = b.inverse()
                n = level - 1 - 2 * b.w
                for k in ks:
                    record(a, n, k, pdue_functional(datum, a, n, k, L, D))
        small_centers = [zero] + field.coset_reps(1, True)
        for n in range(-L, 0):
            for a in small_centers:
                for k in ks:
                    record(a, n, k, pdue_functional(datum, a, n, k, L, D))
        for level in range(L + 1):
            for k in ks:
                self._add("duecrit", zero, level, k, chart_moment_functional(field, 2, zero, level, k), 1, "chart2")
        for a, n, k, func in outer.values():
            self._add("fdue", a, n, k, func, -1)

    def requirements(self) -> tuple:
        levels, degs = [], []
        for items in self.items.values():
            for it in items:
                l, d = it.functional.requirements()
                levels.append(l)
                degs.append(d)
        return max(levels, default=0), max(degs, default=0)

    def report(self, mu: TwoChartDistribution, side: str) -> ConditionReport:
        names = ["puno", "pdue"] if side == "A" else ["unocrit", "duecrit", "trecrit", "funo", "fdue"]
        need_level, need_deg = self.requirements()
        for table in (mu.mu1, mu.mu2):
            if table.Nmax < need_level or table.Mmax < need_deg:
                raise CoverageExceeded(
                    f"window needs tables to level {need_level} and degree {need_deg}; got {table.Nmax}, {table.Mmax}"
                )
        constants, witnesses = {}, {}
        cache = getattr(self, "_cache", None)
        if cache is None or cache[0] is not mu:
            self._cache = (mu, {})
        values = self._cache[1]
        for name in names:
            best, wit = INF, None
            for it in self.items.get(name, []):
                fid = id(it.functional)
                if fid not in values:
                    values[fid] = it.functional.evaluate(mu)
                t = it.exponent(values[fid], self.r)
                if t < best:
                    best, wit = t, (it.a, it.n, it.k, it.coordinates)
            constants[name] = LogNorm(best)
            witnesses[name] = wit
        notes = []
        if not self.datum.strict_exponents(self.window.degree):
            notes.append("strict region r - |k| > 0 is empty: vanishing conditions are vacuous")
        else:
            notes.append("vanishing conditions reported as residuals at the outermost covered level")
        return ConditionReport(side, constants, witnesses, self.window.to_json(), notes)


def _element_key(a: PadicElement) -> tuple:
    return (a.w, a.unit) if not a.is_zero() else ("zero",)


_SYSTEM_CACHE: dict = {}


def condition_system(datum: InductionDatum, window: ConditionRange) -> ConditionSystem:
    key = (id(datum), window.level, window.degree)
    if key not in _SYSTEM_CACHE:
        _SYSTEM_CACHE[key] = ConditionSystem(datum, window)
    return _SYSTEM_CACHE[key]


def cond_A_check(mu: TwoChartDistribution, datum: InductionDatum, window: ConditionRange | None = None) -> ConditionReport:
    return condition_system(datum, window or ConditionRange()).report(mu, "A")


def cond_B_check(mu: TwoChartDistribution, datum: InductionDatum, window: ConditionRange | None = None) -> ConditionReport:
    return condition_system(datum, window or ConditionRange()).report(mu, "B")


# ---------------------------------------------------------------------------
# constants of the equivalence and the C^r extension family


def kappa_AB(datum: InductionDatum, degree: int = 8) -> tuple:
    """C1 q^(n0 r), C1 = sup |b_l| of the expansion of psi at 1 on D(1, n0)."""
    psi = datum.psi
    n0 = analyticity_level_at_1(psi)
    expansion = chi_local_expansion(psi, datum.field.one(), n0, degree)
    c1 = norm_max(c.norm() for c in expansion.coeffs.values())
    return c1 * LogNorm.q_power(n0 * datum.r), {"C1": c1, "n0": n0}


def kappa_BA(datum: InductionDatum, degree: int = 3) -> tuple:
    """q^r max(1, C), C = max over the strict region of the C^r bound of 1_{O^x} psi(z) z^(d-k)."""
    r = datum.r
    level = analyticity_level(datum.psi)
    c_lf = LogNorm.zero()
    for k in datum.strict_exponents(degree):
        exponent = tuple(a - b for a, b in zip(datum.d_full, k))
        shell = unit_shell_function(datum.psi, exponent, level)
        c_lf = max(c_lf, cr_norm_upper(shell, r))
    return LogNorm.q_power(r) * max(LogNorm(0), c_lf), {"C": c_lf}


@dataclass
class EquivalenceRecord:
    A: ConditionReport
    B: ConditionReport
    kappa_AB: LogNorm
    kappa_BA: LogNorm
    details: dict

    @property
    def a_to_b(self) -> bool:
        return self.B.total <= self.kappa_AB * self.A.total

    @property
    def b_to_a(self) -> bool:
        return self.A.total <= self.kappa_BA * self.B.total

    def to_json(self) -> dict:
        return {
            "A": self.A.to_json(),
            "B": self.B.to_json(),
            "kappaAB": self.kappa_AB.to_json(),
            "kappaBA": self.kappa_BA.to_json(),
            "C1": self.details["C1"].to_json(),
            "n0": self.details["n0"],
            "extensionConstant": self.details["C"].to_json(),
            "AimpliesB": self.a_to_b,
            "BimpliesA": self.b_to_a,
        }


def check_equivalence_preconditions(datum: InductionDatum):
    analysis = datum_analysis(datum)
    if not analysis.integral:
        raise PreconditionFailed("central character is not integral")
    if not analysis.inequality:
        raise PreconditionFailed("val(chi_2(p)) + |d| < 0: the completion is zero")
    if datum.Jprime != datum.J:
        raise PreconditionFailed("datum not reduced: some sigma outside J has d_sigma + 1 > r")
    if datum.r < 0:
        raise PreconditionFailed("r must be nonnegative")


def equivalence_harness(mu: TwoChartDistribution, datum: InductionDatum, window: ConditionRange | None = None) -> EquivalenceRecord:
    check_equivalence_preconditions(datum)
    window = window or ConditionRange()
    system = condition_system(datum, window)
    A = system.report(mu, "A")
    B = system.report(mu, "B")
    kab, d1 = kappa_AB(datum)
    kba, d2 = kappa_BA(datum, window.degree)
    return EquivalenceRecord(A, B, kab, kba, {**d1, **d2})


# ---------------------------------------------------------------------------


@dataclass
class TruncationReport:
    k: tuple
    functions: list  # f_0, f_1, ...
    differences: list  # certified upper bounds of ||f_{n+1} - f_n||
    enumerated: list  # lower bounds (or None when not computed)


def funzionicr_truncations(datum: InductionDatum, n_max: int, exponents: list, degree: int = 8, enumerate_level: int | None = None) -> list:
    """f_n = 1_{O_F - D(0,n)} psi'(z) z^(d'-k) as locally polynomial functions, n = 0..n_max.

    Shell j is p^j O_F^x; on D(p^j a_i, j + l) the function equals
    psi'(p^j) p^(j|d'-k|) sum_h b_h(a_i) p^(-j|h|) (z - p^j a_i)^h,
    with b_h(a_i) the coefficients of u -> psi'(u) u^(d'-k) on D(a_i, l).
    """
    red = datum.reduced()
    r = datum.r
    field = datum.field
    psi = red.psi
    level = analyticity_level(psi)
    reports = []
    for k in exponents:
        k = tuple(k)
        if r - mi_total(k) <= 0:
            raise PreconditionFailed(f"exponent {k} outside the strict region r - |k| > 0")
        if any(k[s] > red.d[s] for s in range(field.f) if s not in red.J):
            raise PreconditionFailed(f"exponent {k} exceeds d outside J'")
        exponent = tuple(a - b for a, b in zip(red.d_full, k))
        shell = unit_shell_function(psi, exponent, level, degree, red.J, red.d)
        fns = [LocallyPolyFunction(field, level - 1, {}, red.J, dict(red.d))]
        for n in range(1, n_max + 1):
            j = n - 1
            scal = chi_eval(psi, field.pi_power(j)) * field.pi_power(j * mi_total(exponent))
            pieces = {}
            for key, pol in shell.pieces.items():
                new_key = tuple(c * field.p**j for c in key)
                coeffs = {h: (c * scal).scale_pi(-j * mi_total(h)) for h, c in pol.coeffs.items()}
                pieces[new_key] = LocalPolynomial(field.rep_from_key(new_key), coeffs)
            fns.append(fns[-1] + LocallyPolyFunction(field, j + level, pieces, red.J, dict(red.d)))
        diffs, enums = [], []
        for a, b in zip(fns, fns[1:]):
            diff = b - a
            diffs.append(cr_norm_upper(diff, r))
            enums.append(cr_norm_enum(diff, r, enumerate_level) if enumerate_level is not None else None)
        reports.append(TruncationReport(k, fns, diffs, enums))
    return reports
