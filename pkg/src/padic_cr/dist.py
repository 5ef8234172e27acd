"""Distributions on O_F as finite tables of disk moments.

A table stores value(a, n, m) = mu(1_{D(a,n)} (z - a)^m) for every level
n <= Nmax, every canonical representative a of O_F / p^n and every
multi-index m with |m| <= Mmax.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass
from fractions import Fraction

from .field import (
    INF,
    FieldDescriptor,
    LogNorm,
    PadicElement,
    coset_coefficients,
    coset_key_from_string,
    coset_key_string,
    fraction_json,
    mi_binomial,
    mi_below,
    mi_sub,
    mi_total,
    monomial,
    multi_indices,
)
from .funcspace import CoverageExceeded, LocallyPolyFunction


class MomentTable:
    def __init__(self, field: FieldDescriptor, Nmax: int, Mmax: int, values: dict | None = None):
        self.field = field
        self.Nmax = Nmax
        self.Mmax = Mmax
        self.values = values if values is not None else {}

    @property
    def degrees(self) -> list:
        return multi_indices(self.field.f, self.Mmax)

    def nodes(self):
        """All (n, key, m) in canonical order."""
        degs = self.degrees
        for n in range(self.Nmax + 1):
            for key in coset_coefficients(self.field.p, self.field.f, n):
                for m in degs:
                    yield n, key, m

    def value(self, n: int, key: tuple, m: tuple) -> PadicElement:
        if n > self.Nmax or n < 0 or mi_total(m) > self.Mmax:
            raise CoverageExceeded(f"moment (a={key}, n={n}, m={m}) outside the stored range")
        return self.values.get((n, key, m)) or self.field.zero()

    def moment(self, center: PadicElement, level: int, m: tuple) -> PadicElement:
        """mu(1_{D(center, level)} (z - center)^m) for an arbitrary center in O_F."""
        key = center.coset_key(level)
        rep = self.field.rep_from_key(key)
        shift = rep - center
        if shift.is_zero():
            return self.value(level, key, m)
        total = self.field.zero()
        for k in mi_below(m):
            v = self.value(level, key, k)
            if v.is_zero():
                continue
            total = total + v * monomial(shift, mi_sub(m, k)) * mi_binomial(m, k)
        return total

    def scale(self, s: PadicElement) -> "MomentTable":
        return MomentTable(self.field, self.Nmax, self.Mmax, {k: v * s for k, v in self.values.items()})

    def __add__(self, other: "MomentTable") -> "MomentTable":
        N, M = min(self.Nmax, other.Nmax), min(self.Mmax, other.Mmax)
        out = {}
        for node in MomentTable(self.field, N, M).nodes():
            out[node] = self.value(*node) + other.value(*node)
        return MomentTable(self.field, N, M, out)

    def __sub__(self, other: "MomentTable") -> "MomentTable":
        return self + other.scale(self.field.from_int(-1))

    def to_json(self) -> dict:
        p = self.field.p
        rows = []
        for n, key, m in self.nodes():
            v = self.values.get((n, key, m))
            if v is None:
                continue
            rows.append({"a": coset_key_string(key, p, n), "n": n, "m": list(m), "v": v.to_json()})
        return {"field": self.field.to_json(), "Nmax": self.Nmax, "Mmax": self.Mmax, "values": rows}

    @classmethod
    def from_json(cls, data: dict, field: FieldDescriptor | None = None) -> "MomentTable":
        field = field or FieldDescriptor.from_json(data["field"])
        values = {}
        for row in data["values"]:
            n = int(row["n"])
            key = coset_key_from_string(row["a"], field.p, field.f)
            m = tuple(int(x) for x in row["m"])
            if len(m) != field.f:
                raise ValueError("moment multi-index has the wrong length")
            values[(n, key, m)] = PadicElement.from_json(field, row["v"])
        return cls(field, int(data["Nmax"]), int(data["Mmax"]), values)


def zero_table(field: FieldDescriptor, Nmax: int, Mmax: int) -> MomentTable:
    return MomentTable(field, Nmax, Mmax, {})


def _children(field: FieldDescriptor, key: tuple, n: int) -> list:
    scale = field.p**n
    return [tuple(k + scale * c for k, c in zip(key, e)) for e in coset_coefficients(field.p, field.f, 1)]


def refine_identity(table: MomentTable, n: int, key: tuple, m: tuple) -> PadicElement:
    """Right-hand side of the refinement identity at (a, n, m)."""
    field = table.field
    a = field.rep_from_key(key)
    total = field.zero()
    for child in _children(field, key, n):
        shift = field.rep_from_key(child) - a
        for k in mi_below(m):
            v = table.value(n + 1, child, k)
            if v.is_zero():
                continue
            total = total + v * monomial(shift, mi_sub(m, k)) * mi_binomial(m, k)
    return total


def consistency_check(table: MomentTable) -> list:
    """Nodes (n, key, m), n < Nmax, where the refinement identity fails."""
    bad = []
    for n, key, m in table.nodes():
        if n == table.Nmax:
            continue
        if not (table.value(n, key, m) - refine_identity(table, n, key, m)).is_zero():
            bad.append((n, key, m))
    return bad


def _fill_upwards(table: MomentTable) -> MomentTable:
    field = table.field
    degs = table.degrees
    for n in range(table.Nmax - 1, -1, -1):
        for key in coset_coefficients(field.p, field.f, n):
            for m in degs:
                v = refine_identity(table, n, key, m)
                if not v.is_zero():
                    table.values[(n, key, m)] = v
    return table


def dirac(a: PadicElement, Nmax: int, Mmax: int) -> MomentTable:
    """Point mass at a: value(b, n, m) = (a - b)^m when a lies in D(b, n)."""
    if a.w < 0:
        raise ValueError("point outside O_F")
    field = a.field
    values = {}
    degs = multi_indices(field.f, Mmax)
    for n in range(Nmax + 1):
        key = a.coset_key(n)
        b = field.rep_from_key(key)
        for m in degs:
            v = monomial(a - b, m)
            if not v.is_zero():
                values[(n, key, m)] = v
    return MomentTable(field, Nmax, Mmax, values)


def random_consistent(field: FieldDescriptor, seed: int, Nmax: int, Mmax: int, valuation_floor: int = 0) -> MomentTable:
    """Random deepest-level moments of valuation >= floor, shallower levels derived."""
    rng = random.Random(seed)
    N = field.precision_default
    bound = field.p**N
    values = {}
    for key in coset_coefficients(field.p, field.f, Nmax):
        for m in multi_indices(field.f, Mmax):
            coeffs = [rng.randrange(bound) for _ in range(field.f)]
            v = field.element(coeffs, valuation_floor, valuation_floor + N)
            if not v.is_zero():
                values[(Nmax, key, m)] = v
    return _fill_upwards(MomentTable(field, Nmax, Mmax, values))


def growth_table(field: FieldDescriptor, Nmax: int, Mmax: int, s: int) -> MomentTable:
    """value(0, n, 0) = p^(-n s), so |value| = q^(n s); every other entry is 0.

    This table is deliberately not consistent; it only exercises the
    moment-growth inequalities.
    """
    zero_m = (0,) * field.f
    values = {(n, (0,) * field.f, zero_m): field.pi_power(-n * s) for n in range(Nmax + 1)}
    return MomentTable(field, Nmax, Mmax, values)


def pair(table: MomentTable, fn: LocallyPolyFunction) -> PadicElement:
    """mu(fn) = sum over pieces of sum_m c_m value(center, level, m)."""
    if fn.level > table.Nmax:
        fn = fn.coarsen()
        if fn.level > table.Nmax:
            raise CoverageExceeded(f"function level {fn.level} exceeds table depth {table.Nmax}")
    if fn.max_degree() > table.Mmax:
        raise CoverageExceeded(f"function degree {fn.max_degree()} exceeds table degree {table.Mmax}")
    total = table.field.zero()
    for key, pol in fn.pieces.items():
        for m, c in pol.coeffs.items():
            if not c.is_zero():
                total = total + c * table.moment(pol.center, fn.level, m)
    return total


# ---------------------------------------------------------------------------


@dataclass
class AvvReport:
    constant: LogNorm
    witness: tuple | None  # (key, n, m)
    r: Fraction
    Nmax: int
    Mmax: int
    budget: LogNorm | None = None

    @property
    def satisfied(self) -> bool | None:
        if self.budget is None:
            return None
        return self.constant <= self.budget

    def to_json(self, p: int) -> dict:
        out = {
            "constant": self.constant.to_json(),
            "witness": None
            if self.witness is None
            else {"a": coset_key_string(self.witness[0], p, self.witness[1]), "n": self.witness[1], "m": list(self.witness[2])},
            "r": fraction_json(self.r),
            "range": {"Nmax": self.Nmax, "Mmax": self.Mmax, "scope": "stored range only"},
        }
        if self.budget is not None:
            out["budget"] = self.budget.to_json()
            out["satisfied"] = self.satisfied
        return out


def _allowed(m: tuple, J, d: dict) -> bool:
    return all(m[s] <= d.get(s, 0) for s in range(len(m)) if s not in J)


def avv_norm(table: MomentTable, r, J=None, d: dict | None = None) -> AvvReport:
    """sup over stored (a, n, m) of |value| q^(-n (r - |m|)), with the first attaining node."""
    r = Fraction(r)
    f = table.field.f
    J = frozenset(range(f)) if J is None else frozenset(J)
    d = d or {}
    best, witness = INF, None
    for n, key, m in table.nodes():
        if not _allowed(m, J, d):
            continue
        v = table.values.get((n, key, m))
        if v is None or v.is_zero():
            continue
        t = v.w + n * (r - mi_total(m))
        if t < best:
            best, witness = t, (key, n, m)
    return AvvReport(LogNorm(best), witness, r, table.Nmax, table.Mmax)


def velu_check(table: MomentTable, r, J=None, d: dict | None = None, budget=1) -> AvvReport:
    """Check |mu(1_{D(a,n)} (z-a)^m)| <= C q^(n (r - |m|)) on the stored range."""
    r = Fraction(r)
    if table.Mmax < math.floor(r):
        raise ValueError(f"table degree {table.Mmax} below [r] = {math.floor(r)}")
    report = avv_norm(table, r, J, d)
    report.budget = budget if isinstance(budget, LogNorm) else _budget_norm(table.field, budget)
    return report


def _budget_norm(field: FieldDescriptor, c) -> LogNorm:
    c = Fraction(c)
    if c == 0:
        return LogNorm.zero()
    if c < 0:
        raise ValueError("budget must be nonnegative")
    # the largest q-power <= c is the relevant threshold for q-power constants
    k = 0
    q = field.q
    while Fraction(q) ** (k + 1) <= c:
        k += 1
    while Fraction(q) ** k > c:
        k -= 1
    return LogNorm.q_power(k)


def action_factor(datum, n: int) -> PadicElement:
    """chi_2(p^n) p^(n |d|), the scalar in front of the translated function."""
    from .chars import chi_eval

    field = datum.field
    return chi_eval(datum.chi2, field.pi_power(n)) * field.pi_power(n * mi_total(datum.d_full))


def translate_scale_action(table: MomentTable, n: int, a: PadicElement, datum) -> MomentTable:
    """The table of g mu with (g mu)(f) = mu(g f), g = [[p^n, a], [0, 1]].

    (g f)(z) = chi_2(p^n) p^(n|d|) 1_{D(a,n)}(z) f((z - a) / p^n), hence
    new value(b, l, m) = chi_2(p^n) p^(n|d|) p^(-n|m|) mu(1_{D(a + p^n b, n + l)} (z - a - p^n b)^m).
    """
    if n < 0:
        raise ValueError("n must be nonnegative")
    if a.w < 0:
        raise ValueError("translation outside O_F")
    if n > table.Nmax:
        raise CoverageExceeded(f"shift level {n} exceeds table depth {table.Nmax}")
    field = table.field
    factor = action_factor(datum, n)
    N = table.Nmax - n
    degs = multi_indices(field.f, table.Mmax)
    values = {}
    for l in range(N + 1):
        for key in coset_coefficients(field.p, field.f, l):
            center = a + field.rep_from_key(key).scale_pi(n)
            for m in degs:
                v = table.moment(center, n + l, m)
                if v.is_zero():
                    continue
                values[(l, key, m)] = factor * v.scale_pi(-n * mi_total(m))
    return MomentTable(field, N, table.Mmax, values)
