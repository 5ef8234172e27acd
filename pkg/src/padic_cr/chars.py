"""Characters F^x -> E^x of the form unramified x algebraic x finite smooth.

We take E = F.  A character is

    chi(p^w u) = lam^(val_F(p^w u)) * prod_sigma sigma(p^w u)^(a_sigma) * smooth(u mod p^c)

with ``lam`` a nonzero element, ``alg_exp`` = (a_sigma) an integer multi-index
and ``smooth`` a table on (O_F / p^c)^x keyed by unit coset keys.
"""

from __future__ import annotations

from dataclasses import dataclass, field as dc_field
from fractions import Fraction

from .field import (
    FieldDescriptor,
    LogNorm,
    MultiIndex,
    PadicElement,
    coset_coefficients,
    coset_key_from_string,
    coset_key_string,
    generalized_binomial,
    mi_add,
    mi_le,
    mi_binomial,
    mi_below,
    mi_sub,
    mi_total,
    mi_zero,
    monomial,
    multi_indices,
    frobenius,
)
from .funcspace import LocalPolynomial

# re-exported multi-index helpers
__all__ = [
    "Character",
    "MultiIndex",
    "chi_eval",
    "chi_val_p",
    "chi_local_expansion",
    "expansion_tail_bound",
    "analyticity_level",
    "analyticity_level_at_1",
    "mi_add",
    "mi_sub",
    "mi_le",
    "mi_total",
    "mi_binomial",
    "mi_below",
    "multi_indices",
]

DEFAULT_TRUNCATION = 8


@dataclass
class Character:
    field: FieldDescriptor
    lam: PadicElement
    alg_exp: MultiIndex
    conductor: int = 0
    table: dict = dc_field(default_factory=dict)  # unit key mod p^conductor -> value
    J: frozenset = None

    def __post_init__(self):
        f = self.field.f
        if self.lam.is_zero():
            raise ValueError("unramified parameter must be nonzero")
        self.alg_exp = tuple(int(a) for a in self.alg_exp)
        if len(self.alg_exp) != f:
            raise ValueError("algebraic exponent must have one entry per embedding")
        if self.J is None:
            self.J = frozenset(range(f))
        self.J = frozenset(self.J)
        if self.conductor < 0:
            raise ValueError("conductor must be nonnegative")
        if self.conductor > 0:
            keys = set(coset_coefficients(self.field.p, f, self.conductor, True))
            if set(self.table) != keys:
                raise ValueError("smooth table must have one value per unit coset")

    # -- constructors ---------------------------------------------------

    @classmethod
    def trivial(cls, field: FieldDescriptor) -> "Character":
        return cls(field, field.one(), mi_zero(field.f))

    @classmethod
    def unramified(cls, lam: PadicElement, J=None) -> "Character":
        return cls(lam.field, lam, mi_zero(lam.field.f), J=J)

    @classmethod
    def algebraic(cls, field: FieldDescriptor, exps, J=None) -> "Character":
        return cls(field, field.one(), tuple(exps), J=J)

    @classmethod
    def smooth(cls, field: FieldDescriptor, conductor: int, values: dict, J=None) -> "Character":
        return cls(field, field.one(), mi_zero(field.f), conductor, dict(values), J)

    # -- queries --------------------------------------------------------

    def smooth_value(self, unit: PadicElement) -> PadicElement:
        if self.conductor == 0:
            return self.field.one()
        return self.table[unit.coset_key(self.conductor)]

    def is_multiplicative_table(self) -> bool:
        """The smooth table is a homomorphism on (O_F/p^c)^x (checked on all pairs)."""
        if self.conductor == 0:
            return True
        mod = self.field.p**self.conductor
        keys = list(self.table)
        one = (1,) + (0,) * (self.field.f - 1)
        if not (self.table[one] - 1).is_zero():
            return False
        for a in keys:
            ea = self.field.element(a, 0)
            for b in keys:
                prod = (ea * self.field.element(b, 0)).coset_key(self.conductor)
                if not (self.table[a] * self.table[b] - self.table[prod]).is_zero():
                    return False
        return True

    def __mul__(self, other: "Character") -> "Character":
        c = max(self.conductor, other.conductor)
        table = {}
        if c:
            for key in coset_coefficients(self.field.p, self.field.f, c, True):
                u = self.field.element(key, 0)
                table[key] = self.smooth_value(u) * other.smooth_value(u)
        return Character(self.field, self.lam * other.lam, mi_add(self.alg_exp, other.alg_exp), c, table, self.J & other.J)

    def inverse(self) -> "Character":
        table = {k: v.inverse() for k, v in self.table.items()}
        return Character(self.field, self.lam.inverse(), tuple(-a for a in self.alg_exp), self.conductor, table, self.J)

    def __truediv__(self, other: "Character") -> "Character":
        return self * other.inverse()

    def __call__(self, x: PadicElement) -> PadicElement:
        return chi_eval(self, x)

    # -- serialization --------------------------------------------------

    def to_json(self) -> dict:
        p = self.field.p
        table = {coset_key_string(k, p, self.conductor): self.table[k].to_json() for k in sorted(self.table)}
        return {
            "lambda": self.lam.to_json(),
            "algExp": list(self.alg_exp),
            "smooth": {"conductor": self.conductor, "table": table},
            "J": sorted(self.J),
        }

    @classmethod
    def from_json(cls, field: FieldDescriptor, data: dict) -> "Character":
        lam = PadicElement.from_json(field, data["lambda"])
        smooth = data.get("smooth", {"conductor": 0, "table": {}})
        c = int(smooth.get("conductor", 0))
        table = {
            coset_key_from_string(k, field.p, field.f): PadicElement.from_json(field, v)
            for k, v in smooth.get("table", {}).items()
        }
        return cls(field, lam, tuple(data.get("algExp", [0] * field.f)), c, table, frozenset(data.get("J", range(field.f))))


def chi_eval(chi: Character, x: PadicElement) -> PadicElement:
    """lam^(val_F(x)) * prod sigma(x)^(a_sigma) * smooth(unit part of x)."""
    if x.is_zero():
        raise ZeroDivisionError("characters are not defined at 0")
    field = chi.field
    unit = PadicElement(field, 0, x.unit, x.prec - x.w)
    out = chi.lam ** x.val_F
    if any(chi.alg_exp):
        out = out * monomial(x, chi.alg_exp)
    if chi.conductor:
        out = out * chi.smooth_value(unit)
    return out


def chi_val_p(chi: Character) -> Fraction:
    """val_{Q_p}(chi(p)), read off from chi_eval at p."""
    value = chi_eval(chi, chi.field.pi_power(1))
    return Fraction(value.val_F, chi.field.degree)


def chi_local_expansion(chi: Character, a: PadicElement, n: int, degree: int = DEFAULT_TRUNCATION) -> LocalPolynomial:
    """Coefficients b_m(a) of chi on D(a, n), truncated at total degree ``degree``.

    chi(z) = chi(a) prod_sigma (1 + sigma(z - a) / sigma(a))^(a_sigma), so
    b_m = chi(a) prod_sigma binom(a_sigma, m_sigma) sigma(a)^(-m_sigma).
    """
    if not a.is_unit():
        raise ValueError("expansion center must be a unit")
    if n < analyticity_level(chi):
        raise ValueError(f"level {n} below the analyticity level {analyticity_level(chi)}")
    return affine_character_expansion(chi, a.field.zero(), a.field.one(), a, n, degree)


def expansion_tail_bound(chi: Character, a: PadicElement, n: int, degree: int = DEFAULT_TRUNCATION) -> LogNorm:
    """Bound on sup_{D(a,n)} of the omitted terms: |chi(a)| q^(-n (degree+1))."""
    if all(x >= 0 for x in chi.alg_exp) and sum(chi.alg_exp) <= degree:
        return LogNorm.zero()
    return chi_eval(chi, a).norm() * LogNorm(n * (degree + 1))


def affine_character_expansion(
    chi: Character,
    alpha: PadicElement,
    beta: PadicElement,
    center: PadicElement,
    level: int,
    degree: int = DEFAULT_TRUNCATION,
    char_power: int = 1,
    power_exp: MultiIndex | None = None,
) -> LocalPolynomial:
    """Expansion on D(center, level) of w -> chi^k(alpha + beta w) * (alpha + beta w)^e.

    ``char_power`` is k and ``power_exp`` is e.  The affine form must keep a
    constant valuation on the disk and the smooth part must be constant there
    whenever k != 0; exponents with negative entries give a series truncated
    at total degree ``degree``.
    """
    field = chi.field
    f = field.f
    if power_exp is None:
        power_exp = mi_zero(f)
    value = alpha + beta * center
    total_exp = tuple(char_power * a + e for a, e in zip(chi.alg_exp, power_exp))
    needs_constant = char_power != 0 or any(e < 0 for e in total_exp)
    if needs_constant and value.is_zero():
        raise ValueError("affine form vanishes at the center")
    if needs_constant:
        gap = beta.w + level - value.w
        if gap < 1:
            raise ValueError("affine form does not keep a constant valuation on the disk")
        if char_power and chi.conductor and gap < chi.conductor:
            raise ValueError("smooth part is not constant on the disk")
    prefactor = field.one()
    if char_power:
        unit = PadicElement(field, 0, value.unit, value.prec - value.w)
        prefactor = (chi.lam ** value.val_F * chi.smooth_value(unit)) ** char_power
    finite = all(e >= 0 for e in total_exp)
    if finite:
        indices = [m for m in multi_indices(f, sum(total_exp)) if mi_le(m, total_exp)]
    else:
        indices = multi_indices(f, degree)
    base = [frobenius(value, i) for i in range(f)]
    slope = [frobenius(beta, i) for i in range(f)]
    coeffs = {}
    for m in indices:
        c = prefactor
        for i in range(f):
            b = generalized_binomial(total_exp[i], m[i])
            if b == 0:
                c = None
                break
            c = c * b * slope[i] ** m[i]
            if total_exp[i] != m[i]:
                c = c * base[i] ** (total_exp[i] - m[i])
        if c is not None and not c.is_zero():
            coeffs[m] = c
    return LocalPolynomial(center, coeffs)


def analyticity_level(chi: Character) -> int:
    """Smallest l >= 1 with the smooth part constant on every unit disk D(a, l)."""
    c = chi.conductor
    if c == 0:
        return 1
    p, f = chi.field.p, chi.field.f
    for level in range(1, c + 1):
        mod = p**level
        seen: dict = {}
        ok = True
        for key, value in chi.table.items():
            parent = tuple(k % mod for k in key)
            if parent in seen:
                if not (seen[parent] - value).is_zero():
                    ok = False
                    break
            else:
                seen[parent] = value
        if ok:
            return level
    return c


def analyticity_level_at_1(chi: Character) -> int:
    """Smallest n0 >= 1 with the smooth part constant on D(1, n0)."""
    c = chi.conductor
    if c == 0:
        return 1
    p, f = chi.field.p, chi.field.f
    one = (1,) + (0,) * (f - 1)
    for level in range(1, c + 1):
        mod = p**level
        values = [v for key, v in chi.table.items() if tuple(k % mod for k in key) == one]
        if all((v - values[0]).is_zero() for v in values):
            return level
    return c
