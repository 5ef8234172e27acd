"""Exact arithmetic in Q_p and its unramified extensions.

Elements of the unramified extension F of degree f are stored as
``p**w * u`` where ``u`` is a unit of O_F = Z_p[x]/(P) given by its
coefficient tuple in the basis 1, x, ..., x^(f-1).  The modulus P is the
lexicographically smallest monic polynomial of degree f that is
irreducible modulo p.  Precision is absolute: an element with ``prec = N``
is known modulo p^N.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Iterable, Sequence

INF = math.inf

MultiIndex = tuple


class PrecisionExhausted(ArithmeticError):
    """Raised when a result cannot be distinguished from zero."""


def vp(n: int, p: int) -> float:
    """p-adic valuation of an integer (INF for zero)."""
    if n == 0:
        return INF
    k = 0
    while n % p == 0:
        n //= p
        k += 1
    return k


def _is_prime(n: int) -> bool:
    if n < 2:
        return False
    return all(n % d for d in range(2, math.isqrt(n) + 1))


# ---------------------------------------------------------------------------
# polynomial helpers over Z / p^k, coefficients low degree first


def _poly_mulmod(a, b, modulus, mod):
    """Product of two coefficient tuples reduced by the monic ``modulus``."""
    f = len(modulus) - 1
    if f == 1:
        return ((a[0] * b[0]) % mod,)
    prod = [0] * (2 * f - 1)
    for i, ai in enumerate(a):
        if ai:
            for j, bj in enumerate(b):
                prod[i + j] += ai * bj
    for k in range(2 * f - 2, f - 1, -1):
        c = prod[k]
        if c:
            prod[k] = 0
            for j in range(f):
                prod[k - f + j] -= c * modulus[j]
    return tuple(c % mod for c in prod[:f])


def _poly_powmod(a, e, modulus, mod):
    f = len(modulus) - 1
    result = (1,) + (0,) * (f - 1)
    base = a
    while e:
        if e & 1:
            result = _poly_mulmod(result, base, modulus, mod)
        base = _poly_mulmod(base, base, modulus, mod)
        e >>= 1
    return result


def _irreducible_mod_p(coeffs, p):
    """Brute-force irreducibility test for a monic polynomial over F_p."""
    deg = len(coeffs) - 1
    if deg <= 1:
        return True
    # a root check is not enough for deg >= 4, so test divisibility by
    # every monic polynomial of degree <= deg/2
    for d in range(1, deg // 2 + 1):
        for low in itertools.product(range(p), repeat=d):
            divisor = list(low) + [1]
            rem = list(coeffs)
            for k in range(deg, d - 1, -1):
                c = rem[k] % p
                if c:
                    for j in range(d + 1):
                        rem[k - d + j] -= c * divisor[j]
            if all(c % p == 0 for c in rem[:d]):
                return False
    return True


@lru_cache(maxsize=None)
def _modulus(p: int, f: int) -> tuple:
    if f == 1:
        return (0, 1)
    for low in itertools.product(range(p), repeat=f):
        coeffs = tuple(low) + (1,)
        if coeffs[0] and _irreducible_mod_p(coeffs, p):
            return coeffs
    raise ValueError("no irreducible polynomial found")


# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class FieldDescriptor:
    """Unramified extension of Q_p of residue degree ``f``."""

    p: int
    f: int = 1
    precision_default: int = 32
    e: int = 1

    def __post_init__(self):
        if not _is_prime(self.p):
            raise ValueError(f"p={self.p} is not prime")
        if self.f < 1:
            raise ValueError("residue degree must be >= 1")
        if self.e != 1:
            raise ValueError("only unramified fields (e = 1) are supported")
        if self.precision_default < 1:
            raise ValueError("precision must be positive")

    @property
    def q(self) -> int:
        return self.p**self.f

    @property
    def degree(self) -> int:
        return self.e * self.f

    @property
    def modulus(self) -> tuple:
        return _modulus(self.p, self.f)

    def same_field(self, other: "FieldDescriptor") -> bool:
        return self.p == other.p and self.f == other.f

    def with_precision(self, prec: int) -> "FieldDescriptor":
        return FieldDescriptor(self.p, self.f, prec)

    def to_json(self) -> dict:
        return {"p": self.p, "f": self.f}

    @classmethod
    def from_json(cls, data: dict, precision: int = 32) -> "FieldDescriptor":
        return cls(int(data["p"]), int(data.get("f", 1)), precision)

    # -- constructors -------------------------------------------------

    def element(self, coeffs: Sequence[int], w: int = 0, prec: int | None = None) -> "PadicElement":
        """The element p^w * (c_0 + c_1 x + ...), known to ``prec`` (absolute)."""
        coeffs = tuple(int(c) for c in coeffs)
        if len(coeffs) != self.f:
            raise ValueError(f"expected {self.f} coefficients")
        if prec is None:
            k = min(vp(c, self.p) for c in coeffs)
            prec = w + (0 if k == INF else k) + self.precision_default
        return _normalize(self, w, coeffs, prec)

    def from_int(self, n: int, prec: int | None = None) -> "PadicElement":
        return self.element((n,) + (0,) * (self.f - 1), 0, prec)

    def from_fraction(self, x, prec: int | None = None) -> "PadicElement":
        x = Fraction(x)
        if x.numerator == 0:
            return self.zero(prec)
        den = x.denominator
        k = vp(den, self.p)
        unit_den = den // self.p**k
        num = self.from_int(x.numerator)
        result = num * self.from_int(unit_den).inverse()
        result = result * self.pi_power(-k)
        if prec is not None:
            result = result.with_prec(prec)
        return result

    def zero(self, prec: int | None = None) -> "PadicElement":
        return PadicElement(self, INF, (0,) * self.f, self.precision_default if prec is None else prec)

    def one(self) -> "PadicElement":
        return self.from_int(1)

    def pi_power(self, k: int) -> "PadicElement":
        return PadicElement(self, k, (1,) + (0,) * (self.f - 1), k + self.precision_default)

    def residue_elements(self) -> list:
        """Coefficient tuples of the residue field F_q, canonical order."""
        return [tuple(reversed(t)) for t in itertools.product(range(self.p), repeat=self.f)]

    # -- cosets -------------------------------------------------------

    def coset_reps(self, k: int, units_only: bool = False) -> list:
        """Canonical representatives of O_F / p^k (or its units)."""
        if k < 0:
            raise ValueError("level must be nonnegative")
        if units_only and k == 0:
            raise ValueError("unit representatives need k >= 1")
        return [self.element(c, 0) if any(c) else self.zero() for c in coset_coefficients(self.p, self.f, k, units_only)]

    def rep_from_key(self, key: tuple) -> "PadicElement":
        if not any(key):
            return self.zero()
        return self.element(key, 0)

    def teichmuller(self, residue: Sequence[int], prec: int | None = None) -> "PadicElement":
        """Teichmüller lift of a residue-field element given by its coefficients."""
        prec = self.precision_default if prec is None else prec
        residue = tuple(int(c) % self.p for c in residue)
        if not any(residue):
            return self.zero(prec)
        mod = self.p**prec
        x = residue
        for _ in range(prec):
            x = _poly_powmod(x, self.q, self.modulus, mod)
        return self.element(x, 0, prec)


@lru_cache(maxsize=None)
def coset_coefficients(p: int, f: int, k: int, units_only: bool = False) -> tuple:
    """Coefficient tuples of the canonical reps of O_F/p^k.

    Index t in [0, q^k) is read in base q, lowest digit first; each base-q
    digit is a residue element read in base p.  Level k+1 reps therefore
    reduce to level k reps by taking t mod q^k.
    """
    q = p**f
    out = []
    for t in range(q**k):
        coeffs = [0] * f
        scale = 1
        s = t
        for _ in range(k):
            digit = s % q
            s //= q
            for i in range(f):
                coeffs[i] += (digit % p) * scale
                digit //= p
            scale *= p
        if units_only and all(c % p == 0 for c in coeffs):
            continue
        out.append(tuple(coeffs))
    return tuple(out)


def _valuation_of_coeffs(coeffs, p) -> float:
    return min(vp(c, p) for c in coeffs)


def _normalize(field: FieldDescriptor, v, coeffs, prec) -> "PadicElement":
    """Build p^v * coeffs known modulo p^prec, extracting the valuation."""
    p = field.p
    rel = prec - v
    if rel <= 0:
        return PadicElement(field, INF, (0,) * field.f, prec)
    mod = p**rel
    coeffs = tuple(c % mod for c in coeffs)
    k = _valuation_of_coeffs(coeffs, p)
    if k == INF:
        return PadicElement(field, INF, (0,) * field.f, prec)
    if k:
        div = p**k
        coeffs = tuple(c // div for c in coeffs)
        mod //= div
    return PadicElement(field, v + k, coeffs, prec)


# ---------------------------------------------------------------------------


class PadicElement:
    """An element p^w * u of F with absolute precision ``prec``."""

    __slots__ = ("field", "w", "unit", "prec")

    def __init__(self, field: FieldDescriptor, w, unit: tuple, prec: int):
        self.field = field
        self.w = w
        self.unit = unit
        self.prec = prec

    # -- basic queries --------------------------------------------------

    def is_zero(self) -> bool:
        return self.w == INF

    @property
    def relative_precision(self) -> int:
        return 0 if self.w == INF else self.prec - self.w

    @property
    def val_F(self):
        """Valuation normalized by val_F(p) = [F:Q_p]."""
        return self.field.degree * self.w

    def norm(self) -> "LogNorm":
        return LogNorm(self.w)

    def is_integral(self) -> bool:
        return self.w >= 0

    def is_unit(self) -> bool:
        return self.w == 0

    def coefficients(self, k: int | None = None) -> tuple:
        """Coefficients of the element (must be integral) modulo p^k."""
        if self.w < 0:
            raise ValueError("element is not integral")
        k = self.prec if k is None else k
        if k > self.prec:
            raise PrecisionExhausted(f"element known mod p^{self.prec}, asked mod p^{k}")
        if self.w == INF or self.w >= k:
            return (0,) * self.field.f
        mod = self.field.p**k
        scale = self.field.p**self.w
        return tuple((c * scale) % mod for c in self.unit)

    def coset_key(self, k: int) -> tuple:
        return self.coefficients(k)

    def digits(self) -> list:
        """Pi-adic digits of the unit part, trailing zero digits trimmed."""
        if self.w == INF:
            return []
        p = self.field.p
        out = []
        coeffs = list(self.unit)
        for _ in range(self.relative_precision):
            out.append([c % p for c in coeffs])
            coeffs = [c // p for c in coeffs]
        while out and not any(out[-1]):
            out.pop()
        return out

    # -- precision ----------------------------------------------------

    def with_prec(self, prec: int) -> "PadicElement":
        """Reduce precision (never increases it beyond what is known)."""
        prec = min(prec, self.prec)
        if self.w == INF:
            return PadicElement(self.field, INF, self.unit, prec)
        return _normalize(self.field, self.w, self.unit, prec)

    def lift_exact(self, prec: int) -> "PadicElement":
        """Treat the stored digits as exact and declare precision ``prec``."""
        if self.w == INF:
            return PadicElement(self.field, INF, self.unit, prec)
        return _normalize(self.field, self.w, self.unit, prec)

    # -- arithmetic -----------------------------------------------------

    def _coerce(self, other) -> "PadicElement":
        if isinstance(other, PadicElement):
            if not self.field.same_field(other.field):
                raise ValueError("elements of different fields")
            return other
        if isinstance(other, int):
            return self.field.from_int(other)
        if isinstance(other, Fraction):
            return self.field.from_fraction(other)
        return NotImplemented

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        prec = min(self.prec, other.prec)
        if self.w == INF:
            return other.with_prec(prec)
        if other.w == INF:
            return self.with_prec(prec)
        p = self.field.p
        if self.w <= other.w:
            v = self.w
            s = p ** (other.w - v)
            coeffs = tuple(a + s * b for a, b in zip(self.unit, other.unit))
        else:
            v = other.w
            s = p ** (self.w - v)
            coeffs = tuple(s * a + b for a, b in zip(self.unit, other.unit))
        return _normalize(self.field, v, coeffs, prec)

    __radd__ = __add__

    def __neg__(self):
        if self.w == INF:
            return self
        mod = self.field.p ** (self.prec - self.w)
        return PadicElement(self.field, self.w, tuple((-c) % mod for c in self.unit), self.prec)

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return other + (-self)

    def __mul__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        field = self.field
        if self.w == INF or other.w == INF:
            if self.w == INF and other.w == INF:
                prec = self.prec + other.prec
            elif self.w == INF:
                prec = self.prec + other.w
            else:
                prec = other.prec + self.w
            return PadicElement(field, INF, (0,) * field.f, prec)
        rel = min(self.prec - self.w, other.prec - other.w)
        w = self.w + other.w
        mod = field.p**rel
        if field.f == 1:
            unit = ((self.unit[0] * other.unit[0]) % mod,)
        else:
            unit = _poly_mulmod(self.unit, other.unit, field.modulus, mod)
        return PadicElement(field, w, unit, w + rel)

    __rmul__ = __mul__

    def inverse(self) -> "PadicElement":
        field = self.field
        if self.w == INF:
            if self.prec >= field.precision_default:
                raise ZeroDivisionError("inverse of zero")
            raise PrecisionExhausted("inverse of an element indistinguishable from zero")
        rel = self.prec - self.w
        mod = field.p**rel
        unit = _unit_inverse(field, self.unit, rel, mod)
        return PadicElement(field, -self.w, unit, -self.w + rel)

    def __truediv__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self * other.inverse()

    def __rtruediv__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return other * self.inverse()

    def __pow__(self, e: int):
        if e < 0:
            return self.inverse() ** (-e)
        field = self.field
        if e == 0:
            return field.one()
        if self.w == INF:
            return PadicElement(field, INF, self.unit, self.prec * e)
        rel = self.prec - self.w
        mod = field.p**rel
        if field.f == 1:
            unit = (pow(self.unit[0], e, mod),)
        else:
            unit = _poly_powmod(self.unit, e, field.modulus, mod)
        return PadicElement(field, self.w * e, unit, self.w * e + rel)

    def scale_pi(self, k: int) -> "PadicElement":
        """Multiply by p^k exactly (relative precision unchanged)."""
        if self.w == INF:
            return PadicElement(self.field, INF, self.unit, self.prec + k)
        return PadicElement(self.field, self.w + k, self.unit, self.prec + k)

    # -- comparisons ----------------------------------------------------

    def __eq__(self, other):
        if not isinstance(other, (PadicElement, int, Fraction)):
            return NotImplemented
        return (self - other).is_zero()

    __hash__ = None

    def __repr__(self):
        if self.w == INF:
            return f"O(p^{self.prec})"
        return f"PadicElement(p^{self.w}*{self.unit}, prec={self.prec})"

    # -- serialization --------------------------------------------------

    def to_json(self) -> dict:
        return {"w": "inf" if self.w == INF else self.w, "digits": self.digits(), "prec": self.prec}

    @classmethod
    def from_json(cls, field: FieldDescriptor, data: dict) -> "PadicElement":
        prec = int(data["prec"])
        if data["w"] == "inf":
            return field.zero(prec)
        w = int(data["w"])
        coeffs = [0] * field.f
        for j, digit in enumerate(data["digits"]):
            for i, c in enumerate(digit):
                coeffs[i] += int(c) * field.p**j
        return _normalize(field, w, coeffs, prec)


def _unit_inverse(field, unit, rel, mod):
    p = field.p
    if field.f == 1:
        return (pow(unit[0], -1, mod),)
    modulus = field.modulus
    # inverse modulo p via the residue field, then Newton iteration
    y = _poly_powmod(tuple(c % p for c in unit), field.q - 2, modulus, p)
    k = 1
    two = (2,) + (0,) * (field.f - 1)
    while k < rel:
        k = min(2 * k, rel)
        m = p**k
        uy = _poly_mulmod(unit, y, modulus, m)
        y = _poly_mulmod(y, tuple((a - b) % m for a, b in zip(two, uy)), modulus, m)
    return tuple(c % mod for c in y)


# ---------------------------------------------------------------------------
# Frobenius


@lru_cache(maxsize=None)
def _frobenius_image_of_x(p: int, f: int, i: int, prec: int) -> tuple:
    """Coefficients of the root of P congruent to x^(p^i), modulo p^prec."""
    modulus = _modulus(p, f)
    x = (0, 1) + (0,) * (f - 2)
    theta = _poly_powmod(x, p**i, modulus, p)
    if f == 1 or i == 0:
        return theta
    mod = p**prec
    deriv = [k * modulus[k] for k in range(1, f + 1)]
    fd = FieldDescriptor(p, f, prec)
    for _ in range(prec.bit_length() + 2):
        val = _eval_poly(modulus, theta, modulus, mod)
        dval = _eval_poly(deriv, theta, modulus, mod)
        inv = _unit_inverse(fd, dval, prec, mod)
        step = _poly_mulmod(val, inv, modulus, mod)
        theta = tuple((a - b) % mod for a, b in zip(theta, step))
    return theta


def _eval_poly(poly, point, modulus, mod):
    f = len(modulus) - 1
    acc = (0,) * f
    for c in reversed(poly):
        acc = _poly_mulmod(acc, point, modulus, mod)
        acc = (acc[0] + c,) + acc[1:]
    return tuple(a % mod for a in acc)


@lru_cache(maxsize=None)
def _frobenius_basis_images(p: int, f: int, i: int, prec: int) -> tuple:
    theta = _frobenius_image_of_x(p, f, i, prec)
    mod = p**prec
    modulus = _modulus(p, f)
    powers = [(1,) + (0,) * (f - 1)]
    for _ in range(1, f):
        powers.append(_poly_mulmod(powers[-1], theta, modulus, mod))
    return tuple(powers)


def frobenius_coeffs(p: int, f: int, coeffs: tuple, i: int, rel: int) -> tuple:
    """Apply the i-th Frobenius power to a coefficient tuple modulo p^rel."""
    if f == 1 or i % f == 0:
        return coeffs
    i %= f
    mod = p**rel
    basis = _frobenius_basis_images(p, f, i, max(rel, 1))
    out = [0] * f
    for c, img in zip(coeffs, basis):
        if c:
            for k in range(f):
                out[k] += c * img[k]
    return tuple(o % mod for o in out)


def frobenius(x: PadicElement, i: int) -> PadicElement:
    """The embedding sigma_i: the i-th power of the Frobenius automorphism."""
    field = x.field
    if not 0 <= i < field.f:
        raise ValueError(f"embedding index {i} outside 0..{field.f - 1}")
    if x.w == INF or i == 0:
        return x
    unit = frobenius_coeffs(field.p, field.f, x.unit, i, x.prec - x.w)
    return PadicElement(field, x.w, unit, x.prec)


def embeddings(x: PadicElement) -> list:
    return [frobenius(x, i) for i in range(x.field.f)]


def monomial(z: PadicElement, m: MultiIndex) -> PadicElement:
    """prod_sigma sigma(z)^(m_sigma); exponents may be negative for z != 0."""
    field = z.field
    if len(m) != field.f:
        raise ValueError("multi-index length must equal the number of embeddings")
    result = field.one()
    for i, e in enumerate(m):
        if e:
            result = result * frobenius(z, i) ** e
    if not any(m):
        return result
    return result


# ---------------------------------------------------------------------------


class LogNorm:
    """A norm value q^(-t); ``t = INF`` encodes the value 0.

    Ordering follows the value, so a larger exponent ``t`` is a smaller norm.
    """

    __slots__ = ("t",)

    def __init__(self, t=0):
        self.t = INF if t == INF else Fraction(t)

    @classmethod
    def zero(cls) -> "LogNorm":
        return cls(INF)

    @classmethod
    def q_power(cls, exponent) -> "LogNorm":
        """The value q^exponent."""
        return cls(-Fraction(exponent))

    @property
    def q_exponent(self):
        """Exponent e with value q^e (-INF for zero)."""
        return -INF if self.t == INF else -self.t

    def is_zero(self) -> bool:
        return self.t == INF

    def __mul__(self, other: "LogNorm") -> "LogNorm":
        if self.t == INF or other.t == INF:
            return LogNorm(INF)
        return LogNorm(self.t + other.t)

    def __truediv__(self, other: "LogNorm") -> "LogNorm":
        if other.t == INF:
            raise ZeroDivisionError("division by the zero norm")
        if self.t == INF:
            return LogNorm(INF)
        return LogNorm(self.t - other.t)

    def __eq__(self, other):
        if not isinstance(other, LogNorm):
            return NotImplemented
        return self.t == other.t

    def __hash__(self):
        return hash(self.t)

    def __lt__(self, other: "LogNorm") -> bool:
        return self.t > other.t

    def __le__(self, other: "LogNorm") -> bool:
        return self.t >= other.t

    def __gt__(self, other: "LogNorm") -> bool:
        return self.t < other.t

    def __ge__(self, other: "LogNorm") -> bool:
        return self.t <= other.t

    def __repr__(self):
        return "LogNorm(0)" if self.t == INF else f"LogNorm(q^{-self.t})"

    def to_json(self):
        if self.t == INF:
            return {"qExponent": "-inf"}
        return {"qExponent": fraction_json(-self.t)}

    @classmethod
    def from_json(cls, data) -> "LogNorm":
        e = data["qExponent"]
        if e == "-inf":
            return cls(INF)
        return cls(-fraction_from_json(e))


def norm_max(norms: Iterable[LogNorm]) -> LogNorm:
    best = LogNorm(INF)
    for n in norms:
        if n > best:
            best = n
    return best


def fraction_json(x) -> dict:
    x = Fraction(x)
    return {"num": x.numerator, "den": x.denominator}


def fraction_from_json(data) -> Fraction:
    if isinstance(data, dict):
        return Fraction(int(data["num"]), int(data["den"]))
    return Fraction(data)


# ---------------------------------------------------------------------------
# multi-indices (plain tuples of ints, one entry per embedding)


def mi_zero(f: int) -> MultiIndex:
    return (0,) * f


def mi_unit(f: int, i: int, k: int = 1) -> MultiIndex:
    return tuple(k if j == i else 0 for j in range(f))


def mi_total(m: MultiIndex) -> int:
    return sum(m)


def mi_le(a: MultiIndex, b: MultiIndex) -> bool:
    return all(x <= y for x, y in zip(a, b))


def mi_add(a: MultiIndex, b: MultiIndex) -> MultiIndex:
    return tuple(x + y for x, y in zip(a, b))


def mi_sub(a: MultiIndex, b: MultiIndex) -> MultiIndex:
    return tuple(x - y for x, y in zip(a, b))


def mi_binomial(top: MultiIndex, bottom: MultiIndex) -> int:
    """Componentwise binomial product; generalized binomials for negative tops."""
    out = 1
    for a, b in zip(top, bottom):
        out *= generalized_binomial(a, b)
    return out


def generalized_binomial(a: int, b: int) -> int:
    if b < 0:
        return 0
    if a >= 0:
        return math.comb(a, b) if b <= a else 0
    num = 1
    for j in range(b):
        num *= a - j
    return num // math.factorial(b)


def mi_factorial(m: MultiIndex) -> int:
    out = 1
    for x in m:
        out *= math.factorial(x)
    return out


def mi_below(m: MultiIndex) -> list:
    """All k <= m componentwise, canonical order."""
    return sorted(itertools.product(*(range(x + 1) for x in m)), key=mi_sort_key)


def mi_sort_key(m: MultiIndex):
    return (sum(m), m)


def multi_indices(f: int, max_total: int, caps: dict | None = None) -> list:
    """Multi-indices with |m| <= max_total and m_sigma <= caps[sigma], canonical order."""
    caps = caps or {}
    ranges = [range(min(max_total, caps.get(i, max_total)) + 1) for i in range(f)]
    out = [m for m in itertools.product(*ranges) if sum(m) <= max_total]
    out.sort(key=mi_sort_key)
    return out


def coset_key_string(key: tuple, p: int, k: int) -> str:
    """Serialize a level-k coset key as pi-adic digits joined by '|'."""
    digits = []
    coeffs = list(key)
    for _ in range(k):
        digits.append(",".join(str(c % p) for c in coeffs))
        coeffs = [c // p for c in coeffs]
    return "|".join(digits)


def coset_key_from_string(text: str, p: int, f: int) -> tuple:
    coeffs = [0] * f
    if text == "":
        return tuple(coeffs)
    for j, digit in enumerate(text.split("|")):
        for i, c in enumerate(digit.split(",")):
            coeffs[i] += int(c) * p**j
    return tuple(coeffs)
