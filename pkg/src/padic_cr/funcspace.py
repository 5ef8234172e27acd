"""Locally polynomial functions on O_F and their norms.

A ``LocallyPolyFunction`` of level h stores one polynomial per coset of
O_F / p^h, centered at the canonical representative of the coset, in the
monomials (z - a)^m = prod_sigma sigma(z - a)^(m_sigma).  Cosets without a
stored piece carry the zero polynomial.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field as dc_field
from fractions import Fraction
from typing import Iterable

from .field import (
    INF,
    FieldDescriptor,
    LogNorm,
    MultiIndex,
    PadicElement,
    coset_coefficients,
    coset_key_from_string,
    coset_key_string,
    frobenius_coeffs,
    mi_add,
    mi_binomial,
    mi_below,
    mi_le,
    mi_sort_key,
    mi_sub,
    mi_total,
    monomial,
    multi_indices,
    norm_max,
)


class CoverageExceeded(ValueError):
    """A request needs data beyond a table's or function's stored range."""


def _drop_zeros(coeffs: dict) -> dict:
    return {m: c for m, c in coeffs.items() if not c.is_zero()}


@dataclass
class LocalPolynomial:
    """sum_m coeffs[m] * (z - center)^m."""

    center: PadicElement
    coeffs: dict

    @property
    def field(self) -> FieldDescriptor:
        return self.center.field

    def is_zero(self) -> bool:
        return all(c.is_zero() for c in self.coeffs.values())

    def degree(self) -> int:
        live = [mi_total(m) for m, c in self.coeffs.items() if not c.is_zero()]
        return max(live, default=0)

    def evaluate(self, z: PadicElement) -> PadicElement:
        field = self.field
        total = field.zero()
        if not self.coeffs:
            return total
        delta = z - self.center
        images = _embedding_powers(delta, self.coeffs)
        for m, c in self.coeffs.items():
            term = c
            for i, e in enumerate(m):
                if e:
                    term = term * images[i][e]
            total = total + term
        return total

    def recenter(self, new_center: PadicElement) -> "LocalPolynomial":
        """Exact Taylor shift to a new center."""
        shift = new_center - self.center
        out: dict = {}
        for m, c in self.coeffs.items():
            if c.is_zero():
                continue
            for k in mi_below(m):
                b = mi_binomial(m, k)
                if b == 0:
                    continue
                term = c * monomial(shift, mi_sub(m, k)) * b
                out[k] = out[k] + term if k in out else term
        return LocalPolynomial(new_center, _drop_zeros(out))

    def derivative(self, i: MultiIndex) -> "LocalPolynomial":
        """Plain partial derivative D_i (not divided by i!)."""
        out = {}
        for m, c in self.coeffs.items():
            if mi_le(i, m):
                falling = 1
                for a, b in zip(m, i):
                    falling *= math.perm(a, b)
                out[mi_sub(m, i)] = c * falling
        return LocalPolynomial(self.center, _drop_zeros(out))

    def taylor_coefficient(self, i: MultiIndex) -> "LocalPolynomial":
        """D_i / i! as a polynomial with the same center."""
        out = {}
        for m, c in self.coeffs.items():
            if mi_le(i, m):
                out[mi_sub(m, i)] = c * mi_binomial(m, i)
        return LocalPolynomial(self.center, _drop_zeros(out))

    def gauss_norm(self, level: int) -> LogNorm:
        """max_m |c_m| q^(-level |m|), an upper bound for the sup on D(center, level)."""
        t = INF
        for m, c in self.coeffs.items():
            if not c.is_zero():
                t = min(t, c.w + level * mi_total(m))
        return LogNorm(t)

    def scale(self, s: PadicElement) -> "LocalPolynomial":
        return LocalPolynomial(self.center, _drop_zeros({m: c * s for m, c in self.coeffs.items()}))

    def __add__(self, other: "LocalPolynomial") -> "LocalPolynomial":
        if not (other.center - self.center).is_zero():
            other = other.recenter(self.center)
        out = dict(self.coeffs)
        for m, c in other.coeffs.items():
            out[m] = out[m] + c if m in out else c
        return LocalPolynomial(self.center, _drop_zeros(out))

    def __mul__(self, other: "LocalPolynomial") -> "LocalPolynomial":
        if not (other.center - self.center).is_zero():
            other = other.recenter(self.center)
        out: dict = {}
        for m, c in self.coeffs.items():
            for k, d in other.coeffs.items():
                mk = mi_add(m, k)
                term = c * d
                out[mk] = out[mk] + term if mk in out else term
        return LocalPolynomial(self.center, _drop_zeros(out))

    def truncate(self, max_total: int) -> "LocalPolynomial":
        return LocalPolynomial(self.center, {m: c for m, c in self.coeffs.items() if mi_total(m) <= max_total})

    def same_as(self, other: "LocalPolynomial") -> bool:
        """Coefficientwise equality after recentering ``other`` onto this center."""
        if not (other.center - self.center).is_zero():
            other = other.recenter(self.center)
        keys = set(self.coeffs) | set(other.coeffs)
        zero = self.field.zero()
        return all((self.coeffs.get(m, zero) - other.coeffs.get(m, zero)).is_zero() for m in keys)


def _embedding_powers(delta: PadicElement, coeffs: dict) -> list:
    """images[i][e] = sigma_i(delta)^e for the exponents appearing in coeffs."""
    from .field import frobenius

    f = delta.field.f
    top = [0] * f
    for m in coeffs:
        for i, e in enumerate(m):
            top[i] = max(top[i], e)
    images = []
    for i in range(f):
        row = [delta.field.one()]
        if top[i]:
            s = frobenius(delta, i)
            for _ in range(top[i]):
                row.append(row[-1] * s)
        images.append(row)
    return images


def constant_polynomial(center: PadicElement, value: PadicElement) -> LocalPolynomial:
    f = center.field.f
    return LocalPolynomial(center, _drop_zeros({(0,) * f: value}))


# ---------------------------------------------------------------------------


@dataclass
class LocallyPolyFunction:
    field: FieldDescriptor
    level: int
    pieces: dict  # coset key (coefficients mod p^level) -> LocalPolynomial
    J: frozenset = None
    deg_bound: dict = dc_field(default_factory=dict)  # sigma not in J -> d_sigma

    def __post_init__(self):
        if self.J is None:
            self.J = frozenset(range(self.field.f))
        self.J = frozenset(self.J)
        self.pieces = {k: v for k, v in self.pieces.items() if not v.is_zero()}

    # -- queries --------------------------------------------------------

    def piece(self, key: tuple) -> LocalPolynomial:
        if key in self.pieces:
            return self.pieces[key]
        return LocalPolynomial(self.field.rep_from_key(key), {})

    def is_zero(self) -> bool:
        return not self.pieces

    def max_degree(self) -> int:
        return max((pol.degree() for pol in self.pieces.values()), default=0)

    def multi_indices_used(self) -> set:
        out = set()
        for pol in self.pieces.values():
            out.update(m for m, c in pol.coeffs.items() if not c.is_zero())
        return out

    def evaluate(self, z: PadicElement) -> PadicElement:
        if z.w < 0:
            raise ValueError("point outside O_F")
        return self.piece(z.coset_key(self.level)).evaluate(z)

    __call__ = evaluate

    # -- constructions --------------------------------------------------

    def refine(self, new_level: int) -> "LocallyPolyFunction":
        if new_level < self.level:
            raise ValueError("refinement level below current level")
        if new_level == self.level:
            return LocallyPolyFunction(self.field, self.level, dict(self.pieces), self.J, dict(self.deg_bound))
        field = self.field
        p = field.p
        step = new_level - self.level
        extra = coset_coefficients(p, field.f, step)
        scale = p**self.level
        pieces = {}
        for key, pol in self.pieces.items():
            for e in extra:
                child = tuple(k + scale * c for k, c in zip(key, e))
                pieces[child] = pol.recenter(field.rep_from_key(child))
        return LocallyPolyFunction(field, new_level, pieces, self.J, dict(self.deg_bound))

    def coarsen(self) -> "LocallyPolyFunction":
        """Same function at the smallest level where it is one polynomial per coset."""
        fn = self
        while fn.level > 0:
            merged = _try_merge(fn)
            if merged is None:
                break
            fn = merged
        return fn

    def derivative(self, i: MultiIndex) -> "LocallyPolyFunction":
        return LocallyPolyFunction(
            self.field, self.level, {k: pol.derivative(i) for k, pol in self.pieces.items()}, self.J, dict(self.deg_bound)
        )

    def scale(self, s: PadicElement) -> "LocallyPolyFunction":
        return LocallyPolyFunction(
            self.field, self.level, {k: pol.scale(s) for k, pol in self.pieces.items()}, self.J, dict(self.deg_bound)
        )

    def __add__(self, other: "LocallyPolyFunction") -> "LocallyPolyFunction":
        level = max(self.level, other.level)
        a, b = self.refine(level), other.refine(level)
        pieces = dict(a.pieces)
        for k, pol in b.pieces.items():
            pieces[k] = pieces[k] + pol if k in pieces else pol
        deg = {s: max(a.deg_bound.get(s, 0), b.deg_bound.get(s, 0)) for s in set(a.deg_bound) | set(b.deg_bound)}
        return LocallyPolyFunction(self.field, level, pieces, self.J & other.J, deg)

    def __neg__(self) -> "LocallyPolyFunction":
        return self.scale(self.field.from_int(-1))

    def __sub__(self, other: "LocallyPolyFunction") -> "LocallyPolyFunction":
        return self + (-other)

    # -- serialization --------------------------------------------------

    def to_json(self) -> dict:
        p, f = self.field.p, self.field.f
        pieces = {}
        for key in sorted(self.pieces, key=lambda k: coset_key_string(k, p, self.level)):
            pol = self.pieces[key]
            pieces[coset_key_string(key, p, self.level)] = {
                ",".join(map(str, m)): pol.coeffs[m].to_json() for m in sorted(pol.coeffs, key=mi_sort_key)
            }
        return {
            "level": self.level,
            "J": sorted(self.J),
            "degBound": [None if s in self.J else self.deg_bound.get(s) for s in range(f)],
            "pieces": pieces,
        }

    @classmethod
    def from_json(cls, field: FieldDescriptor, data: dict) -> "LocallyPolyFunction":
        level = int(data["level"])
        pieces = {}
        for text, coeffs in data["pieces"].items():
            key = coset_key_from_string(text, field.p, field.f)
            if len(text.split("|")) != level and level > 0:
                raise ValueError(f"coset key {text!r} does not have {level} digits")
            center = field.rep_from_key(key)
            cs = {}
            for mtext, value in coeffs.items():
                m = tuple(int(x) for x in mtext.split(","))
                if len(m) != field.f:
                    raise ValueError(f"multi-index {mtext!r} has wrong length")
                cs[m] = PadicElement.from_json(field, value)
            pieces[key] = LocalPolynomial(center, cs)
        J = frozenset(data.get("J", range(field.f)))
        deg = {s: int(v) for s, v in enumerate(data.get("degBound", [])) if v is not None}
        return cls(field, level, pieces, J, deg)


def _try_merge(fn: LocallyPolyFunction):
    field = fn.field
    q = field.q
    parent_level = fn.level - 1
    mod = field.p**parent_level
    groups: dict = {}
    for key, pol in fn.pieces.items():
        parent = tuple(k % mod for k in key)
        groups.setdefault(parent, []).append(pol)
    pieces = {}
    for parent, pols in groups.items():
        if len(pols) != q:
            return None
        center = field.rep_from_key(parent)
        first = pols[0].recenter(center)
        for other in pols[1:]:
            if not first.same_as(other):
                return None
        pieces[parent] = first
    return LocallyPolyFunction(field, parent_level, pieces, fn.J, dict(fn.deg_bound))


def polynomial_function(field: FieldDescriptor, coeffs: dict, J=None, deg_bound=None) -> LocallyPolyFunction:
    """Level-0 function sum_m c_m z^m; coefficients may be ints, Fractions or elements."""
    cs = {m: _as_element(field, c) for m, c in coeffs.items()}
    return LocallyPolyFunction(field, 0, {(0,) * field.f: LocalPolynomial(field.zero(), cs)}, J, deg_bound or {})


def indicator(field: FieldDescriptor, center: PadicElement, n: int, J=None, deg_bound=None) -> LocallyPolyFunction:
    """1_{D(center, n)} for center in O_F."""
    key = center.coset_key(n)
    rep = field.rep_from_key(key)
    return LocallyPolyFunction(field, n, {key: constant_polynomial(rep, field.one())}, J, deg_bound or {})


def constant_function(field: FieldDescriptor, value=1) -> LocallyPolyFunction:
    return polynomial_function(field, {(0,) * field.f: value})


def _as_element(field, c) -> PadicElement:
    if isinstance(c, PadicElement):
        return c
    if isinstance(c, int):
        return field.from_int(c)
    return field.from_fraction(Fraction(c))


# ---------------------------------------------------------------------------
# norms


def norm_Fh(fn: LocallyPolyFunction) -> LogNorm:
    """sup over pieces and multi-indices of |c_m| q^(-h|m|) at the stored level."""
    return norm_max(pol.gauss_norm(fn.level) for pol in fn.pieces.values())


def subspace_check(fn: LocallyPolyFunction, J, deg_bound: dict) -> bool:
    """True when D_{(d_sigma+1) e_sigma} fn vanishes for every sigma outside J."""
    for pol in fn.pieces.values():
        for m, c in pol.coeffs.items():
            if c.is_zero():
                continue
            for s in range(fn.field.f):
                if s not in J and m[s] > deg_bound.get(s, 0):
                    return False
    return True


def derivative_indices(f: int, r) -> list:
    """I_{<= [r]}: multi-indices of total degree at most floor(r)."""
    return multi_indices(f, math.floor(Fraction(r)))


def cr_norm_upper(fn: LocallyPolyFunction, r) -> LogNorm:
    """Certified upper bound for the C^r norm of a locally polynomial function.

    The bound is computed on the coarsest representation (level h) from three
    Gauss-norm terms: the Taylor coefficients D_i f / i! for |i| <= [r], the
    same-coset remainder (degree > [r] tails, |y| <= q^-h), and the
    cross-coset remainder (|y| >= q^(1-h)), where both f(x+y) and the Taylor
    polynomial are bounded separately.
    """
    r = Fraction(r)
    fn = fn.coarsen()
    if fn.is_zero():
        return LogNorm.zero()
    h = fn.level
    R = math.floor(r)
    f = fn.field.f
    low = derivative_indices(f, r)
    gauss = {i: LogNorm.zero() for i in low}
    tail = INF
    for pol in fn.pieces.values():
        for m, c in pol.coeffs.items():
            if c.is_zero():
                continue
            for i in mi_below(m):
                b = mi_binomial(m, i)
                v = c.w + _vp_int(b, fn.field.p)
                if v == INF:
                    continue
                if mi_total(i) <= R:
                    t = v + h * (mi_total(m) - mi_total(i))
                    if t < gauss[i].t:
                        gauss[i] = LogNorm(t)
                else:
                    tail = min(tail, v + h * (mi_total(m) - r))
    terms = list(gauss.values()) + [LogNorm(tail)]
    if h >= 1:
        zero_index = (0,) * f
        terms.append(gauss[zero_index] * LogNorm.q_power((h - 1) * r))
        for i, g in gauss.items():
            terms.append(g * LogNorm.q_power((h - 1) * (r - mi_total(i))))
    return norm_max(terms)


def _vp_int(n: int, p: int):
    from .field import vp

    return vp(n, p)


# ---------------------------------------------------------------------------
# brute-force enumeration over residue representatives


class _IntegralModel:
    """A function scaled by p^shift into O_F, evaluated in O_F / p^K.

    Every coefficient c is replaced by c * p^shift, which is integral, and
    stored as a coefficient tuple modulo p^K.  Points are coefficient tuples.
    """

    def __init__(self, fn: LocallyPolyFunction):
        field = fn.field
        self.field = field
        self.p, self.f = field.p, field.f
        self.level = fn.level
        coeffs = [c for pol in fn.pieces.values() for c in pol.coeffs.values() if not c.is_zero()]
        self.shift = -min((c.w for c in coeffs), default=0)
        prec = min((c.prec for c in coeffs), default=field.precision_default)
        self.K = max(prec + self.shift, 1)
        self.mod = self.p**self.K
        self.modulus = field.modulus
        self.pieces = {}
        for key, pol in fn.pieces.items():
            terms = []
            for m, c in pol.coeffs.items():
                if c.is_zero():
                    continue
                scaled = c.scale_pi(self.shift)
                terms.append((m, scaled.coefficients(self.K)))
            if not (pol.center - field.rep_from_key(key)).is_zero():
                raise ValueError("piece is not centered at its canonical representative")
            self.pieces[key] = (key, terms)

    def key(self, z: tuple) -> tuple:
        mod = self.p**self.level
        return tuple(c % mod for c in z)

    def mul(self, a, b):
        if self.f == 1:
            return ((a[0] * b[0]) % self.mod,)
        from .field import _poly_mulmod

        return _poly_mulmod(a, b, self.modulus, self.mod)

    def power_table(self, z: tuple, top: int) -> list:
        """rows[i][e] = sigma_i(z)^e."""
        rows = []
        for i in range(self.f):
            s = frobenius_coeffs(self.p, self.f, z, i, self.K)
            row = [(1,) + (0,) * (self.f - 1)]
            for _ in range(top):
                row.append(self.mul(row[-1], s))
            rows.append(row)
        return rows

    def monomial(self, rows, m) -> tuple:
        out = (1,) + (0,) * (self.f - 1)
        for i, e in enumerate(m):
            if e:
                out = self.mul(out, rows[i][e])
        return out

    def valuation(self, a) -> float:
        from .field import vp

        return min(vp(c % self.mod, self.p) for c in a)


def _taylor_terms(pol_terms, degs_needed, model: _IntegralModel, delta_rows):
    """Values of D_i P / i! at a point, from the coefficient list of P."""
    out = {}
    for i in degs_needed:
        acc = [0] * model.f
        for m, c in pol_terms:
            if mi_le(i, m):
                b = mi_binomial(m, i)
                term = model.mul(c, model.monomial(delta_rows, mi_sub(m, i)))
                for k in range(model.f):
                    acc[k] += b * term[k]
        out[i] = tuple(a % model.mod for a in acc)
    return out


def _enum_core(fn: LocallyPolyFunction, r: Fraction, M: int):
    """Shared enumeration kernel.

    Returns the sup exponent of the Taylor coefficients and, for each
    valuation of y, the sup exponent of |eps(x, y)| (values are q^-t).
    """
    field = fn.field
    p, f = field.p, field.f
    model = _IntegralModel(fn)
    R = math.floor(r)
    low = derivative_indices(f, r)
    top = max(fn.max_degree(), 1)
    points = coset_coefficients(p, f, M)
    deriv_t = INF
    best: dict = {}
    taylor_at = []
    for x in points:
        center, terms = model.pieces.get(model.key(x), (None, []))
        if center is None:
            taylor_at.append({i: (0,) * f for i in low})
            continue
        delta = tuple(a - b for a, b in zip(x, center))
        rows = model.power_table(delta, top)
        taylor_at.append(_taylor_terms(terms, low, model, rows))
    for T in taylor_at:
        for i, val in T.items():
            deriv_t = min(deriv_t, model.valuation(val) - model.shift)
    ys = []
    for y in points:
        if not any(y):
            continue
        vy = min(_vp_small(c, p) for c in y)
        rows = model.power_table(y, R)
        ys.append((y, vy, [(i, model.monomial(rows, i)) for i in low]))
    mod = model.mod
    for x, T in zip(points, taylor_at):
        for y, vy, ypowers in ys:
            z = tuple(a + b for a, b in zip(x, y))
            center, terms = model.pieces.get(model.key(z), (None, []))
            if center is None:
                val = [0] * f
            else:
                delta = tuple(a - b for a, b in zip(z, center))
                rows = model.power_table(delta, top)
                val = [0] * f
                for m, c in terms:
                    term = model.mul(c, model.monomial(rows, m))
                    for k in range(f):
                        val[k] += term[k]
            for i, yi in ypowers:
                term = model.mul(T[i], yi)
                for k in range(f):
                    val[k] -= term[k]
            eps_v = min(_vp_small(c % mod, p) for c in val)
            if eps_v == INF:
                continue
            t = eps_v - model.shift
            if t < best.get(vy, INF):
                best[vy] = t
    return deriv_t, best


def _vp_small(n: int, p: int):
    if n == 0:
        return INF
    k = 0
    while n % p == 0:
        n //= p
        k += 1
    return k


def cr_norm_enum(fn: LocallyPolyFunction, r, M: int | None = None) -> LogNorm:
    """Brute-force C^r norm over x, y in the canonical representatives of level M."""
    r = Fraction(r)
    if M is None:
        M = fn.level + fn.max_degree() + 2
    if M < fn.level:
        raise ValueError("enumeration level below the function level")
    if fn.is_zero():
        return LogNorm.zero()
    deriv_t, best = _enum_core(fn, r, M)
    terms = [LogNorm(deriv_t)]
    for vy, t in best.items():
        terms.append(LogNorm(t - r * vy))
    return norm_max(terms)


@dataclass
class RemainderProfile:
    entries: dict  # h -> LogNorm

    def to_json(self) -> dict:
        return {str(h): self.entries[h].to_json() for h in sorted(self.entries)}


def remainder_profile(fn: LocallyPolyFunction, r, h_range: Iterable[int], M: int | None = None) -> RemainderProfile:
    """sup |eps(x, y)| q^(rh) over x in reps(M), y in p^h reps(M-h)."""
    r = Fraction(r)
    h_range = list(h_range)
    if M is None:
        M = max(h_range + [fn.level]) + fn.max_degree() + 2
    entries = {}
    if fn.is_zero():
        return RemainderProfile({h: LogNorm.zero() for h in h_range})
    _, best = _enum_core(fn, r, M)
    for h in h_range:
        # y in p^h reps(M-h) are exactly the nonzero level-M reps of valuation >= h
        t = min((tv for vy, tv in best.items() if vy >= h), default=INF)
        entries[h] = LogNorm(t) * LogNorm.q_power(r * h)
    return RemainderProfile(entries)


def scale_into_disk(fn: LocallyPolyFunction, n: int) -> LocallyPolyFunction:
    """g(z) = 1_{D(0,n)}(z) fn(z / p^n)."""
    if n < 0:
        raise ValueError("n must be nonnegative")
    if n == 0:
        return fn
    field = fn.field
    p = field.p
    pieces = {}
    for key, pol in fn.pieces.items():
        new_key = tuple(c * p**n for c in key)
        center = field.rep_from_key(new_key)
        coeffs = {m: c.scale_pi(-n * mi_total(m)) for m, c in pol.coeffs.items()}
        pieces[new_key] = LocalPolynomial(center, coeffs)
    return LocallyPolyFunction(field, fn.level + n, pieces, fn.J, dict(fn.deg_bound))


def cr_norm_interval(fn: LocallyPolyFunction, r, M: int | None = None) -> tuple:
    return cr_norm_enum(fn, r, M), cr_norm_upper(fn, r)
