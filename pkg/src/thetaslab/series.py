"""Exact truncated multivariate Laurent series with rational coefficients.

Two kinds of variables live in one table.  "q" variables carry a rational
weight and drive truncation: a series stores exactly the terms whose weighted
q-degree is at most its order, and arithmetic keeps track of how far results
stay complete.  "z" variables are Laurent directions with no weight; their
exponents never enter the truncation bound.

All exponents are rationals with a fixed per-table denominator, all
coefficients are exact rationals.  No floats appear anywhere in this module.
"""

from __future__ import annotations

import itertools
from fractions import Fraction
from math import floor, gcd
from typing import Iterable, Mapping


class SeriesError(ValueError):
    """Base error for series arithmetic."""


class TableMismatchError(SeriesError):
    """Operands built over different variable tables."""


class TruncationError(SeriesError):
    """A coefficient beyond the truncation bound was requested."""


def fr(x) -> Fraction:
    """Coerce ints, strings like '3/4' and Fractions to Fraction."""
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, str):
        return Fraction(x)
    raise SeriesError(f"not an exact rational: {x!r}")


def _norm_coeff(c):
    # ints are kept as ints: the hot loops then avoid Fraction overhead.
    if isinstance(c, Fraction) and c.denominator == 1:
        return int(c)
    return c


def _lcm(a: int, b: int) -> int:
    return a * b // gcd(a, b)


class VarTable:
    """Ordered variable table shared by all series of one computation.

    Each entry is (name, kind, weight): kind "q" (weighted, truncating) or
    "z" (Laurent, weight ignored).  `denom` is the exponent denominator: a
    stored exponent integer e means the rational exponent e/denom.
    """

    __slots__ = ("names", "kinds", "weights", "denom", "_index",
                 "wden", "wint", "q_indices", "z_indices")

    def __init__(self, variables, denom: int = 1):
        names, kinds, weights = [], [], []
        for entry in variables:
            if len(entry) == 2:
                name, kind = entry
                weight = Fraction(1) if kind == "q" else Fraction(0)
            else:
                name, kind, weight = entry
                weight = fr(weight)
            if kind not in ("q", "z"):
                raise SeriesError(f"unknown variable kind {kind!r}")
            if kind == "z":
                weight = Fraction(0)
            if weight < 0:
                raise SeriesError("negative weights are not supported")
            names.append(name)
            kinds.append(kind)
            weights.append(weight)
        if len(set(names)) != len(names):
            raise SeriesError("duplicate variable names")
        if denom < 1:
            raise SeriesError("denominator must be positive")
        self.names = tuple(names)
        self.kinds = tuple(kinds)
        self.weights = tuple(weights)
        self.denom = denom
        self._index = {n: i for i, n in enumerate(names)}
        wden = 1
        for w in self.weights:
            wden = _lcm(wden, w.denominator)
        self.wden = wden
        self.wint = tuple(int(w * wden) for w in self.weights)
        self.q_indices = tuple(i for i, k in enumerate(kinds) if k == "q")
        self.z_indices = tuple(i for i, k in enumerate(kinds) if k == "z")

    def __len__(self) -> int:
        return len(self.names)

    def index(self, name: str) -> int:
        try:
            return self._index[name]
        except KeyError:
            raise SeriesError(f"undeclared variable {name!r}") from None

    def __eq__(self, other):
        return (isinstance(other, VarTable)
                and self.names == other.names
                and self.kinds == other.kinds
                and self.weights == other.weights
                and self.denom == other.denom)

    def __hash__(self):
        return hash((self.names, self.kinds, self.weights, self.denom))

    def __repr__(self):
        vs = ", ".join(f"{n}:{k}" for n, k in zip(self.names, self.kinds))
        return f"VarTable({vs}; denom={self.denom})"

    # -- monomial keys -----------------------------------------------------

    def key(self, exponents: Mapping[str, object]) -> tuple:
        """Scaled exponent tuple from a {name: rational} mapping."""
        out = [0] * len(self.names)
        for name, e in exponents.items():
            ef = fr(e) * self.denom
            if ef.denominator != 1:
                raise SeriesError(
                    f"exponent {e} of {name} not in 1/{self.denom} lattice")
            out[self.index(name)] = int(ef)
        return tuple(out)

    def exponents(self, key: tuple) -> dict:
        """Readable {name: Fraction} mapping (zero exponents omitted)."""
        return {n: Fraction(e, self.denom)
                for n, e in zip(self.names, key) if e}

    def deg_scaled(self, key: tuple) -> int:
        """Weighted q-degree in units of 1/(denom*wden)."""
        w = self.wint
        return sum(w[i] * key[i] for i in self.q_indices)

    def degree(self, key: tuple) -> Fraction:
        return Fraction(self.deg_scaled(key), self.denom * self.wden)

    def scale_order(self, order: Fraction) -> int:
        """Largest scaled degree allowed by `order` (floor)."""
        return floor(order * self.denom * self.wden)


class Series:
    """Truncated series: canonical map from scaled exponent keys to rationals.

    Invariants: no stored zero coefficients, every stored term has weighted
    q-degree <= order.  Terms beyond the order are unknown, not zero.
    """

    __slots__ = ("table", "order", "terms")

    def __init__(self, table: VarTable, order, terms: dict | None = None,
                 *, _checked: bool = False):
        self.table = table
        self.order = fr(order)
        self.terms = terms if terms is not None else {}
        if not _checked:
            bound = table.scale_order(self.order)
            for k, c in list(self.terms.items()):
                if len(k) != len(table.names):
                    raise SeriesError("malformed monomial key")
                if not c:
                    del self.terms[k]
                    continue
                self.terms[k] = _norm_coeff(fr(c) if not isinstance(c, int) else c)
                if table.deg_scaled(k) > bound:
                    raise SeriesError(
                        f"term of degree {table.degree(k)} exceeds order {self.order}")

    # -- constructors ------------------------------------------------------

    @classmethod
    def zero(cls, table: VarTable, order) -> "Series":
        return cls(table, order, {}, _checked=True)

    @classmethod
    def one(cls, table: VarTable, order) -> "Series":
        return cls(table, order, {(0,) * len(table.names): 1}, _checked=True)

    @classmethod
    def from_terms(cls, table: VarTable, order, items) -> "Series":
        """Build from {exponent-mapping: coeff} or iterable of pairs."""
        if isinstance(items, Mapping):
            items = items.items()
        terms: dict = {}
        for exps, c in items:
            k = table.key(exps) if isinstance(exps, Mapping) else tuple(exps)
            c = _norm_coeff(fr(c))
            if c:
                terms[k] = terms.get(k, 0) + c
                if not terms[k]:
                    del terms[k]
        return cls(table, order, terms)

    @classmethod
    def monomial(cls, table: VarTable, order, exponents, coeff=1) -> "Series":
        return cls.from_terms(table, order, [(exponents, coeff)])

    # -- inspection ---------------------------------------------------------

    def is_zero(self) -> bool:
        return not self.terms

    def mindeg(self) -> Fraction | None:
        """Smallest weighted q-degree among stored terms (None when zero)."""
        if not self.terms:
            return None
        t = self.table
        return Fraction(min(t.deg_scaled(k) for k in self.terms),
                        t.denom * t.wden)

    def constant_term(self) -> Fraction:
        return fr(self.terms.get((0,) * len(self.table.names), 0))

    def coeff(self, exponents) -> Fraction:
        """Stored coefficient, 0 inside the truncation bound, else an error."""
        k = self.table.key(exponents) if isinstance(exponents, Mapping) \
            else tuple(exponents)
        if self.table.deg_scaled(k) > self.table.scale_order(self.order):
            raise TruncationError(
                f"monomial of degree {self.table.degree(k)} is beyond "
                f"truncation order {self.order}")
        return fr(self.terms.get(k, 0))

    def support_size(self) -> int:
        return len(self.terms)

    # -- ring operations ----------------------------------------------------

    def _coerce(self, other):
        if isinstance(other, Series):
            if other.table != self.table:
                raise TableMismatchError("series over different tables")
            return other
        if isinstance(other, (int, Fraction)):
            return Series(self.table, self.order,
                          {(0,) * len(self.table.names): _norm_coeff(fr(other))},
                          _checked=True) if other else Series.zero(self.table, self.order)
        return None

    def __add__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        order = min(self.order, o.order)
        bound = self.table.scale_order(order)
        ds = self.table.deg_scaled
        out = {k: c for k, c in self.terms.items() if ds(k) <= bound}
        for k, c in o.terms.items():
            if ds(k) > bound:
                continue
            v = out.get(k, 0) + c
            if v:
                out[k] = _norm_coeff(v)
            elif k in out:
                del out[k]
        return Series(self.table, order, out, _checked=True)

    __radd__ = __add__

    def __neg__(self):
        return Series(self.table, self.order,
                      {k: -c for k, c in self.terms.items()}, _checked=True)

    def __sub__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return self + (-o)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            if not other:
                return Series.zero(self.table, self.order)
            other = _norm_coeff(fr(other))
            return Series(self.table, self.order,
                          {k: _norm_coeff(c * other) for k, c in self.terms.items()},
                          _checked=True)
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        t = self.table
        if not self.terms or not o.terms:
            order = min(self.order, o.order)
            return Series.zero(t, order)
        # Product of truncations is complete to min(Na + mdeg(b), Nb + mdeg(a)).
        order = min(self.order + o.mindeg(), o.order + self.mindeg())
        bound = t.scale_order(order)
        small, big = (self, o) if len(self.terms) <= len(o.terms) else (o, self)
        ds = t.deg_scaled
        big_terms = sorted(((ds(k), k, c) for k, c in big.terms.items()),
                           key=lambda x: x[0])
        out: dict = {}
        for ka, ca in small.terms.items():
            lim = bound - ds(ka)
            for db, kb, cb in big_terms:
                if db > lim:
                    break
                k = tuple(x + y for x, y in zip(ka, kb))
                v = out.get(k, 0) + ca * cb
                if v:
                    out[k] = v
                elif k in out:
                    del out[k]
        for k in list(out):
            out[k] = _norm_coeff(out[k])
        return Series(t, order, out, _checked=True)

    __rmul__ = __mul__

    def __pow__(self, n: int):
        if not isinstance(n, int) or n < 0:
            raise SeriesError("only non-negative integer powers")
        result = Series.one(self.table, self.order)
        base = self
        while n:
            if n & 1:
                result = result * base
            n >>= 1
            if n:
                base = base * base
        return result

    def __eq__(self, other):
        if not isinstance(other, Series):
            if isinstance(other, (int, Fraction)):
                o = self._coerce(other)
                return self.table == o.table and self.terms == o.terms
            return NotImplemented
        return (self.table == other.table and self.order == other.order
                and self.terms == other.terms)

    def __hash__(self):
        return hash((self.table, self.order, frozenset(self.terms.items())))

    # -- shaping -------------------------------------------------------------

    def shift(self, exponents, coeff=1) -> "Series":
        """Multiply by an exact monomial; the order moves with its degree."""
        k0 = self.table.key(exponents) if isinstance(exponents, Mapping) \
            else tuple(exponents)
        coeff = _norm_coeff(fr(coeff))
        d0 = self.table.degree(k0)
        out = {tuple(a + b for a, b in zip(k, k0)): _norm_coeff(c * coeff)
               for k, c in self.terms.items()}
        return Series(self.table, self.order + d0, out, _checked=True)

    def truncate(self, order) -> "Series":
        order = fr(order)
        if order > self.order:
            raise SeriesError("cannot raise the truncation order")
        bound = self.table.scale_order(order)
        ds = self.table.deg_scaled
        return Series(self.table, order,
                      {k: c for k, c in self.terms.items() if ds(k) <= bound},
                      _checked=True)

    def restrict_zbox(self, window) -> "Series":
        """Drop terms with any z-exponent outside [-W_i, W_i]."""
        t = self.table
        if isinstance(window, int):
            window = {t.names[i]: window for i in t.z_indices}
        radii = {t.index(n): int(w) * t.denom for n, w in window.items()}
        for i in t.z_indices:
            if i not in radii:
                raise SeriesError(f"no window for z-variable {t.names[i]!r}")
        out = {k: c for k, c in self.terms.items()
               if all(abs(k[i]) <= r for i, r in radii.items())}
        return Series(t, self.order, out, _checked=True)

    def pure_q_part(self) -> "Series":
        """Terms with all z-exponents zero."""
        zi = self.table.z_indices
        out = {k: c for k, c in self.terms.items()
               if all(k[i] == 0 for i in zi)}
        return Series(self.table, self.order, out, _checked=True)

    def drop_constant(self) -> "Series":
        out = dict(self.terms)
        out.pop((0,) * len(self.table.names), None)
        return Series(self.table, self.order, out, _checked=True)

    def slice_degree(self, degree) -> "Series":
        """Terms of exactly the given weighted q-degree."""
        d = fr(degree)
        t = self.table
        target = d * t.denom * t.wden
        out = {k: c for k, c in self.terms.items()
               if t.deg_scaled(k) == target}
        return Series(t, self.order, out, _checked=True)

    # -- substitution ---------------------------------------------------------

    def substitute(self, mapping, table: VarTable | None = None,
                   order=None) -> "Series":
        """Monomial substitution: each variable maps to coeff * monomial.

        `mapping` sends variable names to either 0, a (coeff, exponent-map)
        pair, or an exponent-map (coefficient 1).  Unmapped variables must
        exist in the target table.  The result is truncated to `order`.
        """
        src = self.table
        dst = table if table is not None else src
        order = fr(order) if order is not None else self.order
        images: list = []
        for i, name in enumerate(src.names):
            if name in mapping:
                img = mapping[name]
                if img == 0:
                    images.append(None)
                    continue
                if isinstance(img, tuple):
                    c, exps = img
                else:
                    c, exps = 1, img
                images.append((fr(c), dst.key(exps)))
            elif name in dst._index:
                images.append((Fraction(1), dst.key({name: 1})))
            else:
                # tolerated as long as no term actually uses the variable
                images.append("absent")
        nz = len(dst.names)
        bound = dst.scale_order(order)
        out: dict = {}
        for k, c in self.terms.items():
            acc = [0] * nz
            coeff = c
            dead = False
            for i, e in enumerate(k):
                if not e:
                    continue
                img = images[i]
                if img == "absent":
                    raise SeriesError(
                        f"variable {src.names[i]!r} has no image in the "
                        "target table")
                if img is None:
                    if e < 0:
                        raise SeriesError(
                            f"negative power of {src.names[i]!r} mapped to 0")
                    dead = True
                    break
                ic, ik = img
                if ic != 1:
                    ef = Fraction(e, src.denom)
                    if ef.denominator != 1:
                        raise SeriesError(
                            "non-unit image coefficient under a fractional "
                            "exponent")
                    coeff = coeff * ic ** int(ef)
                for j, ej in enumerate(ik):
                    if ej:
                        frac = Fraction(e * ej, src.denom)
                        if frac.denominator != 1:
                            raise SeriesError(
                                "substitution leaves the exponent lattice")
                        acc[j] += int(frac)
            if dead:
                continue
            kk = tuple(acc)
            if dst.deg_scaled(kk) > bound:
                continue
            v = out.get(kk, 0) + coeff
            if v:
                out[kk] = _norm_coeff(v)
            elif kk in out:
                del out[kk]
        return Series(dst, order, out, _checked=True)

    # -- presentation ----------------------------------------------------------

    def sorted_items(self):
        """Terms in the canonical order: by degree, then lexicographic key."""
        ds = self.table.deg_scaled
        return sorted(self.terms.items(), key=lambda kv: (ds(kv[0]), kv[0]))

    def to_jsonable(self) -> dict:
        def rat(x) -> str:
            f = fr(x)
            return f"{f.numerator}/{f.denominator}"
        return {
            "variables": list(self.table.names),
            "order": rat(self.order),
            "terms": [
                {"exponents": {n: rat(e) for n, e in
                               self.table.exponents(k).items()},
                 "coeff": rat(c)}
                for k, c in self.sorted_items()
            ],
        }

    def __str__(self):
        if not self.terms:
            return f"0 + O(deg>{self.order})"
        bits = []
        for k, c in self.sorted_items()[:24]:
            exps = self.table.exponents(k)
            mono = "*".join(
                f"{n}^{e}" if e != 1 else n for n, e in exps.items()) or "1"
            bits.append(f"({c})*{mono}")
        tail = " + ..." if len(self.terms) > 24 else ""
        return " + ".join(bits) + tail + f" + O(deg>{self.order})"

    __repr__ = __str__


# -- transcendental operations ----------------------------------------------


def _positive_part_or_raise(u: Series, what: str) -> Fraction:
    md = u.mindeg()
    if md is None:
        return Fraction(1)
    if md <= 0:
        raise SeriesError(
            f"{what} does not truncate: a term of weighted degree {md} <= 0 "
            "is present")
    return md


def exp_series(f: Series) -> Series:
    """exp of a series whose terms all have positive weighted degree."""
    if f.constant_term() != 0:
        raise SeriesError("exp requires zero constant term")
    md = _positive_part_or_raise(f, "exp")
    acc = Series.one(f.table, f.order)
    t = acc
    k = 0
    kmax = floor(f.order / md) + 1
    while not t.is_zero() and k <= kmax:
        k += 1
        t = (t * f * Fraction(1, k)).truncate(f.order)
        acc = acc + t
    return acc


def log_series(f: Series) -> Series:
    """log of a series with constant term 1 and positive-degree remainder.

    Slab functions with z-terms at degree zero are handled by the dedicated
    machinery in `thetaslab.slab`, not here.
    """
    if f.constant_term() != 1:
        raise SeriesError("log requires constant term 1")
    u = f.drop_constant()
    if u.is_zero():
        return Series.zero(f.table, f.order)
    md = _positive_part_or_raise(u, "log")
    acc = Series.zero(f.table, f.order)
    t = Series.one(f.table, f.order)
    k = 0
    kmax = floor(f.order / md) + 1
    while k <= kmax:
        k += 1
        t = (t * u).truncate(f.order)
        if t.is_zero():
            break
        acc = acc + t * Fraction((-1) ** (k - 1), k)
    return acc


def invert(f: Series) -> Series:
    """Multiplicative inverse; needs a nonzero constant term and a
    positive-degree remainder."""
    c0 = f.constant_term()
    if c0 == 0:
        raise SeriesError("cannot invert: zero constant term")
    u = f.drop_constant() * (Fraction(-1) / c0)
    if u.is_zero():
        return Series(f.table, f.order,
                      {(0,) * len(f.table.names): _norm_coeff(Fraction(1) / c0)},
                      _checked=True)
    md = _positive_part_or_raise(u, "inversion")
    acc = Series.one(f.table, f.order)
    t = Series.one(f.table, f.order)
    kmax = floor(f.order / md) + 1
    for _ in range(kmax):
        t = (t * u).truncate(f.order)
        if t.is_zero():
            break
        acc = acc + t
    return acc * (Fraction(1) / c0)


def geometric_inverse_product(table: VarTable, order, exponent_maps,
                              power: int = 1) -> Series:
    """prod over maps m of (1 - q^m)^(-power), truncated.

    Every exponent map must have positive weighted degree.
    """
    acc = Series.one(table, order)
    for exps in exponent_maps:
        base = Series.one(table, order) - Series.monomial(table, order, exps)
        inv = invert(base)
        for _ in range(power):
            acc = acc * inv
    return acc
