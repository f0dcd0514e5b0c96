"""Lattice theta sums over a fan and the slab-function normalization.

The raw sum attaches to every window ray v the monomial q^(class of v) z^v.
Dressing each ray orbit with an unknown generating series Delta_o and asking
that, for every recentering at an orbit representative, the logarithm of the
recentered sum has no pure-q part (the Gross--Siebert normalization of slab
functions) determines the Delta_o uniquely order by order.  The coefficients
of Delta_o are the open Gromov--Witten invariants of the geometry.

Truncation soundness rests on one geometric fact, asserted at run time: the
degree of the ray class is a positive-definite quadratic Q in v.  For the
slab recentered at r, the linear functional

    psi(term) = degree(term) - grad Q(r) . (z-exponent of term)

is strictly positive on every term of the recentered sum (it is the
convexity remainder of Q), additive under multiplication, and equals the
degree on pure-q terms.  Pruning all intermediate products to psi <= order
therefore loses nothing that could ever return to the pure-q window, and
bounds the power iteration by order/min(psi).
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from math import gcd

from .fans import Fan, FanError, fan_ad_cover
from .series import Series, SeriesError, VarTable, exp_series, fr


class SlabError(ValueError):
    pass


def ray_orbit(fan: Fan, v) -> tuple:
    return tuple(x % d if d else x for x, d in zip(v, fan.quotient))


def _is_positive_definite(H) -> bool:
    n = len(H)
    for k in range(1, n + 1):
        minor = [row[:k] for row in H[:k]]
        from .fans import _det
        if _det(minor) <= 0:
            return False
    return True


def _lcm(a, b):
    return a * b // gcd(a, b)


def _shells(dim, start=0):
    """Integer vectors grouped by sup-norm radius."""
    r = start
    while True:
        if r == 0:
            yield 0, [tuple([0] * dim)]
        else:
            shell = []
            rng = range(-r, r + 1)
            for v in itertools.product(rng, repeat=dim):
                if max(abs(x) for x in v) == r:
                    shell.append(v)
            yield r, shell
        r += 1


def _grad(H, g, r):
    n = len(g)
    return [sum(H[i][j] * r[j] for j in range(n)) + g[i] for i in range(n)]


def _convexity_gap(fan, H, g, r, v):
    """Q(v) - Q(r) - grad Q(r).(v - r); positive for v != r when H > 0."""
    qr = fan.quadratic_degree(H, g, r)
    qv = fan.quadratic_degree(H, g, v)
    gr = _grad(H, g, r)
    return qv - qr - sum(a * (x - y) for a, x, y in zip(gr, v, r))


def enumerate_ray_classes(fan: Fan, order, reps=()):
    """All rays needed to build sums complete to `order` for every slab.

    Keeps v when its class degree is at most `order` or when some slab
    functional reaches it; certifies completeness by two empty shells (class
    degrees grow quadratically, which `degree_quadratic` has verified).
    Raises when the fan window is too small to certify.
    """
    order = fr(order)
    H, g = fan.degree_quadratic()
    if not _is_positive_definite(H):
        raise SlabError("ray-class degree form is not positive definite")
    finite = not any(fan.quotient)
    maxnorm = max((max(abs(x) for x in v) for v in fan.rays), default=0)
    kept = []
    empty_run = 0
    for radius, shell in _shells(fan.base_dim):
        if finite and radius > maxnorm:
            break
        hits = 0
        for v in shell:
            if finite and not fan.has_ray(v):
                continue
            ok = fan.quadratic_degree(H, g, v) <= order or any(
                _convexity_gap(fan, H, g, r, v) <= order for r in reps)
            if not ok:
                continue
            if not fan.has_ray(v):
                raise FanError(
                    f"window too small: ray {v} is needed at order {order}")
            kept.append(v)
            hits += 1
        if hits == 0 and radius > 0:
            empty_run += 1
            if empty_run >= 2:
                break
        else:
            empty_run = 0
    return kept, H, g


def _coords_and_denom(fan, rays):
    coords = {}
    denom = 1
    for v in rays:
        c = fan.curve_class_of_ray(v)
        coords[v] = c
        for x in c:
            denom = _lcm(denom, x.denominator)
    return coords, denom


def lattice_sum(fan: Fan, order, table: VarTable | None = None) -> Series:
    """Sum over window rays of q^(ray class) z^v, complete up to `order`."""
    rays, _, _ = enumerate_ray_classes(fan, order)
    coords, denom = _coords_and_denom(fan, rays)
    if table is None:
        table = fan.series_table(denom=denom)
    order = fr(order)
    items = []
    for v in rays:
        if fan.class_degree(coords[v]) > order:
            continue
        exps = dict(fan.class_exponents(coords[v]))
        for n, e in zip(fan.z_names(), v):
            if e:
                exps[n] = e
        items.append((exps, 1))
    return Series.from_terms(table, order, items)


# -- psi-pruned power log ------------------------------------------------------------


class _PsiGauge:
    """Integer-scaled evaluation of psi(key) = deg(key) - grad . zexp(key)."""

    def __init__(self, table: VarTable, grad):
        self.table = table
        gden = 1
        for x in grad:
            gden = _lcm(gden, Fraction(x).denominator)
        self.gnum = [int(Fraction(x) * gden) for x in grad]
        self.gden = gden
        self.zidx = table.z_indices

    def value(self, key) -> int:
        t = self.table
        v = t.deg_scaled(key) * self.gden
        for gi, zi in zip(self.gnum, self.zidx):
            v -= gi * key[zi] * t.wden
        return v

    def bound(self, order) -> int:
        # psi <= order in the same integer units
        b = fr(order) * self.table.denom * self.table.wden * self.gden
        if b.denominator != 1:
            b = Fraction(int(b), 1)  # floor is safe: psi values are integers
        return int(b)


def _log_pure_q(u_terms: dict, table: VarTable, gauge: _PsiGauge,
                order) -> dict:
    """Pure-q part of log(1 + u) for u with psi > 0 on every term.

    Products are pruned to psi <= order only; since psi is additive and
    positive this retains exactly the terms that can still contribute to a
    pure-q monomial of degree <= order.
    """
    bound = gauge.bound(order)
    upsi = {}
    for k in list(u_terms):
        p = gauge.value(k)
        if p <= 0:
            raise SlabError("slab gauge is not positive on a term; "
                            "the recentering is invalid")
        if p > bound:
            del u_terms[k]
        else:
            upsi[k] = p
    if not u_terms:
        return {}
    ulist = sorted(((p, k, u_terms[k]) for k, p in upsi.items()),
                   key=lambda x: (x[0], x[1]))
    psimin = ulist[0][0]
    zidx = table.z_indices
    acc: dict = {}

    def absorb(power: dict, k_index: int):
        c0 = Fraction((-1) ** (k_index - 1), k_index)
        for k, c in power.items():
            if all(k[i] == 0 for i in zidx):
                v = acc.get(k, 0) + c * c0
                if v:
                    acc[k] = v
                elif k in acc:
                    del acc[k]

    power = dict(u_terms)
    ppsi = dict(upsi)
    absorb(power, 1)
    cap = bound // psimin + 2
    k_index = 1
    while power:
        k_index += 1
        if k_index > cap:
            raise SlabError("slab log iteration failed to terminate")
        nxt: dict = {}
        npsi: dict = {}
        for ka, pa in ppsi.items():
            ca = power[ka]
            lim = bound - pa
            for pb, kb, cb in ulist:
                if pb > lim:
                    break
                kk = tuple(x + y for x, y in zip(ka, kb))
                v = nxt.get(kk, 0) + ca * cb
                if v:
                    nxt[kk] = v
                    npsi[kk] = pa + pb
                elif kk in nxt:
                    del nxt[kk]
                    del npsi[kk]
        power, ppsi = nxt, npsi
        if power:
            absorb(power, k_index)
    # degree trim (psi = degree on pure-q keys, so this is a formality)
    bound_deg = table.scale_order(fr(order))
    return {k: c for k, c in acc.items()
            if table.deg_scaled(k) <= bound_deg}


# -- normalization --------------------------------------------------------------------


@dataclass
class OGWGenerating:
    """Per-orbit generating series of disc counts, constant term one."""

    fan: Fan
    order: Fraction
    table: VarTable
    delta: dict
    integrality: dict = field(default_factory=dict)

    def series(self, rep) -> Series:
        return self.delta[tuple(rep)]

    def coefficient(self, rep, class_coords) -> Fraction:
        exps = self.fan.class_exponents(class_coords)
        return self.delta[tuple(rep)].coeff(exps)


@dataclass
class SlabFunction:
    """Normalized wall function together with its per-slab residuals."""

    fan: Fan
    order: Fraction
    table: VarTable
    series: Series
    orbit_sums: dict
    residuals: dict

    def residual_is_zero(self) -> bool:
        return all(r.is_zero() for r in self.residuals.values())


def orbit_representatives(fan: Fan):
    """Cell points for quotient fans; every ray for finite fans."""
    if any(fan.quotient):
        ranges = [range(d) if d else (0,) for d in fan.quotient]
        return [tuple(v) for v in itertools.product(*ranges)]
    return sorted(fan.rays)


def gs_normalize(fan: Fan, order, denom: int = 1, max_passes: int = 64):
    """Solve the slab normalization: returns (OGWGenerating, SlabFunction).

    Delta_o is determined so that for every orbit representative r the
    recentered series (sum_o Delta_o S_o) / (q^(class r) z^r) has a log with
    vanishing pure-q part up to `order`.  The solve walks the residuals down
    degree by degree; failure to make progress raises with the offending
    degree and residual attached.
    """
    order = fr(order)
    reps = orbit_representatives(fan)
    rays, H, g = enumerate_ray_classes(fan, order, reps=reps)
    coords, cden = _coords_and_denom(fan, rays)
    table = fan.series_table(denom=_lcm(denom, cden))
    zn = fan.z_names()

    by_orbit: dict = {tuple(r): [] for r in reps}
    for v in rays:
        o = ray_orbit(fan, v)
        if o in by_orbit:
            by_orbit[o].append(v)

    def term_key(class_coords, zexp):
        exps = dict(fan.class_exponents(class_coords))
        for n, e in zip(zn, zexp):
            if e:
                exps[n] = e
        return table.key(exps)

    gauges = {}
    rep_class = {}
    for r in reps:
        gauges[tuple(r)] = _PsiGauge(table, _grad(H, g, r))
        rep_class[tuple(r)] = coords[tuple(r)]

    delta = {tuple(r): Series.one(table, order) for r in reps}

    def slab_u(rep):
        """Terms of the recentered dressed sum minus one, psi-pruned."""
        gauge = gauges[rep]
        bound = gauge.bound(order)
        base = rep_class[rep]
        out: dict = {}
        for o, vs in by_orbit.items():
            dal = delta[o]
            for v in vs:
                shifted = tuple(a - b for a, b in zip(coords[v], base))
                zrel = tuple(a - b for a, b in zip(v, rep))
                k0 = term_key(shifted, zrel)
                for kd, cd in dal.terms.items():
                    kk = tuple(x + y for x, y in zip(k0, kd))
                    if gauge.value(kk) > bound:
                        continue
                    val = out.get(kk, 0) + cd
                    if val:
                        out[kk] = val
                    elif kk in out:
                        del out[kk]
        unit = (0,) * len(table.names)
        if out.get(unit) != 1:
            raise SlabError(f"recentered sum at {rep} lacks unit term")
        del out[unit]
        return out

    def residuals():
        res = {}
        for r in reps:
            rep = tuple(r)
            terms = _log_pure_q(slab_u(rep), table, gauges[rep], order)
            res[rep] = Series(table, order, terms)
        return res

    last_level = None
    for _ in range(max_passes):
        res = residuals()
        live = {rep: s for rep, s in res.items() if not s.is_zero()}
        if not live:
            break
        level = min(s.mindeg() for s in live.values())
        if level <= 0:
            raise SlabError(f"normalization residual at non-positive "
                            f"degree {level}")
        if last_level is not None and level <= last_level:
            raise SlabError(
                f"normalization stalled at degree {level}: residuals "
                f"{ {k: str(v) for k, v in live.items()} }")
        last_level = level
        for rep, s in live.items():
            delta[rep] = (delta[rep] * exp_series(-s)).truncate(order)
    else:
        raise SlabError("normalization did not converge")

    orbit_sums = {}
    total = Series.zero(table, order)
    bound = table.scale_order(order)
    for o, vs in by_orbit.items():
        items = []
        for v in vs:
            k = term_key(coords[v], v)
            if table.deg_scaled(k) <= bound:
                items.append((k, 1))
        s_o = Series.from_terms(table, order, items)
        orbit_sums[o] = s_o
        total = total + delta[o] * s_o

    integrality = {o: all(isinstance(c, int) or fr(c).denominator == 1
                          for c in d.terms.values())
                   for o, d in delta.items()}
    ogw = OGWGenerating(fan, order, table, delta, integrality)
    slabf = SlabFunction(fan, order, table, total, orbit_sums, res)
    return ogw, slabf


# -- closed product form for the surface chain quotients --------------------------------


def product_formula_Ad(d: int, order, denom: int = 1,
                       fan: Fan | None = None) -> Series:
    """The factorized wall function of the period-d surface quotient.

    prod_{k=1..d} prod_{i>=1} (1 + r^i (Q_{k-1} z)^{-1})
                  prod_{j>=0} (1 + r^j  Q_{k-1} z)

    with Q_j = q_1 ... q_j and r = q_1 ... q_d; variables are the orbit curve
    coordinates of the fan (q_l is the curve at ray l mod d).
    """
    if fan is None:
        fan = fan_ad_cover(d)
    order = fr(order)
    table = fan.series_table(denom=denom)

    def orbit_var(ray_residue: int) -> str:
        key = (((ray_residue % d),),)
        oi = fan._orbit_of[key]
        pos = fan.basis_orbits.index(oi)
        return fan.kahler_names()[pos]

    qvars = [orbit_var(l % d) for l in range(1, d + 1)]  # q_1 .. q_d
    one = Series.one(table, order)

    def mono(rpow: int, qpref: int, zpow: int) -> Series:
        # r^rpow * (q_1 ... q_|qpref|)^(sign qpref) * z^zpow
        exps: dict = {}
        for v in qvars:
            exps[v] = exps.get(v, 0) + rpow
        sgn = 1 if qpref >= 0 else -1
        for v in qvars[:abs(qpref)]:
            exps[v] = exps.get(v, 0) + sgn
        if zpow:
            exps["z1"] = zpow
        return Series.monomial(table, order, {k: v for k, v in exps.items()
                                              if v})

    acc = one
    for k in range(1, d + 1):
        i = 1
        while d * i - (k - 1) <= order:
            acc = acc * (one + mono(i, -(k - 1), -1))
            i += 1
        j = 0
        while d * j + (k - 1) <= order:
            acc = acc * (one + mono(j, k - 1, 1))
            j += 1
    return acc


# -- extraction helpers ------------------------------------------------------------------


def extract_ogw(ogw: OGWGenerating, rep, class_coords) -> Fraction:
    """Coefficient of the class in the orbit's generating series."""
    return ogw.coefficient(tuple(rep), class_coords)


def fiber_restriction(series: Series, fan: Fan, fiber_coords,
                      var: str = "q") -> Series:
    """Keep only powers of the fiber class, as a one-variable series."""
    fiber = [fr(x) for x in fiber_coords]
    deg_f = fan.class_degree(fiber)
    if deg_f <= 0:
        raise SlabError("fiber class must have positive degree")
    table = VarTable([(var, "q")])
    order = fr(series.order) / deg_f
    items = []
    src = series.table
    kn = fan.kahler_names()
    for k, c in series.terms.items():
        exps = src.exponents(k)
        if any(exps.get(z, 0) for z in fan.z_names()):
            continue
        vec = [exps.get(n, Fraction(0)) for n in kn]
        ks = {Fraction(a) / b for a, b in zip(vec, fiber) if b}
        if len(ks) != 1:
            if any(vec):
                continue
            ks = {Fraction(0)}
        kval = ks.pop()
        if kval.denominator != 1 or kval < 0:
            continue
        if any(a != kval * b for a, b in zip(vec, fiber)):
            continue
        items.append(({var: kval}, c))
    return Series.from_terms(table, order, items)
