"""Formal q/z-builders for eta and theta series, and the identity checkers.

Everything here is exact: a verified identity means the residual series is
literally empty.  Theta sums are assembled from exponent data (characters,
period linear forms, z-multipliers) and enumerated over lattice shells; the
degree of a term is a positive-definite quadratic in the lattice point, so a
sub-level set is convex and enumeration may stop after two empty shells.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from math import gcd

from .fans import Fan, fan_ad_cover, fan_hypercube_cover, fan_xpq_cover
from .series import (Series, SeriesError, VarTable, exp_series, fr, invert,
                     log_series)
from .slab import SlabError, gs_normalize, product_formula_Ad


class IdentityError(ValueError):
    pass


def _lcm(a, b):
    return a * b // gcd(a, b)


# -- eta ---------------------------------------------------------------------------


@dataclass
class EtaSeries:
    """Euler product prod (1 - q^n); the former 24th-root prefactor of the
    full eta function is carried separately as metadata, never folded in."""

    var: str
    order: Fraction
    core: Series
    prefactor_exponent: Fraction = Fraction(1, 24)


def eta_core(table: VarTable, order, var: str = "q",
             power: int = 1) -> Series:
    order = fr(order)
    one = Series.one(table, order)
    acc = one
    n = 1
    while n <= order:
        factor = one - Series.monomial(table, order, {var: n})
        for _ in range(power):
            acc = acc * factor
        n += 1
    return acc


def eta_q(order, var: str = "q") -> EtaSeries:
    table = VarTable([(var, "q")])
    return EtaSeries(var, fr(order), eta_core(table, order, var))


def pentagonal_coefficients(order) -> dict:
    """Expected core coefficients: (-1)^k at k(3k -/+ 1)/2, else 0."""
    out = {0: 1}
    k = 1
    while k * (3 * k - 1) // 2 <= order:
        sign = (-1) ** k
        g1 = k * (3 * k - 1) // 2
        g2 = k * (3 * k + 1) // 2
        out[g1] = sign
        if g2 <= order:
            out[g2] = sign
        k += 1
    return out


def partition_series(table: VarTable, order, var: str = "q") -> Series:
    return invert(eta_core(table, order, var))


# -- generic convex lattice sums ------------------------------------------------------


def _shells(rank):
    r = 0
    while True:
        if r == 0:
            yield [tuple([0] * rank)]
        else:
            rng = range(-r, r + 1)
            yield [v for v in itertools.product(rng, repeat=rank)
                   if max(abs(x) for x in v) == r]
        r += 1


def convex_lattice_series(table: VarTable, order, rank: int, term,
                          max_radius: int = 200) -> Series:
    """Sum of term(n) over n in Z^rank with weighted degree <= order.

    `term` returns (exponent-map, coeff) or None.  The caller guarantees the
    degree is a positive-definite quadratic (plus linear) in n, so occupied
    shells are contiguous and two empty shells certify completeness.
    """
    order = fr(order)
    bound = table.scale_order(order)
    items = []
    empty_run = 0
    seen_any = False
    for radius, shell in enumerate(_shells(rank)):
        hits = 0
        for n in shell:
            te = term(n)
            if te is None:
                continue
            exps, coeff = te
            key = table.key(exps)
            if table.deg_scaled(key) <= bound:
                items.append((key, coeff))
                hits += 1
        if hits:
            seen_any = True
            empty_run = 0
        elif seen_any or radius > 0:
            empty_run += 1
            if empty_run >= 2:
                break
        if radius > max_radius:
            raise IdentityError("lattice enumeration did not close; "
                                "degree form is not positive definite?")
    return Series.from_terms(table, order, items)


def theta_series(table: VarTable, order, genus: int, char_a, char_b,
                 omega, zvars, zmult) -> Series:
    """Riemann theta sum with character, as an exact series.

    char_a: length-`genus` rational vector.
    char_b: per component, a linear form {q-var: coeff} -- the exponent
        contribution is (n+a)_i * form.
    omega:  genus x genus matrix of linear forms; the contribution is
        (1/2) (n+a)_i (n+a)_j * omega[i][j].
    zvars/zmult: the i-th lattice direction contributes z-exponent
        zmult_i * (n+a)_i, which must be an integer.
    """
    a = [fr(x) for x in char_a]

    def term(n):
        na = [Fraction(x) + y for x, y in zip(n, a)]
        exps: dict = {}

        def bump(form, coeff):
            for v, c in form.items():
                e = exps.get(v, Fraction(0)) + fr(c) * coeff
                if e:
                    exps[v] = e
                elif v in exps:
                    del exps[v]

        for i in range(genus):
            for j in range(genus):
                if omega[i][j]:
                    bump(omega[i][j], na[i] * na[j] / 2)
            if char_b[i]:
                bump(char_b[i], na[i])
        for zv, m, x in zip(zvars, zmult, na):
            ze = m * x
            if ze.denominator != 1:
                raise SeriesError("theta z-exponent is not integral")
            if ze:
                exps[zv] = ze
        return exps, 1

    return convex_lattice_series(table, order, genus, term)


def theta_genus1(table: VarTable, order, var: str = "q", zvar: str = "z",
                 a=0, b_tau=0) -> Series:
    """Theta1[a; b_tau * tau](zeta; tau) with b given in units of tau."""
    return theta_series(table, order, 1, (a,), ({var: b_tau} if b_tau else {},),
                        ((({var: 1}),),), (zvar,), (1,))


# -- the direct generating function of disc counts --------------------------------------


def _member_exponents(m, varmap):
    exps: dict = {}
    l = len(m)
    for i in range(l):
        for j in range(i, l):
            coeff = Fraction(m[i] * m[i], 2) if i == j else \
                Fraction(m[i] * m[j])
            if not coeff:
                continue
            for v, c in varmap[(i, j)].items():
                e = exps.get(v, Fraction(0)) + fr(c) * coeff
                if e:
                    exps[v] = e
                elif v in exps:
                    del exps[v]
    return exps


def delta_log_sum(l: int, table: VarTable, order, varmap) -> Series:
    """The alternating sum over tuples of nonzero lattice vectors adding to
    zero: sum_{j>=2} ((-1)^j / j) sum_tuples q^(sum of member exponents).

    varmap[(i,j)] for i<=j is the exponent form of the (i,j) period entry;
    a member m contributes m_i^2/2 on the diagonal and m_i m_j off it.
    Tuples are enumerated as multisets with multinomial weights.
    """
    order = fr(order)
    bound = table.scale_order(order)

    # candidate members with their exponent keys and degrees
    members = []
    empty_run = 0
    for radius, shell in enumerate(_shells(l)):
        hits = 0
        for m in shell:
            if not any(m):
                continue
            exps = _member_exponents(m, varmap)
            key = table.key(exps)
            d = table.deg_scaled(key)
            if d <= bound:
                members.append((m, key, d))
                hits += 1
        if hits:
            empty_run = 0
        elif radius > 0:
            empty_run += 1
            if empty_run >= 2:
                break
        if radius > 60:
            raise IdentityError("member enumeration did not close")
    members.sort(key=lambda t: (t[2], t[0]))
    if not members:
        return Series.zero(table, order)
    mincost = _min_cost_to_reach(members, l, bound)

    nvars = len(table.names)
    acc: dict = {}
    fact = [1]
    budget_units = bound

    def record(j, key, mult_count):
        # ordered tuples: multinomial j! / prod(mult!)
        while len(fact) <= j:
            fact.append(fact[-1] * len(fact))
        ways = fact[j]
        for m in mult_count:
            ways //= fact[m]
        coeff = Fraction((-1) ** j * ways, j)
        v = acc.get(key, 0) + coeff
        if v:
            acc[key] = v
        elif key in acc:
            del acc[key]

    zero_key = (0,) * nvars

    def dfs(idx, cost, vec_sum, key, j, mults):
        if idx == len(members):
            if j >= 2 and not any(vec_sum):
                record(j, key, mults)
            return
        need = mincost.get(tuple(-x for x in vec_sum))
        if need is None or cost + need > budget_units:
            return
        m, mkey, md = members[idx]
        dfs(idx + 1, cost, vec_sum, key, j, mults)
        # taking the member k times only raises cost + completion bound, so
        # the loop may stop at the first unreachable multiplicity
        count = 0
        while True:
            count += 1
            cost += md
            if cost > budget_units:
                break
            vec_sum = tuple(a + b for a, b in zip(vec_sum, m))
            key = tuple(a + b for a, b in zip(key, mkey))
            need = mincost.get(tuple(-x for x in vec_sum))
            if need is None or cost + need > budget_units:
                break
            dfs(idx + 1, cost, vec_sum, key, j + count, mults + [count])

    dfs(0, 0, tuple([0] * l), zero_key, 0, [])
    return Series(table, order, acc)


def _min_cost_to_reach(members, l, budget):
    """Dijkstra over lattice sums: cheapest member-multiset reaching s."""
    import heapq
    dist = {tuple([0] * l): 0}
    heap = [(0, tuple([0] * l))]
    while heap:
        d, s = heapq.heappop(heap)
        if dist.get(s, None) != d:
            continue
        for m, _, md in members:
            nd = d + md
            if nd > budget:
                continue
            ns = tuple(a + b for a, b in zip(s, m))
            if nd < dist.get(ns, nd + 1):
                dist[ns] = nd
                heapq.heappush(heap, (nd, ns))
    return dist


def delta_direct(l: int, table: VarTable, order, varmap) -> Series:
    """exp of the alternating tuple sum: the closed form of the per-orbit
    generating series for the simply laced quotients."""
    return exp_series(delta_log_sum(l, table, order, varmap))


# -- named verification reports ------------------------------------------------------------


@dataclass
class VerifyReport:
    name: str
    order: Fraction
    passed: bool
    residual: Series
    details: dict

    def residual_terms(self):
        return self.residual.to_jsonable()["terms"]


def verify_triple_product(order, zwindow: int | None = None) -> VerifyReport:
    """prod (1+q^i z^-1)(1+q^j z) - (sum_l q^{l(l-1)/2} z^l) / prod (1-q^k)."""
    order = fr(order)
    table = VarTable([("q", "q"), ("z", "z")], denom=2)
    one = Series.one(table, order)
    lhs = one
    i = 1
    while i <= order:
        lhs = lhs * (one + Series.monomial(table, order, {"q": i, "z": -1}))
        i += 1
    j = 0
    while j <= order:
        lhs = lhs * (one + Series.monomial(table, order, {"q": j, "z": 1}))
        j += 1
    theta = theta_genus1(table, order, a=0, b_tau=Fraction(-1, 2))
    rhs = invert(eta_core(table, order)) * theta
    residual = lhs - rhs
    if zwindow is not None:
        residual = residual.restrict_zbox(zwindow)
    return VerifyReport("triple-product", order, residual.is_zero(),
                        residual, {"zwindow": zwindow})


def verify_log_identity(order) -> VerifyReport:
    """sum_{k,l>=1} q^{kl}/l  =  alternating tuple sum  =  -sum log(1-q^k)."""
    order = fr(order)
    table = VarTable([("q", "q")], denom=2)
    items = []
    k = 1
    while k <= order:
        lmax = int(order / k)
        for l in range(1, lmax + 1):
            items.append(({"q": k * l}, Fraction(1, l)))
        k += 1
    direct = Series.from_terms(table, order, items)
    comp = delta_log_sum(1, table, order, {(0, 0): {"q": 1}})
    logeta = -log_series(eta_core(table, order))
    r1 = direct - comp
    r2 = direct - logeta
    passed = r1.is_zero() and r2.is_zero()
    return VerifyReport("log-identity", order, passed, r1 + r2,
                        {"vs_tuple_sum": r1.is_zero(),
                         "vs_eta_log": r2.is_zero()})


def _orbit_var(fan: Fan, residue) -> str:
    key = (tuple(residue),) if not isinstance(residue[0], tuple) else residue
    oi = fan._orbit_of[key]
    return fan.kahler_names()[fan.basis_orbits.index(oi)]


def verify_az(order, window: int | None = None) -> VerifyReport:
    """Normalized wall function of the one-period chain against the closed
    eta/theta form."""
    order = fr(order)
    fan = fan_ad_cover(1, window=window or int(order) + 3)
    ogw, slab = gs_normalize(fan, order)
    table = slab.table
    qv = fan.kahler_names()[0]
    theta = theta_series(
        table, order, 1, (0,), ({qv: Fraction(-1, 2)},),
        (({qv: 1},),), ("z1",), (1,))
    rhs = invert(eta_core(table, order, qv)) * theta
    residual = slab.series - rhs
    return VerifyReport("AZ", order, residual.is_zero()
                        and slab.residual_is_zero(), residual,
                        {"slab_residual_zero": slab.residual_is_zero()})


def verify_ad(d: int, order, window: int | None = None) -> VerifyReport:
    """Theta decomposition of the period-d chain wall function."""
    order = fr(order)
    fan = fan_ad_cover(d, window=window or int(order) + d + 2)
    denom = 2 * d
    ogw, slab = gs_normalize(fan, order, denom=denom)
    table = slab.table
    qvars = [_orbit_var(fan, (l % d,)) for l in range(1, d + 1)]  # q_1..q_d

    def mono(exps: dict) -> Series:
        return Series.monomial(table, order, {k: v for k, v in exps.items()
                                              if v})

    def add_r(exps: dict, coeff) -> None:
        for v in qvars:
            exps[v] = exps.get(v, Fraction(0)) + fr(coeff)

    def add_Qprod(exps: dict, coeff) -> None:
        # prod_{i=1}^{d-1} Q_i = q_1^{d-1} q_2^{d-2} ... q_{d-1}
        for l, v in enumerate(qvars[:-1], start=1):
            exps[v] = exps.get(v, Fraction(0)) + fr(coeff) * (d - l)

    eta_inv = invert(eta_core(table, order, qvars[0]) if d == 1 else
                     _r_power_product(table, order, qvars, d))
    rhs = Series.zero(table, order)
    for p in range(d):
        exps: dict = {}
        add_r(exps, Fraction(p * p, 2) - Fraction(p * p, 2 * d))
        add_Qprod(exps, Fraction(-p, d))
        pref = mono(exps)

        def bellman_term(n, p=p):
            e: dict = {}
            rexp = sum(n[i] * n[j] for i in range(d - 1)
                       for j in range(i, d - 1)) - p * sum(n)
            for v in qvars:
                e[v] = e.get(v, Fraction(0)) + rexp
            # Q_k carries n_k for k = 1..d-1
            for k in range(1, d):
                for v in qvars[:k]:
                    e[v] = e.get(v, Fraction(0)) + n[k - 1]
            return {k: v for k, v in e.items() if v}, 1

        if d > 1:
            bell = convex_lattice_series(
                table, order, d - 1,
                lambda n: bellman_term(n))
        else:
            bell = Series.one(table, order)

        def theta1_term(n, p=p):
            x = Fraction(n[0]) + Fraction(p, d)
            e: dict = {}
            rexp = Fraction(d) * x * x / 2 - Fraction(d) * x / 2
            for v in qvars:
                e[v] = e.get(v, Fraction(0)) + rexp
            for l, v in enumerate(qvars[:-1], start=1):
                e[v] = e.get(v, Fraction(0)) + (d - l) * x
            ze = d * x
            if ze.denominator != 1:
                raise SeriesError("nonintegral z-power in theta block")
            e["z1"] = ze
            return {k: v for k, v in e.items() if v}, 1

        th = convex_lattice_series(table, order, 1,
                                   lambda n: theta1_term(n))
        rhs = rhs + pref * bell * th
    rhs = eta_inv * rhs
    residual = slab.series - rhs
    return VerifyReport(f"Ad({d})", order,
                        residual.is_zero() and slab.residual_is_zero(),
                        residual,
                        {"slab_residual_zero": slab.residual_is_zero()})


def _r_power_product(table, order, qvars, d) -> Series:
    """prod_k (1 - r^k)^d with r = q_1 ... q_d."""
    one = Series.one(table, order)
    acc = one
    k = 1
    while d * k <= order:
        exps = {v: k for v in qvars}
        factor = one - Series.monomial(table, order, exps)
        for _ in range(d):
            acc = acc * factor
        k += 1
    return acc


def _x11_composites(fan: Fan):
    """Exponent forms of the tau, rho, sigma classes of the (1,1) quotient."""
    c1 = fan.class_from_pairings(fan.curve_pairing([(1, 0), (0, 1)]))
    c2 = fan.class_from_pairings(fan.curve_pairing([(0, 0), (0, 1)]))
    c3 = fan.class_from_pairings(fan.curve_pairing([(0, 0), (1, 0)]))
    tau = tuple(a + b for a, b in zip(c1, c2))
    rho = tuple(a + b for a, b in zip(c1, c3))
    return (fan.class_exponents(tau), fan.class_exponents(rho),
            fan.class_exponents(c1))


def verify_x11(order, zwindow: int | None = None) -> VerifyReport:
    """Wall function of the (1,1) threefold quotient against the direct
    generating function times the genus-2 theta with half-period shift."""
    order = fr(order)
    fan = fan_xpq_cover(1, 1, window=max(4, int(order)))
    ogw, slab = gs_normalize(fan, order, denom=2)
    table = slab.table
    tau, rho, sig = _x11_composites(fan)
    varmap = {(0, 0): tau, (1, 1): rho, (0, 1): sig}
    delta = delta_direct(2, table, order, varmap)
    half = Fraction(-1, 2)
    theta = theta_series(
        table, order, 2, (0, 0),
        ({v: half * c for v, c in tau.items()},
         {v: half * c for v, c in rho.items()}),
        ((tau, sig), (sig, rho)),
        ("z1", "z2"), (1, 1))
    rhs = delta * theta
    residual = slab.series - rhs
    if zwindow is not None:
        residual = residual.restrict_zbox(zwindow)
    delta_gs = ogw.series((0, 0))
    dual = (delta_gs - delta).is_zero()
    return VerifyReport("X11", order,
                        residual.is_zero() and dual
                        and slab.residual_is_zero(),
                        residual,
                        {"delta_dual_route_equal": dual,
                         "slab_residual_zero": slab.residual_is_zero()})


def _xpq_curve_class(fan: Fan, kind: str, a: int, b: int):
    """Folded class of C^1, C^2, C^3 at cell (a, b), labels taken mod the
    quotient periods."""
    p, q = fan.quotient
    a %= p
    b %= q
    if kind == "C1":
        facet = [(a + 1, b), (a, b + 1)]
    elif kind == "C2":
        facet = [(a, b), (a, b + 1)]
    elif kind == "C3":
        facet = [(a, b), (a + 1, b)]
    else:
        raise ValueError(kind)
    return fan.class_from_pairings(fan.curve_pairing(facet))


def verify_xpq(p: int, q: int, order, zwindow: int | None = None,
               window: int | None = None) -> VerifyReport:
    """Theta decomposition of the (p,q) threefold quotient wall function."""
    order = fr(order)
    fan = fan_xpq_cover(p, q, window=window or max(p, q, 3) + int(order) // 2)
    denom = 4 * p * q
    ogw, slab = gs_normalize(fan, order, denom=denom)
    table = slab.table

    def cls(kind, a, b):
        return _xpq_curve_class(fan, kind, a, b)

    def tau_cell(a, b):
        return _vadd(cls("C1", a, b), cls("C2", a, b))

    def rho_cell(a, b):
        return _vadd(cls("C1", a, b), cls("C3", a, b))

    def sig_cell(a, b):
        return cls("C1", a, b)

    rank = fan.rank
    zero = tuple(Fraction(0) for _ in range(rank))

    def vsum(vecs):
        out = zero
        for v in vecs:
            out = _vadd(out, v)
        return out

    tau = vsum(tau_cell(k, 0) for k in range(p))
    rho = vsum(rho_cell(0, l) for l in range(q))
    sigma = vsum(sig_cell(k, l) for k in range(p) for l in range(q))
    # the composites are independent of the transverse label
    for b in range(q):
        assert vsum(tau_cell(k, b) for k in range(p)) == tau
    for a in range(p):
        assert vsum(rho_cell(a, l) for l in range(q)) == rho

    # The tau/rho block labels carry the diagonal offset of the elementary
    # square classes: the square step at cell (a,b) in the first direction
    # is tau at (a+1, b-1) and in the second rho at (a-1, b+1).  Verified
    # against the lattice at (1,1), (2,1), (1,2) and (2,2).
    btau = vsum(_vscale(tau_cell(-k, -1), k) for k in range(p))
    brho = vsum(_vscale(rho_cell(-1, -l), l) for l in range(q))

    rhs = Series.zero(table, order)
    for a in range(p):
        for b in range(q):
            kv = zero
            kv = _vadd(kv, _vscale(tau, Fraction(-a * a, 2 * p)
                                   + Fraction(a, 2)))
            kv = _vadd(kv, _vscale(sigma, Fraction(-a * b, p * q)))
            kv = _vadd(kv, _vscale(rho, Fraction(-b * b, 2 * q)
                                   + Fraction(b, 2)))
            kv = _vadd(kv, _vscale(btau, Fraction(-a, p)))
            kv = _vadd(kv, _vscale(brho, Fraction(-b, q)))
            for k in range(a):
                kv = _vadd(kv, _vscale(tau_cell(a - k, b - 1), k))
            for l in range(b):
                kv = _vadd(kv, _vscale(rho_cell(-1, b - l), l))
            for l in range(b):
                kv = _vadd(kv, _vscale(sig_cell(0, l), a))
            kmono = fan.monomial_of_class(table, order, kv)

            char_a = (Fraction(a, p), Fraction(b, q))
            bform1 = _form_add(_form_scale(fan.class_exponents(tau),
                                           Fraction(-p, 2)),
                               fan.class_exponents(btau))
            bform2 = _form_add(_form_scale(fan.class_exponents(rho),
                                           Fraction(-q, 2)),
                               fan.class_exponents(brho))
            omega = ((_form_scale(fan.class_exponents(tau), p),
                      fan.class_exponents(sigma)),
                     (fan.class_exponents(sigma),
                      _form_scale(fan.class_exponents(rho), q)))
            theta = theta_series(table, order, 2, char_a, (bform1, bform2),
                                 omega, ("z1", "z2"), (p, q))
            rhs = rhs + kmono * ogw.series((a, b)) * theta
    residual = slab.series - rhs
    if zwindow is not None:
        residual = residual.restrict_zbox(zwindow)
    return VerifyReport(f"Xpq({p},{q})", order,
                        residual.is_zero() and slab.residual_is_zero(),
                        residual,
                        {"slab_residual_zero": slab.residual_is_zero()})


def _vadd(a, b):
    return tuple(x + y for x, y in zip(a, b))


def _vscale(a, c):
    c = fr(c)
    return tuple(c * x for x in a)


def _form_scale(form, c):
    c = fr(c)
    return {k: c * v for k, v in form.items() if c * v}


def _form_add(f1, f2):
    out = dict(f1)
    for k, v in f2.items():
        nv = out.get(k, Fraction(0)) + v
        if nv:
            out[k] = nv
        elif k in out:
            del out[k]
    return out


def _hypercube_period_classes(fan: Fan, l: int):
    """Classes of the period-matrix entries from their intersection data."""
    out = {}
    zero = tuple([0] * l)

    def unit(i):
        return tuple(1 if k == i else 0 for k in range(l))

    for i in range(l):
        pairing = {zero: 1,
                   tuple(2 * x for x in unit(i)): 1,
                   unit(i): -2}
        out[(i, i)] = fan.class_from_pairings(pairing)
    for i in range(l):
        for j in range(i + 1, l):
            eij = tuple(a + b for a, b in zip(unit(i), unit(j)))
            pairing = {zero: 1, eij: 1, unit(i): -1, unit(j): -1}
            out[(i, j)] = fan.class_from_pairings(pairing)
    return out


def verify_x1l(l: int, order, zwindow: int | None = None) -> VerifyReport:
    """Wall function of the l-fold unit-period quotient against the direct
    generating function times the genus-l theta."""
    order = fr(order)
    fan = fan_hypercube_cover((1,) * l, window=max(2, int(order) // 2 + 1))
    ogw, slab = gs_normalize(fan, order, denom=2)
    table = slab.table
    period = _hypercube_period_classes(fan, l)
    varmap = {(i, j): fan.class_exponents(period[(i, j)])
              for i in range(l) for j in range(i, l)}
    delta = delta_direct(l, table, order, varmap)
    half = Fraction(-1, 2)
    char_b = tuple(_form_scale(varmap[(i, i)], half) for i in range(l))
    omega = tuple(tuple(varmap[(min(i, j), max(i, j))] for j in range(l))
                  for i in range(l))
    theta = theta_series(table, order, l, (0,) * l, char_b, omega,
                         tuple(fan.z_names()), (1,) * l)
    rhs = delta * theta
    residual = slab.series - rhs
    if zwindow is not None:
        residual = residual.restrict_zbox(zwindow)
    rep = tuple([0] * l)
    dual = (ogw.series(rep) - delta).is_zero()
    return VerifyReport(f"X1l({l})", order,
                        residual.is_zero() and dual
                        and slab.residual_is_zero(),
                        residual,
                        {"delta_dual_route_equal": dual,
                         "slab_residual_zero": slab.residual_is_zero()})


IDENTITY_BUILDERS = {
    "triple": lambda order, **kw: verify_triple_product(order, **kw),
    "logid": lambda order, **kw: verify_log_identity(order),
    "AZ": lambda order, **kw: verify_az(order, **kw),
}


def verify_identity(name: str, order, **kwargs) -> VerifyReport:
    """Dispatch by name: triple, logid, AZ, Ad(d), X11, Xpq(p,q), X1l(l)."""
    if name in IDENTITY_BUILDERS:
        return IDENTITY_BUILDERS[name](order, **kwargs)
    if name.startswith("Ad(") and name.endswith(")"):
        return verify_ad(int(name[3:-1]), order, **kwargs)
    if name == "X11":
        return verify_x11(order, **kwargs)
    if name.startswith("Xpq(") and name.endswith(")"):
        p, q = (int(x) for x in name[4:-1].split(","))
        if (p, q) == (1, 1):
            return verify_x11(order, **kwargs)
        return verify_xpq(p, q, order, **kwargs)
    if name.startswith("X1l(") and name.endswith(")"):
        return verify_x1l(int(name[4:-1]), order, **kwargs)
    raise IdentityError(f"unknown identity {name!r}")
