"""Tests for lattice sums, slab normalization and the product formulas."""

from fractions import Fraction

import pytest

from thetaslab.fans import fan_ad_cover, fan_ak, fan_xpq_cover
from thetaslab.series import Series, invert
from thetaslab.slab import (SlabError, extract_ogw, fiber_restriction,
                            gs_normalize, lattice_sum, orbit_representatives,
                            product_formula_Ad, ray_orbit)


def partition_numbers(n):
    """Euler pentagonal recurrence, independent of the series engine."""
    p = [1] + [0] * n
    for m in range(1, n + 1):
        total, k = 0, 1
        while True:
            g1 = k * (3 * k - 1) // 2
            g2 = k * (3 * k + 1) // 2
            if g1 > m and g2 > m:
                break
            sign = -1 if k % 2 == 0 else 1
            if g1 <= m:
                total += sign * p[m - g1]
            if g2 <= m:
                total += sign * p[m - g2]
            k += 1
        p[m] = total
    return p


def convolve(a, b, n):
    return [sum(a[i] * b[m - i] for i in range(m + 1)) for m in range(n + 1)]


# -- lattice sums -----------------------------------------------------------------


def test_lattice_sum_single_period_chain():
    fan = fan_ad_cover(1, window=8)
    s = lattice_sum(fan, 6)
    # coefficients q^{l(l-1)/2} z^l
    assert s.coeff({"z1": 0}) == 1
    assert s.coeff({"z1": 1}) == 1
    assert s.coeff({"z1": 2, "q1": 1}) == 1
    assert s.coeff({"z1": -1, "q1": 1}) == 1
    assert s.coeff({"z1": 3, "q1": 3}) == 1
    assert s.coeff({"z1": -2, "q1": 3}) == 1
    # no stray terms: all coefficients are one per lattice site
    assert all(c == 1 for c in s.terms.values())


def test_lattice_sum_finite_chain_is_polynomial():
    fan = fan_ak(1)
    s = lattice_sum(fan, 5)
    t = s.table
    one = Series.one(t, 5)
    z = Series.monomial(t, 5, {"z1": 1})
    qz2 = Series.monomial(t, 5, {"q1": 1, "z1": 2})
    assert s == one + z + qz2


def test_lattice_sum_x11_matches_quadratic_exponents():
    fan = fan_xpq_cover(1, 1, window=6)
    s = lattice_sum(fan, 6)
    assert all(c == 1 for c in s.terms.values())
    # the (1,1) site carries the single conifold curve class
    labels = _x11_labels(fan)
    exps = {"z1": 1, "z2": 1, labels["C1"]: 1}
    assert s.coeff(exps) == 1


def _x11_labels(fan):
    out = {}
    for j, oi in enumerate(fan.basis_orbits):
        key = fan.orbit_keys[oi]
        name = fan.kahler_names()[j]
        if key == ((0, 1), (1, 0)):
            out["C1"] = name
        elif key == ((0, 0), (0, 1)):
            out["C2"] = name
        elif key == ((0, 0), (1, 0)):
            out["C3"] = name
    return out


def test_lattice_sum_window_too_small():
    from thetaslab.fans import FanError
    fan = fan_ad_cover(1, window=3)
    with pytest.raises(FanError):
        lattice_sum(fan, 12)


# -- normalization: the chain quotient gives partition numbers ------------------------


def test_chain_quotient_delta_is_partition_series():
    fan = fan_ad_cover(1, window=9)
    ogw, slab = gs_normalize(fan, 9)
    reps = orbit_representatives(fan)
    assert reps == [(0,)]
    d = ogw.series((0,))
    p = partition_numbers(9)
    for n in range(10):
        assert d.coeff({"q1": n}) == p[n]
    assert slab.residual_is_zero()


def test_finite_chain_slab_function_factorizes():
    fan = fan_ak(1)
    ogw, slab = gs_normalize(fan, 6)
    t = ogw.table
    assert ogw.series((0,)) == Series.one(t, 6)
    assert ogw.series((2,)) == Series.one(t, 6)
    one = Series.one(t, 6)
    q = Series.monomial(t, 6, {"q1": 1})
    assert ogw.series((1,)) == one + q
    z = Series.monomial(t, 6, {"z1": 1})
    qz = Series.monomial(t, 6, {"q1": 1, "z1": 1})
    assert slab.series == (one + z) * (one + qz)
    assert slab.residual_is_zero()


def test_extract_ogw_values():
    fan = fan_ad_cover(1, window=8)
    ogw, _ = gs_normalize(fan, 6)
    # class 0 -> 1, class 4F -> p(4) = 5
    zero = tuple(Fraction(0) for _ in range(fan.rank))
    assert extract_ogw(ogw, (0,), zero) == 1
    four = tuple(Fraction(4) for _ in range(fan.rank))
    assert extract_ogw(ogw, (0,), four) == 5


def test_finite_chain_curve_coefficient():
    fan = fan_ak(1)
    ogw, _ = gs_normalize(fan, 4)
    c = fan.class_from_pairings(fan.curve_pairing([(1,)]))
    assert extract_ogw(ogw, (1,), c) == 1


# -- the two-orbit and three-orbit chains ------------------------------------------------


def test_product_formula_matches_normalization_period_two():
    fan = fan_ad_cover(2, window=8)
    ogw, slab = gs_normalize(fan, 6)
    prod = product_formula_Ad(2, 6, fan=fan)
    assert (slab.series - prod).is_zero()
    assert slab.residual_is_zero()


def test_product_formula_single_period_is_triple_product():
    # prod (1+q^i z^-1)(1+q^j z) = (sum q^{l(l-1)/2} z^l) / prod (1-q^k)
    fan = fan_ad_cover(1, window=10)
    order = 8
    prod = product_formula_Ad(1, order, fan=fan)
    s = lattice_sum(fan, order, table=prod.table)
    t = prod.table
    eta_core = Series.one(t, order)
    for n in range(1, order + 1):
        eta_core = eta_core * (Series.one(t, order)
                               - Series.monomial(t, order, {"q1": n}))
    assert (prod * eta_core - s).is_zero()


def test_delta_of_period_two_chain_fiber_restriction():
    fan = fan_ad_cover(2, window=8)
    ogw, _ = gs_normalize(fan, 8)
    fiber = tuple(Fraction(1) for _ in range(fan.rank))
    p = partition_numbers(4)
    sq = convolve(p, p, 4)
    for rep in orbit_representatives(fan):
        d = ogw.series(rep)
        r = fiber_restriction(d, fan, fiber)
        for k in range(5):
            assert r.coeff({"q": k}) == sq[k], (rep, k)


def test_delta_of_period_three_chain_is_partition_cube():
    fan = fan_ad_cover(3, window=9)
    ogw, _ = gs_normalize(fan, 9)
    fiber = tuple(Fraction(1) for _ in range(fan.rank))
    p = partition_numbers(3)
    cube = convolve(convolve(p, p, 3), p, 3)
    assert cube[:4] == [1, 3, 9, 22]
    r = fiber_restriction(ogw.series((0,)), fan, fiber)
    for k in range(4):
        assert r.coeff({"q": k}) == cube[k]


# -- the threefold quotient -------------------------------------------------------------


def test_x11_delta_leading_terms():
    fan = fan_xpq_cover(1, 1, window=6)
    ogw, slab = gs_normalize(fan, 4)
    labels = _x11_labels(fan)
    d = ogw.series((0, 0))
    assert d.coeff({}) == 1
    # tau and rho classes enter with coefficient one, sigma with zero
    assert d.coeff({labels["C1"]: 1, labels["C2"]: 1}) == 1
    assert d.coeff({labels["C1"]: 1, labels["C3"]: 1}) == 1
    assert d.coeff({labels["C1"]: 1}) == 0
    assert ogw.integrality[(0, 0)]
    assert slab.residual_is_zero()


# -- stabilization along the finite chains ------------------------------------------------


@pytest.mark.parametrize("k,depth", [(3, 1), (5, 2), (7, 3)])
def test_central_ray_delta_stabilizes_to_partition_series(k, depth):
    fan = fan_ak(k)
    ogw, _ = gs_normalize(fan, depth)
    center = ((k + 1) // 2,)
    d = ogw.series(center)
    # send every chain variable to a single q
    from thetaslab.series import VarTable
    t1 = VarTable([("q", "q")])
    collapsed = d.substitute({n: {"q": 1} for n in fan.kahler_names()},
                             table=t1, order=depth)
    p = partition_numbers(depth)
    for n in range(depth + 1):
        assert collapsed.coeff({"q": n}) == p[n]


def test_slab_conditions_hold_at_every_recentering():
    # multi-orbit finite chain: all residuals vanish at every window ray
    fan = fan_ak(2)
    _, slab = gs_normalize(fan, 5)
    assert set(slab.residuals) == set(orbit_representatives(fan))
    assert slab.residual_is_zero()


def test_orbit_of_translated_ray():
    fan = fan_ad_cover(2, window=6)
    assert ray_orbit(fan, (5,)) == (1,)
    assert ray_orbit(fan, (-1,)) == (1,)
