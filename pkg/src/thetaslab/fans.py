"""Toric lattice combinatorics for height-one fans and their translation
quotients.

A fan here is a finite window of a (possibly infinite) simplicial fan whose
ray generators all sit at height one: rays are recorded by their base-plane
part v, the generator being (v, 1).  A quotient is a diagonal translation
lattice acting on the base plane.  From a fan we derive:

* the irreducible toric curves (interior codimension-one cones) and their
  intersection vectors against the toric divisors,
* the quotient curve-class group: the span of the orbit curves modulo the
  folded relation lattice, with a deterministic basis and exact rational
  coordinates,
* the classes of the basic-disc differences attached to rays, assembled from
  certified local decompositions into toric curves, which is what feeds the
  lattice theta sums.

Total degree in orbit curves is a positive grading on effective classes; it
is the truncation grading used by every series built over a fan.
"""

from __future__ import annotations

import itertools
import json
from fractions import Fraction

from .series import Series, VarTable, fr


class FanError(ValueError):
    pass


def _det(rows):
    n = len(rows)
    if n == 1:
        return rows[0][0]
    total = 0
    for j in range(n):
        if rows[0][j]:
            minor = [r[:j] + r[j + 1:] for r in rows[1:]]
            total += (-1) ** j * rows[0][j] * _det(minor)
    return total


def _solve_rational(columns, rhs):
    """Solve sum_j x_j * columns[j] = rhs over Q; None when inconsistent."""
    rows = len(rhs)
    cols = len(columns)
    m = [[Fraction(columns[j][i]) for j in range(cols)] + [Fraction(rhs[i])]
         for i in range(rows)]
    pivots = []
    r = 0
    for c in range(cols):
        pr = next((i for i in range(r, rows) if m[i][c]), None)
        if pr is None:
            continue
        m[r], m[pr] = m[pr], m[r]
        inv = Fraction(1) / m[r][c]
        m[r] = [x * inv for x in m[r]]
        for i in range(rows):
            if i != r and m[i][c]:
                f = m[i][c]
                m[i] = [a - f * b for a, b in zip(m[i], m[r])]
        pivots.append(c)
        r += 1
        if r == rows:
            break
    for i in range(r, rows):
        if m[i][cols]:
            return None
    x = [Fraction(0)] * cols
    for i, c in enumerate(pivots):
        x[c] = m[i][cols]
    return x


class Fan:
    """Finite window of a height-one simplicial fan plus a diagonal quotient.

    rays: base-plane lattice vectors v (the fan generator is (v, 1)).
    cones: tuples of ray indices, each maximal, simplicial and unimodular.
    quotient: per-axis translation periods; 0 disables an axis.
    """

    def __init__(self, dim, rays, cones, quotient=None, name="fan"):
        self.dim = int(dim)
        self.base_dim = self.dim - 1
        self.rays = tuple(tuple(int(x) for x in v) for v in rays)
        self.cones = tuple(tuple(sorted(int(i) for i in c)) for c in cones)
        if quotient is None:
            quotient = (0,) * self.base_dim
        self.quotient = tuple(int(d) for d in quotient)
        self.name = name
        if len(set(self.rays)) != len(self.rays):
            raise FanError("duplicate rays")
        for v in self.rays:
            if len(v) != self.base_dim:
                raise FanError("ray of wrong dimension")
        self._ray_index = {v: i for i, v in enumerate(self.rays)}
        self._validate()
        self._build_curves()
        self._build_class_group()
        self._E_cache: dict = {}
        self._T_cache: dict = {}
        self._A_cache: dict = {}

    # -- validation -----------------------------------------------------------

    def _lift(self, v):
        return list(v) + [1]

    def _validate(self):
        for c in self.cones:
            if len(c) != self.dim:
                raise FanError(f"cone {c} is not simplicial of full dimension")
            if abs(_det([self._lift(self.rays[i]) for i in c])) != 1:
                raise FanError(f"cone {c} is not unimodular")
        zero = tuple([0] * self.base_dim)
        units = [tuple(1 if j == i else 0 for j in range(self.base_dim))
                 for i in range(self.base_dim)]
        needed = {zero, *units}
        if not needed.issubset(self._ray_index):
            raise FanError("fan window must contain the base cell rays")
        base_ids = {self._ray_index[v] for v in needed}
        if not any(set(c) == base_ids for c in self.cones):
            raise FanError("fan has no base-point cone on (0, e_1, ...)")
        for axis, period in enumerate(self.quotient):
            if not period:
                continue
            shift = tuple(period if j == axis else 0
                          for j in range(self.base_dim))
            if not any(tuple(a + b for a, b in zip(v, shift)) in self._ray_index
                       for v in self.rays):
                raise FanError("quotient translation misses the window")

    def ray_index(self, v):
        try:
            return self._ray_index[tuple(v)]
        except KeyError:
            raise FanError(f"ray {tuple(v)} outside the window") from None

    def has_ray(self, v) -> bool:
        return tuple(v) in self._ray_index

    # -- toric curves -----------------------------------------------------------

    def _build_curves(self):
        """Interior codim-1 cones with their divisor intersection vectors.

        For a facet with adjacent maximal cones adding rays a and b, the
        relation (a,1) + (b,1) = sum_w m_w (w,1) over the facet rays gives
        C.D_a = C.D_b = 1 and C.D_w = -m_w.
        """
        facets: dict = {}
        for cone in self.cones:
            for drop in cone:
                facets.setdefault(tuple(i for i in cone if i != drop),
                                  []).append(drop)
        self.curves = []           # list of (facet_ray_tuple, pairing dict)
        self._facet_index = {}
        for facet, attached in sorted(facets.items()):
            if len(attached) == 1:
                continue
            if len(attached) > 2:
                raise FanError("facet shared by more than two cones")
            a, b = attached
            lifted = [self._lift(self.rays[i]) for i in facet]
            target = [x + y for x, y in zip(self._lift(self.rays[a]),
                                            self._lift(self.rays[b]))]
            sol = _solve_rational(lifted, target)
            if sol is None:
                raise FanError("facet relation is not solvable")
            pairing = {self.rays[a]: 1, self.rays[b]: 1}
            for i, m in zip(facet, sol):
                if m.denominator != 1:
                    raise FanError("non-integral facet relation")
                if m:
                    pairing[self.rays[i]] = pairing.get(self.rays[i], 0) - int(m)
            key = tuple(sorted(self.rays[i] for i in facet))
            self._facet_index[key] = len(self.curves)
            self.curves.append((key, pairing))

    def curve_pairing(self, facet_rays) -> dict:
        key = tuple(sorted(tuple(v) for v in facet_rays))
        try:
            return dict(self.curves[self._facet_index[key]][1])
        except KeyError:
            raise FanError(f"no interior curve on facet {facet_rays}") from None

    def intersection_number(self, pairing: dict, ray) -> int:
        v = tuple(ray)
        if not self.has_ray(v):
            raise FanError(f"ray {v} outside the window")
        return pairing.get(v, 0)

    # -- orbits and the quotient class group -------------------------------------

    def _cell_shift(self, v):
        """Translation moving v into the fundamental cell."""
        return tuple(-(x - (x % d)) if d else 0
                     for x, d in zip(v, self.quotient))

    def curve_orbit_key(self, facet_key):
        pts = list(facet_key)
        lo = tuple(min(p[j] for p in pts) for j in range(self.base_dim))
        shift = self._cell_shift(lo)
        return tuple(sorted(tuple(x + s for x, s in zip(p, shift))
                            for p in pts))

    def _build_class_group(self):
        orbit_keys = sorted({self.curve_orbit_key(k) for k, _ in self.curves})
        self.orbit_keys = orbit_keys
        self._orbit_of = {k: orbit_keys.index(self.curve_orbit_key(k))
                          for k, _ in self.curves}
        n_orb = len(orbit_keys)
        # Sparse row reduction of [pairings | fold] over ray columns; rows
        # whose pairing part dies are folded relations among orbit curves.
        pivot_rows: dict = {}   # ray -> (pairing dict, fold list)
        relations = []
        for key, pairing in self.curves:
            row = dict(pairing)
            fold = [Fraction(0)] * n_orb
            fold[self._orbit_of[key]] = Fraction(1)
            while row:
                col = min(row)
                if col not in pivot_rows:
                    lead = Fraction(row[col])
                    row = {c: Fraction(x) / lead for c, x in row.items()}
                    fold = [x / lead for x in fold]
                    pivot_rows[col] = (row, fold)
                    row = None
                    break
                prow, pfold = pivot_rows[col]
                f = Fraction(row[col])
                for c, x in prow.items():
                    nv = row.get(c, Fraction(0)) - f * x
                    if nv:
                        row[c] = nv
                    elif c in row:
                        del row[c]
                fold = [a - f * b for a, b in zip(fold, pfold)]
            if row is None:
                continue
            if any(fold):
                relations.append(fold)
        # reduce the relation space to row echelon form over orbit columns
        self.relation_rows = []
        self._relation_pivots = []
        for rel in relations:
            rel = self._reduce_by_relations(rel)
            piv = next((j for j, x in enumerate(rel) if x), None)
            if piv is None:
                continue
            inv = Fraction(1) / rel[piv]
            rel = [x * inv for x in rel]
            for row, p in zip(self.relation_rows, self._relation_pivots):
                if row[piv]:
                    f = row[piv]
                    for j in range(n_orb):
                        row[j] -= f * rel[j]
            self.relation_rows.append(list(rel))
            self._relation_pivots.append(piv)
        order = sorted(range(len(self.relation_rows)),
                       key=lambda i: self._relation_pivots[i])
        self.relation_rows = [self.relation_rows[i] for i in order]
        self._relation_pivots = [self._relation_pivots[i] for i in order]
        for row in self.relation_rows:
            if sum(row):
                raise FanError("orbit curve relations are not degree balanced")
        pivset = set(self._relation_pivots)
        self.basis_orbits = [j for j in range(n_orb) if j not in pivset]
        self.rank = len(self.basis_orbits)

    def _reduce_by_relations(self, vec):
        vec = [Fraction(x) for x in vec]
        for row, p in zip(self.relation_rows, self._relation_pivots):
            if vec[p]:
                f = vec[p]
                for j in range(len(vec)):
                    vec[j] -= f * row[j]
        return vec

    def class_coords(self, orbit_vector) -> tuple:
        """Coordinates in the quotient class group of an orbit-curve vector."""
        red = self._reduce_by_relations(orbit_vector)
        for j, x in enumerate(red):
            if x and j not in self.basis_orbits:
                raise FanError("reduction failed to reach the basis")
        return tuple(red[j] for j in self.basis_orbits)

    def orbit_vector_of_curve(self, facet_rays):
        key = tuple(sorted(tuple(v) for v in facet_rays))
        vec = [Fraction(0)] * len(self.orbit_keys)
        vec[self._orbit_of[key]] = Fraction(1)
        return vec

    def class_degree(self, coords) -> Fraction:
        """Total orbit-curve degree; positive on nonzero effective classes."""
        return sum(coords, Fraction(0))

    # -- local decomposition of disc-difference classes ----------------------------

    def class_from_pairings(self, pairing: dict, patch_radius: int = 2):
        """Coordinates of a class given by its divisor intersection vector.

        The class is expressed as a rational combination of toric curves in a
        window patch around the support; the solve is exact over every ray
        touched by the patch, so failure is loud.
        """
        support = list(pairing)
        if not support:
            return tuple(Fraction(0) for _ in self.basis_orbits)
        lo = [min(v[j] for v in support) - patch_radius
              for j in range(self.base_dim)]
        hi = [max(v[j] for v in support) + patch_radius
              for j in range(self.base_dim)]
        local = [i for i, (key, _) in enumerate(self.curves)
                 if all(lo[j] <= v[j] <= hi[j]
                        for v in key for j in range(self.base_dim))]
        touched = sorted({v for i in local for v in self.curves[i][1]}
                         | set(support))
        cols = [[Fraction(self.curves[i][1].get(v, 0)) for v in touched]
                for i in local]
        rhs = [Fraction(pairing.get(v, 0)) for v in touched]
        sol = _solve_rational(cols, rhs)
        if sol is None:
            raise FanError(
                "class is not a combination of window toric curves; "
                "enlarge the window")
        vec = [Fraction(0)] * len(self.orbit_keys)
        for x, i in zip(sol, local):
            if x:
                vec[self._orbit_of[self.curves[i][0]]] += x
        return self.class_coords(vec)

    def _unit(self, k):
        return tuple(1 if j == k else 0 for j in range(self.base_dim))

    def _square_class(self, k, j, v):
        """Class of beta_{v+e_k+e_j} - beta_{v+e_k} - beta_{v+e_j} + beta_v.

        Translation invariant up to the quotient, so cached per residue.
        """
        shift = self._cell_shift(v)
        r = tuple(x + s for x, s in zip(v, shift))
        ck = (k, j, r) if k <= j else (j, k, r)
        if ck in self._E_cache:
            return self._E_cache[ck]
        k_, j_, _ = ck
        ek, ej = self._unit(k_), self._unit(j_)
        pairing: dict = {}

        def bump(w, n):
            if n:
                pairing[w] = pairing.get(w, 0) + n
                if not pairing[w]:
                    del pairing[w]

        bump(r, 1)
        bump(tuple(a + b + c for a, b, c in zip(r, ek, ej)), 1)
        bump(tuple(a + b for a, b in zip(r, ek)), -1)
        bump(tuple(a + b for a, b in zip(r, ej)), -1)
        coords = self.class_from_pairings(pairing)
        self._E_cache[ck] = coords
        return coords

    def _step_class(self, k, v):
        """Class of beta_{v+e_k} - beta_v - beta_{e_k} + beta_0."""
        v = tuple(v)
        ck = (k, v)
        if ck in self._T_cache:
            return self._T_cache[ck]
        if not any(v):
            out = tuple(Fraction(0) for _ in self.basis_orbits)
        else:
            j = next(i for i, x in enumerate(v) if x)
            ej = self._unit(j)
            if v[j] > 0:
                w = tuple(a - b for a, b in zip(v, ej))
                prev = self._step_class(k, w)
                sq = self._square_class(k, j, w)
                out = tuple(a + b for a, b in zip(prev, sq))
            else:
                w = tuple(a + b for a, b in zip(v, ej))
                prev = self._step_class(k, w)
                sq = self._square_class(k, j, v)
                out = tuple(a - b for a, b in zip(prev, sq))
        self._T_cache[ck] = out
        return out

    def curve_class_of_ray(self, v) -> tuple:
        """Class coords of beta_v - beta_0 - sum_k v_k (beta_{e_k} - beta_0)."""
        v = tuple(int(x) for x in v)
        if v in self._A_cache:
            return self._A_cache[v]
        if not any(v):
            out = tuple(Fraction(0) for _ in self.basis_orbits)
        else:
            j = next(i for i, x in enumerate(v) if x)
            ej = self._unit(j)
            if v[j] > 0:
                w = tuple(a - b for a, b in zip(v, ej))
                out = tuple(a + b for a, b in
                            zip(self.curve_class_of_ray(w),
                                self._step_class(j, w)))
            else:
                w = tuple(a + b for a, b in zip(v, ej))
                out = tuple(a - b for a, b in
                            zip(self.curve_class_of_ray(w),
                                self._step_class(j, v)))
        self._A_cache[v] = out
        return out

    def ray_class_degree(self, v) -> Fraction:
        return self.class_degree(self.curve_class_of_ray(v))

    # -- degree quadratic ------------------------------------------------------------

    def degree_quadratic(self):
        """Exact (H, g) with ray_class_degree(v) = v.H.v/2 + g.v, verified on
        every nearby window ray; the growth certificates in the slab
        machinery rely on this form.

        Uses one-sided samples only (classes at e_i vanish, so H_ii is the
        degree at 2 e_i and H_ij the degree at e_i + e_j), which also covers
        finite chains without rays at negative positions.
        """
        n = self.base_dim
        H = [[Fraction(0)] * n for _ in range(n)]
        g = [Fraction(0)] * n
        for i in range(n):
            two = tuple(2 * x for x in self._unit(i))
            if not self.has_ray(two):
                raise FanError("fan too small to calibrate degree growth")
            H[i][i] = self.ray_class_degree(two)
            g[i] = -H[i][i] / 2
        for i in range(n):
            for j in range(i + 1, n):
                eij = tuple(self._unit(i)[k] + self._unit(j)[k]
                            for k in range(n))
                if not self.has_ray(eij):
                    raise FanError("fan too small to calibrate degree growth")
                H[i][j] = H[j][i] = self.ray_class_degree(eij)
        for v in itertools.product(range(-3, 4), repeat=n):
            if self.has_ray(v):
                if self.quadratic_degree(H, g, v) != self.ray_class_degree(v):
                    raise FanError("ray-class degree is not quadratic")
        return H, g

    def quadratic_degree(self, H, g, v) -> Fraction:
        n = self.base_dim
        q = sum(H[i][j] * v[i] * v[j] for i in range(n) for j in range(n))
        return q / 2 + sum(gi * vi for gi, vi in zip(g, v))

    # -- series table ------------------------------------------------------------------

    def kahler_names(self):
        return [f"q{i + 1}" for i in range(self.rank)]

    def z_names(self):
        return [f"z{i + 1}" for i in range(self.base_dim)]

    def series_table(self, denom: int = 1) -> VarTable:
        """z-variables plus one unit-weight variable per basis orbit curve."""
        variables = [(n, "z") for n in self.z_names()]
        variables += [(n, "q", 1) for n in self.kahler_names()]
        return VarTable(variables, denom=denom)

    def class_exponents(self, coords) -> dict:
        return {n: c for n, c in zip(self.kahler_names(), coords) if c}

    def monomial_of_class(self, table, order, coords, zexp=None,
                          coeff=1) -> Series:
        exps = dict(self.class_exponents(coords))
        if zexp is not None:
            for n, e in zip(self.z_names(), zexp):
                if e:
                    exps[n] = Fraction(e)
        return Series.monomial(table, order, exps, coeff)

    # -- serialization ------------------------------------------------------------------

    def to_jsonable(self):
        return {
            "name": self.name,
            "dim": self.dim,
            "rays": [list(v) + [1] for v in self.rays],
            "cones": [list(c) for c in self.cones],
            "quotient": [[p if j == axis else 0
                          for j in range(self.base_dim)]
                         for axis, p in enumerate(self.quotient) if p],
            "basepoint": self._basepoint_cone_index(),
        }

    def _basepoint_cone_index(self):
        zero = tuple([0] * self.base_dim)
        base = {self.ray_index(zero)}
        for i in range(self.base_dim):
            base.add(self.ray_index(self._unit(i)))
        for k, c in enumerate(self.cones):
            if set(c) == base:
                return k
        raise FanError("no base-point cone")


def h2_rank(fan: Fan) -> int:
    """Rank of the quotient curve-class group."""
    return fan.rank


# -- builders ------------------------------------------------------------------------


def fan_ad_cover(d: int, window: int | None = None, name=None) -> Fan:
    """Window of the infinite surface chain with a period-d quotient."""
    if d < 1:
        raise FanError("period must be >= 1")
    if window is None:
        window = d + 3
    if window < d + 2:
        raise FanError("window too small for the requested period")
    rays = [(i,) for i in range(-window, window + 1)]
    index = {v: i for i, v in enumerate(rays)}
    cones = [(index[(i,)], index[(i + 1,)]) for i in range(-window, window)]
    return Fan(2, rays, cones, quotient=(d,), name=name or f"Ad({d})")


def fan_ak(k: int, name=None) -> Fan:
    """Finite chain with k interior rays: the resolution of the A_k germ."""
    if k < 1:
        raise FanError("need at least one interior ray")
    rays = [(i,) for i in range(0, k + 2)]
    cones = [(i, i + 1) for i in range(0, k + 1)]
    return Fan(2, rays, cones, name=name or f"Ak({k})")


def fan_xpq_cover(p: int, q: int, window: int | None = None, name=None) -> Fan:
    """Window of the doubly periodic square tiling with fixed diagonals.

    Each unit square [i,i+1]x[j,j+1] splits along the (i+1,j)-(i,j+1)
    diagonal; the quotient translates by (p, 0) and (0, q).
    """
    if p < 1 or q < 1:
        raise FanError("periods must be >= 1")
    if window is None:
        window = max(p, q) + 3
    if window < max(p, q) + 2:
        raise FanError("window too small for the requested periods")
    rays = [(i, j) for i in range(-window, window + 1)
            for j in range(-window, window + 1)]
    index = {v: i for i, v in enumerate(rays)}
    cones = []
    for i in range(-window, window):
        for j in range(-window, window):
            a, b, c, d2 = (i, j), (i + 1, j), (i, j + 1), (i + 1, j + 1)
            cones.append((index[a], index[b], index[c]))
            cones.append((index[b], index[c], index[d2]))
    return Fan(3, rays, cones, quotient=(p, q), name=name or f"Xpq({p},{q})")


def fan_conifold(name="conifold") -> Fan:
    """One square cone split into two triangles: the small resolution germ."""
    rays = [(0, 0), (1, 0), (0, 1), (1, 1)]
    cones = [(0, 1, 2), (1, 2, 3)]
    return Fan(3, rays, cones, name=name)


def _cube_simplices(l: int):
    """Unimodular triangulation of the unit l-cube containing the corner
    simplex conv(0, e_1, ..., e_l), compatible with the cubical tiling.

    For l = 2 this is the anti-diagonal split of the square.  For l = 3 the
    anti-diagonal face constraints force the two corner simplices at 0 and
    (1,1,1); the remaining octahedron is split around its e_3 -- e_1+e_2
    diagonal (one of three equivalent choices, fixed here once and for all).
    """
    if l == 1:
        return [[(0,), (1,)]]
    if l == 2:
        return [[(0, 0), (1, 0), (0, 1)], [(1, 0), (0, 1), (1, 1)]]
    if l == 3:
        e1, e2, e3 = (1, 0, 0), (0, 1, 0), (0, 0, 1)
        e12, e13, e23 = (1, 1, 0), (1, 0, 1), (0, 1, 1)
        e123 = (1, 1, 1)
        zero = (0, 0, 0)
        return [
            [zero, e1, e2, e3],
            [e12, e13, e23, e123],
            [e3, e12, e1, e13],
            [e3, e12, e13, e23],
            [e3, e12, e23, e2],
            [e3, e12, e2, e1],
        ]
    raise FanError("cube triangulations are provided for l <= 3")


def fan_hypercube_cover(periods, window: int | None = None, name=None) -> Fan:
    """Window of the cubical tiling with the staircase triangulation.

    `periods` are the quotient translations d_i along each axis; cells are
    triangulated by the lexicographic staircase, a translation-invariant
    unimodular choice (no canonical one exists, so it is fixed here once).
    """
    periods = tuple(int(d) for d in periods)
    l = len(periods)
    if any(d < 1 for d in periods):
        raise FanError("periods must be >= 1")
    if window is None:
        window = max(periods) + 1
    if window < max(periods) + 1:
        raise FanError("window too small for the requested periods")
    rng = range(-window, window + 1)
    rays = list(itertools.product(rng, repeat=l))
    index = {v: i for i, v in enumerate(rays)}
    simplices = _cube_simplices(l)
    cones = []
    for corner in itertools.product(range(-window, window), repeat=l):
        for verts in simplices:
            cones.append(tuple(index[tuple(c + dv for c, dv in zip(corner, v))]
                               for v in verts))
    return Fan(l + 1, rays, cones, quotient=periods,
               name=name or "X1l(" + ",".join(map(str, periods)) + ")")


def fan_from_json(obj_or_path) -> Fan:
    """Load a fan from the JSON schema used by the CLI."""
    if isinstance(obj_or_path, str):
        with open(obj_or_path) as fh:
            obj = json.load(fh)
    else:
        obj = obj_or_path
    dim = int(obj["dim"])
    rays = []
    for r in obj["rays"]:
        if len(r) != dim or r[-1] != 1:
            raise FanError("rays must be (v, 1) vectors of the fan dimension")
        rays.append(tuple(r[:-1]))
    quotient = [0] * (dim - 1)
    for t in obj.get("quotient", []):
        nz = [(i, x) for i, x in enumerate(t) if x]
        if len(nz) != 1:
            raise FanError(
                "only axis-aligned quotient translations are supported")
        axis, period = nz[0]
        quotient[axis] = abs(int(period))
    return Fan(dim, rays, [tuple(c) for c in obj["cones"]],
               quotient=tuple(quotient), name=obj.get("name", "fan"))


def restrict_to_subfan(f: Series, sub: Fan, full: Fan,
                       table: VarTable | None = None,
                       order=None) -> Series:
    """Rewrite Kaehler monomials of `full` in `sub` coordinates.

    A monomial survives when its class is an integral combination of the
    sub-fan's toric curves (relations among sub curves valid in the ambient
    fan descend, so the rewritten class is well defined); everything else
    maps to zero.  Idempotent by construction.
    """
    sub_curves = [key for key, _ in sub.curves]
    sub_in_full = [full.class_from_pairings(sub.curve_pairing(key))
                   for key in sub_curves]
    dst = table if table is not None else sub.series_table(denom=f.table.denom)
    order = fr(order) if order is not None else f.order
    zset = set(full.z_names())
    kpos = {n: i for i, n in enumerate(full.kahler_names())}
    terms = []
    for k, c in f.terms.items():
        # exponents in full's basis are exactly the class coordinates
        target = [Fraction(0)] * full.rank
        zexps = {}
        for name, e in f.table.exponents(k).items():
            if name in zset:
                zexps[name] = e
            else:
                target[kpos[name]] += e
        sol = _solve_rational(sub_in_full, target)
        if sol is None or any(x.denominator != 1 for x in sol):
            continue
        vec = [Fraction(0)] * len(sub.orbit_keys)
        for x, key in zip(sol, sub_curves):
            if x:
                vec[sub._orbit_of[key]] += x
        exps = sub.class_exponents(sub.class_coords(vec))
        exps.update(zexps)
        kk = dst.key(exps)
        if dst.deg_scaled(kk) <= dst.scale_order(order):
            terms.append((exps, c))
    return Series.from_terms(dst, order, terms)
