"""Finite reflection groups of type A and products of A factors.

Everything is realized concretely in Euclidean coordinates: simple roots
come from a Cholesky factorization of the type-A Gram matrix, the group
is generated by reflection matrices, and the closed fundamental chamber
is the cone spanned by the dual (coweight) basis.  Slopes are unit
directions in that closed chamber.
"""

from dataclasses import dataclass

import numpy as np

from .geometry import (
    DECISION_TOL,
    DEDUP_TOL,
    angle_between,
    dedup_rows,
    spherical_distance_to_cone,
    unit,
)

_FACTORIALS = [1, 1, 2, 6, 24, 120, 720]


class UnsupportedRootSystem(ValueError):
    pass


def _gram_a(n):
    g = 2.0 * np.eye(n)
    for i in range(n - 1):
        g[i, i + 1] = g[i + 1, i] = -1.0
    return g


def _simple_roots_a(n):
    # rows are the simple roots, realized in E^n via the Gram factorization
    return np.linalg.cholesky(_gram_a(n))


def _reflection(normal):
    n = unit(normal)
    return np.eye(len(n)) - 2.0 * np.outer(n, n)


@dataclass(frozen=True)
class Slope:
    """Unit direction in the closed fundamental chamber.

    ``chamber_certificate`` stores the minimal inner product with the
    simple roots; validity requires it to be >= -1e-9.
    """

    direction: np.ndarray
    chamber_certificate: float

    def __post_init__(self):
        object.__setattr__(self, "direction", np.asarray(self.direction, dtype=float))
        if abs(np.linalg.norm(self.direction) - 1.0) > 1e-7:
            raise ValueError("slope direction must be a unit vector")
        if self.chamber_certificate < -DECISION_TOL:
            raise ValueError(
                "direction lies outside the closed fundamental chamber "
                f"(certificate {self.chamber_certificate:.3e})"
            )


class RootSystem:
    """Type-A root system or an orthogonal product of A factors."""

    def __init__(self, family, rank, factors, simple_roots):
        self.family = family
        self.rank = rank
        self.factors = list(factors)
        self.simple_roots = np.asarray(simple_roots, dtype=float)
        self._validate_cartan()
        self.reflection_normals = self._reflection_closure()
        self.weyl_elements = self._generate_group()
        # coweights[i] satisfies <coweights[i], simple_roots[j]> = delta_ij
        self.coweights = np.linalg.inv(self.simple_roots).T
        expected = _expected_order(self.factors)
        if len(self.weyl_elements) != expected:
            raise AssertionError(
                f"group order {len(self.weyl_elements)} != expected {expected}"
            )

    # -- construction ---------------------------------------------------

    def _validate_cartan(self):
        r = self.rank
        roots = self.simple_roots
        if np.linalg.matrix_rank(roots) != r:
            raise UnsupportedRootSystem("simple roots must be linearly independent")
        gram = roots @ roots.T
        expected = np.zeros((r, r))
        pos = 0
        for f in self.factors:
            block = _gram_a(f)
            expected[pos : pos + f, pos : pos + f] = block
            pos += f
        if not np.allclose(gram, expected, atol=1e-9):
            raise UnsupportedRootSystem("Cartan data does not match the declared family")

    def _reflection_closure(self):
        normals = [unit(r) for r in self.simple_roots]
        frontier = list(normals)
        while frontier:
            nxt = []
            for n in frontier:
                refl = _reflection(n)
                for m in normals:
                    img = refl @ m
                    if img[np.argmax(np.abs(img))] < 0:
                        img = -img  # hyperplane normal, sign-canonical
                    if not any(np.linalg.norm(img - q) <= 1e-9 for q in normals):
                        normals.append(img)
                        nxt.append(img)
            frontier = nxt
        return dedup_rows(normals, tol=DEDUP_TOL * 10)

    def _generate_group(self):
        gens = [_reflection(r) for r in self.simple_roots]
        seen = {}
        frontier = [np.eye(self.rank)]

        def _key(m):
            return (np.round(m, 10) + 0.0).tobytes()  # +0.0 kills -0.0

        seen[_key(frontier[0])] = frontier[0]
        while frontier:
            nxt = []
            for w in frontier:
                for g in gens:
                    wg = g @ w
                    k = _key(wg)
                    if k not in seen:
                        seen[k] = wg
                        nxt.append(wg)
            frontier = nxt
        elems = list(seen.values())
        elems.sort(key=lambda m: tuple(np.round(m, 10).ravel()))
        return elems

    # -- basic queries ---------------------------------------------------

    @property
    def order(self):
        return len(self.weyl_elements)

    @property
    def chamber_count(self):
        return len(self.weyl_elements)

    def chamber_certificate(self, v):
        return float(np.min(self.simple_roots @ np.asarray(v, dtype=float)))

    def in_chamber(self, v, tol=DECISION_TOL):
        return self.chamber_certificate(v) >= -tol

    def slope(self, v):
        v = unit(v)
        return Slope(v, self.chamber_certificate(v))

    def to_descriptor(self):
        if self.family == "A":
            return {"family": "A", "rank": self.rank}
        return {"family": "product", "factors": list(self.factors)}


def _expected_order(factors):
    out = 1
    for f in factors:
        out *= _FACTORIALS[f + 1]
    return out


def build_root_system(family, rank=None, factors=None):
    """Construct a validated root system.

    ``family`` is "A" (irreducible, rank >= 2) or "product" with a list
    of A-factor ranks (each >= 1), e.g. factors=[1, 1] for A1 x A1.
    """
    if family == "A":
        if rank is None or rank < 2:
            raise UnsupportedRootSystem("A-type requires rank >= 2")
        if rank + 1 >= len(_FACTORIALS):
            raise UnsupportedRootSystem(f"A_{rank} beyond supported range (rank <= 4)")
        return RootSystem("A", rank, [rank], _simple_roots_a(rank))
    if family == "product":
        if not factors:
            raise UnsupportedRootSystem("product family requires a factor list")
        if any(f < 1 for f in factors):
            raise UnsupportedRootSystem("factor ranks must be >= 1")
        if len(factors) < 2:
            raise UnsupportedRootSystem("a product needs at least two factors")
        total = sum(factors)
        if total >= len(_FACTORIALS) - 1:
            raise UnsupportedRootSystem("total rank beyond supported range")
        roots = np.zeros((total, total))
        pos = 0
        for f in factors:
            roots[pos : pos + f, pos : pos + f] = _simple_roots_a(f)
            pos += f
        return RootSystem("product", total, factors, roots)
    raise UnsupportedRootSystem(f"unsupported family {family!r}")


def root_system_from_descriptor(desc):
    if desc.get("family") == "A":
        return build_root_system("A", rank=int(desc["rank"]))
    if desc.get("family") == "product":
        return build_root_system("product", factors=[int(f) for f in desc["factors"]])
    raise UnsupportedRootSystem(f"bad descriptor {desc!r}")


# -- orbits and slopes -----------------------------------------------------


def weyl_orbit(rs, v):
    """Orbit of a unit vector under the group, in canonical (sorted) order."""
    v = unit(v)
    pts = [w @ v for w in rs.weyl_elements]
    orbit = dedup_rows(pts, tol=1e-9)
    orbit.sort(key=lambda p: tuple(np.round(p, 9)))
    return orbit


def orbit_index(orbit, v, tol=1e-7):
    for i, p in enumerate(orbit):
        if np.linalg.norm(p - np.asarray(v, dtype=float)) <= tol:
            return i
    raise ValueError("vector is not in the orbit")


def project_to_chamber(rs, v):
    """The unique orbit representative in the closed fundamental chamber."""
    x = unit(v)
    for _ in range(20 * rs.order):
        prods = rs.simple_roots @ x
        i = int(np.argmin(prods))
        if prods[i] >= -DECISION_TOL:
            return Slope(unit(x), float(prods[i]))
        x = _reflection(rs.simple_roots[i]) @ x
    raise RuntimeError("chamber projection did not terminate")


def opposition_image(rs, theta):
    """Image of a slope under the opposition involution (chamber rep of -u)."""
    return project_to_chamber(rs, -theta.direction)


def ort_distance(rs, theta, beta):
    """min over the group of |pi/2 - angle(u_beta, w u_theta)|.

    Zero exactly when beta lies in the set of orthogonals of theta.
    """
    ub = unit(beta.direction)
    best = np.inf
    for w in rs.weyl_elements:
        a = angle_between(ub, w @ theta.direction)
        best = min(best, abs(np.pi / 2 - a))
    return float(best)


# -- wall distances and the gap around pi/2 --------------------------------


def _chamber_faces(rs):
    """Proper faces of the fundamental chamber as coweight generator lists."""
    r = rs.rank
    faces = []
    for mask in range(1, 2**r - 1):
        gens = [rs.coweights[j] for j in range(r) if not (mask >> j) & 1]
        faces.append(gens)
    return faces


def wall_distances(rs, theta):
    """The finite set D(theta): distances from orbit points to all walls."""
    faces = _chamber_faces(rs)
    raw = []
    for p in weyl_orbit(rs, theta.direction):
        for gens in faces:
            raw.append(spherical_distance_to_cone(p, gens))
    raw.sort()
    dists = []
    for d in raw:
        if not dists or d - dists[-1] > DECISION_TOL:
            dists.append(d)
    return dists


@dataclass(frozen=True)
class OrtProfile:
    """Wall-gap data for a slope: the gaps below and above pi/2."""

    theta: Slope
    distances: tuple
    delta0: float
    delta0_prime: float
    degenerate: bool


def delta_zero(rs, theta):
    """Gaps of D(theta) around pi/2.

    delta0 = pi/2 - max{d in D : 0 < d < pi/2}, delta0' symmetric above.
    Degenerate (factor-parallel slope) when no element lies strictly
    between 0 and pi/2.
    """
    dists = wall_distances(rs, theta)
    below = [d for d in dists if DECISION_TOL < d < np.pi / 2 - DECISION_TOL]
    above = [d for d in dists if d > np.pi / 2 + DECISION_TOL]
    if not below:
        return OrtProfile(theta, tuple(dists), float("nan"), float("nan"), True)
    d0 = np.pi / 2 - max(below)
    d0p = (min(above) - np.pi / 2) if above else np.pi / 2
    return OrtProfile(theta, tuple(dists), float(d0), float(d0p), False)


def wall_margin(rs, beta):
    """Spherical distance from a slope to the chamber boundary."""
    r = rs.rank
    best = np.inf
    for i in range(r):
        gens = [rs.coweights[j] for j in range(r) if j != i]
        best = min(best, spherical_distance_to_cone(beta.direction, gens))
    return float(best)


# -- good slopes ------------------------------------------------------------


@dataclass
class SlopeSearchResult:
    found: bool
    slope: Slope = None
    margin: float = 0.0
    resolution: int = 0

    def __bool__(self):
        return self.found


def find_good_slope(rs, theta, delta1, grid=9, refine_rounds=3):
    """Search the chamber for beta with both margins above delta1.

    Margins: distance to the orthogonal set of theta, and distance to the
    chamber boundary (the regular-slope condition).  Grid over coweight
    coefficients plus local refinement; an explicit not-found result
    reports the resolution searched.
    """
    if delta1 <= 0:
        raise ValueError("delta1 must be positive")

    def margin_of(direction):
        beta = rs.slope(direction)
        return min(ort_distance(rs, theta, beta), wall_margin(rs, beta)), beta

    best_m, best_beta = -np.inf, None
    for coef in _simplex_grid(rs.rank, grid):
        direction = coef @ rs.coweights
        n = np.linalg.norm(direction)
        if n < DEDUP_TOL:
            continue
        m, beta = margin_of(direction / n)
        if m > best_m:
            best_m, best_beta = m, beta
    center = best_beta.direction
    step = 1.0 / grid
    for _ in range(refine_rounds):
        step *= 0.5
        for coef in _simplex_grid(rs.rank, 4):
            direction = center + step * ((coef - coef.mean()) @ rs.coweights)
            n = np.linalg.norm(direction)
            if n < DEDUP_TOL or not rs.in_chamber(direction / n, tol=0.0):
                continue
            m, beta = margin_of(direction / n)
            if m > best_m:
                best_m, best_beta = m, beta
                center = beta.direction
    if best_m > delta1:
        return SlopeSearchResult(True, best_beta, float(best_m), grid)
    return SlopeSearchResult(False, None, float(best_m), grid)


def _simplex_grid(dim, n):
    """Barycentric grid points with coordinates summing to 1."""
    out = []

    def rec(prefix, remaining, slots):
        if slots == 1:
            out.append(prefix + [remaining])
            return
        for k in range(remaining + 1):
            rec(prefix + [k], remaining - k, slots - 1)

    rec([], n, dim)
    return [np.array(c, dtype=float) / n for c in out]


# -- factor decomposition ----------------------------------------------------


def factor_split(rs, theta):
    """Irreducible factors (by diagram connectivity) and theta's components.

    Returns a list of dicts with the simple-root indices of the factor,
    the component of theta in the factor's span, and its norm; plus a
    flag marking theta parallel to some factor.
    """
    r = rs.rank
    adj = [[False] * r for _ in range(r)]
    for i in range(r):
        for j in range(r):
            if i != j and abs(np.dot(rs.simple_roots[i], rs.simple_roots[j])) > DECISION_TOL:
                adj[i][j] = True
    comps = []
    seen = set()
    for i in range(r):
        if i in seen:
            continue
        stack, comp = [i], []
        while stack:
            k = stack.pop()
            if k in seen:
                continue
            seen.add(k)
            comp.append(k)
            stack.extend(j for j in range(r) if adj[k][j] and j not in seen)
        comps.append(sorted(comp))
    comps.sort()
    out = []
    for comp in comps:
        sub = rs.simple_roots[comp]
        q, _ = np.linalg.qr(sub.T)
        component = q @ (q.T @ theta.direction)
        out.append(
            {
                "roots": comp,
                "component": component,
                "norm": float(np.linalg.norm(component)),
            }
        )
    parallel_to = None
    if len(out) > 1:
        for i, fac in enumerate(out):
            others = np.sqrt(
                sum(f["norm"] ** 2 for j, f in enumerate(out) if j != i)
            )
            if others <= DECISION_TOL:
                parallel_to = i
    return {"factors": out, "parallel_to_factor": parallel_to}


# -- skew hyperplanes --------------------------------------------------------


def skew_hyperplane(rs, chamber, phi_basis):
    """A hyperplane supporting the chamber, skew to the span Phi.

    ``chamber`` indexes ``rs.weyl_elements``; Phi is given by spanning
    vectors.  Skew means the hyperplane neither contains / is parallel
    to Phi (normal orthogonal to Phi) nor is orthogonal to Phi (normal
    inside Phi).  Returns the unit normal, or None when every supporting
    hyperplane fails (possible only for factor-parallel data).
    """
    w = rs.weyl_elements[chamber]
    basis = np.asarray(phi_basis, dtype=float)
    q, _ = np.linalg.qr(basis.T)
    for root in rs.simple_roots:
        n = unit(w @ root)
        proj = np.linalg.norm(q.T @ n)
        if proj > DECISION_TOL and proj < 1.0 - DECISION_TOL:
            return n
    return None
