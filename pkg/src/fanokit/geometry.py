"""Exact rational convex polytope engine.

Polytopes carry both a vertex and a halfspace description; whichever one the
caller supplies, the other is derived and the two are cross-validated.  All
combinatorics (facet incidence, slicing, triangulation) is exact over Q;
floats never enter this module.

Triangulations fan out from the lexicographically smallest vertex over a
facet decomposition, so the output is deterministic and independent of the
order of the input data.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction

from .errors import DegeneratePolytope, DegenerateSimplex, InputError
from .rational import (
    Vector,
    affine_rank,
    det,
    dot,
    format_rat,
    matrix_rank,
    primitive,
    rat,
    rat_vector,
    smul,
    solve_square,
    vsub,
)


@dataclass(frozen=True)
class AffineForm:
    """y -> <gradient, y> + constant with exact rational coefficients."""

    gradient: Vector
    constant: Fraction

    def __call__(self, point) -> Fraction:
        return dot(self.gradient, point) + self.constant

    @classmethod
    def make(cls, gradient, constant=0) -> "AffineForm":
        return cls(rat_vector(gradient), rat(constant))

    def scaled(self, a) -> "AffineForm":
        a = rat(a)
        return AffineForm(smul(a, self.gradient), a * self.constant)

    def plus(self, other: "AffineForm") -> "AffineForm":
        return AffineForm(
            tuple(a + b for a, b in zip(self.gradient, other.gradient, strict=True)),
            self.constant + other.constant,
        )

    def shifted(self, c) -> "AffineForm":
        return AffineForm(self.gradient, self.constant + rat(c))


def pairing_form(xi, dim: int) -> AffineForm:
    """The linear form y -> <y', xi> pairing the first len(xi) coordinates."""
    xi = rat_vector(xi)
    if len(xi) > dim:
        raise InputError(f"pairing vector of length {len(xi)} in ambient dimension {dim}")
    grad = tuple(xi) + tuple(Fraction(0) for _ in range(dim - len(xi)))
    return AffineForm(grad, Fraction(0))


@dataclass(frozen=True)
class Simplex:
    """n+1 affinely independent points in Q^n."""

    vertices: tuple[Vector, ...]

    def __post_init__(self):
        n = len(self.vertices) - 1
        if n < 1 or any(len(v) != n for v in self.vertices):
            raise DegenerateSimplex(f"need n+1 vertices in Q^n, got {len(self.vertices)}")
        if self.edge_determinant() == 0:
            raise DegenerateSimplex("vertices are affinely dependent")

    @classmethod
    def make(cls, vertices) -> "Simplex":
        return cls(tuple(rat_vector(v) for v in vertices))

    @property
    def dim(self) -> int:
        return len(self.vertices) - 1

    def edge_determinant(self) -> Fraction:
        base = self.vertices[0]
        return det([list(vsub(v, base)) for v in self.vertices[1:]])

    def volume(self) -> Fraction:
        vol = abs(self.edge_determinant())
        for k in range(2, self.dim + 1):
            vol /= k
        return vol

    def centroid(self) -> Vector:
        n1 = len(self.vertices)
        return tuple(sum(v[i] for v in self.vertices) / n1 for i in range(len(self.vertices[0])))


@dataclass(frozen=True)
class Facet:
    """Outward halfspace <normal, y> <= offset together with incident vertex indices."""

    normal: Vector
    offset: Fraction
    incident: tuple[int, ...]


def _lex_min_index(points) -> int:
    return min(range(len(points)), key=lambda i: points[i])


def _hyperplane_normal(points) -> Vector | None:
    """Normal of the hyperplane through n points of Q^n (generalized cross product)."""
    n = len(points[0])
    base = points[0]
    edges = [list(vsub(p, base)) for p in points[1:]]
    normal = []
    for k in range(n):
        minor = [[row[c] for c in range(n) if c != k] for row in edges]
        entry = det(minor) if minor else Fraction(1)
        normal.append(entry if k % 2 == 0 else -entry)
    vec = tuple(normal)
    return None if all(x == 0 for x in vec) else vec


def _facets_from_points(points) -> list[Facet]:
    """All facets of conv(points), assuming the hull is full-dimensional.

    Brute force over n-point subsets; adequate for the small instances this
    library targets (ambient dimension <= 6).
    """
    n = len(points[0])
    if n == 1:
        lo = min(p[0] for p in points)
        hi = max(p[0] for p in points)
        return [
            Facet((Fraction(1),), hi, tuple(i for i, p in enumerate(points) if p[0] == hi)),
            Facet((Fraction(-1),), -lo, tuple(i for i, p in enumerate(points) if p[0] == lo)),
        ]
    seen = {}
    for subset in itertools.combinations(range(len(points)), n):
        normal = _hyperplane_normal([points[i] for i in subset])
        if normal is None:
            continue
        offset = dot(normal, points[subset[0]])
        sides = [dot(normal, p) - offset for p in points]
        if any(s > 0 for s in sides):
            if any(s < 0 for s in sides):
                continue
            normal = tuple(-x for x in normal)
            offset = -offset
            sides = [-s for s in sides]
        key = primitive(normal + (offset,))
        if key not in seen:
            incident = tuple(i for i, s in enumerate(sides) if s == 0)
            seen[key] = Facet(key[:-1], key[-1], incident)
    return sorted(seen.values(), key=lambda f: (f.normal, f.offset))


def _extreme_points(points, facets) -> list[Vector]:
    """Points whose active facet normals have full rank (the true vertices)."""
    n = len(points[0])
    out = []
    for i, p in enumerate(points):
        active = [f.normal for f in facets if i in f.incident]
        if len(active) >= n and matrix_rank(active) == n:
            out.append(p)
    return sorted(set(out))


def _vertices_from_halfspaces(halfspaces, n: int) -> list[Vector]:
    verts = set()
    for subset in itertools.combinations(range(len(halfspaces)), n):
        rows = [list(halfspaces[i][0]) for i in subset]
        rhs = [halfspaces[i][1] for i in subset]
        sol = solve_square(rows, rhs)
        if sol is None:
            continue
        if all(dot(a, sol) <= b for a, b in halfspaces):
            verts.add(sol)
    return sorted(verts)


def _positively_spans(normals, n: int) -> bool:
    """Davis: a finite set positively spans Q^n iff 0 is interior to its hull."""
    if matrix_rank(normals) < n:
        return False
    pts = sorted(set(normals))
    if affine_rank(pts) < n:
        return False
    for f in _facets_from_points(pts):
        if f.offset <= 0:
            return False
    return True


@dataclass(frozen=True)
class RationalPolytope:
    """Bounded convex polytope {y : <normal_i, y> <= offset_i} = conv(vertices)."""

    dim: int
    vertices: tuple[Vector, ...]
    halfspaces: tuple[tuple[Vector, Fraction], ...]
    full_dimensional: bool

    @classmethod
    def from_vertices(cls, vertices) -> "RationalPolytope":
        pts = sorted({rat_vector(v) for v in vertices})
        if not pts:
            raise InputError("empty vertex list")
        n = len(pts[0])
        if any(len(p) != n for p in pts):
            raise InputError("vertices of mixed dimension")
        if affine_rank(pts) < n:
            return cls(n, tuple(pts), (), False)
        facets = _facets_from_points(pts)
        extreme = _extreme_points(pts, facets)
        halfspaces = tuple((f.normal, f.offset) for f in facets)
        return cls(n, tuple(extreme), halfspaces, True)

    @classmethod
    def from_halfspaces(cls, halfspaces, dim: int) -> "RationalPolytope":
        spaces = [(rat_vector(a), rat(b)) for a, b in halfspaces]
        if not spaces or any(len(a) != dim for a, _ in spaces):
            raise InputError("halfspaces missing or of wrong dimension")
        if not _positively_spans([a for a, _ in spaces], dim):
            raise InputError("halfspace intersection is unbounded")
        verts = _vertices_from_halfspaces(spaces, dim)
        if not verts:
            raise InputError("halfspace intersection is empty")
        poly = cls.from_vertices(verts)
        if poly.full_dimensional:
            for a, b in spaces:
                if any(dot(a, v) > b for v in poly.vertices):
                    raise InputError("inconsistent halfspace data")
        return poly

    @classmethod
    def interval(cls, lo, hi) -> "RationalPolytope":
        return cls.from_vertices([[lo], [hi]])

    def __post_init__(self):
        if self.full_dimensional and self.halfspaces:
            # cross-validation: the stated vertices must be exactly the
            # extreme points of the stated halfspace intersection
            recomputed = _vertices_from_halfspaces(list(self.halfspaces), self.dim)
            if sorted(self.vertices) != recomputed:
                raise InputError("vertex and halfspace descriptions disagree")

    def facets(self) -> list[Facet]:
        self._require_full_dim()
        return _facets_from_points(list(self.vertices))

    def _require_full_dim(self):
        if not self.full_dimensional:
            raise DegeneratePolytope(f"polytope is not full-dimensional in Q^{self.dim}")

    def contains(self, point, strict: bool = False) -> bool:
        p = rat_vector(point)
        if strict:
            self._require_full_dim()
            return all(dot(a, p) < b for a, b in self.halfspaces)
        if self.full_dimensional:
            return all(dot(a, p) <= b for a, b in self.halfspaces)
        return affine_rank(list(self.vertices) + [p]) == affine_rank(self.vertices) and _in_hull(
            p, self.vertices
        )

    def project(self, r: int) -> "RationalPolytope":
        """Image under projection to the first r coordinates."""
        if not 1 <= r <= self.dim:
            raise InputError(f"projection rank {r} out of range")
        return RationalPolytope.from_vertices([v[:r] for v in self.vertices])

    def volume(self) -> Fraction:
        if not self.full_dimensional:
            return Fraction(0)
        return sum((s.volume() for s in self.triangulate()), Fraction(0))

    def triangulate(self) -> list[Simplex]:
        self._require_full_dim()
        pieces = _cone_triangulation(list(self.vertices), self.facets())
        return [Simplex(p) for p in pieces]

    def barycenter(self) -> Vector:
        self._require_full_dim()
        total = Fraction(0)
        acc = [Fraction(0)] * self.dim
        for s in self.triangulate():
            v = s.volume()
            c = s.centroid()
            total += v
            for i in range(self.dim):
                acc[i] += v * c[i]
        return tuple(x / total for x in acc)

    def to_json(self) -> dict:
        return {
            "dim": self.dim,
            "vertices": [[format_rat(x) for x in v] for v in self.vertices],
            "halfspaces": [
                {"normal": [format_rat(x) for x in a], "offset": format_rat(b)}
                for a, b in self.halfspaces
            ],
        }


def _in_hull(p, points) -> bool:
    """Membership test for possibly lower-dimensional hulls (small instances)."""
    pts = list(points)
    if len(pts) == 1:
        return p == pts[0]
    # solve sum t_i v_i = p, sum t_i = 1, t_i >= 0 by brute force over bases
    d = affine_rank(pts)
    for subset in itertools.combinations(pts, d + 1):
        rows = [[v[i] for v in subset] for i in range(len(p))] + [[Fraction(1)] * len(subset)]
        rhs = list(p) + [Fraction(1)]
        sq = len(subset)
        if len(rows) < sq:
            continue
        for rsel in itertools.combinations(range(len(rows)), sq):
            sol = solve_square([rows[i] for i in rsel], [rhs[i] for i in rsel])
            if sol is None:
                continue
            if all(t >= 0 for t in sol):
                combo = [sum(sol[j] * subset[j][i] for j in range(sq)) for i in range(len(p))]
                if tuple(combo) == p and sum(sol) == 1:
                    return True
    return False


def polytope_from_json(doc: dict) -> RationalPolytope:
    if not isinstance(doc, dict):
        raise InputError("polytope document must be an object")
    dim = doc.get("dim")
    verts = doc.get("vertices")
    spaces = doc.get("halfspaces")
    if verts:
        poly = RationalPolytope.from_vertices(verts)
        if dim is not None and poly.dim != int(dim):
            raise InputError(f"polytope dim field {dim} != vertex dimension {poly.dim}")
        if spaces:
            given = {
                (primitive(rat_vector(h["normal"]) + (rat(h["offset"]),))) for h in spaces
            }
            for key in given:
                a, b = key[:-1], key[-1]
                if any(dot(a, v) > b for v in poly.vertices):
                    raise InputError("halfspace in document cuts off a listed vertex")
        return poly
    if spaces:
        if dim is None:
            raise InputError("halfspace-only polytope document needs a dim field")
        return RationalPolytope.from_halfspaces(
            [(h["normal"], h["offset"]) for h in spaces], int(dim)
        )
    raise InputError("polytope document needs vertices or halfspaces")


# ---------------------------------------------------------------------------
# triangulation internals


def _drop_axis(normal) -> int:
    return next(k for k, x in enumerate(normal) if x != 0)


def _cone_triangulation(points, facets) -> list[tuple[Vector, ...]]:
    """Fan from the lex-min point over all facets not containing it.

    ``facets`` must be the complete facet list of conv(points); each returned
    tuple is a full-dimensional simplex (n+1 points).
    """
    apex_idx = _lex_min_index(points)
    apex = points[apex_idx]
    pieces = []
    for f in facets:
        if apex_idx in f.incident:
            continue
        sub = _triangulate_facet([points[i] for i in f.incident], f.normal)
        pieces.extend((apex,) + simplex for simplex in sub)
    return pieces


def _triangulate_facet(facet_points, normal) -> list[tuple[Vector, ...]]:
    """Triangulate an (n-1)-dimensional face embedded in Q^n.

    The face is projected along a coordinate axis transverse to its hyperplane
    (an affine bijection on the face), triangulated in Q^{n-1}, and lifted.
    """
    n = len(facet_points[0])
    if n == 1:
        return [(facet_points[0],)]
    k = _drop_axis(normal)
    proj = {}
    for p in facet_points:
        q = p[:k] + p[k + 1 :]
        proj[q] = p
    flat = sorted(proj)
    if len(flat) == n:  # the face is itself a simplex
        return [tuple(proj[q] for q in flat)]
    facets = _facets_from_points(flat)
    pieces = _cone_triangulation(flat, facets)
    return [tuple(proj[q] for q in piece) for piece in pieces]


# ---------------------------------------------------------------------------
# public operations


def triangulate(p: RationalPolytope) -> list[Simplex]:
    """Disjoint-interior simplices whose union is p; volumes add up exactly."""
    return p.triangulate()


def volume(p: RationalPolytope) -> Fraction:
    """Exact Lebesgue volume; 0 for lower-dimensional input."""
    return p.volume()


def barycenter(p: RationalPolytope) -> Vector:
    return p.barycenter()


def halfspace_slice(s: Simplex, h: AffineForm, level) -> list[Simplex]:
    """Triangulation of s ∩ {y : h(y) >= level}; [] if that region is lower-dimensional.

    The slice's facet hyperplanes are known a priori (the n+1 facets of s and
    the cut plane), so no facet search is needed at the top level.
    """
    level = rat(level)
    n = s.dim
    vals = [h(v) for v in s.vertices]
    if min(vals) >= level:
        return [s]
    if max(vals) <= level:
        return []

    points = {v for v, val in zip(s.vertices, vals) if val >= level}
    for (i, u), (j, w) in itertools.combinations(enumerate(s.vertices), 2):
        a, b = vals[i], vals[j]
        if (a > level > b) or (b > level > a):
            t = (a - level) / (a - b)
            points.add(tuple(ux + t * (wx - ux) for ux, wx in zip(u, w)))
    pts = sorted(points)
    if affine_rank(pts) < n:
        return []

    candidates = []
    for iv in range(n + 1):  # facets of s, outward-oriented
        others = [v for k, v in enumerate(s.vertices) if k != iv]
        normal = _hyperplane_normal(others)
        offset = dot(normal, others[0])
        if dot(normal, s.vertices[iv]) > offset:
            normal, offset = tuple(-x for x in normal), -offset
        candidates.append((normal, offset))
    candidates.append((tuple(-g for g in h.gradient), h.constant - level))  # cut plane

    facets = []
    for normal, offset in candidates:
        incident = tuple(i for i, p in enumerate(pts) if dot(normal, p) == offset)
        if len(incident) >= n and affine_rank([pts[i] for i in incident]) == n - 1:
            key = primitive(normal + (offset,))
            facets.append(Facet(key[:-1], key[-1], incident))
    facets = sorted({f.normal + (f.offset,): f for f in facets}.values(),
                    key=lambda f: (f.normal, f.offset))
    return [Simplex(piece) for piece in _cone_triangulation(pts, facets)]


def origin_in_interior(points) -> bool:
    """Exact test that 0 lies strictly inside conv(points)."""
    pts = sorted({rat_vector(p) for p in points})
    n = len(pts[0]) if pts else 0
    if not pts or affine_rank(pts) < n:
        return False
    return all(f.offset > 0 for f in _facets_from_points(pts))
