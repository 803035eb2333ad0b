"""Planar domains with the singular point 0 on the boundary, and their meshes.

Every built-in mesh is polar-structured around the origin: a fan of
triangles at 0 followed by rings whose radii shrink geometrically
(``r_k = R q^k``), so that in log-polar coordinates the elements have
bounded aspect ratio all the way down to the singularity.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .errors import GradingTooAggressive, InvalidDomain, InvariantViolation

KINDS = ("Sector", "HalfDisk", "AnnularSector", "Polygon")
POSITION_TOL = 1e-12
MIN_RADIUS_RATIO = 1e-14
# chord angle on circular arcs; the inscribed area defect is about angle**2 / 6
MAX_CHORD_ANGLE = 0.0775


@dataclass(frozen=True)
class DomainSpec:
    """Parametric domain.

    Sectors (and the half-disk) span the polar angles ``[0, aperture]``;
    the half-disk is the upper half of the disk of the given radius.
    """

    kind: str
    aperture: Optional[float] = None
    radius: Optional[float] = None
    inner_radius: Optional[float] = None
    outer_radius: Optional[float] = None
    vertices: Optional[tuple] = None

    def __post_init__(self):
        if self.vertices is not None:
            verts = tuple((float(x), float(y)) for x, y in self.vertices)
            object.__setattr__(self, "vertices", verts)
        self.validate()

    # constructors -------------------------------------------------------
    @classmethod
    def sector(cls, aperture, radius=1.0):
        return cls("Sector", aperture=float(aperture), radius=float(radius))

    @classmethod
    def half_disk(cls, radius=1.0):
        return cls("HalfDisk", radius=float(radius))

    @classmethod
    def annular_sector(cls, aperture, inner_radius, outer_radius):
        return cls(
            "AnnularSector",
            aperture=float(aperture),
            inner_radius=float(inner_radius),
            outer_radius=float(outer_radius),
        )

    @classmethod
    def polygon(cls, vertices):
        return cls("Polygon", vertices=tuple(map(tuple, vertices)))

    @classmethod
    def from_dict(cls, data):
        data = dict(data)
        kind = data.pop("kind", None)
        if kind not in KINDS:
            raise InvalidDomain(f"unknown domain kind {kind!r}")
        allowed = {
            "Sector": {"aperture", "radius"},
            "HalfDisk": {"radius"},
            "AnnularSector": {"aperture", "inner_radius", "outer_radius"},
            "Polygon": {"vertices"},
        }[kind]
        data.pop("origin_on_boundary", None)
        extra = set(data) - allowed
        if extra:
            raise InvalidDomain(f"unexpected fields for {kind}: {sorted(extra)}")
        missing = allowed - set(data)
        if kind == "HalfDisk" and missing == {"radius"}:
            data["radius"] = 1.0
        elif missing:
            raise InvalidDomain(f"missing fields for {kind}: {sorted(missing)}")
        try:
            if kind == "Polygon":
                return cls(kind, vertices=tuple(tuple(v) for v in data["vertices"]))
            return cls(kind, **{k: float(v) for k, v in data.items()})
        except (TypeError, ValueError) as exc:
            raise InvalidDomain(str(exc)) from exc

    def to_dict(self):
        out = {"kind": self.kind}
        for key in ("aperture", "radius", "inner_radius", "outer_radius"):
            value = getattr(self, key)
            if value is not None:
                out[key] = value
        if self.vertices is not None:
            out["vertices"] = [list(v) for v in self.vertices]
        out["origin_on_boundary"] = self.origin_on_boundary
        return out

    # validation -----------------------------------------------------------
    def validate(self):
        if self.kind not in KINDS:
            raise InvalidDomain(f"unknown domain kind {self.kind!r}")
        if self.kind in ("Sector", "AnnularSector"):
            if self.aperture is None or not 0 < self.aperture <= 2 * math.pi + 1e-15:
                raise InvalidDomain("aperture must lie in (0, 2*pi]")
        if self.kind in ("Sector", "HalfDisk"):
            if self.radius is None or not self.radius > 0 or not math.isfinite(self.radius):
                raise InvalidDomain("radius must be positive")
        if self.kind == "AnnularSector":
            a, b = self.inner_radius, self.outer_radius
            if a is None or b is None or not (0 < a < b) or not math.isfinite(b):
                raise InvalidDomain("need 0 < inner_radius < outer_radius")
        if self.kind == "Polygon":
            _polygon_geometry(self.vertices)

    # geometry ---------------------------------------------------------------
    @property
    def origin_on_boundary(self):
        # an annular sector keeps 0 outside its closure
        return self.kind != "AnnularSector"

    @property
    def scale(self):
        if self.kind in ("Sector", "HalfDisk"):
            return self.radius
        if self.kind == "AnnularSector":
            return self.outer_radius
        return float(max(math.hypot(x, y) for x, y in self.vertices))

    @property
    def opening(self):
        """Polar angle range ``(start, aperture)`` for the fan-type kinds."""
        if self.kind == "Sector":
            return 0.0, self.aperture
        if self.kind == "HalfDisk":
            return 0.0, math.pi
        if self.kind == "AnnularSector":
            return 0.0, self.aperture
        geo = _polygon_geometry(self.vertices)
        return geo["start"], geo["angle"]

    @property
    def arc_radii(self):
        if self.kind in ("Sector", "HalfDisk"):
            return (self.radius,)
        if self.kind == "AnnularSector":
            return (self.inner_radius, self.outer_radius)
        return ()

    def area(self):
        if self.kind == "Sector":
            return 0.5 * self.aperture * self.radius**2
        if self.kind == "HalfDisk":
            return 0.5 * math.pi * self.radius**2
        if self.kind == "AnnularSector":
            return 0.5 * self.aperture * (self.outer_radius**2 - self.inner_radius**2)
        v = np.asarray(self.vertices)
        return abs(_shoelace(v))

    def scaled(self, s):
        """Dilation of the domain by ``s > 0`` about the origin."""
        if self.kind == "Polygon":
            return DomainSpec.polygon([(s * x, s * y) for x, y in self.vertices])
        kw = {
            k: (getattr(self, k) * s if k != "aperture" else getattr(self, k))
            for k in ("aperture", "radius", "inner_radius", "outer_radius")
            if getattr(self, k) is not None
        }
        return DomainSpec(self.kind, **kw)

    def contained_in_half_plane(self):
        start, span = self.opening
        if self.kind == "Polygon":
            ang = [math.atan2(y, x) for x, y in self.vertices if math.hypot(x, y) > 0]
            return _angular_span(ang) <= math.pi + 1e-12
        return span <= math.pi + 1e-12

    @property
    def regularity(self):
        """Description of the boundary near 0; the user judges which results apply."""
        if self.kind == "AnnularSector":
            return "origin outside closure"
        _, span = self.opening
        if abs(span - math.pi) <= 1e-12:
            return "flat at 0 (C2 boundary point)"
        return f"corner at 0 (opening {span:.12g} rad)"

    def boundary_distance(self, points):
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        if self.kind == "Polygon":
            geo = _polygon_geometry(self.vertices)
            v = geo["vertices"]
            d = np.full(len(pts), np.inf)
            for i in range(len(v)):
                d = np.minimum(d, _segment_distance(pts, v[i], v[(i + 1) % len(v)]))
            return d
        start, span = self.opening
        r = np.hypot(pts[:, 0], pts[:, 1])
        if self.kind == "AnnularSector":
            lo, hi = self.inner_radius, self.outer_radius
        else:
            lo, hi = 0.0, self.radius
        theta = np.mod(np.arctan2(pts[:, 1], pts[:, 0]) - start, 2 * math.pi)
        inside = (theta <= span) | np.isclose(theta, 2 * math.pi, atol=1e-15)
        d = np.full(len(pts), np.inf)
        for rho in self.arc_radii:
            d_arc = np.where(inside, np.abs(r - rho), np.inf)
            d = np.minimum(d, d_arc)
        for ang in (start, start + span):
            a = lo * np.array([math.cos(ang), math.sin(ang)])
            b = hi * np.array([math.cos(ang), math.sin(ang)])
            d = np.minimum(d, _segment_distance(pts, a, b))
        for rho in self.arc_radii:
            for ang in (start, start + span):
                p = rho * np.array([math.cos(ang), math.sin(ang)])
                d = np.minimum(d, np.hypot(pts[:, 0] - p[0], pts[:, 1] - p[1]))
        return d


def diameter(domain: DomainSpec) -> float:
    """Exact diameter for the built-in kinds, max vertex distance for polygons."""
    if domain.kind == "HalfDisk":
        return 2.0 * domain.radius
    if domain.kind == "Sector":
        t, R = domain.aperture, domain.radius
        if t >= math.pi:
            return 2.0 * R
        return max(R, 2.0 * R * math.sin(t / 2))
    if domain.kind == "AnnularSector":
        t, a, b = domain.aperture, domain.inner_radius, domain.outer_radius
        if t >= math.pi:
            return 2.0 * b
        return max(
            b - a,
            2.0 * b * math.sin(t / 2),
            math.sqrt(a * a + b * b - 2 * a * b * math.cos(t)),
        )
    v = np.asarray(domain.vertices)
    diff = v[:, None, :] - v[None, :, :]
    return float(np.sqrt((diff**2).sum(-1)).max())


# ---------------------------------------------------------------------------
# meshes
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Grading:
    q: float = 0.5
    layers: Optional[int] = None


@dataclass(frozen=True, eq=False)
class Mesh:
    vertices: np.ndarray
    triangles: np.ndarray
    boundary: np.ndarray
    origin_vertex: Optional[int] = None
    grading: Grading = field(default_factory=Grading)
    domain: Optional[DomainSpec] = None

    def __post_init__(self):
        v = np.array(self.vertices, dtype=float).reshape(-1, 2)
        t = np.array(self.triangles, dtype=np.int64).reshape(-1, 3)
        b = np.array(self.boundary, dtype=bool).reshape(-1)
        for arr in (v, t, b):
            arr.setflags(write=False)
        object.__setattr__(self, "vertices", v)
        object.__setattr__(self, "triangles", t)
        object.__setattr__(self, "boundary", b)

    @property
    def n_vertices(self):
        return len(self.vertices)

    @property
    def n_triangles(self):
        return len(self.triangles)

    def signed_areas(self):
        p = self.vertices[self.triangles]
        e1 = p[:, 1] - p[:, 0]
        e2 = p[:, 2] - p[:, 0]
        return 0.5 * (e1[:, 0] * e2[:, 1] - e1[:, 1] * e2[:, 0])

    def total_area(self):
        return float(self.signed_areas().sum())

    def edges(self):
        """Unique edges (sorted pairs, lexicographic order) and per-triangle edge ids."""
        t = self.triangles
        pairs = np.concatenate([t[:, [0, 1]], t[:, [1, 2]], t[:, [2, 0]]])
        pairs.sort(axis=1)
        edges, inverse = np.unique(pairs, axis=0, return_inverse=True)
        inverse = inverse.reshape(-1)
        tri_edges = inverse.reshape(3, -1).T  # columns: (01, 12, 20)
        return edges, tri_edges

    def element_diameters(self):
        p = self.vertices[self.triangles]
        lengths = [np.linalg.norm(p[:, i] - p[:, j], axis=1) for i, j in ((0, 1), (1, 2), (2, 0))]
        return np.max(lengths, axis=0)

    def radii(self):
        return np.hypot(self.vertices[:, 0], self.vertices[:, 1])

    def interior(self):
        return np.flatnonzero(~self.boundary)

    def dilated(self, s):
        return Mesh(
            self.vertices * s,
            self.triangles,
            self.boundary,
            self.origin_vertex,
            self.grading,
            self.domain.scaled(s) if self.domain is not None else None,
        )


def validate_mesh(mesh: Mesh, check_domain=True):
    """Raise :class:`InvariantViolation` unless every mesh invariant holds."""
    nv = mesh.n_vertices
    t = mesh.triangles
    if len(mesh.boundary) != nv:
        raise InvariantViolation("boundary flag count differs from vertex count")
    if t.size and (t.min() < 0 or t.max() >= nv):
        raise InvariantViolation("triangle references a missing vertex")
    if np.any((t[:, 0] == t[:, 1]) | (t[:, 1] == t[:, 2]) | (t[:, 0] == t[:, 2])):
        raise InvariantViolation("triangle with repeated vertex")
    areas = mesh.signed_areas()
    if np.any(areas <= 0):
        bad = int(np.flatnonzero(areas <= 0)[0])
        raise InvariantViolation(f"triangle {bad} has non-positive signed area")
    edges, tri_edges = mesh.edges()
    counts = np.bincount(tri_edges.reshape(-1), minlength=len(edges))
    if np.any(counts > 2):
        raise InvariantViolation("edge shared by more than two triangles")
    outer = edges[counts == 1]
    if outer.size and not mesh.boundary[outer].all():
        raise InvariantViolation("vertex on the mesh boundary is not flagged Dirichlet")
    if mesh.origin_vertex is not None:
        o = mesh.origin_vertex
        if not 0 <= o < nv or np.hypot(*mesh.vertices[o]) > 0:
            raise InvariantViolation("origin_vertex does not sit at 0")
        if not mesh.boundary[o]:
            raise InvariantViolation("origin vertex must be Dirichlet")
    if check_domain and mesh.domain is not None:
        tol = POSITION_TOL * mesh.domain.scale
        near = mesh.domain.boundary_distance(mesh.vertices) <= tol
        if not np.array_equal(near, mesh.boundary):
            raise InvariantViolation("Dirichlet flags differ from the vertices on the boundary")
    return mesh


def default_layers(domain: DomainSpec, target_h, q):
    """Smallest layer count whose innermost radius is at most ``h^2 / R``."""
    R = domain.scale
    ratio = min((target_h / R) ** 2, 0.5)
    return max(1, math.ceil(math.log(ratio) / math.log(q) - 1e-12))


def generate_mesh(domain: DomainSpec, target_h: float, grading: Grading | dict | None = None) -> Mesh:
    """Graded conforming triangulation of ``domain``.

    For sectors and the half-disk the ring radii are ``R q^k`` for
    ``k <= layers``, each gap further split so that no element is wider
    than ``target_h``.  Annular sectors are log-graded: ``target_h`` is then
    the step in ``(log r, theta)``.
    """
    if not target_h > 0:
        raise InvalidDomain("target_h must be positive")
    domain.validate()
    if grading is None:
        grading = Grading()
    elif isinstance(grading, dict):
        grading = Grading(**grading)
    q = grading.q
    if not 0 < q < 1:
        raise InvalidDomain("grading ratio q must lie in (0, 1)")
    layers = grading.layers
    if layers is None:
        layers = default_layers(domain, target_h, q)
    if layers < 0:
        raise InvalidDomain("layers must be non-negative")
    if layers and q**layers < MIN_RADIUS_RATIO:
        raise GradingTooAggressive(
            f"innermost radius R*q^layers = {q ** layers:.3g} R is below {MIN_RADIUS_RATIO:g} R"
        )

    if domain.kind in ("Sector", "HalfDisk"):
        start, span = domain.opening
        v, t, b = _fan_mesh(domain.radius, start, span, target_h, q, layers)
        mesh = Mesh(v, t, b, 0, Grading(q, layers), domain)
    elif domain.kind == "AnnularSector":
        mesh = _annular_mesh(domain, target_h)
    else:
        mesh = _polygon_mesh(domain, target_h, q, layers)
    return validate_mesh(mesh)


def _ring_radii(R, q, layers, hr):
    """Ascending ring radii; the origin itself is not included."""
    radii = [R]
    r_out = R
    for _ in range(layers):
        r_in = r_out * q
        m = max(1, math.ceil((r_out - r_in) / hr - 1e-9))
        radii.extend(r_out - j * (r_out - r_in) / m for j in range(1, m + 1))
        r_out = r_in
    # ungraded core between 0 and the innermost ring
    m = max(1, math.ceil(r_out / hr - 1e-9))
    radii.extend(r_out * (m - j) / m for j in range(1, m))
    return np.array(radii[::-1])


def _angular_count(span, radius, hr, curved=True):
    n = max(2, math.ceil(3 * span / math.pi - 1e-9), math.ceil(span * radius / hr - 1e-9))
    if curved:
        n = max(n, math.ceil(span / MAX_CHORD_ANGLE - 1e-9))
    return n


def _fan_mesh(R, start, span, target_h, q, layers, n_theta=None, flag_outer=True):
    hr = target_h / math.sqrt(2.0)
    radii = _ring_radii(R, q, layers, hr)
    if n_theta is None:
        n_theta = _angular_count(span, R, hr)
    angles = start + span * np.arange(n_theta + 1) / n_theta
    # snap the end ray exactly
    angles[-1] = start + span
    n_rings = len(radii)
    cos, sin = np.cos(angles), np.sin(angles)
    ring_pts = radii[:, None, None] * np.stack([cos, sin], axis=-1)[None]
    vertices = np.vstack([np.zeros((1, 2)), ring_pts.reshape(-1, 2)])

    def vid(j, i):
        return 1 + j * (n_theta + 1) + i

    tris = [(0, vid(0, i), vid(0, i + 1)) for i in range(n_theta)]
    for j in range(n_rings - 1):
        for i in range(n_theta):
            a, b = vid(j, i), vid(j, i + 1)
            c, d = vid(j + 1, i + 1), vid(j + 1, i)
            tris.append((a, d, c))
            tris.append((a, c, b))
    boundary = np.zeros(len(vertices), dtype=bool)
    boundary[0] = True
    idx = np.arange(n_theta + 1)
    for j in range(n_rings):
        boundary[vid(j, 0)] = True
        boundary[vid(j, n_theta)] = True
    if flag_outer:
        boundary[vid(n_rings - 1, idx)] = True
    return vertices, np.array(tris, dtype=np.int64), boundary


def _annular_mesh(domain: DomainSpec, target_h):
    a, b, span = domain.inner_radius, domain.outer_radius, domain.aperture
    n_theta = max(2, math.ceil(span / min(target_h, MAX_CHORD_ANGLE) - 1e-9))
    log_len = math.log(b / a)
    n_r = max(1, math.ceil(log_len / target_h - 1e-9))
    radii = a * np.exp(log_len * np.arange(n_r + 1) / n_r)
    radii[-1] = b
    angles = span * np.arange(n_theta + 1) / n_theta
    angles[-1] = span
    pts = radii[:, None, None] * np.stack([np.cos(angles), np.sin(angles)], axis=-1)[None]
    vertices = pts.reshape(-1, 2)

    def vid(j, i):
        return j * (n_theta + 1) + i

    tris = []
    for j in range(n_r):
        for i in range(n_theta):
            p, s = vid(j, i), vid(j, i + 1)
            r, d = vid(j + 1, i + 1), vid(j + 1, i)
            tris.append((p, d, r))
            tris.append((p, r, s))
    J, I = np.divmod(np.arange(len(vertices)), n_theta + 1)
    boundary = (J == 0) | (J == n_r) | (I == 0) | (I == n_theta)
    q = math.exp(-log_len / n_r)
    return Mesh(vertices, tris, boundary, None, Grading(q, n_r), domain)


# ---------------------------------------------------------------------------
# polygons
# ---------------------------------------------------------------------------


def _shoelace(v):
    x, y = v[:, 0], v[:, 1]
    return 0.5 * float(np.dot(x, np.roll(y, -1)) - np.dot(np.roll(x, -1), y))


def _angular_span(angles):
    """Length of the smallest arc containing all the given angles."""
    a = np.sort(np.mod(angles, 2 * math.pi))
    gaps = np.diff(np.concatenate([a, [a[0] + 2 * math.pi]]))
    return 2 * math.pi - gaps.max()


def _segment_distance(pts, a, b):
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    ab = b - a
    denom = float(ab @ ab)
    if denom == 0:
        return np.hypot(pts[:, 0] - a[0], pts[:, 1] - a[1])
    s = np.clip(((pts - a) @ ab) / denom, 0.0, 1.0)
    proj = a + s[:, None] * ab
    return np.hypot(pts[:, 0] - proj[:, 0], pts[:, 1] - proj[:, 1])


def _cross(o, a, b):
    return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])


def _segments_cross(p1, p2, p3, p4):
    d1, d2 = _cross(p3, p4, p1), _cross(p3, p4, p2)
    d3, d4 = _cross(p1, p2, p3), _cross(p1, p2, p4)
    if ((d1 > 0) != (d2 > 0)) and ((d3 > 0) != (d4 > 0)) and d1 * d2 < 0 and d3 * d4 < 0:
        return True
    return False


def _polygon_geometry(vertices):
    """Validate a polygon and return it CCW with the origin as vertex 0."""
    if vertices is None or len(vertices) < 3:
        raise InvalidDomain("polygon needs at least three vertices")
    v = np.asarray(vertices, dtype=float)
    if not np.all(np.isfinite(v)):
        raise InvalidDomain("polygon vertices must be finite")
    scale = float(np.abs(v).max())
    tol = POSITION_TOL * scale
    area = _shoelace(v)
    if abs(area) <= tol * tol:
        raise InvalidDomain("degenerate polygon")
    if area < 0:
        v = v[::-1].copy()
    n = len(v)
    if np.any(np.hypot(*(v - np.roll(v, -1, axis=0)).T) <= tol):
        raise InvalidDomain("polygon has repeated consecutive vertices")
    for i in range(n):
        for j in range(i + 1, n):
            if j == i + 1 or (i == 0 and j == n - 1):
                continue
            if _segments_cross(v[i], v[(i + 1) % n], v[j], v[(j + 1) % n]):
                raise InvalidDomain("polygon is self-intersecting")
    r = np.hypot(v[:, 0], v[:, 1])
    at = np.flatnonzero(r <= tol)
    if len(at) > 1:
        raise InvalidDomain("origin repeated among polygon vertices")
    if len(at) == 1:
        k = int(at[0])
        v[k] = 0.0
    else:
        k = None
        for i in range(n):
            d = _segment_distance(np.zeros((1, 2)), v[i], v[(i + 1) % n])[0]
            if d <= tol:
                v = np.insert(v, i + 1, [0.0, 0.0], axis=0)
                k = i + 1
                break
        if k is None:
            raise InvalidDomain("origin is neither a vertex nor on an edge of the polygon")
    v = np.roll(v, -k, axis=0)
    nxt, prv = v[1], v[-1]
    a_n = math.atan2(nxt[1], nxt[0])
    a_p = math.atan2(prv[1], prv[0])
    angle = (a_p - a_n) % (2 * math.pi)
    if angle <= 0:
        raise InvalidDomain("degenerate angle at the origin")
    # radius of the largest origin-centred disk meeting only the two incident edges
    m = len(v)
    reach = min(np.hypot(*nxt), np.hypot(*prv))
    for i in range(1, m - 1):
        d = _segment_distance(np.zeros((1, 2)), v[i], v[i + 1])[0]
        reach = min(reach, d)
    return {"vertices": v, "start": a_n, "angle": angle, "reach": float(reach)}


def _point_in_triangle(p, a, b, c, eps):
    return _cross(a, b, p) >= -eps and _cross(b, c, p) >= -eps and _cross(c, a, p) >= -eps


def _min_angle(a, b, c):
    def ang(p, q, r):
        u, w = q - p, r - p
        cosv = float(u @ w) / (np.linalg.norm(u) * np.linalg.norm(w))
        return math.acos(max(-1.0, min(1.0, cosv)))

    return min(ang(a, b, c), ang(b, c, a), ang(c, a, b))


def ear_clip(points: np.ndarray) -> np.ndarray:
    """Triangulate a simple CCW polygon, picking the best-shaped ear each step."""
    pts = np.asarray(points, dtype=float)
    idx = list(range(len(pts)))
    scale = float(np.abs(pts).max())
    eps = 1e-14 * scale * scale
    tris = []
    while len(idx) > 3:
        m = len(idx)
        best = None
        for k in range(m):
            i0, i1, i2 = idx[k - 1], idx[k], idx[(k + 1) % m]
            a, b, c = pts[i0], pts[i1], pts[i2]
            if _cross(a, b, c) <= eps:
                continue
            blocked = False
            for j in idx:
                if j in (i0, i1, i2):
                    continue
                if _point_in_triangle(pts[j], a, b, c, eps):
                    blocked = True
                    break
            if blocked:
                continue
            quality = _min_angle(a, b, c)
            if best is None or quality > best[0]:
                best = (quality, k)
        if best is None:
            raise InvalidDomain("ear clipping failed; polygon may not be simple")
        k = best[1]
        tris.append((idx[k - 1], idx[k], idx[(k + 1) % m]))
        del idx[k]
    if _cross(pts[idx[0]], pts[idx[1]], pts[idx[2]]) <= eps:
        raise InvalidDomain("ear clipping left a degenerate triangle")
    tris.append(tuple(idx))
    return np.array(tris, dtype=np.int64)


def _polygon_mesh(domain: DomainSpec, target_h, q, layers):
    geo = _polygon_geometry(domain.vertices)
    v = geo["vertices"]
    r0 = 0.5 * geo["reach"]
    start, span = geo["start"], geo["angle"]
    hr = target_h / math.sqrt(2.0)
    n_theta = _angular_count(span, r0, hr, curved=False)
    fan_v, fan_t, fan_b = _fan_mesh(r0, start, span, target_h, q, layers, n_theta, flag_outer=False)
    n_fan = len(fan_v)
    ring = np.arange(n_fan - (n_theta + 1), n_fan)  # outermost ring, by angle
    # outer region: P_n, polygon vertices 1..m-1, P_p, then the ring backwards
    poly_rest = v[1:]
    outer_pts = np.vstack([fan_v[ring[0]], poly_rest, fan_v[ring[-1]], fan_v[ring[-2:0:-1]]])
    local = ear_clip(outer_pts)
    n_rest = len(poly_rest)
    new_ids = n_fan + np.arange(n_rest)
    glob = np.concatenate([[ring[0]], new_ids, [ring[-1]], ring[-2:0:-1]])
    vertices = np.vstack([fan_v, poly_rest])
    triangles = np.vstack([fan_t, glob[local]])
    boundary = np.concatenate([fan_b, np.ones(n_rest, dtype=bool)])
    mesh = Mesh(vertices, triangles, boundary, 0, Grading(q, layers), domain)
    # the polygon has no arcs, so refinement keeps the domain exactly
    while True:
        cent = mesh.vertices[mesh.triangles].mean(axis=1)
        outside = np.hypot(cent[:, 0], cent[:, 1]) >= r0 * (1 - 1e-12)
        if not np.any(outside) or mesh.element_diameters()[outside].max() <= target_h:
            break
        mesh = refine_mesh(mesh)
    return mesh


# ---------------------------------------------------------------------------
# refinement
# ---------------------------------------------------------------------------


def refine_mesh(mesh: Mesh) -> Mesh:
    """Uniform quadrisection by edge midpoints.

    Midpoints of boundary chords of a circular arc are pushed back onto
    the arc, so the chord count on every arc doubles and the discrete
    domain stays inscribed.  Old vertices keep their indices; the new
    vertex for edge ``e`` gets index ``V + e``.
    """
    edges, tri_edges = mesh.edges()
    nv = mesh.n_vertices
    counts = np.bincount(tri_edges.reshape(-1), minlength=len(edges))
    mids = 0.5 * (mesh.vertices[edges[:, 0]] + mesh.vertices[edges[:, 1]])
    on_boundary = counts == 1
    new_flags = on_boundary.copy()
    if mesh.domain is not None and mesh.domain.arc_radii:
        scale = mesh.domain.scale
        r = mesh.radii()
        r1, r2 = r[edges[:, 0]], r[edges[:, 1]]
        for rho in mesh.domain.arc_radii:
            tol = POSITION_TOL * scale
            sel = on_boundary & (np.abs(r1 - rho) <= tol) & (np.abs(r2 - rho) <= tol)
            if np.any(sel):
                norm = np.hypot(mids[sel, 0], mids[sel, 1])
                mids[sel] *= (rho / norm)[:, None]
    t = mesh.triangles
    a, b, c = t[:, 0], t[:, 1], t[:, 2]
    ab, bc, ca = nv + tri_edges[:, 0], nv + tri_edges[:, 1], nv + tri_edges[:, 2]
    children = np.stack(
        [
            np.stack([a, ab, ca], axis=1),
            np.stack([ab, b, bc], axis=1),
            np.stack([ca, bc, c], axis=1),
            np.stack([ab, bc, ca], axis=1),
        ],
        axis=1,
    ).reshape(-1, 3)
    g = mesh.grading
    refined = Mesh(
        np.vstack([mesh.vertices, mids]),
        children,
        np.concatenate([mesh.boundary, new_flags]),
        mesh.origin_vertex,
        Grading(g.q, (g.layers or 0) + 1),
        mesh.domain,
    )
    return validate_mesh(refined)


def mesh_from_arrays(vertices: Sequence, triangles: Sequence, boundary: Sequence, domain=None) -> Mesh:
    """Build and validate a mesh from raw arrays; locates the origin vertex if present."""
    v = np.asarray(vertices, dtype=float).reshape(-1, 2)
    at0 = np.flatnonzero(np.hypot(v[:, 0], v[:, 1]) == 0)
    origin = int(at0[0]) if len(at0) else None
    return validate_mesh(Mesh(v, triangles, boundary, origin, Grading(0.5, 0), domain))
