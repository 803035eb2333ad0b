"""Discrete Hardy constants, the lambda* threshold and supporting diagnostics.

Everything here is built on one chain: a graded mesh at some refinement
level, the pencil ``(K - lam M, W)`` and its smallest eigenvalue ``mu_h``.
Because the discrete domain is inscribed and P1 functions are admissible
test functions, ``mu_h`` is an upper bound for ``mu_lam(Omega)`` up to the
quadrature error of ``W``; the certificates below use only that side.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from matplotlib.tri import LinearTriInterpolator, Triangulation
from scipy.integrate import IntegrationWarning, quad, trapezoid
from scipy.special import roots_legendre

from .assembly import AssembledPencil, assemble_pencil, reference_singular_mass
from .cone1d import arc_lambda1, bessel_disc_lambda1, mu_plus
from .eigensolve import DEFAULT_TOL, EigResult, smallest_eigenpair
from .errors import DomainNotHalfPlane, DomainNotSector, OutOfRange
from .geometry import DomainSpec, Grading, Mesh, diameter, generate_mesh, refine_mesh
from .quadrature import dunavant4, subdivided, vertex_collapsed
from .rng import LCG

ATTAINED = "AttainedCertified"
INCONCLUSIVE = "Inconclusive"
MAX_LEVEL = 6
DEFAULT_H = 0.25  # relative to the domain scale; a log-polar step for annular sectors
DEFAULT_LAYERS = 32
DEFAULT_LEVEL = 2
N_PLANE = 2  # the finite-element path is planar


@dataclass(frozen=True, eq=False)
class MeshRecipe:
    """Base-mesh parameters; level ``k`` is the base mesh quadrisected ``k`` times."""

    target_h: float | None = None
    q: float = 0.5
    layers: int | None = DEFAULT_LAYERS

    def resolve(self, domain: DomainSpec):
        h = self.target_h
        if h is None:
            h = DEFAULT_H if domain.kind == "AnnularSector" else DEFAULT_H * domain.scale
        return float(h), float(self.q), self.layers


@dataclass(frozen=True, eq=False)
class HardyResult:
    domain: DomainSpec
    lam: float
    mu_h: float
    mesh_level: int
    eig: EigResult
    quadrature_tol: float
    mesh: Mesh = field(repr=False)
    pencil: AssembledPencil = field(repr=False)

    @property
    def nodal_values(self):
        return self.pencil.expand(self.eig.coeffs, self.mesh.n_vertices)

    def to_dict(self):
        return {
            "domain": self.domain.to_dict(),
            "domain_class": self.domain.regularity,
            "lambda": self.lam,
            "mu_h": self.mu_h,
            "mesh_level": self.mesh_level,
            "quadrature_tol": self.quadrature_tol,
            "residual": self.eig.residual,
            "iterations": self.eig.iterations,
            "dofs": self.pencil.n,
            "vertices": self.mesh.n_vertices,
            "triangles": self.mesh.n_triangles,
            "mu_plus": mu_plus(N_PLANE),
            "certificate": certify_attained(self),
        }


@dataclass(frozen=True)
class LambdaStarResult:
    bracket: tuple  # (lam_lo, lam_hi); None marks an unbounded side
    samples: list  # (lam, mu_h, quadrature_tol, certificate), sorted by lam
    certificate: str  # certificate at lam_hi
    status: str  # "bracketed", "predicate_never_true" or "predicate_true_at_lower_end"
    level: int

    def to_dict(self):
        return {
            "bracket": list(self.bracket),
            "certificate": self.certificate,
            "status": self.status,
            "level": self.level,
            "samples": [
                {"lambda": lam, "mu_h": mu, "quadrature_tol": qt, "certificate": c}
                for lam, mu, qt, c in self.samples
            ],
        }


@dataclass(frozen=True)
class ConcentrationProfile:
    radii: np.ndarray
    mass_fraction: np.ndarray
    level: int

    def to_dict(self):
        return {"radii": self.radii.tolist(), "mass_fraction": self.mass_fraction.tolist(), "level": self.level}


# ------------------------------------------------------------------ meshes


@lru_cache(maxsize=16)
def _mesh_at(domain: DomainSpec, h: float, q: float, layers, level: int) -> Mesh:
    if level == 0:
        return generate_mesh(domain, h, Grading(q, layers))
    return refine_mesh(_mesh_at(domain, h, q, layers, level - 1))


@lru_cache(maxsize=8)
def _pencil_at(domain, h, q, layers, level):
    mesh = _mesh_at(domain, h, q, layers, level)
    return mesh, assemble_pencil(mesh)


@lru_cache(maxsize=4)
def _reference_w(domain, h, q, layers, level):
    mesh, pencil = _pencil_at(domain, h, q, layers, level)
    return reference_singular_mass(mesh, pencil.dof_map)


def mesh_for(domain: DomainSpec, level: int = DEFAULT_LEVEL, recipe: MeshRecipe | None = None) -> Mesh:
    """The mesh ``compute_mu`` uses at ``level``."""
    _check_level(level)
    return _mesh_at(domain, *(recipe or MeshRecipe()).resolve(domain), int(level))


def pencil_for(domain: DomainSpec, level: int = DEFAULT_LEVEL, recipe: MeshRecipe | None = None):
    _check_level(level)
    return _pencil_at(domain, *(recipe or MeshRecipe()).resolve(domain), int(level))


def _check_level(level):
    if int(level) != level or not 0 <= level <= MAX_LEVEL:
        raise OutOfRange(f"level must be an integer in [0, {MAX_LEVEL}], got {level}")


def _quadrature_tol(W, W_ref, coeffs, mu, eig_tol):
    """Twice the change of ``mu`` when ``W`` is replaced by its finer-quadrature version."""
    d = float(coeffs @ (W @ coeffs))
    d_ref = float(coeffs @ (W_ref @ coeffs))
    return 2.0 * abs(mu) * abs(d_ref - d) / d + 10.0 * eig_tol


# -------------------------------------------------------------- mu and lam*


def compute_mu(
    domain: DomainSpec,
    lam: float = 0.0,
    level: int = DEFAULT_LEVEL,
    recipe: MeshRecipe | None = None,
    tol: float = DEFAULT_TOL,
    x0=None,
    shift_hint=None,
) -> HardyResult:
    """Discrete ``mu_lam(Omega)`` on the graded mesh quadrisected ``level`` times.

    Examples
    --------
    >>> r = compute_mu(DomainSpec.half_disk(1.0), 0.0, level=0)
    >>> 1.0 < r.mu_h < 1.2
    True
    """
    _check_level(level)
    if not math.isfinite(lam):
        raise OutOfRange("lambda must be finite")
    domain.validate()
    key = (domain, *(recipe or MeshRecipe()).resolve(domain), int(level))
    mesh, pencil = _pencil_at(*key)
    eig = smallest_eigenpair(pencil.operator(lam), pencil.W, tol=tol, x0=x0, shift_hint=shift_hint)
    qtol = _quadrature_tol(pencil.W, _reference_w(*key), eig.coeffs, eig.mu, tol)
    return HardyResult(domain, float(lam), eig.mu, int(level), eig, qtol, mesh, pencil)


def certify_attained(result, quadrature_tol=None, N=N_PLANE) -> str:
    """``AttainedCertified`` iff ``mu_h + quadrature_tol < N^2/4``, else ``Inconclusive``.

    ``result`` is a :class:`HardyResult` or a bare ``mu_h`` value.
    """
    if isinstance(result, HardyResult):
        mu = result.mu_h
        if quadrature_tol is None:
            quadrature_tol = result.quadrature_tol
    else:
        mu = float(result)
    qt = 0.0 if quadrature_tol is None else float(quadrature_tol)
    return ATTAINED if mu + qt < mu_plus(N) else INCONCLUSIVE


def scan_lambda(
    domain: DomainSpec,
    lam_range=(-50.0, 50.0),
    level: int = DEFAULT_LEVEL,
    bisect_tol: float = 1e-2,
    recipe: MeshRecipe | None = None,
    tol: float = DEFAULT_TOL,
) -> LambdaStarResult:
    """Bracket ``lambda* = inf{lam : mu_lam < mu+}`` by bisection on one mesh.

    The predicate is ``mu_h(lam) + quadrature_tol < mu+``.  At the upper
    edge it certifies ``mu_lam(Omega) < mu+``; the lower edge is numerical
    evidence only.  A range on which the predicate never (or always)
    holds is reported through ``status`` rather than raised.
    """
    lo, hi = (float(v) for v in lam_range)
    if not (math.isfinite(lo) and math.isfinite(hi) and lo < hi):
        raise OutOfRange("lambda range must be finite with lo < hi")
    if not bisect_tol > 0:
        raise OutOfRange("bisect_tol must be positive")
    target = mu_plus(N_PLANE)
    samples = {}

    def evaluate(lam):
        # mu is non-increasing in lam, so the nearest sample above gives a valid shift
        above = [k for k in samples if k > lam]
        below = [k for k in samples if k < lam]
        x0 = hint = None
        if above:
            near = samples[min(above)]
            x0 = near.eig.coeffs
            hint = near.mu_h - 1e-3 * max(1.0, abs(near.mu_h))
        elif below:
            x0 = samples[max(below)].eig.coeffs
        r = compute_mu(domain, lam, level, recipe, tol, x0=x0, shift_hint=hint)
        samples[lam] = r
        return r.mu_h + r.quadrature_tol < target

    p_hi = evaluate(hi)
    p_lo = evaluate(lo)
    if p_lo:
        status, bracket = "predicate_true_at_lower_end", (None, lo)
    elif not p_hi:
        status, bracket = "predicate_never_true", (hi, None)
    else:
        while hi - lo > bisect_tol:
            mid = 0.5 * (lo + hi)
            if evaluate(mid):
                hi = mid
            else:
                lo = mid
        status, bracket = "bracketed", (lo, hi)
    rows = [
        (lam, r.mu_h, r.quadrature_tol, certify_attained(r))
        for lam, r in sorted(samples.items())
    ]
    edge = bracket[1] if bracket[1] is not None else bracket[0]
    return LambdaStarResult(bracket, rows, certify_attained(samples[edge]), status, int(level))


# --------------------------------------------------------------- diagnostics


def weighted_nodes(mesh: Mesh, values, levels: int = 2):
    """Quadrature nodes of ``|x|^-2 u^2`` over the mesh: ``(radii, weights)``.

    Origin-touching triangles use the rule collapsed at the origin, the
    rest a degree-4 rule on ``4**levels`` sub-cells.
    """
    u = np.asarray(values, dtype=float)
    tri = mesh.triangles
    at_origin = np.zeros(tri.shape, dtype=bool)
    if mesh.origin_vertex is not None:
        at_origin = tri == mesh.origin_vertex
    area = mesh.signed_areas()
    radii, weights = [], []

    def add(sel, perm, rule):
        t = tri[sel][:, perm]
        x = np.einsum("qk,ekd->eqd", rule.nodes, mesh.vertices[t])
        uq = np.einsum("qk,ek->eq", rule.nodes, u[t])
        r2 = (x**2).sum(-1)
        radii.append(np.sqrt(r2).reshape(-1))
        weights.append((area[sel][:, None] * rule.weights[None, :] * uq**2 / r2).reshape(-1))

    plain = ~at_origin.any(axis=1)
    add(plain, [0, 1, 2], subdivided(dunavant4(), levels))
    graded = vertex_collapsed()
    for local in range(3):
        sel = at_origin[:, local]
        if np.any(sel):
            add(sel, [local, (local + 1) % 3, (local + 2) % 3], graded)
    return np.concatenate(radii), np.concatenate(weights)


def mass_fraction(mesh: Mesh, values, radii, levels: int = 2):
    """``m(r)``: share of ``int |x|^-2 u^2`` inside ``B_r``.

    All radii use the same node set, so ``m`` is non-decreasing and equals
    1 beyond the farthest node.
    """
    rq, wq = weighted_nodes(mesh, values, levels)
    order = np.argsort(rq, kind="stable")
    rq, cum = rq[order], np.cumsum(wq[order])
    total = cum[-1]
    if not total > 0:
        raise OutOfRange("the function vanishes identically")
    idx = np.searchsorted(rq, np.asarray(radii, dtype=float), side="right")
    m = np.where(idx > 0, cum[np.maximum(idx - 1, 0)], 0.0) / total
    return np.minimum(m, 1.0)


def concentration_profile(result: HardyResult, radii, values=None) -> ConcentrationProfile:
    """Singular-mass fraction ``m(r)`` of the discrete minimizer (or of ``values``)."""
    radii = np.asarray(radii, dtype=float)
    if values is None:
        values = result.nodal_values
    m = mass_fraction(result.mesh, values, radii)
    return ConcentrationProfile(radii, m, result.mesh_level)


def verify_remainder(
    domain: DomainSpec,
    sample_count: int = 100,
    seed: int = 0,
    level: int = 0,
    mode: str = "half-plane",
    include_minimizer: bool = False,
    recipe: MeshRecipe | None = None,
) -> dict:
    """Minimum of ``(u'Ku - mu0 u'Wu) / u'Mu`` over seeded random P1 functions.

    ``mode="half-plane"`` uses ``mu0 = mu+ = 1`` and needs a domain inside a
    half-plane; ``mode="cone"`` uses the cone constant ``pi^2/theta0^2`` of
    a sector.  Coefficients are i.i.d. uniform in ``[-1, 1)`` from
    :class:`hardylab.rng.LCG`.  Reported floors are ``lambda_1(D)/diam^2``
    and, for sectors and the half-disk, ``lambda_1(D)/R^2``.
    """
    if mode not in ("half-plane", "cone"):
        raise OutOfRange(f"unknown remainder mode {mode!r}")
    if int(sample_count) != sample_count or sample_count < 1:
        raise OutOfRange("sample_count must be a positive integer")
    domain.validate()
    is_cone = domain.kind in ("Sector", "HalfDisk")
    if mode == "half-plane":
        if not domain.contained_in_half_plane():
            raise DomainNotHalfPlane(f"{domain.kind} is not contained in a half-plane")
        mu0 = mu_plus(N_PLANE)
    else:
        if not is_cone:
            raise DomainNotSector("cone mode needs a Sector or HalfDisk")
        mu0 = arc_lambda1(domain.opening[1])
    mesh, pencil = pencil_for(domain, level, recipe)
    if pencil.n == 0:
        raise OutOfRange("the mesh has no interior vertices")
    rng = LCG(seed)
    values = []
    for _ in range(int(sample_count)):
        c = rng.symmetric(pencil.n)
        values.append(_remainder_quotient(pencil, c, mu0))
    if include_minimizer:
        eig = smallest_eigenpair(pencil.K, pencil.W)
        values.append(_remainder_quotient(pencil, eig.coeffs, mu0))
    lam_disc = bessel_disc_lambda1(1e-12)
    floors = {"diameter": lam_disc / diameter(domain) ** 2}
    if is_cone:
        floors["cone"] = lam_disc / domain.radius**2
    return {
        "mode": mode,
        "mu0": mu0,
        "samples": len(values),
        "seed": int(seed),
        "level": int(level),
        "min_q": float(min(values)),
        "floors": floors,
        "holds": {k: bool(min(values) >= v - 1e-4) for k, v in floors.items()},
    }


def _remainder_quotient(pencil, c, mu0):
    return (float(c @ (pencil.K @ c)) - mu0 * float(c @ (pencil.W @ c))) / float(c @ (pencil.M @ c))


def phi_delta_integral(R: float, delta: float) -> dict:
    """``int_{D_R} |z|^-2 phi_delta^2`` for ``phi_delta = |log|z||^-delta``.

    The numeric value integrates ``2 pi t^(-2 delta)`` over ``t = -log r``
    in ``(-log R, inf)``; the closed form is ``2 pi T^(1-2 delta) / (2 delta - 1)``.
    """
    if not 0.0 < R < 1.0:
        raise OutOfRange(f"R must lie in (0, 1), got {R}")
    if not 0.5 < delta < 1.0:
        raise OutOfRange(f"delta must lie in (1/2, 1), got {delta}")
    T = -math.log(R)
    with warnings.catch_warnings():
        # the slowly decaying tail near delta = 1/2 trips QUADPACK's roundoff heuristic
        warnings.simplefilter("ignore", IntegrationWarning)
        val, err = quad(lambda t: t ** (-2.0 * delta), T, math.inf, limit=500, epsabs=0.0, epsrel=1e-12)
    closed = 2.0 * math.pi * T ** (1.0 - 2.0 * delta) / (2.0 * delta - 1.0)
    return {"numeric": 2.0 * math.pi * val, "closed_form": closed, "abserr": 2.0 * math.pi * err}


def _default_profile(start, span):
    return lambda theta: np.sin(math.pi * (theta - start) / span)


def radial_reduction(result: HardyResult, profile=None, radii=None, values=None, n_angles: int = 64, N: int = N_PLANE):
    """``psi(r) = r^((N-2)/2) int_Sigma u(r sigma) Phi(sigma) dsigma`` on a sector.

    ``profile`` is a callable of the polar angle, or samples on a uniform
    grid of the opening; the default is the first arc eigenfunction.
    Returns the radii, ``psi`` and the functionals ``2 pi int psi^2/r``,
    ``2 pi int psi'^2 r`` and ``2 pi int psi^2 r`` (trapezoidal in ``r``).
    """
    domain = result.domain
    if domain.kind not in ("Sector", "HalfDisk"):
        raise DomainNotSector(f"radial reduction needs a Sector or HalfDisk, got {domain.kind}")
    start, span = domain.opening
    R = domain.radius
    if radii is None:
        radii = np.geomspace(1e-4 * R, R, 400)
    radii = np.asarray(radii, dtype=float)
    if profile is None:
        phi = _default_profile(start, span)
    elif callable(profile):
        phi = profile
    else:
        samples = np.asarray(profile, dtype=float)
        grid = np.linspace(start, start + span, len(samples))
        phi = lambda theta: np.interp(theta, grid, samples)  # noqa: E731
    if values is None:
        values = result.nodal_values
    mesh = result.mesh
    tri = Triangulation(mesh.vertices[:, 0], mesh.vertices[:, 1], mesh.triangles)
    interp = LinearTriInterpolator(tri, np.asarray(values, dtype=float))
    xg, wg = roots_legendre(n_angles)
    theta = start + 0.5 * span * (xg + 1.0)
    wt = 0.5 * span * wg * phi(theta)
    X = radii[:, None] * np.cos(theta)[None, :]
    Y = radii[:, None] * np.sin(theta)[None, :]
    # points between an arc and its inscribed chords fall outside: u_h = 0 there
    U = np.ma.filled(interp(X, Y), 0.0)
    psi = radii ** ((N - 2) / 2.0) * (U @ wt)
    dpsi = np.gradient(psi, radii) if len(radii) > 1 else np.zeros_like(psi)
    functionals = {
        "weighted": 2.0 * math.pi * float(trapezoid(psi**2 / radii, radii)),
        "dirichlet": 2.0 * math.pi * float(trapezoid(dpsi**2 * radii, radii)),
        "mass": 2.0 * math.pi * float(trapezoid(psi**2 * radii, radii)),
    }
    return {"radii": radii, "psi": psi, "functionals": functionals}
