"""One-dimensional spectral computations on cones, arcs and spherical caps.

A cone ``C_Sigma = {r sigma : r > 0, sigma in Sigma}`` over a subdomain
``Sigma`` of the unit sphere has Hardy constant ``(N-2)^2/4 + lambda_1(Sigma)``.
For ``N = 2`` the cross-section is an arc and ``lambda_1`` is explicit;
for ``N >= 3`` only geodesic caps are handled, through their axisymmetric
Sturm-Liouville reduction.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
from scipy.interpolate import CubicSpline
from scipy.special import gamma, roots_legendre

from .eigensolve import dense_oracle, smallest_eigenpair
from .errors import NoConvergence, OutOfRange, QuadratureFailure

SIGMA_KINDS = ("Arc", "Cap", "FullSphere")
DEFAULT_CYLINDER_LENGTH = 20.0


@dataclass(frozen=True)
class ConeSpec:
    """Dimension and cross-section of a cone.

    ``angle`` is the aperture for an Arc (N = 2) and the polar
    half-angle for a Cap (N >= 3); it is ignored for FullSphere.
    """

    N: int
    sigma: str
    angle: float | None = None

    def __post_init__(self):
        if int(self.N) != self.N or self.N < 2:
            raise OutOfRange(f"dimension must be an integer >= 2, got {self.N}")
        if self.sigma not in SIGMA_KINDS:
            raise OutOfRange(f"unknown cross-section {self.sigma!r}")
        if self.sigma == "Arc":
            if self.N != 2:
                raise OutOfRange("an Arc cross-section requires N = 2")
            if not 0.0 < self.angle <= 2.0 * math.pi:
                raise OutOfRange("arc aperture must lie in (0, 2*pi]")
        if self.sigma == "Cap":
            if self.N < 3:
                raise OutOfRange("a Cap cross-section requires N >= 3")
            if not 0.0 < self.angle < math.pi:
                raise OutOfRange("cap half-angle must lie in (0, pi)")

    @classmethod
    def arc(cls, aperture):
        return cls(2, "Arc", float(aperture))

    @classmethod
    def cap(cls, N, phi0):
        return cls(int(N), "Cap", float(phi0))

    def to_dict(self):
        return {"N": self.N, "sigma": self.sigma, "angle": self.angle}


@dataclass(frozen=True, eq=False)
class CapEigenResult:
    lambda1: float
    profile: np.ndarray  # Phi on the uniform grid, max 1, Phi(phi0) = 0
    grid: np.ndarray
    tol_achieved: float
    history: list = field(default_factory=list)  # (elements, raw, extrapolated)


def arc_lambda1(theta0: float) -> float:
    """First Dirichlet eigenvalue of the interval ``(0, theta0)``: ``pi^2 / theta0^2``."""
    if not 0.0 < theta0 <= 2.0 * math.pi:
        raise OutOfRange(f"aperture must lie in (0, 2*pi], got {theta0}")
    return math.pi**2 / theta0**2


def sphere_area(n: int) -> float:
    """Surface measure of the unit sphere ``S^n`` in ``R^(n+1)``."""
    return 2.0 * math.pi ** ((n + 1) / 2) / gamma((n + 1) / 2)


def _cap_pencil(N, phi0, n_el, gauss=4):
    """P1 stiffness and mass of ``-(s^(N-2) u')' = lam s^(N-2) u`` with ``s = sin(phi)``.

    Nodes ``0..n_el-1`` are free (Neumann at the pole), node ``n_el`` at
    ``phi0`` is eliminated (Dirichlet).
    """
    h = phi0 / n_el
    xg, wg = roots_legendre(gauss)
    t = 0.5 * (xg + 1.0)
    left = np.arange(n_el) * h
    pts = left[:, None] + h * t[None, :]
    wt = np.sin(pts) ** (N - 2) * (0.5 * h * wg)[None, :]
    # local basis 1 - t and t on each element
    b0, b1 = 1.0 - t, t
    k = wt.sum(axis=1) / h**2
    m00 = wt @ (b0 * b0)
    m01 = wt @ (b0 * b1)
    m11 = wt @ (b1 * b1)
    n = n_el + 1
    kd = np.zeros(n)
    kd[:-1] += k
    kd[1:] += k
    md = np.zeros(n)
    md[:-1] += m00
    md[1:] += m11
    K = sp.diags([kd[:-1], -k[:-1], -k[:-1]], [0, 1, -1], format="csr")
    M = sp.diags([md[:-1], m01[:-1], m01[:-1]], [0, 1, -1], format="csr")
    return K, M


def cap_fe_lambda1(N, phi0, n_el):
    """Raw P1 eigenvalue and nodal profile on ``n_el`` uniform elements."""
    K, M = _cap_pencil(N, phi0, n_el)
    res = smallest_eigenpair(K, M, tol=1e-11 * max(1.0, float(abs(K).max())))
    phi = np.append(res.coeffs, 0.0)
    return res.mu, phi / np.abs(phi).max()


def cap_lambda1(N: int, phi0: float, tol: float = 1e-8, n0: int = 64, max_doublings: int = 10) -> CapEigenResult:
    """First Dirichlet eigenvalue of the geodesic cap of half-angle ``phi0`` on ``S^(N-1)``.

    Solves the axisymmetric problem on ``(0, phi0)`` with P1 elements,
    doubling the element count and applying Richardson extrapolation
    (the P1 eigenvalue error is ``O(h^2)``) until successive extrapolated
    values differ by less than ``tol``.

    Examples
    --------
    >>> round(cap_lambda1(3, math.pi / 2).lambda1, 6)
    2.0
    """
    if int(N) != N or N < 3:
        raise OutOfRange(f"cap requires an integer N >= 3, got {N}")
    if not 0.0 < phi0 < math.pi:
        raise OutOfRange(f"half-angle must lie in (0, pi), got {phi0}")
    if not tol > 0:
        raise OutOfRange("tol must be positive")
    history = []
    n_el = n0
    prev_raw, prev_extra = None, None
    for _ in range(max_doublings + 1):
        raw, profile = cap_fe_lambda1(N, phi0, n_el)
        extra = None if prev_raw is None else (4.0 * raw - prev_raw) / 3.0
        history.append((n_el, raw, extra))
        if extra is not None and prev_extra is not None:
            err = abs(extra - prev_extra)
            if err < tol:
                grid = np.linspace(0.0, phi0, n_el + 1)
                return CapEigenResult(extra, profile, grid, err, history)
        prev_raw, prev_extra = raw, extra
        n_el *= 2
    raise NoConvergence(f"cap eigenvalue did not reach tol={tol:g}", len(history))


def cap_dense_oracle(N, phi0, n_el=400):
    """Smallest eigenvalue of the same P1 pencil by dense Cholesky reduction."""
    K, M = _cap_pencil(N, phi0, n_el)
    return dense_oracle(K, M)[0]


def cone_hardy_constant(N: int, lambda1_sigma: float) -> float:
    """``(N-2)^2/4 + lambda_1(Sigma)``."""
    if lambda1_sigma < 0:
        raise OutOfRange("lambda1 of the cross-section must be non-negative")
    return (N - 2) ** 2 / 4.0 + lambda1_sigma


def mu_plus(N: int) -> float:
    """Hardy constant of a half-space with singularity on its boundary, ``N^2/4``."""
    if N < 2:
        raise OutOfRange(f"dimension must be >= 2, got {N}")
    return N * N / 4.0


def cone_lambda1(cone: ConeSpec, tol=1e-8) -> float:
    if cone.sigma == "FullSphere":
        return 0.0
    if cone.sigma == "Arc":
        return arc_lambda1(cone.angle)
    return cap_lambda1(cone.N, cone.angle, tol).lambda1


# ---------------------------------------------------------------- Bessel


def _j0_series(x):
    """``J_0(x)`` by its power series, with a bound on the truncation error.

    Terms are ``(-1)^k (x/2)^(2k) / (k!)^2``.  Once they decrease in
    magnitude the series alternates with decreasing terms, so the tail is
    bounded by the first omitted term.
    """
    y = 0.25 * x * x
    term = 1.0
    total = 1.0
    k = 0
    while True:
        k += 1
        term *= -y / (k * k)
        total += term
        if k > y and abs(term) < 1e-18:
            nxt = abs(term) * y / ((k + 1) ** 2)
            # rounding of ~k partial sums each carrying 1 ulp of the largest term
            rounding = 4.0 * k * np.finfo(float).eps * max(1.0, math.exp(x))
            return total, nxt + rounding


def bessel_j0_zero(tol=1e-14, lo=2.0, hi=3.0):
    """First positive zero of ``J_0`` by bisection on ``[2, 3]``."""
    flo, _ = _j0_series(lo)
    fhi, _ = _j0_series(hi)
    if flo * fhi >= 0:
        raise OutOfRange("J0 does not change sign on the bracket")
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        fm, bound = _j0_series(mid)
        if abs(fm) <= bound:
            # sign undecidable in double precision; the bracket is as tight as it gets
            break
        if (fm > 0) == (flo > 0):
            lo, flo = mid, fm
        else:
            hi = mid
    return 0.5 * (lo + hi), hi - lo


def bessel_disc_lambda1(tol: float = 1e-10) -> float:
    """``lambda_1`` of the unit disc, ``j_{0,1}^2``, to absolute accuracy ``tol``."""
    if not tol > 0:
        raise OutOfRange("tol must be positive")
    # d(j^2) = 2 j dj and j < 3
    root, _ = bessel_j0_zero(tol=min(tol / 6.0, 1e-3))
    return root * root


def radial_disc_lambda1(n_nodes: int = 200) -> float:
    """Unit-disc eigenvalue from P1 elements for ``-(r u')' = lam r u``, ``u(1) = 0``.

    An independent check on the Bessel constant: the radial form of the
    Dirichlet Laplacian with its natural condition at ``r = 0``.
    """
    n_el = n_nodes - 1
    h = 1.0 / n_el
    r = np.linspace(0.0, 1.0, n_nodes)
    a, b = r[:-1], r[1:]
    k = 0.5 * (a + b) / h  # exact for the linear weight
    m00 = h * (3 * a + b) / 12.0
    m01 = h * (a + b) / 12.0
    m11 = h * (a + 3 * b) / 12.0
    kd = np.zeros(n_nodes)
    kd[:-1] += k
    kd[1:] += k
    md = np.zeros(n_nodes)
    md[:-1] += m00
    md[1:] += m11
    K = sp.diags([kd[:-1], -k[:-1], -k[:-1]], [0, 1, -1], format="csr")
    M = sp.diags([md[:-1], m01[:-1], m01[:-1]], [0, 1, -1], format="csr")
    return smallest_eigenpair(K, M, tol=1e-9).mu


# -------------------------------------------------------- Emden-Fowler check


def _gauss_panels(edges, order):
    xg, wg = roots_legendre(order)
    a, b = edges[:-1, None], edges[1:, None]
    x = 0.5 * (a + b) + 0.5 * (b - a) * xg[None, :]
    w = 0.5 * (b - a) * wg[None, :]
    return x.reshape(-1), w.reshape(-1)


def _spline(samples, length, name):
    v = np.asarray(samples, dtype=float)
    if v.ndim != 1 or len(v) < 4:
        raise OutOfRange(f"{name} needs at least 4 samples")
    if not np.all(np.isfinite(v)):
        raise OutOfRange(f"{name} has non-finite samples")
    grid = np.linspace(0.0, length, len(v))
    return CubicSpline(grid, v), grid


def _ef_integrals(cone, w, g, S, order):
    scale = max(1.0, float(np.abs(w.c).max()) * float(np.abs(g.c).max()))
    # cylinder side: s in (0, S), sigma in Sigma
    s, ws = _gauss_panels(w.x, order)
    ang, wa = _gauss_panels(g.x, order)
    if cone.sigma == "Arc":
        dens = np.ones_like(ang)
    else:
        dens = sphere_area(cone.N - 2) * np.sin(ang) ** (cone.N - 2)
    W2 = ws @ w(s) ** 2
    W1 = ws @ w(s, 1) ** 2
    G2 = (wa * dens) @ g(ang) ** 2
    G1 = (wa * dens) @ g(ang, 1) ** 2
    rhs2 = W2 * G2
    rhs1 = (cone.N - 2) ** 2 / 4.0 * rhs2 + W1 * G2 + W2 * G1

    # physical side: r = exp(-s) on geometric panels; u separates into a
    # radial factor times g, so the 2-D integral is a product of 1-D sums
    r_edges = np.exp(-w.x[::-1])
    r, wr = _gauss_panels(r_edges, order)
    N = cone.N
    sv = -np.log(r)
    p = 0.5 * (2 - N)
    radial = r**p * w(sv)
    # d/dr [r^p w(-log r)] = r^(p-1) (p w - w')
    d_radial = r ** (p - 1) * (p * w(sv) - w(sv, 1))
    jac = wr * r ** (N - 1)
    # |grad u|^2 = u_r^2 + |grad_sigma u|^2 / r^2
    lhs1 = float(jac @ d_radial**2) * G2 + float(jac @ (radial / r) ** 2) * G1
    lhs2 = float(jac @ (radial / r) ** 2) * G2
    return np.array([lhs1, float(rhs1), lhs2, float(rhs2)]), scale


def emden_fowler_check(cone: ConeSpec, w, g, S: float = DEFAULT_CYLINDER_LENGTH, order: int = 8) -> dict:
    """Both sides of the Emden-Fowler energy and weighted-mass identities.

    ``w`` samples a profile on a uniform grid of ``[0, S]`` and ``g`` an
    angular profile on a uniform grid of the cross-section: ``[0, theta0]``
    for an Arc, the polar angle ``[0, phi0]`` for an axisymmetric Cap.
    Both are interpolated by cubic splines and define

        u(x) = |x|^((2-N)/2) w(-log|x|) g(x/|x|).

    ``lhs1``/``lhs2`` integrate ``|grad u|^2`` and ``|x|^-2 u^2`` over the
    truncated cone ``exp(-S) < |x| < 1`` in physical radial coordinates;
    ``rhs1``/``rhs2`` are the cylinder-side integrals.

    Raises
    ------
    QuadratureFailure
        If doubling the Gauss order moves any of the four values by more
        than ``1e-10`` relative.
    """
    if cone.sigma == "FullSphere":
        raise OutOfRange("emden_fowler_check needs an Arc or Cap cross-section")
    if not S > 0:
        raise OutOfRange("cylinder length must be positive")
    ws, _ = _spline(w, S, "w")
    gs, _ = _spline(g, cone.angle, "g")
    v, scale = _ef_integrals(cone, ws, gs, S, order)
    v2, _ = _ef_integrals(cone, ws, gs, S, 2 * order)
    if np.any(np.abs(v2 - v) > 1e-10 * np.maximum(np.abs(v2), 1e-300 + 0 * v2) + 1e-14 * scale):
        raise QuadratureFailure("Emden-Fowler integrals not converged under Gauss-order doubling")
    lhs1, rhs1, lhs2, rhs2 = (float(x) for x in v2)
    return {"lhs1": lhs1, "rhs1": rhs1, "lhs2": lhs2, "rhs2": rhs2}


def seeded_profiles(cone: ConeSpec, seed: int, S: float = DEFAULT_CYLINDER_LENGTH, modes: int = 4,
                    n_s: int = 2001, n_angle: int = 801):
    """Reproducible random ``(w, g)`` samples for :func:`emden_fowler_check`.

    ``w`` is a sine series on ``[0, S]``; ``g`` a sine series on the arc or,
    on a cap, a cosine series even at the pole and zero at ``phi0``.
    Coefficients come from :class:`hardylab.rng.LCG`.
    """
    from .rng import LCG

    rng = LCG(seed)
    a = rng.symmetric(modes)
    b = rng.symmetric(modes)
    a[0] = b[0] = 1.0  # keep the profiles away from zero
    s = np.linspace(0.0, S, n_s)
    k = np.arange(1, modes + 1)
    w = np.sin(np.pi * np.outer(s, k) / S) @ a
    ang = np.linspace(0.0, cone.angle, n_angle)
    if cone.sigma == "Arc":
        g = np.sin(np.pi * np.outer(ang, k) / cone.angle) @ b
    else:
        g = np.cos(np.pi * np.outer(ang, 2 * k - 1) / (2.0 * cone.angle)) @ b
    return w, g
