import json
import math

import numpy as np
import pytest

from hardylab.analysis import (
    ATTAINED,
    INCONCLUSIVE,
    MeshRecipe,
    certify_attained,
    compute_mu,
    concentration_profile,
    phi_delta_integral,
    radial_reduction,
    scan_lambda,
    verify_remainder,
)
from hardylab.assembly import rayleigh_quotient
from hardylab.cone1d import bessel_disc_lambda1
from hardylab.errors import DomainNotHalfPlane, DomainNotSector, OutOfRange
from hardylab.geometry import DomainSpec
from hardylab.io import dumps_record

HALF_DISK = DomainSpec.half_disk(1.0)
QUARTER = DomainSpec.sector(math.pi / 2, 1.0)
ANNULAR = DomainSpec.annular_sector(4 * math.pi / 3, 1.0, 400.0)
ANNULAR_EXACT = math.pi**2 / (4 * math.pi / 3) ** 2 + math.pi**2 / math.log(400.0) ** 2
COARSE = MeshRecipe(0.35, 0.5, 16)


def test_certify_examples():
    assert certify_attained(0.8374, 1e-6, 2) == ATTAINED
    assert certify_attained(1.01, 0.0, 2) == INCONCLUSIVE
    assert certify_attained(0.9999999, 1e-3, 2) == INCONCLUSIVE
    assert certify_attained(2.2, 1e-6, 3) == ATTAINED


def test_result_invariants():
    r = compute_mu(HALF_DISK, 0.0, level=0, recipe=COARSE)
    assert r.mu_h > 0
    assert abs(rayleigh_quotient(r.pencil, r.eig.coeffs, 0.0) - r.mu_h) <= 10 * 1e-10 * r.mu_h
    assert 0 <= r.quadrature_tol < 1e-6
    record = json.loads(dumps_record(r.to_dict()))
    assert record["mu_h"] == r.mu_h


def test_half_disk_is_above_mu_plus():
    r = compute_mu(HALF_DISK, 0.0, level=0)
    assert 1.0 < r.mu_h < 1.2
    assert certify_attained(r) == INCONCLUSIVE


def test_quarter_sector_approaches_four_from_above():
    r = compute_mu(QUARTER, 0.0, level=0)
    assert 4.0 < r.mu_h < 4.5


def test_annular_sector_galerkin_floor():
    r = compute_mu(ANNULAR, 0.0, level=0)
    assert r.mu_h >= ANNULAR_EXACT - 1e-6
    assert abs(r.mu_h - ANNULAR_EXACT) < 0.02 * ANNULAR_EXACT
    assert certify_attained(r) == ATTAINED


@pytest.mark.parametrize("domain", [HALF_DISK, QUARTER, DomainSpec.polygon([(0, 0), (1, 0), (1, 1), (-0.5, 0.8)])])
def test_dilation_invariance(domain):
    # default target_h is relative to the domain scale, so the mesh dilates too
    recipe = MeshRecipe(None, 0.5, 16)
    a = compute_mu(domain, 0.0, level=0, recipe=recipe)
    b = compute_mu(domain.scaled(3.7), 0.0, level=0, recipe=recipe)
    assert abs(a.mu_h - b.mu_h) <= 1e-12 * a.mu_h


def test_monotone_in_lambda():
    mus = [compute_mu(HALF_DISK, lam, level=0, recipe=COARSE).mu_h for lam in (-20, -5, 0, 5, 10, 30)]
    assert all(a >= b for a, b in zip(mus, mus[1:]))
    assert mus[0] > mus[-1]


def test_level_out_of_range():
    with pytest.raises(OutOfRange):
        compute_mu(HALF_DISK, 0.0, level=7)
    with pytest.raises(OutOfRange):
        compute_mu(HALF_DISK, math.inf, level=0)


def test_scan_half_disk_bracket():
    r = scan_lambda(HALF_DISK, (-5.0, 10.0), level=0, bisect_tol=0.05, recipe=COARSE)
    assert r.status == "bracketed"
    lo, hi = r.bracket
    assert lo >= bessel_disc_lambda1() / 4 - 0.01
    assert lo >= 0 and hi - lo <= 0.05
    assert r.certificate == ATTAINED
    mus = [s[1] for s in r.samples]
    assert all(a >= b for a, b in zip(mus, mus[1:]))


def test_scan_reports_missing_crossing():
    r = scan_lambda(HALF_DISK, (-5.0, 1.0), level=0, recipe=COARSE)
    assert r.status == "predicate_never_true"
    assert r.bracket == (1.0, None)
    assert r.certificate == INCONCLUSIVE


def test_scan_annular_upper_edge_negative():
    recipe = MeshRecipe(0.5, 0.5, 16)
    r = scan_lambda(ANNULAR, (-1.0, 1.0), level=0, bisect_tol=1e-6, recipe=recipe)
    # attained at lam = 0 already; lam* is slightly negative since M/W ~ r^2 on (1, 400)
    if r.status == "predicate_true_at_lower_end":
        assert r.bracket[1] == -1.0
    else:
        assert r.status == "bracketed"
        assert r.bracket[1] < 0
    assert r.certificate == ATTAINED


def test_scan_rejects_bad_range():
    with pytest.raises(OutOfRange):
        scan_lambda(HALF_DISK, (1.0, 1.0))
    with pytest.raises(OutOfRange):
        scan_lambda(HALF_DISK, (0.0, 1.0), bisect_tol=0.0)


def test_concentration_profile_invariants():
    r = compute_mu(HALF_DISK, 0.0, level=0, recipe=COARSE)
    radii = np.geomspace(1e-6, 2.0, 60)
    prof = concentration_profile(r, radii)
    assert np.all(np.diff(prof.mass_fraction) >= 0)
    assert abs(prof.mass_fraction[-1] - 1.0) <= 1e-12
    assert prof.level == 0


def test_concentration_support_away_from_origin():
    r = compute_mu(DomainSpec.annular_sector(math.pi, 2.0, 5.0), 0.0, level=0, recipe=MeshRecipe(0.3, 0.5, None))
    values = np.ones(r.mesh.n_vertices)
    values[r.mesh.boundary] = 0.0
    prof = concentration_profile(r, [0.5, 1.0, 1.99, 5.0], values)
    assert np.all(prof.mass_fraction[:3] == 0.0)
    assert np.isclose(prof.mass_fraction[-1], 1.0)


def test_remainder_half_disk():
    rep = verify_remainder(HALF_DISK, 20, seed=1, include_minimizer=True)
    assert rep["samples"] == 21
    assert rep["min_q"] >= 5.7831
    assert rep["holds"] == {"diameter": True, "cone": True}
    assert np.isclose(rep["floors"]["cone"], bessel_disc_lambda1(), rtol=1e-12)
    assert np.isclose(rep["floors"]["diameter"], bessel_disc_lambda1() / 4, rtol=1e-12)


def test_remainder_is_seeded():
    a = verify_remainder(HALF_DISK, 5, seed=42)
    b = verify_remainder(HALF_DISK, 5, seed=42)
    c = verify_remainder(HALF_DISK, 5, seed=43)
    assert a == b
    assert a["min_q"] != c["min_q"]


def test_remainder_cone_mode():
    rep = verify_remainder(QUARTER, 20, seed=0, mode="cone", include_minimizer=True)
    assert rep["mu0"] == 4.0
    assert rep["min_q"] >= bessel_disc_lambda1() - 1e-4


def test_remainder_errors():
    with pytest.raises(DomainNotHalfPlane):
        verify_remainder(ANNULAR, 2)
    with pytest.raises(DomainNotSector):
        verify_remainder(DomainSpec.polygon([(0, 0), (1, 0), (1, 1), (0, 1)]), 2, mode="cone")
    with pytest.raises(OutOfRange):
        verify_remainder(HALF_DISK, 0)
    with pytest.raises(OutOfRange):
        verify_remainder(HALF_DISK, 2, mode="sphere")


def test_phi_delta_examples():
    r = phi_delta_integral(1 / math.e, 0.75)
    assert np.isclose(r["closed_form"], 4 * math.pi, rtol=1e-14)
    r = phi_delta_integral(0.3, 0.75)
    assert np.isclose(r["closed_form"], 11.452, atol=5e-4)
    assert np.isclose(r["closed_form"], 4 * math.pi / math.sqrt(-math.log(0.3)), rtol=1e-14)
    assert abs(r["numeric"] - r["closed_form"]) <= 1e-6 * r["closed_form"]


def test_phi_delta_limit_two_pi():
    gaps = []
    for delta in (0.51, 0.505, 0.501):
        r = phi_delta_integral(0.5, delta)
        assert abs(r["numeric"] - r["closed_form"]) <= 1e-6 * r["closed_form"]
        gaps.append(abs((2 * delta - 1) * r["numeric"] - 2 * math.pi))
    assert gaps[0] > gaps[1] > gaps[2]


@pytest.mark.parametrize("R, delta", [(0.0, 0.75), (1.0, 0.75), (0.5, 0.5), (0.5, 1.0)])
def test_phi_delta_out_of_range(R, delta):
    with pytest.raises(OutOfRange):
        phi_delta_integral(R, delta)


def test_radial_reduction_zero():
    r = compute_mu(QUARTER, 0.0, level=0, recipe=COARSE)
    out = radial_reduction(r, values=np.zeros(r.mesh.n_vertices))
    assert np.all(out["psi"] == 0.0)
    assert all(v == 0.0 for v in out["functionals"].values())


def test_radial_reduction_separable_function():
    theta0 = math.pi / 2
    r = compute_mu(QUARTER, 0.0, level=2)
    x, y = r.mesh.vertices.T
    rad, th = np.hypot(x, y), np.arctan2(y, x)
    u = np.sin(math.pi * rad) * np.sin(math.pi * th / theta0)
    radii = np.linspace(0.05, 0.9, 18)
    out = radial_reduction(r, lambda t: np.sin(math.pi * t / theta0), radii, u, n_angles=96)
    assert np.allclose(out["psi"], theta0 / 2 * np.sin(math.pi * radii), rtol=0, atol=5e-3)


def test_radial_reduction_rejects_non_sector():
    r = compute_mu(DomainSpec.annular_sector(math.pi, 1.0, 3.0), 0.0, level=0, recipe=MeshRecipe(0.5, 0.5, None))
    with pytest.raises(DomainNotSector):
        radial_reduction(r)
