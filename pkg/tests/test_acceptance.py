"""The twelve acceptance criteria, each at its stated tolerance.

A one-line PASS/FAIL summary per criterion is printed at the end of the
pytest run.
"""

import math
import time

from hardylab import (
    DomainSpec,
    arc_lambda1,
    bessel_disc_lambda1,
    cap_lambda1,
    certify_attained,
    compute_mu,
    concentration_profile,
    cone_hardy_constant,
    dense_oracle,
    emden_fowler_check,
    phi_delta_integral,
    scan_lambda,
    smallest_eigenpair,
    verify_remainder,
)
from hardylab.analysis import ATTAINED, MeshRecipe, pencil_for
from hardylab.cone1d import ConeSpec, radial_disc_lambda1, seeded_profiles

HALF_DISK = DomainSpec.half_disk(1.0)
ANNULAR = DomainSpec.annular_sector(4 * math.pi / 3, 1.0, 400.0)
QUARTER = DomainSpec.sector(math.pi / 2, 1.0)
ANNULAR_EXACT = math.pi**2 / (4 * math.pi / 3) ** 2 + math.pi**2 / math.log(400.0) ** 2
LEVELS = (0, 1, 2)


def test_c01_cone_law(criterion):
    t0 = time.perf_counter()
    errs = [abs(arc_lambda1(t) - math.pi**2 / t**2) for t in (math.pi / 2, math.pi, 1.5 * math.pi, 2 * math.pi)]
    elapsed = time.perf_counter() - t0
    criterion(1, f"max err {max(errs):.1e}, 2pi -> {arc_lambda1(2 * math.pi)}, {elapsed:.3f}s")
    assert max(errs) <= 1e-12
    assert arc_lambda1(2 * math.pi) == 0.25
    assert elapsed < 1.0


def test_c02_hemisphere_spectra(criterion):
    t0 = time.perf_counter()
    errs = {N: abs(cap_lambda1(N, math.pi / 2).lambda1 - (N - 1)) for N in (3, 4, 5, 6)}
    exact = all(cone_hardy_constant(N, N - 1) == N * N / 4 for N in (3, 4, 5, 6))
    elapsed = time.perf_counter() - t0
    criterion(2, f"max |lambda1 - (N-1)| {max(errs.values()):.1e}, mu0 = N^2/4 exact: {exact}, {elapsed:.2f}s")
    assert max(errs.values()) <= 1e-6
    assert exact
    assert elapsed < 10.0


def test_c03_bessel_constant(criterion):
    lam = bessel_disc_lambda1(1e-10)
    fe = radial_disc_lambda1(200)
    criterion(3, f"j01^2 = {lam:.12f}, radial FE diff {abs(fe - lam):.1e}")
    assert abs(lam - 5.7831859629) <= 1e-9
    assert abs(fe - lam) <= 1e-4


def test_c04_emden_fowler(criterion):
    t0 = time.perf_counter()
    worst = 0.0
    for cone in (ConeSpec.arc(2 * math.pi / 3), ConeSpec.cap(3, 1.2)):
        for seed in range(20):
            w, g = seeded_profiles(cone, seed)
            r = emden_fowler_check(cone, w, g)
            worst = max(worst, abs(r["lhs1"] - r["rhs1"]) / r["lhs1"], abs(r["lhs2"] - r["rhs2"]) / r["lhs2"])
    elapsed = time.perf_counter() - t0
    criterion(4, f"40 pairs, worst relative gap {worst:.1e}, {elapsed:.1f}s")
    assert worst <= 1e-6
    assert elapsed < 30.0


def test_c05_half_disk(criterion):
    t0 = time.perf_counter()
    mus = [compute_mu(HALF_DISK, 0.0, lev).mu_h for lev in LEVELS]
    elapsed = time.perf_counter() - t0
    criterion(5, f"mu_h by level {[round(m, 5) for m in mus]}, {elapsed:.1f}s")
    assert 0.999 <= mus[-1] <= 1.03
    assert all(b <= a + 1e-6 for a, b in zip(mus, mus[1:]))
    assert elapsed < 120.0


def test_c06_annular_sector(criterion):
    t0 = time.perf_counter()
    results = [compute_mu(ANNULAR, 0.0, lev) for lev in LEVELS]
    elapsed = time.perf_counter() - t0
    mus = [r.mu_h for r in results]
    cert = certify_attained(results[-1])
    criterion(6, f"mu_h {[round(m, 5) for m in mus]} vs {ANNULAR_EXACT:.5f}, {cert}, {elapsed:.1f}s")
    assert abs(mus[-1] - ANNULAR_EXACT) <= 0.02 * ANNULAR_EXACT
    assert min(mus) >= ANNULAR_EXACT - 1e-6
    assert cert == ATTAINED
    assert elapsed < 180.0


def test_c07_quarter_disk(criterion):
    mus = [compute_mu(QUARTER, 0.0, lev).mu_h for lev in LEVELS]
    criterion(7, f"mu_h by level {[round(m, 5) for m in mus]}")
    assert abs(mus[-1] - 4.0) <= 0.03 * 4.0
    assert min(mus) >= 4.0 - 1e-6


def test_c08_lambda_star_bracket(criterion):
    res = scan_lambda(HALF_DISK, (-5.0, 10.0), level=2)
    lam_lo, lam_hi = res.bracket
    mu = [s[1] for s in res.samples]
    monotone = all(b <= a for a, b in zip(mu, mu[1:]))
    criterion(8, f"bracket [{lam_lo:.4f}, {lam_hi:.4f}] ({res.status}), mu non-increasing: {monotone}")
    assert res.status == "bracketed"
    assert lam_hi >= 1.4458 - 0.01
    assert lam_lo >= 0.0
    assert monotone


def test_c09_remainder(criterion):
    t0 = time.perf_counter()
    rep = verify_remainder(HALF_DISK, sample_count=100, seed=0)
    elapsed = time.perf_counter() - t0
    criterion(9, f"min q {rep['min_q']:.4f} over {rep['samples']} samples, {elapsed:.1f}s")
    assert rep["min_q"] >= 5.7831 - 1e-3
    assert elapsed < 60.0


def test_c10_phi_delta(criterion):
    errs = []
    for R in (0.3, math.exp(-1.0)):
        for delta in (0.6, 0.75, 0.9):
            r = phi_delta_integral(R, delta)
            errs.append(abs(r["numeric"] - r["closed_form"]) / r["closed_form"])
    scaled = [(2 * d - 1) * phi_delta_integral(0.3, d)["numeric"] for d in (0.51, 0.505, 0.501)]
    gaps = [abs(s - 2 * math.pi) for s in scaled]
    monotone = gaps[0] > gaps[1] > gaps[2]
    criterion(10, f"max rel err {max(errs):.1e}, |(2d-1)I - 2pi| = {[f'{g:.2e}' for g in gaps]}")
    assert max(errs) <= 1e-6
    assert monotone
    assert all(s < 2 * math.pi for s in scaled)


def _small_pencils():
    cases = [
        (HALF_DISK, MeshRecipe(0.4, 0.5, 8)),
        (QUARTER, MeshRecipe(0.3, 0.5, 8)),
        (DomainSpec.sector(1.5 * math.pi, 1.0), MeshRecipe(0.6, 0.5, 6)),
        (DomainSpec.annular_sector(math.pi, 1.0, 5.0), MeshRecipe(0.3, 0.5, None)),
        (DomainSpec.polygon([(0, 0), (1, 0), (1, 1), (-0.5, 0.8)]), MeshRecipe(0.6, 0.5, 6)),
    ]
    for domain, rec in cases:
        for lam in (0.0, 5.0, -5.0):
            _, p = pencil_for(domain, 0, rec)
            yield domain.kind, lam, p


def test_c11_eigensolver_oracle(criterion):
    worst_gap, worst_res, count = 0.0, 0.0, 0
    for _, lam, p in _small_pencils():
        assert p.n <= 500
        A = p.operator(lam)
        r = smallest_eigenpair(A, p.W)
        ref = dense_oracle(A, p.W)[0]
        worst_gap = max(worst_gap, abs(r.mu - ref))
        worst_res = max(worst_res, r.residual)
        count += 1
    criterion(11, f"{count} pencils, max |mu - dense| {worst_gap:.1e}, max residual {worst_res:.1e}")
    assert worst_gap <= 1e-8
    assert worst_res <= 1e-10


def test_c12_concentration(criterion):
    m_hd = [float(concentration_profile(compute_mu(HALF_DISK, 0.0, lev), [0.05]).mass_fraction[0]) for lev in LEVELS]
    m_an = [
        float(concentration_profile(compute_mu(ANNULAR, 0.0, lev), [0.05 * 400.0]).mass_fraction[0])
        for lev in LEVELS
    ]
    rel = abs(m_an[-1] - m_an[-2]) / m_an[-1]
    criterion(12, f"half-disk m(0.05) {[round(m, 5) for m in m_hd]}, annular change {rel:.1e}")
    assert m_hd[0] < m_hd[1] < m_hd[2]
    assert rel < 0.05
