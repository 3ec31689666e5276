import math

import numpy as np
import pytest

from alpha_vortex import (Blob, ConfinementParams, DiagnosticsConfig, DiskPatch, DomainError, InputError,
                          ParticleSystem, VorticitySpec, discretize, envelope, eta, filtered_inertia,
                          filtered_tail, lambda_for, mass_tail, moments, radial_speed_profile, record,
                          recenter, support_radius, gamma_complement)
from alpha_vortex.diagnostics import (blob_mass_outside_disk, fit_envelope_constant, fit_tail_constant,
                                      mass_outside, tail_transfer_bound, timeseries_header, write_timeseries_csv)
from alpha_vortex.oracles import filtered_inertia_grid, filtered_inertia_quadrature

EA = Blob("euler-alpha", 0.1)


def test_moments_examples():
    mo = moments(ParticleSystem([[-1, 0], [1, 0]], [1, 1], EA))
    assert (mo.mass, mo.inertia) == (2, 2) and np.array_equal(mo.center, [0, 0])
    mo = moments(ParticleSystem([[2.0, -3.0]], [0.5], EA))
    assert np.array_equal(mo.center, [1.0, -1.5]) and mo.inertia == 0.5 * 13
    assert np.array_equal(mo.center_of_mass, [2.0, -3.0])


def test_disk_moments_n64():
    s = discretize(VorticitySpec.analytic(DiskPatch((0.0, 0.0), 1.0, 1.0)), 64, EA)
    mo = moments(s)
    assert abs(mo.mass - math.pi) <= 1e-3 and abs(mo.inertia - math.pi / 2) <= 1e-2
    r = support_radius(s)
    assert abs(r - 1.0) <= math.sqrt(2) / 2 / 64


def test_first_moment_bound_random():
    rng = np.random.default_rng(0)
    for _ in range(50):
        n = int(rng.integers(1, 40))
        mo = moments(ParticleSystem(rng.normal(size=(n, 2)) * 3, rng.uniform(size=n), EA))
        assert mo.first_abs_moment <= 0.5 * (mo.mass + mo.inertia)


def test_filtered_inertia():
    rng = np.random.default_rng(1)
    s = ParticleSystem(rng.normal(size=(7, 2)), rng.uniform(size=7), EA)
    mo = moments(s)
    assert filtered_inertia(s) == mo.inertia + 4 * 0.01 * mo.mass
    g = Blob("gaussian", 0.3)
    assert filtered_inertia(ParticleSystem([[0.0, 0.0]], [1.0], g)) == pytest.approx(0.09, rel=1e-15)
    with pytest.raises(DomainError):
        filtered_inertia(ParticleSystem([[0.0, 0.0]], [1.0], Blob("krasny", 0.1)))


@pytest.mark.parametrize("blob", [Blob("euler-alpha", 0.1), Blob("gaussian", 0.15)])
def test_filtered_inertia_quadrature_cross_check(blob):
    rng = np.random.default_rng(2)
    pos = rng.uniform(-0.5, 0.5, size=(5, 2))
    m = rng.uniform(0.2, 1.0, 5)
    s = ParticleSystem(pos, m, blob)
    assert abs(filtered_inertia_quadrature(pos, m, blob) - filtered_inertia(s)) <= 1e-4
    if blob.family.value == "gaussian":
        assert abs(filtered_inertia_grid(pos, m, blob, 3.0, 0.01) - filtered_inertia(s)) <= 1e-4


def test_support_radius():
    s = ParticleSystem([[-1, 0], [1, 0]], [1, 1], EA)
    assert support_radius(s) == 1.0
    q = ParticleSystem([[0.1, 0], [5, 0]], [1, 1], EA)
    assert support_radius(q, 0.5) == 0.1
    for bad in (0.0, 1.5, -0.2):
        with pytest.raises(InputError):
            support_radius(s, bad)
    with pytest.raises(DomainError):
        support_radius(ParticleSystem([[0, 0], [1, 0]], [1, -0.5], EA), 0.5)
    off = ParticleSystem([[4.0, 0.0], [6.0, 0.0]], [1, 1], EA)
    assert support_radius(off, centered=True) == 1.0


def test_envelope():
    p = ConfinementParams(R0=0.5, C=2.0)
    assert envelope(0.0, p) == 4.0
    assert envelope(math.e - 2, p) == pytest.approx(4.0 + 2.0 * (math.e - 2) ** 0.25, rel=1e-15)
    t = np.linspace(0, 100, 1001)
    assert np.all(np.diff(envelope(t, p)) >= 0)
    with pytest.raises(DomainError):
        envelope(-1.0, p)
    with pytest.raises(InputError):
        ConfinementParams(R0=0.0, C=1.0)


def test_fit_envelope_constant_is_tight():
    t = np.linspace(0, 2, 21)
    r = 1.0 + 0.3 * (t * np.log(2 + t)) ** 0.25
    C = fit_envelope_constant(t, r, window=1.0)
    assert C == pytest.approx(0.3, rel=1e-12)
    assert fit_envelope_constant(t, np.ones_like(t)) == 1e-12
    with pytest.raises(InputError):
        fit_envelope_constant([0.0], [1.0])


def test_radial_speed_profile_examples():
    radii = np.geomspace(5, 20, 7)
    single = radial_speed_profile(ParticleSystem([[0.0, 0.0]], [1.0], EA), radii)
    assert np.max(single.max_radial_speed) <= 1e-17
    pair = radial_speed_profile(ParticleSystem([[-0.5, 0.0], [0.5, 0.0]], [1.0, 1.0], EA), radii)
    assert pair.loglog_slope() <= -2.8
    off = radial_speed_profile(ParticleSystem([[0.5, 0.0]], [1.0], EA), radii)
    assert off.loglog_slope() == pytest.approx(-2.0, abs=0.2)
    inside = radial_speed_profile(ParticleSystem([[0.0, 0.0], [3.0, 0.0]], [1.0, 1.0], EA), [1.0, 10.0])
    assert inside.inside_support.tolist() == [True, False]


def test_eta_properties():
    assert eta(0.0) == 0.5
    assert eta(40.0) >= 1 - 1e-17 and eta(-40.0) <= 1e-17
    assert eta(1e6) == 1.0 and eta(-1e6) == 0.0
    s = np.linspace(-20, 20, 4001)
    h = 1e-4
    d1 = (eta(s + h) - eta(s - h)) / (2 * h)
    d2 = (eta(s + h) - 2 * eta(s) + eta(s - h)) / h**2
    assert np.all(d1 > 0)
    assert np.all(d1 <= np.minimum(eta(s), np.exp(-np.abs(s))) + 1e-6)
    assert np.all(np.abs(d2) <= eta(s) + 1e-6)


def test_lambda_for():
    assert lambda_for(math.e * 1.5, 1.5, 6) == pytest.approx(1 / 32, rel=1e-15)
    assert lambda_for(3.0, 1.0, 6) > lambda_for(4.0, 1.0, 6) > lambda_for(4.0, 1.0, 7)
    with pytest.raises(DomainError):
        lambda_for(math.exp(1 / 32), 1.0, 6)
    with pytest.raises(DomainError):
        lambda_for(0.5, 1.0, 6)


def test_mass_tail_examples():
    origin = ParticleSystem(np.zeros((3, 2)), [1.0, 2.0, 0.5], EA)
    lam = 0.1
    assert mass_tail(origin, 1.0, lam) == pytest.approx(3.5 * eta(-1 / lam), rel=1e-14)
    assert mass_tail(ParticleSystem([[0.0, 2.0]], [1.0], EA), 2.0, 0.3) == 0.5
    for bad in (0.0, 1.0, 1.5):
        with pytest.raises(InputError):
            mass_tail(origin, 1.0, bad)


def test_half_mass_lower_bound_random():
    rng = np.random.default_rng(3)
    for _ in range(100):
        n = int(rng.integers(1, 50))
        s = ParticleSystem(rng.normal(size=(n, 2)) * 2, rng.uniform(size=n), EA)
        r, lam = rng.uniform(0.5, 4), rng.uniform(0.01, 0.99)
        out = mass_outside(s, r)
        f = mass_tail(s, r, lam)
        assert 0.5 * out <= f
        if out > 0:
            assert 0.5 * out < f


def test_initial_tail_smallness():
    s = discretize(VorticitySpec.analytic(DiskPatch((0.0, 0.0), 1.0, 1.0)), 16, EA)
    R0 = support_radius(s, centered=True)
    for r in (2.01 * R0, 2.5 * R0, 4 * R0):
        lam = lambda_for(r, R0, 6)
        assert mass_tail(s, r, lam, centered=True) <= s.total_mass * math.exp(-1 / (2 * lam))


def test_filtered_tail_gaussian_closed_form():
    g = Blob("gaussian", 0.2)
    s = ParticleSystem([[0.0, 0.0]], [1.0], g)
    for r in (0.05, 0.2, 0.5):
        assert filtered_tail(s, r) == pytest.approx(math.exp(-(r / 0.2) ** 2), rel=1e-10, abs=1e-300)


def test_blob_mass_outside_disk_offcenter_oracle():
    # Gaussian mass outside the disk by direct 2D quadrature in polar coordinates
    g = Blob("gaussian", 0.3)
    d, r = 0.4, 0.5
    rho = np.linspace(0, 3, 3001)[1:-1] + 0.0005
    th = np.linspace(0, 2 * np.pi, 2048, endpoint=False)
    R, T = np.meshgrid(rho, th, indexing="ij")
    x, y = R * np.cos(T), R * np.sin(T)
    dens = np.exp(-((x - d) ** 2 + y**2) / 0.09) / (np.pi * 0.09)
    ref = np.sum(dens * (R > r) * R) * (rho[1] - rho[0]) * (th[1] - th[0])
    assert blob_mass_outside_disk(g, d, r) == pytest.approx(ref, abs=1e-4)
    # the disk lies beyond distance 2 = 20 alpha of the blob center
    far = blob_mass_outside_disk(EA, 3.0, 1.0)
    assert 1.0 - gamma_complement(EA, 2.0) <= far < 1.0


def test_filtered_tail_additive():
    g = Blob("gaussian", 0.2)
    s = ParticleSystem([[0.1, 0.0], [0.0, -0.3], [0.5, 0.5]], [0.4, 0.6, 1.0], g)
    parts = sum(filtered_tail(ParticleSystem([p], [m], g), 0.6) for p, m in zip(s.positions, s.masses))
    assert filtered_tail(s, 0.6) == pytest.approx(parts, rel=1e-14)


def test_tail_transfer_inequality_exponential_term():
    c = fit_tail_constant(EA, np.linspace(0.2, 6.0, 200))
    rng = np.random.default_rng(4)
    s = ParticleSystem(rng.uniform(-0.2, 0.2, size=(20, 2)), rng.uniform(size=20), EA)
    for r in (1.0, 2.0, 3.0):
        assert mass_outside(s, r / 2) == 0
        assert filtered_tail(s, r) <= tail_transfer_bound(s, r, c)
    with pytest.raises(DomainError):
        fit_tail_constant(Blob("krasny", 0.1), np.linspace(0.2, 60.0, 200))


def test_record_and_csv(tmp_path):
    s = discretize(VorticitySpec.analytic(DiskPatch((0.0, 0.0), 1.0, 1.0)), 8, EA)
    R0 = support_radius(s, centered=True)
    cfg = DiagnosticsConfig(probe_radii=(10.0, 20.0), fr_radii=(2.5, 3.0))
    rec = record(s, ConfinementParams(R0, 0.1), cfg)
    mo = moments(s)
    assert rec.moments.mass == mo.mass and rec.moments.inertia == mo.inertia
    assert rec.support_radius_max <= R0 and rec.envelope == 8 * R0
    assert np.all(rec.fr <= s.total_mass * np.exp(-1 / (2 * np.array([lambda_for(r, R0) for r in (2.5, 3.0)]))))
    assert rec.max_radial_speed.shape == (2,) and not rec.flags
    kr = record(s.with_blob(Blob("krasny", 0.1)), None, cfg)
    assert math.isnan(kr.filtered_inertia) and "filtered_inertia" in kr.flags
    assert np.all(np.isnan(kr.fr)) and math.isnan(kr.envelope)
    f = tmp_path / "ts.csv"
    write_timeseries_csv(f, [rec, rec], cfg)
    lines = f.read_text().splitlines()
    assert lines[0] == ",".join(timeseries_header(cfg))
    assert lines[0] == ("t,mass,center_x,center_y,inertia,filtered_inertia,abs_moment,r_supp_max,r_supp_q99,"
                        "max_radial_speed@10,max_radial_speed@20,f_r@2.5,f_r@3,envelope")
    assert len(lines) == 3


def test_record_flags_probe_inside_support():
    s = ParticleSystem([[0.0, 0.0], [3.0, 0.0]], [1.0, 1.0], EA)
    rec = record(s, ConfinementParams(1.5, 1.0), DiagnosticsConfig(probe_radii=(1.0, 30.0), fr_radii=(1.0,)))
    assert "radial_speed_inside_support" in rec.flags
    assert "f_r@1" in rec.flags and math.isnan(rec.fr[0])
