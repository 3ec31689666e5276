import math

import numpy as np
import pytest

from alpha_vortex import (Blob, Box, DiskPatch, InputError, ParticleSystem, QuadratureError, SmoothBump,
                          VorticitySpec, center_of_mass, discretize, from_atoms, recenter)
from alpha_vortex.diagnostics import moments
from alpha_vortex.measures import DensitySum, profile_from_dict, profile_to_dict, read_atoms_csv, write_atoms_csv

B = Blob("euler-alpha", 0.1)


class ConstantSquare:
    support_box = Box(0.0, 1.0, 0.0, 1.0)
    nonnegative = True

    def __call__(self, x, y):
        inside = (x >= 0) & (x <= 1) & (y >= 0) & (y <= 1)
        return np.where(inside, 1.0, 0.0)


def test_disk_patch_mass_n16():
    s = discretize(VorticitySpec.analytic(DiskPatch((0.0, 0.0), 1.0, 1.0)), 16, B)
    assert 700 <= s.size <= 900
    # boundary squares are not clipped, so the error is a boundary effect
    assert abs(s.total_mass - math.pi) / math.pi <= 1e-3


def test_constant_square_exact_masses():
    for n in (1, 3, 8):
        s = discretize(VorticitySpec.analytic(ConstantSquare()), n, B)
        assert s.size == n * n
        assert np.all(s.masses == pytest.approx(1 / n**2, rel=1e-15, abs=0))


def test_symmetric_patch_has_zero_center():
    s = discretize(VorticitySpec.analytic(SmoothBump((0.0, 0.0), 1.0, 2.0)), 16, B)
    assert np.max(np.abs(moments(s).center)) <= 1e-12


@pytest.mark.parametrize("radius", [1.0, 0.7])
def test_smooth_bump_refinement_order(radius):
    # Where the support edge cuts a square varies with n, so the error is not
    # monotone per doubling; it stays under the n^-2 envelope from n = 4.
    bump = SmoothBump((0.0, 0.0), radius, 1.0)
    ns = (4, 8, 16, 32, 64)
    errs = [abs(discretize(VorticitySpec.analytic(bump), n, B).total_mass - bump.total_mass) for n in ns]
    for n, e in zip(ns[1:], errs[1:]):
        assert e <= errs[0] * (ns[0] / n) ** 2
    assert errs[-1] <= 1e-8 * bump.total_mass


def test_disk_moments_n64():
    disk = DiskPatch((0.0, 0.0), 1.0, 1.0)
    s = discretize(VorticitySpec.analytic(disk), 64, B)
    mo = moments(s)
    assert abs(mo.mass - math.pi) <= 1e-3
    assert abs(mo.inertia - math.pi / 2) <= 1e-2
    assert disk.inertia_about_center == pytest.approx(math.pi / 2)


def test_nonnegative_density_gives_nonnegative_masses():
    s = discretize(VorticitySpec.analytic(SmoothBump((0.3, -0.2), 0.7, 1.0)), 16, B)
    assert s.nonnegative


def test_discretize_errors():
    spec = VorticitySpec.analytic(DiskPatch((0.0, 0.0), 1.0, 1.0))
    with pytest.raises(InputError):
        discretize(spec, 0, B)

    class Infinite(ConstantSquare):
        def __call__(self, x, y):
            return np.full(np.broadcast(x, y).shape, np.inf)

    with pytest.raises(QuadratureError):
        discretize(VorticitySpec.analytic(Infinite()), 2, B)


def test_from_atoms():
    spec = VorticitySpec.atoms([[0.0, 0.0]], [1.0])
    assert from_atoms(spec, B).size == 1
    two = from_atoms(VorticitySpec.atoms([[-1, 0], [1, 0]], [1, 1]), B)
    assert two.total_mass == 2 and np.array_equal(center_of_mass(two), [0, 0])
    with pytest.raises(InputError):
        VorticitySpec.atoms([[5.0, 0.0]], [1.0], Box(-1, 1, -1, 1))
    with pytest.raises(InputError):
        VorticitySpec.atoms(np.zeros((0, 2)), [])
    assert not VorticitySpec.atoms([[0, 0], [1, 1]], [1, -1]).nonnegative


def test_recenter_examples():
    s = ParticleSystem([[3.0, -2.0]], [1.0], B)
    r = recenter(s)
    assert np.array_equal(r.positions, [[0.0, 0.0]])
    assert np.array_equal(r.origin_shift, [3.0, -2.0])
    pair = recenter(ParticleSystem([[0.0, 0.0], [4.0, 0.0]], [1.0, 3.0], B))
    assert np.allclose(pair.positions, [[-3.0, 0.0], [1.0, 0.0]], atol=1e-15)
    same = recenter(ParticleSystem([[-1.0, 0.0], [1.0, 0.0]], [1.0, 1.0], B))
    assert np.array_equal(same.origin_shift, [0.0, 0.0])
    with pytest.raises(InputError):
        recenter(ParticleSystem([[0.0, 0.0], [1.0, 0.0]], [1.0, -1.0], B))


def test_recenter_machine_precision():
    rng = np.random.default_rng(3)
    s = recenter(ParticleSystem(rng.normal(size=(500, 2)) + [10, -7], rng.uniform(size=500), B))
    assert np.max(np.abs(moments(s).center)) <= 1e-13


def test_particle_system_is_immutable():
    s = ParticleSystem([[0.0, 0.0]], [1.0], B)
    with pytest.raises(ValueError):
        s.positions[0, 0] = 1.0
    with pytest.raises(InputError):
        ParticleSystem([[0.0, 0.0]], [1.0, 2.0], B)
    with pytest.raises(InputError):
        ParticleSystem([[0.0, 0.0]], [math.nan], B)


def test_profile_roundtrip_and_unknown_keys():
    p = DensitySum((DiskPatch((0.0, 1.0), 0.5, 2.0), SmoothBump((1.0, 0.0), 0.3, 1.0)))
    q = profile_from_dict(profile_to_dict(p))
    assert q == p
    with pytest.raises(InputError):
        profile_from_dict({"kind": "disk", "center": [0, 0], "radius": 1, "colour": "red"})
    with pytest.raises(InputError):
        profile_from_dict({"kind": "ring"})


def test_atoms_csv_roundtrip(tmp_path):
    f = tmp_path / "atoms.csv"
    write_atoms_csv(f, [[0.1, 0.2], [1 / 3, -2.0]], [1.0, 0.5])
    assert f.read_text().splitlines()[0] == "x,y,mass"
    pos, m = read_atoms_csv(f)
    assert pos[1, 0] == 1 / 3 and m.tolist() == [1.0, 0.5]
    (tmp_path / "bad.csv").write_text("a,b\n1,2\n")
    with pytest.raises(InputError):
        read_atoms_csv(tmp_path / "bad.csv")
