import numpy as np
import pytest

from floqspin import (
    DriveSpec,
    FourierField,
    POLARIZATION_NAMES,
    field_at,
    polarization_from_name,
    to_fourier,
)
from floqspin.constants import HBAR

SQ2 = np.sqrt(2.0)


def test_catalog_is_complete():
    assert len(POLARIZATION_NAMES) == 15
    assert set(POLARIZATION_NAMES) >= {"x", "y", "z", "+x+y", "+x-z", "(xy)+", "(yz)-"}


def test_linear_polarizations():
    for name, axis in (("x", 0), ("y", 1), ("z", 2)):
        p_cos, p_sin = polarization_from_name(name)
        expect = np.zeros(3)
        expect[axis] = 1.0
        assert np.allclose(p_cos, expect, atol=0)
        assert np.allclose(p_sin, 0.0, atol=0)


def test_tilted_polarizations_unit_normalized():
    p_cos, p_sin = polarization_from_name("+x+y")
    assert np.allclose(p_cos, np.array([1.0, 1.0, 0.0]) / SQ2)
    assert np.allclose(p_sin, 0.0)
    for name in ("+x+y", "+x-y", "+x+z", "+x-z", "+y+z", "+y-z"):
        p_cos, _ = polarization_from_name(name)
        assert abs(np.linalg.norm(p_cos) - 1.0) < 1e-15


def test_circular_polarizations_quadratures():
    p_cos, p_sin = polarization_from_name("(xz)+")
    assert np.allclose(p_cos, [1.0, 0.0, 0.0])
    assert np.allclose(p_sin, [0.0, 0.0, 1.0])
    p_cos, p_sin = polarization_from_name("(yz)-")
    assert np.allclose(p_cos, [0.0, 1.0, 0.0])
    assert np.allclose(p_sin, [0.0, 0.0, -1.0])


def test_unknown_polarization_rejected():
    with pytest.raises(ValueError, match="unknown polarization"):
        polarization_from_name("(zx)+")


def test_xy_plus_rotates_x_to_y():
    # Counter-clockwise seen from +z: along +x at t = 0, along +y at T/4.
    d = DriveSpec.from_name("(xy)+", hbar_omega=20.0, b_f=100.0)
    f = to_fourier(d)
    t4 = d.period / 4.0
    assert np.allclose(field_at(f, 0.0), [100.0, 0.0, 0.0], atol=1e-10)
    assert np.allclose(field_at(f, t4), [0.0, 100.0, 0.0], atol=1e-10)


def test_xz_plus_quarter_period():
    d = DriveSpec.from_name("(xz)+", hbar_omega=20.0, b_f=125.0)
    f = to_fourier(d)
    assert np.allclose(field_at(f, d.period / 4.0), [0.0, 0.0, 125.0], atol=1e-10)


def test_to_fourier_linear_x():
    d = DriveSpec.from_name("x", hbar_omega=20.0, b_f=100.0)
    f = to_fourier(d)
    assert np.allclose(f.harmonic(1), [50.0, 0.0, 0.0])
    assert np.allclose(f.harmonic(-1), [50.0, 0.0, 0.0])
    assert f.indices == (-1, 1)


def test_to_fourier_circular():
    d = DriveSpec.from_name("(xy)+", hbar_omega=20.0, b_f=100.0)
    f = to_fourier(d)
    assert np.allclose(f.harmonic(1), [50.0, 50.0j, 0.0])
    assert np.allclose(f.harmonic(-1), [50.0, -50.0j, 0.0])


def test_to_fourier_zero_amplitude_empty():
    d = DriveSpec.from_name("x", hbar_omega=20.0, b_f=0.0)
    f = to_fourier(d)
    assert f.indices == ()
    assert np.allclose(field_at(f, 1.23), 0.0)


def test_polarization_round_trip(rng):
    for name in POLARIZATION_NAMES:
        d = DriveSpec.from_name(name, hbar_omega=20.0, b_f=1.0)
        p_plus, p_minus = d.p_plus, d.p_minus
        assert np.allclose(p_plus + p_minus, d.p_cos, atol=0)
        assert np.allclose((p_plus - p_minus) / 1j, d.p_sin, atol=1e-16)


def test_field_matches_quadrature_form(rng):
    # Direct check against b_f (p_cos cos + p_sin sin) at random times.
    for name in ("x", "+x-z", "(yz)+", "(xy)-"):
        d = DriveSpec.from_name(name, hbar_omega=20.0, b_f=137.0)
        f = to_fourier(d)
        omega = d.hbar_omega / HBAR
        for t in rng.uniform(-5, 5, size=100):
            direct = d.b_f * (d.p_cos * np.cos(omega * t) + d.p_sin * np.sin(omega * t))
            assert np.abs(field_at(f, t) - direct).max() < 1e-12


def test_field_periodicity(rng):
    d = DriveSpec.from_name("(xz)-", hbar_omega=20.0, b_f=200.0)
    f = to_fourier(d)
    for t in rng.uniform(0, 1, size=20):
        assert np.abs(field_at(f, t + f.period) - field_at(f, t)).max() < 1e-12 * 200


def test_zero_crossing_of_cosine():
    d = DriveSpec.from_name("x", hbar_omega=20.0, b_f=100.0)
    f = to_fourier(d)
    assert np.abs(field_at(f, d.period / 4.0)).max() < 1e-10


def test_fourier_field_reality_enforced():
    v = np.array([1.0 + 2.0j, 0.0, 3.0])
    f = FourierField(20.0, {1: v, -1: v.conj()})
    assert np.allclose(f.harmonic(-1), v.conj())
    with pytest.raises(ValueError, match="reality"):
        FourierField(20.0, {1: v, -1: v})


def test_fourier_field_rejects_complex_dc():
    with pytest.raises(ValueError, match="real"):
        FourierField(20.0, {0: np.array([1.0j, 0.0, 0.0])})


def test_fourier_field_negative_only_input():
    v = np.array([1.0 - 1.0j, 2.0, 0.0])
    f = FourierField(20.0, {-2: v})
    assert np.allclose(f.harmonic(-2), v)
    assert np.allclose(f.harmonic(2), v.conj())
    assert f.indices == (-2, 2)


def test_fourier_field_scaling():
    f = FourierField(20.0, {1: np.array([1.0, 1.0j, 0.0]), 0: np.array([2.0, 0.0, 0.0])})
    g = f.scaled(3.0)
    assert np.allclose(g.harmonic(1), [3.0, 3.0j, 0.0])
    assert np.allclose(g.harmonic(0), [6.0, 0.0, 0.0])


def test_fourier_field_multi_harmonic_is_real(rng):
    harmonics = {
        0: rng.normal(size=3),
        1: rng.normal(size=3) + 1j * rng.normal(size=3),
        3: rng.normal(size=3) + 1j * rng.normal(size=3),
    }
    f = FourierField(20.0, harmonics)
    for t in rng.uniform(0, 1, size=20):
        b = sum(f.harmonic(m) * np.exp(-1j * m * 20.0 / HBAR * t) for m in f.indices)
        assert np.abs(b.imag).max() < 1e-12


def test_drive_validation():
    with pytest.raises(ValueError):
        DriveSpec.from_name("x", hbar_omega=-1.0)
    with pytest.raises(ValueError):
        DriveSpec(hbar_omega=20.0, b_f=np.inf)
    with pytest.raises(ValueError):
        field_at(FourierField(20.0, {}), np.nan)
