import numpy as np
import pytest

from floqspin import (
    SMFS_CUTOFFS,
    cancellation_solve,
    energy_sweep,
    smfs_search,
    to_fourier,
)
from conftest import make_drive, make_params


def test_linear_drive_keeps_origin():
    p = make_params(0.1)
    res = smfs_search(p, to_fourier(make_drive("x", 100.0)))
    assert np.abs(res.bs_opt).max() == 0.0
    assert res.theta < 1e-12
    assert res.gradient_norms.max() < 1e-9
    assert all(res.smfs_flags[c] == (True, True, True) for c in SMFS_CUTOFFS)


@pytest.mark.parametrize("eod", [0.0, 0.1, 1.0 / 3.0])
def test_zero_amplitude_terminates_immediately(eod):
    p = make_params(eod)
    res = smfs_search(p, to_fourier(make_drive("x", 0.0)))
    assert np.abs(res.bs_opt).max() == 0.0
    assert res.theta < 1e-12
    assert res.iterations == 0


def test_search_trace_is_monotone():
    # Objective never increases across accepted moves and the spacing only
    # shrinks, by factors of sqrt(3).
    p = make_params(0.1)
    res = smfs_search(p, to_fourier(make_drive("(xy)+", 40.0)))
    thetas = np.array([t for t, _ in res.trace])
    spacings = np.array([s for _, s in res.trace])
    assert np.all(np.diff(thetas) <= 1e-15)
    assert np.all(np.diff(spacings) <= 0)
    shrinks = spacings[:-1] / spacings[1:]
    shrinks = shrinks[shrinks > 1.0]
    assert np.allclose(shrinks, np.sqrt(3.0))
    assert res.final_spacing < 1e-5


def test_circular_handedness_antisymmetry():
    p = make_params(0.1)
    results = {}
    for pol in ("(xy)+", "(xy)-"):
        bs = np.zeros(3)
        anchor = None
        for bf in (0.0, 25.0, 50.0):
            res = smfs_search(p, to_fourier(make_drive(pol, bf)), bs_init=bs, anchor=anchor)
            bs = res.bs_opt
            anchor = (res.tracked_vectors, res.tracked_energies)
        results[pol] = bs
    plus, minus = results["(xy)+"], results["(xy)-"]
    # Optimum purely along z (the axis orthogonal to the rotation plane).
    assert np.abs(plus[:2]).max() < 0.5
    assert abs(plus[2]) > 1.0
    assert np.abs(plus + minus).max() < 0.1


def test_bs_init_validation():
    p = make_params(0.1)
    with pytest.raises(ValueError):
        smfs_search(p, to_fourier(make_drive("x", 10.0)), bs_init=(1.0, 2.0))


def test_cancellation_undriven_fixed_point():
    p = make_params(0.1)
    res = cancellation_solve(p, to_fourier(make_drive("x", 0.0)))
    assert res.converged
    assert res.iterations == 1
    assert np.abs(res.bs_opt).max() == 0.0
    assert res.residual < 1e-4


def test_cancellation_linear_drive_small_fields():
    p = make_params(0.1)
    for pol in ("x", "+y+z"):
        res = cancellation_solve(p, to_fourier(make_drive(pol, 150.0)))
        assert res.converged
        assert np.abs(res.bs_opt).max() <= 5.0


def test_cancellation_is_self_consistent():
    p = make_params(0.1)
    f = to_fourier(make_drive("(xz)+", 75.0))
    first = cancellation_solve(p, f)
    assert first.converged
    again = cancellation_solve(p, f, bs_init=first.bs_opt)
    assert again.converged
    assert np.abs(again.bs_opt - first.bs_opt).max() < 1e-4


def test_cancellation_nonconvergence_flag():
    p = make_params(0.1)
    f = to_fourier(make_drive("(xy)+", 150.0))
    with pytest.warns(UserWarning, match="did not converge"):
        res = cancellation_solve(p, f, max_iterations=1)
    assert not res.converged
    assert res.iterations == 1
    assert res.residual >= 1e-4


def test_cancellation_requires_spin_one():
    from floqspin import StaticParams

    p = StaticParams(S=1.5, D=5.0, E=0.5, g=2.0)
    with pytest.raises(ValueError, match="S = 1"):
        cancellation_solve(p, to_fourier(make_drive("x", 10.0)))


def test_energy_sweep_static_slopes_vanish_everywhere():
    p = make_params(0.1)
    f = to_fourier(make_drive("x", 0.0))
    for axis in ("x", "y", "z"):
        sweep = energy_sweep(p, f, np.zeros(3), axis, 2.0, 0.5)
        i0 = np.argmin(np.abs(sweep.offsets))
        assert sweep.offsets[i0] == 0.0
        assert np.abs(sweep.gradients[i0]).max() < 1e-9
        # Spectrum is even in the field, so the curves are symmetric.
        assert np.abs(np.sort(sweep.energies, axis=1) - np.sort(sweep.energies[::-1], axis=1)).max() < 1e-9


def test_energy_sweep_axis_validation():
    p = make_params(0.1)
    f = to_fourier(make_drive("x", 0.0))
    with pytest.raises(ValueError):
        energy_sweep(p, f, np.zeros(3), "w", 1.0, 0.5)
    with pytest.raises(ValueError):
        energy_sweep(p, f, np.zeros(3), "x", 1.0, -0.5)


def test_energy_sweep_shapes_and_center():
    p = make_params(0.1)
    f = to_fourier(make_drive("(xz)+", 60.0))
    sweep = energy_sweep(p, f, np.zeros(3), "y", 1.0, 0.25)
    assert sweep.offsets.shape == (9,)
    assert sweep.energies.shape == (9, 3)
    assert sweep.gradients.shape == (9, 3, 3)
    assert sweep.axis == "y"
