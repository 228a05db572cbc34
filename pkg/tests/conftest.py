import numpy as np
import pytest

from floqspin import DriveSpec, StaticParams

TABLE_EOD = (0.0, 0.1, 1.0 / 3.0)
LINEAR_POLS = ("x", "y", "z", "+x+y", "+x-y", "+x+z", "+x-z", "+y+z", "+y-z")
CIRCULAR_POLS = ("(xy)+", "(xy)-", "(xz)+", "(xz)-", "(yz)+", "(yz)-")
HBAR_OMEGA = 20.0


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def params_ed01():
    """Reference molecule at E/D = 0.1."""
    return StaticParams(S=1, D=5.0, E=0.5, g=2.0)


def make_params(e_over_d: float, bs=None) -> StaticParams:
    return StaticParams(S=1, D=5.0, E=5.0 * e_over_d, g=2.0, bs=bs)


def make_drive(pol: str, b_f: float = 0.0) -> DriveSpec:
    return DriveSpec.from_name(pol, hbar_omega=HBAR_OMEGA, b_f=b_f)


def random_hermitian(rng, dim: int, scale: float = 1.0) -> np.ndarray:
    a = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    return scale * (a + a.conj().T) / 2.0
