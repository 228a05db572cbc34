"""Spin operators and the static molecular spin Hamiltonian.

The model describes a single emergent total electronic spin S with axial and
rhombic zero-field splittings D and E and a Zeeman coupling to a static
magnetic field through a 3x3 g-tensor.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .constants import MU_B

__all__ = [
    "SpinOperators",
    "StaticParams",
    "spin_operators",
    "static_hamiltonian",
    "zeeman_hamiltonian",
    "solve_static",
]


def _readonly(a: np.ndarray) -> np.ndarray:
    a.flags.writeable = False
    return a


@dataclass(frozen=True)
class SpinOperators:
    """Dimensionless spin matrices in the |S, m> basis with m = S, S-1, ..., -S."""

    S: float
    sx: np.ndarray
    sy: np.ndarray
    sz: np.ndarray

    @property
    def dim(self) -> int:
        """Dimension 2S+1 of the spin manifold."""
        return int(round(2 * self.S + 1))

    def vector(self) -> np.ndarray:
        """The three operators stacked as a (3, 2S+1, 2S+1) array."""
        return np.stack((self.sx, self.sy, self.sz))


@lru_cache(maxsize=None)
def _spin_operators_cached(twice_s: int) -> SpinOperators:
    s = twice_s / 2.0
    dim = twice_s + 1
    m = s - np.arange(dim)
    # <m+1| s_+ |m> = sqrt(S(S+1) - m(m+1)) on the first superdiagonal.
    raising = np.sqrt(s * (s + 1) - m[1:] * (m[1:] + 1))
    s_plus = np.zeros((dim, dim), dtype=complex)
    s_plus[np.arange(dim - 1), np.arange(1, dim)] = raising
    s_minus = s_plus.conj().T
    sx = (s_plus + s_minus) / 2.0
    sy = (s_plus - s_minus) / 2.0j
    sz = np.diag(m).astype(complex)
    return SpinOperators(S=s, sx=_readonly(sx), sy=_readonly(sy), sz=_readonly(sz))


def spin_operators(s: float) -> SpinOperators:
    """Ladder-constructed spin matrices for total spin ``s``.

    ``s`` must be a positive integer or half-integer (spin manifolds of
    dimension >= 2); anything else raises ValueError.
    """
    twice_s = 2.0 * float(s)
    if not np.isfinite(twice_s) or twice_s < 1 or abs(twice_s - round(twice_s)) > 1e-9:
        raise ValueError(f"total spin must be a positive integer or half-integer, got {s}")
    return _spin_operators_cached(int(round(twice_s)))


@dataclass(frozen=True)
class StaticParams:
    """Parameters of the static spin system.

    Attributes:
        S: total electronic spin.
        D: axial zero-field splitting (ueV).
        E: rhombic zero-field splitting (ueV).
        g: 3x3 g-tensor; a scalar is promoted to an isotropic tensor.
        bs: static magnetic field vector (mT); defaults to zero.
    """

    S: float
    D: float
    E: float
    g: "np.ndarray | float" = 2.0
    bs: "np.ndarray | None" = None

    def __post_init__(self) -> None:
        spin_operators(self.S)  # validates S
        g = np.array(self.g, dtype=float)
        if g.ndim == 0:
            g = float(g) * np.eye(3)
        if g.shape != (3, 3) or not np.all(np.isfinite(g)):
            raise ValueError("g must be a finite scalar or a finite 3x3 tensor")
        if abs(np.linalg.det(g)) < 1e-12:
            raise ValueError("g-tensor must be invertible")
        bs = np.zeros(3) if self.bs is None else np.array(self.bs, dtype=float)
        if bs.shape != (3,) or not np.all(np.isfinite(bs)):
            raise ValueError("bs must be a finite 3-vector")
        if not (np.isfinite(self.D) and np.isfinite(self.E)):
            raise ValueError("D and E must be finite")
        if abs(self.E) > abs(self.D) / 3.0 + 1e-12:
            warnings.warn(
                f"|E| = {abs(self.E):g} exceeds |D|/3 = {abs(self.D) / 3.0:g}; outside the "
                "conventional zero-field parameter range",
                stacklevel=2,
            )
        object.__setattr__(self, "g", _readonly(g))
        object.__setattr__(self, "bs", _readonly(bs))

    @property
    def spin_dim(self) -> int:
        return int(round(2 * self.S + 1))

    def with_bs(self, bs) -> "StaticParams":
        """Copy of the parameters with the static field replaced."""
        return StaticParams(S=self.S, D=self.D, E=self.E, g=self.g, bs=bs)


def zeeman_hamiltonian(b, g, ops: SpinOperators) -> np.ndarray:
    """Zeeman coupling mu_B * b^T g s for a field vector ``b`` in mT.

    ``b`` may be complex, as needed for the Fourier harmonics of a
    time-periodic field.
    """
    b = np.asarray(b)
    g = np.asarray(g, dtype=float)
    if g.ndim == 0:
        g = float(g) * np.eye(3)
    coeff = MU_B * (g.T @ b)
    return np.tensordot(coeff, ops.vector(), axes=1)


def static_hamiltonian(params: StaticParams, ops: "SpinOperators | None" = None) -> np.ndarray:
    """Static Hamiltonian D(sz^2 - S(S+1)/3) + E(sx^2 - sy^2) + mu_B bs^T g s, in ueV."""
    if ops is None:
        ops = spin_operators(params.S)
    if ops.dim != params.spin_dim:
        raise ValueError(
            f"operator dimension {ops.dim} does not match spin S={params.S} "
            f"(expected {params.spin_dim})"
        )
    s = params.S
    h = params.D * (ops.sz @ ops.sz - s * (s + 1) / 3.0 * np.eye(ops.dim))
    h = h + params.E * (ops.sx @ ops.sx - ops.sy @ ops.sy)
    h = h + zeeman_hamiltonian(params.bs, params.g, ops)
    return h


def solve_static(params: StaticParams) -> tuple[np.ndarray, np.ndarray]:
    """Energies (ascending, ueV) and orthonormal eigenvectors of the static Hamiltonian."""
    return np.linalg.eigh(static_hamiltonian(params))
