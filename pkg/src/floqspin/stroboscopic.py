"""Exact effective Hamiltonian from the one-cycle propagator.

The time-evolution operator over one drive period is built as a time-ordered
product of short exponential steps; its principal matrix logarithm defines a
Hermitian effective Hamiltonian whose eigenvalues are the quasienergies
folded into the first zone.  For spin 1 the effective Hamiltonian is
decomposed on the nine-matrix basis {sx^2, sy^2, sz^2, {sx,sy}, {sx,sz},
{sy,sz}, sx, sy, sz}, which splits it into an effective zero-field tensor
and an effective Zeeman vector.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .constants import HBAR, MU_B
from .drive import FourierField, field_at
from .spin import StaticParams, spin_operators, static_hamiltonian, zeeman_hamiltonian

__all__ = [
    "BranchAmbiguityError",
    "EffectiveHamiltonian",
    "spin1_basis_matrices",
    "one_cycle_propagator",
    "effective_hamiltonian_exact",
    "decompose_spin1",
    "extract_cancellation_field",
    "effective_hamiltonian",
]


class BranchAmbiguityError(RuntimeError):
    """A propagator eigenvalue sits at the branch cut of the principal logarithm."""


def spin1_basis_matrices() -> list[np.ndarray]:
    """The nine linearly independent Hermitian basis matrices for spin 1.

    Order: sx^2, sy^2, sz^2, {sx,sy}, {sx,sz}, {sy,sz}, sx, sy, sz.
    """
    ops = spin_operators(1)
    sx, sy, sz = ops.sx, ops.sy, ops.sz
    return [
        sx @ sx,
        sy @ sy,
        sz @ sz,
        sx @ sy + sy @ sx,
        sx @ sz + sz @ sx,
        sy @ sz + sz @ sy,
        sx,
        sy,
        sz,
    ]


@dataclass(frozen=True)
class EffectiveHamiltonian:
    """Effective spin Hamiltonian with its spin-1 decomposition.

    ``coefficients`` (9,), ``d_eff`` (3x3 symmetric) and ``script_b_eff``
    (3,) are populated for spin-1 systems only.  ``script_b_eff`` is the
    effective Zeeman vector c_{7..9}/mu_B, which absorbs the g-tensor; the
    corresponding plain field is recovered via
    :func:`extract_cancellation_field`.
    """

    h_eff: np.ndarray
    provenance: str
    coefficients: "np.ndarray | None" = None
    d_eff: "np.ndarray | None" = None
    script_b_eff: "np.ndarray | None" = None

    @classmethod
    def from_matrix(cls, h_eff: np.ndarray, provenance: str) -> "EffectiveHamiltonian":
        if h_eff.shape == (3, 3):
            c = decompose_spin1(h_eff)
            d_eff = np.array(
                [
                    [c[0], c[3], c[4]],
                    [c[3], c[1], c[5]],
                    [c[4], c[5], c[2]],
                ]
            )
            script_b = np.array([c[6], c[7], c[8]]) / MU_B
            return cls(
                h_eff=h_eff,
                provenance=provenance,
                coefficients=c,
                d_eff=d_eff,
                script_b_eff=script_b,
            )
        return cls(h_eff=h_eff, provenance=provenance)

    def eigenvalues(self) -> np.ndarray:
        return np.linalg.eigvalsh(self.h_eff)


def _expm_step(h: np.ndarray, tau: float) -> np.ndarray:
    """exp(-i tau h) via Hermitian eigendecomposition (exact for Hermitian h)."""
    w, v = np.linalg.eigh(h)
    return (v * np.exp(-1j * tau * w)) @ v.conj().T


def one_cycle_propagator(
    params: StaticParams, field: FourierField, n_steps: int = 100
) -> np.ndarray:
    """Unitary evolution over one drive period, left-sampled in ``n_steps`` steps.

    The product applies later times on the left; each factor is
    exp(-i dt H(t_k) / hbar) with t_k = k * dt for k = 0 ... n_steps - 1.
    """
    n_steps = int(n_steps)
    if n_steps < 2:
        raise ValueError("n_steps must be at least 2")
    ops = spin_operators(params.S)
    h_static = static_hamiltonian(params, ops)
    period = field.period
    dt = period / n_steps
    u = np.eye(ops.dim, dtype=complex)
    for k in range(n_steps):
        h = h_static + zeeman_hamiltonian(field_at(field, k * dt), params.g, ops)
        u = _expm_step(h, dt / HBAR) @ u
    return u


def effective_hamiltonian_exact(
    u_f: np.ndarray, period: float, *, edge_tol: float = 1e-12
) -> np.ndarray:
    """Hermitian generator H with exp(-i period H / hbar) = u_f.

    Uses the principal logarithm through a unitary diagonalization of the
    (normal) propagator, so the eigenvalues land in the first zone
    (-pi hbar / period, pi hbar / period).  An eigenvalue of ``u_f`` within
    ``edge_tol`` of -1 sits on the branch cut and raises
    BranchAmbiguityError; shift the drive photon energy to move the zone
    edge.
    """
    u_f = np.asarray(u_f, dtype=complex)
    if u_f.ndim != 2 or u_f.shape[0] != u_f.shape[1]:
        raise ValueError("u_f must be a square matrix")
    unitary_err = np.abs(u_f.conj().T @ u_f - np.eye(u_f.shape[0])).max()
    if unitary_err > 1e-8:
        raise ValueError(f"u_f is not unitary (deviation {unitary_err:.3e})")
    t_schur, z = scipy.linalg.schur(u_f, output="complex")
    w = np.diag(t_schur)
    if np.abs(w + 1.0).min() < edge_tol:
        raise BranchAmbiguityError(
            "propagator eigenvalue within tolerance of -1: quasienergy at the zone "
            "edge; shift the photon energy and retry"
        )
    eps = -HBAR * np.angle(w) / period
    h = (z * eps) @ z.conj().T
    return (h + h.conj().T) / 2.0


def decompose_spin1(h_eff: np.ndarray) -> np.ndarray:
    """Coefficients c_1..c_9 of a Hermitian 3x3 matrix on the spin-1 basis.

    The flattened basis matrices form an invertible 9x9 system, so the
    coefficients are unique; for Hermitian input they are real.
    """
    h_eff = np.asarray(h_eff)
    if h_eff.shape != (3, 3):
        raise ValueError("spin-1 decomposition requires a 3x3 matrix (S = 1 only)")
    basis = spin1_basis_matrices()
    m = np.column_stack([b.reshape(9) for b in basis])
    c = np.linalg.solve(m, h_eff.reshape(9))
    scale = max(1.0, float(np.abs(h_eff).max()))
    residual = np.abs(m @ c - h_eff.reshape(9)).max()
    if residual > 1e-12 * scale:
        raise ValueError(f"basis solve residual {residual:.3e} too large")
    if np.abs(c.imag).max() > 1e-10 * scale:
        raise ValueError("input matrix is not Hermitian: complex basis coefficients")
    return c.real


def extract_cancellation_field(c7: float, c8: float, c9: float, g) -> tuple[np.ndarray, np.ndarray]:
    """Effective Zeeman vectors from the linear basis coefficients.

    Returns (script_b_eff, b_eff): the g-absorbing vector c_{7..9}/mu_B and
    the plain field obtained through the transpose-inverse of the g-tensor.
    """
    g = np.asarray(g, dtype=float)
    if g.ndim == 0:
        g = float(g) * np.eye(3)
    if g.shape != (3, 3) or not np.all(np.isfinite(g)):
        raise ValueError("g must be a finite scalar or 3x3 tensor")
    if abs(np.linalg.det(g)) < 1e-12:
        raise ValueError("g-tensor must be invertible")
    script_b = np.array([c7, c8, c9], dtype=float) / MU_B
    b_eff = np.linalg.solve(g.T, script_b)
    return script_b, b_eff


def effective_hamiltonian(
    params: StaticParams, field: FourierField, n_steps: int = 100
) -> EffectiveHamiltonian:
    """Exact effective Hamiltonian of the driven system, decomposed for spin 1."""
    u_f = one_cycle_propagator(params, field, n_steps)
    h_eff = effective_hamiltonian_exact(u_f, field.period)
    return EffectiveHamiltonian.from_matrix(h_eff, provenance="exact")
