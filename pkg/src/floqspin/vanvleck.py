"""Second-order high-frequency effective Hamiltonians.

Two routes are provided and tested against each other:

* a generic commutator series over the Hamiltonian harmonics (orders 0-2 in
  the inverse photon energy), valid for any finite harmonic table, and
* a closed form for a spin system with isotropic g-tensor, which organizes
  the same expansion into a renormalized zero-field tensor, an effective
  Zeeman field with an order-by-order breakdown, and a residual
  "non-equilibrium" term built from commutators of anticommutators.

The closed-form coefficients with index 1-3 are real and feed the
off-diagonal zero-field corrections; the ones with index 4-6 are purely
imaginary and combine into real diagonal corrections.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .constants import MU_B
from .drive import FourierField
from .spin import SpinOperators, StaticParams, spin_operators, static_hamiltonian, zeeman_hamiltonian
from .stroboscopic import EffectiveHamiltonian

__all__ = [
    "EffectiveField",
    "VanVleckCoefficients",
    "VanVleckResult",
    "hamiltonian_harmonics",
    "vanvleck_generic",
    "effective_field",
    "vanvleck_spin",
    "nonequilibrium_general",
    "nonequilibrium_spin1",
]


def _isotropic_g(params: StaticParams) -> float:
    g = np.asarray(params.g, dtype=float)
    g0 = g[0, 0]
    if np.abs(g - g0 * np.eye(3)).max() > 1e-12 * max(1.0, abs(g0)):
        raise ValueError("closed-form expansion requires an isotropic g-tensor")
    return float(g0)


def hamiltonian_harmonics(params: StaticParams, field: FourierField) -> dict[int, np.ndarray]:
    """Fourier harmonics of the full time-dependent Hamiltonian.

    The m = 0 harmonic is the static Hamiltonian plus the Zeeman coupling of
    the field's constant component; every other stored harmonic couples
    through the Zeeman term alone.
    """
    ops = spin_operators(params.S)
    out: dict[int, np.ndarray] = {
        0: static_hamiltonian(params, ops)
        + zeeman_hamiltonian(field.harmonic(0), params.g, ops)
    }
    for m in field.indices:
        if m != 0:
            out[m] = zeeman_hamiltonian(field.harmonic(m), params.g, ops)
    return out


def _comm(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return a @ b - b @ a


def vanvleck_generic(harmonics, hbar_omega: float) -> np.ndarray:
    """Effective Hamiltonian through second order in 1/(hbar Omega).

    ``harmonics`` maps integer indices m to Hamiltonian harmonics H^(m);
    missing entries count as zero and the sums run only over the stored
    nonzero indices (no implicit extension of the table).
    """
    harmonics = dict(harmonics)
    sample = next(iter(harmonics.values()), None)
    if sample is None:
        raise ValueError("harmonic table must contain at least one entry")
    dim = sample.shape[0]
    zero = np.zeros((dim, dim), dtype=complex)
    h0 = np.asarray(harmonics.get(0, zero), dtype=complex)
    nonzero = sorted(m for m in harmonics if m != 0)

    def h(m: int) -> np.ndarray:
        return np.asarray(harmonics.get(m, zero), dtype=complex)

    h_eff = h0.astype(complex).copy()
    for m in nonzero:
        h_eff += _comm(h(-m), h(m)) / (2.0 * m * hbar_omega)
        h_eff += _comm(_comm(h(-m), h0), h(m)) / (2.0 * (m * hbar_omega) ** 2)
        for n in nonzero:
            if n == m:
                continue
            h_eff += _comm(_comm(h(-m), h(m - n)), h(n)) / (3.0 * m * n * hbar_omega**2)
    return h_eff


@dataclass(frozen=True)
class EffectiveField:
    """Effective static field with its order-by-order breakdown (mT).

    ``bs`` is the applied static field, ``b0`` the drive's constant
    component, ``b1`` the first-order cross-product term, and ``b21`` /
    ``b22`` the two second-order terms.
    """

    bs: np.ndarray
    b0: np.ndarray
    b1: np.ndarray
    b21: np.ndarray
    b22: np.ndarray

    @property
    def total(self) -> np.ndarray:
        return self.bs + self.b0 + self.b1 + self.b21 + self.b22


def effective_field(field: FourierField, bs, g_iso: float) -> EffectiveField:
    """Order-by-order effective field of a driven spin with isotropic g.

    All cross products vanish for a linearly polarized drive, so with a zero
    static field the total is zero; for a single harmonic the double-sum
    second-order term vanishes identically.
    """
    bs = np.asarray(bs, dtype=float)
    hw = field.hbar_omega
    b0 = field.harmonic(0).real
    b_stat = bs + b0
    nonzero = [m for m in field.indices if m != 0]

    b1 = np.zeros(3, dtype=complex)
    b21 = np.zeros(3, dtype=complex)
    b22 = np.zeros(3, dtype=complex)
    for m in nonzero:
        bm = field.harmonic(m)
        bmm = field.harmonic(-m)
        b1 += np.cross(bmm, bm) / m
        b21 += np.cross(bm, np.cross(bmm, b_stat)) / m**2
        for n in nonzero:
            if n == m:
                continue
            b22 += np.cross(field.harmonic(n), np.cross(bmm, field.harmonic(m - n))) / (m * n)
    b1 *= 1j * MU_B * g_iso / (2.0 * hw)
    b21 *= (MU_B * g_iso) ** 2 / (2.0 * hw**2)
    b22 *= (MU_B * g_iso) ** 2 / (3.0 * hw**2)
    return EffectiveField(
        bs=bs.copy(),
        b0=b0,
        b1=b1.real,
        b21=b21.real,
        b22=b22.real,
    )


@dataclass(frozen=True)
class VanVleckCoefficients:
    """Quadratic-in-drive coefficients of the closed-form expansion.

    ``c_tilde`` holds the six summed coefficients (ueV): entries 0-2 are
    real and renormalize the off-diagonal zero-field tensor; entries 3-5 are
    purely imaginary and build the non-equilibrium term.  ``c_m`` maps each
    harmonic index to its per-harmonic contribution before the 1/m^2
    weighting and prefactor.
    """

    c_tilde: np.ndarray
    c_m: dict[int, np.ndarray]
    field: EffectiveField


@dataclass(frozen=True)
class VanVleckResult:
    effective: EffectiveHamiltonian
    coefficients: VanVleckCoefficients

    @property
    def h_eff(self) -> np.ndarray:
        return self.effective.h_eff

    @property
    def b_eff(self) -> np.ndarray:
        return self.coefficients.field.total


def _per_harmonic_coefficients(d: float, e: float, bm_minus: np.ndarray, bm_plus: np.ndarray) -> np.ndarray:
    """The six quadratic coefficients for one harmonic pair (B^(-m), B^(m))."""
    bxm, bym, bzm = bm_minus
    bxp, byp, bzp = bm_plus
    return np.array(
        [
            -(d + e) * bxm * byp - (d - e) * bym * bxp,
            (d + e) * bxm * bzp + 2.0 * e * bzm * bxp,
            (d - e) * bym * bzp - 2.0 * e * bzm * byp,
            -1j * (d + e) * bxm * bxp,
            1j * (d - e) * bym * byp,
            2j * e * bzm * bzp,
        ],
        dtype=complex,
    )


def nonequilibrium_general(ops: SpinOperators, c_tilde_456) -> np.ndarray:
    """Non-equilibrium term as literal commutators of anticommutators (any spin)."""
    c4, c5, c6 = np.asarray(c_tilde_456, dtype=complex)
    sx, sy, sz = ops.sx, ops.sy, ops.sz
    out = c4 * _comm(sy @ sz + sz @ sy, sx)
    out += c5 * _comm(sx @ sz + sz @ sx, sy)
    out += c6 * _comm(sx @ sy + sy @ sx, sz)
    return out


def nonequilibrium_spin1(c_tilde_456) -> np.ndarray:
    """Spin-1 reduction of the non-equilibrium term: a pure diagonal renormalization."""
    c4, c5, c6 = np.asarray(c_tilde_456, dtype=complex)
    ops = spin_operators(1)
    out = 2j * (c6 - c5) * (ops.sx @ ops.sx)
    out += 2j * (c4 - c6) * (ops.sy @ ops.sy)
    out += 2j * (c5 - c4) * (ops.sz @ ops.sz)
    return out


def vanvleck_spin(params: StaticParams, field: FourierField) -> VanVleckResult:
    """Closed-form second-order effective Hamiltonian for isotropic g.

    Returns the effective Hamiltonian (decomposed on the spin-1 basis when
    S = 1) together with the quadratic coefficients and the effective-field
    breakdown.  Valid for any total spin; the spin-1 fast path uses the
    diagonal reduction of the non-equilibrium term.
    """
    g0 = _isotropic_g(params)
    ops = spin_operators(params.S)
    hw = field.hbar_omega
    ef = effective_field(field, params.bs, g0)

    nonzero = [m for m in field.indices if m != 0]
    c_m = {
        m: _per_harmonic_coefficients(
            params.D, params.E, field.harmonic(-m), field.harmonic(m)
        )
        for m in nonzero
    }
    c_tilde = np.zeros(6, dtype=complex)
    for m, cm in c_m.items():
        c_tilde += cm / m**2
    c_tilde *= (MU_B * g0) ** 2 / (2.0 * hw**2)

    h_zf = static_hamiltonian(params.with_bs(np.zeros(3)), ops)
    sx, sy, sz = ops.sx, ops.sy, ops.sz
    delta_zf = (
        c_tilde[0].real * (sx @ sy + sy @ sx)
        + c_tilde[1].real * (sx @ sz + sz @ sx)
        + c_tilde[2].real * (sy @ sz + sz @ sy)
    )
    zeeman_eff = zeeman_hamiltonian(ef.total, g0 * np.eye(3), ops)
    if params.spin_dim == 3:
        h_neq = nonequilibrium_spin1(c_tilde[3:])
    else:
        h_neq = nonequilibrium_general(ops, c_tilde[3:])
    h_eff = h_zf + delta_zf + zeeman_eff + h_neq
    h_eff = (h_eff + h_eff.conj().T) / 2.0

    effective = (
        EffectiveHamiltonian.from_matrix(h_eff, provenance="vanvleck")
        if params.spin_dim == 3
        else EffectiveHamiltonian(h_eff=h_eff, provenance="vanvleck")
    )
    coeffs = VanVleckCoefficients(c_tilde=c_tilde, c_m=c_m, field=ef)
    return VanVleckResult(effective=effective, coefficients=coeffs)
