"""Quasienergy spectra of periodically driven spin systems.

The time-periodic Hamiltonian is expanded over its Fourier harmonics and
diagonalized in the extended space (harmonic sector) x (spin state).  Out of
the replicated quasienergy spectrum, the physically meaningful levels are
the ones that connect continuously to the static spectrum as the drive
amplitude goes to zero; they are followed through amplitude or field sweeps
by eigenvector overlap, and their static-field gradients come from the
eigenvector expectation of the field derivative of the extended-space
matrix (no finite differences involved).
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field as dc_field

import numpy as np
from scipy.optimize import linear_sum_assignment

from .constants import MU_B
from .drive import DriveSpec, FourierField, to_fourier
from .spin import (
    StaticParams,
    solve_static,
    spin_operators,
    static_hamiltonian,
    zeeman_hamiltonian,
)

__all__ = [
    "TrackingWarning",
    "DegenerateLevelWarning",
    "FloquetMatrix",
    "FloquetSolution",
    "assemble_floquet",
    "solve_quasienergies",
    "solve_driven",
    "select_physical_replicas",
    "overlap",
    "match_to_previous",
    "quasienergy_gradient",
    "gradient_from_vector",
    "gradients_for_tracked",
    "LevelCurves",
    "track_levels",
    "track_field_ramp",
]


class TrackingWarning(UserWarning):
    """Level tracking hit an overlap tie or a suspiciously small overlap."""


class DegenerateLevelWarning(UserWarning):
    """A gradient was requested for a level that is degenerate within tolerance."""


def _readonly(a: np.ndarray) -> np.ndarray:
    a.flags.writeable = False
    return a


@dataclass(frozen=True)
class FloquetMatrix:
    """Hermitian extended-space matrix of a driven spin system."""

    matrix: np.ndarray
    n_harmonics: int
    spin_dim: int
    hbar_omega: float

    @property
    def dim(self) -> int:
        return (2 * self.n_harmonics + 1) * self.spin_dim


def assemble_floquet(
    params: StaticParams, field: FourierField, n_harmonics: int = 10
) -> FloquetMatrix:
    """Assemble the extended-space matrix for the given drive harmonics.

    The (m, m') block is the Hamiltonian harmonic of index m - m', and the
    diagonal blocks are shifted by -m * hbar_omega.  Sectors run over
    m = -n_harmonics ... n_harmonics.
    """
    n = int(n_harmonics)
    if n < 0:
        raise ValueError("n_harmonics must be non-negative")
    ops = spin_operators(params.S)
    d = ops.dim
    n_blocks = 2 * n + 1
    h0 = static_hamiltonian(params, ops) + zeeman_hamiltonian(field.harmonic(0), params.g, ops)
    mat = np.kron(np.eye(n_blocks), h0)
    for m in field.indices:
        if m == 0:
            continue
        hm = zeeman_hamiltonian(field.harmonic(m), params.g, ops)
        mat += np.kron(np.eye(n_blocks, k=-m), hm)
    shifts = -np.arange(-n, n + 1) * field.hbar_omega
    mat += np.kron(np.diag(shifts), np.eye(d))
    herm_err = np.abs(mat - mat.conj().T).max()
    if herm_err > 1e-12 * max(1.0, np.abs(mat).max()):
        raise ValueError(
            "assembled matrix is not Hermitian; the harmonic table violates the "
            "reality condition"
        )
    return FloquetMatrix(
        matrix=_readonly(mat), n_harmonics=n, spin_dim=d, hbar_omega=field.hbar_omega
    )


@dataclass
class FloquetSolution:
    """Full eigensystem of an extended-space matrix.

    ``quasienergies`` are ascending (ueV); column j of ``vectors`` is the
    eigenvector for quasienergies[j], stacked over harmonic sectors
    m = -N ... N with the spin index fastest.
    """

    quasienergies: np.ndarray
    vectors: np.ndarray
    n_harmonics: int
    spin_dim: int
    hbar_omega: float
    physical_indices: "np.ndarray | None" = None
    degenerate_start: bool = False

    def fourier_components(self, index: int) -> np.ndarray:
        """Eigenvector ``index`` reshaped to (2N+1, spin_dim)."""
        return self.vectors[:, index].reshape(2 * self.n_harmonics + 1, self.spin_dim)

    def sector_weights(self, index: int) -> np.ndarray:
        """Probability weight of eigenvector ``index`` in each harmonic sector."""
        c = self.fourier_components(index)
        return (np.abs(c) ** 2).sum(axis=1)

    def central_weight(self, index: int) -> float:
        """Weight of eigenvector ``index`` in the m = 0 sector."""
        return float(self.sector_weights(index)[self.n_harmonics])

    @property
    def physical_energies(self) -> np.ndarray:
        if self.physical_indices is None:
            raise ValueError("physical replicas have not been selected for this solution")
        return self.quasienergies[self.physical_indices]


def solve_quasienergies(fm: FloquetMatrix) -> FloquetSolution:
    """Dense Hermitian eigensolve of the assembled matrix, ascending order."""
    w, v = np.linalg.eigh(fm.matrix)
    return FloquetSolution(
        quasienergies=w,
        vectors=v,
        n_harmonics=fm.n_harmonics,
        spin_dim=fm.spin_dim,
        hbar_omega=fm.hbar_omega,
    )


def solve_driven(
    params: StaticParams, field: FourierField, n_harmonics: int = 10
) -> FloquetSolution:
    """Assemble and solve in one go."""
    return solve_quasienergies(assemble_floquet(params, field, n_harmonics))


def select_physical_replicas(
    solution: FloquetSolution,
    static_energies,
    *,
    energy_tol: float = 1e-8,
    weight_min: float = 0.99,
) -> tuple[np.ndarray, bool]:
    """Indices of the zero-amplitude eigenpairs that continue the static levels.

    At zero drive each physical level lives in the central harmonic sector
    and equals its static energy.  The returned indices follow the ascending
    static spectrum.  The second return value flags a degenerate static
    spectrum, in which case the pairing inside each degenerate group is
    arbitrary until amplitude tracking fixes it.

    Also stores the selection on ``solution``.
    """
    static_energies = np.sort(np.asarray(static_energies, dtype=float))
    d = solution.spin_dim
    if static_energies.shape != (d,):
        raise ValueError(f"expected {d} static energies, got {static_energies.shape}")
    v3 = solution.vectors.reshape(2 * solution.n_harmonics + 1, d, -1)
    w0 = (np.abs(v3[solution.n_harmonics]) ** 2).sum(axis=0)
    candidates = np.flatnonzero(w0 > weight_min)
    if candidates.size != d:
        raise ValueError(
            f"expected {d} eigenpairs concentrated in the central sector, found "
            f"{candidates.size}; replica selection requires a zero-amplitude solve"
        )
    order = np.argsort(solution.quasienergies[candidates], kind="stable")
    indices = candidates[order]
    dev = np.abs(solution.quasienergies[indices] - static_energies).max()
    if dev > energy_tol:
        raise ValueError(
            f"zero-drive quasienergies deviate from the static spectrum by {dev:.3e} ueV"
        )
    degenerate = bool(np.any(np.diff(static_energies) < 2 * energy_tol))
    solution.physical_indices = indices
    solution.degenerate_start = degenerate
    return indices, degenerate


def overlap(vec_a, vec_b) -> float:
    """Magnitude of the cycle-averaged overlap of two extended-space eigenvectors.

    The time average of the overlap of the corresponding periodic states
    reduces to the plain inner product of the stacked Fourier coefficients.
    """
    return float(abs(np.vdot(np.asarray(vec_a).ravel(), np.asarray(vec_b).ravel())))


def match_to_previous(
    prev_vectors: np.ndarray,
    prev_energies,
    solution: FloquetSolution,
    *,
    tie_tol: float = 1e-9,
    overlap_floor: float = 0.8,
) -> tuple[np.ndarray, list[str]]:
    """Assign each previously tracked level to an eigenpair of ``solution``.

    Maximal-overlap assignment constrained to be injective (no label reuse).
    Ties are broken toward the smaller quasienergy jump; ties and overlaps
    below ``overlap_floor`` are reported through TrackingWarning and in the
    returned diagnostics.
    """
    prev = np.asarray(prev_vectors)
    prev_energies = np.asarray(prev_energies, dtype=float)
    ov = np.abs(prev.conj().T @ solution.vectors)  # (L, K)
    de = np.abs(solution.quasienergies[None, :] - prev_energies[:, None])
    # The energy term only matters at exact overlap ties.
    cost = -ov + 1e-12 * de / (1.0 + de)
    rows, cols = linear_sum_assignment(cost)
    indices = np.empty(prev.shape[1], dtype=int)
    indices[rows] = cols
    notes: list[str] = []
    for i in range(ov.shape[0]):
        top = np.partition(ov[i], ov.shape[1] - 2)[-2:]
        if top[1] - top[0] < tie_tol:
            notes.append(
                f"overlap tie for level {i} ({top[1]:.6f} vs {top[0]:.6f}); "
                "broken by smaller quasienergy jump"
            )
        got = ov[i, indices[i]]
        if got < overlap_floor:
            notes.append(
                f"overlap {got:.3f} below {overlap_floor:g} for level {i}; "
                "consider a smaller continuation step"
            )
    for msg in notes:
        warnings.warn(msg, TrackingWarning, stacklevel=2)
    return indices, notes


# ---------------------------------------------------------------------------
# Static-field gradients
# ---------------------------------------------------------------------------


def _g_dot_spin(params: StaticParams) -> np.ndarray:
    """(g s)_alpha stacked as a (3, d, d) array."""
    ops = spin_operators(params.S)
    return np.tensordot(np.asarray(params.g, dtype=float), ops.vector(), axes=(1, 0))


def gradient_from_vector(vector, params: StaticParams) -> np.ndarray:
    """Field gradient (ueV/mT) from a single extended-space eigenvector.

    Valid for nondegenerate levels, where the expectation value of the
    block-diagonal field derivative gives the exact gradient.
    """
    d = params.spin_dim
    comps = np.asarray(vector).reshape(-1, d)
    rho = comps.T @ comps.conj()
    gs = _g_dot_spin(params)
    return MU_B * np.einsum("aij,ji->a", gs, rho).real


def quasienergy_gradient(
    solution: FloquetSolution,
    params: StaticParams,
    index: int,
    *,
    degenerate: str = "branch",
    degeneracy_tol: float = 1e-10,
) -> np.ndarray:
    """Gradient of quasienergy ``index`` with respect to the static field (ueV/mT).

    For a level degenerate within ``degeneracy_tol`` the single-vector
    expectation is basis dependent; a DegenerateLevelWarning is emitted and
    the treatment follows ``degenerate``:

    * ``"branch"``: per field direction, diagonalize the perturbation inside
      the degenerate subspace and return the slope at the level's position
      within the group (branch slopes, ascending per direction).
    * ``"multiplet"``: the basis-independent mean slope of the group, i.e.
      the derivative of the multiplet centroid.
    """
    eps = solution.quasienergies
    group = np.flatnonzero(np.abs(eps - eps[index]) <= degeneracy_tol)
    if group.size == 1:
        return gradient_from_vector(solution.vectors[:, index], params)
    if degenerate not in ("branch", "multiplet"):
        raise ValueError("degenerate must be 'branch' or 'multiplet'")
    warnings.warn(
        f"level {index} is degenerate within {degeneracy_tol:g} ueV with "
        f"{group.size - 1} other level(s); returning {degenerate} slope(s)",
        DegenerateLevelWarning,
        stacklevel=2,
    )
    d = params.spin_dim
    gs = _g_dot_spin(params)
    comps = solution.vectors[:, group].T.reshape(group.size, -1, d)
    restricted = MU_B * np.einsum("rmi,aij,smj->ars", comps.conj(), gs, comps)
    if degenerate == "multiplet":
        return np.einsum("arr->a", restricted).real / group.size
    pos = int(np.flatnonzero(group == index)[0])
    out = np.empty(3)
    for a in range(3):
        out[a] = np.linalg.eigvalsh(restricted[a])[pos]
    return out


def gradients_for_tracked(
    vectors: np.ndarray,
    energies,
    params: StaticParams,
    *,
    degeneracy_tol: float = 1e-10,
) -> np.ndarray:
    """Gradients (L, 3) for a set of tracked levels given their eigenvectors.

    Levels that are mutually degenerate within ``degeneracy_tol`` receive
    the multiplet-mean slope of their group, which is basis independent and
    therefore stable under the arbitrary mixing a degenerate eigensolve can
    return.
    """
    energies = np.asarray(energies, dtype=float)
    n_levels = vectors.shape[1]
    grads = np.stack(
        [gradient_from_vector(vectors[:, j], params) for j in range(n_levels)]
    )
    order = np.argsort(energies, kind="stable")
    start = 0
    sorted_e = energies[order]
    for k in range(1, n_levels + 1):
        if k == n_levels or sorted_e[k] - sorted_e[k - 1] > degeneracy_tol:
            if k - start > 1:
                members = order[start:k]
                grads[members] = grads[members].mean(axis=0)
            start = k
    return grads


# ---------------------------------------------------------------------------
# Amplitude continuation
# ---------------------------------------------------------------------------


@dataclass
class LevelCurves:
    """Unfolded level curves along a drive ramp.

    ``energies[k, j]`` is the level with persistent label j at ramp point k;
    labels are assigned at zero amplitude in ascending static-energy order
    and carried by maximal overlap.  ``gradients`` (if computed) follow the
    multiplet convention at degeneracies.
    """

    x: np.ndarray
    energies: np.ndarray
    gradients: "np.ndarray | None"
    degenerate_start: bool
    diagnostics: list[str]
    final_solution: FloquetSolution
    final_indices: np.ndarray
    final_vectors: np.ndarray = dc_field(repr=False, default=None)  # type: ignore[assignment]


def _backpropagate_degenerate(
    sol0: FloquetSolution,
    vectors0: np.ndarray,
    energies0: np.ndarray,
    vectors1: np.ndarray,
    *,
    tol: float = 1e-8,
) -> np.ndarray:
    """Fix the arbitrary basis of degenerate zero-amplitude levels.

    The degenerate-group vectors at zero amplitude are replaced by the
    projection of the first nonzero-amplitude vectors onto the degenerate
    eigenspace, orthonormalized, so that labels and vectors continue
    smoothly down to zero amplitude.
    """
    out = vectors0.copy()
    order = np.argsort(energies0, kind="stable")
    sorted_e = energies0[order]
    start = 0
    n_levels = energies0.size
    for k in range(1, n_levels + 1):
        if k == n_levels or sorted_e[k] - sorted_e[k - 1] > tol:
            if k - start > 1:
                members = order[start:k]
                basis = vectors0[:, members]
                coeff = basis.conj().T @ vectors1[:, members]
                q, r = np.linalg.qr(coeff)
                d = np.diag(r)
                phase = np.where(np.abs(d) == 0, 1.0, d / np.where(np.abs(d) == 0, 1.0, np.abs(d)))
                out[:, members] = basis @ (q * phase.conj())
            start = k
    return out


def _track_fields(
    params: StaticParams,
    fields: list[FourierField],
    xvals: np.ndarray,
    *,
    n_harmonics: int,
    compute_gradients: bool,
) -> LevelCurves:
    static_e, _ = solve_static(params)
    n_levels = params.spin_dim
    sol = solve_driven(params, fields[0], n_harmonics)
    indices, degenerate = select_physical_replicas(sol, static_e)
    n_points = len(fields)
    energies = np.empty((n_points, n_levels))
    energies[0] = sol.quasienergies[indices]
    vectors = [sol.vectors[:, indices]]
    diagnostics: list[str] = []
    prev_vectors, prev_energies = vectors[0], energies[0]
    final_solution, final_indices = sol, indices
    for k in range(1, n_points):
        solk = solve_driven(params, fields[k], n_harmonics)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", TrackingWarning)
            idxk, notes = match_to_previous(prev_vectors, prev_energies, solk)
        diagnostics += [f"point {k} (x={xvals[k]:g}): {s}" for s in notes]
        energies[k] = solk.quasienergies[idxk]
        prev_vectors = solk.vectors[:, idxk]
        prev_energies = energies[k]
        vectors.append(prev_vectors)
        final_solution, final_indices = solk, idxk
    if degenerate and n_points > 1:
        vectors[0] = _backpropagate_degenerate(sol, vectors[0], energies[0], vectors[1])
    gradients = None
    if compute_gradients:
        gradients = np.stack(
            [
                gradients_for_tracked(vectors[k], energies[k], params)
                for k in range(n_points)
            ]
        )
    return LevelCurves(
        x=np.asarray(xvals, dtype=float),
        energies=energies,
        gradients=gradients,
        degenerate_start=degenerate,
        diagnostics=diagnostics,
        final_solution=final_solution,
        final_indices=final_indices,
        final_vectors=prev_vectors,
    )


def track_levels(
    params: StaticParams,
    drive: DriveSpec,
    bf_grid,
    *,
    n_harmonics: int = 10,
    compute_gradients: bool = False,
) -> LevelCurves:
    """Follow the physical levels while the drive amplitude ramps up from zero.

    ``bf_grid`` (mT) must start at 0 and increase strictly; the amplitude
    stored on ``drive`` is ignored in favor of the grid.  When the static
    spectrum is degenerate, the degenerate levels' zero-amplitude vectors are
    fixed by backward propagation from the first nonzero amplitude.
    """
    bf = np.asarray(bf_grid, dtype=float)
    if bf.ndim != 1 or bf.size == 0 or bf[0] != 0.0 or np.any(np.diff(bf) <= 0):
        raise ValueError("bf_grid must start at 0 and be strictly increasing")
    fields = [to_fourier(drive.with_amplitude(b)) for b in bf]
    return _track_fields(
        params, fields, bf, n_harmonics=n_harmonics, compute_gradients=compute_gradients
    )


def track_field_ramp(
    params: StaticParams,
    field: FourierField,
    scales,
    *,
    n_harmonics: int = 10,
    compute_gradients: bool = False,
) -> LevelCurves:
    """Like :func:`track_levels` but ramping an arbitrary harmonic table.

    ``scales`` multiplies every harmonic and must start at 0 and increase.
    """
    sc = np.asarray(scales, dtype=float)
    if sc.ndim != 1 or sc.size == 0 or sc[0] != 0.0 or np.any(np.diff(sc) <= 0):
        raise ValueError("scales must start at 0 and be strictly increasing")
    fields = [field.scaled(s) for s in sc]
    return _track_fields(
        params, fields, sc, n_harmonics=n_harmonics, compute_gradients=compute_gradients
    )
