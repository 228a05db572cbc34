"""Static-field optimization problems for driven spin systems.

Two searches over the static magnetic field: a derivative-free adaptive
grid search that minimizes the summed gradient magnitudes of the tracked
levels (clock-transition search), and a self-consistent iteration that
nulls the effective Zeeman vector of the exact effective Hamiltonian
(dynamical cancellation).  Both are meant to be continued in drive
amplitude: start each amplitude from the previous optimum so the solutions
stay adiabatically connected to the undriven one.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .drive import FourierField
from .floquet import (
    TrackingWarning,
    gradients_for_tracked,
    match_to_previous,
    solve_driven,
    track_field_ramp,
)
from .spin import StaticParams
from .stroboscopic import effective_hamiltonian

__all__ = [
    "SMFS_CUTOFFS",
    "SmfsResult",
    "CancellationResult",
    "DivergenceError",
    "FieldSweep",
    "smfs_search",
    "cancellation_solve",
    "energy_sweep",
]

SMFS_CUTOFFS = (1e-2, 1e-3, 1e-9)
"""Gradient-magnitude cutoffs (ueV/mT) used for the per-level stability flags."""

_AXIS_INDEX = {"x": 0, "y": 1, "z": 2}

# The 26 neighbors of a point on a 3x3x3 cube.
_OFFSETS = np.array(
    [
        (i, j, k)
        for i in (-1, 0, 1)
        for j in (-1, 0, 1)
        for k in (-1, 0, 1)
        if (i, j, k) != (0, 0, 0)
    ],
    dtype=float,
)


class DivergenceError(RuntimeError):
    """The cancellation iteration is running away instead of contracting."""

    def __init__(self, message: str, history: tuple[float, ...]):
        super().__init__(message)
        self.history = history


@dataclass
class SmfsResult:
    """Outcome of the adaptive grid search.

    ``theta`` is the summed gradient magnitude of the tracked levels at
    ``bs_opt``; ``smfs_flags[c][j]`` is True when level j's gradient
    magnitude is below cutoff c.  ``trace`` records (theta, spacing) after
    every iteration.  The tracked eigenvectors and energies at the optimum
    are kept so amplitude-continuation chains can reanchor cheaply.
    """

    bs_opt: np.ndarray
    theta: float
    gradients: np.ndarray
    gradient_norms: np.ndarray
    smfs_flags: dict[float, tuple[bool, ...]]
    iterations: int
    final_spacing: float
    evaluations: int
    trace: tuple[tuple[float, float], ...]
    tracked_vectors: np.ndarray
    tracked_energies: np.ndarray


def _ramp_anchor(
    params: StaticParams, field: FourierField, n_harmonics: int, ramp_step: float
) -> tuple[np.ndarray, np.ndarray]:
    """Tracked eigenvectors and energies at full drive, via an amplitude ramp."""
    scale = field.amplitude_scale()
    n = max(1, int(np.ceil(scale / max(ramp_step, 1e-9))))
    curves = track_field_ramp(
        params, field, np.linspace(0.0, 1.0, n + 1), n_harmonics=n_harmonics
    )
    return curves.final_vectors, curves.energies[-1]


def smfs_search(
    params: StaticParams,
    field: FourierField,
    bs_init=None,
    *,
    n_harmonics: int = 10,
    initial_spacing: float = 0.1,
    min_spacing: float = 1e-5,
    theta_tol: float = 1e-12,
    max_iterations: int = 20000,
    ramp_step_mT: float = 1.0,
    anchor: "tuple[np.ndarray, np.ndarray] | None" = None,
) -> SmfsResult:
    """Adaptive grid search minimizing the summed level-gradient magnitudes.

    The objective is evaluated at the center of a 3x3x3 cube and its 26
    neighbors; the search moves to the best strictly improving neighbor and,
    when none improves, shrinks the spacing by sqrt(3).  It stops once the
    spacing falls below ``min_spacing`` or the objective drops below
    ``theta_tol``.  Replica identity is carried by overlap from the current
    center, which is initially anchored by an amplitude ramp at ``bs_init``
    (or by the supplied ``anchor`` of tracked vectors and energies, e.g.
    from the previous amplitude of a continuation chain).
    """
    bs0 = np.zeros(3) if bs_init is None else np.asarray(bs_init, dtype=float).copy()
    if bs0.shape != (3,) or not np.all(np.isfinite(bs0)):
        raise ValueError("bs_init must be a finite 3-vector")
    if anchor is None:
        anchor = _ramp_anchor(params.with_bs(bs0), field, n_harmonics, ramp_step_mT)
    anchor_vectors, anchor_energies = anchor

    cache: dict[tuple, tuple] = {}

    def evaluate(bs, ref_vectors, ref_energies):
        key = tuple(np.round(bs, 12))
        hit = cache.get(key)
        if hit is not None:
            return hit
        p = params.with_bs(bs)
        sol = solve_driven(p, field, n_harmonics)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", TrackingWarning)
            idx, _ = match_to_previous(ref_vectors, ref_energies, sol)
        vecs = sol.vectors[:, idx]
        es = sol.quasienergies[idx]
        grads = gradients_for_tracked(vecs, es, p)
        norms = np.linalg.norm(grads, axis=1)
        theta = float(norms.sum())
        if not np.isfinite(theta):
            raise RuntimeError(f"objective is not finite at bs={bs}")
        rec = (theta, grads, norms, vecs, es)
        cache[key] = rec
        return rec

    center = bs0
    theta_c, grads_c, norms_c, vecs_c, es_c = evaluate(center, anchor_vectors, anchor_energies)
    spacing = float(initial_spacing)
    iterations = 0
    trace: list[tuple[float, float]] = []
    while theta_c >= theta_tol and spacing >= min_spacing:
        if iterations >= max_iterations:
            warnings.warn(
                f"grid search stopped at the iteration cap ({max_iterations})",
                stacklevel=2,
            )
            break
        iterations += 1
        best_bs = None
        best = None
        for off in _OFFSETS:
            bs = center + spacing * off
            rec = evaluate(bs, vecs_c, es_c)
            if best is None or rec[0] < best[0]:
                best_bs, best = bs, rec
        if best is not None and best[0] < theta_c:
            center = best_bs
            theta_c, grads_c, norms_c, vecs_c, es_c = best
        else:
            spacing /= np.sqrt(3.0)
        trace.append((theta_c, spacing))

    flags = {c: tuple(bool(x) for x in (norms_c < c)) for c in SMFS_CUTOFFS}
    return SmfsResult(
        bs_opt=center,
        theta=theta_c,
        gradients=grads_c,
        gradient_norms=norms_c,
        smfs_flags=flags,
        iterations=iterations,
        final_spacing=spacing,
        evaluations=len(cache),
        trace=tuple(trace),
        tracked_vectors=vecs_c,
        tracked_energies=es_c,
    )


@dataclass
class CancellationResult:
    """Outcome of the self-consistent effective-Zeeman cancellation."""

    bs_opt: np.ndarray
    residual: float
    iterations: int
    converged: bool
    residual_history: tuple[float, ...]


def cancellation_solve(
    params: StaticParams,
    field: FourierField,
    bs_init=None,
    *,
    propagator_steps: int = 100,
    tolerance: float = 1e-4,
    max_iterations: int = 500,
) -> CancellationResult:
    """Find the static field that nulls the effective Zeeman vector.

    Each iteration decomposes the exact one-cycle effective Hamiltonian at
    the current static field, converts the linear coefficients into a field
    through the transpose-inverse g-tensor, and subtracts it.  Converged
    when the effective Zeeman magnitude drops below ``tolerance`` (mT);
    raises DivergenceError when the residual grows tenfold over 20
    iterations.  Requires S = 1 (the basis decomposition is spin-1 only).
    """
    bs = np.zeros(3) if bs_init is None else np.asarray(bs_init, dtype=float).copy()
    if bs.shape != (3,) or not np.all(np.isfinite(bs)):
        raise ValueError("bs_init must be a finite 3-vector")
    if params.spin_dim != 3:
        raise ValueError("cancellation requires S = 1")
    g_t = np.asarray(params.g, dtype=float).T
    history: list[float] = []
    for it in range(1, int(max_iterations) + 1):
        eff = effective_hamiltonian(params.with_bs(bs), field, propagator_steps)
        script_b = eff.script_b_eff
        residual = float(np.linalg.norm(script_b))
        history.append(residual)
        if residual < tolerance:
            return CancellationResult(
                bs_opt=bs,
                residual=residual,
                iterations=it,
                converged=True,
                residual_history=tuple(history),
            )
        if len(history) > 20 and history[-1] > 10.0 * history[-21]:
            raise DivergenceError(
                f"cancellation iteration diverged at bs={bs}: residual "
                f"{history[-21]:.3e} -> {history[-1]:.3e} mT over 20 iterations",
                tuple(history),
            )
        bs = bs - np.linalg.solve(g_t, script_b)
    warnings.warn(
        f"cancellation did not converge within {max_iterations} iterations "
        f"(residual {history[-1]:.3e} mT)",
        stacklevel=2,
    )
    return CancellationResult(
        bs_opt=bs,
        residual=history[-1],
        iterations=int(max_iterations),
        converged=False,
        residual_history=tuple(history),
    )


@dataclass
class FieldSweep:
    """Level curves along one static-field axis through a center point."""

    axis: str
    bs_center: np.ndarray
    offsets: np.ndarray
    energies: np.ndarray
    gradients: np.ndarray


def energy_sweep(
    params: StaticParams,
    field: FourierField,
    bs_center,
    axis: str,
    halfwidth: float,
    step: float,
    *,
    n_harmonics: int = 10,
    ramp_step_mT: float = 1.0,
    anchor: "tuple[np.ndarray, np.ndarray] | None" = None,
) -> FieldSweep:
    """Tracked level curves versus a static-field offset along one axis.

    The sweep runs outward from ``bs_center`` in both directions, carrying
    labels by overlap, so the columns of ``energies`` keep a consistent
    identity through crossings.  Gradients use the tracked eigenvectors.
    """
    if axis not in _AXIS_INDEX:
        raise ValueError("axis must be one of 'x', 'y', 'z'")
    if step <= 0 or halfwidth < 0:
        raise ValueError("step must be positive and halfwidth non-negative")
    bs_center = np.asarray(bs_center, dtype=float)
    unit = np.zeros(3)
    unit[_AXIS_INDEX[axis]] = 1.0
    k = int(round(halfwidth / step))
    offsets = step * np.arange(-k, k + 1)
    if anchor is None:
        anchor = _ramp_anchor(params.with_bs(bs_center), field, n_harmonics, ramp_step_mT)
    anchor_vectors, anchor_energies = anchor

    n_levels = params.spin_dim
    energies = np.empty((offsets.size, n_levels))
    gradients = np.empty((offsets.size, n_levels, 3))
    center_idx = k
    p_center = params.with_bs(bs_center)
    energies[center_idx] = anchor_energies
    gradients[center_idx] = gradients_for_tracked(anchor_vectors, anchor_energies, p_center)

    for direction in (+1, -1):
        prev_vectors, prev_energies = anchor_vectors, anchor_energies
        for j in range(1, k + 1):
            i = center_idx + direction * j
            p = params.with_bs(bs_center + offsets[i] * unit)
            sol = solve_driven(p, field, n_harmonics)
            with warnings.catch_warnings():
                warnings.simplefilter("ignore", TrackingWarning)
                idx, _ = match_to_previous(prev_vectors, prev_energies, sol)
            prev_vectors = sol.vectors[:, idx]
            prev_energies = sol.quasienergies[idx]
            energies[i] = prev_energies
            gradients[i] = gradients_for_tracked(prev_vectors, prev_energies, p)
    return FieldSweep(
        axis=axis,
        bs_center=bs_center,
        offsets=offsets,
        energies=energies,
        gradients=gradients,
    )
