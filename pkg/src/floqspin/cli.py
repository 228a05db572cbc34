"""Command-line driver: parameter sweeps, optimizations, and file outputs.

Each run mode walks the (polarization, E/D) grid of the configuration,
carries the drive amplitude up from zero along each chain, and writes one
CSV row per (grid point, level) plus a JSON manifest.  Rows within a grid
point are ordered by ascending energy; the ``level`` column carries the
persistent tracked label.  CSV output is deterministic for a given
configuration; SVG plots are derived artifacts and excluded from
comparisons.

Exit codes: 0 success, 1 configuration error, 2 numerical failure,
3 comparison failure.
"""

from __future__ import annotations

import argparse
import csv
import json
import platform
import sys
import time
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import __version__
from .config import ConfigError, ExperimentConfig, MODES, load_config
from .drive import DriveSpec, to_fourier
from .floquet import (
    TrackingWarning,
    gradients_for_tracked,
    match_to_previous,
    solve_driven,
    track_levels,
)
from .optimize import SMFS_CUTOFFS, cancellation_solve, energy_sweep, smfs_search
from .spin import StaticParams
from .stroboscopic import effective_hamiltonian
from .vanvleck import vanvleck_spin

CSV_HEADER = [
    "polarization",
    "E_over_D",
    "BF_mT",
    "level",
    "energy_ueV",
    "grad_x_ueV_per_mT",
    "grad_y_ueV_per_mT",
    "grad_z_ueV_per_mT",
    "Bs_x_mT",
    "Bs_y_mT",
    "Bs_z_mT",
    "smfs_1e-2",
    "smfs_1e-3",
    "smfs_1e-9",
    "method",
]

# Columns whose values may differ between runs being compared without failing.
_INFORMATIONAL_COLUMNS = {"level", "method"}


def _fmt(x: float) -> str:
    return f"{x:.12g}"


@dataclass
class SweepRecord:
    polarization: str
    e_over_d: float
    bf: float
    level: int
    energy: float
    grad: np.ndarray
    bs: np.ndarray
    method: str

    def row(self) -> list[str]:
        norm = float(np.linalg.norm(self.grad))
        flags = [int(norm < c) for c in SMFS_CUTOFFS]
        return [
            self.polarization,
            _fmt(self.e_over_d),
            _fmt(self.bf),
            str(self.level),
            _fmt(self.energy),
            *(_fmt(v) for v in self.grad),
            *(_fmt(v) for v in self.bs),
            *(str(f) for f in flags),
            self.method,
        ]


def _records_for_point(pol, eod, bf, energies, grads, bs, method) -> list[SweepRecord]:
    order = np.argsort(energies, kind="stable")
    return [
        SweepRecord(
            polarization=pol,
            e_over_d=eod,
            bf=bf,
            level=int(j),
            energy=float(energies[j]),
            grad=np.asarray(grads[j], dtype=float),
            bs=np.asarray(bs, dtype=float),
            method=method,
        )
        for j in order
    ]


def _params(cfg: ExperimentConfig, eod: float) -> StaticParams:
    return StaticParams(S=cfg.S, D=cfg.D_ueV, E=eod * cfg.D_ueV, g=cfg.g, bs=cfg.Bs_mT)


def _chain_sweep(cfg: ExperimentConfig, pol: str, eod: float) -> list[SweepRecord]:
    params = _params(cfg, eod)
    drive = DriveSpec.from_name(pol, hbar_omega=cfg.hbar_omega_ueV)
    grid = cfg.bf_grid()
    curves = track_levels(
        params, drive, grid, n_harmonics=cfg.N_floquet, compute_gradients=True
    )
    records: list[SweepRecord] = []
    for k, bf in enumerate(grid):
        records += _records_for_point(
            pol, eod, bf, curves.energies[k], curves.gradients[k], params.bs, "sweep"
        )
    return records


def _chain_smfs(cfg: ExperimentConfig, pol: str, eod: float) -> list[SweepRecord]:
    params = _params(cfg, eod)
    drive = DriveSpec.from_name(pol, hbar_omega=cfg.hbar_omega_ueV)
    records: list[SweepRecord] = []
    bs = np.asarray(cfg.Bs_mT, dtype=float)
    anchor = None
    for bf in cfg.bf_grid():
        field = to_fourier(drive.with_amplitude(bf))
        try:
            res = smfs_search(
                params,
                field,
                bs_init=bs,
                n_harmonics=cfg.N_floquet,
                initial_spacing=cfg.smfs_spacing_mT,
                min_spacing=cfg.smfs_min_spacing_mT,
                theta_tol=cfg.smfs_theta_tol,
                ramp_step_mT=cfg.dBF_mT,
                anchor=anchor,
            )
        except Exception as exc:
            raise RuntimeError(f"at B_F = {bf:g} mT: {exc}") from exc
        bs = res.bs_opt
        anchor = (res.tracked_vectors, res.tracked_energies)
        records += _records_for_point(
            pol, eod, bf, res.tracked_energies, res.gradients, bs, "smfs"
        )
    return records


def _chain_cancel(cfg: ExperimentConfig, pol: str, eod: float) -> list[SweepRecord]:
    params = _params(cfg, eod)
    drive = DriveSpec.from_name(pol, hbar_omega=cfg.hbar_omega_ueV)
    records: list[SweepRecord] = []
    bs = np.asarray(cfg.Bs_mT, dtype=float)
    anchor = None
    for bf in cfg.bf_grid():
        field = to_fourier(drive.with_amplitude(bf))
        try:
            res = cancellation_solve(
                params,
                field,
                bs_init=bs,
                propagator_steps=cfg.N_T,
                tolerance=cfg.cancel_tol_mT,
                max_iterations=cfg.cancel_max_iterations,
            )
        except Exception as exc:
            raise RuntimeError(f"at B_F = {bf:g} mT: {exc}") from exc
        bs = res.bs_opt
        p_opt = params.with_bs(bs)
        sol = solve_driven(p_opt, field, cfg.N_floquet)
        if anchor is None:
            curves = track_levels(
                p_opt,
                drive,
                np.linspace(0.0, bf, max(2, int(np.ceil(bf / cfg.dBF_mT)) + 1))
                if bf > 0
                else np.array([0.0]),
                n_harmonics=cfg.N_floquet,
            )
            vectors, energies = curves.final_vectors, curves.energies[-1]
        else:
            with warnings.catch_warnings():
                warnings.simplefilter("ignore", TrackingWarning)
                idx, _ = match_to_previous(anchor[0], anchor[1], sol)
            vectors, energies = sol.vectors[:, idx], sol.quasienergies[idx]
        anchor = (vectors, energies)
        grads = gradients_for_tracked(vectors, energies, p_opt)
        records += _records_for_point(pol, eod, bf, energies, grads, bs, "cancel")
    return records


def _fold(x: np.ndarray, hw: float) -> np.ndarray:
    return x - hw * np.round(x / hw)


def _chain_effective(cfg: ExperimentConfig, pol: str, eod: float) -> list[SweepRecord]:
    """Cross-method rows: stroboscopic eigenvalues with tracked-state gradients."""
    params = _params(cfg, eod)
    drive = DriveSpec.from_name(pol, hbar_omega=cfg.hbar_omega_ueV)
    grid = cfg.bf_grid()
    curves = track_levels(
        params, drive, grid, n_harmonics=cfg.N_floquet, compute_gradients=True
    )
    records: list[SweepRecord] = []
    for k, bf in enumerate(grid):
        field = to_fourier(drive.with_amplitude(bf))
        eff = effective_hamiltonian(params, field, cfg.N_T)
        folded = np.sort(eff.eigenvalues())
        # Pair the sorted stroboscopic eigenvalues with the tracked levels by
        # energy rank so gradient columns stay meaningful.
        order = np.argsort(_fold(curves.energies[k], cfg.hbar_omega_ueV), kind="stable")
        energies = np.empty(folded.size)
        energies[order] = folded
        records += _records_for_point(
            pol, eod, bf, energies, curves.gradients[k], params.bs, "effective"
        )
    return records


def _chain_vanvleck(cfg: ExperimentConfig, pol: str, eod: float) -> list[SweepRecord]:
    params = _params(cfg, eod)
    drive = DriveSpec.from_name(pol, hbar_omega=cfg.hbar_omega_ueV)
    grid = cfg.bf_grid()
    curves = track_levels(
        params, drive, grid, n_harmonics=cfg.N_floquet, compute_gradients=True
    )
    records: list[SweepRecord] = []
    for k, bf in enumerate(grid):
        field = to_fourier(drive.with_amplitude(bf))
        res = vanvleck_spin(params, field)
        approx = np.sort(np.linalg.eigvalsh(res.h_eff))
        order = np.argsort(curves.energies[k], kind="stable")
        energies = np.empty(approx.size)
        energies[order] = approx
        records += _records_for_point(
            pol, eod, bf, energies, curves.gradients[k], params.bs, "vanvleck"
        )
    return records


def _chain_field_sweep(cfg: ExperimentConfig, pol: str, eod: float) -> list[SweepRecord]:
    params = _params(cfg, eod)
    drive = DriveSpec.from_name(pol, hbar_omega=cfg.hbar_omega_ueV, b_f=cfg.BF_mT)
    field = to_fourier(drive)
    sweep = energy_sweep(
        params,
        field,
        cfg.Bs_mT,
        cfg.sweep_axis,
        cfg.sweep_halfwidth_mT,
        cfg.sweep_step_mT,
        n_harmonics=cfg.N_floquet,
        ramp_step_mT=cfg.dBF_mT,
    )
    unit = np.zeros(3)
    unit["xyz".index(cfg.sweep_axis)] = 1.0
    records: list[SweepRecord] = []
    for i, off in enumerate(sweep.offsets):
        bs = np.asarray(cfg.Bs_mT) + off * unit
        records += _records_for_point(
            pol, eod, cfg.BF_mT, sweep.energies[i], sweep.gradients[i], bs, "field-sweep"
        )
    return records


_CHAIN_RUNNERS = {
    "sweep": _chain_sweep,
    "smfs": _chain_smfs,
    "cancel": _chain_cancel,
    "effective": _chain_effective,
    "vanvleck": _chain_vanvleck,
    "field-sweep": _chain_field_sweep,
}


def _run_chain(cfg, pol, eod):
    t0 = time.perf_counter()
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        records = _CHAIN_RUNNERS[cfg.mode](cfg, pol, eod)
    notes = sorted({str(w.message) for w in caught})
    return records, notes, time.perf_counter() - t0


def write_csv(records: list[SweepRecord], path: Path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(CSV_HEADER)
        for rec in records:
            writer.writerow(rec.row())


def write_plots(records: list[SweepRecord], cfg: ExperimentConfig, out_dir: Path) -> list[str]:
    """One SVG per E/D value: a panel grid of energy curves per polarization."""
    from matplotlib.backends.backend_svg import FigureCanvasSVG
    from matplotlib.figure import Figure

    x_label = f"Bs_{cfg.sweep_axis} offset (mT)" if cfg.mode == "field-sweep" else "B_F (mT)"
    written = []
    for eod in cfg.E_over_D:
        rows = [r for r in records if r.e_over_d == eod]
        if not rows:
            continue
        pols = [p for p in cfg.polarizations if any(r.polarization == p for r in rows)]
        ncols = min(3, max(1, len(pols)))
        nrows = (len(pols) + ncols - 1) // ncols
        fig = Figure(figsize=(4 * ncols, 3 * nrows))
        FigureCanvasSVG(fig)
        axes = fig.subplots(nrows, ncols, squeeze=False)
        for i, pol in enumerate(pols):
            ax = axes[i // ncols][i % ncols]
            sel = [r for r in rows if r.polarization == pol]
            levels = sorted({r.level for r in sel})
            for lev in levels:
                pts = [r for r in sel if r.level == lev]
                if cfg.mode == "field-sweep":
                    xs = [r.bs["xyz".index(cfg.sweep_axis)] for r in pts]
                else:
                    xs = [r.bf for r in pts]
                ax.plot(xs, [r.energy for r in pts], label=f"level {lev}")
            ax.set_title(pol)
            ax.set_xlabel(x_label)
            ax.set_ylabel("energy (ueV)")
        for j in range(len(pols), nrows * ncols):
            axes[j // ncols][j % ncols].set_axis_off()
        if pols:
            axes[0][0].legend(fontsize="small")
        fig.tight_layout()
        name = f"{cfg.mode}_EoverD_{_fmt(eod)}.svg".replace("/", "_")
        fig.savefig(out_dir / name)
        written.append(name)
    return written


def run(cfg: ExperimentConfig, out_dir: Path, *, plots: bool = False, threads: int = 1,
        seed: "int | None" = None) -> int:
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    chains = [(pol, eod) for pol in cfg.polarizations for eod in cfg.E_over_D]
    started = time.strftime("%Y-%m-%dT%H:%M:%SZ", time.gmtime())
    t0 = time.perf_counter()
    outcomes: list = [None] * len(chains)
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            futures = [pool.submit(_run_chain, cfg, pol, eod) for pol, eod in chains]
            for i, fut in enumerate(futures):
                try:
                    outcomes[i] = ("ok", fut.result())
                except Exception as exc:  # noqa: BLE001 - recorded in the manifest
                    outcomes[i] = ("error", exc)
    else:
        for i, (pol, eod) in enumerate(chains):
            try:
                outcomes[i] = ("ok", _run_chain(cfg, pol, eod))
            except Exception as exc:  # noqa: BLE001
                outcomes[i] = ("error", exc)

    records: list[SweepRecord] = []
    chain_meta = []
    failures = []
    notes: list[str] = []
    for (pol, eod), (status, payload) in zip(chains, outcomes):
        if status == "ok":
            recs, chain_notes, seconds = payload
            records += recs
            notes += [f"{pol} E/D={_fmt(eod)}: {n}" for n in chain_notes]
            chain_meta.append(
                {"polarization": pol, "E_over_D": eod, "seconds": round(seconds, 3)}
            )
        else:
            failures.append(
                {"polarization": pol, "E_over_D": eod, "error": f"{type(payload).__name__}: {payload}"}
            )

    csv_path = out_dir / f"{cfg.mode}.csv"
    write_csv(records, csv_path)
    plot_files: list[str] = []
    if plots and records:
        plot_files = write_plots(records, cfg, out_dir)
    manifest = {
        "tool": "floqspin",
        "version": __version__,
        "python": platform.python_version(),
        "numpy": np.__version__,
        "mode": cfg.mode,
        "config": {k: (list(v) if isinstance(v, tuple) else v) for k, v in vars(cfg).items()},
        "seed": seed,
        "started_utc": started,
        "elapsed_s": round(time.perf_counter() - t0, 3),
        "n_records": len(records),
        "csv": csv_path.name,
        "plots": plot_files,
        "chains": chain_meta,
        "warnings": notes,
        "failures": failures,
    }
    with open(out_dir / "manifest.json", "w") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")
    if failures:
        for f in failures:
            print(
                f"numerical failure at polarization={f['polarization']} "
                f"E/D={f['E_over_D']}: {f['error']}",
                file=sys.stderr,
            )
        return 2
    print(f"wrote {len(records)} records to {csv_path}")
    return 0


def compare(path_a, path_b, tolerance: float) -> int:
    """Compare two run CSVs column by column; 0 iff within tolerance."""
    try:
        rows_a = list(csv.reader(open(path_a, newline="")))
        rows_b = list(csv.reader(open(path_b, newline="")))
    except OSError as exc:
        print(f"cannot read input: {exc}", file=sys.stderr)
        return 1
    if not rows_a or not rows_b:
        print("empty input file", file=sys.stderr)
        return 1
    if rows_a[0] != rows_b[0]:
        print("schema mismatch: headers differ", file=sys.stderr)
        return 3
    header = rows_a[0]
    if len(rows_a) != len(rows_b):
        print(f"row count mismatch: {len(rows_a) - 1} vs {len(rows_b) - 1}", file=sys.stderr)
        return 3
    max_dev = {name: 0.0 for name in header}
    mismatches = {name: 0 for name in header}
    for ra, rb in zip(rows_a[1:], rows_b[1:]):
        for name, a, b in zip(header, ra, rb):
            try:
                dev = abs(float(a) - float(b))
            except ValueError:
                if a != b:
                    mismatches[name] += 1
                continue
            max_dev[name] = max(max_dev[name], dev)
    failed = False
    print(f"{'column':<22}{'max |dev|':>14}")
    for name in header:
        if mismatches[name]:
            tag = "info" if name in _INFORMATIONAL_COLUMNS else "FAIL"
            failed = failed or (name not in _INFORMATIONAL_COLUMNS)
            print(f"{name:<22}{mismatches[name]:>10} text mismatches [{tag}]")
            continue
        ok = max_dev[name] <= tolerance
        failed = failed or not ok
        print(f"{name:<22}{max_dev[name]:>14.6e} [{'ok' if ok else 'FAIL'}]")
    return 3 if failed else 0


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="floqspin",
        description="Floquet-driven spin levels: sweeps, stability searches, effective Hamiltonians.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for mode in MODES:
        p = sub.add_parser(mode, help=f"run the {mode} mode")
        p.add_argument("--config", type=Path, default=None, help="configuration file (defaults reproduce the reference parameter set)")
        p.add_argument("--out", type=Path, default=Path("floqspin_out"), help="output directory")
        p.add_argument("--plots", action="store_true", help="also write SVG plots")
        p.add_argument("--threads", type=int, default=1, help="worker threads across (polarization, E/D) chains")
        p.add_argument("--seed", type=int, default=None, help="seed recorded in the manifest (randomized drivers only)")
    p = sub.add_parser("compare", help="compare two run CSVs")
    p.add_argument("run_a", type=Path)
    p.add_argument("run_b", type=Path)
    p.add_argument("--tol", type=float, default=1e-8, help="max allowed deviation per numeric column")
    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    if args.command == "compare":
        return compare(args.run_a, args.run_b, args.tol)
    try:
        cfg = load_config(args.config) if args.config else ExperimentConfig()
        if args.config is None:
            cfg.mode = args.command
        elif cfg.mode != args.command:
            raise ConfigError(
                f"config sets mode={cfg.mode!r} but the {args.command!r} subcommand was invoked"
            )
        cfg.validate()
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    if args.threads < 1:
        print("config error: --threads must be >= 1", file=sys.stderr)
        return 1
    return run(cfg, args.out, plots=args.plots, threads=args.threads, seed=args.seed)


if __name__ == "__main__":
    raise SystemExit(main())
