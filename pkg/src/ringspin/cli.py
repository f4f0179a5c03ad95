"""Command-line interface: spectra, correlations, state preparation and sweeps.

Every command writes a CSV (``# schema=v1`` comment, header row, 12
significant digits) and, when ``--manifest`` or ``--output`` is given, a
JSON manifest holding the fully resolved configuration.  ``replay`` reruns
a manifest and reproduces the CSV byte for byte.

Exit codes: 0 success, 2 invalid configuration, 3 numerical failure,
4 threshold miss in ``--check`` mode.
"""

from __future__ import annotations

import argparse
import configparser
import csv
import io
import json
import logging
import os
import sys
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import __version__
from .basis import Frame, rotate_state
from .correlations import correlation_report
from .dynamics import (
    excitation_protocol,
    ground_target,
    prepare_ground,
    time_series,
)
from .errors import NumericalError, RingSpinError
from .fermion import FermionLabel, all_labels, construct_state, label_energy, matched_eigenstates
from .hamiltonian import build_h_spin, diagonalize
from .model import SystemParams
from .symmetry import SYMMETRY_TOL, symmetry_residuals

log = logging.getLogger("ringspin")

SCHEMA = "v1"
EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC, EXIT_CHECK = 0, 2, 3, 4

SPECTRUM_TOL = 2e-3
CORRELATION_TOL = 1e-9
GROUND_FIDELITY_MIN = 0.99


class ConfigError(RingSpinError, ValueError):
    """Malformed command line, config file or manifest."""


# --------------------------------------------------------------------------
# option tables: one source for argparse, config files and manifests
# --------------------------------------------------------------------------


def _floats(text):
    if isinstance(text, (list, tuple)):
        return [float(v) for v in text]
    return [float(v) for v in str(text).replace(",", " ").split()]


def _ints(text):
    if isinstance(text, (list, tuple)):
        return [int(v) for v in text]
    return [int(v) for v in str(text).replace(",", " ").split()]


def _bool(text):
    if isinstance(text, bool):
        return text
    value = str(text).strip().lower()
    if value in ("1", "true", "yes", "on"):
        return True
    if value in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


@dataclass(frozen=True)
class Opt:
    name: str
    type: object
    default: object
    help: str
    flag: bool = False

    @property
    def dest(self):
        return self.name.replace("-", "_")


PHYSICS = [
    Opt("L", int, 10, "number of ring sites"),
    Opt("omega", float, 10.0, "Rabi frequency in units of beta"),
    Opt("delta", float, 0.0, "detuning in units of beta"),
    Opt("beta", float, 1.0, "nearest-neighbour interaction (energy unit)"),
]

OUTPUT = [
    Opt("output", str, None, "CSV path (default: stdout)"),
    Opt("manifest", str, None, "JSON manifest path (default: <output>.json when --output is set)"),
    Opt("check", _bool, False, "exit 4 when the command's acceptance threshold is missed", flag=True),
]

COMMANDS = {
    "spectrum": PHYSICS
    + [
        Opt("mode", str, "both", "analytic, numeric or both"),
        Opt("sector", str, "symmetric", "numeric sector: full or symmetric"),
        Opt("k", int, None, "number of lowest numeric eigenvalues (default: all)"),
        Opt("omega-grid", _floats, None, "Omega values for a numeric sweep, e.g. '0 2 4 6'"),
    ],
    "correlate": [
        Opt("L", int, 10, "number of ring sites"),
        Opt("p", int, 1, "mode index of |2_p>"),
        Opt("analytic-only", _bool, False, "skip the state vector (allows large L)", flag=True),
        Opt("density", str, "rydberg", "density operator: rydberg or plus"),
    ],
    "state": [
        Opt("L", int, 6, "number of ring sites"),
        Opt("kind", str, "ground", "state label: ground, one, two:p or three:p,q,r"),
        Opt("frame", str, "rotated", "output frame: rotated or lab"),
        Opt("check-symmetry", _bool, False, "report shift and reversal residuals", flag=True),
    ],
    "prepare-ground": [
        Opt("L", int, 6, "number of ring sites"),
        Opt("beta", float, 1.0, "nearest-neighbour interaction"),
        Opt("delta0", float, 45.0, "initial detuning"),
        Opt("t-final", float, 0.9, "ramp duration in 1/beta"),
        Opt("omega-final", float, 10.0, "final Rabi frequency"),
        Opt("rel-tol", float, 1e-10, "integrator relative tolerance"),
        Opt("checkpoints", int, 50, "number of time-series intervals"),
    ],
    "excite": [
        Opt("L", int, 6, "number of ring sites"),
        Opt("omega", float, 6.0, "Rabi frequency held during the pulses"),
        Opt("delta", float, 0.0, "static detuning"),
        Opt("beta", float, 1.0, "nearest-neighbour interaction"),
        Opt("target", str, "one", "target label: one or two:p"),
        Opt("delta-osc", float, 0.05, "oscillating detuning amplitude"),
        Opt("energy-source", str, "exact", "resonance energies: exact or analytic"),
        Opt("rel-tol", float, 1e-10, "integrator relative tolerance"),
        Opt("checkpoints", int, 200, "number of time-series intervals"),
    ],
    "sweep": [
        Opt("delta0", _floats, [15.0, 30.0, 45.0, 60.0], "initial detunings"),
        Opt("t-final", _floats, [0.3, 0.6, 0.9], "ramp durations"),
        Opt("L", _ints, [4, 6, 8, 10], "ring sizes"),
        Opt("omega-final", _floats, [10.0], "final Rabi frequencies"),
        Opt("beta", float, 1.0, "nearest-neighbour interaction"),
        Opt("rel-tol", float, 1e-10, "integrator relative tolerance"),
        Opt("workers", int, None, "worker processes (default: logical cores)"),
    ],
}
for _name in COMMANDS:
    COMMANDS[_name] = COMMANDS[_name] + OUTPUT

def _add_options(sub, opts):
    for opt in opts:
        if opt.flag:
            sub.add_argument(f"--{opt.name}", dest=opt.dest, action="store_const", const=True, default=None, help=opt.help)
        elif opt.type in (_floats, _ints):
            cast = float if opt.type is _floats else int
            sub.add_argument(f"--{opt.name}", dest=opt.dest, type=cast, nargs="+", default=None, help=opt.help)
        else:
            sub.add_argument(f"--{opt.name}", dest=opt.dest, type=opt.type, default=None, help=opt.help)


COMMAND_HELP = {
    "spectrum": "analytic and exact energies",
    "correlate": "g2 profile of a two-fermion state",
    "state": "amplitudes of a constructed state",
    "prepare-ground": "adiabatic ramp to the fermionic vacuum",
    "excite": "resonant pi pulses to |1> or |2_p>",
    "sweep": "ground-preparation fidelity over a parameter grid",
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ringspin", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="count", default=0)
    subs = parser.add_subparsers(dest="command", required=True)
    for name, opts in COMMANDS.items():
        sub = subs.add_parser(name, help=COMMAND_HELP[name])
        sub.add_argument("--config", default=None, help="INI file with a [%s] section" % name)
        _add_options(sub, opts)
        if name == "spectrum":
            group = sub.add_mutually_exclusive_group()
            for m in ("analytic", "numeric", "both"):
                group.add_argument(f"--{m}", dest="mode", action="store_const", const=m)
    replay = subs.add_parser("replay", help="rerun a JSON manifest")
    replay.add_argument("manifest_in", metavar="MANIFEST")
    replay.add_argument("--output", default=None, help="override the CSV path stored in the manifest")
    return parser


def _read_config(path, command):
    parser = configparser.ConfigParser()
    parser.optionxform = str  # keep "L" distinct from "l"
    try:
        with open(path, encoding="utf-8") as fh:
            parser.read_file(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    except configparser.Error as exc:
        raise ConfigError(f"malformed config {path}: {exc}") from exc
    if not parser.has_section(command):
        return {}
    return {k.replace("-", "_"): v for k, v in parser.items(command)}


def resolve_config(command, args: argparse.Namespace) -> dict:
    """Defaults, then config file values, then explicit flags."""
    opts = {o.dest: o for o in COMMANDS[command]}
    from_file = _read_config(args.config, command) if getattr(args, "config", None) else {}
    unknown = set(from_file) - set(opts)
    if unknown:
        raise ConfigError(f"unknown keys in [{command}]: {', '.join(sorted(unknown))}")
    cfg = {}
    for dest, opt in opts.items():
        value = getattr(args, dest, None)
        if value is None and dest in from_file:
            try:
                value = opt.type(from_file[dest])
            except (TypeError, ValueError) as exc:
                raise ConfigError(f"[{command}] {dest}: {exc}") from exc
        cfg[dest] = opt.default if value is None else value
    return cfg


# --------------------------------------------------------------------------
# CSV and manifest emission
# --------------------------------------------------------------------------


def _fmt(value):
    if isinstance(value, (bool, np.bool_)):
        return str(bool(value)).lower()
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return "%.12g" % value
    if value is None:
        return ""
    return str(value)


def render_csv(header, rows) -> str:
    out = io.StringIO(newline="")
    out.write(f"# schema={SCHEMA}\n")
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(header)
    writer.writerows([_fmt(v) for v in row] for row in rows)
    return out.getvalue()


def _write_text(path, text):
    if path is None or path == "-":
        sys.stdout.write(text)
        return
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, np.generic):
        return obj.item()
    return obj


@dataclass
class Outcome:
    header: list
    rows: list
    results: dict
    passed: bool | None = None


def _emit(command, cfg, outcome: Outcome):
    _write_text(cfg["output"], render_csv(outcome.header, outcome.rows))
    manifest_path = cfg["manifest"]
    if manifest_path is None and cfg["output"] not in (None, "-"):
        manifest_path = cfg["output"] + ".json"
    if manifest_path is None:
        return
    manifest = {
        "schema": SCHEMA,
        "version": __version__,
        "command": command,
        "config": {k: v for k, v in cfg.items() if k not in ("manifest",)},
        "results": outcome.results,
    }
    if outcome.passed is not None:
        manifest["check_passed"] = outcome.passed
    with open(manifest_path, "w", encoding="utf-8", newline="") as fh:
        json.dump(_jsonable(manifest), fh, indent=2, sort_keys=True)
        fh.write("\n")


# --------------------------------------------------------------------------
# commands
# --------------------------------------------------------------------------


def _params(cfg, **over) -> SystemParams:
    keys = {k: cfg[k] for k in ("L", "omega", "delta", "beta") if k in cfg}
    keys.update(over)
    return SystemParams(**keys)


def cmd_spectrum(cfg) -> Outcome:
    mode = cfg["mode"]
    if mode not in ("analytic", "numeric", "both"):
        raise ConfigError(f"mode must be analytic, numeric or both, got {mode!r}")
    if cfg["sector"] not in ("full", "symmetric"):
        raise ConfigError(f"sector must be full or symmetric, got {cfg['sector']!r}")
    params = _params(cfg)

    if cfg["omega_grid"]:
        if mode != "numeric":
            raise ConfigError("--omega-grid produces numeric sweeps only; pass --numeric")
        rows = []
        for om in cfg["omega_grid"]:
            spec = diagonalize(build_h_spin(params.with_(omega=om)), k=cfg["k"], sector=cfg["sector"])
            rows += [(om, i, e) for i, e in enumerate(spec.values)]
        return Outcome(["omega", "index", "eigenvalue"], rows, {"n_rows": len(rows)})

    if mode == "numeric":
        spec = diagonalize(build_h_spin(params), k=cfg["k"], sector=cfg["sector"])
        rows = list(enumerate(spec.values))
        return Outcome(["index", "eigenvalue"], rows, {"n_eigenvalues": len(rows), "sector": spec.sector})

    labels = all_labels(params.L)
    if mode == "analytic":
        rows = []
        for lab in labels:
            corrected = None
            if lab.n_fermions <= 1 and params.omega > params.beta / 4:
                corrected = label_energy(params, lab, corrected=True).value
            rows.append((str(lab), lab.n_fermions, label_energy(params, lab).value, corrected))
        return Outcome(["label", "n_fermions", "energy", "energy_corrected"], rows, {"n_labels": len(rows)})

    matched = matched_eigenstates(params, labels)
    rows, worst = [], 0.0
    for lab in labels:
        a = label_energy(params, lab).value
        m = matched[lab]
        rel = abs(a - m.energy) / abs(m.energy) if m.energy else abs(a)
        worst = max(worst, rel)
        rows.append((str(lab), lab.n_fermions, a, m.energy, m.overlap, rel))
    passed = worst < SPECTRUM_TOL
    return Outcome(
        ["label", "n_fermions", "analytic", "numeric", "overlap", "rel_discrepancy"],
        rows,
        {"max_rel_discrepancy": worst, "threshold": SPECTRUM_TOL},
        passed,
    )


def cmd_correlate(cfg) -> Outcome:
    L, p = cfg["L"], cfg["p"]
    if cfg["analytic_only"]:
        rep = correlation_report(L, p, analytic_only=True)
        rows = list(zip(rep.analytic.distances, rep.analytic.values))
        return Outcome(["x", "g2_analytic"], rows, {"L": L, "p": p})
    state = construct_state(L, FermionLabel.two(p).validate(L))
    rep = correlation_report(L, p, state=state)
    if cfg["density"] != "rydberg":
        from .correlations import profile_of_state

        numeric = profile_of_state(state, density=cfg["density"])
        rows = list(zip(rep.analytic.distances, rep.analytic.values, numeric.values))
        return Outcome(["x", "g2_analytic", "g2_numeric_" + cfg["density"]], rows, {"L": L, "p": p})
    rows = list(zip(rep.analytic.distances, rep.analytic.values, rep.numeric.values, rep.abs_diff))
    worst = rep.max_abs_diff
    return Outcome(
        ["x", "g2_analytic", "g2_numeric", "abs_diff"],
        rows,
        {"L": L, "p": p, "max_abs_diff": worst, "threshold": CORRELATION_TOL},
        worst < CORRELATION_TOL,
    )


def cmd_state(cfg) -> Outcome:
    label = FermionLabel.parse(cfg["kind"])
    state, norm = construct_state(cfg["L"], label, return_norm=True)
    state = rotate_state(state, Frame.parse(cfg["frame"]))
    amps = state.amplitudes
    keep = np.flatnonzero(np.abs(amps) > 0)
    rows = [(int(i), amps[i].real, amps[i].imag) for i in keep]
    results = {"label": str(label), "frame": state.frame.value, "construction_norm": norm}
    passed = None
    if cfg["check_symmetry"]:
        rx, rr = symmetry_residuals(state)
        results.update(shift_residual=rx, reversal_residual=rr)
        sys.stderr.write(f"shift residual {rx:.3e}, reversal residual {rr:.3e}\n")
        passed = max(rx, rr) < SYMMETRY_TOL
    return Outcome(["index", "re", "im"], rows, results, passed)


def _series_rows(series):
    return [tuple(r) for r in series]


def cmd_prepare_ground(cfg) -> Outcome:
    res = prepare_ground(
        cfg["L"],
        delta0=cfg["delta0"],
        t_final=cfg["t_final"],
        omega_final=cfg["omega_final"],
        beta=cfg["beta"],
        rel_tol=cfg["rel_tol"],
        n_checkpoints=cfg["checkpoints"],
    )
    prop = res.propagation
    series = time_series(prop, ground_target(cfg["L"]))
    results = {
        "fidelity": res.fidelity,
        "norm_drift": prop.norm_drift,
        "max_symmetry_residual": prop.max_symmetry_residual,
        "symmetry_residuals": prop.symmetry_residuals,
        "nfev": prop.nfev,
        "duration": prop.duration,
        "schedule": res.schedule.to_dict(),
        "threshold": GROUND_FIDELITY_MIN,
    }
    log.info("fidelity to |G>: %.6f", res.fidelity)
    return Outcome(["t", "fidelity", "m", "norm"], _series_rows(series), results, res.fidelity > GROUND_FIDELITY_MIN)


def cmd_excite(cfg) -> Outcome:
    target = FermionLabel.parse(cfg["target"])
    params = _params(cfg)
    res = excitation_protocol(
        target,
        params,
        cfg["delta_osc"],
        energy_source=cfg["energy_source"],
        rel_tol=cfg["rel_tol"],
        n_checkpoints=cfg["checkpoints"],
    )
    ref = rotate_state(construct_state(params.L, target), Frame.LAB)
    series = time_series(res.propagation, ref)
    table = sorted(
        ((str(lab), res.overlaps[lab], res.populations[lab]) for lab in res.overlaps),
        key=lambda r: -r[2],
    )
    results = {
        "target": str(target),
        "dominant": str(res.dominant),
        "target_fidelity": res.target_fidelity,
        "target_population": res.target_population,
        "leakage": res.leakage,
        "overlap_table": [{"label": a, "analytic_fidelity": b, "population": c} for a, b, c in table],
        "transitions": [
            {
                "from": str(t.source),
                "to": str(t.target),
                "frequency": t.frequency,
                "matrix_element": t.matrix_element,
                "energy_source": t.energy_source,
            }
            for t in res.transitions
        ],
        "norm_drift": res.propagation.norm_drift,
        "max_symmetry_residual": res.propagation.max_symmetry_residual,
        "symmetry_residuals": res.propagation.symmetry_residuals,
        "duration": res.propagation.duration,
        "schedule": res.schedule.to_dict(),
    }
    sys.stderr.write("label,analytic_fidelity,population\n")
    for a, b, c in table[:6]:
        sys.stderr.write(f"{a},{b:.6f},{c:.6f}\n")
    return Outcome(["t", "fidelity", "m", "norm"], _series_rows(series), results, res.dominant == target)


def _sweep_cell(cell):
    delta0, t_final, L, omega_final, beta, rel_tol = cell
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            res = prepare_ground(L, delta0, t_final, omega_final, beta, rel_tol, n_checkpoints=1)
        return (delta0, t_final, L, omega_final, res.fidelity, "ok")
    except (RingSpinError, ValueError) as exc:
        return (delta0, t_final, L, omega_final, None, f"error: {type(exc).__name__}: {exc}")


def cmd_sweep(cfg) -> Outcome:
    for L in cfg["L"]:
        SystemParams(L=L)
    cells = [
        (d0, tf, L, om, cfg["beta"], cfg["rel_tol"])
        for L in cfg["L"]
        for om in cfg["omega_final"]
        for d0 in cfg["delta0"]
        for tf in cfg["t_final"]
    ]
    workers = cfg["workers"] or os.cpu_count() or 1
    if workers < 1:
        raise ConfigError(f"workers must be >= 1, got {workers}")
    if workers == 1:
        rows = [_sweep_cell(c) for c in cells]
    else:
        # map preserves submission order, so the collector writes a fixed row order
        with ProcessPoolExecutor(max_workers=min(workers, len(cells))) as pool:
            rows = list(pool.map(_sweep_cell, cells))
    failures = [r for r in rows if r[5] != "ok"]
    ok = [r for r in rows if r[5] == "ok"]
    best = max(ok, key=lambda r: r[4]) if ok else None
    results = {
        "n_cells": len(rows),
        "n_failed": len(failures),
        "best": None if best is None else dict(zip(["delta0", "t_final", "L", "omega_final", "fidelity"], best[:5])),
    }
    return Outcome(["delta0", "t_final", "L", "omega_final", "fidelity", "status"], rows, results, not failures)


HANDLERS = {
    "spectrum": cmd_spectrum,
    "correlate": cmd_correlate,
    "state": cmd_state,
    "prepare-ground": cmd_prepare_ground,
    "excite": cmd_excite,
    "sweep": cmd_sweep,
}


def run(command, cfg) -> int:
    outcome = HANDLERS[command](cfg)
    _emit(command, cfg, outcome)
    if cfg.get("check") and outcome.passed is False:
        log.error("%s: acceptance threshold missed", command)
        return EXIT_CHECK
    return EXIT_OK


def _replay(args) -> int:
    try:
        with open(args.manifest_in, encoding="utf-8") as fh:
            manifest = json.load(fh)
        command = manifest["command"]
        stored = manifest["config"]
    except (OSError, ValueError, KeyError) as exc:
        raise ConfigError(f"cannot replay {args.manifest_in}: {exc}") from exc
    if command not in COMMANDS:
        raise ConfigError(f"manifest names unknown command {command!r}")
    cfg = {o.dest: stored.get(o.dest, o.default) for o in COMMANDS[command]}
    cfg["manifest"] = None
    if args.output is not None:
        cfg["output"] = args.output
    return run(command, cfg)


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.WARNING - 10 * min(args.verbose, 2),
        format="%(levelname)s %(name)s: %(message)s",
    )
    logging.captureWarnings(True)
    try:
        if args.command == "replay":
            return _replay(args)
        return run(args.command, resolve_config(args.command, args))
    except NumericalError as exc:
        log.error("numerical failure: %s", exc)
        return EXIT_NUMERIC
    except (RingSpinError, ValueError, OSError) as exc:
        log.error("invalid configuration: %s", exc)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
