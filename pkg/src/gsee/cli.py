"""Run configuration, artifact persistence, and the command-line front end.

Subcommands:
    ingest     FCIDUMP file -> Pauli-sum operator JSON (optionally tapered)
    qcels      overlap-series phase estimation run
    qcm4       moment/cumulant energy run
    recompile  variational compilation of the Hadamard-test target series
    report     summary table over finished run artifacts

A run resolves its settings into one plain dict: the config file first,
command-line overrides on top, then defaults.  The resolved dict is
embedded in results.json, all JSON is written with sorted keys, and the
modules keep their output independent of thread count, so identical
resolved configurations reproduce results.json byte for byte at any
--threads value.

Exit codes: 0 success, 1 runtime or numerical failure, 2 unreadable or
invalid input.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from pathlib import Path
from typing import Any, Mapping, Sequence

from .chem import (
    FermionIntegrals,
    ci_initial_state,
    determinants_from_json,
    jordan_wigner,
    parse_fcidump,
    taper_z2,
)
from .circuits import hea_ansatz, two_qubit_depth
from .pauli import PauliSum
from .qcels import acquire, choose_grid, fit, hadamard_test_state, scale
from .qcm4 import (
    Qcm4Result,
    bootstrap,
    build_moments,
    estimate,
    moment_report,
    pauli_filter,
    plan,
)
from .recompile import CompileConfig, compile_series
from .simulator import StateVector

__all__ = ["InputError", "SCHEMA_VERSION", "main", "resolve_config"]

SCHEMA_VERSION = 1

# dense ground-energy checks in ingest reports stop above this width
_DENSE_REPORT_CAP = 12


class InputError(Exception):
    """Unreadable or structurally invalid input; mapped to exit code 2."""


# ----------------------------------------------------------------------
# config resolution
# ----------------------------------------------------------------------
_MODE_CHOICES = {
    "qcels": ("exact", "shots", "recompiled"),
    "qcm4": ("exact", "shots"),
}

_QCM4_DEFAULTS = {
    "threshold": 0.0,
    "filter": False,
    "grouping": "full",
    "resamples": 500,
    "allocation": "uniform",
}

_COMPILE_DEFAULTS = {
    "layers": 6,
    "max_iterations": 500,
    "learning_rate": 0.05,
    "restarts": 3,
    "gradient": "shift",
    "fd_step": 1e-5,
    "tolerance": 1e-12,
    "warm_start": False,
}


def _load_text(path: Path) -> str:
    try:
        return path.read_text()
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc}") from None


def _parse_json(text: str, where: str) -> Any:
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputError(f"{where} is not valid JSON: {exc}") from None


def _check_keys(raw: Mapping, allowed: Sequence[str], where: str) -> None:
    unknown = sorted(set(raw) - set(allowed))
    if unknown:
        raise InputError(f"unknown {where} key(s): {', '.join(unknown)}")


def _as_int(value: Any, where: str, minimum: int | None = None) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise InputError(f"{where} must be an integer")
    if minimum is not None and value < minimum:
        raise InputError(f"{where} must be at least {minimum}")
    return value


def _as_number(value: Any, where: str, minimum: float | None = None) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise InputError(f"{where} must be a number")
    out = float(value)
    if minimum is not None and out < minimum:
        raise InputError(f"{where} must be at least {minimum}")
    return out


def _as_bool(value: Any, where: str) -> bool:
    if not isinstance(value, bool):
        raise InputError(f"{where} must be true or false")
    return value


def _as_str(value: Any, where: str, choices: Sequence[str] | None = None) -> str:
    if not isinstance(value, str):
        raise InputError(f"{where} must be a string")
    if choices is not None and value not in choices:
        raise InputError(f"{where} must be one of {', '.join(choices)}")
    return value


def _resolve_state(raw: Any) -> dict:
    if not isinstance(raw, Mapping):
        raise InputError("state must be an object")
    if "basis" in raw:
        _check_keys(raw, ("basis",), "state")
        return {"basis": _as_int(raw["basis"], "state.basis", minimum=0)}
    if "determinants" in raw:
        _check_keys(raw, ("determinants", "threshold"), "state")
        return {
            "determinants": _as_str(raw["determinants"], "state.determinants"),
            "threshold": _as_number(
                raw.get("threshold", 0.0), "state.threshold", minimum=0.0
            ),
        }
    raise InputError("state needs either 'basis' or 'determinants'")


def _resolve_compile(raw: Any, where: str) -> dict:
    if not isinstance(raw, Mapping):
        raise InputError(f"{where} must be an object")
    _check_keys(raw, tuple(_COMPILE_DEFAULTS), where)
    out = dict(_COMPILE_DEFAULTS)
    if "layers" in raw:
        out["layers"] = _as_int(raw["layers"], f"{where}.layers", minimum=1)
    if "max_iterations" in raw:
        out["max_iterations"] = _as_int(
            raw["max_iterations"], f"{where}.max_iterations", minimum=1
        )
    if "learning_rate" in raw:
        out["learning_rate"] = _as_number(
            raw["learning_rate"], f"{where}.learning_rate"
        )
    if "restarts" in raw:
        out["restarts"] = _as_int(raw["restarts"], f"{where}.restarts", minimum=1)
    if "gradient" in raw:
        out["gradient"] = _as_str(
            raw["gradient"], f"{where}.gradient", choices=("shift", "fd")
        )
    if "fd_step" in raw:
        out["fd_step"] = _as_number(raw["fd_step"], f"{where}.fd_step")
    if "tolerance" in raw:
        out["tolerance"] = _as_number(raw["tolerance"], f"{where}.tolerance")
    if "warm_start" in raw:
        out["warm_start"] = _as_bool(raw["warm_start"], f"{where}.warm_start")
    return out


def _resolve_qcels(raw: Mapping, mode: str) -> dict:
    _check_keys(raw, ("n_points", "fallback_norm", "compile"), "qcels")
    out: dict = {
        "n_points": _as_int(raw.get("n_points", 33), "qcels.n_points", minimum=2),
        "fallback_norm": _as_bool(
            raw.get("fallback_norm", False), "qcels.fallback_norm"
        ),
    }
    if mode == "recompiled":
        out["compile"] = _resolve_compile(raw.get("compile", {}), "qcels.compile")
    elif "compile" in raw:
        raise InputError("qcels.compile requires recompiled mode")
    return out


def _resolve_qcm4(raw: Mapping) -> dict:
    _check_keys(raw, tuple(_QCM4_DEFAULTS), "qcm4")
    out = dict(_QCM4_DEFAULTS)
    if "threshold" in raw:
        out["threshold"] = _as_number(
            raw["threshold"], "qcm4.threshold", minimum=0.0
        )
    if "filter" in raw:
        out["filter"] = _as_bool(raw["filter"], "qcm4.filter")
    if "grouping" in raw:
        out["grouping"] = _as_str(
            raw["grouping"], "qcm4.grouping", choices=("full", "qubitwise")
        )
    if "resamples" in raw:
        out["resamples"] = _as_int(raw["resamples"], "qcm4.resamples", minimum=2)
    if "allocation" in raw:
        out["allocation"] = _as_str(
            raw["allocation"], "qcm4.allocation", choices=("uniform", "weighted")
        )
    return out


def _resolve_recompile(raw: Mapping) -> dict:
    allowed = ("n_points", "fallback_norm") + tuple(_COMPILE_DEFAULTS)
    _check_keys(raw, allowed, "recompile")
    out = _resolve_compile(
        {k: raw[k] for k in raw if k in _COMPILE_DEFAULTS}, "recompile"
    )
    out["n_points"] = _as_int(
        raw.get("n_points", 33), "recompile.n_points", minimum=2
    )
    out["fallback_norm"] = _as_bool(
        raw.get("fallback_norm", False), "recompile.fallback_norm"
    )
    return out


def resolve_config(
    path: Path,
    command: str,
    seed: int | None = None,
    spc: int | None = None,
    mode: str | None = None,
) -> dict:
    """Loads a run config and applies command-line overrides and defaults.

    The returned dict is the complete, validated description of the run;
    it is embedded verbatim in every artifact the run writes.

    Raises:
        InputError: unreadable file, unknown or ill-typed keys, an
            algorithm mismatch, or an inconsistent mode/spc combination.
    """
    raw = _parse_json(_load_text(path), str(path))
    if not isinstance(raw, Mapping):
        raise InputError("config must be a JSON object")
    _check_keys(
        raw, ("algorithm", "operator", "state", "seed", "spc", "mode", command),
        "config",
    )
    algorithm = raw.get("algorithm", command)
    if algorithm != command:
        raise InputError(
            f"config algorithm {algorithm!r} does not match the {command} command"
        )
    for key in ("operator", "state"):
        if key not in raw:
            raise InputError(f"config needs {key!r}")
    resolved: dict = {
        "algorithm": command,
        "operator": _as_str(raw["operator"], "operator"),
        "state": _resolve_state(raw["state"]),
        "seed": seed if seed is not None else _as_int(raw.get("seed", 0), "seed"),
    }

    if command == "recompile":
        if mode is not None or "mode" in raw:
            raise InputError("recompile does not take a mode")
        if spc is not None or "spc" in raw:
            raise InputError("recompile does not take spc")
    else:
        chosen_mode = _as_str(
            mode if mode is not None else raw.get("mode", "exact"),
            "mode",
            choices=_MODE_CHOICES[command],
        )
        chosen_spc = spc if spc is not None else raw.get("spc")
        if chosen_spc is not None:
            chosen_spc = _as_int(chosen_spc, "spc", minimum=1)
        if chosen_mode == "shots" and chosen_spc is None:
            raise InputError("shots mode needs spc")
        if chosen_mode == "exact" and chosen_spc is not None:
            raise InputError("exact mode takes no spc")
        resolved["mode"] = chosen_mode
        resolved["spc"] = chosen_spc

    section = raw.get(command, {})
    if not isinstance(section, Mapping):
        raise InputError(f"{command} section must be an object")
    if command == "qcels":
        resolved["qcels"] = _resolve_qcels(section, resolved["mode"])
    elif command == "qcm4":
        resolved["qcm4"] = _resolve_qcm4(section)
    else:
        resolved["recompile"] = _resolve_recompile(section)
    return resolved


# ----------------------------------------------------------------------
# input loading and artifact writing
# ----------------------------------------------------------------------
def _resolve_path(base: Path, raw: str) -> Path:
    path = Path(raw)
    return path if path.is_absolute() else base / path


def _load_operator(resolved: Mapping, base: Path) -> PauliSum:
    path = _resolve_path(base, resolved["operator"])
    try:
        return PauliSum.from_json(_load_text(path))
    except (ValueError, KeyError, TypeError) as exc:
        raise InputError(f"bad operator file {path}: {exc}") from None


def _load_state(resolved: Mapping, base: Path, n_qubits: int) -> StateVector:
    spec = resolved["state"]
    if "basis" in spec:
        if spec["basis"] >= (1 << n_qubits):
            raise InputError(
                f"basis index {spec['basis']} outside the {n_qubits}-qubit register"
            )
        return StateVector.basis_state(n_qubits, spec["basis"])
    path = _resolve_path(base, spec["determinants"])
    try:
        norb, dets = determinants_from_json(_load_text(path))
    except (ValueError, KeyError, TypeError) as exc:
        raise InputError(f"bad determinant file {path}: {exc}") from None
    if 2 * norb != n_qubits:
        raise InputError(
            f"determinants describe {2 * norb} qubits, operator has {n_qubits}"
        )
    try:
        return ci_initial_state(dets, spec["threshold"], n_qubits)
    except ValueError as exc:
        raise InputError(str(exc)) from None


def _assert_finite(node: Any, where: str = "results") -> None:
    if isinstance(node, float):
        if not math.isfinite(node):
            raise ValueError(f"non-finite value at {where}")
    elif isinstance(node, Mapping):
        for key, value in node.items():
            _assert_finite(value, f"{where}.{key}")
    elif isinstance(node, (list, tuple)):
        for index, value in enumerate(node):
            _assert_finite(value, f"{where}[{index}]")


def _write_json(path: Path, payload: Any) -> None:
    path.write_text(json.dumps(payload, indent=1, sort_keys=True) + "\n")


def _write_results(out: Path, resolved: Mapping, results: Mapping) -> None:
    _assert_finite(results)
    _write_json(out / "config.json", resolved)
    _write_json(
        out / "results.json",
        {
            "schema_version": SCHEMA_VERSION,
            "algorithm": resolved["algorithm"],
            "config": resolved,
            "results": results,
        },
    )


# ----------------------------------------------------------------------
# subcommands
# ----------------------------------------------------------------------
def _reference_mask(fi: FermionIntegrals) -> int:
    """Aufbau reference determinant used to pick the symmetry sector."""
    if (fi.nelec + fi.ms2) % 2:
        raise InputError("NELEC and MS2 have incompatible parity")
    n_alpha = (fi.nelec + fi.ms2) // 2
    n_beta = fi.nelec - n_alpha
    if n_beta < 0 or n_alpha > fi.norb or n_beta > fi.norb:
        raise InputError("NELEC/MS2 do not fit in NORB orbitals")
    mask = 0
    for p in range(n_alpha):
        mask |= 1 << (2 * p)
    for p in range(n_beta):
        mask |= 1 << (2 * p + 1)
    return mask


def _dense_ground(h: PauliSum) -> float | None:
    if h.n_qubits > _DENSE_REPORT_CAP:
        return None
    return float(h.eig()[0][0])


def cmd_ingest(source: Path, out: Path, taper: bool) -> None:
    try:
        fi = parse_fcidump(_load_text(source))
    except ValueError as exc:
        raise InputError(f"{source}: {exc}") from None
    h = jordan_wigner(fi)
    out.mkdir(parents=True, exist_ok=True)
    (out / "operator.json").write_text(h.to_json() + "\n")
    report: dict = {
        "schema_version": SCHEMA_VERSION,
        "source": str(source),
        "norb": fi.norb,
        "nelec": fi.nelec,
        "ms2": fi.ms2,
        "core_energy": fi.core_energy,
        "qubits": h.n_qubits,
        "n_terms": len(h),
        "ground_energy": _dense_ground(h),
        "taper": None,
    }
    if taper:
        mask = _reference_mask(fi)
        tapering = taper_z2(h, mask)
        reduced = tapering.reduced
        (out / "operator_tapered.json").write_text(reduced.to_json() + "\n")
        report["taper"] = {
            "qubits": reduced.n_qubits,
            "n_terms": len(reduced),
            "generators": [g.to_label() for g in tapering.generators],
            "sector_signs": list(tapering.sector_signs),
            "pivots": list(tapering.pivots),
            "reference_mask": mask,
            "ground_energy": _dense_ground(reduced),
        }
        print(f"qubits before tapering: {h.n_qubits}")
        print(f"qubits after tapering: {reduced.n_qubits}")
    else:
        print(f"qubits: {h.n_qubits}")
    _assert_finite(report, "report")
    _write_json(out / "ingest_report.json", report)


def _objective_csv(grid, curve) -> str:
    lines = ["theta,objective"]
    for theta, value in zip(grid, curve):
        lines.append(f"{float(theta)!r},{float(value)!r}")
    return "\n".join(lines) + "\n"


def _compile_config(settings: Mapping, seed: int) -> CompileConfig:
    return CompileConfig(
        max_iterations=settings["max_iterations"],
        learning_rate=settings["learning_rate"],
        restarts=settings["restarts"],
        seed=seed,
        gradient=settings["gradient"],
        fd_step=settings["fd_step"],
        tolerance=settings["tolerance"],
        warm_start=settings["warm_start"],
    )


def cmd_qcels(resolved: Mapping, base: Path, out: Path, threads: int) -> None:
    h = _load_operator(resolved, base)
    psi = _load_state(resolved, base, h.n_qubits)
    settings = resolved["qcels"]
    sh = scale(h, fallback=settings["fallback_norm"])
    tau = choose_grid(sh, psi, settings["n_points"])

    compilation = None
    depth = None
    if resolved["mode"] == "recompiled":
        comp = settings["compile"]
        targets = [
            hadamard_test_state(sh, psi, n * tau)
            for n in range(settings["n_points"])
        ]
        ansatz, _ = hea_ansatz(psi.n_qubits + 1, comp["layers"])
        compilation = compile_series(
            targets, ansatz, _compile_config(comp, resolved["seed"]),
            layers=comp["layers"],
        )
        (out / "series_compilation.json").write_text(compilation.to_json() + "\n")
        depth = two_qubit_depth(ansatz)

    series = acquire(
        sh, psi, tau,
        n_points=settings["n_points"],
        mode=resolved["mode"],
        spc=resolved["spc"],
        seed=resolved["seed"],
        compilation=compilation,
        threads=threads,
    )
    (out / "overlap.csv").write_text(series.to_csv())
    result = fit(series, sh)
    (out / "objective.csv").write_text(_objective_csv(result.grid, result.curve))

    results = {
        "energy": result.energy,
        "theta": result.theta,
        "peak": result.peak,
        "h0": sh.h0,
        "h1": sh.h1,
        "tau": tau,
        "n_points": settings["n_points"],
        "qubits": h.n_qubits,
        "mode": resolved["mode"],
        "spc": resolved["spc"],
        "two_qubit_depth": depth,
        "mean_fidelity": None if compilation is None else compilation.mean_fidelity,
    }
    _write_results(out, resolved, results)
    print(f"E* = {result.energy:.10f} Ha")


def cmd_qcm4(resolved: Mapping, base: Path, out: Path, threads: int) -> None:
    h = _load_operator(resolved, base)
    psi = _load_state(resolved, base, h.n_qubits)
    settings = resolved["qcm4"]
    m = build_moments(h, threshold=settings["threshold"])
    filter_report = None
    if settings["filter"]:
        m, filter_report = pauli_filter(m, psi)
    measurement_plan = plan(m, mode=settings["grouping"])
    est = estimate(
        measurement_plan, psi,
        spc=resolved["spc"],
        seed=resolved["seed"],
        mode=resolved["mode"],
        allocation=settings["allocation"],
        threads=threads,
    )
    bs = None
    if resolved["mode"] == "shots":
        bs = bootstrap(est, settings["resamples"], resolved["seed"])
        (out / "bootstrap.csv").write_text(bs.to_csv())
    summary = Qcm4Result.from_estimates(est, bs)
    (out / "moment_report.json").write_text(
        moment_report(m, measurement_plan, filter_report) + "\n"
    )

    results = {
        "energy": summary.energy,
        "cumulants": list(summary.cumulants),
        "moments": list(est.moments),
        "qubits": h.n_qubits,
        "mode": resolved["mode"],
        "spc": resolved["spc"],
        "n_circuits": measurement_plan.n_circuits,
        "two_qubit_depth": max(
            (two_qubit_depth(c.clifford) for c in measurement_plan.circuits),
            default=0,
        ),
        "term_counts": list(m.term_counts),
        "dropped_weights": list(m.dropped),
        "bootstrap": None if bs is None else {
            "mean": bs.mean,
            "std": bs.std,
            "resamples": bs.resamples,
            "seed": bs.seed,
        },
    }
    _write_results(out, resolved, results)
    print(f"E_QCM4 = {summary.energy:.10f} Ha")


def cmd_recompile(resolved: Mapping, base: Path, out: Path, threads: int) -> None:
    h = _load_operator(resolved, base)
    psi = _load_state(resolved, base, h.n_qubits)
    settings = resolved["recompile"]
    sh = scale(h, fallback=settings["fallback_norm"])
    tau = choose_grid(sh, psi, settings["n_points"])
    targets = [
        hadamard_test_state(sh, psi, n * tau) for n in range(settings["n_points"])
    ]
    ansatz, _ = hea_ansatz(psi.n_qubits + 1, settings["layers"])
    compilation = compile_series(
        targets, ansatz, _compile_config(settings, resolved["seed"]),
        layers=settings["layers"],
    )
    (out / "series_compilation.json").write_text(compilation.to_json() + "\n")
    lines = ["step,fidelity,objective,iterations"]
    for step, entry in enumerate(compilation.results):
        lines.append(
            f"{step},{entry.fidelity!r},{entry.objective!r},{entry.iterations}"
        )
    (out / "fidelity.csv").write_text("\n".join(lines) + "\n")

    results = {
        "qubits": h.n_qubits,
        "layers": settings["layers"],
        "n_points": settings["n_points"],
        "tau": tau,
        "h0": sh.h0,
        "h1": sh.h1,
        "mean_fidelity": compilation.mean_fidelity,
        "min_fidelity": compilation.min_fidelity,
        "max_fidelity": compilation.max_fidelity,
        "two_qubit_depth": two_qubit_depth(ansatz),
    }
    _write_results(out, resolved, results)
    print(f"mean fidelity = {compilation.mean_fidelity:.6f}")


# ----------------------------------------------------------------------
# report
# ----------------------------------------------------------------------
_REPORT_COLUMNS = (
    "run", "algorithm", "operator", "qubits", "two_qubit_depth",
    "mode", "spc", "energy", "delta_vs_exact",
)


def _report_rows(run_dirs: Sequence[Path]) -> list[dict]:
    rows = []
    for run_dir in run_dirs:
        path = run_dir / "results.json"
        payload = _parse_json(_load_text(path), str(path))
        if not isinstance(payload, Mapping):
            raise InputError(f"{path}: not a results object")
        if payload.get("schema_version") != SCHEMA_VERSION:
            raise InputError(
                f"{path}: unsupported schema version"
                f" {payload.get('schema_version')!r}"
            )
        results = payload.get("results", {})
        config = payload.get("config", {})
        rows.append({
            "run": run_dir.name,
            "algorithm": payload.get("algorithm"),
            "operator": config.get("operator"),
            "qubits": results.get("qubits"),
            "two_qubit_depth": results.get("two_qubit_depth"),
            "mode": results.get("mode"),
            "spc": results.get("spc"),
            "energy": results.get("energy"),
        })
    # reference energy per (algorithm, operator): the unique exact-mode run
    groups: dict[tuple, list[float]] = {}
    for row in rows:
        if row["mode"] == "exact" and isinstance(row["energy"], (int, float)):
            key = (row["algorithm"], row["operator"])
            groups.setdefault(key, []).append(row["energy"])
    for row in rows:
        reference = groups.get((row["algorithm"], row["operator"]), [])
        if len(reference) == 1 and isinstance(row["energy"], (int, float)):
            row["delta_vs_exact"] = row["energy"] - reference[0]
        else:
            row["delta_vs_exact"] = None
    return rows


def _cell(value: Any) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(value)
    return str(value)


def cmd_report(run_dirs: Sequence[Path], out: Path | None) -> None:
    rows = _report_rows(run_dirs)
    lines = [
        "| " + " | ".join(_REPORT_COLUMNS) + " |",
        "|" + "|".join(" --- " for _ in _REPORT_COLUMNS) + "|",
    ]
    for row in rows:
        lines.append(
            "| " + " | ".join(_cell(row[c]) for c in _REPORT_COLUMNS) + " |"
        )
    table = "\n".join(lines) + "\n"
    sys.stdout.write(table)
    if out is not None:
        out.mkdir(parents=True, exist_ok=True)
        (out / "report.md").write_text(table)
        buffer = io.StringIO()
        writer = csv.writer(buffer, lineterminator="\n")
        writer.writerow(_REPORT_COLUMNS)
        for row in rows:
            writer.writerow([_cell(row[c]) for c in _REPORT_COLUMNS])
        (out / "report.csv").write_text(buffer.getvalue())


# ----------------------------------------------------------------------
# entry point
# ----------------------------------------------------------------------
def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="gsee",
        description="Ground-state energy estimation runs and artifacts.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    ingest = sub.add_parser("ingest", help="FCIDUMP to operator JSON")
    ingest.add_argument("fcidump", type=Path)
    ingest.add_argument("--out", type=Path, required=True)
    ingest.add_argument(
        "--taper", action="store_true",
        help="also write the Z2-tapered operator",
    )

    for name, blurb in (
        ("qcels", "overlap-series phase estimation run"),
        ("qcm4", "moment/cumulant energy run"),
        ("recompile", "compile the Hadamard-test target series"),
    ):
        run = sub.add_parser(name, help=blurb)
        run.add_argument("--config", type=Path, required=True)
        run.add_argument("--out", type=Path, required=True)
        run.add_argument("--seed", type=int, default=None)
        run.add_argument("--spc", type=int, default=None)
        run.add_argument(
            "--mode", choices=("exact", "shots", "recompiled"), default=None
        )
        run.add_argument("--threads", type=int, default=1)

    report = sub.add_parser("report", help="summarize run artifacts")
    report.add_argument("runs", nargs="*", type=Path)
    report.add_argument("--out", type=Path, default=None)
    return parser


_RUN_COMMANDS = {"qcels": cmd_qcels, "qcm4": cmd_qcm4, "recompile": cmd_recompile}


def _dispatch(args: argparse.Namespace) -> int:
    if args.command == "ingest":
        cmd_ingest(args.fcidump, args.out, args.taper)
        return 0
    if args.command == "report":
        cmd_report(args.runs, args.out)
        return 0
    if args.threads < 1:
        raise InputError("--threads must be at least 1")
    resolved = resolve_config(
        args.config, args.command, seed=args.seed, spc=args.spc, mode=args.mode
    )
    args.out.mkdir(parents=True, exist_ok=True)
    _RUN_COMMANDS[args.command](resolved, args.config.parent, args.out, args.threads)
    return 0


def main(argv: Sequence[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        return _dispatch(args)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # noqa: BLE001 - CLI boundary maps to exit codes
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    raise SystemExit(main())
