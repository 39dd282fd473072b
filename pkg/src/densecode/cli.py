"""Batch command surface: entropy reports, capacities, scans, gate checks.

stdout carries machine-readable JSON (or CSV for scans); human-readable
tables go to stderr.  Every output embeds a run manifest (command, input file
hashes, full configuration, tool version, timestamp) and `densecode replay`
re-executes a manifest, reproducing the output bit-identically within one
build.

Exit codes are a stable contract:

    0  success
    2  unreadable input / bad flags
    3  structural invariant violated (non-PSD state, bad trace, ...)
    4  size guard tripped
    5  optimizer did not converge and --strict was set
    6  a claimed program is not a program
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import hashlib
import io
import json
import math
import os
import sys
from datetime import datetime, timezone

import numpy as np

from . import __version__
from . import capacity as cap
from . import channels as ch
from . import optimize as opt
from . import pqg
from . import qmath
from . import serialize as ser
from .errors import (
    ConvergenceError,
    FormatError,
    InvariantError,
    NotAProgramError,
    SizeGuardError,
)

EXIT_OK = 0
EXIT_PARSE = 2
EXIT_INVARIANT = 3
EXIT_GUARD = 4
EXIT_CONVERGENCE = 5
EXIT_PRECONDITION = 6

def default_seed() -> int:
    """Default seed for all commands; DENSECODE_SEED overrides it."""
    try:
        return int(os.environ.get("DENSECODE_SEED", "0"))
    except ValueError:
        return 0


NAMED_UNITARIES = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.diag([1.0, -1.0]).astype(complex),
    "H": np.array([[1, 1], [1, -1]], dtype=complex) / math.sqrt(2.0),
    "XZ": np.array([[0, -1], [1, 0]], dtype=complex),
}

NAMED_TARGETS = {
    "cnot": np.array(
        [[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], dtype=complex
    ),
    "swap": np.array(
        [[1, 0, 0, 0], [0, 0, 1, 0], [0, 1, 0, 0], [0, 0, 0, 1]], dtype=complex
    ),
}


def _file_ref(path: str) -> dict:
    digest = hashlib.sha256()
    with open(path, "rb") as fh:
        digest.update(fh.read())
    return {"path": str(path), "sha256": digest.hexdigest()}


def _manifest(argv: list[str], inputs: dict, config: dict, timestamp: str | None) -> dict:
    return {
        "command": list(argv),
        "inputs": inputs,
        "config": config,
        "version": __version__,
        "timestamp": timestamp or datetime.now(timezone.utc).isoformat(),
    }


def _emit(doc: dict, summary_lines: list[str]) -> None:
    sys.stdout.write(json.dumps(doc, indent=1, sort_keys=True) + "\n")
    for line in summary_lines:
        sys.stderr.write(line + "\n")


def _parse_factors(text: str) -> tuple[int, ...]:
    try:
        return tuple(int(tok) for tok in text.split(",") if tok != "")
    except ValueError:
        raise FormatError(f"bad factor list {text!r}") from None


def _parse_program(gate: pqg.ProgrammableGate, text: str) -> qmath.PureState:
    if "," not in text:
        index = int(text)
        return qmath.basis_state(gate.d_program, index)
    amps = np.array([complex(tok) for tok in text.split(",")])
    amps = amps / np.linalg.norm(amps)
    return qmath.PureState((gate.d_program,), amps)


def _parse_target(text: str) -> np.ndarray:
    key = text.strip()
    if key.lower() in NAMED_TARGETS:
        return NAMED_TARGETS[key.lower()]
    sep = "⊗" if "⊗" in key else "@"
    if sep in key:
        parts = [p.strip().upper() for p in key.split(sep)]
        out = np.eye(1, dtype=complex)
        for p in parts:
            if p not in NAMED_UNITARIES:
                raise FormatError(f"unknown unitary name {p!r}")
            out = np.kron(out, NAMED_UNITARIES[p])
        return out
    if key.upper() in NAMED_UNITARIES:
        return NAMED_UNITARIES[key.upper()]
    return ser.matrix_from_json(ser.load_json(key).get("matrix", ser.load_json(key)))


def _parse_gate_token(token: str, seed: int) -> tuple[pqg.ProgrammableGate, dict]:
    if token == "pauli":
        units = [NAMED_UNITARIES[k] for k in ("I", "X", "XZ", "Z")]
        return pqg.control_gate(units), {"kind": "pauli"}
    if token.startswith("net:"):
        eps = float(token.split(":", 1)[1])
        gate, net = pqg.net_gate(eps, 2, seed=seed)
        return gate, {"kind": "net", "epsilon": eps, "size": len(net.elements)}
    gate = ser.load_gate(token)
    return gate, {"kind": "file", "ref": _file_ref(token)}


# ---------------------------------------------------------------------------
# Commands
# ---------------------------------------------------------------------------


def cmd_entropy(args, argv, timestamp) -> int:
    rho = ser.load_state(args.state)
    marginals = {
        str(i): qmath.von_neumann_entropy(qmath.partial_trace(rho, {i}))
        for i in range(rho.n_factors)
    }
    doc = {
        "H": qmath.von_neumann_entropy(rho),
        "marginals": marginals,
        "manifest": _manifest(argv, {"state": _file_ref(args.state)}, {}, timestamp),
    }
    if rho.n_factors >= 2:
        work, _ = cap._split_factors(rho, (0,))
        doc["H_B"] = qmath.von_neumann_entropy(qmath.partial_trace(work, {1}))
        doc["coherent"] = cap.coherent_information(rho, (0,))
    _emit(doc, [f"H = {doc['H']:.6f} bits"])
    return EXIT_OK


def _opt_config(args) -> opt.OptConfig:
    fields = {
        "restarts": args.restarts,
        "seed": args.seed,
        "max_iterations": getattr(args, "max_iterations", 500),
        "grad_tol": getattr(args, "grad_tol", 1e-8),
    }
    config_file = getattr(args, "config", None)
    if config_file:
        block = ser.load_json(config_file)
        if not isinstance(block, dict):
            raise FormatError("config block must be a JSON object")
        allowed = {f.name for f in dataclasses.fields(opt.OptConfig)}
        unknown = set(block) - allowed
        if unknown:
            raise FormatError(f"unknown OptConfig fields: {sorted(unknown)}")
        fields.update(block)
    return opt.OptConfig(**fields)


def cmd_dc(args, argv, timestamp) -> int:
    rho = ser.load_state(args.state)
    cfg = _opt_config(args)
    a_factors = _parse_factors(args.a_factors)
    inputs = {"state": _file_ref(args.state)}
    if args.channel:
        channel = ser.load_channel(args.channel)
        inputs["channel"] = _file_ref(args.channel)
        result = cap.noisy_dc_capacity(channel, rho, args.ensemble_size, cfg, a_factors)
        quantity = "noisy_dc_capacity"
        diagnostics = {
            "history": result.report.history,
            "converged": result.report.converged,
        }
    elif args.copies > 1:
        result = cap.dc_capacity_multicopy(args.copies, args.d, rho, cfg, a_factors)
        quantity = "dc_capacity_multicopy"
        diagnostics = _opt_diagnostics(result.report)
    elif args.block > 1:
        result = cap.dc_capacity_block(args.block, args.d, rho, cfg, a_factors)
        quantity = "dc_capacity_block"
        diagnostics = _opt_diagnostics(result.report)
    else:
        result = cap.dc_capacity(args.d, rho, cfg, a_factors)
        quantity = "dc_capacity"
        diagnostics = _opt_diagnostics(result.report)
    converged = bool(result.metadata.get("converged", True))
    if args.strict and not converged:
        raise ConvergenceError("optimizer did not converge and --strict is set")
    config = {
        "d": args.d,
        "restarts": args.restarts,
        "seed": args.seed,
        "copies": args.copies,
        "block": args.block,
        "ensemble_size": args.ensemble_size,
        "a_factors": list(a_factors),
    }
    doc = {
        "quantity": quantity,
        "value": result.value,
        "lower_bound": result.lower_bound,
        "decomposition": result.decomposition,
        "diagnostics": diagnostics,
        "inputs": inputs,
        "manifest": _manifest(argv, inputs, config, timestamp),
    }
    if args.emit_report and hasattr(result.report, "restart_values"):
        doc["report"] = ser.opt_report_to_json(result.report)
    _emit(doc, [f"{quantity} >= {result.value:.6f} bits (lower bound)"])
    return EXIT_OK


def _opt_diagnostics(report) -> dict:
    return {
        "restart_values": report.restart_values,
        "converged": report.converged,
        "iterations": report.iterations,
        "best_restart": report.best_restart,
        "skipped_restarts": report.skipped_restarts,
    }


def cmd_scan_additivity(args, argv, timestamp) -> int:
    cfg = opt.OptConfig(restarts=args.restarts, seed=args.seed)
    rows = []
    if args.rho and args.sigma:
        rho = ser.load_state(args.rho)
        sigma = ser.load_state(args.sigma)
        rho_a = _parse_factors(args.rho_a)
        sigma_a = _parse_factors(args.sigma_a)
        gap = cap.additivity_gap(rho, args.d1, sigma, args.d2, cfg, rho_a, sigma_a)
        rows.append((args.seed, gap))
    else:
        for i in range(args.count):
            seed = args.seed + i
            rng = np.random.default_rng(seed)
            rho = ch.random_state((args.d1, args.d1), int(rng.integers(1, 5)), rng)
            sigma = ch.random_state((args.d2, args.d2), int(rng.integers(1, 5)), rng)
            inst_cfg = opt.OptConfig(restarts=args.restarts, seed=seed)
            rows.append((seed, cap.additivity_gap(rho, args.d1, sigma, args.d2, inst_cfg)))

    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(
        ["label", "seed", "d1", "d2", "part1", "part2", "joint", "gap",
         "gap_min", "gap_max", "gap_mean"]
    )
    gaps = []
    for seed, res in rows:
        gaps.append(res.gap)
        writer.writerow(
            ["instance", seed, args.d1, args.d2,
             f"{res.parts[0].value:.9f}", f"{res.parts[1].value:.9f}",
             f"{res.joint.value:.9f}", f"{res.gap:.9f}", "", "", ""]
        )
    if gaps:
        writer.writerow(
            ["summary", "", args.d1, args.d2, "", "", "", "",
             f"{min(gaps):.9f}", f"{max(gaps):.9f}", f"{float(np.mean(gaps)):.9f}"]
        )
    text = buf.getvalue()
    config = {
        "count": args.count,
        "d1": args.d1,
        "d2": args.d2,
        "seed": args.seed,
        "restarts": args.restarts,
    }
    inputs = {}
    if args.rho:
        inputs["rho"] = _file_ref(args.rho)
    if args.sigma:
        inputs["sigma"] = _file_ref(args.sigma)
    manifest = _manifest(argv, inputs, config, timestamp)
    text += "# manifest: " + json.dumps(manifest, sort_keys=True) + "\n"
    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        ser.dump(manifest, args.out + ".manifest.json")
        doc = {
            "csv": args.out,
            "instances": len(gaps),
            "gap_min": min(gaps) if gaps else None,
            "gap_max": max(gaps) if gaps else None,
            "manifest": manifest,
        }
        _emit(doc, [f"wrote {len(gaps)} instances to {args.out}"])
    else:
        sys.stdout.write(text)
        sys.stderr.write(f"{len(gaps)} instances\n")
    return EXIT_OK


def cmd_pqg_build_net(args, argv, timestamp) -> int:
    gate, net = pqg.net_gate(args.epsilon, args.d, seed=args.seed)
    doc = {
        "epsilon": args.epsilon,
        "d": args.d,
        "size": len(net.elements),
        "covering_radius_estimate": net.covering_radius,
        "method": net.method,
        "certificate": net.metadata,
        "manifest": _manifest(argv, {}, {"epsilon": args.epsilon, "d": args.d, "seed": args.seed}, timestamp),
    }
    if args.out:
        ser.dump(ser.gate_to_json(gate), args.out)
        doc["gate_file"] = args.out
    _emit(doc, [f"net of {len(net.elements)} unitaries certified at {args.epsilon}"])
    return EXIT_OK


def cmd_pqg_check_orthogonality(args, argv, timestamp) -> int:
    inputs = {}
    if args.gate:
        gate = ser.load_gate(args.gate)
        inputs["gate"] = _file_ref(args.gate)
    else:
        units = [NAMED_UNITARIES[tok.strip().upper()] for tok in args.units.split(",")]
        gate = pqg.control_gate(units)
    psi1 = _parse_program(gate, args.program1)
    psi2 = _parse_program(gate, args.program2)
    verdict = pqg.program_orthogonality_check(gate, psi1, psi2, tol=args.tol)
    doc = {
        "consistent": verdict.consistent,
        "proportional": verdict.proportional,
        "orthogonal": verdict.orthogonal,
        "overlap": verdict.overlap,
        "choi_collinearity": verdict.choi_collinearity,
        "tol": verdict.tol,
        "manifest": _manifest(argv, inputs, {"tol": args.tol}, timestamp),
    }
    _emit(doc, [f"consistent: {verdict.consistent}"])
    return EXIT_OK


def cmd_pqg_witness(args, argv, timestamp) -> int:
    target = _parse_target(args.target)
    g1, info1 = _parse_gate_token(args.gates[0], args.seed)
    g2, info2 = _parse_gate_token(args.gates[1], args.seed + 1)
    cfg = pqg.WitnessConfig(seed=args.seed, n_inputs=args.inputs)
    report = pqg.scalability_witness(g1, g2, target, cfg)
    doc = {
        "best_error": report.best_error,
        "sup_estimate": {
            "value": report.sup_estimate.value,
            "method": report.sup_estimate.method,
            "n_samples": report.sup_estimate.n_samples,
        },
        "method": report.method,
        "n_inputs": report.n_inputs,
        "gates": [info1, info2],
        "program_weights": [
            {"pair": list(pair), "w": w} for pair, w in (report.program_weights or [])[:16]
        ],
        "manifest": _manifest(
            argv, {}, {"target": args.target, "seed": args.seed, "inputs": args.inputs}, timestamp
        ),
    }
    _emit(doc, [f"witness best_error = {report.best_error:.6f}"])
    return EXIT_OK


def cmd_pqg_emulate(args, argv, timestamp) -> int:
    channel = ser.load_channel(args.channel)
    target, _ = pqg.dilation_unitary(channel)
    gate, net = pqg.net_gate_around([target], args.epsilon, seed=args.seed)
    report = pqg.emulate_encoding(channel, gate, args.epsilon, n_samples=args.samples, seed=args.seed)
    doc = {
        "measured_error": report.measured_error,
        "epsilon": args.epsilon,
        "n_samples": report.n_samples,
        "program_error": {
            "value": report.program_error.value,
            "method": report.program_error.method,
        },
        "gate_certificate": net.metadata,
        "inputs": {"channel": _file_ref(args.channel)},
        "manifest": _manifest(
            argv,
            {"channel": _file_ref(args.channel)},
            {"epsilon": args.epsilon, "seed": args.seed, "samples": args.samples},
            timestamp,
        ),
    }
    _emit(doc, [f"emulation error {report.measured_error:.6f} <= {args.epsilon}"])
    return EXIT_OK


def cmd_replay(args, argv, timestamp) -> int:
    del argv, timestamp
    manifest = None
    try:
        doc = ser.load_json(args.record)
        manifest = doc.get("manifest", doc if "command" in doc else None)
    except FormatError:
        # CSV records carry their manifest in a trailing comment line.
        try:
            with open(args.record, "r", encoding="utf-8") as fh:
                for line in fh:
                    if line.startswith("# manifest: "):
                        manifest = json.loads(line[len("# manifest: "):])
        except OSError as exc:
            raise FormatError(f"cannot read {args.record}: {exc}") from None
    if not manifest or "command" not in manifest:
        raise FormatError("no manifest with a command found in the record")
    return main(list(manifest["command"]), _timestamp=manifest.get("timestamp"))


# ---------------------------------------------------------------------------
# Parser and entry point
# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="densecode",
        description="Dense-coding capacities and programmable-gate checks.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("entropy", help="entropies and coherent information of a state file")
    p.add_argument("state")
    p.set_defaults(func=cmd_entropy)

    p = sub.add_parser("dc", help="dense-coding capacity of a state file")
    p.add_argument("state")
    p.add_argument("--d", type=int, default=2)
    p.add_argument("--restarts", type=int, default=20)
    p.add_argument("--seed", type=int, default=default_seed())
    p.add_argument("--copies", type=int, default=1)
    p.add_argument("--block", type=int, default=1)
    p.add_argument("--channel", default=None)
    p.add_argument("--ensemble-size", type=int, default=8)
    p.add_argument("--a-factors", default="0")
    p.add_argument("--max-iterations", type=int, default=500)
    p.add_argument("--grad-tol", type=float, default=1e-8)
    p.add_argument("--config", default=None, help="JSON block of OptConfig overrides")
    p.add_argument("--emit-report", action="store_true",
                   help="include the full optimizer report (with the isometry)")
    p.add_argument("--strict", action="store_true")
    p.set_defaults(func=cmd_dc)

    p = sub.add_parser("scan-additivity", help="superadditivity gaps over random pairs")
    p.add_argument("--count", type=int, default=10)
    p.add_argument("--d1", type=int, default=2)
    p.add_argument("--d2", type=int, default=2)
    p.add_argument("--seed", type=int, default=default_seed())
    p.add_argument("--restarts", type=int, default=6)
    p.add_argument("--out", default=None)
    p.add_argument("--rho", default=None)
    p.add_argument("--sigma", default=None)
    p.add_argument("--rho-a", default="0")
    p.add_argument("--sigma-a", default="0")
    p.set_defaults(func=cmd_scan_additivity)

    p = sub.add_parser("pqg", help="programmable-gate commands")
    psub = p.add_subparsers(dest="pqg_command", required=True)

    q = psub.add_parser("build-net", help="calibrated approximation net")
    q.add_argument("--epsilon", type=float, required=True)
    q.add_argument("--d", type=int, default=2)
    q.add_argument("--seed", type=int, default=default_seed())
    q.add_argument("--out", default=None)
    q.set_defaults(func=cmd_pqg_build_net)

    q = psub.add_parser("check-orthogonality", help="program dichotomy verdict")
    q.add_argument("--gate", default=None)
    q.add_argument("--units", default="I,X")
    q.add_argument("--program1", required=True)
    q.add_argument("--program2", required=True)
    q.add_argument("--tol", type=float, default=pqg.PROGRAM_TOL)
    q.set_defaults(func=cmd_pqg_check_orthogonality)

    q = psub.add_parser("witness", help="scalability witness on a gate pair")
    q.add_argument("--target", required=True)
    q.add_argument("--gates", nargs=2, required=True)
    q.add_argument("--seed", type=int, default=default_seed())
    q.add_argument("--inputs", type=int, default=24)
    q.set_defaults(func=cmd_pqg_witness)

    q = psub.add_parser("emulate", help="emulate an encoding channel through a gate")
    q.add_argument("--channel", required=True)
    q.add_argument("--epsilon", type=float, default=0.1)
    q.add_argument("--seed", type=int, default=default_seed())
    q.add_argument("--samples", type=int, default=200)
    q.set_defaults(func=cmd_pqg_emulate)

    p = sub.add_parser("replay", help="re-run the manifest embedded in an output record")
    p.add_argument("record")
    p.set_defaults(func=cmd_replay)

    return parser


def main(argv: list[str] | None = None, _timestamp: str | None = None) -> int:
    argv = list(sys.argv[1:]) if argv is None else list(argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args, argv, _timestamp)
    except FormatError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_PARSE
    except SizeGuardError as exc:
        sys.stderr.write(f"size guard: {exc}\n")
        return EXIT_GUARD
    except ConvergenceError as exc:
        sys.stderr.write(f"convergence: {exc}\n")
        return EXIT_CONVERGENCE
    except NotAProgramError as exc:
        sys.stderr.write(f"not a program: {exc}\n")
        return EXIT_PRECONDITION
    except InvariantError as exc:
        sys.stderr.write(f"invariant violation: {exc}\n")
        return EXIT_INVARIANT


def console_main() -> None:
    raise SystemExit(main())
