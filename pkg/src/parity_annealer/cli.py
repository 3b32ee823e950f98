"""Command-line pipelines: compile, verify, spectrum, anneal, hardware, demo.

Exit codes: 0 success, 1 file error, 2 schema error, 3 size cap exceeded,
4 verification failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from pathlib import Path

import numpy as np

from .annealer import ScheduleSpec, compare_protocols, evolve, spectrum_trace, traces_to_csv
from .hardware import hardware_table
from .model import SchemaError, TwoBodyModel, classical_energy, load_problem
from .oracle import CapExceededError, ground_manifold, verify_equivalence
from .parity_compiler import (
    CompiledProgram,
    CompileOptions,
    DecodeError,
    compile_full,
    single_plaquette_program,
)

EXIT_OK = 0
EXIT_FILE = 1
EXIT_SCHEMA = 2
EXIT_CAP = 3
EXIT_VERIFY = 4

_EPILOG = """exit codes:
  0  success
  1  file could not be read or written
  2  input does not match the schema or is otherwise invalid
  3  system exceeds the exact-enumeration / diagonalization cap
  4  verification failed
"""


class VerificationFailed(Exception):
    pass


def _read(path: str) -> str:
    return Path(path).read_text()


def _write(path: str, text: str):
    out = Path(path)
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text(text)


def _load_model(path: str):
    """A CompiledProgram or a bare TwoBodyModel document."""
    try:
        doc = json.loads(_read(path))
    except json.JSONDecodeError as exc:
        raise SchemaError("", f"{path} is not valid JSON: {exc}") from None
    try:
        if "model" in doc:
            return CompiledProgram.from_dict(doc)
        return TwoBodyModel.from_dict(doc)
    except (KeyError, TypeError, ValueError) as exc:
        raise SchemaError("", f"{path} is neither a compiled program nor a pair model: {exc}") from None


def _as_model(obj) -> TwoBodyModel:
    return obj.model if isinstance(obj, CompiledProgram) else obj


def _schedule(args) -> ScheduleSpec:
    mode = "always_on" if args.schedule == "always-on" else "ramp"
    return ScheduleSpec(mode, args.A_max, args.B_max, args.C_max, args.T)


def _options(args) -> CompileOptions:
    return CompileOptions(
        constraint_strength=args.strength,
        policy=args.policy.replace("-", "_"),
        driver_scope="logical" if args.driver_scope == "logical-only" else "all",
        grouping=args.grouping,
    )


def cmd_compile(args) -> int:
    problem = load_problem(_read(args.input))
    program = compile_full(problem, _options(args))
    _write(args.output, program.to_json())
    return EXIT_OK


def _verify_program(program: CompiledProgram) -> dict:
    model = program.model
    constraints = model.without_problem()
    result = verify_equivalence(list(program.layout.plaquettes), constraints,
                                program.logical_ids, include_problem=False)
    report = {"constraint_equivalence": result.to_dict()}
    failures = []
    if not result.ok:
        failures.append("compiled constraint ground manifold differs from the plaquettes")
    if not result.gap_decomposed > 0:
        failures.append("compiled constraints have no gap")

    # end to end: every compiled ground state decodes to a logical optimum
    problem = program.problem
    full = ground_manifold(model)
    logical = [np.array(s) for s in np.ndindex(*(2,) * problem.n_logical)]
    best = min(classical_energy(problem, 1 - 2 * s) for s in logical)
    decoded = []
    for assignment in full.ground_assignments():
        vec = [assignment[k] for k in range(model.n_spins)]
        try:
            s = program.decode(vec)
        except DecodeError as exc:
            failures.append(f"ground state does not decode: {exc}")
            break
        decoded.append(classical_energy(problem, s))
    if decoded and max(abs(e - best) for e in decoded) > 1e-9:
        failures.append("decoded ground state is not a logical optimum")
    report["end_to_end"] = {"logical_optimum": best, "decoded_energies": sorted(set(decoded))}
    report["ok"] = not failures
    report["failures"] = failures
    return report


def cmd_verify(args) -> int:
    obj = _load_model(args.input)
    if not isinstance(obj, CompiledProgram):
        raise SchemaError("", "verify needs a compiled program")
    report = _verify_program(obj)
    text = json.dumps(report, indent=2, sort_keys=True) + "\n"
    if args.output:
        _write(args.output, text)
    else:
        sys.stdout.write(text)
    if not report["ok"]:
        raise VerificationFailed("; ".join(report["failures"]))
    return EXIT_OK


def cmd_spectrum(args) -> int:
    model = _as_model(_load_model(args.input))
    schedule = _schedule(args)
    if args.compare:
        text = traces_to_csv(compare_protocols(model, schedule, args.levels, args.times))
    else:
        text = spectrum_trace(model, schedule, args.levels, args.times).to_csv()
    _write(args.output, text)
    return EXIT_OK


def _anneal_csv(result) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["t", "success_prob"])
    for t, p in zip(result.times, result.trace):
        w.writerow([repr(float(t)), repr(float(p))])
    return buf.getvalue()


def cmd_anneal(args) -> int:
    model = _as_model(_load_model(args.input))
    result = evolve(model, _schedule(args), args.steps)
    _write(args.output, _anneal_csv(result))
    return EXIT_OK


def cmd_hardware(args) -> int:
    obj = _load_model(args.input)
    if not isinstance(obj, CompiledProgram):
        raise SchemaError("", "hardware needs a compiled program")
    _write(args.output, hardware_table(obj, args.E_C, args.E_J, args.energy_scale))
    return EXIT_OK


def demo_fields(seed: int, strength: float = 0.2) -> np.ndarray:
    """Local fields for the demo plaquette, uniform in ``[-strength, strength]``."""
    return np.random.default_rng(seed).uniform(-strength, strength, 4)


def cmd_demo(args) -> int:
    out = Path(args.output)
    fields = demo_fields(args.seed)
    grouping = args.grouping
    scope = "logical" if args.driver_scope == "logical-only" else "all"
    model = single_plaquette_program(fields, grouping=grouping, driver_scope=scope)
    bare = single_plaquette_program(grouping=grouping, driver_scope=scope)
    schedule = _schedule(args)
    _write(out / "plaquette_model.json", json.dumps(model.to_dict(), indent=1, sort_keys=True) + "\n")
    with_fields = spectrum_trace(model, schedule, args.levels, args.times)
    no_fields = spectrum_trace(bare, schedule, args.levels, args.times)
    _write(out / "spectrum.csv", with_fields.to_csv())
    _write(out / "spectrum_no_fields.csv", no_fields.to_csv())
    _write(out / "protocols.csv", traces_to_csv(compare_protocols(model, schedule, args.levels, args.times)))
    result = evolve(model, schedule, args.steps)
    _write(out / "anneal.csv", _anneal_csv(result))
    summary = {
        "seed": args.seed,
        "fields": [float(f) for f in fields],
        "final_degeneracy_no_fields": no_fields.final_degeneracy(),
        "final_degeneracy_with_fields": with_fields.final_degeneracy(),
        "success_probability": result.success_probability,
    }
    _write(out / "summary.json", json.dumps(summary, indent=2, sort_keys=True) + "\n")
    return EXIT_OK


def _add_schedule(p, T=20.0):
    p.add_argument("--schedule", choices=["ramp", "always-on"], default="ramp")
    p.add_argument("--T", type=float, default=T, help="sweep time")
    p.add_argument("--A-max", dest="A_max", type=float, default=1.0)
    p.add_argument("--B-max", dest="B_max", type=float, default=1.0)
    p.add_argument("--C-max", dest="C_max", type=float, default=1.0)


def _add_compile_flags(p):
    p.add_argument("--policy", choices=["balanced", "paper-example", "left-pair"], default="balanced")
    p.add_argument("--driver-scope", choices=["all", "logical-only"], default="all")
    p.add_argument("--grouping", choices=["ne-sw", "nw-es"], default="ne-sw")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="parity-annealer", description=__doc__.splitlines()[0],
        epilog=_EPILOG, formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("compile", help="compile a problem file to a pair-interaction program")
    p.add_argument("input")
    p.add_argument("-o", "--output", required=True)
    p.add_argument("--strength", type=float, default=None,
                   help="constraint strength C (default 4 sum|J| + 1)")
    _add_compile_flags(p)
    p.add_argument("--seed", type=int, default=0, help="unused; accepted for uniform pipelines")
    p.set_defaults(func=cmd_compile)

    p = sub.add_parser("verify", help="check a compiled program against brute force")
    p.add_argument("input")
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("spectrum", help="write the low-lying spectrum during a sweep as CSV")
    p.add_argument("input")
    p.add_argument("-o", "--output", required=True)
    _add_schedule(p)
    p.add_argument("--levels", type=int, default=16)
    p.add_argument("--times", type=int, default=101, help="number of sample times")
    p.add_argument("--compare", action="store_true", help="ramp and always-on side by side")
    p.set_defaults(func=cmd_spectrum)

    p = sub.add_parser("anneal", help="simulate a coherent sweep; CSV of success probability")
    p.add_argument("input")
    p.add_argument("-o", "--output", required=True)
    _add_schedule(p)
    p.add_argument("--steps", type=int, default=200)
    p.set_defaults(func=cmd_anneal)

    p = sub.add_parser("hardware", help="transmon/JRM parameter table for a compiled program")
    p.add_argument("input")
    p.add_argument("-o", "--output", required=True)
    p.add_argument("--E-C", dest="E_C", type=float, default=0.3, help="charging energy (GHz)")
    p.add_argument("--E-J", dest="E_J", type=float, default=15.0, help="transmon Josephson energy (GHz)")
    p.add_argument("--energy-scale", type=float, default=None,
                   help="GHz per dimensionless unit (default: largest coupler at E_C/4)")
    p.set_defaults(func=cmd_hardware)

    p = sub.add_parser("demo", help="single-plaquette 7-spin pipeline end to end")
    p.add_argument("-o", "--output", default="demo_out")
    p.add_argument("--seed", type=int, default=1)
    _add_schedule(p, T=200.0)
    _add_compile_flags(p)
    p.add_argument("--levels", type=int, default=16)
    p.add_argument("--times", type=int, default=101)
    p.add_argument("--steps", type=int, default=2000)
    p.set_defaults(func=cmd_demo)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except SchemaError as exc:
        print(f"schema error: {exc}", file=sys.stderr)
        return EXIT_SCHEMA
    except CapExceededError as exc:
        print(f"cap exceeded: {exc}", file=sys.stderr)
        return EXIT_CAP
    except VerificationFailed as exc:
        print(f"verification failed: {exc}", file=sys.stderr)
        return EXIT_VERIFY
    except OSError as exc:
        print(f"file error: {exc}", file=sys.stderr)
        return EXIT_FILE
    except ValueError as exc:
        print(f"invalid input: {exc}", file=sys.stderr)
        return EXIT_SCHEMA


if __name__ == "__main__":
    sys.exit(main())
