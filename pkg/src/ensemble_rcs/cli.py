"""Command-line experiment runner.

Every subcommand writes CSV with a ``#``-prefixed header echoing the resolved
run configuration.  Exit codes: 0 success, 2 configuration error, 3 memory-cap
violation, 4 failed check (worst-case or synthesis mismatch), 5 I/O error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

import numpy as np

from . import __version__
from .circuits import (
    CircuitSpec,
    default_xi,
    entropy_sweep,
    generate_random_circuit,
    pt_entropy,
    pt_ideal_sorted,
    run_circuit,
    run_circuit_with_dephasing,
    sorted_probabilities,
)
from .core import (
    CapacityError,
    EnsembleDims,
    apply_three_ensemble_R,
    apply_two_ensemble_T,
    encode_config,
    make_initial_state,
    measurement_probabilities,
    sample_outcomes,
)
from .hardness import (
    PolynomialSpec,
    build_and_simulate_worst_case,
    gap_probability_bruteforce,
    sequence_error,
    synthesize_R_commutator,
    synthesize_T,
)
from .pathint import fidelity_vs_cycles

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_CAP = 3
EXIT_CHECK = 4
EXIT_IO = 5

WORST_CASE_TOL = 1e-9
SYNTH_T_TOL = 1e-10


class ConfigError(ValueError):
    pass


@dataclass
class RunConfig:
    command: str
    N: int = 9
    M: int = 1
    L: int = 10
    xi: float | str = "auto"
    tau: float = 0.0
    paths: int = 100_000
    shots: int = 100
    seed: int = 0
    out: str | None = None
    threads: int = 1
    options: dict = field(default_factory=dict)

    @property
    def dims(self) -> EnsembleDims:
        return EnsembleDims(self.N, self.M)

    def resolved_xi(self) -> float:
        return default_xi(self.dims) if self.xi == "auto" else float(self.xi)


_COMMON = {
    "n": "N",
    "m": "M",
    "cycles": "L",
    "xi": "xi",
    "tau": "tau",
    "paths": "paths",
    "shots": "shots",
    "seed": "seed",
    "out": "out",
    "threads": "threads",
}

_OPTION_DEFAULTS = {
    "entropy-sweep": {"circuits": 10},
    "pt-dist": {},
    "fpi-fidelity": {"sequence": None},
    "worst-case": {"spec": None, "batch": 0},
    "sample": {"identity": False},
    "synth-check": {"steps": [10, 100], "chi": 0.3, "xi_t": 0.7},
}


def resolve_config(args: argparse.Namespace) -> RunConfig:
    """Flags override config-file keys, which override defaults."""
    file_cfg = {}
    if args.config:
        try:
            file_cfg = json.loads(Path(args.config).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config file {args.config}: {exc}") from exc
        if not isinstance(file_cfg, dict):
            raise ConfigError("config file must hold a JSON object")
    cfg = RunConfig(command=args.command)
    settable = {f.name for f in fields(RunConfig)} - {"command", "options"}
    options = dict(_OPTION_DEFAULTS[args.command])
    for key, value in file_cfg.items():
        attr = _COMMON.get(key, key)
        if attr in settable:
            setattr(cfg, attr, value)
        elif key in options:
            options[key] = value
        else:
            raise ConfigError(f"unknown config key {key!r}")
    for flag, attr in _COMMON.items():
        value = getattr(args, flag, None)
        if value is not None:
            setattr(cfg, attr, value)
    for key in options:
        value = getattr(args, key, None)
        if value is not None and value is not False:
            options[key] = value
    cfg.options = options
    _validate(cfg)
    return cfg


def _validate(cfg: RunConfig) -> None:
    for name in ("N", "M"):
        if not isinstance(getattr(cfg, name), int) or getattr(cfg, name) < 1:
            raise ConfigError(f"{name} must be a positive integer")
    if cfg.L < 0:
        raise ConfigError("cycle count must be >= 0")
    if cfg.tau < 0:
        raise ConfigError("tau must be >= 0")
    if cfg.paths < 1:
        raise ConfigError("paths must be >= 1")
    if cfg.shots < 0:
        raise ConfigError("shots must be >= 0")
    if cfg.threads < 1:
        raise ConfigError("threads must be >= 1")
    if cfg.xi != "auto":
        try:
            float(cfg.xi)
        except (TypeError, ValueError):
            raise ConfigError(f"xi must be a number or 'auto', got {cfg.xi!r}") from None


def _header(cfg: RunConfig) -> str:
    d = asdict(cfg)
    d["xi_resolved"] = cfg.resolved_xi()
    return f"# tool: ensemble-rcs {__version__}\n# config: {json.dumps(d, sort_keys=True)}\n"


def _emit(cfg: RunConfig, header_rows: list[str], rows: list[list], footer: list[str] = ()) -> None:
    buf = io.StringIO()
    buf.write(_header(cfg))
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header_rows)
    for row in rows:
        writer.writerow([_fmt(v) for v in row])
    for line in footer:
        buf.write(f"# {line}\n")
    text = buf.getvalue()
    if cfg.out:
        Path(cfg.out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def _fmt(v):
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return v


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------


def cmd_entropy_sweep(cfg: RunConfig) -> int:
    sweep = entropy_sweep(
        cfg.dims, cfg.resolved_xi(), cfg.tau, cfg.L, int(cfg.options["circuits"]), cfg.seed, cfg.threads
    )
    target = pt_entropy(cfg.dims.D)
    rows = [[L, m, s, target] for L, m, s in sweep.rows()]
    _emit(cfg, ["L", "mean_entropy", "std_entropy", "pt_target"], rows)
    return EXIT_OK


def cmd_pt_dist(cfg: RunConfig) -> int:
    spec = generate_random_circuit(cfg.dims, cfg.L, cfg.resolved_xi(), cfg.seed)
    if cfg.tau > 0:
        probs = np.clip(run_circuit_with_dephasing(spec, cfg.tau).diagonal(), 0.0, None)
    else:
        probs = measurement_probabilities(run_circuit(spec))
    p_sorted = sorted_probabilities(probs)
    D = cfg.dims.D
    ranks = np.arange(1, D + 1)
    ideal = pt_ideal_sorted(D, ranks)
    rows = [[int(r), p, q] for r, p, q in zip(ranks, p_sorted, ideal)]
    total = float(p_sorted.sum())
    footer = [f"sum_p_sorted: {total!r}", f"normalized: {abs(total - 1) <= 1e-9}"]
    _emit(cfg, ["rank", "p_sorted", "p_ideal"], rows, footer)
    return EXIT_OK


def cmd_fpi_fidelity(cfg: RunConfig) -> int:
    seq = cfg.options.get("sequence")
    if seq:
        tokens = [t.strip() for t in str(seq).split(",") if t.strip()]
        if len(tokens) == 1 and cfg.M == 1:
            tokens = list(tokens[0])
        try:
            gates = CircuitSpec.from_choices(cfg.dims, tokens, cfg.resolved_xi())
        except ValueError as exc:
            raise ConfigError(f"bad gate sequence: {exc}") from exc
    else:
        gates = generate_random_circuit(cfg.dims, cfg.L, cfg.resolved_xi(), cfg.seed)
    table = fidelity_vs_cycles(cfg.dims, gates, cfg.resolved_xi(), cfg.paths, cfg.seed, cfg.threads)
    rows = [[r.L, r.G, r.paths_capacity, r.fidelity] for r in table]
    _emit(cfg, ["L", "G", "paths_capacity", "fidelity"], rows)
    return EXIT_OK


def cmd_worst_case(cfg: RunConfig) -> int:
    dims = cfg.dims
    batch = int(cfg.options.get("batch") or 0)
    if batch:
        rng = np.random.default_rng(cfg.seed)
        specs = [PolynomialSpec.random(cfg.M, rng) for _ in range(batch)]
    else:
        path = cfg.options.get("spec")
        if not path:
            raise ConfigError("worst-case needs --spec FILE or --batch K")
        try:
            specs = [PolynomialSpec.load(path, cfg.M)]
        except OSError as exc:
            raise ConfigError(f"cannot read spec file {path}: {exc}") from exc
        except ValueError as exc:
            raise ConfigError(f"{path}: {exc}") from exc
    rows = []
    for i, spec in enumerate(specs):
        p_circ = build_and_simulate_worst_case(spec, dims)
        p_gap = gap_probability_bruteforce(spec, dims)
        rows.append([i, p_circ, p_gap, abs(p_circ - p_gap)])
    max_delta = max(r[3] for r in rows)
    footer = [f"max_delta: {max_delta!r}", f"tolerance: {WORST_CASE_TOL!r}"]
    _emit(cfg, ["index", "p_circuit", "p_gap", "delta"], rows, footer)
    return EXIT_OK if max_delta <= WORST_CASE_TOL else EXIT_CHECK


def cmd_sample(cfg: RunConfig) -> int:
    if cfg.options.get("identity"):
        state = make_initial_state(cfg.dims)
    else:
        state = run_circuit(generate_random_circuit(cfg.dims, cfg.L, cfg.resolved_xi(), cfg.seed))
    probs = measurement_probabilities(state)
    shots = sample_outcomes(probs, cfg.shots, cfg.seed, cfg.dims)
    cols = [f"k{m + 1}" for m in range(cfg.M)] + ["probability"]
    rows = [[*map(int, k), probs[encode_config(k, cfg.dims)]] for k in shots]
    _emit(cfg, ["shot", *cols], [[i, *r] for i, r in enumerate(rows)])
    return EXIT_OK


def cmd_synth_check(cfg: RunConfig) -> int:
    dims = cfg.dims
    if dims.M < 2:
        raise ConfigError("synth-check needs M >= 2")
    xi_t = float(cfg.options["xi_t"])
    chi = float(cfg.options["chi"])
    steps = [int(s) for s in cfg.options["steps"]]
    rows = []
    ok = True
    err_t = sequence_error(synthesize_T(0, 1, xi_t), lambda p: apply_two_ensemble_T(p, 0, 1, xi_t), dims)
    rows.append(["T", xi_t, "", err_t])
    ok &= err_t <= SYNTH_T_TOL
    if dims.M >= 3:
        errs = []
        for s in steps:
            e = sequence_error(
                synthesize_R_commutator(0, 1, 2, chi, s), lambda p: apply_three_ensemble_R(p, 0, 1, 2, chi), dims
            )
            errs.append(e)
            rows.append(["R", chi, s, e])
        ok &= all(b < a for a, b in zip(errs, errs[1:]))
    _emit(cfg, ["gate", "angle", "steps", "max_basis_error"], rows, [f"passed: {ok}"])
    return EXIT_OK if ok else EXIT_CHECK


COMMANDS = {
    "entropy-sweep": cmd_entropy_sweep,
    "pt-dist": cmd_pt_dist,
    "fpi-fidelity": cmd_fpi_fidelity,
    "worst-case": cmd_worst_case,
    "sample": cmd_sample,
    "synth-check": cmd_synth_check,
}


def _xi_arg(text: str):
    if text == "auto":
        return text
    try:
        return float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"xi must be a number or 'auto', got {text!r}") from None


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--n", type=int, help="qubits per ensemble")
    common.add_argument("--m", type=int, help="number of ensembles")
    common.add_argument("--cycles", type=int, help="cycle count L")
    common.add_argument("--xi", type=_xi_arg, help="squeezing strength, or 'auto' for pi/sqrt(MN)")
    common.add_argument("--tau", type=float, help="dephasing strength per cycle")
    common.add_argument("--paths", type=int, help="total path budget for path-integral sampling")
    common.add_argument("--shots", type=int, help="number of measurement shots")
    common.add_argument("--seed", type=int, help="master random seed")
    common.add_argument("--out", help="output CSV path (default stdout)")
    common.add_argument("--threads", type=int, help="worker threads")
    common.add_argument("--config", help="JSON file with default settings")

    parser = argparse.ArgumentParser(prog="ensemble-rcs", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("entropy-sweep", parents=[common], help="outcome entropy versus cycle count")
    p.add_argument("--circuits", type=int, help="number of seeded circuits to average")
    sub.add_parser("pt-dist", parents=[common], help="sorted outcome probabilities against the PT law")
    p = sub.add_parser("fpi-fidelity", parents=[common], help="path-integral fidelity versus cycle count")
    p.add_argument("--sequence", help="gate letters, e.g. XYZXZYZXYX, or comma-separated rows for M > 1")
    p = sub.add_parser("worst-case", parents=[common], help="worst-case circuit against the gap oracle")
    p.add_argument("--spec", help="polynomial file: lines 'alpha i j k', 'beta i j', 'gamma i' (1-based)")
    p.add_argument("--batch", type=int, help="check this many random polynomials instead of --spec")
    p = sub.add_parser("sample", parents=[common], help="sample measurement shots from a random circuit")
    p.add_argument("--identity", action="store_true", help="skip the circuit and sample the initial state")
    p = sub.add_parser("synth-check", parents=[common], help="check T and R gate synthesis")
    p.add_argument("--steps", type=int, nargs="+", help="commutator step counts for R")
    p.add_argument("--chi", type=float, help="target R angle")
    p.add_argument("--xi-t", dest="xi_t", type=float, help="target T angle")
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = resolve_config(args)
        return COMMANDS[cfg.command](cfg)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except CapacityError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CAP
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
