"""Command-line front end.

Every command writes its outputs plus a ``manifest.json`` into one output
directory (``--out``, else ``$MASDIV_OUT``, else ``./masdiv-out``).
``masdiv replay MANIFEST`` reruns the recorded command.  Numbers are
written with 9 significant digits.

Exit codes: 0 success, 2 input or usage error, 1 internal error.
"""

from __future__ import annotations

import argparse
import hashlib
import itertools
import json
import math
import os
import sys
import traceback
from datetime import datetime, timezone
from importlib import resources
from pathlib import Path

import numpy as np

from . import __version__
from .behavior import (
    PolicyTable,
    is_epsilon_homogeneous,
    is_equivalent,
    load_policy_tables,
    phi1,
    phi2,
    policy_tables_from_log,
)
from .dynamics import (
    ClosedForm,
    classify_regime,
    is_resonant,
    load_scenario,
    phase_lag,
    rk4_integrate,
    scenario_from_dict,
    steady_amplitude,
    time_grid,
)
from .entropy import simple_social_entropy, usa_today_index
from .errors import ValidationError
from .sim.experiment import METRICS, diversity_timeseries, experiment_suite
from .sim.log import load_log
from .sim.match import DEFAULT_TICKS, Match
from .sim.teams import BUILTIN_NAMES, resolve_team
from .society import load_society
from .taxonomy import dendrogram_csv, distance_matrix, entropy_curve

MANIFEST = "manifest.json"
FORMAT_VERSION = 1
OUT_ENV = "MASDIV_OUT"


def fmt(x: float) -> str:
    return f"{x:.9g}"


def num(x):
    """JSON-safe number rounded to 9 significant digits."""
    if x is None:
        return None
    x = float(x)
    if not math.isfinite(x):
        return str(x)
    return float(fmt(x))


def _sha256(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


def _out_dir(args) -> Path:
    out = Path(args.out or os.environ.get(OUT_ENV) or "masdiv-out")
    out.mkdir(parents=True, exist_ok=True)
    return out


def _write_manifest(out: Path, args, inputs: list[Path], seed=None) -> None:
    doc = {
        "format_version": FORMAT_VERSION,
        "tool": "masdiv",
        "tool_version": __version__,
        "command": args.command,
        "argv": args.replay_argv,
        "inputs": [{"path": str(p.resolve()), "sha256": _sha256(p)} for p in inputs],
        "seed": seed,
        "output_dir": str(out.resolve()),
        "timestamp": datetime.now(timezone.utc).isoformat(timespec="seconds"),
    }
    (out / MANIFEST).write_text(json.dumps(doc, indent=2) + "\n")


def _write_json(path: Path, doc) -> None:
    path.write_text(json.dumps(doc, indent=2) + "\n")


# ---------------------------------------------------------------- entropy


def cmd_entropy(args) -> int:
    path = Path(args.society)
    society = load_society(path)
    if len(society) == 0:
        raise ValidationError(f"{path}: society has no agents")
    out = _out_dir(args)
    report = {"mode": args.mode, "society": str(path), "n_agents": len(society)}
    if args.mode == "simple":
        attr = args.attribute or _only(society.attribute_names, "--attribute")
        value = simple_social_entropy(society, attr)
        report["attribute"] = attr
    elif args.mode == "usatoday":
        dims = args.dimensions or sorted(society.attribute_names)
        value = usa_today_index(society, dims)
        report["dimensions"] = list(dims)
    else:
        dm = distance_matrix(society, normalize=args.normalize)
        curve = entropy_curve(dm)
        value = curve.area()
        report["normalized"] = args.normalize
        report["breakpoints"] = [num(b) for b in curve.breakpoints]
        report["values"] = [num(v) for v in curve.values]
        (out / "entropy_curve.csv").write_text(curve.to_csv())
        (out / "dendrogram.csv").write_text(dendrogram_csv(dm))
    report["value"] = num(value)
    _write_json(out / "entropy.json", report)
    _write_manifest(out, args, [path])
    print(f"{args.mode} {fmt(value)}")
    return 0


def _only(names, flag: str) -> str:
    names = sorted(names)
    if len(names) != 1:
        raise ValidationError(f"{flag} is required (attributes: {', '.join(names) or 'none'})")
    return names[0]


# --------------------------------------------------------------- behavior


def _load_tables(args) -> tuple[list[PolicyTable], list[Path]]:
    if args.log:
        path = Path(args.log)
        log = load_log(path)
        window = tuple(args.window) if args.window else None
        return policy_tables_from_log(log, window), [path, path.with_suffix(".summary.json")]
    paths = [Path(p) for p in args.policies]
    per_file = [load_policy_tables(p) for p in paths]
    ids = [t.agent for tables in per_file for t in tables]
    if len(set(ids)) != len(ids):
        # the same agent id appears in several files: qualify by file position
        per_file = [
            [PolicyTable(f"{k}:{t.agent}", t.entries) for t in tables]
            for k, tables in enumerate(per_file)
        ]
    return [t for tables in per_file for t in tables], paths


def _matrix_csv(ids, mat) -> str:
    lines = [",".join(["agent_id", *ids])]
    for a, row in zip(ids, mat):
        lines.append(",".join([a, *(fmt(x) for x in row)]))
    return "\n".join(lines) + "\n"


def cmd_behavior(args) -> int:
    if not args.epsilon > 0:
        raise ValidationError("--epsilon must be positive")
    tables, inputs = _load_tables(args)
    if len(tables) < 2:
        raise ValidationError("need at least two agents")
    out = _out_dir(args)
    ids = [t.agent for t in tables]
    n = len(tables)
    m1 = np.zeros((n, n))
    m2 = np.zeros((n, n))
    equivalent = []
    for i, j in itertools.combinations(range(n), 2):
        m1[i, j] = m1[j, i] = phi1(tables[i], tables[j])
        m2[i, j] = m2[j, i] = phi2(tables[i], tables[j])
        if is_equivalent(tables[i], tables[j]):
            equivalent.append([ids[i], ids[j]])
    (out / "phi1.csv").write_text(_matrix_csv(ids, m1))
    (out / "phi2.csv").write_text(_matrix_csv(ids, m2))
    homogeneous = is_epsilon_homogeneous(tables, args.epsilon)
    report = {
        "agents": ids,
        "epsilon": num(args.epsilon),
        "max_phi1": num(m1.max()),
        "max_phi2": num(m2.max()),
        "equivalent_pairs": equivalent,
        "epsilon_homogeneous": homogeneous,
    }
    _write_json(out / "behavior.json", report)
    _write_manifest(out, args, inputs)
    print(f"agents {n} max_phi2 {fmt(m2.max())} homogeneous {str(homogeneous).lower()}")
    return 0


# --------------------------------------------------------------- dynamics


def _resolve_scenario(name: str):
    path = Path(name)
    if path.is_file():
        return load_scenario(path), path
    ref = resources.files("masdiv") / "data" / "scenarios" / f"{name}.json"
    if ref.is_file():
        return scenario_from_dict(json.loads(ref.read_text())), None
    raise ValidationError(f"no scenario file or built-in scenario named {name!r}")


def cmd_dynamics(args) -> int:
    scenario, path = _resolve_scenario(args.scenario)
    p, forcing = scenario.params, scenario.forcing
    dt = args.dt or scenario.dt
    t_end = args.t_end or scenario.t_end
    out = _out_dir(args)
    report = classify_regime(p, forcing)
    sol = ClosedForm(p, forcing, scenario.init)
    traj = sol.trajectory(time_grid(t_end, dt))
    (out / "trajectory.csv").write_text(traj.to_csv())
    terms = []
    growing = False
    for term in forcing.terms:
        res = is_resonant(p, term.omega)
        growing |= res and term.amplitude != 0
        terms.append(
            {
                "label": term.label,
                "omega": num(term.omega),
                "resonant": res,
                "steady_amplitude": "inf" if res else num(steady_amplitude(p, term.amplitude, term.omega)),
                "phase_lag": num(math.pi / 2 if res else phase_lag(p, term.omega)),
            }
        )
    doc = {
        "scenario": scenario.name or args.scenario,
        "params": {"M": num(p.M), "R": num(p.R), "E": num(p.E)},
        "regime": report.regime,
        "damping": report.damping,
        "omega0": num(report.omega0),
        "quasifrequency": num(report.quasifrequency),
        "quasiperiod": num(report.quasiperiod),
        "roots": None if report.roots is None else [num(r) for r in report.roots],
        "growing": growing,
        "forcing": terms,
        "dt": num(dt),
        "t_end": num(t_end),
        "max_abs_D": num(np.max(np.abs(traj.D))),
    }
    if args.oracle:
        oracle = rk4_integrate(p, forcing, scenario.init, dt, t_end)
        (out / "trajectory_rk4.csv").write_text(oracle.to_csv())
        doc["oracle_max_abs_deviation"] = num(traj.max_abs_deviation(oracle))
    _write_json(out / "dynamics.json", doc)
    _write_manifest(out, args, [path] if path else [])
    line = f"regime {report.regime} omega0 {fmt(report.omega0)} growing {str(growing).lower()}"
    if args.oracle:
        line += f" oracle_deviation {fmt(doc['oracle_max_abs_deviation'])}"
    print(line)
    return 0


# ------------------------------------------------------------- experiment


def _team_inputs(names) -> list[Path]:
    return [Path(n) for n in names if n not in BUILTIN_NAMES]


def cmd_experiment(args) -> int:
    control = resolve_team(args.control)
    names = args.challengers or list(BUILTIN_NAMES)
    challengers = [resolve_team(n) for n in names]
    out = _out_dir(args)
    report = experiment_suite(control, challengers, args.games, args.seed, args.ticks, args.jobs)
    (out / "experiment.csv").write_text(report.to_csv())
    _write_manifest(out, args, _team_inputs([args.control, *names]), seed=args.seed)
    for r in report.rows:
        print(
            f"{r.team} positioning {fmt(r.positioning_entropy)} "
            f"trait {fmt(r.trait_entropy)} score_difference {r.score_difference}"
        )
    return 0


# ------------------------------------------------------------------ match


def _parse_malfunction(text: str) -> dict:
    """``TICK:AGENT[:SUBSTITUTE[:DELAY[:SHIFT]]]``"""
    parts = text.split(":")
    if not 2 <= len(parts) <= 5:
        raise ValidationError(f"malformed --malfunction {text!r}")
    try:
        spec = {"tick": int(parts[0]), "agent": parts[1]}
        if len(parts) > 2 and parts[2]:
            spec["substitute"] = parts[2]
        if len(parts) > 3:
            spec["delay"] = int(parts[3])
        if len(parts) > 4:
            spec["shift"] = float(parts[4])
    except ValueError:
        raise ValidationError(f"malformed --malfunction {text!r}") from None
    return spec


def cmd_match(args) -> int:
    a, b = resolve_team(args.team_a), resolve_team(args.team_b)
    if args.ticks % args.window:
        raise ValidationError(f"--window {args.window} does not divide --ticks {args.ticks}")
    match = Match(a, b, args.seed, args.ticks, mirror=args.mirror)
    for text in args.malfunction or []:
        spec = _parse_malfunction(text)
        match.inject_malfunction(**spec)
    log = match.run()
    out = _out_dir(args)
    log.save(out / "match_log.csv")
    lines = ["t,value"]
    for t, v in diversity_timeseries(log, args.window, args.metric, args.side):
        lines.append(f"{t},{fmt(v)}")
    (out / "diversity.csv").write_text("\n".join(lines) + "\n")
    _write_manifest(out, args, _team_inputs([args.team_a, args.team_b]), seed=args.seed)
    print(f"{a.name} {log.score['a']} - {log.score['b']} {b.name}")
    return 0


# ----------------------------------------------------------------- replay


def cmd_replay(args) -> int:
    path = Path(args.manifest)
    try:
        doc = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise ValidationError(f"{path}: line {exc.lineno}: {exc.msg}") from None
    if not isinstance(doc, dict) or not isinstance(doc.get("argv"), list):
        raise ValidationError(f"{path}: not a run manifest")
    if doc.get("format_version") != FORMAT_VERSION:
        raise ValidationError(f"{path}: unsupported format_version {doc.get('format_version')!r}")
    for item in doc.get("inputs", []):
        p = Path(item["path"])
        if not p.is_file() or _sha256(p) != item["sha256"]:
            raise ValidationError(f"input {p} is missing or changed since the recorded run")
    out = args.out or doc["output_dir"]
    return main([*doc["argv"], "--out", str(out)])


# ----------------------------------------------------------------- parser


def _positive_int(text: str) -> int:
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"{text!r} is not an integer") from None
    if v < 1:
        raise argparse.ArgumentTypeError(f"must be at least 1, got {v}")
    return v


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="masdiv", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=f"masdiv {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    def add(name, func, help_):
        sp = sub.add_parser(name, help=help_)
        sp.add_argument("--out", help=f"output directory (default ${OUT_ENV} or ./masdiv-out)")
        sp.set_defaults(func=func)
        return sp

    sp = add("entropy", cmd_entropy, "simple, USA Today or hierarchic entropy of a society file")
    sp.add_argument("society", help="society JSON file")
    sp.add_argument("--mode", choices=("simple", "usatoday", "hierarchic"), default="simple")
    sp.add_argument("--attribute", help="attribute partitioning the society (simple mode)")
    sp.add_argument("--dimensions", nargs="+", help="attributes compared (usatoday mode)")
    sp.add_argument("--normalize", action="store_true", help="divide distances by the maximum")

    sp = add("behavior", cmd_behavior, "pairwise policy differences and epsilon-homogeneity")
    sp.add_argument("policies", nargs="*", help="policy CSV files")
    sp.add_argument("--log", help="match log CSV (with its .summary.json sidecar)")
    sp.add_argument("--window", nargs=2, type=int, metavar=("START", "STOP"))
    sp.add_argument("--epsilon", type=float, default=0.1)

    sp = add("dynamics", cmd_dynamics, "closed-form diversity trajectory of a scenario")
    sp.add_argument("scenario", help="scenario JSON file or built-in scenario name")
    sp.add_argument("--oracle", action="store_true", help="also integrate with RK4 and compare")
    sp.add_argument("--dt", type=float)
    sp.add_argument("--t-end", type=float)

    sp = add("experiment", cmd_experiment, "challengers against a control team")
    sp.add_argument("--control", default="Control")
    sp.add_argument("--challengers", nargs="+", help=f"default: {' '.join(BUILTIN_NAMES)}")
    sp.add_argument("--games", type=_positive_int, default=3)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--ticks", type=_positive_int, default=DEFAULT_TICKS)
    sp.add_argument("--jobs", type=_positive_int, default=1)

    sp = add("match", cmd_match, "one logged match and its diversity time series")
    sp.add_argument("team_a")
    sp.add_argument("team_b")
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--ticks", type=_positive_int, default=DEFAULT_TICKS)
    sp.add_argument("--mirror", action="store_true", help="antithetic random stream")
    sp.add_argument(
        "--malfunction",
        action="append",
        metavar="TICK:AGENT[:SUB[:DELAY[:SHIFT]]]",
        help="kill AGENT at TICK; SUB moves toward its home after DELAY ticks",
    )
    sp.add_argument("--window", type=_positive_int, default=50)
    sp.add_argument("--metric", choices=METRICS, default="positional")
    sp.add_argument("--side", choices=("a", "b"), default="a")

    sp = sub.add_parser("replay", help="rerun the command recorded in a manifest")
    sp.add_argument("manifest")
    sp.add_argument("--out", help="output directory (default: the recorded one)")
    sp.set_defaults(func=cmd_replay)
    return ap


def _replay_argv(argv: list[str]) -> list[str]:
    """argv without ``--out`` so a manifest can be replayed elsewhere."""
    kept, skip = [], False
    for tok in argv:
        if skip:
            skip = False
        elif tok == "--out":
            skip = True
        elif not tok.startswith("--out="):
            kept.append(tok)
    return kept


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    args.replay_argv = _replay_argv(argv)
    if args.command == "behavior" and bool(args.log) == bool(args.policies):
        print("masdiv behavior: error: give either policy files or --log", file=sys.stderr)
        return 2
    try:
        return args.func(args)
    except ValidationError as exc:
        print(f"masdiv: error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"masdiv: error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # noqa: BLE001
        traceback.print_exc(file=sys.stderr)
        print(f"masdiv: internal error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
