"""Command-line front end: single runs, parameter sweeps, dual-role ablations.

Outputs are deterministic byte-for-byte for a given scenario and seed, and
sweeps produce identical CSV bytes regardless of worker count (rows are
buffered and written in canonical order by the parent process).
"""

from __future__ import annotations

import argparse
import copy
import json
import multiprocessing
import os
import sys

from .engine import (
    MetricsLog,
    Simulation,
    config_from_dict,
    events_csv,
    positions_csv,
    summarize,
)
from .errors import ConfigError, SchemaError


def _load_json(path: str) -> dict:
    with open(path, "r", encoding="utf-8") as f:
        try:
            return json.load(f)
        except json.JSONDecodeError as e:
            raise ConfigError("<file>", f"invalid JSON in {path}: {e}") from e


def _set_dotted(doc: dict, path: str, value) -> None:
    parts = path.split(".")
    node = doc
    for p in parts[:-1]:
        if not isinstance(node.get(p), dict):
            node[p] = {}
        node = node[p]
    node[parts[-1]] = value


def _write_text(path: str, text: str) -> None:
    with open(path, "w", encoding="utf-8", newline="") as f:
        f.write(text)


def _write_artifacts(out_dir: str, log: MetricsLog) -> dict:
    os.makedirs(out_dir, exist_ok=True)
    summary = summarize(log)
    _write_text(os.path.join(out_dir, "events.csv"), events_csv(log))
    _write_text(os.path.join(out_dir, "positions.csv"), positions_csv(log))
    _write_text(os.path.join(out_dir, "summary.json"),
                json.dumps(summary, indent=2, sort_keys=True) + "\n")
    return summary


def _metric_cells(summary: dict) -> list[str]:
    def fmt(v):
        return "" if v is None else f"{v:.6f}"

    return [
        str(summary["goals"]["visited"]),
        fmt(summary["time_to_goal"]["mean"]),
        fmt(summary["delivery_latency"]["p50"]),
        fmt(summary["goals"]["completion_time"]),
    ]


def _value_token(value) -> str:
    """Filesystem- and CSV-safe rendering of a swept parameter value."""
    token = json.dumps(value)
    return token.replace('"', "").replace("/", "_").replace(" ", "")


def _run_job(job: tuple) -> tuple:
    """One simulation in a worker process; never raises."""
    key, doc_json, out_dir = job
    try:
        doc = json.loads(doc_json)
        config = config_from_dict(doc)
        sim = Simulation(config)
        log = sim.run()
        summary = _write_artifacts(out_dir, log)
        return (key, _metric_cells(summary), sim.world.content_hash(), "ok")
    except Exception as e:  # noqa: BLE001 - a failed run becomes a status row
        return (key, ["", "", "", ""], "", f"error:{type(e).__name__}")


def _run_jobs(jobs: list[tuple]) -> dict:
    workers = int(os.environ.get("MULESIM_WORKERS", "1"))
    if workers > 1 and len(jobs) > 1:
        with multiprocessing.Pool(processes=workers) as pool:
            results = pool.map(_run_job, jobs)
    else:
        results = [_run_job(j) for j in jobs]
    return {key: rest for key, *rest in results}


# ---------------------------------------------------------------------------
# Subcommands
# ---------------------------------------------------------------------------

def _cmd_run(args: argparse.Namespace) -> int:
    doc = _load_json(args.scenario)
    if args.seed is not None:
        doc["seed"] = args.seed
    config = config_from_dict(doc)
    log = Simulation(config).run()
    summary = _write_artifacts(args.out, log)
    print(
        f"goals {summary['goals']['visited']}/{summary['goals']['total']} "
        f"elapsed {summary['elapsed']:.1f}s -> {args.out}"
    )
    return 0


def _cmd_sweep(args: argparse.Namespace) -> int:
    spec = _load_json(args.spec)
    for fname, kind in (("base_scenario", str), ("param", str), ("values", list),
                        ("seeds", list), ("out", str)):
        if not isinstance(spec.get(fname), kind):
            raise ConfigError(fname, f"sweep spec needs a {kind.__name__} here")
    if not spec["values"]:
        raise ConfigError("values", "must be non-empty")
    if not spec["seeds"] or any(not isinstance(s, int) or isinstance(s, bool)
                                for s in spec["seeds"]):
        raise ConfigError("seeds", "must be a non-empty list of integers")

    base = _load_json(spec["base_scenario"])
    param = spec["param"]
    out = spec["out"]
    config_from_dict(copy.deepcopy(base))  # fail fast on a broken base scenario

    jobs = []
    keys = []
    for vi, value in enumerate(spec["values"]):
        for seed in spec["seeds"]:
            doc = copy.deepcopy(base)
            _set_dotted(doc, param, value)
            doc["seed"] = seed
            run_dir = os.path.join(out, "runs", f"{param}={_value_token(value)}",
                                   f"seed={seed}")
            key = (vi, seed)
            keys.append((key, value, seed))
            jobs.append((key, json.dumps(doc), run_dir))

    results = _run_jobs(jobs)
    os.makedirs(out, exist_ok=True)
    lines = ["param,value,seed,goals_visited,mean_time_to_goal,"
             "p50_delivery_latency,completion_time,status"]
    for key, value, seed in sorted(keys, key=lambda k: k[0]):
        cells, _hash, status = results[key]
        lines.append(",".join([param, _value_token(value), str(seed), *cells, status]))
    _write_text(os.path.join(out, "sweep.csv"), "\n".join(lines) + "\n")
    print(f"wrote {os.path.join(out, 'sweep.csv')} ({len(keys)} rows)")
    return 0


def _cmd_ablate(args: argparse.Namespace) -> int:
    try:
        seeds = [int(s) for s in args.seeds.split(",") if s.strip() != ""]
    except ValueError as e:
        raise ConfigError("seeds", "must be comma-separated integers") from e
    if not seeds:
        raise ConfigError("seeds", "must be non-empty")
    base = _load_json(args.scenario)
    config_from_dict(copy.deepcopy(base))
    out = args.out

    jobs = []
    keys = []
    for seed in seeds:
        for dual in (True, False):
            doc = copy.deepcopy(base)
            _set_dotted(doc, "roster.uav.dual_role", dual)
            doc["seed"] = seed
            run_dir = os.path.join(out, "runs", f"seed={seed}",
                                   "dual" if dual else "explore_only")
            key = (seed, 0 if dual else 1)
            keys.append((key, seed, dual))
            jobs.append((key, json.dumps(doc), run_dir))

    results = _run_jobs(jobs)
    os.makedirs(out, exist_ok=True)
    lines = ["seed,dual_role,world_hash,goals_visited,mean_time_to_goal,"
             "p50_delivery_latency,completion_time,status"]
    for key, seed, dual in sorted(keys, key=lambda k: k[0]):
        cells, whash, status = results[key]
        lines.append(",".join([str(seed), "true" if dual else "false", whash,
                               *cells, status]))
    _write_text(os.path.join(out, "ablate.csv"), "\n".join(lines) + "\n")
    print(f"wrote {os.path.join(out, 'ablate.csv')} ({len(keys)} rows)")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mulesim",
        description="Deterministic air-ground robot team simulator.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run one scenario and write artifacts")
    p_run.add_argument("--scenario", required=True, help="scenario JSON path")
    p_run.add_argument("--seed", type=int, default=None, help="override scenario seed")
    p_run.add_argument("--out", required=True, help="output directory")
    p_run.set_defaults(func=_cmd_run)

    p_sweep = sub.add_parser("sweep", help="sweep one parameter across seeds")
    p_sweep.add_argument("--spec", required=True, help="sweep spec JSON path")
    p_sweep.set_defaults(func=_cmd_sweep)

    p_ab = sub.add_parser("ablate", help="paired dual-role on/off comparison")
    p_ab.add_argument("--scenario", required=True, help="scenario JSON path")
    p_ab.add_argument("--seeds", required=True, help="comma-separated seeds")
    p_ab.add_argument("--out", required=True, help="output directory")
    p_ab.set_defaults(func=_cmd_ablate)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, SchemaError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    except OSError as e:
        print(f"error: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
