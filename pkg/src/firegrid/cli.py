"""Command-line entry point: simulate, bench, dataset, serve, report.

Global flags come before the command. Every run echoes its resolved
configuration to standard error as one `config: {...}` line; structured
diagnostics (bad input rows, skipped samples) follow as bare JSON
lines. Standard output carries only the command's result, so two runs
with the same flags and inputs produce identical stdout (bench timing
excepted; its checksums are still stable).

Exit codes: 0 success, 2 missing input file or usage error, 1 anything
else (validation, saturation, parse failures).
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

from .agents import AGENT_KINDS, make_policy
from .dataset import (WeatherTable, dedup_incidents, extract_windows,
                      read_incidents, read_samples, sample_negatives,
                      write_incidents, write_samples, write_windows)
from .engine import FireEngine
from .env import Action, EpisodeLog, FireEnv, play
from .errors import FiregridError, SaturationError, ValidationError
from .fuels import FuelCatalog, builtin_catalog, load_catalog
from .protocol import SYNTHETIC_REGISTRY, serve_socket, serve_stream
from .report import GALLONS_PER_DROP, build_report, render_report
from .terrain import Scenario, load_scenario, scenario_from_dict, \
    scenario_to_dict
from .wsbridge import serve_bridge

ENV_CATALOG = "FIREGRID_CATALOG"
ENV_OUT_DIR = "FIREGRID_OUT"

SUMMARY_FIELDS = ("cells_burned", "timesteps", "helitacks", "water_gal")


# --- plumbing ----------------------------------------------------------------

def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="firegrid",
        description="Wildfire spread simulator, suppression environment, "
                    "and ignition dataset tools.")
    parser.add_argument("--seed", type=int, default=0,
                        help="base seed; episode i uses seed+i")
    parser.add_argument("--catalog", default=None,
                        help=f"fuel catalog JSON (default: built-in; "
                             f"env {ENV_CATALOG})")
    parser.add_argument("--out", default=None,
                        help=f"directory for relative output paths "
                             f"(default: cwd; env {ENV_OUT_DIR})")
    parser.add_argument("--json", action="store_true",
                        help="machine-readable stdout")
    parser.add_argument("--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    sim = sub.add_parser("simulate", help="roll out episodes on a scenario")
    sim.add_argument("scenario",
                     help="scenario JSON path or synthetic:<name>")
    sim.add_argument("--agent", choices=AGENT_KINDS, default="circler")
    sim.add_argument("--max-steps", type=int, default=None)
    sim.add_argument("--episodes", type=int, default=1)
    sim.add_argument("--parallel", type=int, default=1)
    sim.add_argument("--log-out", default=None,
                     help="write episode rollout JSON here")
    sim.set_defaults(func=cmd_simulate)

    bench = sub.add_parser("bench", help="steps/sec of the spread kernel "
                                         "and of the full environment")
    bench.add_argument("scenario")
    bench.add_argument("--steps", type=int, default=300)
    bench.set_defaults(func=cmd_bench)

    ds = sub.add_parser("dataset", help="incident table tools")
    dsub = ds.add_subparsers(dest="subcommand", required=True)

    dd = dsub.add_parser("dedup", help="drop duplicate incident reports")
    dd.add_argument("--in", dest="in_path", required=True)
    dd.add_argument("--out", dest="out_path", required=True)
    dd.add_argument("--min-km", type=float, default=5.0)
    dd.add_argument("--min-hours", type=float, default=2.0)
    dd.set_defaults(func=cmd_dataset_dedup)

    neg = dsub.add_parser("negatives", help="synthesize non-fire samples")
    neg.add_argument("--in", dest="in_path", required=True,
                     help="deduplicated positives CSV")
    neg.add_argument("--out", dest="out_path", required=True)
    neg.add_argument("--far", type=int, default=None)
    neg.add_argument("--near", type=int, default=None)
    neg.add_argument("--yearly", type=int, default=None)
    neg.add_argument("--region", default=None,
                     help="lat_lo,lat_hi,lon_lo,lon_hi (default: CONUS)")
    neg.add_argument("--attempt-factor", type=int, default=200)
    neg.set_defaults(func=cmd_dataset_negatives)

    win = dsub.add_parser("windows", help="extract daily weather windows")
    win.add_argument("--samples", required=True)
    win.add_argument("--weather", required=True)
    win.add_argument("--out", dest="out_path", required=True)
    win.add_argument("--pre", type=int, default=60)
    win.add_argument("--post", type=int, default=15)
    win.add_argument("--max-gap", type=int, default=3)
    win.set_defaults(func=cmd_dataset_windows)

    srv = sub.add_parser("serve", help="host the wire protocol")
    mode = srv.add_mutually_exclusive_group(required=True)
    mode.add_argument("--stdio", action="store_true")
    mode.add_argument("--socket", action="store_true")
    mode.add_argument("--http", action="store_true",
                      help="websocket bridge plus static files")
    srv.add_argument("--host", default="127.0.0.1")
    srv.add_argument("--port", type=int, default=0)
    srv.add_argument("--static", default=None,
                     help="directory served over plain HTTP (--http only)")
    srv.add_argument("--scenario-root", default=None)
    srv.set_defaults(func=cmd_serve)

    rep = sub.add_parser("report", help="render a threat report from a "
                                        "rollout file")
    rep.add_argument("log", help="rollout JSON written by simulate "
                                 "--log-out")
    rep.add_argument("--format", choices=("text", "structured"),
                     default=None)
    rep.set_defaults(func=cmd_report)

    return parser


def _resolve_catalog(args) -> tuple[FuelCatalog, str]:
    path = args.catalog or os.environ.get(ENV_CATALOG)
    if path is None:
        return builtin_catalog(), "builtin"
    p = Path(path)
    if not p.is_file():
        raise FileNotFoundError(f"catalog not found: {p}")
    return load_catalog(p.read_text()), str(p)


def _resolve_out_dir(args) -> Path:
    return Path(args.out or os.environ.get(ENV_OUT_DIR) or ".")


def _out_path(out_dir: Path, value: str) -> Path:
    p = Path(value)
    if not p.is_absolute():
        p = out_dir / p
    p.parent.mkdir(parents=True, exist_ok=True)
    return p


def _resolve_scenario(spec: str, catalog: FuelCatalog) -> Scenario:
    if spec.startswith("synthetic:"):
        name = spec.split(":", 1)[1]
        if name not in SYNTHETIC_REGISTRY:
            raise ValidationError(f"unknown synthetic scenario {name!r}")
        return SYNTHETIC_REGISTRY[name]()
    p = Path(spec)
    if not p.is_file():
        raise FileNotFoundError(f"scenario not found: {p}")
    return load_scenario(p, catalog=catalog)


def _echo_config(args, catalog_src: str, out_dir: Path) -> None:
    skip = {"func"}
    cfg = {k: v for k, v in vars(args).items() if k not in skip}
    cfg["catalog"] = catalog_src
    cfg["out_dir"] = str(out_dir)
    print("config: " + json.dumps(cfg, sort_keys=True, default=str),
          file=sys.stderr)


def _emit_diagnostics(diagnostics) -> None:
    for item in diagnostics:
        print(json.dumps(item, sort_keys=True), file=sys.stderr)


# --- simulate ----------------------------------------------------------------

def _summary(env: FireEnv, log: EpisodeLog) -> dict:
    return {"cells_burned": env.engine.n_burnt,
            "timesteps": len(log.actions),
            "helitacks": len(log.drops),
            "water_gal": len(log.drops) * GALLONS_PER_DROP}


def _format_summary(values: dict) -> str:
    return " ".join(f"{k}={values[k]}" for k in SUMMARY_FIELDS)


def cmd_simulate(args, catalog, out_dir) -> int:
    if args.episodes < 1:
        raise ValidationError("--episodes must be at least 1")
    if args.parallel < 1:
        raise ValidationError("--parallel must be at least 1")
    scenario = _resolve_scenario(args.scenario, catalog)

    def run_one(index: int) -> tuple[dict, EpisodeLog]:
        env = FireEnv(scenario, catalog)
        policy = make_policy(args.agent)
        log = play(env, policy, max_steps=args.max_steps)
        summary = _summary(env, log)
        summary["seed"] = args.seed + index
        return summary, log

    indices = range(args.episodes)
    if args.parallel > 1:
        with ThreadPoolExecutor(max_workers=args.parallel) as pool:
            results = list(pool.map(run_one, indices))
    else:
        results = [run_one(i) for i in indices]

    if args.log_out is not None:
        base = _out_path(out_dir, args.log_out)
        for index, (_, log) in enumerate(results):
            path = base if args.episodes == 1 else base.with_name(
                f"{base.stem}.ep{index}{base.suffix}")
            path.write_text(json.dumps(
                {"version": 1, "scenario": scenario_to_dict(scenario),
                 "episode": log.to_dict()}))

    summaries = [s for s, _ in results]
    mean = {k: sum(s[k] for s in summaries) / len(summaries)
            for k in SUMMARY_FIELDS}
    if args.json:
        print(json.dumps({"episodes": summaries, "mean": mean},
                         sort_keys=True))
    else:
        for index, summary in enumerate(summaries):
            print(f"episode {index}: {_format_summary(summary)}")
        if args.episodes > 1:
            print("mean: " + " ".join(f"{k}={mean[k]:.3f}"
                                      for k in SUMMARY_FIELDS))
    return 0


# --- bench -------------------------------------------------------------------

def _rate(steps: int, elapsed: float) -> float:
    return steps / max(elapsed, 1e-9) if steps else 0.0


def cmd_bench(args, catalog, out_dir) -> int:
    if args.steps < 0:
        raise ValidationError("--steps must be >= 0")
    scenario = _resolve_scenario(args.scenario, catalog)

    engine = FireEngine(scenario, catalog)
    engine.reset()
    if args.steps:
        engine.step()          # warm caches, then measure a fresh run
        engine.reset()
    start = time.perf_counter()
    for _ in range(args.steps):
        engine.step()
    raw_elapsed = time.perf_counter() - start
    raw_checksum = engine.checksum()

    env = FireEnv(scenario, catalog)
    env.reset()
    if args.steps:
        env.step(Action.UP)
        env.reset()
    start = time.perf_counter()
    for _ in range(args.steps):
        if env.done:
            env.reset()
        env.step(Action.UP)
    env_elapsed = time.perf_counter() - start
    env_checksum = env.engine.checksum()

    raw = {"steps_per_sec": _rate(args.steps, raw_elapsed),
           "checksum": raw_checksum}
    full = {"steps_per_sec": _rate(args.steps, env_elapsed),
            "checksum": env_checksum}
    if args.json:
        print(json.dumps({"steps": args.steps, "raw_ca": raw,
                          "env_step": full}, sort_keys=True))
    else:
        print(f"raw_ca: {raw['steps_per_sec']:.1f} steps/s "
              f"checksum={raw_checksum}")
        print(f"env_step: {full['steps_per_sec']:.1f} steps/s "
              f"checksum={env_checksum}")
    return 0


# --- dataset -----------------------------------------------------------------

def _read_incidents_checked(path_value: str):
    p = Path(path_value)
    if not p.is_file():
        raise FileNotFoundError(f"input not found: {p}")
    return read_incidents(p)


def cmd_dataset_dedup(args, catalog, out_dir) -> int:
    records, diagnostics = _read_incidents_checked(args.in_path)
    _emit_diagnostics(diagnostics)
    retained = dedup_incidents(records, min_km=args.min_km,
                               min_hours=args.min_hours)
    write_incidents(retained, _out_path(out_dir, args.out_path))
    counts = {"read": len(records) + len(diagnostics),
              "malformed": len(diagnostics), "retained": len(retained)}
    if args.json:
        print(json.dumps(counts, sort_keys=True))
    else:
        print(f"retained {counts['retained']} of {counts['read']} "
              f"({counts['malformed']} malformed)")
    return 0


def _parse_region(value: str) -> tuple:
    parts = value.split(",")
    if len(parts) != 4:
        raise ValidationError("--region needs lat_lo,lat_hi,lon_lo,lon_hi")
    try:
        return tuple(float(p) for p in parts)
    except ValueError as exc:
        raise ValidationError(f"--region: {exc}") from exc


def cmd_dataset_negatives(args, catalog, out_dir) -> int:
    records, diagnostics = _read_incidents_checked(args.in_path)
    _emit_diagnostics(diagnostics)
    counts = {}
    for tier in ("far", "near", "yearly"):
        value = getattr(args, tier)
        if value is not None:
            counts[tier] = value
    kwargs = {}
    if args.region is not None:
        kwargs["region"] = _parse_region(args.region)
    samples = sample_negatives(records, counts=counts or None,
                               seed=args.seed,
                               attempt_factor=args.attempt_factor, **kwargs)
    write_samples(samples, _out_path(out_dir, args.out_path))
    by_tier = {}
    for s in samples:
        by_tier[s.tier] = by_tier.get(s.tier, 0) + 1
    if args.json:
        print(json.dumps({"sampled": len(samples), "by_tier": by_tier},
                         sort_keys=True))
    else:
        detail = " ".join(f"{t}={n}" for t, n in sorted(by_tier.items()))
        print(f"sampled {len(samples)} negatives ({detail})")
    return 0


def cmd_dataset_windows(args, catalog, out_dir) -> int:
    for value in (args.samples, args.weather):
        if not Path(value).is_file():
            raise FileNotFoundError(f"input not found: {value}")
    samples = read_samples(args.samples)
    weather = WeatherTable.read_csv(args.weather)
    windows, diagnostics = extract_windows(samples, weather, pre=args.pre,
                                           post=args.post,
                                           max_gap_days=args.max_gap)
    _emit_diagnostics(diagnostics)
    rows = write_windows(windows, _out_path(out_dir, args.out_path))
    if args.json:
        print(json.dumps({"rows": rows, "windows": len(windows),
                          "skipped": len(diagnostics)}, sort_keys=True))
    else:
        print(f"wrote {rows} rows from {len(windows)} windows "
              f"({len(diagnostics)} samples skipped)")
    return 0


# --- serve and report ----------------------------------------------------------

def cmd_serve(args, catalog, out_dir) -> int:
    root = Path(args.scenario_root) if args.scenario_root else None
    if args.stdio:
        serve_stream(sys.stdin, sys.stdout, catalog, root)
        return 0
    if args.socket:
        server = serve_socket(args.host, args.port, catalog, root)
    else:
        static = Path(args.static) if args.static else None
        if static is not None and not static.is_dir():
            raise FileNotFoundError(f"static dir not found: {static}")
        server = serve_bridge(args.host, args.port, static, catalog, root,
                              verbose=args.verbose)
    host, port = server.server_address[:2]
    print(f"listening on {host}:{port}", file=sys.stderr)
    try:
        server.serve_forever()
    except KeyboardInterrupt:
        pass
    finally:
        server.shutdown()
        server.server_close()
    return 0


def cmd_report(args, catalog, out_dir) -> int:
    p = Path(args.log)
    if not p.is_file():
        raise FileNotFoundError(f"rollout log not found: {p}")
    try:
        doc = json.loads(p.read_text())
        scenario = scenario_from_dict(doc["scenario"], catalog=catalog)
        episode = EpisodeLog.from_dict(doc["episode"])
    except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, FiregridError):
            raise
        raise ValidationError(f"rollout log parse error: {exc}") from exc
    report = build_report(scenario, episode, catalog=catalog)
    fmt = args.format or ("structured" if args.json else "text")
    print(render_report(report, format=fmt))
    return 0


# --- entry -------------------------------------------------------------------

def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        catalog, catalog_src = _resolve_catalog(args)
        out_dir = _resolve_out_dir(args)
        _echo_config(args, catalog_src, out_dir)
        return args.func(args, catalog, out_dir)
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except SaturationError as exc:
        print(f"error: {exc} (achieved={exc.achieved} "
              f"requested={exc.requested})", file=sys.stderr)
        return 1
    except FiregridError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
