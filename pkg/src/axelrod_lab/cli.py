"""Command-line entry point.

Subcommands: ``simulate`` (trajectories to CSV/JSONL), ``verify`` (named
statistical or structural checks with PASS/FAIL), ``sweep`` (regime
experiment over a parameter grid), ``theory`` (exact closed-form table).

Exit codes: 0 success or PASS, 2 verification FAIL, 1 usage or I/O error.
Flags override an optional JSON config file; the fully resolved
configuration is echoed into every output file.  The environment variable
``AXELROD_LAB_THREADS`` caps replicate parallelism.
"""

from __future__ import annotations

import argparse
import inspect
import json
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

from . import io as tableio
from . import lemmas
from .analysis import (
    SnapshotCollector,
    density_estimates,
    geometric_times,
    regime_experiment,
    resolve_threads,
    snapshots_from_live,
)
from .coupling import derive_spins, track_blockades
from .engine import RunConfig, run
from .errors import ParameterError, UnsupportedConfigurationError
from .fast import run_live
from .model import ModelParams, init_state, replicate_rng
from .theory import theory_report

VERIFY_TARGETS = {
    "lemma1": lemmas.verify_lemma1,
    "lemma4": lemmas.verify_lemma4,
    "lemma5": lemmas.verify_lemma5,
    "lemma6": lemmas.verify_lemma6,
    "lemma7-window": lemmas.verify_lemma7_window,
    "init-frequencies": lemmas.verify_init_frequencies,
    "coupling": lemmas.verify_coupling,
    "parity": lemmas.verify_parity,
    "ancestors": lemmas.verify_ancestors,
}


class UsageError(Exception):
    pass


def parse_q(text: str) -> tuple[int, ...]:
    try:
        vals = tuple(int(v) for v in str(text).replace(" ", "").split(",") if v != "")
    except ValueError as exc:
        raise UsageError(f"cannot parse opinion counts from {text!r}") from exc
    if not vals:
        raise UsageError("empty opinion count list")
    return vals


def parse_grid(text: str) -> list[tuple[int, int]]:
    """``a..b`` for the square grid, or ``q1,q2;q1,q2;...`` for explicit pairs."""
    text = str(text).strip()
    if not text:
        raise UsageError("empty grid")
    if ".." in text:
        lo_s, hi_s = text.split("..", 1)
        try:
            lo, hi = int(lo_s), int(hi_s)
        except ValueError as exc:
            raise UsageError(f"cannot parse grid range {text!r}") from exc
        if hi < lo:
            raise UsageError(f"grid range {text!r} is empty")
        return [(a, b) for a in range(lo, hi + 1) for b in range(lo, hi + 1)]
    pairs = []
    for chunk in text.split(";"):
        chunk = chunk.strip()
        if not chunk:
            continue
        vals = parse_q(chunk)
        if len(vals) != 2:
            raise UsageError(f"grid entries must be pairs, got {chunk!r}")
        pairs.append((vals[0], vals[1]))
    if not pairs:
        raise UsageError("empty grid")
    return pairs


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--seed", type=int, default=None, help="root seed (default 0)")
    p.add_argument("--config", type=str, default=None, help="JSON file with defaults")
    p.add_argument("--out", type=str, default=None, help="output directory or file")
    p.add_argument("--format", choices=["csv", "jsonl"], default=None, help="table format")
    p.add_argument("--threads", type=int, default=None, help="replicate parallelism cap")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="axelrod-lab",
        description="Simulator and theory engine for two-feature culture dynamics "
        "with a variable number of opinions per feature.",
    )
    sub = parser.add_subparsers(dest="subcommand", required=True)

    sim = sub.add_parser("simulate", help="run replicates and write density/regime tables")
    sim.add_argument("--q", type=str, default=None, help="opinion counts, e.g. 2,4")
    sim.add_argument("--length", type=int, default=None, help="ring length (default 10000)")
    sim.add_argument("--t-max", type=float, default=None, help="simulated time horizon")
    sim.add_argument("--max-events", type=int, default=None, help="event cap")
    sim.add_argument("--replicates", type=int, default=None, help="independent runs (default 1)")
    sim.add_argument("--snapshot-cadence", type=float, default=None,
                     help="geometric snapshot ratio (default 2)")
    sim.add_argument("--engine", choices=["live", "full"], default=None,
                     help="live skips guaranteed-inactive arrivals (default); "
                     "full samples every cell clock")
    sim.add_argument("--event-log", action="store_true",
                     help="write one JSON line per arrival (forces --engine full)")
    _add_common(sim)

    ver = sub.add_parser("verify", help="run a named check and report PASS/FAIL")
    ver.add_argument("target", choices=sorted(VERIFY_TARGETS), help="which check to run")
    ver.add_argument("--q", type=str, default=None)
    ver.add_argument("--length", type=int, default=None)
    ver.add_argument("--t-max", type=float, default=None)
    ver.add_argument("--replicates", type=int, default=None)
    ver.add_argument("--max-events", type=int, default=None)
    _add_common(ver)

    sw = sub.add_parser("sweep", help="regime experiment over a (q1, q2) grid")
    sw.add_argument("--grid", type=str, default=None,
                    help="'2..4' for the square grid or '2,2;2,4' for pairs")
    sw.add_argument("--length", type=int, default=None, help="ring length (default 1000)")
    sw.add_argument("--t-max", type=float, default=None, help="absorption cap (default 1e7)")
    sw.add_argument("--replicates", type=int, default=None, help="runs per pair (default 50)")
    _add_common(sw)

    th = sub.add_parser("theory", help="exact closed-form table")
    th.add_argument("--q", type=str, default=None, help="one pair, e.g. 2,4")
    th.add_argument("--grid", type=str, default=None, help="'2..6' or '2,2;2,4'")
    _add_common(th)

    return parser


def _load_config(ns) -> dict:
    if not getattr(ns, "config", None):
        return {}
    with open(ns.config) as fh:
        data = json.load(fh)
    if not isinstance(data, dict):
        raise UsageError(f"config file {ns.config} must hold a JSON object")
    return data


def _resolve(ns, cfg: dict, key: str, default):
    """Explicit flag beats config file beats built-in default."""
    val = getattr(ns, key, None)
    if val is not None and val is not False:
        return val
    if key in cfg and cfg[key] is not None:
        return cfg[key]
    return default


def cmd_simulate(ns) -> int:
    cfg = _load_config(ns)
    q = parse_q(_resolve(ns, cfg, "q", "2,4"))
    length = int(_resolve(ns, cfg, "length", 10_000))
    t_max = _resolve(ns, cfg, "t_max", None)
    max_events = _resolve(ns, cfg, "max_events", None)
    replicates = int(_resolve(ns, cfg, "replicates", 1))
    seed = int(_resolve(ns, cfg, "seed", 0))
    fmt = _resolve(ns, cfg, "format", "csv")
    cadence = float(_resolve(ns, cfg, "snapshot_cadence", 2.0))
    engine = _resolve(ns, cfg, "engine", "live")
    event_log = bool(_resolve(ns, cfg, "event_log", False))
    out = Path(_resolve(ns, cfg, "out", "axelrod_out"))

    if len(q) != 2:
        raise UsageError(
            f"simulate writes two-feature density tables; got F={len(q)} (q={q}). "
            "Use the library API for other feature counts."
        )
    if event_log and engine != "full":
        engine = "full"
    if t_max is None and max_events is None:
        t_max = 100.0
    t_max = float(t_max) if t_max is not None else None

    resolved = {
        "subcommand": "simulate",
        "q": list(q),
        "length": length,
        "t_max": t_max,
        "max_events": max_events,
        "replicates": replicates,
        "seed": seed,
        "format": fmt,
        "snapshot_cadence": cadence,
        "engine": engine,
        "event_log": event_log,
    }
    params = ModelParams(length=length, q=q, seed=seed)
    snap_times = geometric_times(t_max, cadence) if t_max else []

    def live_replicate(rep):
        rng = replicate_rng(seed, rep)
        state = init_state(params, rng)
        spins0 = derive_spins(state)
        initial = density_estimates(spins0)
        res = run_live(
            state,
            params,
            rng,
            t_max=t_max,
            max_events=max_events,
            snapshot_times=snap_times,
            collect_collisions=True,
            copy_state=False,
        )
        snaps = [initial] + snapshots_from_live(res)
        return res, snaps

    live_results = {}
    if engine == "live":
        # workers own their engines; writing below stays single-threaded
        workers = min(resolve_threads(_resolve(ns, cfg, "threads", None)), replicates)
        if workers > 1:
            with ThreadPoolExecutor(max_workers=workers) as pool:
                for rep, result in enumerate(pool.map(live_replicate, range(replicates))):
                    live_results[rep] = result
        else:
            for rep in range(replicates):
                live_results[rep] = live_replicate(rep)

    regime_rows = []
    for rep in range(replicates):
        if engine == "live":
            res, snaps = live_results[rep]
            absorbed = res.absorbed
            t_abs = res.t_abs
            final_spins = res.spins
            collisions = res.collisions
            ledger = res.blockade_ledger
            n_active = res.n_active
        else:
            rng = replicate_rng(seed, rep)
            state = init_state(params, rng)
            spins0 = derive_spins(state)
            initial = density_estimates(spins0)
            collector = SnapshotCollector(snap_times, spins0)
            observers = [collector]
            log = None
            if event_log:
                log = tableio.EventLogWriter(out / f"events_r{rep:03d}.jsonl", resolved)
                observers.append(log)
            runcfg = RunConfig(
                t_max=t_max, max_events=max_events, observers=observers
            )
            summary = run(state, params, runcfg, rng)
            if log is not None:
                log.close()
            snaps = [initial] + collector.finish(summary.time)
            absorbed = summary.absorbed
            t_abs = summary.time if summary.stopped_on == "absorbed" else None
            final_spins = summary.spins
            collisions = summary.collisions
            ledger = track_blockades(spins0, collisions)
            n_active = summary.n_active

        tableio.write_table(
            out / f"densities_r{rep:03d}.{fmt}",
            tableio.DENSITY_HEADER,
            tableio.density_rows(snaps),
            resolved,
            fmt,
        )
        tableio.write_table(
            out / f"collisions_r{rep:03d}.{fmt}",
            tableio.COLLISION_HEADER,
            tableio.collision_rows(collisions),
            resolved,
            fmt,
        )
        tableio.write_table(
            out / f"blockades_r{rep:03d}.{fmt}",
            tableio.BLOCKADE_HEADER,
            tableio.blockade_rows(ledger),
            resolved,
            fmt,
        )
        regime_rows.append(
            (
                q[0],
                q[1],
                rep,
                absorbed,
                t_abs,
                final_spins.blockade_count / length,
            )
        )
        print(
            f"replicate {rep}: t={final_spins.time:.6g} absorbed={absorbed} "
            f"active_events={n_active} "
            f"surviving_blockade_density={final_spins.blockade_count / length:.6g}"
        )

    tableio.write_table(
        out / f"regime.{fmt}", tableio.REGIME_HEADER, regime_rows, resolved, fmt
    )
    print(f"wrote {replicates} replicate(s) to {out}")
    return 0


def cmd_verify(ns) -> int:
    cfg = _load_config(ns)
    runner = VERIFY_TARGETS[ns.target]
    kwargs = {}
    accepted = inspect.signature(runner).parameters
    q = _resolve(ns, cfg, "q", None)
    if q is not None:
        kwargs["q"] = parse_q(q)
    for flag, name in [
        ("length", "length"),
        ("t_max", "t_max"),
        ("replicates", "replicates"),
        ("seed", "seed"),
        ("max_events", "max_events"),
    ]:
        val = _resolve(ns, cfg, flag, None)
        if val is not None and name in accepted:
            kwargs[name] = int(val) if name != "t_max" else float(val)
    result = runner(**kwargs)
    if isinstance(result, tuple):
        result = result[0]
    reports = result if isinstance(result, list) else [result]
    for rep in reports:
        print(rep.line())
    out = _resolve(ns, cfg, "out", None)
    if out is not None:
        fmt = _resolve(ns, cfg, "format", "csv")
        resolved = {"subcommand": "verify", "target": ns.target,
                    **{k: (list(v) if isinstance(v, tuple) else v) for k, v in kwargs.items()}}
        if ns.target == "lemma7-window":
            qq = kwargs.get("q", (2, 5))
            rows = [(qq[0], qq[1], r.n, r.estimate) for r in reports]
            tableio.write_table(out, tableio.WINDOW_HEADER, rows, resolved, fmt)
        else:
            rows = [
                (r.name, r.estimate, r.target, r.bound, r.n, r.passed)
                for r in reports
            ]
            tableio.write_table(
                out, ["name", "estimate", "target", "bound", "n", "passed"],
                rows, resolved, fmt,
            )
        print(f"wrote verification table to {out}")
    return 0 if all(r.passed for r in reports) else 2


def cmd_sweep(ns) -> int:
    cfg = _load_config(ns)
    grid = _resolve(ns, cfg, "grid", None)
    if grid is None:
        raise UsageError("sweep needs --grid")
    pairs = parse_grid(grid)
    length = int(_resolve(ns, cfg, "length", 1000))
    t_max = float(_resolve(ns, cfg, "t_max", 1e7))
    replicates = int(_resolve(ns, cfg, "replicates", 50))
    seed = int(_resolve(ns, cfg, "seed", 0))
    fmt = _resolve(ns, cfg, "format", "csv")
    out = Path(_resolve(ns, cfg, "out", "axelrod_sweep"))
    threads = _resolve(ns, cfg, "threads", None)

    resolved = {
        "subcommand": "sweep",
        "grid": [list(p) for p in pairs],
        "length": length,
        "t_max": t_max,
        "replicates": replicates,
        "seed": seed,
        "format": fmt,
        "threads": resolve_threads(threads),
    }
    report = regime_experiment(pairs, length, replicates, t_max, seed, threads)
    rows = [
        (r.q1, r.q2, r.replicate, r.absorbed, r.t_abs, r.surviving_blockade_density)
        for r in report.rows
    ]
    tableio.write_table(out / f"regime.{fmt}", tableio.REGIME_HEADER, rows, resolved, fmt)
    agg_rows = [
        (
            a.q1,
            a.q2,
            a.n,
            a.n_absorbed,
            a.mean_density,
            a.ci95,
            a.mean_t_abs,
            a.predicted_regime,
        )
        for a in report.aggregates
    ]
    tableio.write_table(
        out / f"aggregate.{fmt}", tableio.AGGREGATE_HEADER, agg_rows, resolved, fmt
    )
    for a in report.aggregates:
        print(
            f"({a.q1},{a.q2}): density={a.mean_density:.5f}±{a.ci95:.5f} "
            f"absorbed={a.n_absorbed}/{a.n} predicted={a.predicted_regime}"
        )
    print(f"wrote sweep tables to {out}")
    return 0


def cmd_theory(ns) -> int:
    cfg = _load_config(ns)
    q = _resolve(ns, cfg, "q", None)
    grid = _resolve(ns, cfg, "grid", None)
    if q is not None:
        vals = parse_q(q)
        if len(vals) != 2:
            raise UsageError(f"theory needs a pair, got {vals}")
        pairs = [(vals[0], vals[1])]
    elif grid is not None:
        pairs = parse_grid(grid)
    else:
        raise UsageError("theory needs --q or --grid")
    fmt = _resolve(ns, cfg, "format", "csv")
    out = _resolve(ns, cfg, "out", None)

    rows = []
    for q1, q2 in pairs:
        rep = theory_report(q1, q2)
        rows.append(
            (
                rep.q1,
                rep.q2,
                rep.p0,
                rep.p1,
                rep.p2,
                rep.p11,
                rep.p12,
                rep.h1,
                rep.h2,
                rep.predicted_regime.value,
            )
        )
    resolved = {"subcommand": "theory", "pairs": [list(p) for p in pairs], "format": fmt}
    if out is not None:
        tableio.write_table(out, tableio.THEORY_HEADER, rows, resolved, fmt)
        print(f"wrote theory table to {out}")
    else:
        print(",".join(tableio.THEORY_HEADER))
        for row in rows:
            rendered = [
                f"{v} ({float(v):.6g})" if hasattr(v, "denominator") and v.denominator != 1 else str(v)
                for v in row
            ]
            print(",".join(rendered))
    return 0


def main(argv=None) -> int:
    parser = build_parser()
    try:
        ns = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse exits 2 on usage problems; fold into the documented code 1
        return 0 if exc.code in (0, None) else 1
    try:
        if ns.subcommand == "simulate":
            return cmd_simulate(ns)
        if ns.subcommand == "verify":
            return cmd_verify(ns)
        if ns.subcommand == "sweep":
            return cmd_sweep(ns)
        if ns.subcommand == "theory":
            return cmd_theory(ns)
        raise UsageError(f"unknown subcommand {ns.subcommand!r}")
    except (UsageError, ParameterError, UnsupportedConfigurationError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
