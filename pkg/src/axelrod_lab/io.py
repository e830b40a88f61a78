"""Deterministic table and event-log writers.

Every output file starts with a provenance line carrying the fully
resolved configuration.  Floats are serialized at fixed precision and rows
are written in a fixed order, so identical (config, seed) always produces
byte-identical files.
"""

from __future__ import annotations

import json
from fractions import Fraction
from pathlib import Path

import numpy as np


def format_cell(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if v is None:
        return ""
    if isinstance(v, float):
        return f"{v:.12g}"
    if isinstance(v, Fraction):
        return str(v)
    return str(v)


def _json_value(v):
    if isinstance(v, bool):
        return v
    if isinstance(v, float):  # covers numpy floats, which subclass float
        return float(f"{v:.12g}")
    if isinstance(v, np.integer):
        return int(v)
    if isinstance(v, Fraction):
        return str(v)
    return v


def config_line(config: dict) -> str:
    return "# config: " + json.dumps(config, sort_keys=True, separators=(",", ":"))


def write_table(path, header: list[str], rows, config: dict, fmt: str = "csv") -> None:
    """Write rows under fixed column names as CSV or JSON lines."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="\n") as fh:
        if fmt == "csv":
            fh.write(config_line(config) + "\n")
            fh.write(",".join(header) + "\n")
            for row in rows:
                fh.write(",".join(format_cell(v) for v in row) + "\n")
        elif fmt == "jsonl":
            fh.write(json.dumps({"config": config}, sort_keys=True, separators=(",", ":")) + "\n")
            for row in rows:
                obj = {k: _json_value(v) for k, v in zip(header, row)}
                fh.write(json.dumps(obj, separators=(",", ":")) + "\n")
        else:
            raise ValueError(f"unknown format {fmt!r}")


class EventLogWriter:
    """Observer that streams one JSON line per event.

    Field names are fixed: t, x, i, B, U, active.  The feature index
    ``i`` is written 1-based to match the level numbering used in the
    table outputs.  The first line echoes the run configuration.
    """

    def __init__(self, path, config: dict):
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        self._fh = open(path, "w", newline="\n")
        self._fh.write(
            json.dumps({"config": config}, sort_keys=True, separators=(",", ":")) + "\n"
        )

    def __call__(self, ev, state, spins) -> None:
        line = json.dumps(
            {
                "t": float(f"{ev.time:.12g}"),
                "x": ev.x,
                "i": ev.feature + 1,
                "B": ev.direction,
                "U": float(f"{ev.u:.12g}"),
                "active": ev.active,
            },
            separators=(",", ":"),
        )
        self._fh.write(line + "\n")

    def close(self) -> None:
        self._fh.close()

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()
        return False


DENSITY_HEADER = ["t", "ubar1", "ubar2", "u1", "u2", "blockades"]
REGIME_HEADER = ["q1", "q2", "replicate", "absorbed", "t_abs", "surviving_blockade_density"]
AGGREGATE_HEADER = [
    "q1",
    "q2",
    "n",
    "n_absorbed",
    "mean_surviving_blockade_density",
    "ci95_halfwidth",
    "mean_t_abs",
    "predicted_regime",
]
WINDOW_HEADER = ["q1", "q2", "L", "value"]
COLLISION_HEADER = ["time", "edge", "level", "outcome"]
BLOCKADE_HEADER = ["edge", "hits", "broke", "T_e"]
THEORY_HEADER = ["q1", "q2", "p0", "p1", "p2", "p11", "p12", "h1", "h2", "regime"]


def density_rows(snapshots) -> list[tuple]:
    return [
        (s.time, s.ubar[0], s.ubar[1], s.u_active[0], s.u_active[1], s.blockade_density)
        for s in snapshots
    ]


def collision_rows(collisions) -> list[tuple]:
    return [(c.time, c.edge, c.level + 1, c.outcome) for c in collisions]


def blockade_rows(ledger) -> list[tuple]:
    rows = []
    for e in sorted(ledger.blockades):
        b = ledger.blockades[e]
        rows.append((b.edge, b.hits, b.broke, b.t_break))
    return rows
