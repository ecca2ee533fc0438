"""CSV serialization of traces and snapshots.

Floats are written as their shortest round-trip decimal (Python repr), so a
re-read recovers bit-identical values; files are written atomically via a
temp file and rename.
"""

from __future__ import annotations

import os
import tempfile

import numpy as np

TRACE_HEADER = "step,time,energy,grad_norm,mean_sq_dist"


def _fmt(v) -> str:
    return repr(float(v))


def _atomic_write(path, text):
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_trace_csv(path, trace):
    lines = [TRACE_HEADER]
    for step, time, energy, gnorm, msd in trace.records:
        lines.append(
            f"{step},{_fmt(time)},{_fmt(energy)},{_fmt(gnorm)},{_fmt(msd)}"
        )
    _atomic_write(path, "\n".join(lines) + "\n")


def snapshot_header(dim) -> str:
    return "time,particle," + ",".join(f"x{i}" for i in range(dim))


def write_snapshots_csv(path, trace):
    if not trace.snapshots:
        raise ValueError("trace holds no snapshots")
    dim = trace.snapshots[0][1].shape[1]
    lines = [snapshot_header(dim)]
    for time, positions in trace.snapshots:
        for i, row in enumerate(positions):
            coords = ",".join(_fmt(c) for c in row)
            lines.append(f"{_fmt(time)},{i},{coords}")
    _atomic_write(path, "\n".join(lines) + "\n")


def read_trace_csv(path):
    """Rows of (step, time, energy, grad_norm, mean_sq_dist)."""
    rows = []
    with open(path, "r", encoding="utf-8") as fh:
        header = fh.readline().strip()
        if header != TRACE_HEADER:
            raise ValueError(f"unexpected trace header {header!r}")
        for line in fh:
            step, *vals = line.strip().split(",")
            rows.append((int(step), *(float(v) for v in vals)))
    return rows


def read_snapshots_csv(path):
    """List of (time, positions) in file order, one entry per snapshot time."""
    times = []
    groups = {}
    with open(path, "r", encoding="utf-8") as fh:
        header = fh.readline().strip().split(",")
        if header[:2] != ["time", "particle"]:
            raise ValueError(f"unexpected snapshot header {header!r}")
        for line in fh:
            parts = line.strip().split(",")
            t = float(parts[0])
            idx = int(parts[1])
            coords = [float(c) for c in parts[2:]]
            if t not in groups:
                times.append(t)
                groups[t] = []
            groups[t].append((idx, coords))
    out = []
    for t in times:
        entries = sorted(groups[t])
        out.append((t, np.array([c for _, c in entries], dtype=float)))
    return out


def final_snapshot(path):
    """(time, positions) of the last snapshot stored in the file."""
    snaps = read_snapshots_csv(path)
    if not snaps:
        raise ValueError(f"{path} holds no snapshots")
    return snaps[-1]
