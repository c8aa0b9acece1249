"""CSV and JSON artifacts.

States are written one row per (sample, agent, dimension) as
``t,agent,dim,value``; spikes as ``t,agent,dim,sign``.  Indices are 1-based
and floats carry 17 significant digits so the files round-trip exactly.
"""
from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .simulator import Trace

STATE_HEADER = "t,agent,dim,value"
SPIKE_HEADER = "t,agent,dim,sign"


def _write_rows(path: Path, header: str, cols, fmt) -> None:
    table = np.column_stack(cols) if len(cols[0]) else np.zeros((0, len(cols)))
    with open(path, "w", newline="\n") as fh:
        fh.write(header + "\n")
        if len(table):
            np.savetxt(fh, table, fmt=fmt, delimiter=",")


def write_states_csv(trace: Trace, path) -> Path:
    path = Path(path)
    S, N, n = trace.x.shape
    t = np.repeat(trace.t, N * n)
    agent = np.tile(np.repeat(np.arange(1, N + 1), n), S)
    dim = np.tile(np.arange(1, n + 1), S * N)
    _write_rows(path, STATE_HEADER, [t, agent, dim, trace.x.reshape(-1)], ["%.17g", "%d", "%d", "%.17g"])
    return path


def write_spikes_csv(trace: Trace, path) -> Path:
    path = Path(path)
    _write_rows(path, SPIKE_HEADER,
                [trace.spike_t, trace.spike_agent + 1, trace.spike_dim + 1, trace.spike_sign],
                ["%.17g", "%d", "%d", "%d"])
    return path


def read_states_csv(path) -> tuple[np.ndarray, np.ndarray]:
    """Inverse of :func:`write_states_csv`: sample times and an (S, N, n) array."""
    data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    N = int(data[:, 1].max())
    n = int(data[:, 2].max())
    x = data[:, 3].reshape(-1, N, n)
    return data[:: N * n, 0], x


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        return v if np.isfinite(v) else None
    return obj


def write_json(obj, path) -> Path:
    path = Path(path)
    path.write_text(json.dumps(_jsonable(obj), indent=2, sort_keys=True) + "\n")
    return path
