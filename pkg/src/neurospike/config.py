"""Scenario files: parsing, canonical serialization, and ``--set`` overrides.

Grammar (INI style, read with :mod:`configparser`)::

    [scenario]          scalar run parameters
    name = median5
    k = 15              coupling gain (or give ``delta`` instead; k = alpha/delta)
    alpha = 0.15        spike amplitude
    mu = 0              leakage (optional, default 0)
    dt = 1e-4           base step
    t_end = 3
    coupling_start = 0  (optional)
    sample_period = 1e-4  (optional, default dt)
    zeno_guard = 64     (optional)
    seed = 0            (optional)

    [graph]
    nodes = 5
    directed = true
    edges = 1-2, 2-3, 3-4, 4-5, 5-1   sender-receiver; undirected links once

    [agent 1]           one section per agent, numbered 1..N
    kind = sign_tracker parameters depend on the kind (see below)
    c = 3.23
    x0 = 3.23           initial state, n values
    xi0 = 0 0           optional initial potentials, 2n values
                        (dim 1 positive, dim 1 negative, dim 2 positive, ...)

    [reference]         optional
    s0 = 3.07           initial point of the blended reference trajectory
    window = 2 3        time window for the summary metrics
                        (default: final third of the coupled phase)

Agent kinds and their keys: ``sign_tracker`` (c), ``harmonic`` (a1, a2),
``vdp_source`` (nu), ``linear`` (A rows separated by ``;``, b).
"""
from __future__ import annotations

import configparser
import math
import re
from importlib import resources
from pathlib import Path
from typing import Iterable, Mapping, Optional

import numpy as np

from .dynamics import KINDS, AgentSpec, Harmonic, LinearAffine, SignTracker, VanDerPolSource
from .graph import GraphError, build_topology
from .simulator import Scenario, ScenarioError


class ConfigError(ScenarioError):
    pass


FLOAT_KEYS = ("k", "alpha", "delta", "mu", "dt", "t_end", "coupling_start", "sample_period")
INT_KEYS = ("zeno_guard", "seed")
OVERRIDE_KEYS = FLOAT_KEYS + INT_KEYS
_AGENT_SECTION = re.compile(r"^agent\s+(\d+)$")


def _floats(text: str, where: str) -> list[float]:
    try:
        return [float(tok) for tok in text.replace(",", " ").split()]
    except ValueError:
        raise ConfigError(f"{where}: expected numbers, got {text!r}") from None


def _scalar(section, key: str, cast, where: str):
    raw = section.get(key)
    try:
        return cast(raw)
    except (TypeError, ValueError):
        raise ConfigError(f"{where}: cannot read {key} = {raw!r}") from None


def _parse_edges(text: str) -> list[tuple[int, int]]:
    edges = []
    for tok in re.split(r"[,\s]+", text.strip()):
        if not tok:
            continue
        m = re.fullmatch(r"(\d+)-(\d+)", tok)
        if not m:
            raise ConfigError(f"[graph] edges: bad edge token {tok!r} (want SENDER-RECEIVER)")
        edges.append((int(m.group(1)), int(m.group(2))))
    return edges


def _parse_agent(section, where: str) -> AgentSpec:
    kind = section.get("kind")
    if kind not in KINDS:
        raise ConfigError(f"{where} kind: unknown kind {kind!r}; known: {sorted(KINDS)}")
    need = {"sign_tracker": ("c",), "harmonic": ("a1", "a2"), "vdp_source": (), "linear": ("A", "b")}[kind]
    for key in need:
        if key not in section:
            raise ConfigError(f"{where}: missing key {key!r} for kind {kind}")
    allowed = set(need) | {"kind", "x0", "xi0"} | ({"nu"} if kind == "vdp_source" else set())
    extra = set(section) - allowed
    if extra:
        raise ConfigError(f"{where}: unexpected keys {sorted(extra)}")
    try:
        if kind == "sign_tracker":
            return SignTracker(_scalar(section, "c", float, where))
        if kind == "harmonic":
            return Harmonic(_scalar(section, "a1", float, where), _scalar(section, "a2", float, where))
        if kind == "vdp_source":
            return VanDerPolSource(_scalar(section, "nu", float, where)) if "nu" in section else VanDerPolSource()
        rows = [_floats(r, f"{where} A") for r in section["A"].split(";") if r.strip()]
        return LinearAffine.from_arrays(rows, _floats(section["b"], f"{where} b"))
    except ValueError as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(f"{where}: {exc}") from None


def _read_parser(text: str, source: str) -> configparser.ConfigParser:
    cp = configparser.ConfigParser(inline_comment_prefixes=("#",), interpolation=None)
    cp.optionxform = str  # keep "A" distinct from "a1"
    try:
        cp.read_string(text, source=source)
    except configparser.Error as exc:
        raise ConfigError(f"{source}: parse error: {exc}") from None
    return cp


def scenario_from_text(text: str, source: str = "<string>",
                       overrides: Optional[Mapping[str, str]] = None) -> Scenario:
    cp = _read_parser(text, source)
    for name in ("scenario", "graph"):
        if not cp.has_section(name):
            raise ConfigError(f"{source}: missing [{name}] section")
    sec = cp["scenario"]
    unknown = set(sec) - set(OVERRIDE_KEYS) - {"name"}
    if unknown:
        raise ConfigError(f"{source} [scenario]: unknown keys {sorted(unknown)}")
    params: dict = {}
    for key in FLOAT_KEYS:
        if key in sec:
            params[key] = _scalar(sec, key, float, f"{source} [scenario]")
    for key in INT_KEYS:
        if key in sec:
            params[key] = _scalar(sec, key, int, f"{source} [scenario]")
    for key, raw in (overrides or {}).items():
        if key not in OVERRIDE_KEYS:
            raise ConfigError(f"unknown override key {key!r}; allowed: {', '.join(OVERRIDE_KEYS)}")
        try:
            params[key] = int(raw) if key in INT_KEYS else float(raw)
        except ValueError:
            raise ConfigError(f"override {key}={raw!r} is not a number") from None
        if key == "k":
            params.pop("delta", None)
        elif key == "delta" and not (overrides and "k" in overrides):
            params.pop("k", None)
    for key in ("alpha", "t_end"):
        if key not in params:
            raise ConfigError(f"{source} [scenario]: missing key {key!r}")
    if "delta" in params:
        if not params["delta"] > 0:
            raise ConfigError(f"{source} [scenario]: delta must be positive")
        k_from_delta = params["alpha"] / params["delta"]
        if "k" in params and not math.isclose(params["k"], k_from_delta, rel_tol=1e-12):
            raise ConfigError(f"{source} [scenario]: k={params['k']} conflicts with alpha/delta={k_from_delta}")
        params["k"] = k_from_delta
        del params["delta"]
    if "k" not in params:
        raise ConfigError(f"{source} [scenario]: need k or delta")

    g = cp["graph"]
    try:
        directed = g.getboolean("directed", fallback=False)
    except ValueError:
        raise ConfigError(f"{source} [graph] directed: not a boolean") from None
    n_nodes = _scalar(g, "nodes", int, f"{source} [graph]")
    try:
        graph = build_topology(n_nodes, _parse_edges(g.get("edges", "")), directed)
    except GraphError as exc:
        raise ConfigError(f"{source} [graph]: {exc}") from None

    agent_secs = {}
    for name in cp.sections():
        m = _AGENT_SECTION.match(name)
        if m:
            agent_secs[int(m.group(1))] = cp[name]
        elif name not in ("scenario", "graph", "reference"):
            raise ConfigError(f"{source}: unknown section [{name}]")
    if sorted(agent_secs) != list(range(1, n_nodes + 1)):
        raise ConfigError(f"{source}: need sections [agent 1] .. [agent {n_nodes}], got {sorted(agent_secs)}")
    agents, x0, xi0 = [], [], []
    for idx in range(1, n_nodes + 1):
        where = f"{source} [agent {idx}]"
        sec_a = agent_secs[idx]
        spec = _parse_agent(sec_a, where)
        n = spec.state_dim
        if "x0" not in sec_a:
            raise ConfigError(f"{where}: missing key 'x0'")
        xs = _floats(sec_a["x0"], f"{where} x0")
        if len(xs) != n:
            raise ConfigError(f"{where} x0: expected {n} values, got {len(xs)}")
        pots = _floats(sec_a["xi0"], f"{where} xi0") if "xi0" in sec_a else [0.0] * (2 * n)
        if len(pots) != 2 * n:
            raise ConfigError(f"{where} xi0: expected {2 * n} values, got {len(pots)}")
        agents.append(spec)
        x0.append(xs)
        xi0.append(pots)
    dims = {len(v) for v in x0}
    if len(dims) != 1:
        raise ConfigError(f"{source}: agents disagree on state dimension")

    s0 = window = None
    if cp.has_section("reference"):
        ref = cp["reference"]
        if set(ref) - {"s0", "window"}:
            raise ConfigError(f"{source} [reference]: unknown keys {sorted(set(ref) - {'s0', 'window'})}")
        if "s0" in ref:
            s0 = _floats(ref["s0"], f"{source} [reference] s0")
        if "window" in ref:
            window = _floats(ref["window"], f"{source} [reference] window")
            if len(window) != 2:
                raise ConfigError(f"{source} [reference] window: expected 2 values, got {len(window)}")

    try:
        return Scenario(
            graph=graph, agents=tuple(agents), initial_states=np.array(x0),
            initial_potentials=np.array(xi0), reference_s0=s0, report_window=window,
            name=sec.get("name", Path(source).stem), **params,
        )
    except ScenarioError as exc:
        raise ConfigError(f"{source}: invalid scenario: {exc}") from None


def _fmt(v: float) -> str:
    return repr(float(v))


def scenario_to_text(sc: Scenario) -> str:
    """Canonical text form; parsing it back yields an equal Scenario."""
    lines = ["[scenario]", f"name = {sc.name}"]
    for key in ("k", "alpha", "mu", "dt", "t_end", "coupling_start", "sample_period"):
        lines.append(f"{key} = {_fmt(getattr(sc, key))}")
    lines += [f"zeno_guard = {int(sc.zeno_guard)}", f"seed = {int(sc.seed)}", ""]
    g = sc.graph
    if g.directed:
        edge_list = g.edges
    else:
        edge_list = [(i, p) for i, p in g.edges if i < p]
    lines += ["[graph]", f"nodes = {g.n_nodes}", f"directed = {'true' if g.directed else 'false'}",
              "edges = " + ", ".join(f"{i}-{p}" for i, p in edge_list), ""]
    for idx, spec in enumerate(sc.agents):
        lines.append(f"[agent {idx + 1}]")
        lines.append(f"kind = {spec.kind}")
        for key, val in spec.config_items().items():
            lines.append(f"{key} = {val}")
        lines.append("x0 = " + " ".join(_fmt(v) for v in sc.initial_states[idx]))
        lines.append("xi0 = " + " ".join(_fmt(v) for v in sc.initial_potentials[idx].ravel()))
        lines.append("")
    ref = []
    if sc.reference_s0 is not None:
        ref.append("s0 = " + " ".join(_fmt(v) for v in sc.reference_s0))
    if sc.report_window is not None:
        ref.append("window = " + " ".join(_fmt(v) for v in sc.report_window))
    if ref:
        lines += ["[reference]", *ref, ""]
    return "\n".join(lines)


def bundled_scenarios() -> list[str]:
    root = resources.files("neurospike") / "scenarios"
    return sorted(p.name for p in root.iterdir() if p.name.endswith(".cfg"))


def bundled_text(name: str) -> str:
    if not name.endswith(".cfg"):
        name += ".cfg"
    path = resources.files("neurospike") / "scenarios" / name
    if not path.is_file():
        raise ConfigError(f"no bundled scenario {name!r}; available: {', '.join(bundled_scenarios())}")
    return path.read_text()


def parse_scenario(path, overrides: Optional[Mapping[str, str]] = None) -> Scenario:
    """Load a scenario from a file path or a bundled scenario name."""
    p = Path(path)
    if p.is_file():
        return scenario_from_text(p.read_text(), source=str(p), overrides=overrides)
    return scenario_from_text(bundled_text(str(path)), source=p.name if p.suffix else f"{p.name}.cfg",
                              overrides=overrides)


def parse_overrides(items: Iterable[str]) -> dict[str, str]:
    """Turn ``["k=20", "alpha=0.5"]`` into a dict, rejecting unknown keys."""
    out = {}
    for item in items:
        key, sep, val = item.partition("=")
        key = key.strip()
        if not sep or not val.strip():
            raise ConfigError(f"override {item!r} is not KEY=VALUE")
        if key not in OVERRIDE_KEYS:
            raise ConfigError(f"unknown override key {key!r}; allowed: {', '.join(OVERRIDE_KEYS)}")
        out[key] = val.strip()
    return out
