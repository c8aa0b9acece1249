"""Hybrid flow/jump engine for agents coupled through spiking amplifiers.

Between spikes every agent flows along ``f_i(t, x_i) - k*d_i*x_i`` while its
amplifier potentials integrate ``ReLU(+-x_i)``.  When a potential reaches
``delta = alpha/k`` the neuron resets and each receiving agent's state jumps
by ``+-alpha`` in the same coordinate.  ``run_continuous`` and
``run_blended`` integrate the two reference systems (ideal diffusive coupling
and the averaged field) on the same grid.
"""
from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from . import _kernels as K
from .dynamics import AgentSpec, pack_agents
from .graph import Graph, is_balanced, is_connected, spectral
from .neuron import SpikeEvent


class ScenarioError(ValueError):
    pass


class SimulationError(RuntimeError):
    pass


class ZenoError(SimulationError):
    pass


class DivergenceError(SimulationError):
    pass


_EVENT_CAPACITY = 1 << 16


def _steps(span: float, dt: float, what: str) -> int:
    m = round(span / dt)
    if m < 0 or not math.isclose(m * dt, span, rel_tol=1e-9, abs_tol=1e-12):
        raise ScenarioError(f"{what}={span!r} is not an integer multiple of dt={dt!r}")
    return m


def _frozen(a) -> np.ndarray:
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class Scenario:
    graph: Graph
    agents: tuple[AgentSpec, ...]
    k: float
    alpha: float
    t_end: float
    initial_states: np.ndarray
    mu: float = 0.0
    dt: float = 1e-4
    coupling_start: float = 0.0
    initial_potentials: Optional[np.ndarray] = None
    sample_period: Optional[float] = None
    zeno_guard: int = 64
    seed: int = 0
    name: str = "scenario"
    reference_s0: Optional[np.ndarray] = None
    report_window: Optional[tuple[float, float]] = None

    def __post_init__(self):
        set_ = lambda k, v: object.__setattr__(self, k, v)  # noqa: E731
        set_("agents", tuple(self.agents))
        N = self.graph.n_nodes
        if len(self.agents) != N:
            raise ScenarioError(f"{len(self.agents)} agents for a {N}-node graph")
        dims = {a.state_dim for a in self.agents}
        if len(dims) != 1:
            raise ScenarioError(f"agents disagree on state dimension: {sorted(dims)}")
        n = dims.pop()
        for name in ("k", "alpha", "dt", "t_end"):
            if not getattr(self, name) > 0:
                raise ScenarioError(f"{name} must be positive, got {getattr(self, name)!r}")
        if self.mu < 0:
            raise ScenarioError(f"mu must be nonnegative, got {self.mu!r}")
        if self.coupling_start < 0:
            raise ScenarioError("coupling_start must be nonnegative")
        if int(self.zeno_guard) != self.zeno_guard or self.zeno_guard < 1:
            raise ScenarioError("zeno_guard must be a positive integer")
        if self.sample_period is None:
            set_("sample_period", self.dt)
        if not self.sample_period > 0:
            raise ScenarioError("sample_period must be positive")
        _steps(self.t_end, self.dt, "t_end")
        _steps(self.sample_period, self.dt, "sample_period")
        if _steps(self.t_end, self.dt, "t_end") % _steps(self.sample_period, self.dt, "sample_period"):
            raise ScenarioError("t_end must be a multiple of sample_period")

        x0 = _frozen(self.initial_states).reshape(N, n) if np.size(self.initial_states) == N * n else None
        if x0 is None:
            raise ScenarioError(f"initial_states must hold {N}x{n} values")
        x0 = _frozen(x0)
        set_("initial_states", x0)
        if self.initial_potentials is None:
            xi0 = np.zeros((N, n, 2))
        else:
            xi0 = np.asarray(self.initial_potentials, dtype=float)
            if xi0.size != N * n * 2:
                raise ScenarioError(f"initial_potentials must hold {N}x{n}x2 values")
            xi0 = xi0.reshape(N, n, 2)
        if np.any(xi0 < 0) or np.any(xi0 >= self.delta):
            raise ScenarioError(f"initial potentials must lie in [0, delta={self.delta!r})")
        set_("initial_potentials", _frozen(xi0))
        if self.reference_s0 is not None:
            s0 = np.asarray(self.reference_s0, dtype=float).reshape(-1)
            if s0.shape != (n,):
                raise ScenarioError(f"reference_s0 must be a {n}-vector")
            set_("reference_s0", _frozen(s0))
        if self.report_window is not None:
            lo, hi = (float(v) for v in self.report_window)
            if not 0 <= lo < hi:
                raise ScenarioError(f"report_window must satisfy 0 <= lo < hi, got {(lo, hi)}")
            set_("report_window", (lo, hi))

        if not is_connected(self.graph):
            raise ScenarioError("graph is not connected")
        if self.graph.directed and not is_balanced(self.graph):
            raise ScenarioError("directed graph is not balanced (in-degree != out-degree)")

    @property
    def delta(self) -> float:
        return self.alpha / self.k

    @property
    def n_agents(self) -> int:
        return self.graph.n_nodes

    @property
    def state_dim(self) -> int:
        return self.agents[0].state_dim

    @property
    def n_steps(self) -> int:
        return _steps(self.t_end, self.dt, "t_end")

    @property
    def stride(self) -> int:
        return _steps(self.sample_period, self.dt, "sample_period")

    @property
    def coupling_step(self) -> int:
        """First base step at which coupling and spike delivery are on."""
        return math.ceil(self.coupling_start / self.dt - 1e-9)

    @property
    def blended_s0(self) -> np.ndarray:
        if self.reference_s0 is not None:
            return np.array(self.reference_s0)
        return self.initial_states.mean(axis=0)

    @property
    def analysis_window(self) -> tuple[float, float]:
        """``report_window`` if it fits the run, else the final third of the coupled phase."""
        if self.report_window is not None and self.report_window[1] <= self.t_end:
            return self.report_window
        return (self.t_end - (self.t_end - self.coupling_start) / 3.0, self.t_end)

    def sample_times(self) -> np.ndarray:
        return np.arange(self.n_steps // self.stride + 1) * self.stride * self.dt

    def digest(self) -> str:
        from .config import scenario_to_text

        return hashlib.sha256(scenario_to_text(self).encode()).hexdigest()

    def __eq__(self, other):
        if not isinstance(other, Scenario):
            return NotImplemented
        return self.digest() == other.digest()

    __hash__ = None


@dataclass
class SimState:
    t: float
    x: np.ndarray
    xi: np.ndarray
    spike_count: np.ndarray = field(default=None)

    def __post_init__(self):
        if self.spike_count is None:
            self.spike_count = np.zeros(self.xi.shape, dtype=np.int64)

    @classmethod
    def initial(cls, scenario: Scenario) -> "SimState":
        return cls(0.0, np.array(scenario.initial_states), np.array(scenario.initial_potentials))

    def copy(self) -> "SimState":
        return SimState(self.t, self.x.copy(), self.xi.copy(), self.spike_count.copy())


@dataclass
class Trace:
    """Sampled states plus the spike log of one run.

    ``x`` has shape (samples, N, n).  Spike arrays use 0-based agent and
    dimension indices and are sorted by time, then (agent, dim, sign) order.
    ``peak_abs`` is the largest ``|x|`` the engine saw per agent and
    coordinate, including post-jump values that fall between samples.
    """

    mode: str
    t: np.ndarray
    x: np.ndarray
    scenario_digest: str
    spike_t: np.ndarray = field(default_factory=lambda: np.zeros(0))
    spike_agent: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=np.int64))
    spike_dim: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=np.int64))
    spike_sign: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=np.int64))
    peak_abs: Optional[np.ndarray] = None
    final_state: Optional[SimState] = None

    @property
    def n_spikes(self) -> int:
        return len(self.spike_t)

    @property
    def spikes(self) -> list[SpikeEvent]:
        return [
            SpikeEvent(float(t), int(a) + 1, int(d) + 1, int(s))
            for t, a, d, s in zip(self.spike_t, self.spike_agent, self.spike_dim, self.spike_sign)
        ]

    def amp_spikes(self, agent: int, dim: int) -> tuple[np.ndarray, np.ndarray]:
        """Times and signs of one amplifier's spikes (0-based indices)."""
        sel = (self.spike_agent == agent) & (self.spike_dim == dim)
        return self.spike_t[sel], self.spike_sign[sel]

    def digest(self) -> str:
        h = hashlib.sha256()
        for arr in (self.t, self.x, self.spike_t, self.spike_agent, self.spike_dim, self.spike_sign):
            h.update(np.ascontiguousarray(arr).tobytes())
        return h.hexdigest()


class _Network:
    """Array form of a scenario, as consumed by the kernels."""

    def __init__(self, sc: Scenario):
        spec = spectral(sc.graph)
        self.kinds, self.prm = pack_agents(sc.agents)
        self.recv = spec.adjacency.astype(np.int64)
        self.lap = spec.laplacian.astype(float)
        deg = spec.degree.diagonal().astype(float)
        self.kd_on = sc.k * deg
        self.kd_off = np.zeros_like(deg)
        N, n = sc.n_agents, sc.state_dim
        self.ws = K.make_workspace(N, n)
        self.x1 = np.zeros((N, n))
        self.xi1 = np.zeros((N, n, 2))


def _coupled_at(sc: Scenario, t: float) -> bool:
    return t >= sc.coupling_start - 1e-9 * sc.dt


def flow_step(state: SimState, scenario: Scenario, dt: float) -> SimState:
    """One RK4 step of the joint flow of states and potentials, with no jumps.

    Potentials may end above threshold; ``detect_and_jump`` handles firing.
    """
    if not dt > 0:
        raise ValueError("dt must be positive")
    net = _Network(scenario)
    kd = net.kd_on if _coupled_at(scenario, state.t) else net.kd_off
    x1 = np.zeros_like(state.x)
    xi1 = np.zeros_like(state.xi)
    K.spike_rk4(state.t, dt, state.x, state.xi, net.kinds, net.prm, kd, scenario.mu, x1, xi1, net.ws)
    if not np.all(np.isfinite(x1)):
        raise DivergenceError(f"non-finite state after t={state.t}")
    return SimState(state.t + dt, x1, xi1, state.spike_count.copy())


def detect_and_jump(
    state: SimState, scenario: Scenario, window: tuple[float, float]
) -> tuple[SimState, list[SpikeEvent]]:
    """Advance ``state`` across ``window`` firing every crossing inside it.

    ``state`` is the state at ``window[0]``; the tentative flow over the
    window is recomputed here because the post-jump remainder has to be
    re-flowed from it.
    """
    t0, t1 = window
    if not math.isclose(state.t, t0, rel_tol=0, abs_tol=1e-12):
        raise ValueError(f"state is at t={state.t}, window starts at {t0}")
    net = _Network(scenario)
    coupled = _coupled_at(scenario, t0)
    out = state.copy()
    cap = scenario.zeno_guard + 1
    ev_t = np.zeros(cap)
    ev_src = np.zeros(cap, dtype=np.int64)
    ev_dim = np.zeros(cap, dtype=np.int64)
    ev_sign = np.zeros(cap, dtype=np.int64)
    peak = np.abs(out.x)
    status, n_ev = K.advance_window(
        t0, t1 - t0, out.x, out.xi, net.kinds, net.prm, net.kd_on if coupled else net.kd_off,
        scenario.mu, scenario.delta, scenario.alpha, net.recv, coupled, scenario.zeno_guard,
        net.ws, net.x1, net.xi1, ev_t, ev_src, ev_dim, ev_sign, 0, out.spike_count, peak)
    _raise_for(status, t0, scenario)
    out.t = t1
    events = [SpikeEvent(float(ev_t[j]), int(ev_src[j]) + 1, int(ev_dim[j]) + 1, int(ev_sign[j]))
              for j in range(n_ev)]
    return out, events


def _raise_for(status: int, t: float, sc: Scenario):
    if status == K.ZENO:
        raise ZenoError(f"more than zeno_guard={sc.zeno_guard} jumps in the step starting at t={t:.6g}")
    if status == K.DIVERGED:
        raise DivergenceError(f"state diverged in the step starting at t={t:.6g}")


def run(scenario: Scenario) -> Trace:
    """Simulate the spike-coupled network from t=0 to ``t_end``."""
    sc = scenario
    net = _Network(sc)
    state = SimState.initial(sc)
    times = sc.sample_times()
    samples = np.zeros((len(times), sc.n_agents, sc.state_dim))
    samples[0] = state.x
    peak = np.abs(state.x)
    ev_t = np.zeros(_EVENT_CAPACITY)
    ev_src = np.zeros(_EVENT_CAPACITY, dtype=np.int64)
    ev_dim = np.zeros(_EVENT_CAPACITY, dtype=np.int64)
    ev_sign = np.zeros(_EVENT_CAPACITY, dtype=np.int64)
    if sc.zeno_guard + 1 > _EVENT_CAPACITY:
        raise ScenarioError(f"zeno_guard must be below {_EVENT_CAPACITY}")
    chunks = []
    m = 0
    while True:
        status, m, n_ev = K.run_spiking(
            m, sc.n_steps, sc.dt, state.x, state.xi, net.kinds, net.prm, net.kd_on, net.kd_off,
            sc.mu, sc.delta, sc.alpha, net.recv, sc.coupling_step, sc.zeno_guard, sc.stride,
            samples, net.ws, net.x1, net.xi1, ev_t, ev_src, ev_dim, ev_sign, state.spike_count, peak)
        chunks.append((ev_t[:n_ev].copy(), ev_src[:n_ev].copy(), ev_dim[:n_ev].copy(), ev_sign[:n_ev].copy()))
        if status == K.FLUSH:
            continue
        _raise_for(status, m * sc.dt, sc)
        break
    state.t = sc.n_steps * sc.dt
    spike_t, spike_agent, spike_dim, spike_sign = (np.concatenate(c) for c in zip(*chunks))
    return Trace(
        mode="neurospike", t=times, x=samples, scenario_digest=sc.digest(),
        spike_t=spike_t, spike_agent=spike_agent, spike_dim=spike_dim, spike_sign=spike_sign,
        peak_abs=peak, final_state=state,
    )


def run_continuous(scenario: Scenario) -> Trace:
    """Integrate ``x' = f(t, x) - k L x`` (coupling on from ``coupling_start``)."""
    sc = scenario
    net = _Network(sc)
    times = sc.sample_times()
    x = np.array(sc.initial_states)
    samples = np.zeros((len(times), sc.n_agents, sc.state_dim))
    samples[0] = x
    status, m = K.run_diffusive(0, sc.n_steps, sc.dt, x, net.kinds, net.prm, float(sc.k), net.lap,
                                sc.coupling_step, sc.stride, samples)
    _raise_for(status, m * sc.dt, sc)
    return Trace(mode="continuous", t=times, x=samples, scenario_digest=sc.digest(),
                 peak_abs=np.abs(samples).max(axis=0))


def run_blended(scenario: Scenario, s0: Optional[Sequence[float]] = None) -> Trace:
    """Integrate the averaged field from ``s0``; the trace has a single agent."""
    sc = scenario
    kinds, prm = pack_agents(sc.agents)
    s = np.array(sc.blended_s0 if s0 is None else s0, dtype=float).reshape(-1)
    if s.shape != (sc.state_dim,):
        raise ScenarioError(f"s0 must be a {sc.state_dim}-vector")
    times = sc.sample_times()
    samples = np.zeros((len(times), sc.state_dim))
    samples[0] = s
    status, m = K.run_blended_kernel(0, sc.n_steps, sc.dt, s, kinds, prm, sc.stride, samples)
    _raise_for(status, m * sc.dt, sc)
    x = samples[:, None, :]
    return Trace(mode="blended", t=times, x=x, scenario_digest=sc.digest(),
                 peak_abs=np.abs(x).max(axis=0))
