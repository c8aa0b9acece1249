"""Post-run metrics and checks of the quantitative bounds.

Covers synchronization error against the blended reference, spike and
bandwidth statistics, the amplifier integral-error bound, the dwell-time
floor, phase-plane orbit distance, and a sampler for the quadratic bounding
lemma used in the convergence argument.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.spatial import cKDTree

from .dynamics import eval_field_batch
from .graph import spectral
from .simulator import Scenario, Trace


def _window_mask(trace: Trace, window) -> np.ndarray:
    t_a, t_b = window
    if t_a > t_b:
        raise ValueError(f"empty window {window}")
    tol = 1e-9 * max(1.0, abs(t_b))
    if t_a < trace.t[0] - tol or t_b > trace.t[-1] + tol:
        raise ValueError(f"window {window} outside trace domain [{trace.t[0]}, {trace.t[-1]}]")
    mask = (trace.t >= t_a - tol) & (trace.t <= t_b + tol)
    if not mask.any():
        raise ValueError(f"no samples in window {window}")
    return mask


# ---------------------------------------------------------------- sync error


@dataclass
class SyncReport:
    t: np.ndarray
    per_agent_error: np.ndarray  # (samples, N)
    tail_sup: np.ndarray  # (N,)
    window: tuple[float, float]

    @property
    def worst(self) -> float:
        return float(self.tail_sup.max())


def sync_error(trace: Trace, reference: Trace, window) -> SyncReport:
    """Distance of every agent to a single reference trajectory over ``window``."""
    m1 = _window_mask(trace, window)
    m2 = _window_mask(reference, window)
    t1, t2 = trace.t[m1], reference.t[m2]
    if t1.shape != t2.shape or not np.allclose(t1, t2, rtol=0, atol=1e-9):
        raise ValueError("traces do not share a sample grid over the window")
    x = trace.x[m1]
    ref = reference.x[m2]
    if ref.shape[1] != 1:
        if ref.shape[1] != x.shape[1]:
            raise ValueError("reference must have one agent or as many agents as the trace")
    err = np.linalg.norm(x - ref, axis=2)
    return SyncReport(t=t1, per_agent_error=err, tail_sup=err.max(axis=0), window=tuple(window))


def max_pairwise_distance(trace: Trace, window) -> float:
    x = trace.x[_window_mask(trace, window)]
    N = x.shape[1]
    best = 0.0
    for i in range(N):
        for j in range(i + 1, N):
            best = max(best, float(np.linalg.norm(x[:, i] - x[:, j], axis=1).max()))
    return best


# ---------------------------------------------------------------- spikes


@dataclass
class SpikeStats:
    total_spikes: int
    per_agent_counts: np.ndarray
    per_agent_rate: np.ndarray  # whole-run average, spikes/s
    payload_rate: np.ndarray  # bits/s; one bit per spike
    steady_rate: np.ndarray  # observed over the steady window
    predicted_rate: np.ndarray  # sum over coordinates of mean|x|/delta, steady window
    steady_window: tuple[float, float]

    @property
    def mean_rate(self) -> float:
        return float(self.per_agent_rate.mean())


def spike_statistics(trace: Trace, scenario: Scenario, steady_window=None) -> SpikeStats:
    """Counts and rates; the steady window defaults to the final third of the run."""
    duration = float(trace.t[-1] - trace.t[0])
    if duration <= 0:
        raise ValueError("trace has no duration")
    if steady_window is None:
        steady_window = (trace.t[-1] - duration / 3.0, float(trace.t[-1]))
    t_a, t_b = steady_window
    if not t_b > t_a:
        raise ValueError(f"empty steady window {steady_window}")
    mask = _window_mask(trace, steady_window)
    N = trace.x.shape[1]
    counts = np.bincount(trace.spike_agent, minlength=N)
    in_win = (trace.spike_t >= t_a) & (trace.spike_t <= t_b)
    steady_counts = np.bincount(trace.spike_agent[in_win], minlength=N)
    rate = counts / duration
    predicted = np.abs(trace.x[mask]).mean(axis=0).sum(axis=1) / scenario.delta
    return SpikeStats(
        total_spikes=int(trace.n_spikes),
        per_agent_counts=counts,
        per_agent_rate=rate,
        payload_rate=rate.copy(),
        steady_rate=steady_counts / (t_b - t_a),
        predicted_rate=predicted,
        steady_window=(float(t_a), float(t_b)),
    )


# ---------------------------------------------------------------- amplifier bound


@dataclass
class AmpBoundReport:
    max_abs: np.ndarray  # (N, n) max over samples of |alpha*net_spikes - k*integral(x)|
    bound: float  # 2*alpha
    slack: np.ndarray  # (N, n) quadrature allowance k * sample_spacing * max|flow|
    passed: bool

    @property
    def margin(self) -> np.ndarray:
        return self.bound + self.slack - self.max_abs


def _flow_speed(trace: Trace, sc: Scenario) -> np.ndarray:
    """max over samples of |f_i(x) - k d_i x| per agent and coordinate."""
    deg = spectral(sc.graph).degree.diagonal()
    N, n = trace.x.shape[1:]
    out = np.zeros((N, n))
    coupled = trace.t >= sc.coupling_start - 1e-9 * sc.dt
    for i, spec in enumerate(sc.agents):
        xs = trace.x[:, i, :]
        f = eval_field_batch(spec, 0.0, xs)
        drift = np.where(coupled[:, None], f - sc.k * deg[i] * xs, f)
        out[i] = np.abs(drift).max(axis=0)
    return out


def amp_error_series(trace: Trace, scenario: Scenario, agent: int, dim: int) -> np.ndarray:
    """Integrated amplification error on the sample grid for one amplifier (0-based).

    ``alpha * (net signed spikes up to t) - (alpha/delta) * integral_0^t x``,
    the integral by the trapezoidal rule on the samples.
    """
    x = trace.x[:, agent, dim]
    dt = np.diff(trace.t)
    integral = np.concatenate([[0.0], np.cumsum(0.5 * dt * (x[1:] + x[:-1]))])
    times, signs = trace.amp_spikes(agent, dim)
    net = np.cumsum(signs)
    idx = np.searchsorted(times, trace.t, side="right")
    spiked = np.where(idx > 0, net[np.maximum(idx - 1, 0)] if len(net) else 0, 0)
    return scenario.alpha * spiked - scenario.k * integral


def verify_amp_bound(trace: Trace, scenario: Scenario) -> AmpBoundReport:
    """Check ``|integral of (spike output - k*x)| <= 2*alpha`` for every amplifier.

    The exact integral between samples is not kept, so each amplifier gets a
    quadrature allowance of ``k * h * max|x'|`` with ``h`` the sample spacing
    and ``max|x'|`` the largest flow speed seen on the samples.
    """
    if scenario.mu != 0:
        raise ValueError("the integral bound is only claimed for mu = 0")
    if trace.mode != "neurospike":
        raise ValueError("amplifier bound needs a neuro-spike trace")
    N, n = trace.x.shape[1:]
    max_abs = np.zeros((N, n))
    for i in range(N):
        for d in range(n):
            max_abs[i, d] = np.abs(amp_error_series(trace, scenario, i, d)).max()
    h = float(np.diff(trace.t).max()) if len(trace.t) > 1 else 0.0
    slack = scenario.k * h * _flow_speed(trace, scenario)
    bound = 2.0 * scenario.alpha
    passed = bool(np.all(max_abs <= bound + slack))
    return AmpBoundReport(max_abs=max_abs, bound=bound, slack=slack, passed=passed)


# ---------------------------------------------------------------- dwell time


@dataclass
class DwellReport:
    min_gap: np.ndarray  # (N, n, 2); nan where fewer than two spikes
    floor: np.ndarray  # (N, n) = delta / M
    tolerance: float
    passed: bool


def min_dwell(trace: Trace, scenario: Scenario) -> DwellReport:
    """Smallest inter-spike gap of every neuron against the floor ``delta / M``.

    ``M`` is the largest ``|x|`` the engine recorded for that agent and
    coordinate.  A neuron passes when its gap is at least ``floor - dt``.
    """
    N, n = trace.x.shape[1:]
    peak = trace.peak_abs if trace.peak_abs is not None else np.abs(trace.x).max(axis=0)
    with np.errstate(divide="ignore"):
        floor = np.where(peak > 0, scenario.delta / peak, np.inf)
    gaps = np.full((N, n, 2), np.nan)
    ok = True
    for i in range(N):
        for d in range(n):
            times, signs = trace.amp_spikes(i, d)
            for l, sign in enumerate((1, -1)):
                ts = times[signs == sign]
                if len(ts) < 2:
                    continue
                gaps[i, d, l] = np.diff(ts).min()
                if gaps[i, d, l] < floor[i, d] - scenario.dt:
                    ok = False
    return DwellReport(min_gap=gaps, floor=floor, tolerance=scenario.dt, passed=ok)


# ---------------------------------------------------------------- orbit distance


def orbit_distance(trace: Trace, reference: Trace, window, agent: Optional[int] = None) -> float:
    """One-sided discrete Hausdorff distance from agents' phase points to a reference orbit.

    ``agent`` (0-based) restricts to one agent; by default the worst agent
    is reported.
    """
    if trace.x.shape[2] != 2 or reference.x.shape[2] != 2:
        raise ValueError("orbit distance needs 2-dimensional states")
    pts = reference.x[_window_mask(reference, window)].reshape(-1, 2)
    tree = cKDTree(pts)
    x = trace.x[_window_mask(trace, window)]
    agents = range(x.shape[1]) if agent is None else [agent]
    return max(float(tree.query(x[:, i, :])[0].max()) for i in agents)


def harmonic_radius(x: np.ndarray, a1: float, a2: float) -> np.ndarray:
    """Conserved radius ``sqrt(x1**2 + (a1/a2) x2**2)`` of an uncoupled harmonic agent."""
    return np.sqrt(x[..., 0] ** 2 + (a1 / a2) * x[..., 1] ** 2)


# ---------------------------------------------------------------- bounding lemma


@dataclass(frozen=True)
class LemmaParams:
    p: float
    a: float
    kappa: float
    g: float = 0.0
    h: float = 0.0
    n_x: int = 1
    n_y: int = 1

    def __post_init__(self):
        if not self.p > 0:
            raise ValueError("p must be positive")
        if self.g < 0 or self.h < 0:
            raise ValueError("g and h must be nonnegative")
        if self.n_x < 1 or self.n_y < 1:
            raise ValueError("dimensions must be positive")

    @property
    def zeta(self) -> float:
        return self.kappa - self.p / 3.0 - 3.0 * self.a ** 2 / self.p

    @property
    def admissible(self) -> bool:
        return self.zeta > 0

    def require_admissible(self):
        if not self.admissible:
            raise ValueError(
                f"kappa={self.kappa} must exceed p/3 + 3a^2/p = {self.p / 3 + 3 * self.a ** 2 / self.p}")


def rho_kappa(x, y, params: LemmaParams) -> float:
    params.require_admissible()
    nx = float(np.linalg.norm(x))
    ny = float(np.linalg.norm(y))
    p, a, k = params.p, params.a, params.kappa
    return -(p * nx * nx + 2.0 * a * nx * ny + k * ny * ny) + params.g * nx + params.h * ny


def lemma_constants(params: LemmaParams) -> tuple[float, float, float]:
    """(zeta, M_Xi, M_Upsilon) from the lemma's proof."""
    params.require_admissible()
    if params.a == 0:
        raise ValueError("a = 0 is not covered by the proof's constants")
    p, a2, z = params.p, params.a ** 2, params.zeta
    m_xi = max(2 * p * p / (9 * a2) + 1, 4 * p * p / (9 * a2))
    m_ups = max(12 * z / p, 18 * a2 / (p * p) + 1)
    return z, m_xi, m_ups


def lemma_threshold(params: LemmaParams) -> float:
    """Squared radius beyond which ``rho <= -(p/3)(|x|^2 + |y|^2)`` is guaranteed."""
    z, m_xi, m_ups = lemma_constants(params)
    return max(9 * m_xi * params.g ** 2 / params.p ** 2, params.h ** 2 * m_ups / z ** 2)


@dataclass
class LemmaCheck:
    passed: bool
    worst_margin: float  # max over samples of rho + (p/3)(|x|^2+|y|^2); must be <= 0
    n_samples: int
    threshold: float


def sample_check_lemma(params: LemmaParams, n_samples: int = 100_000, seed: int = 0) -> LemmaCheck:
    """Evaluate the lemma's inequality at random points beyond its threshold.

    Radii are drawn log-uniformly from
    ``[sqrt(thr)*(1 + 1e-6), 1e3*sqrt(thr + 1)]``, the split between ``x`` and
    ``y`` uniformly in angle, and directions uniformly on each sphere.  Points
    that round back inside the threshold are rejected and redrawn.
    """
    thr = lemma_threshold(params)
    r_lo = math.sqrt(thr) * (1 + 1e-6)
    if r_lo == 0.0:
        r_lo = 1e-6
    r_hi = 1e3 * math.sqrt(thr + 1)
    rng = np.random.default_rng(seed)
    p = params.p
    worst = -math.inf
    done = 0
    while done < n_samples:
        m = n_samples - done
        r = np.exp(rng.uniform(math.log(r_lo), math.log(r_hi), m))
        theta = rng.uniform(0.0, 0.5 * math.pi, m)
        ux = rng.standard_normal((m, params.n_x))
        uy = rng.standard_normal((m, params.n_y))
        x = ux / np.linalg.norm(ux, axis=1, keepdims=True) * (r * np.cos(theta))[:, None]
        y = uy / np.linalg.norm(uy, axis=1, keepdims=True) * (r * np.sin(theta))[:, None]
        nx = np.linalg.norm(x, axis=1)
        ny = np.linalg.norm(y, axis=1)
        sq = nx ** 2 + ny ** 2
        keep = sq > thr
        nx, ny, sq = nx[keep], ny[keep], sq[keep]
        rho = -(p * nx ** 2 + 2 * params.a * nx * ny + params.kappa * ny ** 2) + params.g * nx + params.h * ny
        margin = rho + p / 3.0 * sq
        if margin.size:
            worst = max(worst, float(margin.max()))
        done += int(keep.sum())
    return LemmaCheck(passed=worst <= 0.0, worst_margin=worst, n_samples=done, threshold=thr)
