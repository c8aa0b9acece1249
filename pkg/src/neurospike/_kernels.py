"""Compiled inner loops for the three solvers.

Everything here works on plain arrays: ``x`` is (N, n), ``xi`` is
(N, n, 2) with the last axis (positive neuron, negative neuron), and
``recv`` is the adjacency matrix (rows receivers, columns senders).
"""
import numpy as np
from numba import njit

DONE = 0
FLUSH = 1
ZENO = 2
DIVERGED = 3

# |x| beyond this is treated as divergence
BLOWUP = 1e12
_BISECT_ITERS = 60


@njit(cache=True)
def agent_field(kind, prm, t, x, out):
    n = x.shape[0]
    if kind == 0:
        d = prm[0] - x[0]
        if d > 0.0:
            out[0] = 1.0
        elif d < 0.0:
            out[0] = -1.0
        else:
            out[0] = 0.0
    elif kind == 1:
        out[0] = prm[0] * x[1]
        out[1] = -prm[1] * x[0]
    elif kind == 2:
        out[0] = 0.0
        out[1] = prm[0] * (1.0 - x[0] * x[0]) * x[1]
    else:
        for r in range(n):
            acc = 0.0
            for c in range(n):
                acc += prm[r * n + c] * x[c]
            out[r] = acc + prm[n * n + r]


# ---------------------------------------------------------------- neuro-spike


@njit(cache=True)
def _spike_rhs(t, x, xi, kinds, prm, kd, mu, dx, dxi):
    N, n = x.shape
    for i in range(N):
        agent_field(kinds[i], prm[i], t, x[i], dx[i])
        for d in range(n):
            v = x[i, d]
            dx[i, d] -= kd[i] * v
            dxi[i, d, 0] = (v if v > 0.0 else 0.0) - mu * xi[i, d, 0]
            dxi[i, d, 1] = (-v if v < 0.0 else 0.0) - mu * xi[i, d, 1]


@njit(cache=True)
def spike_rk4(t, h, x, xi, kinds, prm, kd, mu, x_out, xi_out, ws):
    """One classical RK4 step of the joint (x, xi) flow; no firing."""
    kx1, kx2, kx3, kx4, xt, kq1, kq2, kq3, kq4, qt = ws
    _spike_rhs(t, x, xi, kinds, prm, kd, mu, kx1, kq1)
    xt[:] = x + 0.5 * h * kx1
    qt[:] = xi + 0.5 * h * kq1
    _spike_rhs(t + 0.5 * h, xt, qt, kinds, prm, kd, mu, kx2, kq2)
    xt[:] = x + 0.5 * h * kx2
    qt[:] = xi + 0.5 * h * kq2
    _spike_rhs(t + 0.5 * h, xt, qt, kinds, prm, kd, mu, kx3, kq3)
    xt[:] = x + h * kx3
    qt[:] = xi + h * kq3
    _spike_rhs(t + h, xt, qt, kinds, prm, kd, mu, kx4, kq4)
    x_out[:] = x + (h / 6.0) * (kx1 + 2.0 * kx2 + 2.0 * kx3 + kx4)
    xi_out[:] = xi + (h / 6.0) * (kq1 + 2.0 * kq2 + 2.0 * kq3 + kq4)


def make_workspace(N, n):
    shapes = [(N, n)] * 5 + [(N, n, 2)] * 5
    return tuple(np.zeros(s) for s in shapes)


@njit(cache=True)
def _hermite_crossing(y0, m0, y1, m1, H, level):
    """First time in (0, H] where the cubic Hermite interpolant reaches ``level``.

    Requires y0 < level <= y1.  Bisection keeps the invariant
    p(lo) < level <= p(hi) and returns ``hi``.
    """
    lo = 0.0
    hi = 1.0
    for _ in range(_BISECT_ITERS):
        s = 0.5 * (lo + hi)
        s2 = s * s
        s3 = s2 * s
        p = ((2.0 * s3 - 3.0 * s2 + 1.0) * y0 + (s3 - 2.0 * s2 + s) * H * m0
             + (-2.0 * s3 + 3.0 * s2) * y1 + (s3 - s2) * H * m1)
        if p >= level:
            hi = s
        else:
            lo = s
    return hi * H


@njit(cache=True)
def advance_window(t0, h, x, xi, kinds, prm, kd, mu, delta, alpha, recv, deliver,
                   guard, ws, x1, xi1, ev_t, ev_src, ev_dim, ev_sign, n_ev,
                   counts, peak):
    """Advance (x, xi) over [t0, t0 + h] in place, firing every threshold crossing.

    Returns (status, n_ev).  Crossings are localized on the Hermite
    interpolant of each potential over the current sub-step; the state is
    then re-integrated up to the earliest crossing, every neuron at or above
    threshold fires in (agent, dim, positive-first) order, and the rest of the
    window is flowed from the post-jump state.
    """
    N, n = x.shape
    elapsed = 0.0
    jumps = 0
    while elapsed < h:
        rem = h - elapsed
        t = t0 + elapsed
        spike_rk4(t, rem, x, xi, kinds, prm, kd, mu, x1, xi1, ws)
        best = np.inf
        bi = -1
        bd = -1
        bl = -1
        for i in range(N):
            for d in range(n):
                for l in range(2):
                    if xi1[i, d, l] >= delta:
                        v0 = x[i, d] if l == 0 else -x[i, d]
                        v1 = x1[i, d] if l == 0 else -x1[i, d]
                        m0 = (v0 if v0 > 0.0 else 0.0) - mu * xi[i, d, l]
                        m1 = (v1 if v1 > 0.0 else 0.0) - mu * xi1[i, d, l]
                        tau = _hermite_crossing(xi[i, d, l], m0, xi1[i, d, l], m1, rem, delta)
                        if tau < best:
                            best = tau
                            bi = i
                            bd = d
                            bl = l
        if bi < 0:
            x[:] = x1
            xi[:] = xi1
            elapsed = h
        else:
            if best < rem:
                spike_rk4(t, best, x, xi, kinds, prm, kd, mu, x1, xi1, ws)
                elapsed += best
            else:
                elapsed = h
            x[:] = x1
            xi[:] = xi1
            t_ev = t0 + elapsed
            for i in range(N):
                for d in range(n):
                    for l in range(2):
                        if xi[i, d, l] >= delta or (i == bi and d == bd and l == bl):
                            xi[i, d, l] = 0.0
                            jumps += 1
                            if jumps > guard:
                                return ZENO, n_ev
                            sign = 1.0 if l == 0 else -1.0
                            ev_t[n_ev] = t_ev
                            ev_src[n_ev] = i
                            ev_dim[n_ev] = d
                            ev_sign[n_ev] = 1 if l == 0 else -1
                            n_ev += 1
                            counts[i, d, l] += 1
                            if deliver:
                                for j in range(N):
                                    if recv[j, i] != 0:
                                        x[j, d] += alpha * sign
        for i in range(N):
            for d in range(n):
                v = abs(x[i, d])
                if not v < BLOWUP:
                    return DIVERGED, n_ev
                if v > peak[i, d]:
                    peak[i, d] = v
    return DONE, n_ev


@njit(cache=True)
def run_spiking(m_start, m_end, dt, x, xi, kinds, prm, kd_on, kd_off, mu, delta, alpha,
                recv, coupling_step, guard, stride, samples, ws, x1, xi1,
                ev_t, ev_src, ev_dim, ev_sign, counts, peak):
    """Run base steps [m_start, m_end); returns (status, next step, events written).

    Stops early with FLUSH when the event buffers might not fit another
    step's worth of jumps; the caller drains them and resumes.
    """
    cap = ev_t.shape[0]
    n_ev = 0
    for m in range(m_start, m_end):
        if n_ev + guard + 1 > cap:
            return FLUSH, m, n_ev
        coupled = m >= coupling_step
        kd = kd_on if coupled else kd_off
        status, n_ev = advance_window(m * dt, dt, x, xi, kinds, prm, kd, mu, delta, alpha,
                                      recv, coupled, guard, ws, x1, xi1,
                                      ev_t, ev_src, ev_dim, ev_sign, n_ev, counts, peak)
        if status != DONE:
            return status, m, n_ev
        if (m + 1) % stride == 0:
            samples[(m + 1) // stride] = x
    return DONE, m_end, n_ev


# ---------------------------------------------------------------- continuous


@njit(cache=True)
def _diffusive_rhs(t, x, kinds, prm, k, lap, dx):
    N, n = x.shape
    for i in range(N):
        agent_field(kinds[i], prm[i], t, x[i], dx[i])
        for j in range(N):
            if lap[i, j] != 0.0:
                for d in range(n):
                    dx[i, d] -= k * lap[i, j] * x[j, d]


@njit(cache=True)
def run_diffusive(m_start, m_end, dt, x, kinds, prm, k, lap, coupling_step, stride, samples):
    k1 = np.empty_like(x)
    k2 = np.empty_like(x)
    k3 = np.empty_like(x)
    k4 = np.empty_like(x)
    xt = np.empty_like(x)
    for m in range(m_start, m_end):
        kk = k if m >= coupling_step else 0.0
        t = m * dt
        _diffusive_rhs(t, x, kinds, prm, kk, lap, k1)
        xt[:] = x + 0.5 * dt * k1
        _diffusive_rhs(t + 0.5 * dt, xt, kinds, prm, kk, lap, k2)
        xt[:] = x + 0.5 * dt * k2
        _diffusive_rhs(t + 0.5 * dt, xt, kinds, prm, kk, lap, k3)
        xt[:] = x + dt * k3
        _diffusive_rhs(t + dt, xt, kinds, prm, kk, lap, k4)
        x += (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        for v in x.ravel():
            if not abs(v) < BLOWUP:
                return DIVERGED, m
        if (m + 1) % stride == 0:
            samples[(m + 1) // stride] = x
    return DONE, m_end


# ---------------------------------------------------------------- blended


@njit(cache=True)
def _blended_rhs(t, s, kinds, prm, tmp, out):
    out[:] = 0.0
    N = kinds.shape[0]
    for i in range(N):
        agent_field(kinds[i], prm[i], t, s, tmp)
        out += tmp
    out /= N


@njit(cache=True)
def run_blended_kernel(m_start, m_end, dt, s, kinds, prm, stride, samples):
    tmp = np.empty_like(s)
    k1 = np.empty_like(s)
    k2 = np.empty_like(s)
    k3 = np.empty_like(s)
    k4 = np.empty_like(s)
    st = np.empty_like(s)
    for m in range(m_start, m_end):
        t = m * dt
        _blended_rhs(t, s, kinds, prm, tmp, k1)
        st[:] = s + 0.5 * dt * k1
        _blended_rhs(t + 0.5 * dt, st, kinds, prm, tmp, k2)
        st[:] = s + 0.5 * dt * k2
        _blended_rhs(t + 0.5 * dt, st, kinds, prm, tmp, k3)
        st[:] = s + dt * k3
        _blended_rhs(t + dt, st, kinds, prm, tmp, k4)
        s += (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        for v in s:
            if not abs(v) < BLOWUP:
                return DIVERGED, m
        if (m + 1) % stride == 0:
            samples[(m + 1) // stride] = s
    return DONE, m_end
