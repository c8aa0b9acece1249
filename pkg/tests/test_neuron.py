import math

import pytest
from hypothesis import given, strategies as st

from neurospike.neuron import (
    NeuronState,
    NmAmp,
    SpikeEvent,
    amp_gain,
    crossing_time,
    flow_neuron,
    integrated_output,
    jump_neuron,
)


def test_flow_pure_integration():
    s = flow_neuron(NeuronState(0.0, 0.01), 1.0, 0.004)
    assert s.potential == pytest.approx(0.004, abs=1e-15)


def test_flow_overshoot_is_left_pending():
    s = flow_neuron(NeuronState(0.009, 0.01), 1.0, 0.002)
    assert s.potential == pytest.approx(0.011, abs=1e-15)
    assert s.potential >= s.threshold


def test_flow_relu_clips_negative_input():
    delta = 0.37
    assert flow_neuron(NeuronState(0.5 * delta, delta), -3.0, 1.0).potential == 0.5 * delta


def test_flow_with_leakage_matches_closed_form():
    s = flow_neuron(NeuronState(0.2, 1.0, leakage=2.0), 1.5, 0.3)
    expect = 0.2 * math.exp(-0.6) + 0.75 * (1 - math.exp(-0.6))
    assert s.potential == pytest.approx(expect, rel=1e-14)


def test_flow_rejects_negative_dt():
    with pytest.raises(ValueError):
        flow_neuron(NeuronState(0.0, 1.0), 1.0, -0.1)


@pytest.mark.parametrize("xi, u, expect", [(0.0, 1.0, 0.01), (0.005, 2.0, 0.0025)])
def test_crossing_time_ramp(xi, u, expect):
    assert crossing_time(xi, u, 0.0, 0.01) == pytest.approx(expect, rel=1e-12)


def test_crossing_time_without_drive():
    assert crossing_time(0.0, 0.0, 0.0, 0.01) is None
    assert crossing_time(0.0, -5.0, 0.0, 0.01) is None


def test_crossing_time_leaky_saturation():
    # steady state u/mu = 0.5 never reaches 1
    assert crossing_time(0.0, 1.0, 2.0, 1.0) is None
    tau = crossing_time(0.0, 4.0, 2.0, 1.0)
    assert tau == pytest.approx(math.log(2.0) / 2.0, rel=1e-14)


def test_crossing_time_horizon():
    assert crossing_time(0.0, 1.0, 0.0, 0.01, horizon=0.005) is None


def test_crossing_time_rejects_potential_at_threshold():
    with pytest.raises(ValueError):
        crossing_time(0.01, 1.0, 0.0, 0.01)


@pytest.mark.parametrize("xi", [0.01, 0.013])
def test_jump_resets(xi):
    assert jump_neuron(NeuronState(xi, 0.01)).potential == 0.0


def test_jump_below_threshold_is_error():
    with pytest.raises(ValueError):
        jump_neuron(NeuronState(0.005, 0.01))


@pytest.mark.parametrize("alpha, delta, k", [(0.15, 0.01, 15), (0.075, 0.003, 25), (1, 1, 1)])
def test_amp_gain(alpha, delta, k):
    assert amp_gain(alpha, delta) == pytest.approx(k, rel=1e-12)


def _events(signs, times=None):
    times = times or [0.01 * (j + 1) for j in range(len(signs))]
    return [SpikeEvent(t, 1, 1, s) for t, s in zip(times, signs)]


def test_integrated_output_counting():
    assert integrated_output(_events([1, 1, 1]), 1.0, 0.15) == pytest.approx(0.45)
    assert integrated_output(_events([1, -1, 1, -1]), 1.0, 0.15) == 0.0


def test_integrated_output_constant_input():
    amp = NmAmp.create(alpha=0.15, delta=0.01)
    amp, spikes = amp.advance(1.0, 0.095)
    events = [SpikeEvent(t, 1, 1, s) for t, s in spikes]
    assert len(events) == 9
    assert integrated_output(events, 0.095, 0.15) == pytest.approx(1.35, rel=1e-12)


@given(st.floats(0.01, 100.0), st.floats(1e-3, 1.0))
def test_constant_input_period(c, delta):
    amp = NmAmp.create(alpha=1.0, delta=delta)
    _, spikes = amp.advance(c, 20 * delta / c + 1e-9 * delta / c)
    times = [t for t, _ in spikes]
    assert len(times) == 20
    for j, t in enumerate(times):
        assert t == pytest.approx((j + 1) * delta / c, rel=1e-9)


segments = st.lists(st.tuples(st.floats(-50.0, 50.0), st.floats(1e-4, 0.2)), min_size=1, max_size=40)


@given(segments, st.floats(0.0, 0.999), st.floats(0.0, 0.999), st.floats(0.01, 1.0), st.floats(1e-3, 1.0))
def test_integrated_amplification_error_bound(segs, f_pos, f_neg, alpha, delta):
    """|alpha*(net spikes) - (alpha/delta)*integral(u)| <= 2 alpha at every event and segment end."""
    amp = NmAmp.create(alpha, delta, xi_pos=f_pos * delta, xi_neg=f_neg * delta)
    gain = alpha / delta
    t, net, integral = 0.0, 0, 0.0
    worst = 0.0
    for u, dt in segs:
        amp, spikes = amp.advance(u, dt, t)
        for ts, sign in spikes:
            at = integral + u * (ts - t)
            worst = max(worst, abs(alpha * net - gain * at))  # just before the jump
            net += sign
            worst = max(worst, abs(alpha * net - gain * at))
        integral += u * dt
        t += dt
        worst = max(worst, abs(alpha * net - gain * integral))
    assert worst <= 2 * alpha * (1 + 1e-9)


@given(st.lists(st.tuples(st.floats(0.0, 50.0), st.floats(1e-4, 0.2)), min_size=1, max_size=30),
       st.floats(0.0, 0.999))
def test_nonnegative_input_never_drives_negative_neuron(segs, f_neg):
    delta = 0.05
    amp = NmAmp.create(0.1, delta, xi_neg=f_neg * delta)
    t = 0.0
    for u, dt in segs:
        amp, spikes = amp.advance(u, dt, t)
        t += dt
        assert all(sign == 1 for _, sign in spikes)
    assert amp.negative_neuron.potential == f_neg * delta


def test_amp_rejects_potential_at_threshold():
    with pytest.raises(ValueError):
        NmAmp.create(0.1, 0.01, xi_pos=0.01)
