"""Integrate-and-fire neurons and the two-neuron spiking amplifier.

A neuron integrates ``d(xi)/dt = -mu*xi + ReLU(input)`` and fires when its
potential reaches the threshold, after which the potential resets to 0.
Two such neurons, one fed ``u`` and one fed ``-u``, form an amplifier whose
signed spike train (each spike carrying amplitude ``alpha``) tracks
``(alpha/threshold) * u`` in the integral sense.

The functions here assume the input is held constant over each step, which
makes every crossing time exact.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Iterable, Optional


@dataclass(frozen=True)
class NeuronState:
    potential: float
    threshold: float
    leakage: float = 0.0

    def __post_init__(self):
        if not self.threshold > 0:
            raise ValueError(f"threshold must be positive, got {self.threshold}")
        if self.leakage < 0:
            raise ValueError(f"leakage must be nonnegative, got {self.leakage}")
        if self.potential < 0:
            raise ValueError(f"potential must be nonnegative, got {self.potential}")


@dataclass(frozen=True)
class SpikeEvent:
    """One transmitted bit: who fired, in which state coordinate, and the sign.

    ``source`` and ``dimension`` are 1-based.
    """

    time: float
    source: int
    dimension: int
    sign: int


def _relu(v: float) -> float:
    return v if v > 0.0 else 0.0


def flow_neuron(s: NeuronState, input_value: float, dt: float) -> NeuronState:
    """Advance the potential over ``dt`` with the input held at ``input_value``.

    The result may exceed the threshold; firing is left to ``jump_neuron``.
    """
    if dt < 0:
        raise ValueError(f"dt must be nonnegative, got {dt}")
    drive = _relu(input_value)
    mu = s.leakage
    if mu == 0.0:
        xi = s.potential + drive * dt
    else:
        decay = math.exp(-mu * dt)
        xi = s.potential * decay - drive / mu * math.expm1(-mu * dt)
    return replace(s, potential=xi)


def crossing_time(
    xi_start: float,
    input_value: float,
    mu: float,
    delta: float,
    horizon: float = math.inf,
) -> Optional[float]:
    """Time until the potential reaches ``delta`` under constant input.

    Returns None when the threshold is never reached, or not within
    ``horizon``.
    """
    if not 0.0 <= xi_start < delta:
        raise ValueError(f"xi_start={xi_start} must lie in [0, {delta})")
    drive = _relu(input_value)
    if drive == 0.0:
        return None
    if mu == 0.0:
        tau = (delta - xi_start) / drive
    else:
        steady = drive / mu
        if steady <= delta:
            return None
        tau = math.log((steady - xi_start) / (steady - delta)) / mu
    return tau if tau <= horizon else None


def jump_neuron(s: NeuronState) -> NeuronState:
    if s.potential < s.threshold:
        raise ValueError(f"cannot fire below threshold ({s.potential} < {s.threshold})")
    return replace(s, potential=0.0)


def amp_gain(alpha: float, delta: float) -> float:
    if not (alpha > 0 and delta > 0):
        raise ValueError(f"alpha and delta must be positive, got {alpha}, {delta}")
    return alpha / delta


def integrated_output(spikes: Iterable[SpikeEvent], t: float, alpha: float) -> float:
    """Integral of the amplifier output up to and including time ``t``."""
    net = 0
    for ev in spikes:
        if ev.time > t:
            break
        net += ev.sign
    return alpha * net


@dataclass(frozen=True)
class NmAmp:
    positive_neuron: NeuronState
    negative_neuron: NeuronState
    amplitude: float

    def __post_init__(self):
        a, b = self.positive_neuron, self.negative_neuron
        if a.threshold != b.threshold or a.leakage != b.leakage:
            raise ValueError("both neurons must share threshold and leakage")
        if not self.amplitude > 0:
            raise ValueError(f"amplitude must be positive, got {self.amplitude}")
        for n in (a, b):
            if n.potential >= n.threshold:
                raise ValueError("initial potentials must be below threshold")

    @classmethod
    def create(cls, alpha: float, delta: float, mu: float = 0.0,
               xi_pos: float = 0.0, xi_neg: float = 0.0) -> "NmAmp":
        return cls(NeuronState(xi_pos, delta, mu), NeuronState(xi_neg, delta, mu), alpha)

    @property
    def threshold(self) -> float:
        return self.positive_neuron.threshold

    @property
    def gain(self) -> float:
        return amp_gain(self.amplitude, self.threshold)

    def advance(self, u: float, dt: float, t0: float = 0.0) -> tuple["NmAmp", list[tuple[float, int]]]:
        """Feed a constant input ``u`` for ``dt``; return the new amp and its spikes.

        Spikes are ``(time, sign)`` pairs.  Only one neuron is driven for a
        given sign of ``u``, so at most one of the two ever fires here.
        """
        spikes: list[tuple[float, int]] = []
        neurons = []
        for neuron, drive, sign in ((self.positive_neuron, u, 1), (self.negative_neuron, -u, -1)):
            elapsed = 0.0
            while True:
                tau = crossing_time(neuron.potential, drive, neuron.leakage, neuron.threshold,
                                    horizon=dt - elapsed)
                if tau is None:
                    neuron = flow_neuron(neuron, drive, dt - elapsed)
                    if neuron.potential >= neuron.threshold:
                        # rounding put the crossing on the step boundary
                        neuron = replace(neuron, potential=0.0)
                        spikes.append((t0 + dt, sign))
                    break
                elapsed += tau
                neuron = replace(neuron, potential=0.0)
                spikes.append((t0 + elapsed, sign))
            neurons.append(neuron)
        spikes.sort()
        return replace(self, positive_neuron=neurons[0], negative_neuron=neurons[1]), spikes
