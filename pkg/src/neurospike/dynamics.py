"""Agent vector fields and their blended (averaged) field.

Each agent kind packs itself into a flat parameter vector so the compiled
simulation kernels can evaluate it; ``eval_field`` is the pure-Python
reference used everywhere else.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import ClassVar, Sequence

import numpy as np

KIND_SIGN = 0
KIND_HARMONIC = 1
KIND_VDP = 2
KIND_LINEAR = 3


class AgentSpec:
    """Base class for agent vector fields ``f_i(t, x_i)``."""

    kind: ClassVar[str]
    kind_code: ClassVar[int]
    # False for kinds outside the globally Lipschitz class
    lipschitz: ClassVar[bool] = True

    @property
    def state_dim(self) -> int:
        raise NotImplementedError

    def packed(self) -> np.ndarray:
        raise NotImplementedError

    def config_items(self) -> dict[str, str]:
        raise NotImplementedError


@dataclass(frozen=True)
class SignTracker(AgentSpec):
    """``f(x) = sgn(c - x)`` with ``sgn(0) = 0``; discontinuous at ``x = c``."""

    c: float
    kind: ClassVar[str] = "sign_tracker"
    kind_code: ClassVar[int] = KIND_SIGN
    lipschitz: ClassVar[bool] = False

    @property
    def state_dim(self) -> int:
        return 1

    def packed(self):
        return np.array([self.c], dtype=float)

    def config_items(self):
        return {"c": repr(float(self.c))}


@dataclass(frozen=True)
class Harmonic(AgentSpec):
    """``f(x) = (a1*x2, -a2*x1)``."""

    a1: float
    a2: float
    kind: ClassVar[str] = "harmonic"
    kind_code: ClassVar[int] = KIND_HARMONIC

    @property
    def state_dim(self) -> int:
        return 2

    def packed(self):
        return np.array([self.a1, self.a2], dtype=float)

    def config_items(self):
        return {"a1": repr(float(self.a1)), "a2": repr(float(self.a2))}


@dataclass(frozen=True)
class VanDerPolSource(AgentSpec):
    """Nonlinear energy source ``f(x) = (0, nu*(1 - x1**2)*x2)``.

    Only locally Lipschitz; with ``|x1| < 1`` and no coupling the second
    coordinate grows exponentially.
    """

    nu: float = 5.0
    kind: ClassVar[str] = "vdp_source"
    kind_code: ClassVar[int] = KIND_VDP
    lipschitz: ClassVar[bool] = False

    def __post_init__(self):
        if not self.nu > 0:
            raise ValueError(f"nu must be positive, got {self.nu}")

    @property
    def state_dim(self) -> int:
        return 2

    def packed(self):
        return np.array([self.nu], dtype=float)

    def config_items(self):
        return {"nu": repr(float(self.nu))}


@dataclass(frozen=True)
class LinearAffine(AgentSpec):
    """``f(x) = A x + b``."""

    A: tuple[tuple[float, ...], ...]
    b: tuple[float, ...]
    kind: ClassVar[str] = "linear"
    kind_code: ClassVar[int] = KIND_LINEAR

    def __post_init__(self):
        n = len(self.b)
        if n == 0 or len(self.A) != n or any(len(row) != n for row in self.A):
            raise ValueError("A must be n x n and b length n")

    @classmethod
    def from_arrays(cls, A, b) -> "LinearAffine":
        A = np.atleast_2d(np.asarray(A, dtype=float))
        b = np.atleast_1d(np.asarray(b, dtype=float))
        return cls(tuple(tuple(float(v) for v in row) for row in A), tuple(float(v) for v in b))

    @property
    def state_dim(self) -> int:
        return len(self.b)

    @property
    def matrix(self) -> np.ndarray:
        return np.array(self.A, dtype=float)

    def packed(self):
        return np.concatenate([self.matrix.ravel(), np.array(self.b, dtype=float)])

    def config_items(self):
        return {
            "A": "; ".join(" ".join(repr(v) for v in row) for row in self.A),
            "b": " ".join(repr(v) for v in self.b),
        }


KINDS: dict[str, type[AgentSpec]] = {
    cls.kind: cls for cls in (SignTracker, Harmonic, VanDerPolSource, LinearAffine)
}


def eval_field_batch(spec: AgentSpec, t: float, X) -> np.ndarray:
    """``eval_field`` over the rows of an (m, n) array of points."""
    X = np.asarray(X, dtype=float).reshape(-1, spec.state_dim)
    if isinstance(spec, SignTracker):
        return np.sign(spec.c - X)
    if isinstance(spec, Harmonic):
        return np.stack([spec.a1 * X[:, 1], -spec.a2 * X[:, 0]], axis=1)
    if isinstance(spec, VanDerPolSource):
        return np.stack([np.zeros(len(X)), spec.nu * (1.0 - X[:, 0] ** 2) * X[:, 1]], axis=1)
    if isinstance(spec, LinearAffine):
        return X @ spec.matrix.T + np.array(spec.b)
    raise TypeError(f"unknown agent kind {type(spec).__name__}")


def _sgn(v: float) -> float:
    return 1.0 if v > 0 else (-1.0 if v < 0 else 0.0)


def eval_field(spec: AgentSpec, t: float, x) -> np.ndarray:
    x = np.atleast_1d(np.asarray(x, dtype=float))
    if x.shape != (spec.state_dim,):
        raise ValueError(f"{spec.kind} expects a {spec.state_dim}-vector, got shape {x.shape}")
    if isinstance(spec, SignTracker):
        return np.array([_sgn(spec.c - x[0])])
    if isinstance(spec, Harmonic):
        return np.array([spec.a1 * x[1], -spec.a2 * x[0]])
    if isinstance(spec, VanDerPolSource):
        return np.array([0.0, spec.nu * (1.0 - x[0] * x[0]) * x[1]])
    if isinstance(spec, LinearAffine):
        return spec.matrix @ x + np.array(spec.b)
    raise TypeError(f"unknown agent kind {type(spec).__name__}")


@dataclass(frozen=True)
class BlendedField:
    agent_specs: tuple[AgentSpec, ...]

    def __post_init__(self):
        if not self.agent_specs:
            raise ValueError("blended field needs at least one agent")
        dims = {s.state_dim for s in self.agent_specs}
        if len(dims) != 1:
            raise ValueError(f"agents disagree on state dimension: {sorted(dims)}")

    @property
    def state_dim(self) -> int:
        return self.agent_specs[0].state_dim

    def __call__(self, t, s):
        return blended_eval(self, t, s)


def blended_eval(bf: BlendedField, t: float, s) -> np.ndarray:
    """Arithmetic mean of every agent's field evaluated at the same point."""
    total = np.zeros(bf.state_dim)
    for spec in bf.agent_specs:
        total += eval_field(spec, t, s)
    return total / len(bf.agent_specs)


def lipschitz_probe(
    spec: AgentSpec,
    region: tuple[Sequence[float], Sequence[float]],
    samples: int = 1000,
    seed: int = 0,
) -> float:
    """Largest sampled ratio ``|f(x) - f(y)| / |x - y|`` over a box.

    An empirical lower estimate of the Lipschitz constant; for kinds with
    ``lipschitz = False`` the number grows without bound as pairs straddle
    the discontinuity or the box widens.
    """
    lo = np.asarray(region[0], dtype=float).reshape(-1)
    hi = np.asarray(region[1], dtype=float).reshape(-1)
    if lo.shape != (spec.state_dim,) or hi.shape != lo.shape or np.any(hi < lo):
        raise ValueError("region must be a nonempty box matching the state dimension")
    rng = np.random.default_rng(seed)
    x = rng.uniform(lo, hi, size=(samples, len(lo)))
    y = rng.uniform(lo, hi, size=(samples, len(lo)))
    dist = np.linalg.norm(x - y, axis=1)
    ok = dist > 0
    if not ok.any():
        return 0.0
    num = np.linalg.norm(eval_field_batch(spec, 0.0, x) - eval_field_batch(spec, 0.0, y), axis=1)
    return float((num[ok] / dist[ok]).max())


def pack_agents(specs: Sequence[AgentSpec]) -> tuple[np.ndarray, np.ndarray]:
    """Kind codes and a zero-padded parameter table for the compiled kernels."""
    rows = [s.packed() for s in specs]
    width = max(len(r) for r in rows)
    table = np.zeros((len(rows), width))
    for i, r in enumerate(rows):
        table[i, : len(r)] = r
    kinds = np.array([s.kind_code for s in specs], dtype=np.int64)
    return kinds, table
