"""Flows of circle fields and sampled circle diffeomorphisms.

Diffeomorphisms are kept as monotone lifts sampled on a uniform grid;
lifts live on the real line, so monotonicity and sup distances are
well defined and there are no branch cuts.  Flows advance every lift
sample through an adaptive Dormand-Prince integrator that steps the
whole sample batch together, which keeps repeated applications of the
same word bitwise reproducible.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Optional, Sequence

import numpy as np
from scipy.interpolate import PchipInterpolator

from .trig_fields import TrigPoly

TWO_PI = 2.0 * math.pi

DEFAULT_GRID = 256
DEFAULT_RTOL = 1e-10
DEFAULT_ATOL = 1e-12


class IntegrationError(RuntimeError):
    """Step-size underflow or a broken invariant after a flow step."""


# ---------------------------------------------------------------------------
# Dormand-Prince 5(4) with batch max-norm error control

_DP_C = (0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0)
_DP_A = (
    (),
    (1 / 5,),
    (3 / 40, 9 / 40),
    (44 / 45, -56 / 15, 32 / 9),
    (19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729),
    (9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656),
    (35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84),
)
_DP_B5 = (35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0.0)
_DP_ERR = (
    71 / 57600, 0.0, -71 / 16695, 71 / 1920, -17253 / 339200, 22 / 525, -1 / 40,
)

_MAX_STEPS = 1_000_000


def _rhs(field: TrigPoly):
    v = field.trimmed()
    n = v.max_mode
    c0 = float(v.c0)
    if n == 0:
        return lambda y: np.full_like(y, c0)
    a = np.array([float(x) for x in v.cos_coeffs])
    b = np.array([float(x) for x in v.sin_coeffs])
    modes = np.arange(1, n + 1, dtype=float)

    def f(y: np.ndarray) -> np.ndarray:
        ang = np.multiply.outer(modes, y)
        return c0 + a @ np.cos(ang) + b @ np.sin(ang)

    return f


def flow_states(field: TrigPoly, duration: float, y0: np.ndarray, *,
                checkpoints: Optional[Sequence[float]] = None,
                rtol: float = DEFAULT_RTOL, atol: float = DEFAULT_ATOL):
    """Integrate dy/ds = v(y) from 0 to duration for a batch of starts.

    ``checkpoints`` must be strictly increasing in magnitude, share the
    sign of ``duration`` and not exceed it; the state at each is
    recorded on the way.  Returns (list of checkpoint states, final
    state).  Raises IntegrationError on step-size underflow.
    """
    if not math.isfinite(duration):
        raise ValueError("duration must be finite")
    y = np.array(y0, dtype=float)
    cps = list(checkpoints) if checkpoints else []
    if duration == 0.0:
        return [y.copy() for _ in cps], y

    f = _rhs(field)
    direction = 1.0 if duration > 0 else -1.0
    for cp in cps:
        if cp * direction <= 0 or abs(cp) > abs(duration) + 1e-30:
            raise ValueError("checkpoints must lie strictly between 0 and duration")

    targets = cps + [duration]
    states: list[np.ndarray] = []
    t = 0.0
    h = direction * min(0.05, abs(duration) / 10.0)
    k1 = f(y)
    n_steps = 0
    for target in targets:
        while (target - t) * direction > 0.0:
            n_steps += 1
            if n_steps > _MAX_STEPS:
                raise IntegrationError("step budget exhausted")
            if abs(h) < 1e-14 * max(1.0, abs(t)):
                raise IntegrationError("step size underflow")
            clipped = False
            if (t + h - target) * direction > 0.0:
                h = target - t
                clipped = True
            ks = [k1]
            for i in range(1, 7):
                yi = y + h * sum(c * k for c, k in zip(_DP_A[i], ks))
                ks.append(f(yi))
            y_new = y + h * sum(c * k for c, k in zip(_DP_B5, ks) if c)
            err_vec = h * sum(c * k for c, k in zip(_DP_ERR, ks) if c)
            scale = atol + rtol * np.maximum(np.abs(y), np.abs(y_new))
            err = float(np.max(np.abs(err_vec) / scale))
            if err <= 1.0:
                t = target if clipped else t + h
                y = y_new
                k1 = ks[6]  # FSAL
            factor = 0.9 * (err ** -0.2) if err > 0 else 5.0
            h = h * min(5.0, max(0.2, factor))
        states.append(y.copy())
    return states[:-1], states[-1]


def integrate_flow(field: TrigPoly, t: float, theta0: float, *,
                   rtol: float = DEFAULT_RTOL, atol: float = DEFAULT_ATOL) -> float:
    """Lift value theta(t) of the flow of ``field`` started at theta0."""
    _, final = flow_states(field, t, np.array([theta0], dtype=float),
                           rtol=rtol, atol=atol)
    return float(final[0])


# ---------------------------------------------------------------------------
# sampled circle diffeomorphisms

@dataclass(frozen=True, eq=False)
class CircleDiffeo:
    """Orientation-preserving circle diffeomorphism as a sampled lift.

    ``lift[i]`` is the lift value at theta_i = 2 pi i / m.  Strict
    monotonicity across the samples and across the wrap (lift[m-1] <
    lift[0] + 2 pi) is enforced at construction.
    """

    lift: np.ndarray

    def __post_init__(self):
        arr = np.array(self.lift, dtype=float)
        arr.setflags(write=False)
        object.__setattr__(self, "lift", arr)
        if arr.ndim != 1 or arr.size < 2:
            raise ValueError("lift must be a 1-d array with at least 2 samples")
        if not np.all(np.isfinite(arr)):
            raise ValueError("lift values must be finite")
        if not (np.all(np.diff(arr) > 0) and arr[-1] < arr[0] + TWO_PI):
            raise ValueError("lift must be strictly monotone over one period")

    @property
    def grid_size(self) -> int:
        return int(self.lift.size)

    @property
    def thetas(self) -> np.ndarray:
        m = self.grid_size
        return TWO_PI * np.arange(m) / m

    @staticmethod
    def identity(grid_size: int = DEFAULT_GRID) -> "CircleDiffeo":
        return CircleDiffeo(TWO_PI * np.arange(grid_size) / grid_size)

    @staticmethod
    def rotation(angle: float, grid_size: int = DEFAULT_GRID) -> "CircleDiffeo":
        return CircleDiffeo(TWO_PI * np.arange(grid_size) / grid_size + angle)

    def displacement(self) -> np.ndarray:
        return self.lift - self.thetas

    # periodic monotone-cubic interpolation of the lift
    def _interpolator(self):
        m = self.grid_size
        xs = np.append(self.thetas, TWO_PI)
        ys = np.append(self.lift, self.lift[0] + TWO_PI)
        return PchipInterpolator(xs, ys)

    def __call__(self, x) -> np.ndarray:
        """Evaluate the lift at arbitrary points (vectorized, periodic)."""
        x = np.asarray(x, dtype=float)
        k = np.floor(x / TWO_PI)
        base = x - TWO_PI * k
        return self._interpolator()(base) + TWO_PI * k

    def compose(self, inner: "CircleDiffeo") -> "CircleDiffeo":
        """self after inner: the diffeomorphism theta -> self(inner(theta))."""
        if inner.grid_size != self.grid_size:
            raise ValueError("grid mismatch")
        return CircleDiffeo(self(inner.lift))

    def inverse(self) -> "CircleDiffeo":
        """Inverse diffeomorphism, sampled on the same grid."""
        xs = np.append(self.thetas, TWO_PI)
        ys = np.append(self.lift, self.lift[0] + TWO_PI)
        inv = PchipInterpolator(ys, xs)
        targets = self.thetas
        k = np.floor((targets - ys[0]) / TWO_PI)
        base = targets - TWO_PI * k
        # PCHIP domain is [ys[0], ys[-1]] = one full period
        return CircleDiffeo(inv(base) + TWO_PI * k)

    def to_csv(self) -> str:
        lines = ["theta,lift"]
        for th, lf in zip(self.thetas, self.lift):
            lines.append(f"{float(th)!r},{float(lf)!r}")
        return "\n".join(lines) + "\n"

    @staticmethod
    def from_csv(text: str) -> "CircleDiffeo":
        rows = [ln for ln in text.strip().splitlines() if ln and not ln.startswith("theta")]
        lift = np.array([float(r.split(",")[1]) for r in rows])
        return CircleDiffeo(lift)


# ---------------------------------------------------------------------------
# flow words

@dataclass(frozen=True)
class FlowWord:
    """Finite sequence of (field, duration) steps, applied in list order."""

    steps: tuple[tuple[TrigPoly, float], ...]

    def __post_init__(self):
        for _, t in self.steps:
            if not math.isfinite(t):
                raise ValueError("durations must be finite")

    @staticmethod
    def of(steps: Iterable[tuple[TrigPoly, float]]) -> "FlowWord":
        return FlowWord(tuple((f, float(t)) for f, t in steps))

    def __len__(self) -> int:
        return len(self.steps)

    def concat(self, other: "FlowWord") -> "FlowWord":
        return FlowWord(self.steps + other.steps)

    def inverse(self) -> "FlowWord":
        return FlowWord(tuple((f, -t) for f, t in reversed(self.steps)))

    def to_json_list(self) -> list:
        return [{"field": f.to_json_dict(), "t": t} for f, t in self.steps]

    @staticmethod
    def from_json_list(data: list, resolve_label=None) -> "FlowWord":
        steps = []
        for entry in data:
            if "field" in entry:
                f = TrigPoly.from_json_dict(entry["field"])
            elif "label" in entry and resolve_label is not None:
                f = resolve_label(entry["label"])
            else:
                raise ValueError("word step needs an inline field or a resolvable label")
            steps.append((f, float(entry["t"])))
        return FlowWord.of(steps)


def apply_word(word: FlowWord, phi: CircleDiffeo, *,
               rtol: float = DEFAULT_RTOL, atol: float = DEFAULT_ATOL) -> CircleDiffeo:
    """Advance every lift sample of phi through each step of the word.

    Each step post-composes the flow of its field with the current
    diffeomorphism.  Flows of smooth fields preserve monotone lifts, so
    a violation after a step means the tolerance was breached and is
    raised as IntegrationError rather than silently accepted.
    """
    lift = np.array(phi.lift, dtype=float)
    for field, t in word.steps:
        _, lift = flow_states(field, t, lift, rtol=rtol, atol=atol)
        if not (np.all(np.diff(lift) > 0) and lift[-1] < lift[0] + TWO_PI):
            raise IntegrationError("flow step broke lift monotonicity")
    return CircleDiffeo(lift)


def commutator_word(x: TrigPoly, y: TrigPoly, s: float) -> FlowWord:
    """Four-step loop whose net displacement approximates s^2 [x, y].

    Steps run in list order: y backward, x backward, y forward, x
    forward.  With the right-translation bracket convention of
    ``trig_fields.bracket``, the second-order term of this loop is the
    bracket itself (the reversed order would flip its sign).
    """
    return FlowWord.of([(y, -s), (x, -s), (y, s), (x, s)])


def commutator_flow_residual(x: TrigPoly, y: TrigPoly, theta: float, t: float, *,
                             rtol: float = DEFAULT_RTOL, atol: float = DEFAULT_ATOL) -> float:
    """(loop(theta) - theta) / t^2 for the commutator loop at scale t."""
    if t == 0:
        raise ValueError("t must be nonzero")
    state = np.array([theta], dtype=float)
    for field, dt in commutator_word(x, y, t).steps:
        _, state = flow_states(field, dt, state, rtol=rtol, atol=atol)
    return float((state[0] - theta) / (t * t))
