"""State-space algebra for the canceler toolkit.

Discrete-time systems are matrix quadruples (A, B, C, D) tagged with a
sample period; continuous-time quadruples are used only for the anti-alias
filter.  Operations are pure and never mutate their arguments; compositions
concatenate states (no minimal realization is attempted).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

# A matrix is reported stable only if its spectral radius clears the unit
# circle by this margin, guarding against boundary false positives.
STABILITY_MARGIN = 1e-9

_PERIOD_RTOL = 1e-9


def _as_matrix(M) -> np.ndarray:
    return np.atleast_2d(np.asarray(M, dtype=np.float64))


@dataclass(frozen=True)
class DiscreteStateSpace:
    """Discrete-time system x[k+1] = A x[k] + B u[k], y[k] = C x[k] + D u[k].

    ``period`` is a bookkeeping tag (seconds per step); it has no effect on
    the dynamics but interconnections refuse to mix different rates.
    """

    A: np.ndarray
    B: np.ndarray
    C: np.ndarray
    D: np.ndarray
    period: float = 1.0

    def __post_init__(self):
        for name in ("A", "B", "C", "D"):
            object.__setattr__(self, name, _as_matrix(getattr(self, name)))
        n = self.A.shape[0]
        if self.A.shape != (n, n):
            raise ValueError(f"A must be square, got {self.A.shape}")
        if self.B.shape[0] != n:
            raise ValueError(f"B has {self.B.shape[0]} rows, expected {n}")
        if self.C.shape[1] != n:
            raise ValueError(f"C has {self.C.shape[1]} cols, expected {n}")
        q, p = self.C.shape[0], self.B.shape[1]
        if self.D.shape != (q, p):
            raise ValueError(f"D must be {q}x{p}, got {self.D.shape}")
        if not self.period > 0:
            raise ValueError("period must be positive")

    @property
    def n_states(self) -> int:
        return self.A.shape[0]

    @property
    def n_inputs(self) -> int:
        return self.B.shape[1]

    @property
    def n_outputs(self) -> int:
        return self.C.shape[0]

    def spectral_radius(self) -> float:
        if self.n_states == 0:
            return 0.0
        return float(np.max(np.abs(np.linalg.eigvals(self.A))))

    def is_stable(self) -> bool:
        return self.spectral_radius() < 1.0 - STABILITY_MARGIN


@dataclass(frozen=True)
class ContinuousStateSpace:
    """Continuous-time quadruple dx/dt = A x + B u, y = C x + D u."""

    A: np.ndarray
    B: np.ndarray
    C: np.ndarray
    D: np.ndarray

    def __post_init__(self):
        for name in ("A", "B", "C", "D"):
            object.__setattr__(self, name, _as_matrix(getattr(self, name)))
        n = self.A.shape[0]
        if self.A.shape != (n, n):
            raise ValueError(f"A must be square, got {self.A.shape}")
        if self.B.shape[0] != n or self.C.shape[1] != n:
            raise ValueError("B/C dimensions inconsistent with A")
        if self.D.shape != (self.C.shape[0], self.B.shape[1]):
            raise ValueError("D dimensions inconsistent with B and C")

    @property
    def n_inputs(self) -> int:
        return self.B.shape[1]

    @property
    def n_outputs(self) -> int:
        return self.C.shape[0]

    def is_stable(self) -> bool:
        if self.A.shape[0] == 0:
            return True
        return float(np.max(np.real(np.linalg.eigvals(self.A)))) < 0.0


def first_order_lowpass(tau: float, channels: int = 2) -> ContinuousStateSpace:
    """Diagonal first-order filter 1/(tau*s + 1) on each channel."""
    if tau <= 0:
        raise ValueError("tau must be positive")
    eye = np.eye(channels)
    return ContinuousStateSpace(-eye / tau, eye / tau, eye, 0 * eye)


def static_gain(M, period: float = 1.0) -> DiscreteStateSpace:
    """Stateless system y[k] = M u[k]."""
    M = _as_matrix(M)
    q, p = M.shape
    return DiscreteStateSpace(
        np.zeros((0, 0)), np.zeros((0, p)), np.zeros((q, 0)), M, period
    )


def _check_periods(g2: DiscreteStateSpace, g1: DiscreteStateSpace):
    if abs(g2.period - g1.period) > _PERIOD_RTOL * max(g2.period, g1.period):
        raise ValueError(f"period mismatch: {g2.period} vs {g1.period}")


def series(g2: DiscreteStateSpace, g1: DiscreteStateSpace) -> DiscreteStateSpace:
    """Cascade g2 o g1 (the output of g1 feeds g2).

    States are concatenated as [x1; x2]; the result has n1 + n2 states.
    """
    _check_periods(g2, g1)
    if g2.n_inputs != g1.n_outputs:
        raise ValueError(
            f"cannot cascade: g2 takes {g2.n_inputs} inputs, "
            f"g1 produces {g1.n_outputs} outputs"
        )
    n1, n2 = g1.n_states, g2.n_states
    A = np.block(
        [
            [g1.A, np.zeros((n1, n2))],
            [g2.B @ g1.C, g2.A],
        ]
    )
    B = np.vstack([g1.B, g2.B @ g1.D])
    C = np.hstack([g2.D @ g1.C, g2.C])
    D = g2.D @ g1.D
    return DiscreteStateSpace(A, B, C, D, g1.period)


def parallel(g1: DiscreteStateSpace, g2: DiscreteStateSpace) -> DiscreteStateSpace:
    """Output sum g1 + g2 on a shared input."""
    _check_periods(g1, g2)
    if g1.n_inputs != g2.n_inputs or g1.n_outputs != g2.n_outputs:
        raise ValueError("parallel systems must share input/output widths")
    n1, n2 = g1.n_states, g2.n_states
    A = np.block(
        [
            [g1.A, np.zeros((n1, n2))],
            [np.zeros((n2, n1)), g2.A],
        ]
    )
    B = np.vstack([g1.B, g2.B])
    C = np.hstack([g1.C, g2.C])
    return DiscreteStateSpace(A, B, C, g1.D + g2.D, g1.period)


def negate(g: DiscreteStateSpace) -> DiscreteStateSpace:
    return DiscreteStateSpace(g.A, g.B, -g.C, -g.D, g.period)


def c2d_zoh(g: ContinuousStateSpace, h: float) -> DiscreteStateSpace:
    """Zero-order-hold discretization, exact for piecewise-constant inputs.

    Ad = exp(A h), Bd = (integral_0^h exp(A tau) dtau) B, computed jointly
    from the exponential of the augmented matrix [[A, B], [0, 0]] h.
    """
    if h <= 0:
        raise ValueError("sample period h must be positive")
    n = g.A.shape[0]
    p = g.B.shape[1]
    if n == 0:
        return DiscreteStateSpace(g.A, g.B, g.C, g.D, h)
    M = np.zeros((n + p, n + p))
    M[:n, :n] = g.A
    M[:n, n:] = g.B
    E = scipy.linalg.expm(M * h)
    return DiscreteStateSpace(E[:n, :n], E[:n, n:], g.C, g.D, h)


def fir_to_ss(taps, channels: int, period: float = 1.0) -> DiscreteStateSpace:
    """Shift-register realization of the FIR filter taps applied per channel.

    The impulse response on each channel is exactly ``taps`` followed by
    zeros; channels do not mix.  State dimension is (len(taps)-1)*channels.
    """
    taps = np.asarray(taps, dtype=np.float64).ravel()
    if taps.size == 0:
        raise ValueError("taps must be nonempty")
    if channels < 1:
        raise ValueError("channels must be >= 1")
    L = taps.size
    eye = np.eye(channels)
    if L == 1:
        return static_gain(taps[0] * eye, period)
    shift = np.eye(L - 1, k=-1)
    A = np.kron(shift, eye)
    B = np.kron(np.eye(L - 1, 1), eye)
    C = np.kron(taps[1:].reshape(1, -1), eye)
    D = taps[0] * eye
    return DiscreteStateSpace(A, B, C, D, period)


def delay_ss(d: int, channels: int, period: float = 1.0) -> DiscreteStateSpace:
    """Pure delay y[k] = u[k-d]; d = 0 is the stateless identity."""
    if d < 0:
        raise ValueError("delay must be nonnegative")
    if d == 0:
        return static_gain(np.eye(channels), period)
    taps = np.zeros(d + 1)
    taps[d] = 1.0
    return fir_to_ss(taps, channels, period)


def impulse_response(g: DiscreteStateSpace, length: int) -> np.ndarray:
    """Markov parameters {D, CB, CAB, ...} as an array of shape (length, q, p)."""
    if length < 1:
        raise ValueError("length must be >= 1")
    out = np.zeros((length, g.n_outputs, g.n_inputs))
    out[0] = g.D
    M = g.B
    for k in range(1, length):
        out[k] = g.C @ M
        M = g.A @ M
    return out


def simulate_dss(g: DiscreteStateSpace, u, x0=None) -> np.ndarray:
    """Drive g with input rows u[k] (shape (T, p)); returns y of shape (T, q)."""
    from . import _accel

    u = np.atleast_2d(np.asarray(u, dtype=np.float64))
    if u.shape[1] != g.n_inputs:
        raise ValueError(f"input has width {u.shape[1]}, expected {g.n_inputs}")
    return _accel.dss_response(g.A, g.B, g.C, g.D, u, x0)


def dcgain(g: DiscreteStateSpace) -> np.ndarray:
    """Steady-state gain D + C (I - A)^-1 B; raises if z = 1 is a pole."""
    if g.n_states == 0:
        return g.D.copy()
    return g.D + g.C @ np.linalg.solve(np.eye(g.n_states) - g.A, g.B)
