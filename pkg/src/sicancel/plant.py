"""Relay model and generalized-plant assembly.

The coupling channel, pulse-shaping chain and samplers are composed at the
base rate where every element is exact (integer-sample delays, zero-order
holds, ZOH-discretized filters), then lifted to the symbol rate into the
partitioned two-channel plant the synthesis works on.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .lifting import lift, select_first_subchannel
from .pulse import FirPulse
from .sysmat import (
    ContinuousStateSpace,
    DiscreteStateSpace,
    c2d_zoh,
    delay_ss,
    fir_to_ss,
    negate,
    parallel,
    series,
    static_gain,
)


class PlantError(ValueError):
    """Raised when relay parameters cannot yield a well-posed design plant."""


@dataclass(frozen=True)
class RelayParams:
    """Physical and design constants of the relay loop.

    paths holds (gain, delay) pairs with delays in integer base samples;
    integer delays keep every sampler/hold interconnection exact.  The
    anti-alias filter must be a stable, square two-channel system.
    """

    a: float
    paths: tuple
    f: float
    h: float
    N: int
    m: int
    N_p: int
    beta: float
    aa_filter: ContinuousStateSpace

    def __post_init__(self):
        object.__setattr__(
            self,
            "paths",
            tuple((float(r), int(l)) for r, l in self.paths),
        )
        if self.a < 0:
            raise PlantError("amplifier gain a must be nonnegative")
        if not self.paths:
            raise PlantError("at least one coupling path is required")
        for r, l in self.paths:
            if r <= 0:
                raise PlantError(f"path gain must be positive, got {r}")
            if l <= 0:
                raise PlantError(f"path delay must be a positive integer, got {l}")
        if self.h <= 0:
            raise PlantError("base sample period h must be positive")
        if self.N < 1:
            raise PlantError("upsampling ratio N must be >= 1")
        if self.N_p % 2 != 0 or self.N_p < 2:
            raise PlantError("pulse support N_p must be a positive even integer")
        if not self.N_p / 2 < self.m * self.N:
            raise PlantError(
                f"causality requires N_p/2 < m*N, got N_p={self.N_p}, "
                f"m={self.m}, N={self.N}"
            )
        if not 0.0 < self.beta <= 1.0:
            raise PlantError(f"roll-off beta must be in (0, 1], got {self.beta}")
        F = self.aa_filter
        if F.n_inputs != 2 or F.n_outputs != 2:
            raise PlantError("anti-alias filter must be 2-input/2-output")
        if not F.is_stable():
            raise PlantError("anti-alias filter must be stable")

    @property
    def perf_shift(self) -> int:
        """Minimal extra symbol delay that makes the peak-sampled path causal."""
        return -(-self.N_p // (2 * self.N))  # ceil(N_p / 2N)


def rotation_matrix(f: float, L: float) -> np.ndarray:
    """Carrier rotation over a delay of L: [[cos, sin], [-sin, cos]] of 2 pi f L.

    The phase f*L is reduced modulo one cycle before scaling by 2 pi, so
    whole numbers of carrier cycles give the identity exactly even when
    f*L is large.
    """
    ang = 2.0 * math.pi * math.fmod(f * L, 1.0)
    c, s = math.cos(ang), math.sin(ang)
    return np.array([[c, s], [-s, c]])


def _scaled_gain_delay(gain: float, R: np.ndarray, d: int, h: float):
    """Realization of y[k] = gain * R u[k-d] with the gain spread over the
    delay chain (each stage multiplies by gain^(1/(d+1))).

    A plain gain-then-delay cascade puts the full loop gain (hundreds at
    realistic amplifier settings) into single matrix entries, which makes
    every later Riccati solve hopelessly ill-scaled; distributing it keeps
    all entries O(1) with identical input/output behavior.
    """
    c = gain ** (1.0 / (d + 1))
    eye2 = np.eye(2)
    A = c * np.kron(np.eye(d, k=-1), eye2)
    B = c * np.kron(np.eye(d, 1), eye2)
    C = np.kron(np.eye(1, d, d - 1), c * R)
    return DiscreteStateSpace(A, B, C, np.zeros((2, 2)), h)


def multipath_channel(p: RelayParams, h: float | None = None) -> DiscreteStateSpace:
    """Discrete model of the coupling paths alone: sum_j a r_j z^-lj R(2 pi f Lj).

    Exact because every path delay is an integer number of base samples
    acting on held signals.  With a = 0 this is the zero system.
    """
    if h is None:
        h = p.h
    if p.a == 0.0:
        return static_gain(np.zeros((2, 2)), h)
    terms = []
    for r, l in p.paths:
        R = rotation_matrix(p.f, l * p.h)
        terms.append(_scaled_gain_delay(p.a * r, R, l, h))
    out = terms[0]
    for t in terms[1:]:
        out = parallel(out, t)
    return out


def build_coupling_channel(p: RelayParams) -> DiscreteStateSpace:
    """Sampled coupling channel: anti-alias filter after the multipath sum."""
    Fd = c2d_zoh(p.aa_filter, p.h)
    return series(Fd, multipath_channel(p))


def _check_pulse(p: RelayParams, pulse: FirPulse):
    if pulse.upsample_ratio != p.N:
        raise PlantError("pulse upsample ratio does not match params")
    if pulse.support != p.N_p:
        raise PlantError("pulse support does not match params")
    if abs(pulse.sample_period - p.h) > 1e-12 * p.h:
        raise PlantError("pulse sample period does not match params")
    if pulse.rolloff is not None and abs(pulse.rolloff - p.beta) > 1e-12:
        raise PlantError("pulse roll-off does not match params")


def _check_stabilizable_detectable(sigma, n_u, n_y, tol=1e-7):
    # Open-loop A is stable for valid parameters (filters and FIR parts only),
    # so this reduces to a PBH rank test on any boundary/unstable modes.
    A = sigma.A
    n = A.shape[0]
    if n == 0:
        return
    B2 = sigma.B[:, -n_u:]
    C2 = sigma.C[-n_y:, :]
    for lam in np.linalg.eigvals(A):
        if abs(lam) < 1.0 - 1e-9:
            continue
        M = np.hstack([lam * np.eye(n) - A, B2])
        if np.linalg.matrix_rank(M, tol) < n:
            raise PlantError(f"unstable mode {lam} is not controllable from u")
        M = np.vstack([lam * np.eye(n) - A, C2])
        if np.linalg.matrix_rank(M, tol) < n:
            raise PlantError(f"unstable mode {lam} is not observable from y")


@dataclass(frozen=True)
class GeneralizedPlant:
    """Partitioned symbol-rate plant [[T11, T12], [T21, T22]].

    Inputs are (w: 2, u: 2); outputs are (z: 2, y: 2N).  perf_shift is the
    extra symbol delay inserted on the whole performance row so the
    peak-sampled transmit path is causal; a pure delay there leaves the
    achievable induced norm unchanged.
    """

    sigma: DiscreteStateSpace
    block_ratio: int
    perf_shift: int
    params: RelayParams
    pulse: FirPulse
    n_w: int = 2
    n_u: int = 2
    n_z: int = 2
    n_y: int = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "n_y", 2 * self.block_ratio)
        if self.sigma.n_inputs != self.n_w + self.n_u:
            raise PlantError("plant input width mismatch")
        if self.sigma.n_outputs != self.n_z + self.n_y:
            raise PlantError("plant output width mismatch")

    def _block(self, rows, cols) -> DiscreteStateSpace:
        g = self.sigma
        return DiscreteStateSpace(
            g.A, g.B[:, cols], g.C[rows, :], g.D[np.ix_(rows, cols)], g.period
        )

    def t11(self) -> DiscreteStateSpace:
        return self._block(np.arange(self.n_z), np.arange(self.n_w))

    def t12(self) -> DiscreteStateSpace:
        return self._block(np.arange(self.n_z), self.n_w + np.arange(self.n_u))

    def t21(self) -> DiscreteStateSpace:
        return self._block(self.n_z + np.arange(self.n_y), np.arange(self.n_w))

    def t22(self) -> DiscreteStateSpace:
        return self._block(
            self.n_z + np.arange(self.n_y), self.n_w + np.arange(self.n_u)
        )


def _peak_sampled_path(delay: int, pulse: FirPulse, N: int, h: float):
    """Lift delay + pulse filter, keep block-start inputs and outputs only.

    Input selection embeds the symbol command at block starts (zero-stuffing
    upsampler); output selection reads the base-rate signal at block starts
    (downsampler).  Both are first-subchannel selections on the lifted form.
    """
    ls = lift(series(delay_ss(delay, 2, h), fir_to_ss(pulse.taps, 2, h)), N)
    g = ls.system
    return DiscreteStateSpace(g.A, g.B[:, :2], g.C[:2, :], g.D[:2, :2], g.period)


def build_generalized_plant(
    p: RelayParams, pulse: FirPulse, perf_shift: int | None = None
) -> GeneralizedPlant:
    """Assemble the lifted design plant from relay parameters.

    All four blocks are built at the base rate and lifted by N:

    * T11: reference path, base-rate delay m N - N_p/2 + q N through the
      pulse filter, read at block starts;
    * T12: negated transmit path, base-rate delay q N - N_p/2 through the
      pulse filter, read at block starts;
    * T21: reference into the measurement through the anti-alias filter,
      full lifted output;
    * T22: self-interference loop through the coupling channel, full lifted
      output.

    q = perf_shift defaults to the minimal causal value ceil(N_p / 2N).
    """
    _check_pulse(p, pulse)
    q = p.perf_shift if perf_shift is None else int(perf_shift)
    if q < p.perf_shift:
        raise PlantError(
            f"perf_shift {q} too small for causality, need >= {p.perf_shift}"
        )
    N, h = p.N, p.h
    d11 = p.m * N - p.N_p // 2 + q * N
    d12 = q * N - p.N_p // 2

    T11 = _peak_sampled_path(d11, pulse, N, h)
    T12 = negate(_peak_sampled_path(d12, pulse, N, h))
    Fd = c2d_zoh(p.aa_filter, h)
    pulse_fir = fir_to_ss(pulse.taps, 2, h)
    T21 = select_first_subchannel(lift(series(Fd, pulse_fir), N), 2)
    T22 = select_first_subchannel(
        lift(series(build_coupling_channel(p), pulse_fir), N), 2
    )

    if np.max(np.abs(T22.D)) > 0:
        raise PlantError(
            "coupling feeds through within one symbol block; the feedback "
            "loop is not block-strictly-proper (increase path delays or N)"
        )

    n11, n12, n21, n22 = (g.n_states for g in (T11, T12, T21, T22))
    n = n11 + n12 + n21 + n22
    s0 = slice(0, n11)
    s1 = slice(n11, n11 + n12)
    s2 = slice(n11 + n12, n11 + n12 + n21)
    s3 = slice(n11 + n12 + n21, n)
    A = np.zeros((n, n))
    A[s0, s0] = T11.A
    A[s1, s1] = T12.A
    A[s2, s2] = T21.A
    A[s3, s3] = T22.A
    B = np.zeros((n, 4))
    B[s0, :2] = T11.B
    B[s1, 2:] = T12.B
    B[s2, :2] = T21.B
    B[s3, 2:] = T22.B
    ny = 2 * N
    C = np.zeros((2 + ny, n))
    C[:2, s0] = T11.C
    C[:2, s1] = T12.C
    C[2:, s2] = T21.C
    C[2:, s3] = T22.C
    D = np.zeros((2 + ny, 4))
    D[:2, :2] = T11.D
    D[:2, 2:] = T12.D
    D[2:, :2] = T21.D
    D[2:, 2:] = T22.D
    sigma = DiscreteStateSpace(A, B, C, D, N * h)
    _check_stabilizable_detectable(sigma, 2, ny)
    return GeneralizedPlant(sigma, N, q, p, pulse)
