"""Discrete-time lifting: exact blocking of a base-rate system into an
equivalent symbol-rate system with N-fold wider channels.

Lifting is an l2 isometry, so induced norms are preserved; the block
matrices come from the closed form with state matrix A^N, so the state
dimension never grows.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .sysmat import DiscreteStateSpace


@dataclass(frozen=True)
class LiftedSystem:
    """Symbol-rate system whose channels are blocks of N base-rate channels."""

    system: DiscreteStateSpace
    block_ratio: int
    base_inputs: int
    base_outputs: int

    def __post_init__(self):
        N = self.block_ratio
        if self.system.n_inputs != N * self.base_inputs:
            raise ValueError("lifted input width inconsistent with block ratio")
        if self.system.n_outputs != N * self.base_outputs:
            raise ValueError("lifted output width inconsistent with block ratio")


def lift(g: DiscreteStateSpace, N: int) -> LiftedSystem:
    """Lift a base-rate system by blocking N consecutive samples.

    The result has state matrix A^N, input blocks [A^(N-1)B ... B], output
    blocks [C; CA; ...; CA^(N-1)] and a lower-block-triangular feedthrough
    with D on the diagonal and C A^(i-j-1) B below it.
    """
    if N < 1:
        raise ValueError("block ratio N must be >= 1")
    if N == 1:
        return LiftedSystem(g, 1, g.n_inputs, g.n_outputs)
    n, p, q = g.n_states, g.n_inputs, g.n_outputs
    powers = [np.eye(n)]
    for _ in range(N):
        powers.append(g.A @ powers[-1])
    B = np.hstack([powers[N - 1 - j] @ g.B for j in range(N)])
    C = np.vstack([g.C @ powers[i] for i in range(N)])
    D = np.zeros((N * q, N * p))
    # cache C A^k B to fill the strictly-lower blocks
    markov = {0: g.C @ g.B}
    for k in range(1, N - 1):
        markov[k] = g.C @ powers[k] @ g.B
    for i in range(N):
        for j in range(N):
            if i == j:
                D[i * q : (i + 1) * q, j * p : (j + 1) * p] = g.D
            elif i > j:
                D[i * q : (i + 1) * q, j * p : (j + 1) * p] = markov[i - j - 1]
    inner = DiscreteStateSpace(powers[N], B, C, D, g.period * N)
    return LiftedSystem(inner, N, p, q)


def block_sequence(x, N: int) -> np.ndarray:
    """Group a base-rate sequence (T, w) into blocks (ceil(T/N), N*w).

    The tail is zero-padded when T is not a multiple of N.
    """
    x = np.atleast_2d(np.asarray(x, dtype=np.float64))
    T, w = x.shape
    blocks = -(-T // N)
    if blocks * N != T:
        pad = np.zeros((blocks * N - T, w))
        x = np.vstack([x, pad])
    return x.reshape(blocks, N * w)


def unblock_sequence(X, N: int) -> np.ndarray:
    """Inverse of block_sequence (up to the zero padding)."""
    X = np.atleast_2d(np.asarray(X, dtype=np.float64))
    blocks, wide = X.shape
    if wide % N != 0:
        raise ValueError(f"block width {wide} not divisible by {N}")
    return X.reshape(blocks * N, wide // N)


def select_first_subchannel(
    ls: LiftedSystem, base_width: int
) -> DiscreteStateSpace:
    """Keep only the first base-rate input channel group of each block.

    This realizes feeding the lifted system with inputs that are nonzero
    only at block starts (a zero-stuffing upsampler at the lifted level):
    the remaining input columns are simply dropped.
    """
    if ls.base_inputs != base_width:
        raise ValueError(
            f"lifted system has base input width {ls.base_inputs}, "
            f"expected {base_width}"
        )
    g = ls.system
    return DiscreteStateSpace(
        g.A, g.B[:, :base_width], g.C, g.D[:, :base_width], g.period
    )


def select_first_output_subchannel(
    ls: LiftedSystem, base_width: int
) -> DiscreteStateSpace:
    """Keep only the first base-rate output channel group of each block
    (sampling the base-rate output at block starts)."""
    if ls.base_outputs != base_width:
        raise ValueError(
            f"lifted system has base output width {ls.base_outputs}, "
            f"expected {base_width}"
        )
    g = ls.system
    return DiscreteStateSpace(
        g.A, g.B, g.C[:base_width, :], g.D[:base_width, :], g.period
    )
