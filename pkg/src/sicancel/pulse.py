"""Baseband pulse machinery: SRRC basis function, pulse-shaped synthesis,
matched/projective sampling, and the OFDM-BPSK symbol source.

Symbol sequences are plain float arrays of shape (L, 2): column 0 is the
in-phase component, column 1 the quadrature component.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

# Tolerances for the truncated-pulse orthonormality checks.  The ideal pulse
# family is exactly orthonormal at symbol shifts; truncation to a finite
# support breaks this by a small amount that these bounds must cover.
ENERGY_TOL = 1e-2
SHIFT_ORTHO_TOL = 5e-2


@dataclass(frozen=True)
class FirPulse:
    """Sampled basis pulse: taps[k] = phi(k*h), k = 0..N_p.

    The same tap vector serves as the band-limiting FIR filter of the
    upsample-filter-hold chain.  Taps are unit-energy up to truncation and
    peak at the center of the support.
    """

    taps: np.ndarray
    upsample_ratio: int
    sample_period: float = 1.0
    rolloff: float | None = None

    def __post_init__(self):
        taps = np.asarray(self.taps, dtype=np.float64).ravel()
        object.__setattr__(self, "taps", taps)
        if self.upsample_ratio < 1:
            raise ValueError("upsample_ratio must be >= 1")
        if self.sample_period <= 0:
            raise ValueError("sample_period must be positive")
        if taps.size % 2 == 0:
            raise ValueError("tap count must be odd (even support length)")
        energy = float(np.sum(taps**2))
        if abs(energy - 1.0) > ENERGY_TOL:
            raise ValueError(f"taps must be unit energy, got {energy}")
        n_p = taps.size - 1
        if int(np.argmax(np.abs(taps))) != n_p // 2:
            raise ValueError("pulse must peak at the center of its support")
        N = self.upsample_ratio
        for i in range(1, n_p // N + 1):
            ip = float(np.dot(taps[i * N :], taps[: taps.size - i * N]))
            if abs(ip) > SHIFT_ORTHO_TOL:
                raise ValueError(
                    f"taps correlate too strongly at shift {i}N: {ip}"
                )

    @property
    def support(self) -> int:
        """Support length N_p in base samples (tap count minus one)."""
        return self.taps.size - 1

    @property
    def center(self) -> int:
        return self.support // 2

    @property
    def symbol_period(self) -> float:
        return self.upsample_ratio * self.sample_period


def _srrc_value(t: float, T: float, beta: float) -> float:
    # Closed form with the removable singularities filled by their limits.
    if abs(t) < 1e-12 * T:
        return 1.0 - beta + 4.0 * beta / math.pi
    ts = T / (4.0 * beta)
    if abs(abs(t) - ts) < 1e-9 * T:
        return (beta / math.sqrt(2.0)) * (
            (1.0 + 2.0 / math.pi) * math.sin(math.pi / (4.0 * beta))
            + (1.0 - 2.0 / math.pi) * math.cos(math.pi / (4.0 * beta))
        )
    x = t / T
    num = math.sin(math.pi * x * (1.0 - beta)) + 4.0 * beta * x * math.cos(
        math.pi * x * (1.0 + beta)
    )
    den = math.pi * x * (1.0 - (4.0 * beta * x) ** 2)
    return num / den


def srrc_taps(beta: float, N: int, N_p: int, h: float = 1.0) -> FirPulse:
    """Square-root raised-cosine pulse sampled on the base grid.

    Taps are g((k - N_p/2) h) for k = 0..N_p with symbol period N h,
    normalized to unit l2 energy.  N_p must be even and at least 2N so the
    support covers a full symbol on both sides of the peak.
    """
    if not 0.0 < beta <= 1.0:
        raise ValueError(f"roll-off must be in (0, 1], got {beta}")
    if N_p % 2 != 0:
        raise ValueError(f"support length N_p must be even, got {N_p}")
    if N < 1:
        raise ValueError("upsample ratio N must be >= 1")
    if N_p < 2 * N:
        raise ValueError(f"N_p must be >= 2N, got N_p={N_p}, N={N}")
    T = N * h
    taps = np.array(
        [_srrc_value((k - N_p // 2) * h, T, beta) for k in range(N_p + 1)]
    )
    taps /= np.linalg.norm(taps)
    return FirPulse(taps, N, h, rolloff=beta)


def _as_symbols(symbols) -> np.ndarray:
    sym = np.atleast_2d(np.asarray(symbols, dtype=np.float64))
    if sym.ndim != 2 or sym.shape[1] != 2:
        raise ValueError(f"symbols must have shape (L, 2), got {sym.shape}")
    if not np.all(np.isfinite(sym)):
        raise ValueError("symbols must be finite")
    return sym


def synthesize_baseband(symbols, pulse: FirPulse) -> np.ndarray:
    """Pulse-shape a symbol sequence onto the base-rate grid.

    output[k] = sum_n symbols[n] * taps[k - n N]; output length is
    (L - 1) N + N_p + 1.  This is the upsample-filter-hold chain evaluated
    on the base grid, where the hold is exact.
    """
    sym = _as_symbols(symbols)
    N = pulse.upsample_ratio
    L = sym.shape[0]
    ups = np.zeros(((L - 1) * N + 1, 2))
    ups[::N] = sym
    out = np.empty((ups.shape[0] + pulse.support, 2))
    for c in range(2):
        out[:, c] = np.convolve(ups[:, c], pulse.taps)
    return out


def matched_sample(signal, pulse: FirPulse, count: int) -> np.ndarray:
    """Peak-sampling approximation of the basis projection.

    Reads signal[n N + N_p/2] for n = 0..count-1, i.e. samples each symbol
    slot where the pulse peaks.
    """
    sig = np.atleast_2d(np.asarray(signal, dtype=np.float64))
    N = pulse.upsample_ratio
    last = (count - 1) * N + pulse.center
    if last >= sig.shape[0]:
        raise IndexError(
            f"signal of length {sig.shape[0]} too short for {count} samples"
        )
    idx = np.arange(count) * N + pulse.center
    return sig[idx].copy()


def exact_project(signal, pulse: FirPulse, count: int) -> np.ndarray:
    """True basis-function inner products on the base grid.

    entries[n] = sum_k signal[k] * taps[k - n N].  Used as the oracle
    against matched_sample and in the energy-equality tests.
    """
    sig = np.atleast_2d(np.asarray(signal, dtype=np.float64))
    N = pulse.upsample_ratio
    taps = pulse.taps
    out = np.zeros((count, sig.shape[1]))
    for n in range(count):
        k0 = n * N
        k1 = min(k0 + taps.size, sig.shape[0])
        if k0 >= sig.shape[0]:
            break
        seg = sig[k0:k1]
        out[n] = taps[: k1 - k0] @ seg
    return out


def gram_offdiagonal(pulse: FirPulse) -> np.ndarray:
    """Correlations sum_k taps[k] taps[k - iN] for i = 1.. within support."""
    taps = pulse.taps
    N = pulse.upsample_ratio
    vals = []
    for i in range(1, pulse.support // N + 1):
        vals.append(float(np.dot(taps[i * N :], taps[: taps.size - i * N])))
    return np.array(vals)


def ofdm_symbols_from_bits(bits, guard_len: int) -> np.ndarray:
    """Map BPSK values (+-1, shape (num_blocks, block_len)) to baseband symbols.

    Per block: inverse DFT, cyclic prefix of the last guard_len samples,
    real part to channel 1 and imaginary part to channel 2.  The whole
    sequence is scaled to unit average symbol energy.
    """
    bits = np.asarray(bits, dtype=np.float64)
    if bits.ndim != 2:
        raise ValueError("bits must be (num_blocks, block_len)")
    block_len = bits.shape[1]
    if not 0 <= guard_len < block_len:
        raise ValueError(f"guard_len must be in [0, {block_len}), got {guard_len}")
    blocks = []
    for row in bits:
        x = np.fft.ifft(row)
        if guard_len > 0:
            x = np.concatenate([x[-guard_len:], x])
        blocks.append(x)
    s = np.concatenate(blocks)
    sym = np.column_stack([s.real, s.imag])
    mean_energy = float(np.mean(np.sum(sym**2, axis=1)))
    if mean_energy > 0:
        sym /= math.sqrt(mean_energy)
    return sym


def generate_ofdm_bpsk(
    num_blocks: int, block_len: int, guard_len: int, seed: int
) -> np.ndarray:
    """OFDM-BPSK symbol source with cyclic prefix.

    BPSK values are drawn from numpy's default PCG64 generator seeded with
    ``seed``, so traces are reproducible across platforms.  Output length is
    num_blocks * (block_len + guard_len).
    """
    if num_blocks < 1:
        raise ValueError("num_blocks must be >= 1")
    if block_len < 2 or block_len & (block_len - 1) != 0:
        raise ValueError(f"block_len must be a power of two >= 2, got {block_len}")
    if not 0 <= guard_len < block_len:
        raise ValueError(f"guard_len must be in [0, {block_len}), got {guard_len}")
    rng = np.random.default_rng(seed)
    bits = 2.0 * rng.integers(0, 2, size=(num_blocks, block_len)) - 1.0
    return ofdm_symbols_from_bits(bits, guard_len)
