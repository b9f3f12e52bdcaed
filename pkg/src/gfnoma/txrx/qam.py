"""Gray-mapped 4-QAM with unit average energy.

Bit pairs ``(b0, b1)`` map to ``((1 - 2 b0) + 1j (1 - 2 b1)) / sqrt(2)``, so
``00 -> (1+1j)/sqrt(2)``. LLRs are ``log P(b=0) / P(b=1)``: positive means 0.
"""

import numpy as np

SCALE = 1.0 / np.sqrt(2.0)
CONSTELLATION = SCALE * np.array([1 + 1j, 1 - 1j, -1 + 1j, -1 - 1j])


def qam_modulate(bits) -> np.ndarray:
    bits = np.asarray(bits, dtype=np.uint8)
    if bits.size % 2:
        raise ValueError("4-QAM needs an even number of bits")
    b = bits.reshape(-1, 2).astype(float)
    return SCALE * ((1 - 2 * b[:, 0]) + 1j * (1 - 2 * b[:, 1]))


def qam_soft_demod(symbols, gain, noise_var) -> np.ndarray:
    """Exact per-bit LLRs for ``y = gain * x + n`` with ``n ~ CN(0, noise_var)``.

    Gray 4-QAM separates into two BPSK rails, so the max-log and exact LLRs
    coincide: ``2 sqrt(2) Re/Im(conj(gain) y) / noise_var``. Output is
    interleaved ``[b0, b1, b0, b1, ...]``.
    """
    y = np.asarray(symbols, dtype=complex)
    z = np.conj(gain) * y
    scale = 2.0 * np.sqrt(2.0) / np.maximum(noise_var, 1e-12)
    llr = np.empty(y.shape + (2,))
    llr[..., 0] = scale * z.real
    llr[..., 1] = scale * z.imag
    return llr.reshape(*y.shape[:-1], -1) if y.ndim > 1 else llr.ravel()


def hard_bits(llrs) -> np.ndarray:
    return (np.asarray(llrs) < 0).astype(np.uint8)
