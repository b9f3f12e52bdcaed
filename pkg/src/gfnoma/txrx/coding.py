"""Rate-1/2 K=7 convolutional code (133, 171 octal), optionally punctured to 2/3.

The trellis starts in the zero state and is not terminated: the decoder
traces back from the best final state, so coded length is exactly
``info_length / rate``.
"""

from fractions import Fraction

import numpy as np

CONSTRAINT_LENGTH = 7
GENERATORS = (0o133, 0o171)
NUM_STATES = 1 << (CONSTRAINT_LENGTH - 1)
# keep-mask over the mother-code output of two input bits: c0 c1 c0' c1'
PUNCTURE = {Fraction(1, 2): np.array([1, 1]), Fraction(2, 3): np.array([1, 1, 1, 0])}


def _parity(x: int) -> int:
    return bin(x).count("1") & 1


def _trellis():
    """Output bits for every (state, input) and the predecessor table."""
    out = np.zeros((NUM_STATES, 2, 2), dtype=np.uint8)
    for s in range(NUM_STATES):
        for u in range(2):
            reg = (u << (CONSTRAINT_LENGTH - 1)) | s
            out[s, u] = [_parity(reg & g) for g in GENERATORS]
    ns = np.arange(NUM_STATES)
    # next state = (u << 5) | (s >> 1): predecessors differ in their lowest bit
    pred = ((ns & (NUM_STATES // 2 - 1)) << 1)[:, None] | np.array([0, 1])[None, :]
    u_of = ns >> (CONSTRAINT_LENGTH - 2)
    return out, pred, u_of


_OUT, _PRED, _U = _trellis()
_SIGN = 1.0 - 2.0 * _OUT[_PRED, _U[:, None]].astype(float)  # (next state, branch, 2)


class ConvolutionalCode:
    """Soft-decision Viterbi codec with puncturing to the requested rate."""

    def __init__(self, rate=Fraction(2, 3)):
        rate = Fraction(rate).limit_denominator(16)
        if rate not in PUNCTURE:
            raise ValueError(f"unsupported code rate {rate}; choose from {sorted(map(str, PUNCTURE))}")
        self.rate = rate
        self._keep = PUNCTURE[rate]
        self._period = self._keep.size // 2

    def coded_length(self, info_length: int) -> int:
        if info_length % self._period:
            raise ValueError(f"info length {info_length} not a multiple of {self._period} at rate {self.rate}")
        return info_length // self._period * int(self._keep.sum())

    def info_length(self, coded_length: int) -> int:
        kept = int(self._keep.sum())
        if coded_length % kept:
            raise ValueError(f"coded length {coded_length} not a multiple of {kept} at rate {self.rate}")
        return coded_length // kept * self._period

    def encode(self, bits) -> np.ndarray:
        bits = np.asarray(bits, dtype=np.uint8)
        self.coded_length(bits.size)
        mother = np.empty((bits.size, 2), dtype=np.uint8)
        s = 0
        for i, u in enumerate(bits.tolist()):
            mother[i] = _OUT[s, u]
            s = ((u << (CONSTRAINT_LENGTH - 1)) | s) >> 1
        keep = np.tile(self._keep, bits.size // self._period).astype(bool)
        return mother.ravel()[keep]

    def decode(self, llrs) -> np.ndarray:
        """Viterbi decoding of LLRs (positive favours bit 0)."""
        llrs = np.asarray(llrs, dtype=float)
        n = self.info_length(llrs.size)
        keep = np.tile(self._keep, n // self._period).astype(bool)
        mother = np.zeros(keep.size)
        mother[keep] = llrs
        mother = mother.reshape(n, 2)

        metric = np.full(NUM_STATES, -np.inf)
        metric[0] = 0.0
        choice = np.empty((n, NUM_STATES), dtype=np.uint8)
        for i in range(n):
            cand = metric[_PRED] + _SIGN @ mother[i]
            pick = cand[:, 1] > cand[:, 0]
            choice[i] = pick
            metric = np.where(pick, cand[:, 1], cand[:, 0])
            metric -= metric.max()

        bits = np.empty(n, dtype=np.uint8)
        s = int(np.argmax(metric))
        for i in range(n - 1, -1, -1):
            bits[i] = _U[s]
            s = _PRED[s, choice[i, s]]
        return bits
