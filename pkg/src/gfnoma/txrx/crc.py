"""CRC-24A (LTE) over bit arrays, zero initial register, no output inversion."""

import numpy as np

CRC24A_POLY = 0x864CFB
CRC_LENGTH = 24


def _remainder(bits) -> int:
    reg = 0
    top = 1 << (CRC_LENGTH - 1)
    mask = (1 << CRC_LENGTH) - 1
    for b in np.asarray(bits, dtype=np.uint8).tolist():
        feedback = ((reg & top) != 0) ^ bool(b)
        reg = (reg << 1) & mask
        if feedback:
            reg ^= CRC24A_POLY
    return reg


def crc24(bits) -> np.ndarray:
    r = _remainder(bits)
    return np.array([(r >> (CRC_LENGTH - 1 - i)) & 1 for i in range(CRC_LENGTH)], dtype=np.uint8)


def crc_attach(bits) -> np.ndarray:
    bits = np.asarray(bits, dtype=np.uint8)
    if bits.size == 0:
        raise ValueError("cannot attach a CRC to an empty message")
    return np.concatenate([bits, crc24(bits)])


def crc_check(bits) -> bool:
    """True when the trailing 24 bits are the CRC of the rest of ``bits``."""
    bits = np.asarray(bits, dtype=np.uint8)
    if bits.size <= CRC_LENGTH:
        return False
    # message followed by its own CRC leaves a zero remainder
    return _remainder(bits) == 0
