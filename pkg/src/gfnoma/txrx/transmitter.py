"""Per-UE transmit chain: info bits -> CRC -> channel code -> 4-QAM."""

from dataclasses import dataclass

import numpy as np

from .coding import ConvolutionalCode
from .crc import CRC_LENGTH, crc_attach
from .qam import qam_modulate

BITS_PER_SYMBOL = 2


@dataclass(frozen=True)
class UePayload:
    info_bits: np.ndarray
    crc_bits: np.ndarray
    coded_bits: np.ndarray
    qam_symbols: np.ndarray


def info_length(num_symbols: int, codec: ConvolutionalCode) -> int:
    """Info bits that fill ``num_symbols`` 4-QAM symbols after CRC and coding."""
    n = codec.info_length(BITS_PER_SYMBOL * num_symbols) - CRC_LENGTH
    if n < 1:
        raise ValueError(f"{num_symbols} symbols cannot carry a CRC-protected payload")
    return n


def make_payload(info_bits, codec: ConvolutionalCode) -> UePayload:
    info_bits = np.asarray(info_bits, dtype=np.uint8)
    with_crc = crc_attach(info_bits)
    coded = codec.encode(with_crc)
    return UePayload(
        info_bits=info_bits,
        crc_bits=with_crc[-CRC_LENGTH:],
        coded_bits=coded,
        qam_symbols=qam_modulate(coded),
    )


def random_payload(num_symbols: int, codec: ConvolutionalCode, rng: np.random.Generator) -> UePayload:
    bits = rng.integers(0, 2, size=info_length(num_symbols, codec), dtype=np.uint8)
    return make_payload(bits, codec)
