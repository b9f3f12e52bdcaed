from .coding import ConvolutionalCode
from .crc import crc_attach, crc_check
from .qam import qam_modulate, qam_soft_demod
from .receiver import (
    ChannelEstimate,
    ReceiveResult,
    estimate_channels,
    interpolate,
    ls_estimate,
    mmse_pic_receive,
)
from .transmitter import UePayload, info_length, make_payload, random_payload

__all__ = [
    "ChannelEstimate", "ConvolutionalCode", "ReceiveResult", "UePayload",
    "crc_attach", "crc_check", "estimate_channels", "info_length", "interpolate",
    "ls_estimate", "make_payload", "mmse_pic_receive", "qam_modulate",
    "qam_soft_demod", "random_payload",
]
