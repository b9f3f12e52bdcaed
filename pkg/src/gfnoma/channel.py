"""Wideband Rayleigh fading over an OFDM grid, receive powers and AWGN."""

from dataclasses import dataclass

import numpy as np
from scipy.special import j0

SPEED_OF_LIGHT = 299_792_458.0
SUBCARRIER_SPACING = 15e3
CARRIER_FREQUENCY = 2e9
# 14 OFDM symbols per 1 ms subframe at 15 kHz spacing, cyclic prefix included
SYMBOL_DURATION = 1e-3 / 14


@dataclass(frozen=True)
class PowerDelayProfile:
    delays: np.ndarray  # seconds
    powers: np.ndarray  # linear, sums to one

    def __post_init__(self):
        d = np.asarray(self.delays, dtype=float)
        p = np.asarray(self.powers, dtype=float)
        if d.shape != p.shape or d.ndim != 1 or d.size == 0:
            raise ValueError("delays and powers must be equal-length 1-D arrays")
        if np.any(d < 0) or np.any(np.diff(d) <= 0):
            raise ValueError("delays must be nonnegative and strictly increasing")
        if np.any(p < 0) or abs(p.sum() - 1.0) > 1e-12:
            raise ValueError("powers must be nonnegative and sum to one")
        object.__setattr__(self, "delays", d)
        object.__setattr__(self, "powers", p)

    @property
    def num_taps(self) -> int:
        return self.delays.size

    def rms_delay_spread(self) -> float:
        mean = np.sum(self.powers * self.delays)
        return float(np.sqrt(max(np.sum(self.powers * self.delays**2) - mean**2, 0.0)))


def _from_db(delays, powers_db) -> PowerDelayProfile:
    p = 10.0 ** (np.asarray(powers_db, dtype=float) / 10.0)
    return PowerDelayProfile(np.asarray(delays, dtype=float), p / p.sum())


def pdp_ped_a() -> PowerDelayProfile:
    """ITU pedestrian-A profile (about 45 ns RMS delay spread)."""
    return _from_db([0.0, 110e-9, 190e-9, 410e-9], [0.0, -9.7, -19.2, -22.8])


# 3GPP TR 38.901 TDL-C: normalized delay, power in dB
_TDL_C = np.array([
    [0.0000, -4.4], [0.2099, -1.2], [0.2219, -3.5], [0.2329, -5.2],
    [0.2176, -2.5], [0.6366, 0.0], [0.6448, -2.2], [0.6560, -3.9],
    [0.6584, -7.4], [0.7935, -7.1], [0.8213, -10.7], [0.9336, -11.1],
    [1.2285, -5.1], [1.3083, -6.8], [2.1704, -8.7], [2.7105, -13.2],
    [4.2589, -13.9], [4.6003, -13.9], [5.4902, -15.8], [5.6077, -17.1],
    [6.3065, -16.0], [6.6374, -15.7], [7.0427, -21.6], [8.6523, -22.8],
])


def pdp_tdl_c(rms_ds: float) -> PowerDelayProfile:
    """TDL-C profile scaled so its computed RMS delay spread equals ``rms_ds``.

    The tabulated normalized delays have an RMS spread slightly off unity, so
    the scaling divides by the table's own spread to make the target exact.
    ``rms_ds == 0`` collapses to a single flat tap.
    """
    if rms_ds < 0:
        raise ValueError("rms_ds must be nonnegative")
    if rms_ds == 0:
        return PowerDelayProfile(np.zeros(1), np.ones(1))
    order = np.argsort(_TDL_C[:, 0], kind="stable")
    table = _TDL_C[order]
    unit = _from_db(table[:, 0], table[:, 1])
    return PowerDelayProfile(unit.delays * (rms_ds / unit.rms_delay_spread()), unit.powers)


@dataclass(frozen=True)
class GridDims:
    num_subcarriers: int
    num_symbols: int


def doppler_frequency(velocity: float, carrier: float = CARRIER_FREQUENCY) -> float:
    return velocity * carrier / SPEED_OF_LIGHT


def _jakes_factor(num_symbols: int, fd: float) -> np.ndarray:
    """Square root of the J0 temporal correlation matrix across OFDM symbols."""
    n = np.arange(num_symbols)
    corr = j0(2 * np.pi * fd * SYMBOL_DURATION * np.abs(n[:, None] - n[None, :]))
    w, u = np.linalg.eigh(corr)
    return u * np.sqrt(np.clip(w, 0.0, None))


def realize_channel(
    pdp: PowerDelayProfile,
    dims: GridDims,
    num_rx: int,
    velocity: float,
    rng: np.random.Generator,
    subcarrier_spacing: float = SUBCARRIER_SPACING,
    carrier: float = CARRIER_FREQUENCY,
) -> np.ndarray:
    """One user's frequency response, shape ``(subcarriers, symbols, num_rx)``.

    Taps are drawn in the delay domain as CN(0, tap power) and evaluated at
    every subcarrier. With zero velocity each tap is constant over the frame;
    otherwise taps follow a Jakes (J0) correlation across OFDM symbols.
    """
    nf, nt = dims.num_subcarriers, dims.num_symbols
    shape = (pdp.num_taps, num_rx)
    fd = doppler_frequency(velocity, carrier)
    if fd == 0.0:
        g = (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) * np.sqrt(pdp.powers[:, None] / 2)
        g = np.broadcast_to(g[:, None, :], (pdp.num_taps, nt, num_rx))
    else:
        w = (rng.standard_normal((pdp.num_taps, nt, num_rx))
             + 1j * rng.standard_normal((pdp.num_taps, nt, num_rx))) / np.sqrt(2)
        g = np.einsum("st,ptr->psr", _jakes_factor(nt, fd), w) * np.sqrt(pdp.powers[:, None, None])
    f = np.arange(nf) * subcarrier_spacing
    steer = np.exp(-2j * np.pi * f[:, None] * pdp.delays[None, :])  # (nf, taps)
    return np.einsum("fp,ptr->ftr", steer, g)


@dataclass(frozen=True)
class ChannelRealization:
    """Per-user channel grids and per-resource-element receive powers.

    ``gains`` has shape ``(num_ues, subcarriers, symbols, num_rx)`` with unit
    average energy; ``rx_power`` is the linear per-RE receive power ``P_k``.
    Pilot blocks are scaled by ``sqrt(L_p * P_k)`` and data blocks by
    ``sqrt(L * P_k)`` when mapped, so both carry ``P_k`` per element.
    """

    gains: np.ndarray
    rx_power: np.ndarray

    @property
    def num_ues(self) -> int:
        return self.gains.shape[0]


def realize_channels(pdp, dims, num_rx, velocity, rx_power, rng) -> ChannelRealization:
    rx_power = np.asarray(rx_power, dtype=float)
    draws = [realize_channel(pdp, dims, num_rx, velocity, rng) for _ in range(rx_power.size)]
    gains = np.stack(draws) if draws else np.zeros((0, dims.num_subcarriers, dims.num_symbols, num_rx), dtype=complex)
    return ChannelRealization(gains=gains, rx_power=rx_power)


def draw_rx_powers(num_ues: int, mean_snr_db: float, spread_db: float, noise_var: float,
                   rng: np.random.Generator) -> np.ndarray:
    """Per-UE linear receive powers with SNR uniform on ``mean +/- spread`` dB."""
    if spread_db < 0:
        raise ValueError("spread_db must be nonnegative")
    snr_db = mean_snr_db + rng.uniform(-spread_db, spread_db, size=num_ues) if spread_db > 0 \
        else np.full(num_ues, float(mean_snr_db))
    return noise_var * 10.0 ** (snr_db / 10.0)


def add_awgn(grid: np.ndarray, noise_var: float, rng: np.random.Generator) -> np.ndarray:
    """Return ``grid`` plus CN(0, noise_var) noise on every element."""
    if noise_var < 0:
        raise ValueError("noise_var must be nonnegative")
    grid = np.asarray(grid, dtype=complex)
    if noise_var == 0:
        return grid.copy()
    noise = rng.standard_normal(grid.shape) + 1j * rng.standard_normal(grid.shape)
    return grid + noise * np.sqrt(noise_var / 2)
