"""Base-station receive chain after activity detection.

LS channel estimation with mask removal at each pilot block, linear
inter/extrapolation over the grid, then joint per-block MMSE equalization
with CRC-gated parallel interference cancellation.
"""

from dataclasses import dataclass, field

import numpy as np

from ..frame import GridLayout, extract_data_blocks, extract_pilot_blocks
from ..linalg import least_squares_solve
from ..signatures import Codebook, MaskingTable
from .coding import ConvolutionalCode
from .crc import CRC_LENGTH, crc_check
from .qam import qam_modulate, qam_soft_demod


@dataclass(frozen=True)
class ChannelEstimate:
    """LS anchors ``(ues, rx, blocks)`` and interpolated grid ``(ues, sc, sym, rx)``.

    Both absorb the pilot amplitude ``sqrt(L_p P_k)``.
    """

    anchors: np.ndarray
    grid: np.ndarray


def ls_estimate(grid, layout: GridLayout, pilot_cb: Codebook, masks: MaskingTable, active_ids) -> np.ndarray:
    """Per-block LS estimates with the masking sign divided out.

    Returns anchors of shape ``(len(active_ids), num_rx, pilot blocks)``.
    """
    active_ids = np.asarray(active_ids, dtype=int)
    blocks = extract_pilot_blocks(grid, layout)  # (rx * B, L_p)
    a_hat = pilot_cb.signatures[:, active_ids]
    h = least_squares_solve(a_hat, blocks.T)  # (ues, rx * B)
    num_rx = blocks.shape[0] // layout.num_pilot_blocks
    h = h.reshape(active_ids.size, num_rx, layout.num_pilot_blocks)
    return h / masks.entries[active_ids][:, None, :]


def _linear_1d(xp: np.ndarray, vp: np.ndarray, x: np.ndarray, axis: int) -> np.ndarray:
    """Piecewise-linear interpolation along ``axis`` with linear extrapolation."""
    vp = np.moveaxis(vp, axis, -1)
    if xp.size == 1:
        out = np.repeat(vp, x.size, axis=-1)
    else:
        idx = np.clip(np.searchsorted(xp, x, side="right") - 1, 0, xp.size - 2)
        w = (x - xp[idx]) / (xp[idx + 1] - xp[idx])
        out = vp[..., idx] * (1 - w) + vp[..., idx + 1] * w
    return np.moveaxis(out, -1, axis)


def interpolate(anchors, layout: GridLayout) -> np.ndarray:
    """Separable linear interpolation of block anchors over the whole grid.

    Anchors sit at the mean coordinate of their pilot block and must form a
    rectangular lattice. Interpolation runs along frequency first, then time;
    an axis with a single anchor is held constant.
    """
    anchors = np.asarray(anchors, dtype=complex)
    coords = layout.pilot_anchors()
    freqs = np.unique(coords[:, 0])
    times = np.unique(coords[:, 1])
    if freqs.size * times.size != coords.shape[0]:
        raise ValueError("pilot anchors do not form a rectangular lattice")
    fi = np.searchsorted(freqs, coords[:, 0])
    ti = np.searchsorted(times, coords[:, 1])
    lattice = np.empty(anchors.shape[:-1] + (freqs.size, times.size), dtype=complex)
    lattice[..., fi, ti] = anchors
    full_f = _linear_1d(freqs, lattice, np.arange(layout.num_subcarriers, dtype=float), axis=-2)
    full = _linear_1d(times, full_f, np.arange(layout.num_symbols, dtype=float), axis=-1)
    # (ues, rx, sc, sym) -> (ues, sc, sym, rx)
    return np.moveaxis(full, 1, -1)


def estimate_channels(grid, layout, pilot_cb, masks, active_ids) -> ChannelEstimate:
    anchors = ls_estimate(grid, layout, pilot_cb, masks, active_ids)
    return ChannelEstimate(anchors=anchors, grid=interpolate(anchors, layout))


@dataclass
class ReceiveResult:
    decoded: dict = field(default_factory=dict)  # ue index -> info bits
    iteration: dict = field(default_factory=dict)  # ue index -> PIC iteration (1-based)
    iterations_run: int = 0


def effective_columns(channel_grid, layout: GridLayout, data_cb: Codebook, data_ids, pilot_length: int) -> np.ndarray:
    """Per-block effective signatures ``(data blocks, L * num_rx, ues)``.

    Channel estimates carry ``sqrt(L_p P)``; data blocks carry ``sqrt(L P)``.
    """
    h = np.asarray(channel_grid)[:, layout.data_sc, layout.data_sym]  # (ues, D, L, rx)
    s = data_cb.signatures[:, np.asarray(data_ids, dtype=int)].T  # (ues, L)
    g = np.sqrt(layout.data_length / pilot_length) * s[:, None, :, None] * h
    d = layout.num_data_blocks
    return np.moveaxis(g.reshape(g.shape[0], d, -1), 0, -1)


def mmse_equalize(y: np.ndarray, g: np.ndarray, noise_var: float):
    """Joint MMSE per block: returns ``(z, mu)`` each shaped ``(blocks, ues)``.

    ``z`` is the filter output and ``mu = w^H g`` its real gain, so that
    ``z = mu x + v`` with ``var(v) = mu (1 - mu)``.
    """
    n = g.shape[1]
    gh = np.conj(np.swapaxes(g, 1, 2))
    cov = g @ gh
    loading = noise_var if noise_var > 0 else 1e-12 * max(np.mean(np.real(np.trace(cov, axis1=1, axis2=2))) / n, 1.0)
    cov = cov + loading * np.eye(n)
    w = np.linalg.solve(cov, g)  # (D, N, ues)
    z = np.einsum("dnk,dn->dk", np.conj(w), y)
    mu = np.real(np.einsum("dnk,dnk->dk", np.conj(w), g))
    return z, mu


def mmse_pic_receive(grid, layout: GridLayout, detected, channel_grid, data_cb: Codebook, data_ids,
                     noise_var: float, codec: ConvolutionalCode, pilot_length: int,
                     max_iters: int = 6) -> ReceiveResult:
    """Decode the ``detected`` users with MMSE equalization and CRC-gated PIC.

    ``channel_grid`` rows and ``data_ids`` align with ``detected``. Users
    passing their CRC are re-encoded, re-spread over their estimated channel
    and subtracted from the residual; the rest are re-equalized on the
    cleaned signal until ``max_iters`` or no new CRC passes.
    """
    detected = [int(k) for k in detected]
    result = ReceiveResult()
    if not detected:
        return result
    y = extract_data_blocks(grid, layout)
    y = y.reshape(y.shape[0], -1).astype(complex)
    g_all = effective_columns(channel_grid, layout, data_cb, data_ids, pilot_length)
    remaining = list(range(len(detected)))

    for it in range(1, max_iters + 1):
        result.iterations_run = it
        g = g_all[:, :, remaining]
        z, mu = mmse_equalize(y, g, noise_var)
        passed = []
        for col, idx in enumerate(remaining):
            m = np.clip(mu[:, col], 1e-12, 1.0 - 1e-12)
            llr = qam_soft_demod(z[:, col], m, m * (1.0 - m))
            bits = codec.decode(llr)
            if crc_check(bits):
                passed.append(idx)
                result.decoded[detected[idx]] = bits[:-CRC_LENGTH]
                result.iteration[detected[idx]] = it
                x = qam_modulate(codec.encode(bits))
                y = y - g_all[:, :, idx] * x[:, None]
        if not passed:
            break
        remaining = [i for i in remaining if i not in passed]
        if not remaining:
            break
    return result
