"""Resource-grid layouts and the mapping of pilot/data blocks onto them.

Grids are complex arrays of shape ``(subcarriers, symbols, num_rx)``. Within
a block, sequence index ``e`` runs over elements sorted by ascending
subcarrier, then ascending symbol; blocks themselves are ordered the same way
by their first element.
"""

from dataclasses import dataclass

import numpy as np

from .channel import ChannelRealization
from .signatures import Codebook, MaskingTable

SUBCARRIERS_PER_RB = 12
SYMBOLS_PER_SLOT = 7
PILOT_SYMBOL_IN_SLOT = 3

CONTIGUOUS = "contiguous"
SPLIT = "split"


class LayoutError(ValueError):
    pass


@dataclass(frozen=True)
class GridLayout:
    num_subcarriers: int
    num_symbols: int
    strategy: str
    pilot_sc: np.ndarray   # (blocks, L_p)
    pilot_sym: np.ndarray  # (blocks, L_p)
    data_sc: np.ndarray    # (data blocks, L)
    data_sym: np.ndarray   # (data blocks, L)

    @property
    def num_pilot_blocks(self) -> int:
        return self.pilot_sc.shape[0]

    @property
    def pilot_length(self) -> int:
        return self.pilot_sc.shape[1]

    @property
    def num_data_blocks(self) -> int:
        return self.data_sc.shape[0]

    @property
    def data_length(self) -> int:
        return self.data_sc.shape[1]

    def pilot_anchors(self) -> np.ndarray:
        """Mean (subcarrier, symbol) coordinate of each pilot block, shape ``(blocks, 2)``."""
        return np.stack([self.pilot_sc.mean(axis=1), self.pilot_sym.mean(axis=1)], axis=1)

    def pilot_mask(self) -> np.ndarray:
        m = np.zeros((self.num_subcarriers, self.num_symbols), dtype=bool)
        m[self.pilot_sc, self.pilot_sym] = True
        return m


def _sorted_block(sc, sym):
    sc = np.asarray(sc).ravel()
    sym = np.asarray(sym).ravel()
    order = np.lexsort((sym, sc))
    return sc[order], sym[order]


def build_layout(strategy: str = CONTIGUOUS, num_rb_freq: int = 6, num_slots: int = 2,
                 L: int = 4, L_p: int = 12) -> GridLayout:
    """Pilot and data block layout for a ``12*num_rb_freq x 7*num_slots`` grid.

    Pilot blocks sit on symbol 3 of every slot. ``contiguous`` packs ``L_p``
    consecutive subcarriers on one symbol; ``split`` spreads ``L_p/2``
    subcarriers over the pilot symbols of two consecutive slots. Every other
    element is grouped into data blocks of ``L`` adjacent subcarriers.
    """
    nf = SUBCARRIERS_PER_RB * num_rb_freq
    nt = SYMBOLS_PER_SLOT * num_slots
    if num_rb_freq < 1 or num_slots < 1 or L < 1 or L_p < 1:
        raise LayoutError("dimensions must be positive")
    pilot_symbols = [PILOT_SYMBOL_IN_SLOT + SYMBOLS_PER_SLOT * s for s in range(num_slots)]

    blocks = []
    if strategy == CONTIGUOUS:
        if nf % L_p:
            raise LayoutError(f"{nf} subcarriers not divisible by L_p={L_p}")
        for f0 in range(0, nf, L_p):
            for t in pilot_symbols:
                blocks.append(_sorted_block(np.arange(f0, f0 + L_p), np.full(L_p, t)))
    elif strategy == SPLIT:
        if L_p % 2 or num_slots % 2:
            raise LayoutError("split layout needs even L_p and an even number of slots")
        half = L_p // 2
        if nf % half:
            raise LayoutError(f"{nf} subcarriers not divisible by L_p/2={half}")
        for f0 in range(0, nf, half):
            for pair in range(0, num_slots, 2):
                t0, t1 = pilot_symbols[pair], pilot_symbols[pair + 1]
                sc = np.tile(np.arange(f0, f0 + half)[:, None], (1, 2))
                sym = np.tile([t0, t1], (half, 1))
                blocks.append(_sorted_block(sc, sym))
    else:
        raise LayoutError(f"unknown pilot strategy {strategy!r}")

    blocks.sort(key=lambda b: (b[0][0], b[1][0]))
    pilot_sc = np.array([b[0] for b in blocks])
    pilot_sym = np.array([b[1] for b in blocks])

    occupied = np.zeros((nf, nt), dtype=bool)
    occupied[pilot_sc, pilot_sym] = True
    data_sc, data_sym = [], []
    for t in range(nt):
        free = np.flatnonzero(~occupied[:, t])
        if free.size % L:
            raise LayoutError(f"symbol {t} has {free.size} data elements, not divisible by L={L}")
        for chunk in free.reshape(-1, L):
            data_sc.append(chunk)
            data_sym.append(np.full(L, t))

    return GridLayout(
        num_subcarriers=nf,
        num_symbols=nt,
        strategy=strategy,
        pilot_sc=pilot_sc,
        pilot_sym=pilot_sym,
        data_sc=np.array(data_sc, dtype=int).reshape(-1, L),
        data_sym=np.array(data_sym, dtype=int).reshape(-1, L),
    )


def empty_grid(layout: GridLayout, num_rx: int) -> np.ndarray:
    return np.zeros((layout.num_subcarriers, layout.num_symbols, num_rx), dtype=complex)


def map_pilots(grid, layout: GridLayout, pilot_cb: Codebook, masks: MaskingTable,
               active_ues, channel: ChannelRealization) -> np.ndarray:
    """Superimpose the masked pilots of ``active_ues`` onto a copy of ``grid``.

    ``channel`` rows are aligned with ``active_ues``. Element ``e`` of block
    ``i`` receives ``sqrt(L_p P_k) a_k[e] h_k m_{k,i}`` from every user.
    """
    grid = np.array(grid, dtype=complex)
    active_ues = np.asarray(active_ues, dtype=int)
    L_p = layout.pilot_length
    if pilot_cb.length != L_p:
        raise LayoutError(f"pilot codebook length {pilot_cb.length} != L_p {L_p}")
    if masks.num_blocks != layout.num_pilot_blocks:
        raise LayoutError("masking table does not match the number of pilot blocks")
    if active_ues.size and (active_ues.min() < 0 or active_ues.max() >= pilot_cb.size):
        raise IndexError("active signature index outside the pilot codebook")
    for n, k in enumerate(active_ues):
        h = channel.gains[n][layout.pilot_sc, layout.pilot_sym]  # (B, L_p, rx)
        amp = np.sqrt(L_p * channel.rx_power[n])
        block = amp * pilot_cb[k][None, :] * masks.entries[k][:, None]
        grid[layout.pilot_sc, layout.pilot_sym] += block[:, :, None] * h
    return grid


def extract_pilot_blocks(grid, layout: GridLayout) -> np.ndarray:
    """Pilot-block vectors of shape ``(num_rx * blocks, L_p)``, antenna-major."""
    y = np.asarray(grid)[layout.pilot_sc, layout.pilot_sym]  # (B, L_p, rx)
    return np.moveaxis(y, 2, 0).reshape(-1, layout.pilot_length)


def map_data(grid, layout: GridLayout, data_cb: Codebook, data_ids, channel: ChannelRealization,
             symbols) -> np.ndarray:
    """Superimpose spread data symbols onto a copy of ``grid``.

    ``symbols`` has one row per user (aligned with ``data_ids`` and
    ``channel``) and one column per data block.
    """
    grid = np.array(grid, dtype=complex)
    data_ids = np.asarray(data_ids, dtype=int)
    symbols = np.atleast_2d(np.asarray(symbols, dtype=complex))
    if symbols.shape != (data_ids.size, layout.num_data_blocks):
        raise LayoutError(
            f"expected symbols of shape {(data_ids.size, layout.num_data_blocks)}, got {symbols.shape}"
        )
    L = layout.data_length
    for n, k in enumerate(data_ids):
        h = channel.gains[n][layout.data_sc, layout.data_sym]  # (D, L, rx)
        amp = np.sqrt(L * channel.rx_power[n])
        block = amp * data_cb[k][None, :] * symbols[n][:, None]
        grid[layout.data_sc, layout.data_sym] += block[:, :, None] * h
    return grid


def extract_data_blocks(grid, layout: GridLayout) -> np.ndarray:
    """Data-block contents, shape ``(data blocks, L, num_rx)``."""
    return np.asarray(grid)[layout.data_sc, layout.data_sym]
