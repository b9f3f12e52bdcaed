"""Seeded Monte-Carlo trials over a scenario and their aggregation."""

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import numpy as np

from ..channel import GridDims, add_awgn, draw_rx_powers, pdp_ped_a, pdp_tdl_c, realize_channels
from ..detect import detect, sample_autocorrelation
from ..frame import build_layout, empty_grid, extract_pilot_blocks, map_data, map_pilots
from ..linalg import RankDeficientError, hermitian_eigendecompose
from ..signatures import Codebook, MaskingTable, generate_grassmannian, generate_masking, load_codebook
from ..txrx import ConvolutionalCode, estimate_channels, mmse_pic_receive, random_payload
from .config import ScenarioConfig


@dataclass(frozen=True)
class TrialReport:
    true_set: tuple
    estimated_ka: int
    detected_set: tuple
    decoded_set: tuple
    nmse: dict
    eigenvalues: np.ndarray

    @property
    def num_decoded(self) -> int:
        return len(self.decoded_set)


@lru_cache(maxsize=16)
def _grassmannian(length, size, seed, iterations) -> Codebook:
    return generate_grassmannian(length, size, seed=seed, iterations=iterations)


@dataclass(frozen=True)
class Scenario:
    """Objects shared by every trial of a config: codebooks, masks, layout, channel profile."""

    cfg: ScenarioConfig
    layout: object
    pilot_cb: Codebook
    data_cb: Codebook
    masks: MaskingTable
    pdp: object
    codec: ConvolutionalCode

    @classmethod
    def from_config(cls, cfg: ScenarioConfig) -> "Scenario":
        layout = build_layout(cfg.strategy, cfg.num_rb_freq, cfg.num_slots, cfg.L, cfg.L_p)
        if cfg.pilot_codebook:
            pilot_cb = load_codebook(cfg.pilot_codebook)
        else:
            pilot_cb = _grassmannian(cfg.L_p, cfg.num_ues, cfg.codebook_seed, cfg.codebook_iterations)
        if cfg.data_codebook:
            data_cb = load_codebook(cfg.data_codebook)
        else:
            data_size = max(cfg.L, min(cfg.num_ues, cfg.L * cfg.L))
            data_cb = _grassmannian(cfg.L, data_size, cfg.codebook_seed + 1, cfg.codebook_iterations)
        if pilot_cb.length != cfg.L_p or pilot_cb.size < cfg.num_ues:
            raise ValueError("pilot codebook must be L_p x (>= num_ues)")
        if data_cb.length != cfg.L:
            raise ValueError("data codebook length must equal L")
        if cfg.masking:
            masks = generate_masking(pilot_cb.size, layout.num_pilot_blocks, cfg.mask_seed)
        else:
            masks = MaskingTable.all_ones(pilot_cb.size, layout.num_pilot_blocks)
        pdp = pdp_ped_a() if cfg.channel == "ped_a" else pdp_tdl_c(cfg.rms_ds_ns * 1e-9)
        return cls(cfg, layout, pilot_cb, data_cb, masks, pdp, ConvolutionalCode(Fraction(cfg.code_rate)))

    def data_ids(self, ues) -> np.ndarray:
        # 32 users share a 16-entry data codebook: user k spreads with entry k mod size
        return np.asarray(ues, dtype=int) % self.data_cb.size


def trial_rng(master_seed: int, point: int, trial: int) -> np.random.Generator:
    """Counter-based stream per (sweep point, trial); independent of execution order."""
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(master_seed, spawn_key=(point, trial))))


def synthesize(scn: Scenario, rng: np.random.Generator):
    """Draw one frame: active set, channels, payloads and the received grid."""
    cfg = scn.cfg
    active = np.sort(rng.choice(cfg.num_ues, cfg.num_active, replace=False))
    powers = draw_rx_powers(cfg.num_active, cfg.snr_db, cfg.pathloss_spread_db, cfg.noise_var, rng)
    dims = GridDims(scn.layout.num_subcarriers, scn.layout.num_symbols)
    channel = realize_channels(scn.pdp, dims, cfg.num_rx, cfg.velocity, powers, rng)
    payloads = [random_payload(scn.layout.num_data_blocks, scn.codec, rng) for _ in active]
    grid = empty_grid(scn.layout, cfg.num_rx)
    grid = map_pilots(grid, scn.layout, scn.pilot_cb, scn.masks, active, channel)
    if payloads:
        symbols = np.stack([p.qam_symbols for p in payloads])
        grid = map_data(grid, scn.layout, scn.data_cb, scn.data_ids(active), channel, symbols)
    if cfg.add_noise:
        grid = add_awgn(grid, cfg.noise_var, rng)
    return active, channel, payloads, grid


def run_trial(scn: Scenario, rng: np.random.Generator) -> TrialReport:
    cfg = scn.cfg
    active, channel, payloads, grid = synthesize(scn, rng)
    truth = tuple(int(k) for k in active)
    noise_var = cfg.noise_var if cfg.add_noise else 0.0

    if cfg.activity == "perfect":
        detected, ka_hat, eigenvalues = truth, len(truth), np.empty(0)
    else:
        blocks = extract_pilot_blocks(grid, scn.layout)
        ka_max = cfg.ka_max if cfg.ka_max is not None else min(cfg.L_p - 1, cfg.num_ues)
        # BIC needs a positive noise power even when no noise was added
        res = detect(blocks, scn.pilot_cb, cfg.noise_var, ka_max)
        detected, ka_hat, eigenvalues = res.active_set, res.estimated_ka, res.eigenvalues

    decoded, nmse = (), {}
    if detected:
        try:
            est = estimate_channels(grid, scn.layout, scn.pilot_cb, scn.masks, detected)
        except RankDeficientError:
            est = None
        if est is not None:
            h_grid = est.grid.copy()
            pos = {k: n for n, k in enumerate(truth)}
            for j, k in enumerate(detected):
                if k not in pos:
                    continue
                n = pos[k]
                true_h = np.sqrt(cfg.L_p * channel.rx_power[n]) * channel.gains[n]
                nmse[k] = float(np.sum(np.abs(est.grid[j] - true_h) ** 2) / np.sum(np.abs(true_h) ** 2))
                if cfg.perfect_csi:
                    h_grid[j] = true_h
                elif cfg.genie_power:
                    rms = np.sqrt(np.mean(np.abs(h_grid[j]) ** 2))
                    h_grid[j] *= np.sqrt(cfg.L_p * channel.rx_power[n]) / max(rms, 1e-300)
            rx = mmse_pic_receive(grid, scn.layout, detected, h_grid, scn.data_cb, scn.data_ids(detected),
                                  noise_var, scn.codec, cfg.L_p, cfg.max_pic_iters)
            decoded = tuple(
                k for k in sorted(rx.decoded)
                if k in pos and np.array_equal(rx.decoded[k], payloads[pos[k]].info_bits)
            )
    return TrialReport(truth, int(ka_hat), tuple(detected), decoded, nmse, eigenvalues)


@dataclass(frozen=True)
class PointSummary:
    sweep_value: float
    mean_decoded: float
    miss_rate: float
    fa_rate: float
    mean_ka_hat: float
    mean_nmse_db: float
    trials: int
    ka_histogram: dict
    mean_eigenvalues: np.ndarray

    def csv_row(self) -> list:
        return [self.sweep_value, self.mean_decoded, self.miss_rate, self.fa_rate,
                self.mean_ka_hat, self.mean_nmse_db, self.trials]


def summarize(value: float, cfg: ScenarioConfig, reports) -> PointSummary:
    n = len(reports)
    inactive = cfg.num_ues - cfg.num_active
    miss = [len(set(r.true_set) - set(r.detected_set)) / cfg.num_active if cfg.num_active else 0.0
            for r in reports]
    fa = [len(set(r.detected_set) - set(r.true_set)) / inactive if inactive else 0.0 for r in reports]
    nmse = [v for r in reports for v in r.nmse.values()]
    hist = {}
    for r in reports:
        hist[r.estimated_ka] = hist.get(r.estimated_ka, 0) + 1
    eig = [r.eigenvalues for r in reports if r.eigenvalues.size]
    return PointSummary(
        sweep_value=float(value),
        mean_decoded=float(np.mean([r.num_decoded for r in reports])),
        miss_rate=float(np.mean(miss)),
        fa_rate=float(np.mean(fa)),
        mean_ka_hat=float(np.mean([r.estimated_ka for r in reports])),
        mean_nmse_db=float(10 * np.log10(np.mean(nmse))) if nmse else float("nan"),
        trials=n,
        ka_histogram=dict(sorted(hist.items())),
        mean_eigenvalues=np.mean(eig, axis=0) if eig else np.empty(0),
    )


def _run_one(args):
    cfg, point, trial = args
    return run_trial(Scenario.from_config(cfg), trial_rng(cfg.seed, point, trial))


def run_point(cfg: ScenarioConfig, point: int = 0, workers: int = 1):
    """All trials of one sweep point, reduced in trial order."""
    if workers > 1:
        jobs = [(cfg, point, t) for t in range(cfg.trials)]
        with ProcessPoolExecutor(workers) as pool:
            return list(pool.map(_run_one, jobs, chunksize=max(1, cfg.trials // (4 * workers))))
    scn = Scenario.from_config(cfg)
    return [run_trial(scn, trial_rng(cfg.seed, point, t)) for t in range(cfg.trials)]


def run_sweep(cfg: ScenarioConfig, progress=None):
    """Summaries for every sweep point of ``cfg``."""
    out = []
    for point, (value, point_cfg) in enumerate(cfg.points()):
        reports = run_point(point_cfg, point, cfg.workers)
        out.append(summarize(value, point_cfg, reports))
        if progress is not None:
            progress(out[-1])
    return out


def eigen_profiles(cfg: ScenarioConfig, realizations: int = 1):
    """Sorted eigenvalues of the sample autocorrelation per sweep point and realization."""
    rows = []
    for point, (value, point_cfg) in enumerate(cfg.points()):
        scn = Scenario.from_config(point_cfg)
        for r in range(realizations):
            _, _, _, grid = synthesize(scn, trial_rng(cfg.seed, point, r))
            lam = hermitian_eigendecompose(sample_autocorrelation(extract_pilot_blocks(grid, scn.layout))).eigenvalues
            rows.append((float(value), r, lam))
    return rows
