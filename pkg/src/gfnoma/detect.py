"""Subspace activity detection: sample autocorrelation, BIC order estimate, MUSIC.

Signature indices are 0-based throughout.
"""

from dataclasses import dataclass

import numpy as np

from .linalg import EigenDecomposition, hermitian_eigendecompose
from .signatures import Codebook

MUSIC_CAP = 1e12
MUSIC_FLOOR = 1e-12
EIGEN_FLOOR = 1e-12


@dataclass(frozen=True)
class DetectionResult:
    estimated_ka: int
    music_spectrum: np.ndarray
    active_set: tuple
    eigenvalues: np.ndarray


def sample_autocorrelation(blocks) -> np.ndarray:
    """``(1/B) sum_i y_i y_i^H`` over the rows of ``blocks``."""
    y = np.asarray(blocks, dtype=complex)
    if y.ndim == 1:
        y = y[None, :]
    if y.shape[0] == 0:
        raise ValueError("need at least one pilot block")
    r = y.T @ y.conj() / y.shape[0]
    return 0.5 * (r + r.conj().T)


def bic_score(eigenvalues, ka: int, noise_var: float, bp: int) -> float:
    """BIC with known noise power for ``ka`` signal eigenvalues.

    The first ``ka`` eigenvalues take their sample values as ML estimates,
    the rest are pinned to ``noise_var``. Sample eigenvalues are floored at
    ``1e-12 * lambda_1`` before entering a logarithm.
    """
    lam = np.asarray(eigenvalues, dtype=float)
    lp = lam.size
    if not 0 <= ka <= lp:
        raise ValueError(f"ka={ka} outside [0, {lp}]")
    if noise_var <= 0:
        raise ValueError("noise_var must be positive")
    floor = EIGEN_FLOOR * max(lam[0], 0.0) if lp else 0.0
    sig = np.maximum(lam[:ka], max(floor, np.finfo(float).tiny))
    noise = lam[ka:]
    likelihood = np.sum(lam[:ka] / sig) + np.sum(np.log(sig)) + np.sum(noise / noise_var + np.log(noise_var))
    penalty = 0.5 * ka * (2 * lp - ka) * np.log(bp)
    return float(bp * likelihood + bp * lp * np.log(np.pi) + penalty)


def estimate_ka(eigenvalues, noise_var: float, bp: int, ka_max: int) -> int:
    """Smallest minimizer of the BIC over ``0..ka_max``."""
    lam = np.asarray(eigenvalues, dtype=float)
    if ka_max > lam.size - 1:
        raise ValueError(f"ka_max={ka_max} leaves no noise subspace for L_p={lam.size}")
    if lam[0] <= 0:
        # no received energy: the relative eigenvalue floor is undefined
        return 0
    scores = [bic_score(lam, ka, noise_var, bp) for ka in range(ka_max + 1)]
    return int(np.argmin(scores))


def music_spectrum(noise_subspace: np.ndarray, pilot_cb: Codebook) -> np.ndarray:
    proj = noise_subspace.conj().T @ pilot_cb.signatures
    denom = np.sum(np.abs(proj) ** 2, axis=0)
    out = np.full(denom.shape, MUSIC_CAP)
    ok = denom >= MUSIC_FLOOR
    out[ok] = 1.0 / denom[ok]
    return out


def _top_indices(spectrum: np.ndarray, count: int) -> tuple:
    # stable sort on the negated spectrum: ties resolve to the lowest index
    order = np.argsort(-spectrum, kind="stable")
    return tuple(sorted(int(k) for k in order[:count]))


def music_active_set(r, pilot_cb: Codebook, ka: int, eig: EigenDecomposition = None) -> DetectionResult:
    r = np.asarray(r, dtype=complex)
    lp = r.shape[0]
    if not 1 <= ka < lp:
        raise ValueError(f"ka={ka} must satisfy 1 <= ka < L_p={lp}")
    if eig is None:
        eig = hermitian_eigendecompose(r)
    spectrum = music_spectrum(eig.eigenvectors[:, ka:], pilot_cb)
    return DetectionResult(ka, spectrum, _top_indices(spectrum, ka), eig.eigenvalues)


def detect(blocks, pilot_cb: Codebook, noise_var: float, ka_max: int = None) -> DetectionResult:
    """Autocorrelation, BIC estimate of the active count, then MUSIC selection."""
    r = sample_autocorrelation(blocks)
    bp = np.asarray(blocks).reshape(-1, r.shape[0]).shape[0]
    lp = r.shape[0]
    if ka_max is None:
        ka_max = min(lp - 1, pilot_cb.size)
    eig = hermitian_eigendecompose(r)
    ka = estimate_ka(eig.eigenvalues, noise_var, bp, ka_max)
    if ka == 0:
        spectrum = music_spectrum(eig.eigenvectors, pilot_cb)
        return DetectionResult(0, spectrum, (), eig.eigenvalues)
    return music_active_set(r, pilot_cb, ka, eig)
