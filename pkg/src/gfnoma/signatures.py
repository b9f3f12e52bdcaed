"""Spreading codebooks and per-user masking sequences."""

from dataclasses import dataclass
from pathlib import Path

import numpy as np

NORM_TOL = 1e-10
LOAD_NORM_TOL = 1e-6


class CodebookError(ValueError):
    pass


@dataclass(frozen=True)
class Codebook:
    """Unit-norm signatures stored as the columns of a ``length x size`` matrix."""

    signatures: np.ndarray

    def __post_init__(self):
        s = np.asarray(self.signatures, dtype=complex)
        if s.ndim != 2 or min(s.shape) < 1:
            raise CodebookError(f"signature matrix must be 2-D and non-empty, got {s.shape}")
        norms = np.linalg.norm(s, axis=0)
        if np.max(np.abs(norms - 1.0)) > NORM_TOL:
            raise CodebookError("codebook columns must have unit norm")
        s = s.copy()
        s.flags.writeable = False
        object.__setattr__(self, "signatures", s)

    @property
    def length(self) -> int:
        return self.signatures.shape[0]

    @property
    def size(self) -> int:
        return self.signatures.shape[1]

    def __getitem__(self, k):
        return self.signatures[:, k]


def welch_bound(length: int, size: int) -> float:
    """Lower bound on the maximal cross-correlation of ``size`` unit vectors in C^length."""
    if size <= 1:
        return 0.0
    return float(np.sqrt(max(size - length, 0) / (length * (size - 1))))


def _max_offdiag(gram: np.ndarray) -> float:
    g = np.abs(gram).copy()
    np.fill_diagonal(g, 0.0)
    return float(g.max())


def coherence(cb: Codebook) -> float:
    """Maximal absolute inner product between two distinct signatures."""
    if cb.size < 2:
        raise CodebookError("coherence needs at least two signatures")
    s = cb.signatures
    return min(_max_offdiag(s.conj().T @ s), 1.0)


def _normalize_columns(x: np.ndarray) -> np.ndarray:
    return x / np.linalg.norm(x, axis=0, keepdims=True)


def generate_grassmannian(length: int, size: int, seed: int = 0, iterations: int = 1000) -> Codebook:
    """Low-coherence complex frame by alternating projection on the Gram matrix.

    Each iteration clips the off-diagonal Gram entries to a target coherence,
    projects back to the closest rank-``length`` PSD matrix, and refactors it
    into unit-norm columns. The target is tightened from the initial
    coherence toward the Welch bound. The best iterate
    is returned, so the result is never worse than the random start.
    """
    if length < 1 or size < 1:
        raise CodebookError("length and size must be positive")
    if size < length:
        raise CodebookError("only square or overloaded codebooks (size >= length) are supported")
    if length == size:
        # an orthonormal basis reaches zero coherence
        rng = np.random.default_rng(seed)
        z = rng.standard_normal((length, length)) + 1j * rng.standard_normal((length, length))
        q, r = np.linalg.qr(z)
        return Codebook(q * (np.diag(r) / np.abs(np.diag(r))))

    rng = np.random.default_rng(seed)
    x = _normalize_columns(rng.standard_normal((length, size)) + 1j * rng.standard_normal((length, size)))
    best = x
    best_mu = _max_offdiag(x.conj().T @ x)
    welch = welch_bound(length, size)

    for it in range(iterations):
        gram = x.conj().T @ x
        # shrink the clipping level from the current worst entry toward the bound
        target = welch + (best_mu - welch) * 0.5 * np.exp(-it / 200.0)
        mag = np.abs(gram)
        clip = mag > target
        gram[clip] = gram[clip] / mag[clip] * target
        np.fill_diagonal(gram, 1.0)
        # rank-length PSD projection; eigh here is plumbing, not the detector path
        w, u = np.linalg.eigh(gram)
        w = np.clip(w[-length:], 0.0, None)
        u = u[:, -length:]
        x = (np.sqrt(w)[:, None] * u.conj().T)
        x = _normalize_columns(x)
        mu = _max_offdiag(x.conj().T @ x)
        if mu < best_mu:
            best, best_mu = x, mu
    return Codebook(best)


def save_codebook(cb: Codebook, path) -> None:
    """Write ``"L K"`` then one ``"re im"`` line per entry in column-major order."""
    lines = [f"{cb.length} {cb.size}"]
    for z in cb.signatures.T.ravel():
        lines.append(f"{float(z.real)!r} {float(z.imag)!r}")
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def load_codebook(path) -> Codebook:
    text = Path(path).read_text(encoding="utf-8").split("\n")
    rows = [line.split() for line in text if line.strip()]
    try:
        length, size = (int(v) for v in rows[0])
        values = np.array([complex(float(re), float(im)) for re, im in rows[1:]])
    except (ValueError, IndexError) as exc:
        raise CodebookError(f"{path}: cannot parse codebook file") from exc
    if values.size != length * size:
        raise CodebookError(f"{path}: expected {length * size} entries, found {values.size}")
    s = values.reshape(size, length).T
    norms = np.linalg.norm(s, axis=0)
    if np.max(np.abs(norms - 1.0)) > LOAD_NORM_TOL:
        raise CodebookError(f"{path}: column norms deviate from 1 (worst {norms[np.argmax(np.abs(norms - 1))]:.6g})")
    # hand-written files may be off by text rounding; keep the values as read
    return _trusted_codebook(s)


def _trusted_codebook(s: np.ndarray) -> Codebook:
    cb = object.__new__(Codebook)
    s = np.array(s, dtype=complex)
    s.flags.writeable = False
    object.__setattr__(cb, "signatures", s)
    return cb


@dataclass(frozen=True)
class MaskingTable:
    """One +/-1 coefficient per user (row) and pilot-block position (column)."""

    entries: np.ndarray

    def __post_init__(self):
        e = np.asarray(self.entries, dtype=float)
        if e.ndim != 2 or not np.all(np.abs(e) == 1.0):
            raise ValueError("masking entries must form a 2-D array of +1/-1")
        e = e.copy()
        e.flags.writeable = False
        object.__setattr__(self, "entries", e)

    @property
    def num_users(self) -> int:
        return self.entries.shape[0]

    @property
    def num_blocks(self) -> int:
        return self.entries.shape[1]

    @classmethod
    def all_ones(cls, num_users: int, num_blocks: int) -> "MaskingTable":
        return cls(np.ones((num_users, num_blocks)))


def generate_masking(num_users: int, num_blocks: int, seed: int = 0) -> MaskingTable:
    if num_users < 1 or num_blocks < 1:
        raise ValueError("num_users and num_blocks must be positive")
    rng = np.random.default_rng(seed)
    return MaskingTable(rng.choice([-1.0, 1.0], size=(num_users, num_blocks)))
