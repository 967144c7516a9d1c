"""Dense complex linear algebra, sampling, and vector utilities.

Everything in here operates on plain numpy arrays: complex vectors are 1-D
``complex128`` arrays, complex matrices are square 2-D ``complex128`` arrays.
Validated arrays are returned read-only so they can be shared freely between
sweep workers.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass

import numpy as np

from .errors import ContractViolationError, ShapeError

# Centralized tolerances.  Construction-level checks (normalization,
# hermiticity) sit at 1e-12, spectral residuals at 1e-10, and inequality
# slack at 1e-9; the harness config can override the slack knob.
ATOL_CONSTRUCTION = 1e-12
ATOL_SPECTRAL = 1e-10
ATOL_RELATION = 1e-9
DEGENERACY_RTOL = 1e-9

MAX_SEED = 2**64


def _frozen(arr: np.ndarray) -> np.ndarray:
    out = np.array(arr)
    out.setflags(write=False)
    return out


def as_complex_vector(entries, *, normalized: bool = False,
                      atol: float = ATOL_CONSTRUCTION) -> np.ndarray:
    """Validate a 1-D complex vector: finite entries, dim >= 1.

    With ``normalized=True`` additionally require | ||v|| - 1 | <= atol.
    Returns a read-only complex128 copy.
    """
    v = np.asarray(entries, dtype=complex)
    if v.ndim != 1 or v.size < 1:
        raise ShapeError(f"expected a 1-D vector with dim >= 1, got shape {v.shape}")
    if not np.isfinite(v).all():
        raise ValueError("vector has non-finite entries")
    if normalized and abs(np.linalg.norm(v) - 1.0) > atol:
        raise ContractViolationError(
            f"vector flagged normalized but | ||v|| - 1 | = {abs(np.linalg.norm(v) - 1.0):.3e}")
    return _frozen(v)


def as_complex_matrix(entries, *, hermitian: bool = False,
                      atol: float = ATOL_CONSTRUCTION) -> np.ndarray:
    """Validate a square complex matrix; optionally require hermiticity.

    The hermitian flag demands max|M - M^dag| <= atol entrywise.
    """
    m = np.asarray(entries, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] < 1:
        raise ShapeError(f"expected a square matrix, got shape {m.shape}")
    if not np.isfinite(m).all():
        raise ValueError("matrix has non-finite entries")
    if hermitian:
        dev = float(np.max(np.abs(m - m.conj().T)))
        if dev > atol:
            raise ContractViolationError(
                f"matrix flagged hermitian but max|M - M^dag| = {dev:.3e} > {atol:.1e}")
    return _frozen(m)


def state_vector(entries) -> np.ndarray:
    """Normalize a complex amplitude vector into a read-only state vector."""
    v = np.asarray(entries, dtype=complex)
    if v.ndim != 1 or v.size < 1:
        raise ShapeError(f"expected a 1-D vector with dim >= 1, got shape {v.shape}")
    if not np.isfinite(v).all():
        raise ValueError("state has non-finite entries")
    nrm = np.linalg.norm(v)
    if nrm == 0.0:
        raise ValueError("cannot normalize the zero vector")
    return _frozen(v / nrm)


def fingerprint(*arrays) -> str:
    """Short deterministic hash of arrays/scalars, used to attribute results
    to their inputs without storing copies."""
    h = hashlib.sha256()
    for a in arrays:
        if isinstance(a, np.ndarray):
            arr = np.ascontiguousarray(a)
            h.update(str(arr.dtype).encode())
            h.update(str(arr.shape).encode())
            h.update(arr.tobytes())
        else:
            h.update(repr(a).encode())
        h.update(b"|")
    return h.hexdigest()[:16]


def _check_seed(seed: int) -> int:
    if not isinstance(seed, (int, np.integer)) or not 0 <= int(seed) < MAX_SEED:
        raise ValueError(f"seed must be an integer in [0, 2**64), got {seed!r}")
    return int(seed)


def rng_from_seed(seed: int, *path: int) -> np.random.Generator:
    """Generator for ``seed`` with an optional derivation path.

    Sub-streams are split as SeedSequence(seed, spawn_key=path), so e.g.
    trial (dim, index) of a sweep regenerates identically regardless of
    scheduling order.
    """
    seq = np.random.SeedSequence(_check_seed(seed), spawn_key=tuple(int(p) for p in path))
    return np.random.default_rng(seq)


def haar_random_state_rng(dim: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-distributed pure state drawn from an existing generator."""
    if dim < 1:
        raise ValueError(f"dim must be >= 1, got {dim}")
    while True:
        v = rng.standard_normal(dim) + 1j * rng.standard_normal(dim)
        nrm = np.linalg.norm(v)
        if nrm > 0.0:  # zero draw has probability 0 but guard anyway
            return _frozen(v / nrm)


def haar_random_state(dim: int, seed: int) -> np.ndarray:
    """Normalized standard-complex-Gaussian vector; Haar invariant under any
    fixed unitary.  Deterministic in (dim, seed)."""
    return haar_random_state_rng(dim, rng_from_seed(seed))


def random_hermitian_rng(dim: int, rng: np.random.Generator,
                         scale: float = 1.0) -> np.ndarray:
    """GUE-style Hermitian matrix (G + G^dag)/2 from an existing generator."""
    if dim < 1:
        raise ValueError(f"dim must be >= 1, got {dim}")
    if not scale > 0:
        raise ValueError(f"scale must be positive, got {scale}")
    g = scale * (rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim)))
    return _frozen((g + g.conj().T) / 2.0)


def random_hermitian(dim: int, seed: int, scale: float = 1.0) -> np.ndarray:
    """Random Hermitian matrix, Hermitian exactly by construction.

    Deterministic in (dim, seed, scale).
    """
    return random_hermitian_rng(dim, rng_from_seed(seed), scale)


def orthogonal_component(anchor: np.ndarray, v: np.ndarray) -> tuple[np.ndarray, float]:
    """Part of ``v`` orthogonal to a normalized ``anchor``.

    Returns (component, norm) with component = v - <anchor|v> anchor left
    unnormalized; <anchor|component> vanishes to roundoff.
    """
    anchor = as_complex_vector(anchor, normalized=True)
    v = np.asarray(v, dtype=complex)
    if v.shape != anchor.shape:
        raise ShapeError(f"dim mismatch: anchor {anchor.shape} vs v {v.shape}")
    comp = v - np.vdot(anchor, v) * anchor
    return _frozen(comp), float(np.linalg.norm(comp))


@dataclass(frozen=True)
class Eigensystem:
    """Spectral decomposition of a Hermitian matrix.

    eigenvalues are ascending; eigenvector i is ``eigenvectors[:, i]``;
    ``groups`` partitions the indices into (near-)degenerate clusters, each
    cluster standing for one spectral projector.
    """

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    groups: tuple[tuple[int, ...], ...]

    @property
    def dim(self) -> int:
        return self.eigenvalues.size


def eigendecompose_hermitian(H: np.ndarray, *, atol: float = ATOL_CONSTRUCTION) -> Eigensystem:
    """Eigendecompose a Hermitian matrix with a reproducible phase convention.

    Each eigenvector is scaled so its largest-modulus entry is real positive.
    Eigenvalues within DEGENERACY_RTOL * max(1, ||H||) of each other are
    grouped into one spectral projector.  Raises ContractViolationError for
    non-Hermitian input.
    """
    H = as_complex_matrix(H, hermitian=True, atol=atol)
    vals, vecs = np.linalg.eigh(H)
    # global phase: largest-modulus entry real positive
    idx = np.argmax(np.abs(vecs), axis=0)
    lead = vecs[idx, np.arange(vecs.shape[1])]
    phase = lead / np.abs(lead)
    vecs = vecs / phase[np.newaxis, :]

    gap_tol = DEGENERACY_RTOL * max(1.0, float(np.abs(vals).max(initial=0.0)))
    groups: list[tuple[int, ...]] = []
    current = [0]
    for i in range(1, vals.size):
        if vals[i] - vals[i - 1] <= gap_tol:
            current.append(i)
        else:
            groups.append(tuple(current))
            current = [i]
    groups.append(tuple(current))
    return Eigensystem(_frozen(vals), _frozen(vecs), tuple(groups))
