"""Pre/post-selected ensembles, weak values, and the weak operator.

The central object is the non-Hermitian operator attached to an observable A
and an ensemble (|psi>, |phi>): ``A_w = |phi><phi| A / k`` with
``k = |<phi|psi>|^2``.  Its average in the pre-selected state is the weak
value ``<phi|A|psi>/<phi|psi>``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import OrthogonalPostselectionError, ShapeError
from .linalg import (
    ATOL_CONSTRUCTION,
    ATOL_SPECTRAL,
    Eigensystem,
    as_complex_matrix,
    as_complex_vector,
    eigendecompose_hermitian,
    fingerprint,
    _frozen,
)

# Ensembles with post-selection overlap k at or below this are rejected:
# every weak quantity divides by <phi|psi>, and k ~ 0 makes the downstream
# variances numerically meaningless.
EPS_OVERLAP = 1e-10


@dataclass(frozen=True)
class Observable:
    """Hermitian matrix with its cached spectral decomposition."""

    matrix: np.ndarray
    spectrum: Eigensystem

    @classmethod
    def from_matrix(cls, matrix, *, atol: float = ATOL_CONSTRUCTION) -> "Observable":
        m = as_complex_matrix(matrix, hermitian=True, atol=atol)
        spec = eigendecompose_hermitian(m, atol=atol)
        # orthonormal columns <=> the group projectors built from them are
        # idempotent and resolve the identity
        gram_dev = float(np.max(np.abs(
            spec.eigenvectors.conj().T @ spec.eigenvectors - np.eye(m.shape[0]))))
        if gram_dev > ATOL_SPECTRAL:
            raise ValueError(f"eigenvector columns not orthonormal: residual {gram_dev:.3e}")
        return cls(matrix=m, spectrum=spec)

    @classmethod
    def from_spectrum(cls, eigenvalues, eigenvectors,
                      *, atol: float = ATOL_SPECTRAL) -> "Observable":
        """Build an observable from a known spectral decomposition.

        Used where the spectrum is available analytically (grid momentum
        operators); avoids re-diagonalizing and keeps the stored spectrum
        exact.
        """
        vals = np.asarray(eigenvalues, dtype=float)
        vecs = np.asarray(eigenvectors, dtype=complex)
        if vecs.ndim != 2 or vecs.shape[0] != vecs.shape[1] or vals.shape != (vecs.shape[0],):
            raise ShapeError("eigenvalues/eigenvectors shapes are inconsistent")
        order = np.argsort(vals, kind="stable")
        vals, vecs = vals[order], vecs[:, order]
        gram_dev = float(np.max(np.abs(vecs.conj().T @ vecs - np.eye(vecs.shape[0]))))
        if gram_dev > atol:
            raise ValueError(f"eigenvector columns not orthonormal: residual {gram_dev:.3e}")
        mat = (vecs * vals) @ vecs.conj().T
        mat = (mat + mat.conj().T) / 2.0  # exact hermiticity despite roundoff
        groups = tuple((i,) for i in range(vals.size))
        spec = Eigensystem(_frozen(vals), _frozen(vecs), groups)
        return cls(matrix=_frozen(mat), spectrum=spec)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    @property
    def eigenvalues(self) -> np.ndarray:
        return self.spectrum.eigenvalues

    @property
    def eigenvectors(self) -> np.ndarray:
        return self.spectrum.eigenvectors

    def spectral_projectors(self) -> list[tuple[float, np.ndarray]]:
        """(eigenvalue, projector) per degenerate group; Sum_a a Pi_a = matrix."""
        out = []
        for group in self.spectrum.groups:
            cols = self.spectrum.eigenvectors[:, list(group)]
            value = float(np.mean(self.spectrum.eigenvalues[list(group)]))
            out.append((value, cols @ cols.conj().T))
        return out

    def expectation(self, state: np.ndarray) -> float:
        state = as_complex_vector(state, normalized=True)
        if state.size != self.dim:
            raise ShapeError("state dimension does not match observable")
        return float(np.vdot(state, self.matrix @ state).real)

    def variance(self, state: np.ndarray) -> float:
        state = as_complex_vector(state, normalized=True)
        if state.size != self.dim:
            raise ShapeError("state dimension does not match observable")
        shifted = self.matrix @ state - np.vdot(state, self.matrix @ state) * state
        return float(np.vdot(shifted, shifted).real)


@dataclass(frozen=True)
class PPSEnsemble:
    """Pre- and post-selected ensemble: |psi>, |phi>, and k = |<phi|psi>|^2."""

    pre: np.ndarray
    post: np.ndarray
    overlap_k: float

    @property
    def dim(self) -> int:
        return self.pre.size

    @property
    def post_inner_pre(self) -> complex:
        """<phi|psi>, the denominator of every weak value in this ensemble."""
        return complex(np.vdot(self.post, self.pre))


def pps_ensemble(pre, post, *, eps_overlap: float = EPS_OVERLAP) -> PPSEnsemble:
    """Validate and pack a pre/post-selection pair.

    Raises OrthogonalPostselectionError when k = |<phi|psi>|^2 <= eps_overlap.
    """
    pre = as_complex_vector(pre, normalized=True)
    post = as_complex_vector(post, normalized=True)
    if pre.shape != post.shape:
        raise ShapeError(f"dim mismatch: pre {pre.shape} vs post {post.shape}")
    k = float(abs(np.vdot(post, pre)) ** 2)
    if k <= eps_overlap:
        raise OrthogonalPostselectionError(
            f"post-selection overlap k = {k:.3e} <= {eps_overlap:.1e}")
    return PPSEnsemble(pre=pre, post=post, overlap_k=k)


@dataclass(frozen=True)
class WeakValue:
    """A weak value with fingerprints tying it to its inputs."""

    value: complex
    ensemble_fingerprint: str
    observable_fingerprint: str


@dataclass(frozen=True)
class WeakOperator:
    """The non-Hermitian matrix |phi><phi| A / k plus its provenance."""

    matrix: np.ndarray
    ensemble: PPSEnsemble
    parent: Observable

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]


def _check_dims(ens: PPSEnsemble, A: Observable) -> None:
    if ens.dim != A.dim:
        raise ShapeError(f"ensemble dim {ens.dim} does not match observable dim {A.dim}")


def weak_value(ens: PPSEnsemble, A: Observable) -> WeakValue:
    """<phi|A|psi> / <phi|psi> as plain complex arithmetic."""
    _check_dims(ens, A)
    denom = ens.post_inner_pre
    if abs(denom) ** 2 <= EPS_OVERLAP:  # unreachable through pps_ensemble
        raise OrthogonalPostselectionError("vanishing post-selection overlap")
    value = complex(np.vdot(ens.post, A.matrix @ ens.pre) / denom)
    return WeakValue(
        value=value,
        ensemble_fingerprint=fingerprint(ens.pre, ens.post),
        observable_fingerprint=fingerprint(A.matrix),
    )


def weak_operator(ens: PPSEnsemble, A: Observable) -> WeakOperator:
    """Materialize A_w = |phi><phi| A / k and check its defining properties.

    (ii) A_w|psi> = <A>_w c |phi> with c = 1/<psi|phi>, and
    (iii) A_w|phi> = (<phi|A|phi>/k)|phi>; both asserted to 1e-10 along with
    the outer-product structure.
    """
    _check_dims(ens, A)
    k = ens.overlap_k
    bra_phi_A = ens.post.conj() @ A.matrix
    matrix = np.outer(ens.post, bra_phi_A) / k

    wv = weak_value(ens, A).value
    # property (ii): A_w psi = wv * (1/<psi|phi>) phi
    c = 1.0 / np.vdot(ens.pre, ens.post)
    res_ii = float(np.linalg.norm(matrix @ ens.pre - wv * c * ens.post))
    # property (iii): phi is an eigenvector with eigenvalue <phi|A|phi>/k
    eig_phi = np.vdot(ens.post, A.matrix @ ens.post) / k
    res_iii = float(np.linalg.norm(matrix @ ens.post - eig_phi * ens.post))
    scale = max(1.0, float(np.linalg.norm(matrix, ord=2)))
    if res_ii > ATOL_SPECTRAL * scale or res_iii > ATOL_SPECTRAL * scale:
        raise ValueError(
            f"weak operator property residuals too large: (ii) {res_ii:.3e}, (iii) {res_iii:.3e}")
    return WeakOperator(matrix=_frozen(matrix), ensemble=ens, parent=A)


def adjoint_weak_operator(w: WeakOperator) -> np.ndarray:
    """Conjugate transpose of the weak operator; <psi|A_w^dag|psi> = <A>_w*."""
    return _frozen(w.matrix.conj().T)
