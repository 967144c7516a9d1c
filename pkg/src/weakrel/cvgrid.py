"""Uniform position grid with its discrete-Fourier momentum dual.

Wavefunctions live on cell-centered samples x_k = x_min + (k + 1/2) dx and
are normalized under the dx quadrature weight; "coefficient" vectors are
sqrt(dx)-scaled samples, so plain l2 inner products realize the Riemann-sum
integrals and the x<->p change of basis is an exactly unitary matrix.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ContractViolationError, ShapeError
from .linalg import ATOL_SPECTRAL, _frozen
from .model import Observable


@dataclass(frozen=True)
class CVGrid:
    """Discretized position/momentum pair of bases."""

    n_points: int
    x_min: float
    x_max: float
    dx: float
    dp: float
    hbar: float
    x_samples: np.ndarray
    p_samples: np.ndarray
    transform: np.ndarray  # position coefficients -> momentum coefficients

    def to_momentum(self, coeffs: np.ndarray) -> np.ndarray:
        return self.transform @ np.asarray(coeffs, dtype=complex)

    def to_position(self, coeffs: np.ndarray) -> np.ndarray:
        return self.transform.conj().T @ np.asarray(coeffs, dtype=complex)

    def coefficients_from_samples(self, values, domain: str = "position") -> np.ndarray:
        """sqrt(weight)-scaled samples; unit l2 norm <=> unit quadrature norm."""
        weight = self.dx if _check_domain(domain) == "position" else self.dp
        return np.asarray(values, dtype=complex) * np.sqrt(weight)

    def samples_from_coefficients(self, coeffs, domain: str = "position") -> np.ndarray:
        weight = self.dx if _check_domain(domain) == "position" else self.dp
        return np.asarray(coeffs, dtype=complex) / np.sqrt(weight)

    def samples(self, domain: str) -> np.ndarray:
        return self.x_samples if _check_domain(domain) == "position" else self.p_samples

    def index_of(self, domain: str, value: float) -> int:
        """Index of the grid sample nearest to ``value`` (points are samples only)."""
        pts = self.samples(domain)
        idx = int(np.argmin(np.abs(pts - value)))
        spacing = self.dx if _check_domain(domain) == "position" else self.dp
        if abs(pts[idx] - value) > spacing:
            raise ValueError(f"{value} lies outside the {domain} grid support")
        return idx

    def basis_point_state(self, domain: str, index: int) -> np.ndarray:
        """Position-representation coefficient vector of one grid basis point."""
        n = self.n_points
        if not 0 <= index < n:
            raise ValueError(f"index {index} outside grid of {n} points")
        e = np.zeros(n, dtype=complex)
        e[index] = 1.0
        if _check_domain(domain) == "position":
            return _frozen(e)
        return _frozen(self.transform.conj().T @ e)

    def position_operator(self) -> Observable:
        return Observable.from_spectrum(self.x_samples, np.eye(self.n_points, dtype=complex))

    def momentum_operator(self) -> Observable:
        return Observable.from_spectrum(self.p_samples, self.transform.conj().T)

    def gaussian(self, center: float = 0.0, sigma: float = 1.0,
                 momentum: float = 0.0) -> np.ndarray:
        """Gaussian wavepacket samples, normalized under the dx weight."""
        if not sigma > 0:
            raise ValueError(f"sigma must be positive, got {sigma}")
        x = self.x_samples
        psi = np.exp(-((x - center) ** 2) / (2.0 * sigma ** 2)
                     + 1j * momentum * x / self.hbar)
        psi = psi / (np.linalg.norm(psi) * np.sqrt(self.dx))
        return _frozen(psi)


def _check_domain(domain: str) -> str:
    if domain not in ("position", "momentum"):
        raise ValueError(f"domain must be 'position' or 'momentum', got {domain!r}")
    return domain


def build_cv_grid(n_points: int, x_min: float, x_max: float,
                  hbar: float = 1.0) -> CVGrid:
    """Build the dual grid pair with a unitary centered Fourier transform.

    dp = 2*pi*hbar / (n*dx) and the momentum samples span (-pi*hbar/dx,
    pi*hbar/dx]; the transform matrix (1/sqrt(n)) exp(-i p_j x_k / hbar)
    is exactly unitary for these sample placements.
    """
    if n_points < 16 or (n_points & (n_points - 1)) != 0:
        raise ValueError(f"n_points must be a power of two >= 16, got {n_points}")
    if not x_max > x_min:
        raise ValueError(f"need x_max > x_min, got [{x_min}, {x_max}]")
    if not hbar > 0:
        raise ValueError(f"hbar must be positive, got {hbar}")

    n = int(n_points)
    dx = (x_max - x_min) / n
    dp = 2.0 * np.pi * hbar / (n * dx)
    x = x_min + (np.arange(n) + 0.5) * dx
    p = (np.arange(n) + 1.0 - n / 2.0) * dp

    transform = np.exp(-1j * np.outer(p, x) / hbar) / np.sqrt(n)
    unit_dev = float(np.max(np.abs(transform.conj().T @ transform - np.eye(n))))
    if unit_dev > ATOL_SPECTRAL:
        raise ContractViolationError(f"transform unitarity residual {unit_dev:.3e}")

    return CVGrid(
        n_points=n, x_min=float(x_min), x_max=float(x_max), dx=float(dx),
        dp=float(dp), hbar=float(hbar), x_samples=_frozen(x), p_samples=_frozen(p),
        transform=_frozen(transform),
    )


def check_cv_normalization(grid: CVGrid, psi_samples: np.ndarray,
                           atol: float = ATOL_SPECTRAL) -> np.ndarray:
    """Validate dx-weighted normalization and return position coefficients."""
    psi = np.asarray(psi_samples, dtype=complex)
    if psi.shape != (grid.n_points,):
        raise ShapeError(f"expected {grid.n_points} samples, got shape {psi.shape}")
    coeffs = grid.coefficients_from_samples(psi)
    if abs(np.linalg.norm(coeffs) - 1.0) > atol:
        raise ContractViolationError(
            "psi_on_grid is not normalized under the dx weight "
            f"(deviation {abs(np.linalg.norm(coeffs) - 1.0):.3e})")
    return coeffs
