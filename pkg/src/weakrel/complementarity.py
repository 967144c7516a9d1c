"""Weak values of non-commuting projectors and their product bound.

Finite dimensions: for eigenvectors |a>, |b> of two observables measured
weakly/strongly in opposite orders, the pair of projector weak values
multiplies to |<a|b>|^2 regardless of the pre-selected state.  Continuous
variables: the same statement for window projectors on a discretized
position/momentum grid, where full-support windows recover the product 1.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import OrthogonalPostselectionError
from .linalg import ATOL_CONSTRUCTION, ATOL_SPECTRAL, as_complex_vector, _frozen
from .model import EPS_OVERLAP
from .cvgrid import CVGrid, _check_domain, check_cv_normalization
from .relations import vaidman_decompose


@dataclass(frozen=True)
class ProjectorWeakValuePair:
    """Reciprocal pair of projector weak values and their product."""

    wv_a: complex
    wv_b: complex
    product: complex
    overlap_sq: float


def _checked_triple(psi, a_vec, b_vec):
    psi = as_complex_vector(psi, normalized=True)
    a_vec = as_complex_vector(a_vec, normalized=True)
    b_vec = as_complex_vector(b_vec, normalized=True)
    if not psi.shape == a_vec.shape == b_vec.shape:
        raise ValueError("psi, a_vec, b_vec must share one dimension")
    den_b = complex(np.vdot(b_vec, psi))
    den_a = complex(np.vdot(a_vec, psi))
    if abs(den_b) <= EPS_OVERLAP or abs(den_a) <= EPS_OVERLAP:
        raise OrthogonalPostselectionError(
            f"projector weak values need |<a|psi>|, |<b|psi>| > {EPS_OVERLAP:.1e}; "
            f"got {abs(den_a):.3e}, {abs(den_b):.3e}")
    return psi, a_vec, b_vec, den_a, den_b


def projector_weak_value_pair(psi, a_vec, b_vec) -> ProjectorWeakValuePair:
    """<Pi_a>_w with post-selection |b> paired with <Pi_b>_w post-selected on |a>.

    The product equals |<a|b>|^2 (real, at most 1) for every valid psi.
    """
    psi, a_vec, b_vec, den_a, den_b = _checked_triple(psi, a_vec, b_vec)
    ab = complex(np.vdot(a_vec, b_vec))  # <a|b>
    wv_a = np.conj(ab) * complex(np.vdot(a_vec, psi)) / den_b  # <b|a><a|psi>/<b|psi>
    wv_b = ab * complex(np.vdot(b_vec, psi)) / den_a
    product = wv_a * wv_b
    overlap_sq = float(abs(ab) ** 2)
    if abs(product.imag) > ATOL_SPECTRAL or product.real > 1.0 + ATOL_CONSTRUCTION:
        raise ValueError(
            f"projector weak-value product violated its bound: {product!r}")
    return ProjectorWeakValuePair(wv_a=complex(wv_a), wv_b=complex(wv_b),
                                  product=complex(product), overlap_sq=overlap_sq)


def wavefunction_bridge_check(psi, a_vec, b_vec) -> tuple[float, float]:
    """Residuals of the identities <Pi_a>_w^(b) psi(b) = <b|a> psi(a) and its mirror."""
    psi, a_vec, b_vec, den_a, den_b = _checked_triple(psi, a_vec, b_vec)
    pair = projector_weak_value_pair(psi, a_vec, b_vec)
    ba = complex(np.vdot(b_vec, a_vec))
    res1 = abs(pair.wv_a * den_b - ba * den_a)
    res2 = abs(pair.wv_b * den_a - np.conj(ba) * den_b)
    return float(res1), float(res2)


def anomalous_decomposition(psi, a_vec, b_vec) -> tuple[float, complex, float]:
    """Split <Pi_a>_w^(b) into the ordinary average plus an anomalous part.

    Returns (mean, anomalous, spread): mean = |psi(a)|^2, spread^2 =
    |psi(a)|^2 (1 - |psi(a)|^2), and anomalous = spread * <b|psibar_a>/<b|psi>
    built from the orthogonal Vaidman state of the projector.  mean +
    anomalous reconstructs the projector weak value.
    """
    psi, a_vec, b_vec, den_a, den_b = _checked_triple(psi, a_vec, b_vec)
    projector = np.outer(a_vec, a_vec.conj())
    parts = vaidman_decompose(psi, projector)
    mean = float(parts.mean.real)
    spread = parts.spread
    if parts.orthogonal_state is None:
        anomalous = 0.0 + 0.0j
    else:
        anomalous = spread * complex(np.vdot(b_vec, parts.orthogonal_state)) / den_b
    return mean, complex(anomalous), float(spread)


@dataclass(frozen=True)
class WindowProjector:
    """0/1 indicator projector over an interval of one grid domain.

    Membership uses the half-open rule [center - width/2, center + width/2)
    on sample points, so complementary windows partition the grid.
    """

    grid: CVGrid
    domain: str
    center: float
    width: float
    mask: np.ndarray

    @property
    def rank(self) -> int:
        return int(np.sum(self.mask))

    @property
    def full(self) -> bool:
        return bool(self.mask.all())

    def matrix(self) -> np.ndarray:
        """Diagonal 0/1 matrix in the window's own basis."""
        return np.diag(self.mask.astype(complex))

    def apply(self, coeffs: np.ndarray) -> np.ndarray:
        """Project a position-representation coefficient vector."""
        coeffs = np.asarray(coeffs, dtype=complex)
        if self.domain == "position":
            return self.mask * coeffs
        return self.grid.to_position(self.mask * self.grid.to_momentum(coeffs))


def window_projector(grid: CVGrid, domain: str, center: float, width: float) -> WindowProjector:
    if not width > 0:
        raise ValueError(f"window width must be positive, got {width}")
    domain = _check_domain(domain)
    pts = grid.samples(domain)
    mask = (pts >= center - width / 2.0) & (pts < center + width / 2.0)
    if not mask.any():
        raise ValueError(
            f"window [{center - width / 2.0}, {center + width / 2.0}) contains no grid samples")
    return WindowProjector(grid=grid, domain=domain, center=float(center),
                           width=float(width), mask=_frozen(mask))


def cv_weak_value(grid: CVGrid, psi_on_grid, window: WindowProjector,
                  postselect: int) -> complex:
    """Weak value of a window projector, post-selected on a conjugate-domain point.

    ``postselect`` indexes a sample of the domain conjugate to the window;
    the quotient of Riemann sums realizes <point|Pi|psi> / <point|psi>.
    """
    coeffs = check_cv_normalization(grid, psi_on_grid)
    n = grid.n_points
    if not 0 <= postselect < n:
        raise ValueError(f"postselect index {postselect} outside grid of {n} points")
    projected = window.apply(coeffs)
    if window.domain == "position":
        den = grid.to_momentum(coeffs)[postselect]
        num = grid.to_momentum(projected)[postselect]
    else:
        den = coeffs[postselect]
        num = projected[postselect]
    if abs(den) <= EPS_OVERLAP:
        raise OrthogonalPostselectionError(
            f"post-selection amplitude {abs(den):.3e} below {EPS_OVERLAP:.1e}")
    return complex(num / den)


def cv_product_study(grid: CVGrid, psi_on_grid, x_window_widths, p_window_widths,
                     x_post: float, p_post: float) -> list[dict]:
    """Products <Pi_dx>_w <Pi_dp>_w over a width table.

    Windows are centered on x = 0 and p = 0; ``p_post`` post-selects the
    position-window weak value and ``x_post`` the momentum-window one (both
    snapped to grid samples).  The product converges to 1 only as both
    windows approach full support; finite-window products are recorded, not
    asserted.
    """
    check_cv_normalization(grid, psi_on_grid)
    x_post_idx = grid.index_of("position", x_post)
    p_post_idx = grid.index_of("momentum", p_post)
    rows: list[dict] = []
    for wx in x_window_widths:
        win_x = window_projector(grid, "position", 0.0, float(wx))
        wv_x = cv_weak_value(grid, psi_on_grid, win_x, p_post_idx)
        for wp in p_window_widths:
            win_p = window_projector(grid, "momentum", 0.0, float(wp))
            wv_p = cv_weak_value(grid, psi_on_grid, win_p, x_post_idx)
            product = wv_x * wv_p
            rows.append({
                "x_width": float(wx),
                "p_width": float(wp),
                "weak_value_x": complex(wv_x),
                "weak_value_p": complex(wv_p),
                "product": complex(product),
                "abs_product_minus_one": float(abs(product - 1.0)),
                "x_window_full": win_x.full,
                "p_window_full": win_p.full,
            })
    return rows
