"""Gaussian-kernel primitives shared by every learning criterion.

Everything here is a pure function: kernel evaluation, Parzen density
estimates built from error samples, the quadratic information potential,
and the sample correntropy estimate.  ``euclidean_gap_residual`` is a
quadrature oracle relating those quantities through the Euclidean distance
between an error density and the kernel itself; it exists so tests can
check the identity numerically.
"""

from __future__ import annotations

import math

import numpy as np

SQRT_2PI = math.sqrt(2.0 * math.pi)


def _check_sigma(sigma: float) -> float:
    sigma = float(sigma)
    if not math.isfinite(sigma) or sigma <= 0.0:
        raise ValueError(f"kernel bandwidth must be positive and finite, got {sigma!r}")
    return sigma


def gaussian_kernel(e, sigma: float):
    """Evaluate the Gaussian kernel (1 / (sqrt(2*pi)*sigma)) * exp(-e^2 / (2*sigma^2)).

    Parameters
    ----------
    e : float or ndarray
        Point(s) at which to evaluate the kernel.
    sigma : float
        Kernel bandwidth, must be positive.

    Returns
    -------
    float or ndarray, strictly positive, same shape as ``e``.
    """
    sigma = _check_sigma(sigma)
    arr = np.asarray(e, dtype=float)
    if not np.all(np.isfinite(arr)):
        raise ValueError("kernel argument must be finite")
    out = np.exp(-(arr * arr) / (2.0 * sigma * sigma)) / (SQRT_2PI * sigma)
    return float(out) if out.ndim == 0 else out


def parzen_pdf(e, errors, sigma: float):
    """Parzen window density estimate at ``e`` from a sequence of error samples.

    Returns the mean of ``gaussian_kernel(e - e_i, sigma)`` over the samples.
    ``e`` may be a scalar or a 1-D array of query points.
    """
    errs = np.asarray(errors, dtype=float)
    if errs.size == 0:
        raise ValueError("parzen_pdf requires at least one error sample")
    arr = np.asarray(e, dtype=float)
    if arr.ndim == 0:
        return float(np.mean(gaussian_kernel(arr - errs, sigma)))
    return np.mean(gaussian_kernel(arr[:, None] - errs[None, :], sigma), axis=1)


def information_potential(errors, sigma: float) -> float:
    """Quadratic information potential of an error sample: the double mean
    of pairwise kernel values ``G_sigma(e_i - e_j)``.

    Maximized (equal to ``gaussian_kernel(0, sigma)``) exactly when all
    samples coincide.  Pairwise differences make the value invariant under
    a common shift of all samples.
    """
    errs = np.asarray(errors, dtype=float)
    if errs.size == 0:
        raise ValueError("information_potential requires at least one error sample")
    diffs = errs[:, None] - errs[None, :]
    return float(np.sum(gaussian_kernel(diffs, sigma)) / (errs.size * errs.size))


def correntropy_estimate(errors, sigma: float) -> float:
    """Sample correntropy estimate: mean kernel value of the errors themselves.

    Identical to ``parzen_pdf(0, errors, sigma)`` by construction (same
    summation), so the two never disagree even in the last bit.
    """
    return parzen_pdf(0.0, errors, sigma)


def euclidean_gap_residual(pdf, sigma: float, grid: np.ndarray) -> float:
    """Residual of the identity linking information potential, correntropy
    and the Euclidean distance between a density and the Gaussian kernel:

        I2 + 1/(2*sigma*sqrt(pi)) = 2*v + D_ED(p, G_sigma)

    where I2 = integral of p^2, v = integral of p*G_sigma and D_ED is the
    squared-L2 distance.  All four terms are computed by trapezoidal
    quadrature on ``grid`` and the absolute residual is returned.  Used as
    a test oracle only.

    Parameters
    ----------
    pdf : callable
        Vectorized density; must integrate to 1 on the grid within 1e-6.
    sigma : float
        Kernel bandwidth.
    grid : ndarray
        Ascending 1-D quadrature grid covering the density's support.
    """
    sigma = _check_sigma(sigma)
    grid = np.asarray(grid, dtype=float)
    if grid.ndim != 1 or grid.size < 2:
        raise ValueError("quadrature grid must be a 1-D array with at least 2 points")
    p = np.asarray(pdf(grid), dtype=float)
    mass = float(np.trapezoid(p, grid))
    if abs(mass - 1.0) > 1e-6:
        raise ValueError(
            f"density integrates to {mass!r} on the grid; need 1 within 1e-6 "
            "(grid too coarse or too narrow)"
        )
    g = gaussian_kernel(grid, sigma)
    i2 = float(np.trapezoid(p * p, grid))
    v = float(np.trapezoid(p * g, grid))
    d_ed = float(np.trapezoid((p - g) ** 2, grid))
    kernel_energy = 1.0 / (2.0 * sigma * math.sqrt(math.pi))
    return abs(i2 + kernel_energy - 2.0 * v - d_ed)
