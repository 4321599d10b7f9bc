"""Smoothing kernels for two-point gradient estimation.

A kernel of smoothness order ``beta >= 2`` is the unique polynomial K of
degree ``l`` (the largest integer strictly below beta) whose moments under
u ~ Uniform[-1, 1] satisfy

    E[K(u)] = 0,   E[u K(u)] = 1,   E[u^j K(u)] = 0  for j = 2..l.

It is assembled as a weighted sum of Legendre polynomials orthonormal for
the unweighted inner product on [-1, 1]; the moment system then holds by
construction.  Two constants accompany each kernel: ``kappa`` (the integral
of K^2, driving estimator variance) and ``kappa_beta`` (the integral of
|u|^beta |K(u)|, driving estimator bias).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from numpy.polynomial import legendre as _legendre
from numpy.polynomial import polynomial as _poly

from .errors import DomainError, InvalidSmoothnessError, ParameterError

__all__ = ["KernelSpec", "build_kernel", "eval_kernel", "kernel_moment"]

_QUAD_TOL = 1e-10


@dataclass(frozen=True, eq=False)
class KernelSpec:
    """Polynomial smoothing kernel with its bias/variance constants.

    Attributes:
        beta: smoothness order the kernel targets (>= 2).
        degree: polynomial degree, the largest integer strictly below beta.
        coeffs: monomial coefficients, low order first; length degree + 1.
        kappa: integral of K(u)^2 over [-1, 1].
        kappa_beta: integral of |u|^beta |K(u)| over [-1, 1].
    """

    beta: float
    degree: int
    coeffs: np.ndarray = field(repr=False)
    kappa: float
    kappa_beta: float

    def __post_init__(self):
        self.coeffs.setflags(write=False)


def _degree_for(beta: float) -> int:
    # "largest integer strictly less than beta": beta=2 -> 1, beta=2.5 -> 2.
    if float(beta).is_integer():
        return int(beta) - 1
    return math.ceil(beta) - 1


def build_kernel(beta: float) -> KernelSpec:
    """Construct the order-``beta`` kernel and its constants.

    The kernel is K(u) = 2 * sum_{m=0..l} p_m'(0) p_m(u) with
    p_m(u) = sqrt((2m+1)/2) L_m(u) the orthonormal Legendre polynomials.
    ``kappa`` is computed exactly from the monomial coefficients;
    ``kappa_beta`` by adaptive Simpson quadrature (|u|^beta is not a
    polynomial for fractional beta).

    Raises:
        InvalidSmoothnessError: if beta < 2.
    """
    if not np.isfinite(beta) or beta < 2:
        raise InvalidSmoothnessError(f"smoothness order must be >= 2, got {beta}")
    degree = _degree_for(beta)
    coeffs = np.zeros(degree + 1)
    for m in range(degree + 1):
        basis = np.zeros(m + 1)
        basis[m] = 1.0
        mono = _legendre.leg2poly(basis)
        deriv_at_zero = mono[1] if len(mono) > 1 else 0.0
        if deriv_at_zero == 0.0:
            continue
        # 2 * p_m'(0) * p_m(u) = (2m+1) * L_m'(0) * L_m(u)
        coeffs[: m + 1] += (2 * m + 1) * deriv_at_zero * mono
    kappa = _product_integral(coeffs, coeffs)
    kappa_beta = _abs_moment_integral(coeffs, beta)
    return KernelSpec(
        beta=float(beta),
        degree=degree,
        coeffs=coeffs,
        kappa=kappa,
        kappa_beta=kappa_beta,
    )


def eval_kernel(kernel: KernelSpec, u):
    """Evaluate K at ``u`` (scalar or array) with |u| <= 1."""
    u = np.asarray(u, dtype=float)
    if np.any(np.abs(u) > 1.0):
        raise DomainError("kernel argument must lie in [-1, 1]")
    value = _poly.polyval(u, kernel.coeffs)
    return float(value) if value.ndim == 0 else value


def kernel_moment(kernel: KernelSpec, j: int) -> float:
    """E[u^j K(u)] under u ~ Uniform[-1, 1], from exact coefficient algebra."""
    if j < 0:
        raise ParameterError(f"moment order must be >= 0, got {j}")
    total = 0.0
    for power, c in enumerate(kernel.coeffs):
        p = power + j
        if p % 2 == 0:
            total += c * 2.0 / (p + 1)
    return float(0.5 * total)


def _product_integral(a: np.ndarray, b: np.ndarray) -> float:
    """Integral over [-1, 1] of the product of two monomial polynomials."""
    total = 0.0
    for i, ai in enumerate(a):
        if ai == 0.0:
            continue
        for j, bj in enumerate(b):
            if bj == 0.0 or (i + j) % 2 == 1:
                continue
            total += ai * bj * 2.0 / (i + j + 1)
    return total


def _abs_moment_integral(coeffs: np.ndarray, beta: float) -> float:
    """Integral of |u|^beta |K(u)| over [-1, 1] by adaptive Simpson.

    The kernel has odd parity, so the integrand is even and we integrate
    2x over [0, 1], splitting at the kernel's real roots where |K| kinks.
    """
    def integrand(u):
        return u**beta * abs(_poly.polyval(u, coeffs))

    cuts = [0.0, 1.0]
    roots = np.roots(coeffs[::-1]) if len(coeffs) > 1 else np.array([])
    for r in roots:
        if abs(r.imag) < 1e-12 and 1e-12 < r.real < 1.0 - 1e-12:
            cuts.append(float(r.real))
    cuts = sorted(set(cuts))
    total = 0.0
    for lo, hi in zip(cuts[:-1], cuts[1:]):
        total += _adaptive_simpson(integrand, lo, hi, _QUAD_TOL)
    return 2.0 * total


def _adaptive_simpson(fn, a, b, tol, depth=50):
    fa, fm, fb = fn(a), fn(0.5 * (a + b)), fn(b)
    whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb)
    return _simpson_recurse(fn, a, b, fa, fm, fb, whole, tol, depth)


def _simpson_recurse(fn, a, b, fa, fm, fb, whole, tol, depth):
    m = 0.5 * (a + b)
    lm, rm = 0.5 * (a + m), 0.5 * (m + b)
    flm, frm = fn(lm), fn(rm)
    left = (m - a) / 6.0 * (fa + 4.0 * flm + fm)
    right = (b - m) / 6.0 * (fm + 4.0 * frm + fb)
    if depth <= 0 or abs(left + right - whole) <= 15.0 * tol:
        return left + right + (left + right - whole) / 15.0
    half = 0.5 * tol
    return _simpson_recurse(fn, a, m, fa, flm, fm, left, half, depth - 1) + \
        _simpson_recurse(fn, m, b, fm, frm, fb, right, half, depth - 1)
