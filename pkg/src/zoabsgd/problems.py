"""Strongly convex test objectives with certified constants.

Each problem carries an analytic gradient, its strong-convexity constant
``mu``, the gradient-Lipschitz constant ``L`` valid on a working ball of
radius ``radius`` around the minimizer, and Taylor/Hoelder data used to
bound the gradient-estimator bias.  Constants are certified empirically at
construction time: strong convexity, smoothness, gradient consistency and
the Hoelder remainder are each spot-checked at random ball points, so a
mis-specified constant fails fast instead of corrupting experiments.

The registry resolves names of the form ``quadratic-d<k>-cond<c>``,
``quartic-mix-d<k>`` and ``smooth-mix-d<k>``.
"""

from __future__ import annotations

import math
import re
import zlib
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable

import numpy as np

from .errors import ParameterError, UnknownProblemError, UnsupportedCertificationError
from .sampling import RandomStream

__all__ = [
    "Problem",
    "make_quadratic",
    "make_quartic_mix",
    "make_smooth_mix",
    "get_problem",
    "KIND_QUADRATIC",
    "KIND_QUARTIC",
    "KIND_SMOOTH",
]

# Fast-path encodings consumed by the accelerated run loop.
KIND_QUADRATIC = 0
KIND_QUARTIC = 1
KIND_SMOOTH = 2

_CERT_POINTS = 100


@dataclass(frozen=True, eq=False)
class Problem:
    """Objective with analytic gradient and certified constants."""

    name: str
    dim: int
    f: Callable[[np.ndarray], np.ndarray]
    grad: Callable[[np.ndarray], np.ndarray]
    mu: float
    L: float
    beta_native: float
    x_star: np.ndarray = field(repr=False)
    f_star: float
    radius: float
    kind: int
    params: np.ndarray = field(repr=False)
    # Taylor polynomial of given order around x, evaluated at z.
    taylor: Callable[[np.ndarray, np.ndarray, int], float] = field(repr=False)
    _holder: dict = field(repr=False)

    def __post_init__(self):
        self.x_star.setflags(write=False)
        self.params.setflags(write=False)

    @property
    def L_beta(self) -> float:
        """Hoelder constant at the problem's native smoothness order."""
        return self.holder_constant(self.beta_native)

    def holder_constant(self, beta: float) -> float:
        """Hoelder constant of the order-``beta`` Taylor remainder on the ball."""
        key = float(beta)
        if key not in self._holder:
            raise UnsupportedCertificationError(
                f"{self.name}: no Hoelder constant certified for beta={beta}"
            )
        return self._holder[key]

    def f_gap(self, x: np.ndarray) -> float:
        return float(self.f(x) - self.f_star)


def make_quadratic(dim: int, spectrum, x_star=None, name: str | None = None) -> Problem:
    """Diagonal quadratic f(x) = 1/2 (x - x*)^T diag(spectrum) (x - x*).

    ``mu``/``L`` are the extreme eigenvalues.  The order-2 Hoelder constant
    is L/2; for any higher order the Taylor polynomial is exact, so the
    constant is 0 and the two-point estimator is exactly unbiased.
    """
    spectrum = np.asarray(spectrum, dtype=float)
    if spectrum.shape != (dim,):
        raise ParameterError(f"spectrum must have length {dim}")
    if np.any(spectrum <= 0):
        raise ParameterError("quadratic spectrum must be strictly positive")
    x_star = _checked_x_star(dim, x_star)
    mu = float(spectrum.min())
    L = float(spectrum.max())

    def f(x):
        y = np.asarray(x, dtype=float) - x_star
        return 0.5 * np.sum(spectrum * y * y, axis=-1)

    def grad(x):
        return spectrum * (np.asarray(x, dtype=float) - x_star)

    def taylor(x, z, order):
        v = z - x
        val = f(x) + grad(x) @ v
        if order >= 2:
            val += 0.5 * np.sum(spectrum * v * v)
        return float(val)

    holder = {2.0: L / 2.0, 3.0: 0.0, 4.0: 0.0, 5.0: 0.0, 6.0: 0.0}
    return _certified(Problem(
        name=name or f"quadratic-d{dim}",
        dim=dim, f=f, grad=grad, mu=mu, L=L,
        beta_native=math.inf, x_star=x_star, f_star=0.0, radius=10.0,
        kind=KIND_QUADRATIC, params=spectrum, taylor=taylor, _holder=holder,
    ))


def make_quartic_mix(dim: int, mu: float, c4: float, radius: float,
                     x_star=None, name: str | None = None) -> Problem:
    """f(x) = mu/2 ||x - x*||^2 + c4 * sum_i (x_i - x_i*)^4.

    On the ball of radius R: L = mu + 12 c4 R^2.  The degree-3 Taylor
    remainder of a quartic is exactly the quartic term, so the order-4
    Hoelder constant is c4.
    """
    if mu <= 0 or c4 <= 0 or radius <= 0:
        raise ParameterError("mu, c4 and radius must be positive")
    x_star = _checked_x_star(dim, x_star)
    L = mu + 12.0 * c4 * radius**2

    def f(x):
        y = np.asarray(x, dtype=float) - x_star
        return 0.5 * mu * np.sum(y * y, axis=-1) + c4 * np.sum(y**4, axis=-1)

    def grad(x):
        y = np.asarray(x, dtype=float) - x_star
        return mu * y + 4.0 * c4 * y**3

    def taylor(x, z, order):
        y = x - x_star
        v = z - x
        val = f(x) + grad(x) @ v
        if order >= 2:
            val += 0.5 * np.sum((mu + 12.0 * c4 * y * y) * v * v)
        if order >= 3:
            val += 4.0 * c4 * np.sum(y * v**3)
        return float(val)

    holder = {2.0: L / 2.0, 4.0: c4}
    return _certified(Problem(
        name=name or f"quartic-mix-d{dim}",
        dim=dim, f=f, grad=grad, mu=mu, L=L,
        beta_native=4.0, x_star=x_star, f_star=0.0, radius=radius,
        kind=KIND_QUARTIC, params=np.array([mu, c4]), taylor=taylor, _holder=holder,
    ))


def make_smooth_mix(dim: int, mu: float, c: float, radius: float,
                    x_star=None, name: str | None = None) -> Problem:
    """f(x) = mu/2 ||x - x*||^2 + c * sum_i (cosh(x_i - x_i*) - 1).

    Infinitely differentiable with non-vanishing odd derivatives away from
    the minimizer, so kernel-estimator bias shows its full h^(beta-1) order
    here (a pure quartic cannot: its fifth derivative is identically zero).
    Hessian bounds on the ball give mu_eff = mu + c and L = mu + c cosh(R);
    order-n derivative magnitudes are bounded by c cosh(R).
    """
    if mu <= 0 or c <= 0 or radius <= 0:
        raise ParameterError("mu, c and radius must be positive")
    x_star = _checked_x_star(dim, x_star)
    L = mu + c * math.cosh(radius)

    def f(x):
        y = np.asarray(x, dtype=float) - x_star
        return 0.5 * mu * np.sum(y * y, axis=-1) + c * np.sum(np.cosh(y) - 1.0, axis=-1)

    def grad(x):
        y = np.asarray(x, dtype=float) - x_star
        return mu * y + c * np.sinh(y)

    def taylor(x, z, order):
        y = x - x_star
        v = z - x
        val = f(x) + grad(x) @ v
        if order >= 2:
            val += 0.5 * np.sum((mu + c * np.cosh(y)) * v * v)
        if order >= 3:
            val += c * np.sum(np.sinh(y) * v**3) / 6.0
        return float(val)

    holder = {
        2.0: L / 2.0,
        3.0: c * math.cosh(radius) / 6.0,
        4.0: c * math.cosh(radius) / 24.0,
    }
    return _certified(Problem(
        name=name or f"smooth-mix-d{dim}",
        dim=dim, f=f, grad=grad, mu=mu + c, L=L,
        beta_native=4.0, x_star=x_star, f_star=0.0, radius=radius,
        kind=KIND_SMOOTH, params=np.array([mu, c]), taylor=taylor, _holder=holder,
    ))


_QUADRATIC_RE = re.compile(r"^quadratic-d(\d+)-cond(\d+)$")
_QUARTIC_RE = re.compile(r"^quartic-mix-d(\d+)$")
_SMOOTH_RE = re.compile(r"^smooth-mix-d(\d+)$")


@lru_cache(maxsize=None)
def get_problem(name: str) -> Problem:
    """Resolve a registry name to a certified problem instance."""
    m = _QUADRATIC_RE.match(name)
    if m:
        dim, cond = int(m.group(1)), int(m.group(2))
        if dim < 1 or cond < 1:
            raise UnknownProblemError(f"bad quadratic parameters in {name!r}")
        spectrum = np.linspace(1.0, float(cond), dim) if dim > 1 else np.array([1.0])
        return make_quadratic(dim, spectrum, name=name)
    m = _QUARTIC_RE.match(name)
    if m:
        return make_quartic_mix(int(m.group(1)), mu=1.0, c4=1.0, radius=2.0, name=name)
    m = _SMOOTH_RE.match(name)
    if m:
        return make_smooth_mix(int(m.group(1)), mu=1.0, c=2.0, radius=2.0, name=name)
    raise UnknownProblemError(
        f"unknown problem {name!r}; expected quadratic-d<k>-cond<c>, "
        "quartic-mix-d<k> or smooth-mix-d<k>"
    )


def _checked_x_star(dim, x_star):
    if dim < 1:
        raise ParameterError(f"dimension must be >= 1, got {dim}")
    if x_star is None:
        return np.zeros(dim)
    x_star = np.asarray(x_star, dtype=float).copy()
    if x_star.shape != (dim,):
        raise ParameterError(f"x_star must have shape ({dim},)")
    return x_star


def _certified(p: Problem) -> Problem:
    """Self-certification gate run once per constructed problem."""
    if abs(float(p.f(p.x_star)) - p.f_star) > 1e-12:
        raise ParameterError(f"{p.name}: f(x_star) != f_star")
    stream = RandomStream(zlib.crc32(p.name.encode()), 0)
    ball = min(p.radius, 10.0)
    pts = p.x_star + ball * stream.uniform(-1.0, 1.0, (_CERT_POINTS, p.dim)) / math.sqrt(p.dim)
    slack = 1e-9

    for x, z in zip(pts[:-1], pts[1:]):
        fx, fz = float(p.f(x)), float(p.f(z))
        g = p.grad(x)
        v = z - x
        lin = fx + float(g @ v)
        scale = 1.0 + abs(fz)
        if fz < lin + 0.5 * p.mu * float(v @ v) - slack * scale:
            raise ParameterError(f"{p.name}: strong convexity check failed")
        if fz > lin + 0.5 * p.L * float(v @ v) + slack * scale:
            raise ParameterError(f"{p.name}: smoothness check failed")

    step = 1e-6
    for x in pts:
        g = p.grad(x)
        fd = np.empty(p.dim)
        for i in range(p.dim):
            ei = np.zeros(p.dim)
            ei[i] = step
            fd[i] = (float(p.f(x + ei)) - float(p.f(x - ei))) / (2 * step)
        if np.linalg.norm(g - fd) > 1e-6 * (1.0 + np.linalg.norm(g)):
            raise ParameterError(f"{p.name}: gradient vs finite differences failed")

    if math.isfinite(p.beta_native):
        order = math.ceil(p.beta_native) - 1
        L_beta = p.holder_constant(p.beta_native)
        for x, z in zip(pts[:-1], pts[1:]):
            rem = abs(float(p.f(z)) - p.taylor(x, z, order))
            bound = L_beta * float(np.linalg.norm(z - x)) ** p.beta_native
            if rem > bound * (1.0 + 1e-9) + 1e-12:
                raise ParameterError(f"{p.name}: Hoelder remainder check failed")
    return p
