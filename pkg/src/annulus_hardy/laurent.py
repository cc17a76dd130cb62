"""Analytic functions on the closed annulus as finite Laurent polynomials.

``f(z) = sum_{n=-N}^{N} a_n z^n``. The non-negative part is the piece
analytic in the unit disk and the negative part the piece analytic outside
``s D`` vanishing at infinity.

Besides evaluation, derivatives and radial primitives, this module holds the
pointwise tools built on the annulus Poisson kernel: harmonic extension of
boundary data, the Poisson-Jensen slack, and the two log-space bounds on
``|f(z)|`` and on the radial primitive ``F_t``.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from . import kernel as K
from .boundary import (
    INNER,
    OUTER,
    BoundaryArc,
    BoundaryGrid,
    l1_norm_on_arc,
    log_l1_norm_on_arc,
    sup_norm_boundary,
)
from .errors import DomainError, HypothesisError, PreconditionError, ZeroOnBoundaryError

_EDGE_SLACK = 1e-12


@dataclass(frozen=True, eq=False)
class LaurentFunction:
    """Laurent polynomial on ``{s <= |z| <= 1}``; ``coeffs[n + N]`` multiplies ``z**n``."""

    s: float
    coeffs: np.ndarray

    def __post_init__(self):
        K.AnnulusGeometry(self.s)  # validates s
        c = np.array(self.coeffs, dtype=complex).ravel()
        if c.size % 2 == 0:
            raise PreconditionError("coefficient vector must have odd length 2N+1")
        c.setflags(write=False)
        object.__setattr__(self, "s", float(self.s))
        object.__setattr__(self, "coeffs", c)

    # construction -----------------------------------------------------------

    @classmethod
    def from_terms(cls, s, terms):
        """Build from a mapping ``{n: a_n}``."""
        terms = dict(terms)
        N = max((abs(int(n)) for n in terms), default=0)
        c = np.zeros(2 * N + 1, dtype=complex)
        for n, a in terms.items():
            c[int(n) + N] += a
        return cls(s, c)

    @classmethod
    def monomial(cls, s, n, a=1.0):
        return cls.from_terms(s, {n: a})

    @classmethod
    def constant(cls, s, a):
        return cls(s, [a])

    # basic structure --------------------------------------------------------

    @property
    def N(self) -> int:
        return (self.coeffs.size - 1) // 2

    @property
    def geometry(self):
        return K.AnnulusGeometry(self.s)

    @property
    def degrees(self) -> np.ndarray:
        return np.arange(-self.N, self.N + 1)

    def coefficient(self, n):
        n = int(n)
        return self.coeffs[n + self.N] if abs(n) <= self.N else 0j

    def is_zero(self) -> bool:
        return not np.any(self.coeffs)

    def _with(self, coeffs):
        return LaurentFunction(self.s, coeffs)

    def __mul__(self, c):
        return self._with(self.coeffs * complex(c))

    __rmul__ = __mul__

    def __truediv__(self, c):
        return self._with(self.coeffs / complex(c))

    def __add__(self, other):
        if not isinstance(other, LaurentFunction):
            return self + LaurentFunction.constant(self.s, other)
        if other.s != self.s:
            raise PreconditionError("cannot add functions on different annuli")
        N = max(self.N, other.N)
        c = np.zeros(2 * N + 1, dtype=complex)
        c[N - self.N:N + self.N + 1] += self.coeffs
        c[N - other.N:N + other.N + 1] += other.coeffs
        return self._with(c)

    def __sub__(self, other):
        return self + (-1.0) * other

    # evaluation -------------------------------------------------------------

    def _check_closed(self, z):
        mod = np.abs(z)
        if np.any(mod < self.s * (1 - _EDGE_SLACK)) or np.any(mod > 1 + _EDGE_SLACK):
            raise DomainError(f"point outside the closed annulus {self.s} <= |z| <= 1")

    def eval(self, z):
        """Horner evaluation of the two one-sided parts."""
        z = np.asarray(z, dtype=complex)
        self._check_closed(z)
        N = self.N
        pos = np.polyval(self.coeffs[N:][::-1], z)
        if N:
            w = 1.0 / z
            pos = pos + w * np.polyval(self.coeffs[:N], w)
        return pos[()] if pos.ndim == 0 else pos

    __call__ = eval

    def derivative(self, order=1):
        """Exact complex derivative: ``a_n z^n -> n a_n z^(n-1)``."""
        f = self
        for _ in range(order):
            N = f.N
            n = f.degrees
            c = np.zeros(2 * (N + 1) + 1, dtype=complex)
            # a_n z^n -> n a_n z^{n-1}, index (n-1) + (N+1) = n + N
            c[n + N] = n * f.coeffs
            f = LaurentFunction(f.s, c)
        return f

    def circle_values(self, r, M):
        """Samples ``f(r e^{i theta_m})`` on ``theta_m = 2 pi m / M`` by FFT.

        Degrees are folded modulo ``M`` first, which is exact at the nodes.
        """
        M = int(M)
        n = self.degrees
        with np.errstate(over="ignore"):
            b = self.coeffs * float(r) ** n
        buf = np.zeros(M, dtype=complex)
        np.add.at(buf, np.mod(n, M), b)
        return M * np.fft.ifft(buf)

    def sup_on_circle(self, r, M=1024, certified=False):
        """Grid maximum of ``|f|`` on the circle of radius ``r``.

        With ``certified=True`` the grid maximum is divided by
        ``1 - N pi / M`` (Bernstein's inequality for trigonometric
        polynomials of degree N), which makes it an upper bound.
        """
        M = int(M)
        top = float(np.abs(self.circle_values(r, M)).max())
        if certified:
            gap = 1.0 - self.N * math.pi / M
            if gap <= 0:
                raise PreconditionError("M too small for a certified sup; need M > pi N")
            top /= gap
        return top

    def trace(self, M=1024):
        """Boundary samples on both circles as a :class:`BoundaryGrid`."""
        return BoundaryGrid(M, self.circle_values(self.s, M), self.circle_values(1.0, M))

    def zeros(self):
        """All zeros of ``z^N f(z)`` other than those at the origin."""
        c = np.trim_zeros(self.coeffs[::-1], "f")
        if c.size <= 1:
            return np.zeros(0, dtype=complex)
        roots = np.roots(c)
        return roots[roots != 0]

    # serialisation ----------------------------------------------------------

    def to_dict(self):
        terms = [[int(n), float(a.real), float(a.imag)] for n, a in zip(self.degrees, self.coeffs) if a != 0]
        return {"s": self.s, "coeffs": terms}

    def to_json(self):
        return json.dumps(self.to_dict())

    @classmethod
    def from_dict(cls, data):
        return cls.from_terms(data["s"], {int(n): complex(re, im) for n, re, im in data["coeffs"]})

    @classmethod
    def from_json(cls, text):
        return cls.from_dict(json.loads(text))

    def __repr__(self):
        return f"LaurentFunction(s={self.s!r}, N={self.N})"


def random_laurent(rng, s, N, scaled=True):
    """Random Laurent polynomial with coefficients uniform in the unit disk.

    With ``scaled=True`` the negative part is written in powers of ``s / z`` so
    the function stays of order one on the inner circle as well.
    """
    mod = np.sqrt(rng.uniform(0.0, 1.0, 2 * N + 1))
    arg = rng.uniform(0.0, 2 * math.pi, 2 * N + 1)
    c = mod * np.exp(1j * arg)
    if scaled:
        n = np.arange(-N, N + 1)
        c = np.where(n < 0, c * float(s) ** np.abs(n), c)
    return LaurentFunction(s, c)


def random_separated_laurent(rng, s, max_zeros=16, margin=0.05):
    """Random Laurent polynomial built from its zeros, none near the boundary.

    ``f(z) = c z^{-m} prod_k (z - zeta_k)`` with ``log|zeta_k|`` drawn from
    ``[log s - 1, 1]`` but at least ``margin`` away from ``log s`` and ``0``;
    zeros inside the annulus are allowed. ``c`` makes the boundary sup one.
    """
    n_zeros = int(rng.integers(1, max_zeros + 1))
    log_s = math.log(s)
    lo, hi = log_s - 1.0, 1.0
    zeros = []
    while len(zeros) < n_zeros:
        lr = rng.uniform(lo, hi)
        if abs(lr) < margin or abs(lr - log_s) < margin:
            continue
        zeros.append(math.exp(lr) * np.exp(1j * rng.uniform(0, 2 * math.pi)))
    shift = int(rng.integers(0, n_zeros + 1))
    poly = np.poly(zeros)[::-1]  # ascending powers
    f = LaurentFunction.from_terms(s, {k - shift: a for k, a in enumerate(poly)})
    top = max(f.sup_on_circle(s, 256), f.sup_on_circle(1.0, 256))
    return f / top


def zero_margin(f):
    """Smallest log-radial distance from a zero of ``f`` to either boundary circle."""
    zs = f.zeros()
    if zs.size == 0:
        return math.inf
    lr = np.log(np.abs(zs))
    return float(np.min(np.minimum(np.abs(lr), np.abs(lr - math.log(f.s)))))


@dataclass(frozen=True)
class RadialPrimitive:
    """``F_t(r) = int_s^r f(x e^{it}) dx`` in closed form."""

    base: LaurentFunction
    t: float

    @property
    def term_coefficients(self):
        """``(b_n, a_{-1} e^{-it})`` with ``F = sum b_n (r^{n+1} - s^{n+1}) + a_{-1} e^{-it} log(r/s)``."""
        n = self.base.degrees
        a = self.base.coeffs * np.exp(1j * n * self.t)
        b = np.where(n != -1, a / np.where(n != -1, n + 1, 1), 0)
        return b, self.base.coefficient(-1) * np.exp(-1j * self.t)

    def __call__(self, r):
        r = np.asarray(r, dtype=float)
        s = self.base.s
        if np.any(r < s * (1 - _EDGE_SLACK)) or np.any(r > 1 + _EDGE_SLACK):
            raise DomainError("radius outside [s, 1]")
        b, log_coef = self.term_coefficients
        p = self.base.degrees + 1
        rr = r[..., None]
        out = ((rr ** p - s ** p) * b).sum(axis=-1) + log_coef * np.log(r / s)
        return out[()] if out.ndim == 0 else out

    def derivative(self, r):
        """``dF_t/dr = f(r e^{it})``; provided for checks against finite differences."""
        return self.base.eval(np.asarray(r) * np.exp(1j * self.t))


def radial_primitive(f: LaurentFunction, t: float) -> RadialPrimitive:
    return RadialPrimitive(f, float(t))


def _kernel_rows(geom, z, M, trunc):
    z = np.atleast_1d(np.asarray(z, dtype=complex))
    r = np.abs(z)
    geom.check_open_radius(r)
    t = np.angle(z)
    theta = 2 * math.pi * np.arange(M) / M
    d = t[:, None] - theta[None, :]
    w = 2 * math.pi / M
    outer = w * K.eval_p(geom, d, r[:, None], trunc)
    inner = w * K.eval_p(geom, d, geom.s / r[:, None], trunc)
    return outer, inner


def poisson_extend(g: BoundaryGrid, geom, z, trunc=None):
    """Harmonic extension of the real boundary data ``Re g`` to the point(s) ``z``.

    ``u(r e^{it}) = int p(t - theta, r) g_T(theta) d theta + int p(t - theta, s/r) g_sT(theta) d theta``
    by the trapezoid rule on the grid nodes.
    """
    trunc = trunc or K.KernelTruncation.for_geometry(geom)
    outer, inner = _kernel_rows(geom, z, g.samples_per_circle, trunc)
    u = outer @ g.values(OUTER).real + inner @ g.values(INNER).real
    return u[0] if np.ndim(z) == 0 else u


def check_poisson_jensen(f: LaurentFunction, z, quad_points=2048, trunc=None):
    """``RHS - log|f(z)|`` where RHS is the kernel average of ``log|f|`` over both circles.

    Non-negative up to quadrature error for every ``f`` without zeros on the
    boundary; zero when ``log|f|`` is harmonic in the annulus.
    """
    geom = f.geometry
    if f.is_zero():
        raise PreconditionError("f must not vanish identically")
    trunc = trunc or K.KernelTruncation.for_geometry(geom)
    grid = f.trace(quad_points)
    mags = np.abs(np.concatenate([grid.inner_values, grid.outer_values]))
    if mags.min() <= 1e-12 * mags.max():
        raise ZeroOnBoundaryError("f vanishes on a boundary circle to grid resolution")
    log_grid = grid.map(lambda v: np.log(np.abs(v)))
    rhs = poisson_extend(log_grid, geom, z, trunc)
    lhs = np.log(np.abs(f.eval(z)))
    return rhs - lhs


def interior_exponent(geom, constants, r):
    """Exponent ``(2 lam c_s / log s)(log s - log r)`` below ``sqrt s``, ``(2 lam c_s / log s) log r`` above.

    It is ``lam`` times the kernel lower bound and is symmetric under
    ``r -> s / r``, so arcs on the inner circle get the same exponent.
    """
    r = np.asarray(r, dtype=float)
    log_s = math.log(geom.s)
    scale = 2.0 * constants.lam * constants.c_s / log_s
    log_r = np.log(r)
    out = np.where(r <= geom.sqrt_s, scale * (log_s - log_r), scale * log_r)
    return np.maximum(out, 0.0)


def _check_m(f, m, M):
    if not m > 0:
        raise PreconditionError("m must be positive")
    grid = f.trace(M)
    top = sup_norm_boundary(grid)
    if top > m * (1 + 1e-12):
        raise PreconditionError(f"m={m:g} is below the boundary sup {top:g}")
    return grid


def interior_bound(f: LaurentFunction, m, arc: BoundaryArc, constants, z, M=2048):
    """Log of the two-branch bound ``m ||f/m||_{L^1(I)}^{e(|z|)}`` on ``|f(z)|``.

    Computed entirely in logs; ``constants.lam`` is taken from ``arc``.
    """
    geom = f.geometry
    constants = constants.with_arc(arc)
    grid = _check_m(f, m, M)
    log_l1 = log_l1_norm_on_arc(grid, arc) - math.log(m)
    if log_l1 > 1e-12:
        raise PreconditionError("||f/m||_{L^1(I)} exceeds 1")
    log_l1 = min(log_l1, 0.0)
    r = np.abs(np.asarray(z, dtype=complex))
    if np.any(r < geom.s * (1 - _EDGE_SLACK)) or np.any(r > 1 + _EDGE_SLACK):
        raise DomainError("z outside the closed annulus")
    e = interior_exponent(geom, constants, np.clip(r, geom.s, 1.0))
    with np.errstate(invalid="ignore"):
        out = math.log(m) + np.where(e == 0, 0.0, e * log_l1)
    return out[()] if np.ndim(out) == 0 else out


def primitive_bound(f: LaurentFunction, m, arc: BoundaryArc, constants, M=2048):
    """Uniform bound ``(2s+1) q0 m / |2 lam c_s log||f/m||_{L^1(I)}|`` on ``|F_t(r)|``.

    Needs both ``log||f||`` and ``log||f/m||`` on ``I`` below
    ``-q0 / (lam c_s)``; otherwise :class:`HypothesisError` carries the larger
    of the two log-norms and the threshold.
    """
    if f.is_zero():
        raise PreconditionError("f must not vanish identically")
    geom = f.geometry
    constants = constants.with_arc(arc)
    grid = _check_m(f, m, M)
    log_f = log_l1_norm_on_arc(grid, arc)
    log_fm = log_f - math.log(m)
    worst = max(log_f, log_fm)
    if not worst < constants.threshold_log:
        raise HypothesisError(
            f"log L1 norm {worst:.6g} is not below the threshold exponent {constants.threshold_log:.6g}",
            log_norm=worst,
            threshold=constants.threshold_log,
        )
    return (2 * geom.s + 1) * geom.q0 * m / abs(2 * constants.lam * constants.c_s * log_fm)


__all__ = [
    "LaurentFunction",
    "RadialPrimitive",
    "radial_primitive",
    "random_laurent",
    "random_separated_laurent",
    "zero_margin",
    "poisson_extend",
    "check_poisson_jensen",
    "interior_exponent",
    "interior_bound",
    "primitive_bound",
    "l1_norm_on_arc",
]
