"""Poisson kernel of the annulus ``G_s = {s < |z| < 1}``.

The kernel is built from the harmonic strip function

    P(t, r) = Im F(t, r),
    F(t, r) = tanh(-pi t / (2 q0) + i (pi/4 + (pi / (2 q0)) log(r / sqrt(s)))) / (2 q0),

with ``q0 = -log s``, and periodised in ``t``:

    p(t, r) = sum_j P(t + 2 pi j, r).

With this normalisation ``p(., r)`` integrated against ``d theta`` over one
period gives the harmonic measure of the outer circle seen from radius ``r``
and ``p(., s/r)`` that of the inner circle, so the two masses add up to one.

Everything here is a pure function of its inputs and accepts numpy arrays
for ``t`` and ``r`` where that makes sense.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .errors import DomainError, PreconditionError, TruncationInfeasibleError

DEFAULT_TAIL_TOL = 1e-13
DEFAULT_J_CAP = 100_000
DEFAULT_QUAD_POINTS = 2048


@dataclass(frozen=True)
class AnnulusGeometry:
    """Annulus with inner radius ``s`` and outer radius 1."""

    s: float

    def __post_init__(self):
        s = float(self.s)
        if not (0.0 < s < 1.0) or not math.isfinite(s):
            raise DomainError(f"inner radius must lie in (0, 1), got {self.s!r}")
        object.__setattr__(self, "s", s)

    @property
    def q0(self) -> float:
        return -math.log(self.s)

    @property
    def sqrt_s(self) -> float:
        return math.sqrt(self.s)

    def check_open_radius(self, r):
        """Raise ``DomainError`` unless every ``r`` lies strictly inside (s, 1)."""
        r = np.asarray(r, dtype=float)
        if np.any(~np.isfinite(r)) or np.any(r <= self.s) or np.any(r >= 1.0):
            raise DomainError(f"radius must lie in ({self.s}, 1)")
        return r


def tail_bound(geom: AnnulusGeometry, j_max: int) -> float:
    """Upper bound for ``sum_{|j| > j_max} P(t + 2 pi j, r)`` uniformly in |t| <= pi and r.

    Uses ``P <= 1 / (4 q0 sinh^2(pi |t + 2 pi j| / (2 q0)))`` together with
    ``|t + 2 pi j| >= pi (2|j| - 1)``; consecutive terms shrink at least by
    ``exp(-2 pi^2 / q0)``.
    """
    q0 = geom.q0
    x = math.pi ** 2 * (2 * j_max + 1) / (2.0 * q0)
    ratio = math.exp(-2.0 * math.pi ** 2 / q0)
    if x > 700.0:
        return 0.0
    sh = math.sinh(x)
    if sh == 0.0:
        return math.inf
    return 1.0 / (2.0 * q0 * sh * sh) / (1.0 - ratio)


@dataclass(frozen=True)
class KernelTruncation:
    """Number of periodic images kept in ``p`` and the tolerance it certifies."""

    j_max: int
    tail_tol: float = DEFAULT_TAIL_TOL

    @classmethod
    def for_geometry(cls, geom, tail_tol=DEFAULT_TAIL_TOL, j_cap=DEFAULT_J_CAP):
        """Smallest ``j_max`` whose tail bound is below ``tail_tol``."""
        if tail_tol <= 0:
            raise PreconditionError("tail_tol must be positive")
        # the bound is geometric in j, so jump close to the answer first
        q0 = geom.q0
        guess = max(0, int(q0 * (math.log(1.0 / tail_tol) + math.log(1.0 / q0 + 1.0)) / (2 * math.pi ** 2)) - 2)
        j = min(guess, j_cap)
        while tail_bound(geom, j) > tail_tol:
            j += 1
            if j > j_cap:
                raise TruncationInfeasibleError(
                    f"tail tolerance {tail_tol:g} needs more than {j_cap} images at s={geom.s}"
                )
        while j > 0 and tail_bound(geom, j - 1) <= tail_tol:
            j -= 1
        return cls(j_max=j, tail_tol=float(tail_tol))


def _truncation(geom, trunc):
    return trunc if trunc is not None else KernelTruncation.for_geometry(geom)


def eval_F(geom: AnnulusGeometry, t, r):
    """Holomorphic strip function whose imaginary part is ``P``."""
    r = geom.check_open_radius(r)
    q0 = geom.q0
    arg = -math.pi * np.asarray(t, dtype=float) / (2 * q0) + 1j * (
        math.pi / 4 + math.pi / (2 * q0) * np.log(r / geom.sqrt_s)
    )
    out = np.tanh(arg) / (2 * q0)
    return out[()] if out.ndim == 0 else out


def _strip_P(q0, t, log_r):
    # P written with psi = pi |log r| / q0 in (0, pi); avoids the
    # cancellation in cosh(.) - sin(.) near the outer circle.
    psi = -math.pi * log_r / q0
    with np.errstate(over="ignore"):
        sh = np.sinh(math.pi * t / (2 * q0))
        den = 2.0 * (sh * sh + np.sin(psi / 2) ** 2)
        return np.sin(psi) / (2 * q0 * den)


def eval_P(geom: AnnulusGeometry, t, r):
    """Harmonic strip kernel ``P(t, r)`` for ``s < r < 1``; strictly positive."""
    r = geom.check_open_radius(r)
    out = _strip_P(geom.q0, np.asarray(t, dtype=float), np.log(r))
    return out[()] if np.ndim(out) == 0 else out


def _wrap(t):
    t = np.asarray(t, dtype=float)
    outside = np.abs(t) > math.pi
    if np.any(outside):
        t = np.where(outside, np.mod(t + math.pi, 2 * math.pi) - math.pi, t)
    return t


def _periodised(q0, t, log_r, j_max, term):
    t = _wrap(t)
    t, log_r = np.broadcast_arrays(t, log_r)
    total = np.zeros(t.shape)
    two_pi = 2 * math.pi
    # smallest terms first; +j and -j are paired so that p(-t) == p(t) exactly
    for j in range(j_max, 0, -1):
        total += term(q0, t + two_pi * j, log_r) + term(q0, t - two_pi * j, log_r)
    total += term(q0, t, log_r)
    return total


def eval_p(geom: AnnulusGeometry, t, r, trunc: KernelTruncation | None = None):
    """Periodised annulus Poisson kernel ``p(t, r)``.

    Values of ``t`` outside [-pi, pi] are reduced modulo 2 pi first. The
    truncation error is at most ``trunc.tail_tol``.
    """
    r = geom.check_open_radius(r)
    trunc = _truncation(geom, trunc)
    out = _periodised(geom.q0, t, np.log(r), trunc.j_max, _strip_P)
    return out[()] if out.ndim == 0 else out


def _cs_term(q0, t, _unused):
    with np.errstate(over="ignore"):
        ch = np.cosh(math.pi * t / (2 * q0))
    return 1.0 / (2 * q0 * 2.0 * ch * ch)


def cs_profile(geom: AnnulusGeometry, t, trunc: KernelTruncation | None = None):
    """``C_s(t) = (1/(2 q0)) sum_j 1 / (1 + cosh(pi (t + 2 pi j) / q0))``.

    The truncated sum never exceeds the full one, so it is already a lower
    estimate.
    """
    trunc = _truncation(geom, trunc)
    out = _periodised(geom.q0, t, 0.0, trunc.j_max, _cs_term)
    return out[()] if out.ndim == 0 else out


@dataclass(frozen=True)
class KernelConstants:
    """Kernel infimum ``c_s`` together with the arc fraction it is used with."""

    geom: AnnulusGeometry
    c_s: float
    lam: float = 1.0

    def __post_init__(self):
        if not self.c_s > 0:
            raise PreconditionError("c_s must be positive")
        if not (0.0 < self.lam <= 1.0):
            raise PreconditionError(f"arc fraction must lie in (0, 1], got {self.lam}")

    @property
    def lambda0(self) -> float:
        g = self.geom
        return min(1.0, 2.0 * self.lam * self.c_s / ((1.0 + 2.0 * g.s) * g.q0))

    @property
    def threshold_log(self) -> float:
        """Log of the smallness threshold ``exp(-q0 / (lam c_s))``, kept as an exponent."""
        return -self.geom.q0 / (self.lam * self.c_s)

    def with_arc(self, arc_or_lam):
        lam = getattr(arc_or_lam, "lam", arc_or_lam)
        return replace(self, lam=float(lam))


def compute_Cs(geom: AnnulusGeometry, t_grid_size: int = 1024, trunc=None, lam: float = 1.0,
               levels: int = 6, refine_points: int = 64) -> KernelConstants:
    """Lower estimate of ``inf_{|t| <= pi} C_s(t)``.

    A uniform grid locates the minimising cell, which is then zoomed into
    ``levels`` times. On the last (finest) grid the minimum is lowered by a
    slack ``L h`` where ``L`` is twice the largest finite-difference slope seen
    on that grid.
    """
    if t_grid_size < 64:
        raise PreconditionError("t_grid_size must be at least 64")
    trunc = _truncation(geom, trunc)
    lo, hi = -math.pi, math.pi
    n = int(t_grid_size)
    for _ in range(levels + 1):
        t = np.linspace(lo, hi, n + 1)
        vals = cs_profile(geom, t, trunc)
        i = int(np.argmin(vals))
        h = t[1] - t[0]
        new_lo, new_hi = t[max(i - 1, 0)], t[min(i + 1, n)]
        lo, hi = new_lo, new_hi
        n = refine_points
    slope = np.max(np.abs(np.diff(vals))) / h
    c_s = float(vals.min() - 2.0 * slope * h)
    if c_s <= 0:
        c_s = float(vals.min()) * 0.5
    return KernelConstants(geom=geom, c_s=c_s, lam=lam)


def _check_quad_points(n):
    n = int(n)
    if n < 256 or n & (n - 1):
        raise PreconditionError(f"quad_points must be a power of two >= 256, got {n}")
    return n


def suggested_quad_points(geom: AnnulusGeometry, r: float, tol: float = 1e-14) -> int:
    """Power of two large enough for trapezoid accuracy ``tol`` at radius ``r``.

    The kernel's nearest complex singularity in ``t`` sits at distance
    ``min(-log r, log(r/s))`` from the real axis.
    """
    r = float(geom.check_open_radius(r))
    d = min(-math.log(r), math.log(r / geom.s))
    need = (math.log(1.0 / tol) + 10.0) / d
    return max(256, 1 << int(math.ceil(math.log2(need))))


def kernel_mass(geom: AnnulusGeometry, r: float, quad_points: int = DEFAULT_QUAD_POINTS, trunc=None) -> float:
    """Total mass ``int p(t, r) dt + int p(t, s/r) dt`` over one period.

    Trapezoid rule on the periodic integrand; equals 1 up to quadrature and
    truncation error.
    """
    n = _check_quad_points(quad_points)
    r = float(geom.check_open_radius(r))
    trunc = _truncation(geom, trunc)
    t = -math.pi + 2 * math.pi * np.arange(n) / n
    outer = eval_p(geom, t, r, trunc)
    inner = eval_p(geom, t, geom.s / r, trunc)
    return float(2 * math.pi / n * (outer.sum() + inner.sum()))


def lower_bound_p(geom: AnnulusGeometry, constants: KernelConstants, r):
    """Radius-only lower bound for ``p(t, r)``, |t| <= pi.

    ``(2 c_s / log s)(log s - log r)`` for ``r <= sqrt(s)`` and
    ``(2 c_s / log s) log r`` above; both branches equal ``c_s`` at ``sqrt(s)``.
    """
    r = geom.check_open_radius(r)
    log_s = math.log(geom.s)
    log_r = np.log(r)
    scale = 2.0 * constants.c_s / log_s
    out = np.where(r <= geom.sqrt_s, scale * (log_s - log_r), scale * log_r)
    return out[()] if out.ndim == 0 else out
