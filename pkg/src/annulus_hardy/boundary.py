"""Boundary arcs, sampled traces on the two circles, and the norms used on them.

Normalised ``L^1`` on an arc ``I`` of angular length ``2 pi lam``::

    ||f||_{L^1(I)} = (1 / (2 pi lam)) * int_I |f(r e^{i theta})| d theta

with ``r = s`` on the inner circle and ``r = 1`` on the outer one. Traces
are sampled on the uniform grid ``theta_m = 2 pi m / M``; the integrand
between nodes is the piecewise-linear interpolant, which gives the usual
trapezoid rule on node-aligned arcs and explicit partial weights otherwise.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import ArcTooSmallError, PreconditionError

INNER = "inner"
OUTER = "outer"
_CIRCLES = (INNER, OUTER)


@dataclass(frozen=True)
class BoundaryArc:
    """Open arc on one boundary circle: ``theta_start < theta < theta_start + theta_len``."""

    circle: str
    theta_start: float = 0.0
    theta_len: float = 2 * math.pi

    def __post_init__(self):
        if self.circle not in _CIRCLES:
            raise PreconditionError(f"circle must be 'inner' or 'outer', got {self.circle!r}")
        if not (0.0 < self.theta_len <= 2 * math.pi * (1 + 1e-15)):
            raise PreconditionError(f"arc length must lie in (0, 2 pi], got {self.theta_len}")
        object.__setattr__(self, "theta_len", min(float(self.theta_len), 2 * math.pi))
        object.__setattr__(self, "theta_start", float(self.theta_start))

    @classmethod
    def full(cls, circle=OUTER):
        return cls(circle, 0.0, 2 * math.pi)

    @classmethod
    def parse(cls, text):
        """Build an arc from ``"outer"`` or ``"inner:start:length"`` (radians)."""
        parts = [p.strip() for p in str(text).split(":")]
        if len(parts) == 1:
            return cls.full(parts[0])
        if len(parts) != 3:
            raise PreconditionError(f"arc must be written as 'circle' or 'circle:start:length', got {text!r}")
        return cls(parts[0], float(parts[1]), float(parts[2]))

    @property
    def lam(self) -> float:
        return self.theta_len / (2 * math.pi)

    @property
    def is_full(self) -> bool:
        return self.theta_len >= 2 * math.pi

    def radius(self, s: float) -> float:
        return s if self.circle == INNER else 1.0

    def __str__(self):
        return f"{self.circle}:{self.theta_start!r}:{self.theta_len!r}"


@dataclass(frozen=True)
class BoundaryGrid:
    """Samples of a function on the inner circle ``sT`` and/or the outer circle ``T``.

    A circle that was not sampled is stored as ``None``.
    """

    samples_per_circle: int
    inner_values: Optional[np.ndarray] = None
    outer_values: Optional[np.ndarray] = None

    def __post_init__(self):
        M = int(self.samples_per_circle)
        if M < 8 or M & (M - 1):
            raise PreconditionError(f"samples_per_circle must be a power of two >= 8, got {M}")
        object.__setattr__(self, "samples_per_circle", M)
        for name in ("inner_values", "outer_values"):
            v = getattr(self, name)
            if v is None:
                continue
            v = np.array(v, dtype=complex)
            if v.shape != (M,):
                raise PreconditionError(f"{name} must have shape ({M},)")
            if not np.all(np.isfinite(v)):
                raise PreconditionError(f"{name} contains non-finite samples")
            v.setflags(write=False)
            object.__setattr__(self, name, v)
        if self.inner_values is None and self.outer_values is None:
            raise PreconditionError("a boundary grid needs at least one sampled circle")

    @property
    def nodes(self) -> np.ndarray:
        return 2 * math.pi * np.arange(self.samples_per_circle) / self.samples_per_circle

    def values(self, circle) -> np.ndarray:
        v = self.inner_values if circle == INNER else self.outer_values
        if v is None:
            raise PreconditionError(f"the {circle} circle was not sampled")
        return v

    def map(self, func):
        """Apply ``func`` elementwise to every sampled circle."""
        return BoundaryGrid(
            self.samples_per_circle,
            None if self.inner_values is None else func(self.inner_values),
            None if self.outer_values is None else func(self.outer_values),
        )

    def to_csv(self, fh=None):
        """Write ``circle,theta,re,im`` rows; returns the text when ``fh`` is None."""
        own = fh is None
        if own:
            fh = io.StringIO()
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["circle", "theta", "re", "im"])
        for circle in _CIRCLES:
            v = self.inner_values if circle == INNER else self.outer_values
            if v is None:
                continue
            for th, val in zip(self.nodes, v):
                w.writerow([circle, f"{th:.17g}", f"{val.real:.17g}", f"{val.imag:.17g}"])
        if own:
            return fh.getvalue()

    @classmethod
    def from_csv(cls, fh):
        if isinstance(fh, str):
            fh = io.StringIO(fh)
        rows = list(csv.DictReader(fh))
        data = {INNER: [], OUTER: []}
        for row in rows:
            data[row["circle"]].append(complex(float(row["re"]), float(row["im"])))
        M = max(len(data[INNER]), len(data[OUTER]))
        return cls(M, data[INNER] or None, data[OUTER] or None)


def _hat_cdf(y, h):
    # integral of the unit hat of half-width h from -inf to y
    y = np.clip(y, -h, h)
    left = (y + h) ** 2 / (2 * h)
    right = h - (h - y) ** 2 / (2 * h)
    return np.where(y <= 0, left, right)


def arc_weights(M: int, arc: BoundaryArc) -> np.ndarray:
    """Quadrature weights ``w_m`` with ``sum w_m g_m ~ int_arc g d theta``.

    ``w_m`` is the integral over the arc of the periodic hat function centred
    at node ``m``; a full circle gives the trapezoid weights ``2 pi / M``.
    """
    h = 2 * math.pi / M
    if arc.is_full:
        return np.full(M, h)
    a = arc.theta_start
    b = a + arc.theta_len
    nodes = h * np.arange(M)
    w = np.zeros(M)
    # hats that can reach [a, b] live on periodic copies of the nodes
    k_lo = math.floor((a - h) / (2 * math.pi)) - 1
    k_hi = math.ceil((b + h) / (2 * math.pi)) + 1
    for k in range(k_lo, k_hi + 1):
        c = nodes + 2 * math.pi * k
        w += _hat_cdf(b - c, h) - _hat_cdf(a - c, h)
    return w


def nodes_in_arc(M: int, arc: BoundaryArc) -> int:
    if arc.is_full:
        return M
    h = 2 * math.pi / M
    rel = np.mod(h * np.arange(M) - arc.theta_start, 2 * math.pi)
    return int(np.count_nonzero(rel <= arc.theta_len))


def _arc_integral(g: BoundaryGrid, arc: BoundaryArc):
    M = g.samples_per_circle
    if nodes_in_arc(M, arc) < 4:
        raise ArcTooSmallError(f"arc {arc} covers fewer than 4 of {M} grid nodes")
    return arc_weights(M, arc), np.abs(g.values(arc.circle))


def l1_norm_on_arc(g: BoundaryGrid, arc: BoundaryArc) -> float:
    """Normalised ``L^1`` norm of the trace on ``arc``."""
    w, a = _arc_integral(g, arc)
    return float(np.dot(w, a) / (2 * math.pi * arc.lam))


def log_l1_norm_on_arc(g: BoundaryGrid, arc: BoundaryArc) -> float:
    """``log ||g||_{L^1(arc)}`` with the largest sample factored out first."""
    w, a = _arc_integral(g, arc)
    top = a.max()
    if top == 0.0:
        return -math.inf
    return math.log(top) + math.log(np.dot(w, a / top) / (2 * math.pi * arc.lam))


def sup_norm_boundary(g: BoundaryGrid) -> float:
    """Largest sampled modulus over both circles.

    This is a grid maximum and therefore a lower bound for the true supremum;
    refine ``M`` (or use :meth:`LaurentFunction.sup_on_circle` with
    ``certified=True``) when an upper bound is needed.
    """
    vals = [np.abs(v).max() for v in (g.inner_values, g.outer_values) if v is not None]
    return float(max(vals))


def hardy_sobolev_norm(f, k: int, M: int = 1024, certified: bool = False) -> float:
    """``max_{0 <= j <= k} (sup_{sT} |f^(j)| + sup_T |f^(j)|)`` for a Laurent function.

    Derivatives are exact (coefficient maps); sups are taken on ``M`` nodes per
    circle, optionally inflated to a certified upper bound.
    """
    if k < 0:
        raise PreconditionError("k must be non-negative")
    best = 0.0
    g = f
    for j in range(k + 1):
        if j:
            g = g.derivative()
        total = g.sup_on_circle(g.s, M, certified) + g.sup_on_circle(1.0, M, certified)
        best = max(best, total)
    return best
