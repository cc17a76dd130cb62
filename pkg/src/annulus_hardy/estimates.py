"""Logarithmic estimates in ``H^{k,inf}`` of the annulus.

The bounds all have the shape

    ||f||_{L^inf(dG_s)} <= C / |log ||f||_{L^1(I)}|^k

under the smallness hypothesis ``log ||f||_{L^1(I)} < -q0 / (lam c_s)``.
Every comparison is carried out between logarithms: for moderate ``s`` the
threshold ``exp(-q0 / (lam c_s))`` is far below the smallest double.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .boundary import (
    OUTER,
    BoundaryArc,
    hardy_sobolev_norm,
    l1_norm_on_arc,
    log_l1_norm_on_arc,
    sup_norm_boundary,
)
from .errors import PreconditionError
from .kernel import AnnulusGeometry, KernelConstants
from .laurent import LaurentFunction

PASS_TOL = 1e-9
UNIT_BALL_TOL = 1e-12


# -- Landau-type interpolation constant ---------------------------------------

@dataclass(frozen=True)
class HLLConstant:
    """Constant ``C`` in ``||g'|| <= C ||g||_{W^{j,inf}}^{1/j} ||g||^{1-1/j}`` on an interval of length L."""

    interval_len: float
    order: int
    value: float


def hll_constant(L: float, j: int) -> HLLConstant:
    """Explicit Landau constant on an interval of length ``L``.

    Order 2: from ``|g'(x)| <= 2||g||/h + (h/2)||g''||`` with a one-sided window
    of length ``h <= L``; optimising ``h`` gives ``max(2, 1 + 2/L)``.

    Order ``j > 2``: the order-2 bound applied to ``g^(i-1)`` gives
    ``M_i <= C2 sqrt(M_{i-1} max(M_{i-1}, M_{i+1}))`` for the sup norms
    ``M_i``. Following the increments of ``log M_i`` along this chain shows
    ``M_1 <= C2^(2j-3) W^(1/j) M_0^(1-1/j)`` whenever ``W >= max_i M_i``.
    """
    if not L > 0:
        raise PreconditionError("interval length must be positive")
    if j < 2:
        raise PreconditionError("order must be at least 2")
    c2 = 2.0 if math.isinf(L) else max(2.0, 1.0 + 2.0 / L)
    return HLLConstant(float(L), int(j), c2 ** (2 * j - 3))


# -- bootstrap of the exponents -------------------------------------------------

@dataclass(frozen=True)
class BootstrapState:
    rho: float
    a: float
    b: float
    c: float
    iterations: int = 0

    @property
    def sigma(self) -> float:
        return 1.0 - self.rho / math.e


def bootstrap_iterates(k: int, steps: int):
    """``(a_j, b_j, c_j)`` for ``j = 1..steps`` with ``rho = k/(k+1)``.

    ``a_{j+1} = rho (1 + a_j)``, ``b_{j+1} = 1 + rho b_j``, ``c_{j+1} = rho (1 + c_j)``
    from ``a_1 = rho (1 + rho)``, ``b_1 = 1 + rho``, ``c_1 = rho``.
    """
    if k < 1:
        raise PreconditionError("k must be >= 1")
    rho = k / (k + 1)
    a, b, c = rho * (1 + rho), 1 + rho, rho
    out = [(a, b, c)]
    for _ in range(steps - 1):
        a, b, c = rho * (1 + a), 1 + rho * b, rho * (1 + c)
        out.append((a, b, c))
    return out


def bootstrap_limit(k: int, tol: float = 1e-14, max_iter: int = 100_000) -> BootstrapState:
    """Iterate the exponent recurrences to their fixed point ``(k, k+1, k)``."""
    if k < 1:
        raise PreconditionError("k must be >= 1")
    rho = k / (k + 1)
    a, b, c = rho * (1 + rho), 1 + rho, rho
    for it in range(1, max_iter + 1):
        na, nb, nc = rho * (1 + a), 1 + rho * b, rho * (1 + c)
        step = max(abs(na - a), abs(nb - b), abs(nc - c))
        a, b, c = na, nb, nc
        # distance to the fixed point is step * rho / (1 - rho)
        if step * rho / (1 - rho) <= tol:
            break
    return BootstrapState(rho, a, b, c, it)


def log_hk_constant(constants: KernelConstants, k: int) -> float:
    """``log C_k(s)`` with ``C_k = C^{b} sigma^{-c} / lambda0^{a}`` at the bootstrap limit.

    ``C`` is the Landau constant of order ``k+1`` on ``(s, 1)``.
    """
    state = bootstrap_limit(k)
    a, b, c = k, k + 1, k  # exact limits; ``state`` only supplies sigma
    C = hll_constant(1.0 - constants.geom.s, k + 1).value
    return b * math.log(C) - c * math.log(state.sigma) - a * math.log(constants.lambda0)


# -- reports --------------------------------------------------------------------

@dataclass
class EstimateReport:
    """Both sides of one logarithmic bound, in logs."""

    name: str
    lhs_log: float
    rhs_log: float
    hypothesis_ok: bool
    inputs: dict = field(default_factory=dict)
    details: dict = field(default_factory=dict)

    @property
    def slack_log(self) -> float:
        return self.rhs_log - self.lhs_log

    @property
    def passed(self) -> bool:
        return self.slack_log >= -PASS_TOL

    def to_dict(self):
        return {
            "name": self.name,
            "lhs_log": self.lhs_log,
            "rhs_log": self.rhs_log,
            "slack_log": self.slack_log,
            "hypothesis_ok": self.hypothesis_ok,
            "passed": self.passed,
            "inputs": self.inputs,
            "details": self.details,
        }


def _prepare(f, arc, geom, constants):
    if f.is_zero():
        raise PreconditionError("f must not vanish identically")
    if abs(f.s - geom.s) > 0 or abs(constants.geom.s - geom.s) > 0:
        raise PreconditionError("f, geometry and constants disagree on s")
    return constants.with_arc(arc)


def _inputs(f, arc, constants, **extra):
    d = {"s": f.s, "N": f.N, "arc": str(arc), "lam": arc.lam, "c_s": constants.c_s,
         "lambda0": constants.lambda0, "threshold_log": constants.threshold_log}
    d.update(extra)
    return d


def main_bound_h1(f: LaurentFunction, arc: BoundaryArc, geom: AnnulusGeometry, constants: KernelConstants,
                  M: int = 1024) -> EstimateReport:
    """Sup of ``f`` on both circles against ``C^2 / ((1 - 1/2e) |lambda0 log||f||_{L^1(I)}|)``.

    ``f`` must lie in the unit ball of ``H^{1,inf}``; ``C`` is the order-2
    Landau constant on ``(s, 1)``.
    """
    constants = _prepare(f, arc, geom, constants)
    norm = hardy_sobolev_norm(f, 1, M)
    if norm > 1 + UNIT_BALL_TOL:
        raise PreconditionError(f"f is not in the unit ball of H^(1,inf): norm {norm:.17g}")
    grid = f.trace(M)
    log_l1 = log_l1_norm_on_arc(grid, arc)
    C = hll_constant(1.0 - geom.s, 2).value
    alpha = 1.0 - 1.0 / (2 * math.e)
    rhs = 2 * math.log(C) - math.log(alpha) - math.log(constants.lambda0 * abs(log_l1))
    lhs = math.log(sup_norm_boundary(grid))
    return EstimateReport(
        "main_bound_h1", lhs, rhs, bool(log_l1 < constants.threshold_log),
        _inputs(f, arc, constants, log_l1=log_l1, hll=C, norm_h1=norm),
    )


def main_bound_hk(f: LaurentFunction, k: int, arc: BoundaryArc, geom: AnnulusGeometry,
                  constants: KernelConstants, M: int = 1024) -> EstimateReport:
    """Sup of ``f`` against ``C_k(s) / |log||f||_{L^1(I)}|^k`` for ``f`` in the unit ball of ``H^{k,inf}``."""
    if k < 1:
        raise PreconditionError("k must be >= 1")
    constants = _prepare(f, arc, geom, constants)
    norm = hardy_sobolev_norm(f, k, M)
    if norm > 1 + UNIT_BALL_TOL:
        raise PreconditionError(f"f is not in the unit ball of H^({k},inf): norm {norm:.17g}")
    grid = f.trace(M)
    log_l1 = log_l1_norm_on_arc(grid, arc)
    log_ck = log_hk_constant(constants, k)
    rhs = log_ck - k * math.log(abs(log_l1))
    lhs = math.log(sup_norm_boundary(grid))
    return EstimateReport(
        f"main_bound_hk[k={k}]", lhs, rhs, bool(log_l1 < constants.threshold_log),
        _inputs(f, arc, constants, k=k, log_l1=log_l1, log_Ck=log_ck, norm_hk=norm),
    )


# -- derivative bounds ------------------------------------------------------------

def interpolation_ratio_log(f: LaurentFunction, i: int, k: int, arc: BoundaryArc, M: int = 1024) -> float:
    """``log(||g^(i)||_{L^1(I)} / ||g||_{L^1(I)}^(1-i/k))`` for ``g = f / max(||f||_{H^k}, 1)``."""
    g = f / max(hardy_sobolev_norm(f, k, M), 1.0)
    log_g = log_l1_norm_on_arc(g.trace(M), arc)
    log_gi = log_l1_norm_on_arc(g.derivative(i).trace(M), arc)
    return log_gi - (1.0 - i / k) * log_g


def estimate_interpolation_constant(functions, k: int, j: int, arc: BoundaryArc, M: int = 1024,
                                    safety: float = 1.5) -> float:
    """Empirical ``C2`` for ``||g^(i)||_{L^1(I)} <= C2 ||g||_{L^1(I)}^(1-i/k)``, ``1 <= i <= j``.

    Largest ratio over ``functions`` times ``safety``.
    """
    worst = -math.inf
    for f in functions:
        for i in range(1, j + 1):
            worst = max(worst, interpolation_ratio_log(f, i, k, arc, M))
    return safety * math.exp(worst) if math.isfinite(worst) else safety


def smallness_epsilon_log(C2: float, i: int, k: int) -> float:
    """Log of the largest ``eps`` with ``eta_i(C2 x^(1-i/k)) <= kappa_i eta_i(x)`` for ``x < eps``.

    ``eta_i(x) = 1 / log(1/x)^(k-i)`` and ``kappa_i = 2 (k/(k-i))^(k-i)``.
    """
    if i == 0 or C2 <= 1.0:
        return 0.0
    a = 1.0 - i / k
    return -math.log(C2) / (a * (1.0 - 2.0 ** (-1.0 / (k - i))))


def _kappa(i, k):
    return 1.0 if i == 0 else 2.0 * (k / (k - i)) ** (k - i)


def derivative_bound(f: LaurentFunction, j: int, k: int, K: float, arc: BoundaryArc, geom: AnnulusGeometry,
                     constants: KernelConstants, C2: float = 1.0, M: int = 1024,
                     inner_only: bool = False) -> EstimateReport:
    """``||f||_{H^{j,inf}}`` against ``C / |log||f||_{L^1(I)}|^(k-j)`` for ``||f||_{H^{k,inf}} <= K``.

    Each derivative ``g^(i)`` of ``g = f / max(K, 1)`` is bounded with the
    order ``k-i`` estimate; the interpolation constant ``C2`` and the factor
    ``kappa_i`` turn its own L^1 norm into that of ``g``. The report's
    ``details`` list the per-order pieces, ``C2`` and the epsilons used.

    With ``inner_only=True`` the left side is the norm on the inner circle
    only (outer arc data controlling the inaccessible circle).
    """
    if not 0 <= j < k:
        raise PreconditionError("need 0 <= j < k")
    if not K > 0:
        raise PreconditionError("K must be positive")
    constants = _prepare(f, arc, geom, constants)
    norm_k = hardy_sobolev_norm(f, k, M)
    if norm_k > K * (1 + UNIT_BALL_TOL):
        raise PreconditionError(f"||f||_(H^{k},inf) = {norm_k:.6g} exceeds K = {K:.6g}")
    K1 = max(K, 1.0)
    g = f / K1
    log_f = log_l1_norm_on_arc(f.trace(M), arc)
    log_g = log_f - math.log(K1)
    L = -log_f
    hypothesis = L >= 1.0
    per_order = []
    best = -math.inf
    for i in range(j + 1):
        gi = g.derivative(i)
        log_gi = log_l1_norm_on_arc(gi.trace(M), arc)
        eps_log = smallness_epsilon_log(C2, i, k)
        interp_ok = i == 0 or log_gi <= math.log(C2) + (1 - i / k) * log_g + 1e-12
        hyp_i = log_gi < constants.threshold_log and log_g < eps_log and interp_ok
        hypothesis = hypothesis and hyp_i
        term = log_hk_constant(constants, k - i) + math.log(_kappa(i, k))
        best = max(best, term)
        per_order.append({"i": i, "log_l1": log_gi, "log_eps": eps_log, "kappa": _kappa(i, k),
                          "log_Ck": term - math.log(_kappa(i, k)), "interp_ok": bool(interp_ok)})
    if inner_only:
        lhs = max(gd.sup_on_circle(f.s, M) for gd in (f.derivative(i) for i in range(j + 1)))
        factor = K1
    else:
        lhs = hardy_sobolev_norm(f, j, M)
        factor = 2.0 * K1
    rhs = math.log(factor) + best - (k - j) * math.log(L)
    return EstimateReport(
        f"derivative_bound[j={j},k={k}{',inner' if inner_only else ''}]",
        math.log(lhs), rhs, bool(hypothesis),
        _inputs(f, arc, constants, j=j, k=k, K=K, C2=C2, log_l1=log_f),
        {"orders": per_order},
    )


# -- optimality sequence ---------------------------------------------------------

@dataclass
class OptimalityRow:
    n: int
    sup_inner: float
    sup_outer: float
    sup_boundary: float
    l1_outer: float
    A_n: float
    log_sup_outer: float
    grid_rel_err: float

    CSV_COLUMNS = ("n", "sup_inner", "sup_outer", "sup_boundary", "l1_outer", "A_n")

    def csv_values(self):
        return [self.n, self.sup_inner, self.sup_outer, self.sup_boundary, self.l1_outer, self.A_n]


def optimality_closed_form(geom: AnnulusGeometry, n: int):
    """Logs of the three norms of ``f_n = z^{-n} / ||z^{-n}||_{H^{1,inf}}`` and ``A_n``.

    Returns ``(log_inner, log_outer, log_boundary, A_n)``; the boundary norm
    is the sum of the two circle sups, matching the ``H^{0,inf}`` norm.
    """
    q0, s = geom.q0, geom.s
    log_den = math.log(n) + (n + 1) * q0 + math.log1p(s ** (n + 1))
    log_outer = -log_den
    log_inner = n * q0 - log_den
    log_boundary = n * q0 + math.log1p(s ** n) - log_den
    return log_inner, log_outer, log_boundary, math.exp(log_boundary) * log_den


def _grid_norms(geom, n, M):
    # f_n through its Laurent representation, normalised by the grid H^{1,inf} norm
    u = LaurentFunction.monomial(geom.s, -n)
    if n * geom.q0 < 600:
        f = u / hardy_sobolev_norm(u, 1, M)
        grid = f.trace(M)
        sup_in = float(np.abs(grid.inner_values).max())
        sup_out = float(np.abs(grid.outer_values).max())
        l1 = l1_norm_on_arc(grid, BoundaryArc.full(OUTER))
        return math.log(sup_in), math.log(sup_out), math.log(l1)
    # log-space route for huge s^{-n}: log|c z^{-n}| node by node
    theta = 2 * math.pi * np.arange(M) / M
    z_in, z_out = geom.s * np.exp(1j * theta), np.exp(1j * theta)
    log_u = lambda z: -n * np.log(np.abs(z))
    log_du = lambda z: math.log(n) - (n + 1) * np.log(np.abs(z))
    log_norm = max(np.logaddexp(log_u(z_in).max(), log_u(z_out).max()),
                   np.logaddexp(log_du(z_in).max(), log_du(z_out).max()))
    sup_in = float(log_u(z_in).max() - log_norm)
    sup_out = float(log_u(z_out).max() - log_norm)
    l1 = float(np.log(np.mean(np.exp(log_u(z_out) - log_u(z_out).max()))) + sup_out)
    return sup_in, sup_out, l1


def optimality_sequence(geom: AnnulusGeometry, n_max: int, M: int = 64):
    """Rows ``n = 1..n_max`` for the extremal family ``f_n``.

    ``A_n = ||f_n||_{L^inf(dG_s)} |log ||f_n||_{L^inf(T)}|`` tends to
    ``s |log s|``. Each row also records the largest relative gap between the
    closed-form norms and those measured on an ``M``-node grid.
    """
    if n_max < 1:
        raise PreconditionError("n_max must be >= 1")
    rows = []
    for n in range(1, n_max + 1):
        li, lo, lb, A = optimality_closed_form(geom, n)
        gi, go, gl = _grid_norms(geom, n, M)
        err = max(abs(math.expm1(gi - li)), abs(math.expm1(go - lo)), abs(math.expm1(gl - lo)))
        rows.append(OptimalityRow(n, math.exp(li), math.exp(lo), math.exp(lb), math.exp(lo), A, lo, err))
    return rows


def optimality_limit(geom: AnnulusGeometry) -> float:
    return geom.s * geom.q0
