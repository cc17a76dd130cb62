"""Neumann-Robin problem on the annulus and the Robin-coefficient stability experiment.

Forward problem, with flux ``Phi`` prescribed on the outer circle ``T`` and
the impedance condition on the inner circle ``sT``::

    Laplace u = 0           in s < r < 1
    d_r u(1, .) = Phi       on T
    -d_r u(s, .) + q u = 0  on sT   (outer normal of the annulus points inward there)

Each Fourier mode ``n`` of ``u`` is written through its two boundary values
``U_n = u_n(s)`` and ``V_n = u_n(1)`` and the bounded basis functions

    phi_out(r) = (r^k - sigma (s/r)^k) / (1 - sigma^2)      (1 at r=1, 0 at r=s)
    phi_in(r)  = ((s/r)^k - sigma r^k) / (1 - sigma^2)      (1 at r=s, 0 at r=1)

with ``k = |n|`` and ``sigma = s^k`` (logarithmic pair for ``n = 0``). The
representation is harmonic term by term. Eliminating ``V`` leaves the
Galerkin system ``(D + Q) U = G`` with ``D_n = (k/s) tanh(k q0)``,
``Q_{nm} = q_hat_{n-m}`` and ``G_n = Phi_hat_n / (s cosh(k q0))``.
"""

from __future__ import annotations

import csv
import io
import json
import math
import warnings
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .boundary import INNER, OUTER, BoundaryArc, BoundaryGrid, l1_norm_on_arc
from .errors import PreconditionError, SingularSystemError, VanishingTraceError
from .kernel import AnnulusGeometry, KernelConstants, compute_Cs

ADMISSIBILITY_GRID = 4096
RESIDUAL_TOL = 1e-8


class InsufficientModesWarning(UserWarning):
    """Boundary residual of a forward solve exceeds the requested tolerance."""


def _coeff_array(terms):
    """Hermitian coefficient vector (index ``k + K``) from ``{k: a_k}`` for ``k >= 0``, or pass-through."""
    if isinstance(terms, dict):
        K = max((abs(int(k)) for k in terms), default=0)
        c = np.zeros(2 * K + 1, dtype=complex)
        for k, a in terms.items():
            k = int(k)
            c[k + K] = a
            if k:
                c[-k + K] = np.conj(a)
        return c
    c = np.array(terms, dtype=complex).ravel()
    if c.size % 2 == 0:
        raise PreconditionError("Fourier coefficient vector must have odd length")
    return c


def _check_hermitian(c, what):
    if not np.allclose(c, np.conj(c[::-1]), rtol=0, atol=1e-14 * max(1.0, np.abs(c).max())):
        raise PreconditionError(f"{what} must be real: coefficients are not Hermitian")


def _series_values(coeffs, theta, order=0):
    K = (coeffs.size - 1) // 2
    k = np.arange(-K, K + 1)
    weights = coeffs * (1j * k) ** order
    return (np.exp(1j * np.outer(np.asarray(theta, dtype=float), k)) @ weights).real


def _grid(M):
    return 2 * math.pi * np.arange(M) / M


@dataclass(frozen=True)
class RobinCoefficient:
    """Real trigonometric polynomial ``q`` on ``sT`` in the admissible class.

    Admissible means ``q >= c`` and ``|q^(k)| <= c_prime`` for ``0 <= k <= n``,
    both checked on a 4096-node grid at construction.
    """

    fourier_coeffs: np.ndarray
    c: float
    c_prime: float
    n: int = 2

    def __post_init__(self):
        coeffs = _coeff_array(self.fourier_coeffs)
        _check_hermitian(coeffs, "q")
        coeffs.setflags(write=False)
        object.__setattr__(self, "fourier_coeffs", coeffs)
        if not (self.c > 0 and self.c_prime > 0):
            raise PreconditionError("c and c_prime must be positive")
        theta = _grid(ADMISSIBILITY_GRID)
        if _series_values(coeffs, theta).min() < self.c:
            raise PreconditionError(f"q is not admissible: min q < c = {self.c}")
        for k in range(self.n + 1):
            if np.abs(_series_values(coeffs, theta, k)).max() > self.c_prime:
                raise PreconditionError(f"q is not admissible: |q^({k})| exceeds c' = {self.c_prime}")

    @classmethod
    def from_terms(cls, terms, c, c_prime, n=2):
        return cls(_coeff_array(dict(terms)), c, c_prime, n)

    @property
    def K(self) -> int:
        return (self.fourier_coeffs.size - 1) // 2

    def values(self, theta):
        return _series_values(self.fourier_coeffs, theta)

    def perturbed(self, dq, t):
        """``q + t dq`` with the same admissibility constants."""
        d = _coeff_array(dq)
        K = max(self.K, (d.size - 1) // 2)
        out = np.zeros(2 * K + 1, dtype=complex)
        out[K - self.K:K + self.K + 1] += self.fourier_coeffs
        Kd = (d.size - 1) // 2
        out[K - Kd:K + Kd + 1] += t * d
        return RobinCoefficient(out, self.c, self.c_prime, self.n)


@dataclass(frozen=True)
class NeumannData:
    """Non-negative, not identically zero flux ``Phi`` on the outer circle."""

    fourier_coeffs: np.ndarray

    def __post_init__(self):
        coeffs = _coeff_array(self.fourier_coeffs)
        _check_hermitian(coeffs, "Phi")
        coeffs.setflags(write=False)
        object.__setattr__(self, "fourier_coeffs", coeffs)
        if not np.any(np.abs(coeffs) > 0):
            raise PreconditionError("Phi must not vanish identically")
        if _series_values(coeffs, _grid(ADMISSIBILITY_GRID)).min() < -1e-12:
            raise PreconditionError("Phi must be non-negative")

    @classmethod
    def from_terms(cls, terms):
        return cls(_coeff_array(dict(terms)))

    @property
    def K(self) -> int:
        return (self.fourier_coeffs.size - 1) // 2

    def values(self, theta):
        return _series_values(self.fourier_coeffs, theta)


def _sech(x):
    e = np.exp(-np.abs(x))
    return 2 * e / (1 + e * e)


def _basis(s, N, r):
    """``phi_out, phi_in`` and their r-derivatives for modes ``-N..N`` at radius ``r``."""
    k = np.abs(np.arange(-N, N + 1)).astype(float)
    q0 = -math.log(s)
    r = float(r)
    kk = np.where(k == 0, 1.0, k)
    sigma = np.exp(-kk * q0)
    den = 1.0 - sigma * sigma
    rk = r ** kk
    sr = (s / r) ** kk
    out = (rk - sigma * sr) / den
    inn = (sr - sigma * rk) / den
    dout = kk * (rk + sigma * sr) / (r * den)
    dinn = -kk * (sr + sigma * rk) / (r * den)
    zero = k == 0
    out = np.where(zero, (math.log(r) + q0) / q0, out)
    inn = np.where(zero, -math.log(r) / q0, inn)
    dout = np.where(zero, 1.0 / (q0 * r), dout)
    dinn = np.where(zero, -1.0 / (q0 * r), dinn)
    return out, inn, dout, dinn


def _pad(coeffs, N):
    K = (coeffs.size - 1) // 2
    out = np.zeros(2 * N + 1, dtype=complex)
    if K <= N:
        out[N - K:N + K + 1] = coeffs
    else:
        out[:] = coeffs[K - N:K + N + 1]
    return out


def _synth(modes, M):
    N = (modes.size - 1) // 2
    buf = np.zeros(M, dtype=complex)
    np.add.at(buf, np.mod(np.arange(-N, N + 1), M), modes)
    return M * np.fft.ifft(buf)


@dataclass
class HarmonicSolution:
    """Solution of the forward problem as boundary-trace Fourier coefficients.

    ``inner_modes[n + N] = u_n(s)`` and ``outer_modes[n + N] = u_n(1)``.
    """

    s: float
    N: int
    inner_modes: np.ndarray
    outer_modes: np.ndarray
    q: RobinCoefficient = None
    phi: NeumannData = None
    residuals: dict = field(default_factory=dict)

    @property
    def c0(self) -> float:
        """Constant term of ``u = c0 + d0 log r + ...``."""
        return float(self.outer_modes[self.N].real)

    @property
    def d0(self) -> float:
        return float((self.outer_modes[self.N] - self.inner_modes[self.N]).real / -math.log(self.s))

    def harmonic_coefficients(self):
        """``(c_n, d_n)`` with ``u_n(r) = c_n r^|n| + d_n r^-|n|`` for ``n != 0`` (zeros at n = 0)."""
        k = np.abs(np.arange(-self.N, self.N + 1)).astype(float)
        sigma = np.where(k == 0, 0.0, self.s ** k)
        d = np.where(k == 0, 0, sigma * (self.inner_modes - sigma * self.outer_modes) / (1 - sigma ** 2))
        c = np.where(k == 0, 0, self.outer_modes - d)
        return c, d

    def modes_at(self, r):
        out, inn, _, _ = _basis(self.s, self.N, r)
        return out * self.outer_modes + inn * self.inner_modes

    def radial_derivative_modes(self, r):
        _, _, dout, dinn = _basis(self.s, self.N, r)
        return dout * self.outer_modes + dinn * self.inner_modes

    def values(self, r, M):
        return _synth(self.modes_at(r), M).real

    def radial_derivative(self, r, M):
        return _synth(self.radial_derivative_modes(r), M).real

    def __call__(self, r, theta):
        k = np.arange(-self.N, self.N + 1)
        return (np.exp(1j * np.outer(np.atleast_1d(theta), k)) @ self.modes_at(r)).real


def _residuals(sol, M):
    theta = _grid(M)
    neumann = sol.radial_derivative(1.0, M) - sol.phi.values(theta)
    robin = -sol.radial_derivative(sol.s, M) + sol.q.values(theta) * sol.values(sol.s, M)
    return {"neumann": float(np.abs(neumann).max()), "robin": float(np.abs(robin).max())}


def solve_forward(geom: AnnulusGeometry, q: RobinCoefficient, phi: NeumannData, N: int,
                  tol: float = RESIDUAL_TOL) -> HarmonicSolution:
    """Galerkin solve in the harmonic basis with modes ``|n| <= N``.

    The outer Neumann condition holds mode by mode; the inner Robin
    condition is projected onto the same modes with ``q`` acting by
    convolution of Fourier coefficients. Dense LU with partial pivoting.
    Sup-norm boundary residuals are stored in ``solution.residuals``.
    """
    N = int(N)
    if N < 1 or N < 2 * max(q.K, phi.K):
        raise PreconditionError(f"N={N} must be at least 2 * max mode of q and Phi ({2 * max(q.K, phi.K)})")
    s, q0 = geom.s, geom.q0
    n = np.arange(-N, N + 1)
    k = np.abs(n).astype(float)
    D = np.where(k == 0, 0.0, k * np.tanh(k * q0) / s)
    qh = _pad(q.fourier_coeffs, 2 * N)  # q_hat_{-2N..2N}
    A = scipy.linalg.toeplitz(qh[2 * N:], qh[2 * N::-1]) + np.diag(D)
    ph = _pad(phi.fourier_coeffs, N)
    G = np.where(k == 0, ph / s, ph * _sech(k * q0) / s)
    lu, piv = scipy.linalg.lu_factor(A, check_finite=True)
    pivots = np.abs(np.diag(lu))
    if pivots.min() <= 1e-14 * pivots.max():
        raise SingularSystemError("Galerkin matrix is numerically singular")
    U = scipy.linalg.lu_solve((lu, piv), G)
    kk = np.where(k == 0, 1.0, k)
    V = np.where(k == 0, q0 * ph + U, ph * np.tanh(kk * q0) / kk + U * _sech(k * q0))
    sol = HarmonicSolution(s, N, U, V, q, phi)
    M = 1 << int(math.ceil(math.log2(4 * (N + q.K + phi.K) + 8)))
    sol.residuals = _residuals(sol, M)
    worst = max(sol.residuals.values())
    if worst > tol:
        warnings.warn(f"boundary residual {worst:.3g} exceeds {tol:g}; increase N", InsufficientModesWarning)
    return sol


def trace(sol: HarmonicSolution, circle=None, M: int = 256) -> BoundaryGrid:
    """Samples of ``u`` on ``circle`` ("inner", "outer") or on both when ``None``."""
    inner = sol.values(sol.s, M) if circle in (None, INNER) else None
    outer = sol.values(1.0, M) if circle in (None, OUTER) else None
    return BoundaryGrid(M, inner, outer)


@dataclass(frozen=True)
class SampledCoefficient:
    theta: np.ndarray
    values: np.ndarray


def recover_q(sol: HarmonicSolution, geom: AnnulusGeometry = None, M: int = 256) -> SampledCoefficient:
    """``q = d_r u(s, .) / u(s, .)`` on ``M`` nodes of the inner circle."""
    if geom is not None and geom.s != sol.s:
        raise PreconditionError("geometry does not match the solution")
    u = sol.values(sol.s, M)
    du = sol.radial_derivative(sol.s, M)
    scale = max(np.abs(u).max(), 1e-300)
    if np.abs(u).min() <= 1e-12 * scale:
        raise VanishingTraceError("inner trace vanishes; the Robin identity cannot be inverted")
    return SampledCoefficient(_grid(M), du / u)


@dataclass
class StabilityRecord:
    t: float
    delta_u: float
    delta_q: float
    ratio: float
    hypothesis_ok: bool
    log_delta_u: float = float("nan")
    degenerate: bool = False

    CSV_COLUMNS = ("t", "delta_u", "delta_q", "ratio", "hypothesis_ok")

    def csv_values(self):
        return [self.t, self.delta_u, self.delta_q, self.ratio, self.hypothesis_ok]

    def to_dict(self):
        return {"t": self.t, "delta_u": self.delta_u, "delta_q": self.delta_q, "ratio": self.ratio,
                "hypothesis_ok": self.hypothesis_ok, "log_delta_u": self.log_delta_u,
                "degenerate": self.degenerate}


def stability_experiment(geom: AnnulusGeometry, q_star: RobinCoefficient, dq, phi: NeumannData, N: int,
                         t_list, constants: KernelConstants = None, M: int = 1024):
    """Forward-solve ``q_star`` and ``q_star + t dq`` for every ``t`` and compare.

    ``delta_u`` is the normalised ``L^1`` distance of the outer traces,
    ``delta_q`` the sup distance of the coefficients, and
    ``ratio = delta_q |log delta_u|^(n-1)`` with ``n`` the smoothness order of
    ``q_star``. Records keep the order of ``t_list``.
    """
    if q_star.n < 2:
        raise PreconditionError("smoothness order n must be at least 2")
    constants = (constants or compute_Cs(geom)).with_arc(1.0)
    base = trace(solve_forward(geom, q_star, phi, N), OUTER, M)
    full = BoundaryArc.full(OUTER)
    theta = _grid(ADMISSIBILITY_GRID)
    dq_vals = _series_values(_coeff_array(dq), theta)
    records = []
    for t in t_list:
        t = float(t)
        q2 = q_star.perturbed(dq, t)
        other = trace(solve_forward(geom, q2, phi, N), OUTER, M)
        diff = BoundaryGrid(M, None, other.outer_values - base.outer_values)
        delta_u = l1_norm_on_arc(diff, full)
        delta_q = float(np.abs(t * dq_vals).max())
        if delta_u > 0:
            log_du = math.log(delta_u)
            ratio = delta_q * abs(log_du) ** (q_star.n - 1)
            records.append(StabilityRecord(t, delta_u, delta_q, ratio, log_du < constants.threshold_log, log_du))
        else:
            records.append(StabilityRecord(t, delta_u, delta_q, float("nan"), False, -math.inf, True))
    return records


def records_to_csv(records, fh=None):
    own = fh is None
    if own:
        fh = io.StringIO()
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(StabilityRecord.CSV_COLUMNS)
    for rec in records:
        w.writerow([_fmt(v) for v in rec.csv_values()])
    if own:
        return fh.getvalue()


def records_to_json(records):
    return json.dumps([r.to_dict() for r in records], sort_keys=True, indent=2)


def _fmt(v):
    if isinstance(v, bool):
        return str(v).lower()
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return f"{float(v):.17g}"


def parse_modes(text):
    """``"0:2, 1:0.25"`` -> ``{0: 2, 1: 0.25}`` (complex literals allowed, k >= 0)."""
    out = {}
    for item in str(text).split(","):
        item = item.strip()
        if not item:
            continue
        k, a = item.split(":")
        k = int(k)
        if k < 0:
            raise PreconditionError("list only non-negative modes; the negative ones follow by symmetry")
        out[k] = complex(a.strip().replace(" ", ""))
    return out


def problem_from_config(cfg: dict):
    """Build ``(geom, q, phi, N)`` from a key-value mapping.

    Keys: ``s``, ``N``, ``c``, ``c_prime``, ``n``, ``q_modes``, ``phi_modes``.
    """
    try:
        geom = AnnulusGeometry(float(cfg["s"]))
        q = RobinCoefficient.from_terms(parse_modes(cfg.get("q_modes", "0:2")), float(cfg.get("c", 0.5)),
                                        float(cfg.get("c_prime", 10.0)), int(cfg.get("n", 2)))
        phi = NeumannData.from_terms(parse_modes(cfg.get("phi_modes", "0:1")))
        N = int(cfg.get("N", 32))
    except (KeyError, ValueError) as exc:
        raise PreconditionError(f"bad solver config: {exc}") from exc
    return geom, q, phi, N
