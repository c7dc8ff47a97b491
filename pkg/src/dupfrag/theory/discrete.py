"""Discrete balance equations for the expected repeat-length counts.

One time step of the mean-field dynamics is ``f <- A f + delta``. ``A`` is
upper triangular with a constant strict upper part, so everything here is
stored in structured form (diagonal, one off-diagonal scalar, source vector)
and the dense matrix is only materialized on request.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import solve_triangular

from ..errors import InputError, NumericalError
from ..model import LengthHistogram, ModelParams, Monoscale

logger = logging.getLogger(__name__)

METHODS = ("iteration", "matrix_limit", "closed_form", "backward_substitution", "continuum")


@dataclass(frozen=True, eq=False)
class TransitionSystem:
    """``f(t+1) = A f(t) + delta`` on lengths ``m = 1..size``."""

    diag: np.ndarray
    upper: float
    delta: np.ndarray
    params: ModelParams
    diagnostics: tuple[str, ...] = ()

    @property
    def size(self) -> int:
        return len(self.diag)

    @property
    def matrix(self) -> np.ndarray:
        n = self.size
        A = np.triu(np.full((n, n), self.upper), k=1)
        A[np.diag_indices(n)] = self.diag
        return A

    @property
    def eigenvalues(self) -> np.ndarray:
        # triangular: the spectrum is the diagonal
        return self.diag.copy()

    @property
    def spectral_radius(self) -> float:
        return float(np.max(np.abs(self.diag)))

    @property
    def is_convergent(self) -> bool:
        return bool(np.all(np.abs(self.diag) < 1.0))

    def step(self, f: np.ndarray) -> np.ndarray:
        tail = np.cumsum(f[::-1])[::-1]
        above = np.append(tail[1:], 0.0)
        return self.diag * f + self.upper * above + self.delta


def _diagnose(params: ModelParams, scale: float, radius_ok: bool, dt: float) -> tuple[str, ...]:
    notes = []
    if params.mu * dt >= 1.0 / (2.0 * scale):
        notes.append(f"mu*dt={params.mu * dt:g} is not below 1/(2*scale)={1 / (2 * scale):g}")
    if scale >= params.L / 10:
        notes.append(f"source scale {scale:g} is not small compared with L={params.L}")
    if not radius_ok:
        notes.append("some eigenvalue has modulus >= 1; iteration cannot converge")
    for note in notes:
        logger.warning("transition system: %s", note)
    return tuple(notes)


def build_transition_system(params: ModelParams, dt: float = 1.0) -> TransitionSystem:
    """Matrix form of the balance equation.

    A monoscale source uses the single-length equation verbatim; any other
    source uses the general-source form, whose duplication annihilation term
    ``(1/N) sum_r (m + r - 1) P(r)`` reduces to ``(m - 1 + M1) / N``.
    """
    if params.beta <= 0:
        raise InputError("the balance equation needs beta > 0")
    a, L, beta, mu = params.a, params.L, params.beta, params.mu
    src = params.source
    if isinstance(src, Monoscale):
        D = src.D
        if D < 2 or D > L:
            raise InputError(f"need 2 <= D <= L, got D={D}, L={L}")
        m = np.arange(1, D + 1, dtype=np.float64)
        diag = 1.0 - 2.0 * ((m + D - a) * beta / L + mu * m)
        upper = 4.0 * a * beta / L + 4.0 * a * mu
        delta = np.zeros(D)
        delta[-1] = 2.0 * beta
        scale = float(D)
    else:
        N = L / a
        size = src.max_length
        m = np.arange(1, size + 1, dtype=np.float64)
        diag = 1.0 - 2.0 * (beta * (m - 1.0 + src.first_moment) / N + a * mu * m)
        upper = 4.0 * beta / N + 4.0 * a * mu
        delta = np.zeros(size)
        delta[src.lengths - 1] = 2.0 * beta * src.probs
        scale = src.first_moment
    diag = diag * dt + (1.0 - dt)
    upper, delta = upper * dt, delta * dt
    ok = bool(np.all(np.abs(diag) < 1.0))
    return TransitionSystem(diag, upper, delta, params, _diagnose(params, scale, ok, dt))


def quoted_eigenvalue_formula(params: ModelParams) -> np.ndarray:
    """Eigenvalues as quoted alongside the matrix form, ``1 - beta(i+D-1)/L - mu i``.

    Kept for comparison only: they lack the factor 2 carried by the balance
    equation's diagonal, which is what ``TransitionSystem.eigenvalues`` uses.
    """
    D = params.source.D
    i = np.arange(1, D + 1, dtype=np.float64)
    return 1.0 - params.beta * (i + D - 1) / params.L - params.mu * i


def iterate_balance(f0, system: TransitionSystem, steps: int) -> np.ndarray:
    """Trajectory ``[f(0), f(1), ..., f(steps)]`` as rows of an array."""
    f = np.asarray(f0, dtype=np.float64)
    if f.shape != (system.size,):
        raise InputError(f"f0 must have length {system.size}")
    out = np.empty((steps + 1, system.size))
    out[0] = f
    for t in range(steps):
        f = system.step(f)
        out[t + 1] = f
    return out


DIVERGENCE_FACTOR = 1e3


@dataclass
class IterationResult:
    f: np.ndarray
    steps: int
    converged: bool
    increments: list[float] = field(default_factory=list)


def solve_by_iteration(system: TransitionSystem, f0=None, tol: float = 1e-13,
                       max_steps: int = 1_000_000, growth_window: int = 10) -> IterationResult:
    """Iterate to the fixed point.

    Divergence is declared once the increment norm has grown for
    ``growth_window`` consecutive steps and exceeds ``DIVERGENCE_FACTOR`` times
    its first value; it raises :class:`NumericalError`. The factor matters: the
    triangular update is non-normal, so a convergent system can show dozens of
    growing steps before it decays, but that transient stays below about
    ten-fold amplification.
    """
    f = np.zeros(system.size) if f0 is None else np.asarray(f0, dtype=np.float64).copy()
    first = None
    prev = math.inf
    growing = 0
    incs = []
    for t in range(1, max_steps + 1):
        nxt = system.step(f)
        inc = float(np.max(np.abs(nxt - f)))
        f = nxt
        if len(incs) < 64:
            incs.append(inc)
        if not np.isfinite(inc):
            raise NumericalError("balance iteration overflowed; spectral radius >= 1 "
                                 f"(max |eigenvalue| = {system.spectral_radius:.6g})")
        if first is None:
            first = inc
        growing = growing + 1 if inc > prev else 0
        prev = inc
        if growing >= growth_window and inc > DIVERGENCE_FACTOR * first:
            raise NumericalError(
                "balance iteration diverges: increments grew for "
                f"{growing} consecutive steps; the condition |eigenvalue| < 1 "
                f"(mu*dt < 1/D) is violated, max |eigenvalue| = {system.spectral_radius:.6g}")
        if inc <= tol * max(1.0, float(np.max(np.abs(f)))):
            return IterationResult(f, t, True, incs)
    return IterationResult(f, max_steps, False, incs)


@dataclass(frozen=True, eq=False)
class StationarySolution:
    """Stationary expected counts ``f[m-1]`` for ``m = 1..len(f)``."""

    f: np.ndarray
    params: ModelParams
    method: str

    def __post_init__(self):
        if self.method not in METHODS:
            raise InputError(f"unknown method {self.method!r}")

    @property
    def lengths(self) -> np.ndarray:
        return np.arange(1, len(self.f) + 1)

    def __call__(self, m):
        return self.f[np.asarray(m) - 1]

    def to_histogram(self) -> LengthHistogram:
        return LengthHistogram.from_arrays(self.lengths, np.maximum(self.f, 0.0))


def matrix_limit(system: TransitionSystem, method: str = "solve") -> np.ndarray:
    """Limit of the iteration, ``sum_k A^k delta``.

    ``solve`` uses ``(I - A) f = delta``; ``eigen`` sums the geometric series
    in the eigenbasis, ``T diag(1/(1 - lambda)) T^-1 delta``.
    """
    if not system.is_convergent:
        raise NumericalError(f"spectral radius {system.spectral_radius:.6g} >= 1: no limit")
    A = system.matrix
    n = system.size
    if method == "solve":
        return solve_triangular(np.eye(n) - A, system.delta, lower=False)
    if method == "eigen":
        lam, T = np.linalg.eig(A)
        coeff = np.linalg.solve(T, system.delta)
        return np.real(T @ (coeff / (1.0 - lam)))
    raise InputError(f"unknown matrix_limit method {method!r}")


def backward_substitution(system: TransitionSystem) -> np.ndarray:
    """Exact stationary vector in O(size) using a running suffix sum.

    The balance is solved whenever ``I - A`` is nonsingular. A spectral radius
    of one or more only means the iteration never reaches it, which is logged.
    """
    if not system.is_convergent:
        logger.warning("spectral radius %.6g >= 1: the stationary state is not an "
                       "attractor of the iteration (mu*dt < 1/D violated)",
                       system.spectral_radius)
    if np.any(system.diag == 1.0):
        raise NumericalError("I - A is singular; no stationary state")
    c = (1.0 - system.diag).tolist()
    d = system.delta.tolist()
    u = system.upper
    f = [0.0] * len(c)
    above = 0.0
    for i in range(len(c) - 1, -1, -1):
        fi = (u * above + d[i]) / c[i]
        f[i] = fi
        above += fi
    return np.array(f)


def stationary_monoscale(params: ModelParams) -> StationarySolution:
    """Stationary state for ``m = 1..D`` including the ``m = D`` row."""
    system = build_transition_system(params)
    return StationarySolution(backward_substitution(system), params, "backward_substitution")


def stationary_powerlaw(params: ModelParams) -> StationarySolution:
    """Stationary state of the general-source equation on ``m = 1..max support``."""
    system = build_transition_system(params)
    return StationarySolution(backward_substitution(system), params, "backward_substitution")


def boundary_value_monoscale(D: int, L: float, beta: float, mu: float, a: int = 1) -> float:
    """``f(D) = beta L / (beta (2D - a) + mu D L)`` from the ``m = D`` row."""
    return beta * L / (beta * (2 * D - a) + mu * D * L)


def stationary_exact_monoscale(m, D: int, L: float, beta: float, mu: float, a: int = 1):
    """Three-term closed form for ``1 <= m < D``, evaluated as written.

    For ``beta != 1`` the result is the exact stationary count divided by
    ``beta``; at ``beta = 1`` it is exact for any ``mu``.
    """
    m_arr = np.asarray(m, dtype=np.float64)
    if np.any(m_arr < 1) or np.any(m_arr >= D):
        raise InputError(f"closed form holds for 1 <= m < D={D}")

    def term(shift, mu_shift):
        x = m_arr + shift
        return (D - x) / (beta * (D + x) / L + (m_arr + mu_shift) * mu)

    with np.errstate(divide="ignore", invalid="ignore"):
        out = term(-a, 0) - 2.0 * term(0, a) + term(a, 2 * a)
    if np.isinf(mu):
        out = np.zeros_like(m_arr)
    return float(out) if np.ndim(out) == 0 else out


def tail_asymptote_monoscale(m, D: int, L: float, beta: float, mu: float, a: int = 1):
    """``(proportional_form, second_difference)`` of the tail approximation.

    ``proportional_form = (beta (D+m)/L + m mu)**-3`` and ``second_difference``
    is ``g(m-a) - 2 g(m) + g(m+a)`` with ``g(x) = (D-x) / (beta (D+x)/L + mu x)``.
    """
    m_arr = np.asarray(m, dtype=np.float64)
    if np.any(m_arr >= D):
        raise InputError(f"tail asymptote needs m < D={D}")

    def g(x):
        return (D - x) / (beta * (D + x) / L + mu * x)

    prop = (beta * (D + m_arr) / L + m_arr * mu) ** -3.0
    second = g(m_arr - a) - 2.0 * g(m_arr) + g(m_arr + a)
    return prop, second
