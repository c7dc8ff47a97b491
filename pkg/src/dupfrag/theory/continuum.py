"""Continuum limit: rescaled variables and fragmentation with input.

In rescaled units (lengths over the source first moment ``M1``, time
``t * beta``) the stationary density ``f`` obeys

    0 = -2 x mu_bar f(x) + 4 mu_bar int_x^inf f(y) dy + 2 p(x).

With ``F(x) = int_x^inf f`` this integrates to
``F(x) = Q(x) / (mu_bar x**2)``, ``Q(x) = int_x^inf y p(y) dy``, and therefore
``f(x) = (2 Q(x) / x**3 + p(x) / x) / mu_bar``. Every point mass ``w`` of the
source at ``x0`` puts a point mass ``w / (x0 mu_bar)`` into ``f``.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy import integrate

from ..errors import InputError
from ..model import ModelParams

QUAD_EPSREL = 1e-9


@dataclass(frozen=True)
class ScaledParams:
    """Dimensionless parameters; ``x = n * a_bar`` on the rescaled grid."""

    a_bar: float
    L_bar: float
    mu_bar: float
    t_bar: float
    M1: float
    N: float
    warnings: tuple[str, ...] = ()

    def m_bar(self, m):
        return np.asarray(m, dtype=np.float64) / self.M1

    def x(self, n):
        return np.asarray(n, dtype=np.float64) * self.a_bar

    def count_from_density(self, f_hat):
        """Discrete count per length from the continuum density, ``f = a_bar f_hat``."""
        return self.a_bar * np.asarray(f_hat)


def nondimensionalize(params: ModelParams, t: float = 0.0) -> ScaledParams:
    if params.beta <= 0:
        raise InputError("rescaling divides by beta; need beta > 0")
    M1 = params.M1
    if not M1 > 0:
        raise InputError("source first moment must be positive")
    warnings = []
    if M1 <= params.a:
        warnings.append(f"M1={M1:g} is not large compared with a={params.a}; "
                        "the continuum limit does not apply")
    return ScaledParams(a_bar=params.a / M1, L_bar=params.L / M1,
                        mu_bar=M1 * params.mu / params.beta, t_bar=t * params.beta,
                        M1=M1, N=params.L / params.a, warnings=tuple(warnings))


@dataclass(frozen=True)
class ContinuumSource:
    """Source density ``p(x)`` on ``[lo, hi]`` plus optional point masses.

    Total mass (density plus atoms) must be one.
    """

    density: Callable[[float], float] | None = None
    lo: float = 0.0
    hi: float = math.inf
    atoms: tuple[tuple[float, float], ...] = ()
    name: str = "custom"
    _tail_moment: Callable[[float], float] | None = field(default=None, repr=False)

    def __post_init__(self):
        mass = sum(w for _, w in self.atoms)
        if self.density is not None:
            mass += self._quad(self.density, self.lo, self.hi)
            mom = self._quad(lambda y: y * self.density(y), self.lo, self.hi)
            if not np.isfinite(mom):
                raise InputError("source density has no finite first moment")
        if not math.isclose(mass, 1.0, rel_tol=1e-6):
            raise InputError(f"source must integrate to 1, got {mass:.9g}")

    @staticmethod
    def _quad(fn, a, b):
        # quadrature warnings (slow convergence, divergence) mean the integral
        # is not trustworthy, so they are turned into input errors
        try:
            with warnings.catch_warnings():
                warnings.simplefilter("error", integrate.IntegrationWarning)
                val, _ = integrate.quad(fn, a, b, epsrel=QUAD_EPSREL, limit=200)
        except Exception as exc:  # quad raises a zoo of error types
            raise InputError(f"source is not integrable: {exc}") from exc
        return val

    def p(self, x: float) -> float:
        if self.density is None or not (self.lo <= x <= self.hi):
            return 0.0
        return float(self.density(x))

    def tail_moment(self, x: float) -> float:
        """``Q(x) = int_x^inf y p(y) dy`` including atoms strictly above ``x``."""
        q = sum(x0 * w for x0, w in self.atoms if x0 > x)
        if self.density is not None and x < self.hi:
            if self._tail_moment is not None:
                q += self._tail_moment(x)
            else:
                q += self._quad(lambda y: y * self.density(y), max(x, self.lo), self.hi)
        return q


def monodisperse_source() -> ContinuumSource:
    """All duplications have the rescaled length 1."""
    return ContinuumSource(atoms=((1.0, 1.0),), name="monodisperse")


def uniform_density_source(lo: float, hi: float) -> ContinuumSource:
    """Uniform density on ``[lo, hi]``; ``lo=0.5, hi=1.5`` has unit first moment."""
    if not 0 < lo < hi:
        raise InputError("need 0 < lo < hi")
    h = 1.0 / (hi - lo)

    def density(x):
        return h if lo <= x <= hi else 0.0

    def tail(x):
        x = max(x, lo)
        return 0.5 * h * (hi * hi - x * x)

    return ContinuumSource(density=density, lo=lo, hi=hi, name="uniform", _tail_moment=tail)


@dataclass(frozen=True)
class ContinuumSolution:
    source: ContinuumSource
    mu_bar: float

    @property
    def atoms(self) -> list[tuple[float, float]]:
        return [(x0, w / (x0 * self.mu_bar)) for x0, w in self.source.atoms]

    def density(self, x):
        xs = np.atleast_1d(np.asarray(x, dtype=np.float64))
        out = np.array([(2.0 * self.source.tail_moment(v) / v**3 + self.source.p(v) / v)
                        / self.mu_bar for v in xs])
        return float(out[0]) if np.ndim(x) == 0 else out

    def cumulative(self, x):
        """``F(x) = int_x^inf f`` (atoms included) from the closed form."""
        xs = np.atleast_1d(np.asarray(x, dtype=np.float64))
        out = np.array([self.source.tail_moment(v) / (self.mu_bar * v * v) for v in xs])
        return float(out[0]) if np.ndim(x) == 0 else out


def continuum_stationary(x, source: ContinuumSource, mu_bar: float):
    """Stationary density at ``x`` and the list of point masses ``(x0, mass)``."""
    if not mu_bar > 0:
        raise InputError(f"mu_bar must be positive, got {mu_bar}")
    if np.any(np.asarray(x) <= 0):
        raise InputError("x must be positive")
    sol = ContinuumSolution(source, mu_bar)
    return sol.density(x), sol.atoms


def continuum_residual(x, source: ContinuumSource, mu_bar: float) -> np.ndarray:
    """Relative residual of the stationary equation at each ``x``.

    The integral term is recomputed by quadrature of the returned density
    (plus its atoms), not taken from the closed form.
    """
    sol = ContinuumSolution(source, mu_bar)
    upper = source.hi if source.density is not None else 0.0
    upper = max([upper] + [x0 for x0, _ in source.atoms])
    breaks = [b for b in (source.lo, source.hi) if np.isfinite(b) and b > 0]
    out = []
    for v in np.atleast_1d(np.asarray(x, dtype=np.float64)):
        f = sol.density(v)
        integral = sum(w for x0, w in sol.atoms if x0 > v)
        if v < upper:
            pts = [b for b in breaks if v < b < upper]
            val, _ = integrate.quad(sol.density, v, upper, epsrel=1e-12, epsabs=0.0,
                                    points=pts or None, limit=400)
            integral += val
        terms = (-2.0 * v * mu_bar * f, 4.0 * mu_bar * integral, 2.0 * source.p(v))
        scale = sum(abs(t) for t in terms)
        out.append(abs(sum(terms)) / scale if scale > 0 else 0.0)
    return np.array(out)


def continuum_tail_amplitude(M1: float, beta: float, mu: float, a: float = 1.0) -> float:
    """``m**3 f(m)`` for ``m < M1`` from the monodisperse continuum solution.

    Redimensionalizes ``f(m) = a_bar * f_hat(m / M1)``; the result is
    ``2 M1 beta / mu``.
    """
    mu_bar = M1 * mu / beta
    sol = ContinuumSolution(monodisperse_source(), mu_bar)
    m = 0.5 * M1
    return (a / M1) * sol.density(m / M1) * m**3
