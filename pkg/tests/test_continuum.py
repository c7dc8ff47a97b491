import numpy as np
import pytest

from dupfrag.errors import InputError
from dupfrag.model import ModelParams, Monoscale
from dupfrag.theory import (ContinuumSource, continuum_residual, continuum_stationary,
                            continuum_tail_amplitude, monodisperse_source, nondimensionalize,
                            uniform_density_source)


def test_nondimensionalize():
    s = nondimensionalize(ModelParams(L=10**7, beta=1.0, mu=1e-4, source=Monoscale(1024)))
    assert s.a_bar == pytest.approx(1 / 1024)
    assert s.mu_bar == pytest.approx(0.1024)
    assert s.L_bar == pytest.approx(10**7 / 1024)
    assert s.a_bar * s.M1 == 1
    assert not s.warnings
    s = nondimensionalize(ModelParams(L=100, beta=1.0, mu=0.0, source=Monoscale(1)))
    assert s.a_bar == 1 and s.warnings
    p = ModelParams(L=10**7, beta=1.0, mu=0.0, source=Monoscale(10), lam=1e-7)
    assert nondimensionalize(p, t=5.0).t_bar == 5.0


def test_monodisperse_values():
    dens, atoms = continuum_stationary(0.5, monodisperse_source(), 1.0)
    assert dens == pytest.approx(16.0, rel=1e-12)
    assert continuum_stationary(2.0, monodisperse_source(), 1.0)[0] == 0.0
    assert atoms == [(1.0, 1.0)]
    x = np.logspace(-3, -1e-3, 100)
    for mu_bar in (0.1, 1.0, 3.0):
        dens, atoms = continuum_stationary(x, monodisperse_source(), mu_bar)
        np.testing.assert_allclose(dens, 2 / (mu_bar * x**3), rtol=1e-9)
        assert atoms[0][1] == pytest.approx(1 / mu_bar)


@pytest.mark.parametrize("source", [monodisperse_source(), uniform_density_source(0.5, 1.5),
                                    uniform_density_source(0.1, 2.0)],
                         ids=["mono", "uniform", "uniform-wide"])
@pytest.mark.parametrize("mu_bar", [0.3, 1.0])
def test_residual(source, mu_bar):
    x = np.logspace(-3, np.log10(3.0), 100)
    assert np.max(continuum_residual(x, source, mu_bar)) < 1e-6


def test_generic_density_by_quadrature():
    # a source given only as a density uses adaptive quadrature for Q(x)
    src = ContinuumSource(density=lambda y: 0.75 * (1 - (y - 1) ** 2) if 0 <= y <= 2 else 0.0,
                          lo=0.0, hi=2.0, name="parabolic")
    x = np.logspace(-2, np.log10(1.9), 40)
    assert np.max(continuum_residual(x, src, 1.0)) < 1e-6


def test_rejects_bad_input():
    with pytest.raises(InputError):
        continuum_stationary(0.5, monodisperse_source(), 0.0)
    with pytest.raises(InputError):
        continuum_stationary(-1.0, monodisperse_source(), 1.0)
    with pytest.raises(InputError):
        ContinuumSource(density=lambda y: 2.0 if 0 <= y <= 1 else 0.0, lo=0.0, hi=1.0)
    with pytest.raises(InputError):
        ContinuumSource(density=lambda y: 1.0 / y**2 if y >= 1 else 0.0, lo=1.0, hi=np.inf)


def test_redimensionalized_amplitude():
    assert continuum_tail_amplitude(1024, 1.0, 1e-3) == pytest.approx(2 * 1024 / 1e-3, rel=1e-12)
    assert continuum_tail_amplitude(1e3, 1.0, 1e-4) == pytest.approx(2e7, rel=1e-12)
