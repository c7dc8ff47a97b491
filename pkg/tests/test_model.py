import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.stats import chisquare

from dupfrag.errors import InputError
from dupfrag.model import (LengthHistogram, ModelParams, Monoscale, PowerLaw, ShiftedPowerLaw,
                           SourceDistribution, UniformInterval, first_moment, phi1,
                           sample_length, shifted_powerlaw_presets, source_pmf)


def test_phi1_values():
    assert phi1(2.0, 1) == 1.0
    assert phi1(1.0, 3) == pytest.approx(11 / 6, rel=1e-15)
    assert phi1(2.0, 10**6) == pytest.approx(1.6449331, abs=1e-6)
    assert abs(phi1(2.0, 10**6) - math.pi**2 / 6) < 1.1e-6


def test_phi1_rejects_zero_terms():
    with pytest.raises(InputError):
        phi1(2.0, 0)


@given(st.floats(0.1, 4.0), st.integers(1, 200))
def test_phi1_monotone_in_N(gamma, N):
    assert 0 < phi1(gamma, N) <= phi1(gamma, N + 1)


def test_pmf_examples():
    assert source_pmf(Monoscale(5), 5) == 1.0
    assert source_pmf(Monoscale(5), 4) == 0.0
    assert source_pmf(PowerLaw(2.0, 3), 1) == pytest.approx(36 / 49, rel=1e-14)
    assert source_pmf(UniformInterval(900, 1100), 1000) == pytest.approx(1 / 201, rel=1e-14)
    assert source_pmf(UniformInterval(900, 1100), 899) == 0.0


def test_pmf_rejects_nonpositive_length():
    with pytest.raises(InputError):
        source_pmf(Monoscale(5), 0)


def test_first_moment_examples():
    assert first_moment(Monoscale(1024)) == 1024
    assert first_moment(PowerLaw(2.0, 3)) == pytest.approx(66 / 49, rel=1e-14)
    assert first_moment(UniformInterval(900, 1100)) == pytest.approx(1000, rel=1e-14)


ALL_SOURCES = [Monoscale(7), PowerLaw(2.4, 1000), PowerLaw(1.0, 10**5), UniformInterval(2, 4),
               UniformInterval(900, 1100), *shifted_powerlaw_presets(2.4, 10**4)]


@pytest.mark.parametrize("src", ALL_SOURCES, ids=repr)
def test_pmf_normalized(src):
    total = math.fsum(src.pmf(int(m)) for m in src.lengths)
    assert abs(total - 1.0) < 1e-12


@pytest.mark.parametrize("gamma", [1.5, 2.4, 3.0])
@pytest.mark.parametrize("N", [10, 10**3, 10**5])
def test_powerlaw_moment_matches_brute_force(gamma, N):
    src = PowerLaw(gamma, N)
    brute = math.fsum(m * m**-gamma for m in range(1, N + 1)) / math.fsum(
        m**-gamma for m in range(1, N + 1))
    assert src.first_moment == pytest.approx(brute, rel=1e-10)


def test_sample_monoscale_constant():
    rng = np.random.default_rng(0)
    assert all(sample_length(Monoscale(7), rng) == 7 for _ in range(20))


@pytest.mark.parametrize("src", [PowerLaw(2.0, 3), UniformInterval(2, 4), PowerLaw(2.4, 1000),
                                 ShiftedPowerLaw(10, 2.4, 500)], ids=repr)
def test_sampling_chi_square(src):
    rng = np.random.default_rng(12345)
    draws = src.sample(rng, 10**6)
    obs = np.bincount(draws - src.min_length, minlength=len(src.lengths))
    expected = src.probs * len(draws)
    # pool sparse cells so the chi-square approximation holds
    order = np.argsort(expected)
    o, e = obs[order].astype(float), expected[order]
    small = np.cumsum(e) < 50
    o = np.append(o[~small], o[small].sum()) if small.any() else o
    e = np.append(e[~small], e[small].sum()) if small.any() else e
    assert chisquare(o, e).pvalue > 0.001


def test_sampling_frequency_examples():
    rng = np.random.default_rng(3)
    d = PowerLaw(2.0, 3).sample(rng, 10**6)
    assert abs(np.mean(d == 1) - 36 / 49) < 0.002
    d = UniformInterval(2, 4).sample(rng, 10**6)
    for m in (2, 3, 4):
        assert abs(np.mean(d == m) - 1 / 3) < 0.002


def test_source_json_round_trip():
    for src in ALL_SOURCES:
        assert SourceDistribution.from_dict(src.to_dict()) == src
    with pytest.raises(InputError):
        SourceDistribution.from_dict({"type": "gaussian"})


def test_model_params_invariants():
    p = ModelParams(L=10**7, beta=1.0, mu=1e-4, source=Monoscale(1024))
    assert p.lam == pytest.approx(1e-7)
    assert p.M1 == 1024
    assert ModelParams.from_dict(p.to_dict()) == p
    with pytest.raises(InputError):
        ModelParams(L=1, beta=1.0, mu=0.0, source=Monoscale(1))
    with pytest.raises(InputError):
        ModelParams(L=100, beta=1.0, mu=-1.0, source=Monoscale(4))
    with pytest.raises(InputError):
        ModelParams(L=100, beta=1.0, mu=0.0, source=Monoscale(101))
    with pytest.raises(InputError):
        ModelParams(L=100, beta=1.0, mu=0.0, source=Monoscale(4), lam=0.5)


hist_maps = st.dictionaries(st.integers(1, 50), st.floats(0, 1e6), max_size=20)


@settings(max_examples=100)
@given(hist_maps, hist_maps, hist_maps, st.integers(1, 50), st.integers(1, 50),
       st.integers(1, 50))
def test_merge_associative_and_weighted(a, b, c, na, nb, nc):
    ha, hb, hc = (LengthHistogram(d, n) for d, n in ((a, na), (b, nb), (c, nc)))
    left = ha.merge(hb).merge(hc)
    right = ha.merge(hb.merge(hc))
    assert left.realizations == right.realizations == na + nb + nc
    for m in set(a) | set(b) | set(c):
        want = (na * ha.get(m) + nb * hb.get(m) + nc * hc.get(m)) / (na + nb + nc)
        assert left.get(m) == pytest.approx(want, rel=1e-12, abs=1e-9)
        assert right.get(m) == pytest.approx(want, rel=1e-12, abs=1e-9)
    ab, ba = ha.merge(hb), hb.merge(ha)
    for m in set(a) | set(b):
        assert ab.get(m) == pytest.approx(ba.get(m), rel=1e-12, abs=1e-9)


def test_histogram_validation():
    with pytest.raises(InputError):
        LengthHistogram({0: 1.0})
    with pytest.raises(InputError):
        LengthHistogram({3: -1.0})
    with pytest.raises(InputError):
        LengthHistogram({3: 1.0}, counting_mode="pairs")
    h = LengthHistogram({5: 2.0, 3: 2.0, 9: 1.0})
    assert h.mode == 3 and h.max_length == 9 and h.total == 5.0
    assert h.dense(10)[5] == 2.0
