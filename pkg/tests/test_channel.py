import dataclasses
import math

import mpmath
import numpy as np
import pytest
from hypothesis import assume, given
from hypothesis import strategies as st

from motplan.channel import (
    ChannelParams,
    DivisionDomain,
    DomainError,
    InvalidCoefficient,
    Modulation,
    SuccessRateConvention as Conv,
    avg_packet_error_rate,
    avg_snr,
    coverage_radius,
    expected_retransmissions,
    expected_retransmissions_or_one,
    max_coverage_distance,
    per_coefficients,
    received_power,
    slant_distance,
    success_probability,
)

# ln(128) / 2 from mpmath at 30 digits
A128 = 2.4260151319598085829603124251
# 1 - exp(-A128/10) * Gamma(1.05), mpmath at 30 digits
ETA_128_AT_10 = 0.236204034004790808789778323665

UNITY = ChannelParams(tx_power=1.0, wavelength=4 * math.pi, rx_sensitivity=1.0, noise_power=1.0)


def mp_eta(g, a, b):
    mpmath.mp.dps = 30
    return float(1 - mpmath.e ** (-mpmath.mpf(a) / g) * mpmath.gamma(1 + mpmath.mpf(b) / g))


def test_modulation_constants():
    assert (Modulation.fsk().c_m, Modulation.fsk().k_m) == (0.5, 0.5)
    assert (Modulation.bpsk().c_m, Modulation.bpsk().k_m) == (1.0, 2.0)
    with pytest.raises(ValueError):
        Modulation("BPSK", 0.5, 2.0)
    with pytest.raises(ValueError):
        Modulation.custom(0.0, 1.0)
    assert Modulation.custom(0.3, 0.7).name == "Custom"


@pytest.mark.parametrize(
    "mod,n,expected",
    [(Modulation.bpsk(), 1, (0.0, 0.5)), (Modulation.bpsk(), 128, (A128, 0.5)), (Modulation.fsk(), 2, (0.0, 2.0))],
)
def test_per_coefficients(mod, n, expected):
    a, b = per_coefficients(mod, n)
    assert a == pytest.approx(expected[0], rel=1e-14, abs=0)
    assert b == expected[1]


def test_per_coefficients_negative_a():
    with pytest.raises(InvalidCoefficient):
        per_coefficients(Modulation.fsk(), 1)


def test_eta_examples():
    assert avg_packet_error_rate(1e12, 0.0, 0.5) == pytest.approx(0.0, abs=1e-11)
    assert avg_packet_error_rate(10.0, A128, 0.5) == pytest.approx(ETA_128_AT_10, rel=1e-12)
    assert avg_packet_error_rate(5.0, A128, 0.5) > avg_packet_error_rate(50.0, A128, 0.5)
    with pytest.raises(DomainError):
        avg_packet_error_rate(0.0, A128, 0.5)
    with pytest.raises(DomainError):
        avg_packet_error_rate(np.array([1.0, -2.0]), A128, 0.5)


def test_eta_matches_mpmath_gamma():
    rng = np.random.default_rng(11)
    for _ in range(200):
        g = 10 ** rng.uniform(-0.5, 5)
        a = rng.uniform(0, 5)
        b = rng.choice([0.5, 2.0, rng.uniform(0.1, 3)])
        want = min(max(mp_eta(g, a, b), 0.0), 1.0)
        assert avg_packet_error_rate(g, a, b) == pytest.approx(want, rel=1e-10, abs=1e-14)


def monotone_on_grid(a, b, lo=0.1):
    """d ln(1 - eta)/d gamma_bar has the sign of a - b * digamma(1 + b/gamma_bar)."""
    return a >= b * float(mpmath.digamma(1 + b / lo))


@pytest.mark.parametrize("a,b", [(A128, 0.5), (3.0, 1.0), (math.log(256) / 0.5, 2.0)])
def test_eta_monotone_on_log_grid(a, b):
    assert monotone_on_grid(a, b)
    g = np.logspace(-1, 6, 2000)
    eta = avg_packet_error_rate(g, a, b)
    assert np.all(np.diff(eta) <= 1e-15)


@given(st.floats(0.0, 10.0), st.floats(0.05, 3.0))
def test_eta_monotone_when_decay_dominates(a, b):
    assume(monotone_on_grid(a, b))
    g = np.logspace(-1, 6, 400)
    assert np.all(np.diff(avg_packet_error_rate(g, a, b)) <= 1e-15)


def test_eta_not_monotone_without_decay():
    # with a_n = 0 the fit is 1 - Gamma(1 + b/g); Gamma rises past its minimum at
    # 1.4616, so eta climbs again for b < g < b / 0.4616
    b = 0.5
    assert not monotone_on_grid(0.0, b)
    assert avg_packet_error_rate(0.6, 0.0, b) < avg_packet_error_rate(0.9, 0.0, b)


def test_eta_clamp_range_and_activation():
    rng = np.random.default_rng(5)
    g = 10 ** rng.uniform(-1, 6, 10_000)
    a = rng.uniform(0, 5, 10_000)
    b = rng.uniform(0.1, 3, 10_000)
    raw = 1 - np.exp(-a / g) * np.array([math.gamma(1 + x) for x in b / g])
    eta = np.array([avg_packet_error_rate(gi, ai, bi) for gi, ai, bi in zip(g, a, b)])
    assert np.all((eta >= 0) & (eta <= 1))
    clamped = raw < 0
    # Gamma(1 + x) <= 1 for x in [0, 1], so the clip can only act below gamma_bar = b_n
    assert np.all(g[clamped] < b[clamped])
    rate = clamped.mean()
    assert 0.0 < rate < 0.2


def test_success_examples():
    assert success_probability(0.0, 5) == 1.0
    assert success_probability(1.0, 5) == 0.0
    assert success_probability(0.1, 3, Conv.AS_PAPER) == pytest.approx(0.271, rel=1e-12)
    assert success_probability(0.1, 3, Conv.CORRECTED) == pytest.approx(0.999, rel=1e-12)
    with pytest.raises(ValueError):
        success_probability(0.1, 0)


@given(st.floats(0, 1))
def test_success_q1_identities(per):
    assert success_probability(per, 1, Conv.AS_PAPER) == pytest.approx(per, abs=1e-15)
    assert success_probability(per, 1, Conv.CORRECTED) == pytest.approx(1 - per, abs=1e-15)


@given(st.floats(0.001, 0.999), st.integers(1, 30))
def test_corrected_monotone_in_q(per, q):
    assert success_probability(per, q + 1) >= success_probability(per, q)


@pytest.mark.parametrize("per", [0.1, 0.5, 0.9])
@pytest.mark.parametrize("q", [1, 3, 8])
def test_corrected_matches_monte_carlo(per, q):
    rng = np.random.default_rng([q, round(per * 10)])
    episodes = 1_000_000
    ok = (rng.random((episodes, q)) >= per).any(axis=1)
    p = success_probability(per, q)
    se = math.sqrt(max(p * (1 - p), 1e-300) / episodes)
    # a success probability of ~1 makes the standard error vanish; allow one stray episode
    assert abs(ok.mean() - p) <= max(3 * se, 1 / episodes)


def test_expected_retransmissions():
    assert expected_retransmissions(success_probability(1.0, 3), 1.0) == 0.0
    assert expected_retransmissions(success_probability(0.5, 1), 0.5) == 1.0
    with pytest.raises(DivisionDomain):
        expected_retransmissions(1.0, 0.0)
    assert expected_retransmissions_or_one(1.0, 0.0) == 1.0
    got = expected_retransmissions_or_one(np.array([1.0, 0.5]), np.array([0.0, 0.5]))
    assert got.tolist() == [1.0, 1.0]


def test_received_power_examples():
    assert received_power(UNITY, 1.0) == pytest.approx(1.0, rel=1e-15)
    assert received_power(UNITY, 2.0) == pytest.approx(0.25, rel=1e-15)
    double = dataclasses.replace(UNITY, tx_power=2.0)
    assert received_power(double, 3.0) == pytest.approx(2 * received_power(UNITY, 3.0), rel=1e-15)
    with pytest.raises(DomainError):
        received_power(UNITY, 0.0)


def test_inverse_square_law():
    p = ChannelParams()
    d = np.logspace(-2, 4, 500)
    k = received_power(p, d) * d * d
    assert np.allclose(k, k[0], rtol=1e-12, atol=0)
    assert np.all(np.diff(received_power(p, d)) < 0)


def test_max_coverage_distance_examples():
    assert max_coverage_distance(UNITY) == pytest.approx(1.0, rel=1e-15)
    quad = dataclasses.replace(UNITY, tx_power=4.0)
    assert max_coverage_distance(quad) == pytest.approx(2.0, rel=1e-15)


def test_coverage_round_trip_random_params():
    rng = np.random.default_rng(2024)
    for _ in range(100):
        p = ChannelParams(
            tx_power=10 ** rng.uniform(-4, 1),
            g_tx=10 ** rng.uniform(-1, 1),
            g_rx=10 ** rng.uniform(-1, 1),
            wavelength=10 ** rng.uniform(-2, 0),
            rx_sensitivity=10 ** rng.uniform(-13, -7),
            noise_power=1e-12,
        )
        assert received_power(p, max_coverage_distance(p)) == pytest.approx(p.rx_sensitivity, rel=1e-9)


def test_snr():
    p = ChannelParams()
    d = max_coverage_distance(p)
    assert avg_snr(p, d) == pytest.approx(p.rx_sensitivity / p.noise_power, rel=1e-12)
    assert avg_snr(p, 5.0) > avg_snr(p, 6.0)
    # 1e-9 W received over 1e-12 W noise
    p2 = dataclasses.replace(UNITY, noise_power=1e-12)
    d2 = math.sqrt(1.0 / 1e-9)
    assert avg_snr(p2, d2) == pytest.approx(1000.0, rel=1e-12)


def test_default_calibration():
    p = ChannelParams()
    assert coverage_radius(p) == pytest.approx(25.0, rel=1e-3)
    assert slant_distance(p, coverage_radius(p)) == pytest.approx(max_coverage_distance(p), rel=1e-12)
    # reliable all the way to the edge of the disk
    a, b = per_coefficients(p.modulation, p.packet_bits)
    eta = avg_packet_error_rate(avg_snr(p, max_coverage_distance(p)), a, b)
    assert success_probability(eta, p.q_max) >= p.rho_min


@pytest.mark.parametrize(
    "kw", [dict(packet_bits=0), dict(q_max=0), dict(tx_power=0.0), dict(rho_min=0.0), dict(h_min=-1.0), dict(noise_power=math.inf)]
)
def test_params_validation(kw):
    with pytest.raises(ValueError):
        ChannelParams(**kw)
