"""Link-layer model between an IoT sensor and the hovering MBS.

Average packet error rate over Rayleigh fading (gamma-function fit),
truncated-ARQ success probability, expected retransmissions, Friis free-space
received power and the resulting maximum coverage distance.

Functions accept scalars or numpy arrays where that makes sense.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import gamma as _gamma


class InvalidCoefficient(ValueError):
    pass


class DomainError(ValueError):
    pass


class DivisionDomain(ZeroDivisionError):
    pass


class SuccessRateConvention(enum.Enum):
    """How the per-link success probability is formed from the PER.

    AS_PAPER keeps ``1 - (1 - per)**q_max`` literally; CORRECTED uses
    ``1 - per**q_max``, the chance that one of ``q_max`` attempts gets through.
    """

    AS_PAPER = "as_paper"
    CORRECTED = "corrected"


@dataclass(frozen=True)
class Modulation:
    name: str
    c_m: float
    k_m: float

    def __post_init__(self):
        if not (self.c_m > 0 and self.k_m > 0):
            raise ValueError(f"modulation constants must be positive, got c_m={self.c_m}, k_m={self.k_m}")
        fixed = _KNOWN.get(self.name)
        if fixed is not None and (self.c_m, self.k_m) != fixed:
            raise ValueError(f"{self.name} requires (c_m, k_m) = {fixed}")

    @classmethod
    def fsk(cls) -> Modulation:
        return cls("FSK", 0.5, 0.5)

    @classmethod
    def bpsk(cls) -> Modulation:
        return cls("BPSK", 1.0, 2.0)

    @classmethod
    def custom(cls, c_m: float, k_m: float) -> Modulation:
        return cls("Custom", c_m, k_m)


_KNOWN = {"FSK": (0.5, 0.5), "BPSK": (1.0, 2.0)}


@dataclass(frozen=True)
class ChannelParams:
    """Everything the link model needs.

    The defaults are a calibration for a 100 m x 100 m field with 30 candidate
    stops (2.4 GHz, 10 dBm sensors, 10 m hover altitude). They give a slant
    coverage distance of 26.9 m, i.e. a ground radius of 25 m, and an SNR of
    13 dB at the coverage edge, where the corrected success probability is
    still 0.9997 so ``rho_min`` does not shrink the disk. None of these
    numbers come from a measured deployment.
    """

    modulation: Modulation = field(default_factory=Modulation.bpsk)
    packet_bits: int = 128
    q_max: int = 4
    tx_power: float = 0.01
    g_tx: float = 1.0
    g_rx: float = 1.0
    wavelength: float = 0.125
    rx_sensitivity: float = 1.3648e-09
    noise_power: float = 6.8239e-11
    rho_min: float = 0.99
    h_min: float = 10.0

    def __post_init__(self):
        if self.packet_bits < 1:
            raise ValueError("packet_bits must be >= 1")
        if self.q_max < 1:
            raise ValueError("q_max must be >= 1")
        for name in ("tx_power", "g_tx", "g_rx", "wavelength", "rx_sensitivity", "noise_power"):
            v = getattr(self, name)
            if not (math.isfinite(v) and v > 0):
                raise ValueError(f"{name} must be positive and finite, got {v}")
        if not (0 < self.rho_min <= 1):
            raise ValueError("rho_min must lie in (0, 1]")
        if not (math.isfinite(self.h_min) and self.h_min >= 0):
            raise ValueError("h_min must be >= 0")


def per_coefficients(m: Modulation, n: int) -> tuple[float, float]:
    """Return ``(a_n, b_n) = (ln(n c_m) / k_m, 1 / k_m)``."""
    if n * m.c_m < 1:
        raise InvalidCoefficient(
            f"n * c_m = {n * m.c_m} < 1 makes a_n negative; PER would exceed 1 at high SNR"
        )
    return math.log(n * m.c_m) / m.k_m, 1.0 / m.k_m


def avg_packet_error_rate(gamma_bar, a_n: float, b_n: float):
    """Average PER over Rayleigh fading at mean SNR ``gamma_bar``.

    ``1 - exp(-a_n/g) * Gamma(1 + b_n/g)`` clipped to [0, 1]. The fit dips
    below zero only when ``gamma_bar < b_n`` and ``a_n`` is small, which is
    where the clip acts.
    """
    g = np.asarray(gamma_bar, dtype=float)
    if np.any(~(g > 0)):
        raise DomainError("average SNR must be positive")
    eta = 1.0 - np.exp(-a_n / g) * _gamma(1.0 + b_n / g)
    eta = np.clip(eta, 0.0, 1.0)
    return float(eta) if eta.ndim == 0 else eta


def success_probability(per, q_max: int, conv: SuccessRateConvention = SuccessRateConvention.CORRECTED):
    if q_max < 1:
        raise ValueError("q_max must be >= 1")
    p = np.asarray(per, dtype=float)
    if conv is SuccessRateConvention.AS_PAPER:
        rho = 1.0 - (1.0 - p) ** q_max
    else:
        rho = 1.0 - p ** q_max
    return float(rho) if rho.ndim == 0 else rho


def expected_retransmissions(rho, per):
    """``rho / per`` exactly as the model states it.

    A zero PER raises :class:`DivisionDomain`; callers that need a value use
    :func:`expected_retransmissions_or_one`.
    """
    p = np.asarray(per, dtype=float)
    if np.any(p == 0):
        raise DivisionDomain("PER is zero; a perfect link needs exactly one transmission")
    r = np.asarray(rho, dtype=float) / p
    return float(r) if r.ndim == 0 else r


def expected_retransmissions_or_one(rho, per):
    """Like :func:`expected_retransmissions` but maps PER == 0 links to 1."""
    p = np.asarray(per, dtype=float)
    rho = np.asarray(rho, dtype=float)
    safe = np.where(p == 0, 1.0, p)
    r = np.where(p == 0, 1.0, rho / safe)
    return float(r) if r.ndim == 0 else r


def received_power(params: ChannelParams, distance):
    """Friis free-space received power in watts."""
    d = np.asarray(distance, dtype=float)
    if np.any(~(d > 0)):
        raise DomainError("distance must be positive")
    gain = params.g_tx * params.g_rx * params.wavelength**2 / (4.0 * math.pi) ** 2
    pr = gain * params.tx_power / (d * d)
    return float(pr) if pr.ndim == 0 else pr


def max_coverage_distance(params: ChannelParams) -> float:
    """Slant distance at which received power drops to the receiver sensitivity."""
    return params.wavelength / (4.0 * math.pi) * math.sqrt(
        params.g_tx * params.g_rx * params.tx_power / params.rx_sensitivity
    )


def coverage_radius(params: ChannelParams) -> float:
    """Ground radius of the coverage disk once hover altitude is accounted for."""
    d_max = max_coverage_distance(params)
    if d_max < params.h_min:
        return 0.0
    return math.sqrt(d_max * d_max - params.h_min * params.h_min)


def slant_distance(params: ChannelParams, ground_distance):
    g = np.asarray(ground_distance, dtype=float)
    d = np.sqrt(g * g + params.h_min * params.h_min)
    return float(d) if d.ndim == 0 else d


def avg_snr(params: ChannelParams, distance):
    """Mean SNR at slant ``distance``: free-space received power over noise power."""
    return received_power(params, distance) / params.noise_power
