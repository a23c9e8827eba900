"""Closed-form recovery-time models and the recovery-time constraint.

All times are in microseconds and lengths in kilometres.  ``n`` is the
number of intermediate (pass-through) nodes of a backup lightpath, i.e.
``hops - 1``; endpoints terminate the lightpath and never cross-connect.
"""

from __future__ import annotations

from dataclasses import dataclass, fields, replace

# 400 us of propagation per 85 km of fibre.
DEFAULT_PROP_US_PER_KM = 400.0 / 85.0

RTC_BY_TOPOLOGY = {"ARPANET": 45000.0, "COST239": 21000.0}
DEFAULT_RTC_US = 45000.0

# experiment-config key -> TimingParams field
CONFIG_KEYS = {
    "timing.f_d_us": "f_d",
    "timing.m_p_us": "m_p",
    "timing.m_a_us": "m_a",
    "timing.prop_us_per_km": "prop_rate",
    "timing.c_x_us": "c_x",
    "timing.rtc_us": "rtc",
}


@dataclass(frozen=True)
class TimingParams:
    f_d: float = 10.0
    m_p: float = 10.0
    m_a: float = 10.0
    prop_rate: float = DEFAULT_PROP_US_PER_KM
    c_x: float = 2000.0
    rtc: float = DEFAULT_RTC_US

    def __post_init__(self):
        for f in fields(self):
            if getattr(self, f.name) < 0:
                raise ValueError(f"timing parameter {f.name} must be >= 0")

    @classmethod
    def for_topology(cls, name: str, **overrides) -> "TimingParams":
        params = cls(rtc=RTC_BY_TOPOLOGY.get(name.upper(), DEFAULT_RTC_US))
        return replace(params, **overrides) if overrides else params

    def as_config(self) -> dict[str, float]:
        return {key: getattr(self, attr) for key, attr in CONFIG_KEYS.items()}


@dataclass(frozen=True)
class RecoveryTime:
    detection: float = 0.0
    processing: float = 0.0
    cross_connect: float = 0.0
    propagation: float = 0.0

    @property
    def total(self) -> float:
        return self.detection + self.processing + self.cross_connect + self.propagation


ZERO = RecoveryTime()


def _check(n, l):
    if n < 0 or l < 0:
        raise ValueError("n and l must be non-negative")


def rt_spp(p: TimingParams, n: int, l: float) -> RecoveryTime:
    """Shared protection: every intermediate node cross-connects in turn."""
    _check(n, l)
    return RecoveryTime(p.f_d, 2 * n * (p.m_p + p.m_a), n * p.c_x, 2 * l * p.prop_rate)


def rt_dpp(p: TimingParams, n: int, l: float) -> RecoveryTime:
    """Dedicated 1+1 protection: the backup is pre-cross-connected."""
    _check(n, l)
    return RecoveryTime(p.f_d, 2 * n * (p.m_p + p.m_a), 0.0, 2 * l * p.prop_rate)


def rt_incb(p: TimingParams, half1: tuple[int, float], half2: tuple[int, float]) -> RecoveryTime:
    """Parallel setup from both ends toward a designated intermediate node.

    Setup and acknowledgement run on the two halves at once, so the slower
    half sets the signalling time; cross-connects overlap into a single
    ``c_x``.
    """
    legs = []
    for n, l in (half1, half2):
        _check(n, l)
        legs.append((2 * n * (p.m_p + p.m_a), 2 * l * p.prop_rate))
    processing, propagation = max(legs, key=lambda leg: (leg[0] + leg[1], leg[1]))
    return RecoveryTime(p.f_d, processing, p.c_x, propagation)


def check_rtc(p: TimingParams, rt: RecoveryTime) -> bool:
    """True when ``rt`` meets the recovery-time constraint (inclusive)."""
    return rt.total <= p.rtc
