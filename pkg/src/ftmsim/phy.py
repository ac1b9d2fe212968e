"""Clock and radio-channel models.

True (simulation) time is carried as float picoseconds.  Device clocks turn
true time into integer picosecond readings; everything downstream of a clock
read is exact integer arithmetic, which is what makes clock offsets cancel
bit-for-bit in the round-trip time.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, field

from .errors import NegativeDistance, NonPositiveDistance, UnsupportedBandwidth

SPEED_OF_LIGHT_M_S = 299_792_458.0
PS_PER_S = 1e12
SUPPORTED_BANDWIDTHS_MHZ = (20, 40, 80, 160)
MAX_DRIFT_PPM = 1000.0

Rng = random.Random


def make_rng(seed: int) -> Rng:
    """Deterministic stream for a 64-bit seed."""
    return random.Random(int(seed) & 0xFFFF_FFFF_FFFF_FFFF)


def round_half_away(x: float) -> int:
    return int(math.copysign(math.floor(abs(x) + 0.5), x))


@dataclass(frozen=True)
class ClockModel:
    offset_ps: int = 0
    drift_ppm: float = 0.0
    max_drift_ppm: float = field(default=MAX_DRIFT_PPM, compare=False, repr=False)

    def __post_init__(self):
        if isinstance(self.offset_ps, float):
            if not self.offset_ps.is_integer():
                raise ValueError(f"offset_ps must be whole picoseconds, got {self.offset_ps}")
            object.__setattr__(self, "offset_ps", int(self.offset_ps))
        if not math.isfinite(self.drift_ppm) or abs(self.drift_ppm) > self.max_drift_ppm:
            raise ValueError(
                f"|drift_ppm| must be <= {self.max_drift_ppm}, got {self.drift_ppm}")


@dataclass(frozen=True)
class ChannelModel:
    name: str = "custom"
    pathloss_exponent_n: float = 2.0
    rssi_ref_dbm_A: float = -40.0
    ref_tx_power_dbm: float = 20.0
    multipath_mean_excess_ns: float = 0.0
    fac_residual: float = 0.0
    rssi_noise_db_std: float = 0.0

    def __post_init__(self):
        if not self.pathloss_exponent_n > 0:
            raise ValueError("pathloss_exponent_n must be > 0")
        if self.multipath_mean_excess_ns < 0:
            raise ValueError("multipath_mean_excess_ns must be >= 0")
        if not 0.0 <= self.fac_residual <= 1.0:
            raise ValueError("fac_residual must lie in [0, 1]")
        if self.rssi_noise_db_std < 0:
            raise ValueError("rssi_noise_db_std must be >= 0")

    @property
    def residual_multipath_ns(self) -> float:
        return self.multipath_mean_excess_ns * self.fac_residual


@dataclass(frozen=True)
class DeviceProfile:
    """A radio: its PHY configuration plus clock imperfections.

    Near-field degradation adds one exponential detection delay per
    reception when the link is shorter than ``near_field_range_m``.  Its mean
    is ``near_field_bias_ns`` scaled by a linear ramp that is 0 at
    ``near_field_onset_m`` and 1 from ``near_field_full_m`` on; leaving both
    ramp points at 0 applies the full bias everywhere inside the range.

    ``rx_calibration_ns`` is the constant the receiver subtracts from its
    arrival timestamps.  ``None`` means the expected quantization latency
    ``Ts / (antennas + 1)``.  ``quantized=False`` is the ideal-hardware test
    hook: it turns off sampling quantization and calibration, and clock
    readings keep their fractional picoseconds.
    """

    name: str
    band_mhz: float = 5745.0
    bandwidth_mhz: int = 80
    antennas: int = 1
    tx_power_dbm: float = 20.0
    rx_sensitivity_dbm: float = -82.0
    clock: ClockModel = ClockModel()
    near_field_range_m: float = 0.0
    near_field_bias_ns: float = 0.0
    near_field_onset_m: float = 0.0
    near_field_full_m: float = 0.0
    rx_calibration_ns: float | None = None
    quantized: bool = True

    def __post_init__(self):
        if self.bandwidth_mhz not in SUPPORTED_BANDWIDTHS_MHZ:
            raise UnsupportedBandwidth(f"bandwidth {self.bandwidth_mhz} MHz not in {SUPPORTED_BANDWIDTHS_MHZ}")
        if not isinstance(self.antennas, int) or self.antennas < 1:
            raise ValueError("antennas must be a positive integer")
        if self.near_field_range_m < 0 or self.near_field_bias_ns < 0:
            raise ValueError("near-field range and bias must be >= 0")
        if self.near_field_onset_m < 0 or self.near_field_full_m < 0:
            raise ValueError("near-field ramp points must be >= 0")

    @property
    def sampling_period_ns(self) -> float:
        return sampling_period_ns(self.bandwidth_mhz) if self.quantized else 0.0

    def near_field_mean_ns(self, distance_m: float) -> float:
        if distance_m >= self.near_field_range_m:
            return 0.0
        lo, hi = self.near_field_onset_m, self.near_field_full_m
        if hi <= lo:
            return self.near_field_bias_ns
        return self.near_field_bias_ns * min(1.0, max(0.0, (distance_m - lo) / (hi - lo)))

    def rx_calibration_ps(self) -> int:
        if not self.quantized:
            return 0
        if self.rx_calibration_ns is None:
            return round_half_away(
                expected_quantization_delay_ns(self.bandwidth_mhz, self.antennas) * 1000)
        return round_half_away(self.rx_calibration_ns * 1000)


def sampling_period_ns(bandwidth_mhz: float) -> float:
    if bandwidth_mhz not in SUPPORTED_BANDWIDTHS_MHZ:
        raise UnsupportedBandwidth(f"bandwidth {bandwidth_mhz} MHz not in {SUPPORTED_BANDWIDTHS_MHZ}")
    return 1000.0 / bandwidth_mhz


def expected_quantization_delay_ns(bandwidth_mhz: float, antennas: int) -> float:
    """Mean of the earliest of ``antennas`` U(0, Ts) detection instants."""
    return sampling_period_ns(bandwidth_mhz) / (antennas + 1)


def propagation_delay_ps(distance_m: float) -> float:
    if distance_m < 0:
        raise NegativeDistance(f"distance must be >= 0, got {distance_m}")
    return distance_m / SPEED_OF_LIGHT_M_S * PS_PER_S


def rssi_at(distance_m: float, channel: ChannelModel, tx_power_dbm: float, rng: Rng) -> float:
    """Log-distance path loss plus Gaussian shadowing, in dBm."""
    if distance_m <= 0:
        raise NonPositiveDistance(f"RSSI undefined at distance {distance_m} m")
    rssi = (-10.0 * channel.pathloss_exponent_n * math.log10(distance_m)
            + channel.rssi_ref_dbm_A
            + (tx_power_dbm - channel.ref_tx_power_dbm))
    if channel.rssi_noise_db_std > 0:
        rssi += rng.normalvariate(0.0, channel.rssi_noise_db_std)
    return rssi


def detection_delay_ps(device: DeviceProfile, channel: ChannelModel,
                       distance_m: float, rng: Rng) -> float:
    """Delay between true frame arrival and the receiver's detection instant.

    Each antenna sees quantization U(0, Ts) plus the exponential multipath
    excess left over after first-arrival correction; the earliest antenna
    wins.  Near-field excess is drawn once on top.
    """
    ts_ps = device.sampling_period_ns * 1000.0
    mp_ps = channel.residual_multipath_ns * 1000.0
    best = math.inf
    for _ in range(device.antennas):
        delay = rng.random() * ts_ps
        if mp_ps > 0:
            delay += rng.expovariate(1.0 / mp_ps)
        best = min(best, delay)
    nf_ps = device.near_field_mean_ns(distance_m) * 1000.0
    if nf_ps > 0:
        best += rng.expovariate(1.0 / nf_ps)
    return best


def clock_read_ps(true_time_ps: float, clock: ClockModel, exact: bool = False):
    """What ``clock`` shows at ``true_time_ps``.

    The drifted time is rounded before the integer offset is added, so a
    change of offset shifts every reading by exactly that offset.  With
    ``exact`` the reading is returned unrounded as a float.
    """
    scaled = true_time_ps + true_time_ps * clock.drift_ppm * 1e-6
    if exact:
        return scaled + clock.offset_ps
    return round_half_away(scaled) + clock.offset_ps


def frame_delivered(rssi_dbm: float, device: DeviceProfile) -> bool:
    return rssi_dbm >= device.rx_sensitivity_dbm
