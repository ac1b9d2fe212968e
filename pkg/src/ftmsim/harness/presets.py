"""Built-in devices and environments, plus the benchmark setups pairing them.

Band, bandwidth and burst count follow the measured hardware.  Everything
else (sensitivities, multipath, clock errors, the HT20 near-field ramp) is a
fitted calibration chosen so the simulator lands in the reported error
bands.  None of it is measured.
"""

from __future__ import annotations

from dataclasses import dataclass

from ..errors import UnknownPreset
from ..phy import ChannelModel, ClockModel, DeviceProfile

INDOOR_DISTANCES_M = (0.5, 1.0, 1.5)
OUTDOOR_DISTANCES_M = (3.0, 5.0, 10.0)

# HT20 near-field degradation, shared by both HT20 radios
_HT20_NEAR_FIELD = dict(
    near_field_range_m=2.0,
    near_field_bias_ns=7.5,
    near_field_onset_m=0.25,
    near_field_full_m=1.0,
)

DEVICES: dict[str, DeviceProfile] = {
    p.name: p
    for p in (
        DeviceProfile(
            "wcn3990_vht80", band_mhz=5745, bandwidth_mhz=80, antennas=2,
            tx_power_dbm=17.0, rx_sensitivity_dbm=-82.0,
            clock=ClockModel(offset_ps=183_221_417, drift_ppm=4.0),
        ),
        DeviceProfile(
            "qca4019_vht80", band_mhz=5745, bandwidth_mhz=80, antennas=2,
            tx_power_dbm=23.0, rx_sensitivity_dbm=-84.0,
            clock=ClockModel(offset_ps=-72_004_250, drift_ppm=-2.5),
        ),
        DeviceProfile(
            "esp32s2_ht20", band_mhz=2412, bandwidth_mhz=20, antennas=1,
            tx_power_dbm=18.0, rx_sensitivity_dbm=-78.0,
            clock=ClockModel(offset_ps=9_310_002, drift_ppm=10.0),
            **_HT20_NEAR_FIELD,
        ),
        DeviceProfile(
            "wcn3990_ht20", band_mhz=2412, bandwidth_mhz=20, antennas=2,
            tx_power_dbm=17.0, rx_sensitivity_dbm=-80.0,
            clock=ClockModel(offset_ps=-455_120_009, drift_ppm=-4.0),
            **_HT20_NEAR_FIELD,
        ),
        # ideal hardware: no quantization, perfect clock
        DeviceProfile(
            "ideal", band_mhz=5745, bandwidth_mhz=80, antennas=1,
            tx_power_dbm=20.0, rx_sensitivity_dbm=-200.0, quantized=False,
        ),
    )
}

CHANNELS: dict[str, ChannelModel] = {
    c.name: c
    for c in (
        ChannelModel("indoor", pathloss_exponent_n=3.0, rssi_ref_dbm_A=-40.0, ref_tx_power_dbm=20.0,
                     multipath_mean_excess_ns=20.0, fac_residual=0.05, rssi_noise_db_std=3.0),
        ChannelModel("outdoor", pathloss_exponent_n=2.0, rssi_ref_dbm_A=-40.0, ref_tx_power_dbm=20.0,
                     multipath_mean_excess_ns=5.0, fac_residual=0.05, rssi_noise_db_std=2.0),
        ChannelModel("ideal", pathloss_exponent_n=2.0, rssi_ref_dbm_A=-40.0, ref_tx_power_dbm=20.0),
    )
}

ENVIRONMENT_DISTANCES: dict[str, tuple[float, ...]] = {
    "indoor": INDOOR_DISTANCES_M,
    "outdoor": OUTDOOR_DISTANCES_M,
    "ideal": INDOOR_DISTANCES_M + OUTDOOR_DISTANCES_M,
}


@dataclass(frozen=True)
class SetupPreset:
    name: str
    initiator: str
    responder: str
    burst_size: int
    phy_mode: str
    ranging: str

    @property
    def bandwidth_mhz(self) -> int:
        return DEVICES[self.initiator].bandwidth_mhz

    @property
    def channel_mhz(self) -> float:
        return DEVICES[self.initiator].band_mhz


SETUPS: dict[str, SetupPreset] = {
    s.name: s
    for s in (
        SetupPreset("config1", "wcn3990_vht80", "qca4019_vht80", 8, "VHT80", "native"),
        SetupPreset("config2", "esp32s2_ht20", "esp32s2_ht20", 2, "HT20", "native"),
        SetupPreset("config3", "wcn3990_ht20", "wcn3990_ht20", 8, "HT20", "wifi-aware"),
    )
}


def _lookup(table: dict, kind: str, name: str):
    try:
        return table[name]
    except KeyError:
        raise UnknownPreset(f"unknown {kind} preset {name!r}; known: {', '.join(sorted(table))}") from None


def device(name: str) -> DeviceProfile:
    return _lookup(DEVICES, "device", name)


def channel(name: str) -> ChannelModel:
    return _lookup(CHANNELS, "environment", name)


def setup(name: str) -> SetupPreset:
    return _lookup(SETUPS, "setup", name)


def builtin_presets() -> dict:
    return {"devices": dict(DEVICES), "channels": dict(CHANNELS), "setups": dict(SETUPS)}
