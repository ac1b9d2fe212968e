"""Deterministic simulator of Wi-Fi FTM (802.11mc) round-trip-time ranging."""

from .errors import FtmSimError
from .phy import ChannelModel, ClockModel, DeviceProfile, make_rng
from .protocol import (
    BurstResult,
    FtmSession,
    MeasurementRecord,
    Mode,
    SessionConfig,
    compute_rtt_ps,
    rtt_to_distance_m,
    run_burst,
    run_single_exchange,
)
from .wire import FrameType, FtmFrame, decode_frame, encode_frame

__version__ = "0.1.0"
