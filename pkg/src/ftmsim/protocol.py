"""FTM request/response exchange between a simulated initiator and responder.

One measurement::

    responder                       initiator
       t1  ---------- FTM -------->  t2   (detected arrival)
       t4  <--------- ACK ---------  t3   (t2 + turnaround)

    rtt = (t4 - t1) + (t2 - t3),   distance = rtt / 2 * c

t1 and t4 come from the responder's clock, t2 and t3 from the initiator's,
so a constant offset on either clock cancels.
"""

from __future__ import annotations

import copy
import enum
import statistics
from dataclasses import dataclass, field, replace

from . import phy
from .errors import (
    AllFramesDropped,
    AuthenticationFailed,
    NoResponse,
    ProtocolViolation,
    ReplayRejected,
)
from .phy import ChannelModel, DeviceProfile, Rng
from .wire import KEY_SIZE, FrameType, FtmFrame, protect, verify_auth_tag

INITIATOR = "initiator"
RESPONDER = "responder"

MIN_DISTANCE_M = 0.01
# True time at which a fresh session starts; keeps t1 readings positive under
# clock offsets of up to a second.
DEFAULT_EPOCH_PS = 1_000_000_000_000


class Mode(str, enum.Enum):
    SINGLE = "single"
    BURST = "burst"


@dataclass(frozen=True)
class SessionConfig:
    mode: Mode = Mode.BURST
    burst_size: int = 1
    turnaround_ns: float = 16_000.0
    inter_measurement_ns: float = 1_000_000.0
    protected: bool = False
    pn_check: bool = False
    key: bytes | None = None
    average: str = "mean"

    def __post_init__(self):
        object.__setattr__(self, "mode", Mode(self.mode))
        if not isinstance(self.burst_size, int) or not 1 <= self.burst_size <= 255:
            raise ValueError(f"burst_size must be an integer in 1..255, got {self.burst_size!r}")
        if self.mode is Mode.SINGLE and self.burst_size != 1:
            raise ValueError("single mode requires burst_size == 1")
        if self.turnaround_ns < 0 or self.inter_measurement_ns < 0:
            raise ValueError("turnaround_ns and inter_measurement_ns must be >= 0")
        if self.protected and self.key is None:
            raise ValueError("a protected session needs a key")
        if self.key is not None and len(self.key) != KEY_SIZE:
            raise ValueError(f"key must be {KEY_SIZE} octets")
        if self.average not in ("mean", "median"):
            raise ValueError("average must be 'mean' or 'median'")


@dataclass(frozen=True)
class MeasurementRecord:
    t1_ps: int
    t2_ps: int
    t3_ps: int
    t4_ps: int
    rtt_ps: int
    distance_m: float
    rssi_dbm: float
    measurement_index: int = 0


@dataclass(frozen=True)
class BurstResult:
    records: tuple[MeasurementRecord, ...]
    mean_distance_m: float
    std_distance_m: float
    dropped_count: int

    @property
    def burst_size(self) -> int:
        return len(self.records) + self.dropped_count

    @property
    def mean_rtt_ps(self) -> float:
        return statistics.fmean(r.rtt_ps for r in self.records)

    @property
    def mean_rssi_dbm(self) -> float:
        return statistics.fmean(r.rssi_dbm for r in self.records)


@dataclass(frozen=True)
class Negotiation:
    accepted: bool
    granted_burst_size: int = 0
    reason: str | None = None
    ack: FtmFrame | None = None


def compute_rtt_ps(t1, t2, t3, t4):
    return (t4 - t1) + (t2 - t3)


def rtt_to_distance_m(rtt_ps) -> float:
    return rtt_ps / 2 * phy.SPEED_OF_LIGHT_M_S / phy.PS_PER_S


def negotiate(request: FtmFrame, responder_limits: SessionConfig,
              packet_number: int = 0) -> Negotiation:
    """Responder's answer to an FTM request.

    Grants ``min(requested, limit)`` measurements per burst.  The request's
    protection must match the responder's, and a protected request must carry
    a tag valid under the responder's key.
    """
    if request.frame_type is not FrameType.FTM_REQUEST:
        raise ProtocolViolation(f"expected an FTM request, got {request.frame_type.name}")
    if request.protected != responder_limits.protected:
        return Negotiation(False, reason="ProtectionMismatch")
    if request.protected and not verify_auth_tag(request, responder_limits.key):
        return Negotiation(False, reason="BadTag")
    granted = min(request.burst_size, responder_limits.burst_size)
    ack = FtmFrame(FrameType.ACK, request.dialog_token, granted, 0, packet_number)
    if responder_limits.protected:
        ack = protect(ack, responder_limits.key)
    return Negotiation(True, granted, ack=ack)


@dataclass
class FtmSession:
    """Mutable state of one initiator/responder pairing.

    Owns the true-time cursor, per-device packet-number counters, the
    receivers' replay windows and the over-the-air frame log (what a sniffer
    in range would capture).
    """

    config: SessionConfig
    now_ps: float = DEFAULT_EPOCH_PS
    granted_burst_size: int | None = None
    dialog_token: int = 0
    next_pn: dict = field(default_factory=lambda: {INITIATOR: 0, RESPONDER: 0})
    last_rx_pn: dict = field(default_factory=lambda: {INITIATOR: None, RESPONDER: None})
    frame_log: list = field(default_factory=list)
    last_t1_ps: int | None = None

    def __post_init__(self):
        if self.granted_burst_size is None:
            self.granted_burst_size = self.config.burst_size

    def snapshot(self) -> "FtmSession":
        return copy.deepcopy(self)

    def _stamp(self, frame: FtmFrame, sender: str, true_time_ps: float) -> FtmFrame:
        frame = replace(frame, packet_number=self.next_pn[sender])
        frame.validate()
        self.next_pn[sender] = (self.next_pn[sender] + 1) & 0xFFFF_FFFF
        if self.config.protected:
            frame = protect(frame, self.config.key)
        self.frame_log.append((int(true_time_ps // 1_000_000), frame))
        return frame

    def transmit(self, sender: str, frame_type: FrameType, true_time_ps: float,
                 t1_ps: int = 0) -> FtmFrame:
        if frame_type is FrameType.FTM:
            self.dialog_token = self.dialog_token % 255 + 1
        frame = FtmFrame(frame_type, self.dialog_token, self.granted_burst_size, t1_ps)
        return self._stamp(frame, sender, true_time_ps)

    def receive(self, receiver: str, frame: FtmFrame) -> None:
        """Integrity check, then replay check.  Raises on rejection."""
        if self.config.protected:
            if not verify_auth_tag(frame, self.config.key):
                raise AuthenticationFailed(f"{receiver}: bad or missing tag on pn {frame.packet_number}")
        elif frame.protected:
            raise AuthenticationFailed(f"{receiver}: protected frame on an open session")
        last = self.last_rx_pn[receiver]
        if self.config.pn_check and last is not None and frame.packet_number <= last:
            raise ReplayRejected(f"{receiver}: pn {frame.packet_number} <= last accepted {last}")
        self.last_rx_pn[receiver] = frame.packet_number if last is None else max(last, frame.packet_number)

    def establish(self, responder_limits: SessionConfig | None = None) -> Negotiation:
        """Send the FTM request and apply the responder's decision."""
        limits = responder_limits or self.config
        request = FtmFrame(FrameType.FTM_REQUEST, 0, self.config.burst_size)
        request = self._stamp(request, INITIATOR, self.now_ps)
        result = negotiate(request, limits, packet_number=self.next_pn[RESPONDER])
        if result.accepted:
            self.next_pn[RESPONDER] += 1
            self.frame_log.append((int(self.now_ps // 1_000_000), result.ack))
            self.receive(INITIATOR, result.ack)
            self.granted_burst_size = result.granted_burst_size
        return result


def as_session(session) -> FtmSession:
    if isinstance(session, FtmSession):
        return session
    if isinstance(session, SessionConfig):
        return FtmSession(session)
    raise TypeError(f"expected FtmSession or SessionConfig, got {type(session).__name__}")


def run_single_exchange(initiator: DeviceProfile, responder: DeviceProfile,
                        channel: ChannelModel, distance_m: float, session,
                        rng: Rng, *, measurement_index: int = 0,
                        t1_bias_ps: int = 0) -> MeasurementRecord:
    """Simulate one FTM/ACK measurement and advance the session clock.

    ``t1_bias_ps`` is added to the t1 the responder writes into its FTM frame
    (a rogue responder); honest responders leave it at 0.
    """
    sess = as_session(session)
    if distance_m < MIN_DISTANCE_M:
        raise ValueError(f"distance must be >= {MIN_DISTANCE_M} m, got {distance_m}")
    cfg = sess.config
    tof_ps = phy.propagation_delay_ps(distance_m)
    true_t1 = sess.now_ps
    sess.now_ps = true_t1 + cfg.inter_measurement_ns * 1000.0

    t1 = phy.clock_read_ps(true_t1, responder.clock, exact=not responder.quantized) + t1_bias_ps
    ftm = sess.transmit(RESPONDER, FrameType.FTM, true_t1, t1_ps=phy.round_half_away(t1))
    rssi = phy.rssi_at(distance_m, channel, responder.tx_power_dbm, rng)
    if not phy.frame_delivered(rssi, initiator):
        raise NoResponse(f"FTM at {rssi:.1f} dBm below initiator sensitivity {initiator.rx_sensitivity_dbm} dBm")
    sess.receive(INITIATOR, ftm)
    sess.last_t1_ps = ftm.t1_ps

    true_t2 = true_t1 + tof_ps + phy.detection_delay_ps(initiator, channel, distance_m, rng)
    t2 = phy.clock_read_ps(true_t2, initiator.clock, exact=not initiator.quantized) - initiator.rx_calibration_ps()
    true_t3 = true_t2 + cfg.turnaround_ns * 1000.0
    t3 = phy.clock_read_ps(true_t3, initiator.clock, exact=not initiator.quantized)

    ack = sess.transmit(INITIATOR, FrameType.ACK, true_t3)
    rssi_ack = phy.rssi_at(distance_m, channel, initiator.tx_power_dbm, rng)
    if not phy.frame_delivered(rssi_ack, responder):
        raise NoResponse(f"ACK at {rssi_ack:.1f} dBm below responder sensitivity {responder.rx_sensitivity_dbm} dBm")
    sess.receive(RESPONDER, ack)

    true_t4 = true_t3 + tof_ps + phy.detection_delay_ps(responder, channel, distance_m, rng)
    t4 = phy.clock_read_ps(true_t4, responder.clock, exact=not responder.quantized) - responder.rx_calibration_ps()

    rtt = compute_rtt_ps(t1, t2, t3, t4)
    return MeasurementRecord(t1, t2, t3, t4, rtt, rtt_to_distance_m(rtt), rssi, measurement_index)


def summarize_burst(records, dropped_count: int, average: str = "mean") -> BurstResult:
    if not records:
        raise AllFramesDropped(f"all {dropped_count} exchanges dropped")
    distances = [r.distance_m for r in records]
    center = statistics.median(distances) if average == "median" else statistics.fmean(distances)
    spread = statistics.pstdev(distances) if len(distances) > 1 else 0.0
    return BurstResult(tuple(records), center, spread, dropped_count)


def run_burst(initiator: DeviceProfile, responder: DeviceProfile, channel: ChannelModel,
              distance_m: float, session, rng: Rng) -> BurstResult:
    sess = as_session(session)
    records, dropped = [], 0
    for index in range(sess.granted_burst_size):
        try:
            records.append(run_single_exchange(initiator, responder, channel, distance_m,
                                               sess, rng, measurement_index=index))
        except NoResponse:
            dropped += 1
    return summarize_burst(records, dropped, sess.config.average)


def drift_distance_error_m(drift_ppm: float, turnaround_ns: float) -> float:
    """Distance error caused by initiator drift over the turnaround interval."""
    return drift_ppm * 1e-6 * turnaround_ns * 1e-9 / 2 * phy.SPEED_OF_LIGHT_M_S

