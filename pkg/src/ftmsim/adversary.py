"""Attacks on FTM ranging and where their mitigations bite.

Mitigations are enforced where a real stack would enforce them: the
integrity tag (stand-in for PMF/WPA3) and the receiver's packet-number
replay window both live in :meth:`FtmSession.receive`.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, replace

from .errors import AuthenticationFailed, MalformedFrame, MalformedLog, ReplayRejected
from .phy import ChannelModel, DeviceProfile, make_rng
from .protocol import (
    INITIATOR,
    FtmSession,
    SessionConfig,
    rtt_to_distance_m,
    run_single_exchange,
)
from .wire import FrameType, FtmFrame, decode_frame, iter_frame_log, protect, verify_auth_tag

ACCEPTED_NO_PN_CHECK = "ACCEPTED_NO_PN_CHECK"
ACCEPTED_RENUMBERED = "ACCEPTED_RENUMBERED"
ACCEPTED_ROGUE_T1 = "ACCEPTED_ROGUE_T1"
ACCEPTED_PLAINTEXT = "ACCEPTED_PLAINTEXT_TIMESTAMPS"
REJECTED_DUPLICATE_PN = "REJECTED_DUPLICATE_PN"
REJECTED_BAD_TAG = "REJECTED_BAD_TAG"
REJECTED_REDACTED = "REJECTED_REDACTED"

REDACTED = "REDACTED"
TYPE_LABELS = {FrameType.FTM_REQUEST: "FTMR", FrameType.FTM: "FTM", FrameType.ACK: "ACK"}


class AttackKind(str, enum.Enum):
    SNIFFER = "sniffer"
    REPLAYER = "replayer"
    ROGUE_RESPONDER = "rogue_responder"


@dataclass(frozen=True)
class AttackerConfig:
    kind: AttackKind
    t1_bias_ps: int = 0
    replay_delay_samples: int = 1
    # replayer only: bump the packet number past the victim's window
    renumber: bool = False
    key_known: bool = False

    def __post_init__(self):
        object.__setattr__(self, "kind", AttackKind(self.kind))
        if self.t1_bias_ps != 0 and self.kind is not AttackKind.ROGUE_RESPONDER:
            raise ValueError("t1_bias_ps is only meaningful for a rogue responder")
        if self.replay_delay_samples < 0:
            raise ValueError("replay_delay_samples must be >= 0")


@dataclass(frozen=True)
class AttackOutcome:
    succeeded: bool
    mechanism: str
    induced_distance_error_m: float = 0.0

    def __post_init__(self):
        if self.succeeded and not self.mechanism.startswith("ACCEPTED_"):
            raise ValueError(f"successful attack needs an ACCEPTED_* mechanism, got {self.mechanism}")

    def report(self) -> str:
        return (f"succeeded={str(self.succeeded).lower()} mechanism={self.mechanism} "
                f"induced_distance_error_m={self.induced_distance_error_m:.4f}")


@dataclass(frozen=True)
class SniffEntry:
    index: int
    capture_us: int
    frame: FtmFrame
    t1_ps: int | None  # None when redacted
    tag_status: str    # NONE, UNVERIFIED, VALID, INVALID

    def line(self) -> str:
        t1 = REDACTED if self.t1_ps is None else str(self.t1_ps)
        return (f"{self.index} {TYPE_LABELS[self.frame.frame_type]} {self.frame.packet_number} "
                f"{int(self.frame.protected)} {t1} {self.tag_status}")


def sniff(frame_log: str, key: bytes | None = None) -> list[SniffEntry]:
    """Read what a passive listener learns from a captured frame log."""
    entries = []
    try:
        captured = list(iter_frame_log(frame_log))
    except ValueError as exc:
        raise MalformedLog(str(exc)) from exc
    for index, (capture_us, raw) in enumerate(captured):
        try:
            frame = decode_frame(raw)
        except MalformedFrame as exc:
            raise MalformedLog(f"frame {index}: {exc}") from exc
        if not frame.protected:
            entries.append(SniffEntry(index, capture_us, frame, frame.t1_ps, "NONE"))
        elif key is None:
            entries.append(SniffEntry(index, capture_us, frame, None, "UNVERIFIED"))
        else:
            status = "VALID" if verify_auth_tag(frame, key) else "INVALID"
            entries.append(SniffEntry(index, capture_us, frame, frame.t1_ps, status))
    return entries


def sniff_report(entries) -> str:
    return "".join(e.line() + "\n" for e in entries)


def sniff_outcome(entries) -> AttackOutcome:
    """Location tracking succeeds if any FTM timestamp was readable."""
    leaked = any(e.frame.frame_type is FrameType.FTM and e.t1_ps is not None for e in entries)
    if leaked:
        return AttackOutcome(True, ACCEPTED_PLAINTEXT)
    return AttackOutcome(False, REJECTED_REDACTED)


def replay(captured: FtmFrame, session: FtmSession, pn_check: bool, key_known: bool,
           renumber: bool = False) -> AttackOutcome:
    """Inject an old FTM frame into the initiator of ``session``.

    The session itself is not modified.  With ``renumber`` the attacker
    rewrites the packet number to one past the victim's window; without the
    key that breaks the tag of a protected frame.  A replay that gets through
    pairs the stale t1 with fresh t2..t4, inflating the round trip by the
    time elapsed since capture.
    """
    victim = session.snapshot()
    victim.config = replace(victim.config, pn_check=pn_check)
    frame = captured
    if renumber:
        last = victim.last_rx_pn[INITIATOR]
        pn = (captured.packet_number if last is None else last) + 1
        frame = replace(frame, packet_number=pn & 0xFFFF_FFFF)
        if frame.protected and key_known:
            frame = protect(frame, session.config.key)
    try:
        victim.receive(INITIATOR, frame)
    except AuthenticationFailed:
        return AttackOutcome(False, REJECTED_BAD_TAG)
    except ReplayRejected:
        return AttackOutcome(False, REJECTED_DUPLICATE_PN)
    error_m = 0.0
    if session.last_t1_ps is not None:
        error_m = rtt_to_distance_m(session.last_t1_ps - captured.t1_ps)
    mechanism = ACCEPTED_RENUMBERED if (renumber and pn_check) else ACCEPTED_NO_PN_CHECK
    return AttackOutcome(True, mechanism, error_m)


def rogue_t1_bias(initiator: DeviceProfile, responder: DeviceProfile, channel: ChannelModel,
                  distance_m: float, session_config: SessionConfig, t1_bias_ps: int,
                  seed: int = 0) -> float:
    """Distance shift a responder causes by stamping t1 + ``t1_bias_ps``.

    Honest and rogue exchanges replay the same random stream, so all noise
    cancels and the shift is -bias/2 * c.
    """
    honest = run_single_exchange(initiator, responder, channel, distance_m,
                                 FtmSession(session_config), make_rng(seed))
    rogue = run_single_exchange(initiator, responder, channel, distance_m,
                                FtmSession(session_config), make_rng(seed),
                                t1_bias_ps=t1_bias_ps)
    return rogue.distance_m - honest.distance_m
