"""Batch execution of scenarios and CSV export.

Every (distance, sample) pair draws from its own stream seeded with

    seed ^ (distance_um * 0x9E3779B97F4A7C15) ^ (sample_index * 0xBF58476D1CE4E5B9)

(products taken mod 2**64, distance in whole micrometres), so any sample can
be reproduced on its own and reordering ``distances_m`` only permutes the
per-distance results.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field

from ..adversary import (
    ACCEPTED_ROGUE_T1,
    AttackKind,
    AttackOutcome,
    replay,
    rogue_t1_bias,
    sniff,
    sniff_outcome,
)
from ..errors import AllFramesDropped, ProtocolViolation
from ..estimators import RangingStats, summarize
from ..phy import make_rng
from ..protocol import DEFAULT_EPOCH_PS, BurstResult, FtmSession, run_burst
from ..wire import FrameType, write_frame_log
from .scenario import Scenario

MASK64 = (1 << 64) - 1
DISTANCE_MIX = 0x9E3779B97F4A7C15
SAMPLE_MIX = 0xBF58476D1CE4E5B9

CSV_COLUMNS = (
    "scenario", "seed", "config_name", "true_distance_m", "sample_index", "elapsed_ms",
    "est_distance_m", "rtt_ps", "rssi_dbm", "burst_std_m", "dropped",
)


def sub_seed(seed: int, distance_m: float, sample_index: int) -> int:
    distance_um = round(distance_m * 1_000_000)
    return (seed
            ^ ((distance_um * DISTANCE_MIX) & MASK64)
            ^ ((sample_index * SAMPLE_MIX) & MASK64))


@dataclass(frozen=True)
class Sample:
    sample_index: int
    elapsed_ms: float
    burst: BurstResult | None  # None when every exchange in the tick was dropped


@dataclass
class DistanceResult:
    true_distance_m: float
    samples: list[Sample]
    stats: RangingStats | None
    frame_log: list = field(default_factory=list, repr=False)

    @property
    def delivered(self) -> list[Sample]:
        return [s for s in self.samples if s.burst is not None]

    @property
    def all_dropped(self) -> bool:
        return self.stats is None


@dataclass
class ResultSet:
    scenario: Scenario
    distances: list[DistanceResult]
    attack: AttackOutcome | None = None
    sniff_entries: list = field(default_factory=list, repr=False)

    def for_distance(self, distance_m: float) -> DistanceResult:
        for result in self.distances:
            if result.true_distance_m == distance_m:
                return result
        raise KeyError(distance_m)


def _open_session(scenario: Scenario) -> FtmSession:
    session = FtmSession(scenario.session)
    negotiation = session.establish()
    if not negotiation.accepted:
        raise ProtocolViolation(f"responder rejected the FTM request: {negotiation.reason}")
    return session


def _tick(scenario: Scenario, session: FtmSession, distance_m: float, index: int) -> Sample:
    elapsed_ms = index * scenario.sample_interval_ms
    session.now_ps = DEFAULT_EPOCH_PS + elapsed_ms * 1e9
    rng = make_rng(sub_seed(scenario.seed, distance_m, index))
    try:
        burst = run_burst(scenario.initiator, scenario.responder, scenario.channel,
                          distance_m, session, rng)
    except AllFramesDropped:
        burst = None
    return Sample(index, elapsed_ms, burst)


def run_distance(scenario: Scenario, distance_m: float) -> DistanceResult:
    session = _open_session(scenario)
    samples = [_tick(scenario, session, distance_m, k) for k in range(scenario.samples_per_distance)]
    estimates = [s.burst.mean_distance_m for s in samples if s.burst is not None]
    stats = summarize(estimates, distance_m) if estimates else None
    return DistanceResult(distance_m, samples, stats, session.frame_log)


def run_scenario(scenario: Scenario) -> ResultSet:
    results = ResultSet(scenario, [run_distance(scenario, d) for d in scenario.distances_m])
    if scenario.attacker is not None:
        results.attack, results.sniff_entries = run_attack(scenario, results)
    return results


def run_attack(scenario: Scenario, results: ResultSet | None = None):
    """Execute the scenario's attacker against its first distance.

    Returns ``(AttackOutcome, sniff_entries)``; the entries list is empty
    for anything but a sniffer.
    """
    attacker = scenario.attacker
    distance = scenario.distances_m[0]
    if attacker.kind is AttackKind.SNIFFER:
        if results is not None:
            log = results.distances[0].frame_log
        else:
            log = run_distance(scenario, distance).frame_log
        entries = sniff(write_frame_log(log))
        return sniff_outcome(entries), entries

    if attacker.kind is AttackKind.REPLAYER:
        session = _open_session(scenario)
        captured = None
        for k in range(attacker.replay_delay_samples + 1):
            start = len(session.frame_log)
            _tick(scenario, session, distance, k)
            if captured is None:
                captured = next((f for _, f in session.frame_log[start:]
                                 if f.frame_type is FrameType.FTM), None)
        if captured is None:
            return AttackOutcome(False, "REJECTED_NOTHING_CAPTURED"), []
        outcome = replay(captured, session, pn_check=scenario.session.pn_check,
                         key_known=attacker.key_known, renumber=attacker.renumber)
        return outcome, []

    shift = rogue_t1_bias(scenario.initiator, scenario.responder, scenario.channel, distance,
                          scenario.session, attacker.t1_bias_ps,
                          seed=sub_seed(scenario.seed, distance, 0))
    if attacker.t1_bias_ps == 0:
        return AttackOutcome(False, "NO_EFFECT", shift), []
    return AttackOutcome(True, ACCEPTED_ROGUE_T1, shift), []


def _f(x: float) -> str:
    return f"{x:.4f}"


def export_csv(results: ResultSet) -> str:
    """One row per delivered sample; a ``dropped=all`` row for dead distances."""
    sc = results.scenario
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for dist in results.distances:
        prefix = [sc.name, sc.seed, sc.config_name, _f(dist.true_distance_m)]
        if dist.all_dropped:
            writer.writerow(prefix + ["", "", "", "", "", "", "all"])
            continue
        for s in dist.delivered:
            b = s.burst
            writer.writerow(prefix + [
                s.sample_index, _f(s.elapsed_ms), _f(b.mean_distance_m), _f(b.mean_rtt_ps),
                _f(b.mean_rssi_dbm), _f(b.std_distance_m), b.dropped_count,
            ])
    return out.getvalue()


def format_summary(results: ResultSet) -> str:
    sc = results.scenario
    lines = [
        f"scenario {sc.name} (config {sc.config_name}) seed={sc.seed}",
        f"  initiator={sc.initiator.name} responder={sc.responder.name} channel={sc.channel.name} "
        f"mode={sc.session.mode.value} burst_size={sc.session.burst_size} "
        f"protected={sc.session.protected} pn_check={sc.session.pn_check}",
        f"  duration_s={sc.duration_s:g} sample_interval_ms={sc.sample_interval_ms:g} "
        f"samples_per_distance={sc.samples_per_distance}",
    ]
    if sc.defaults_applied:
        lines.append(f"  defaults applied: {', '.join(sc.defaults_applied)}")
    lines.append("  statistics: population std, p90 nearest-rank on |error|")
    lines.append(f"  {'true_m':>7} {'n':>4} {'mean_m':>8} {'err_m':>7} {'std_m':>7} "
                 f"{'mae_m':>7} {'p90_m':>7} {'dropped':>7}")
    for dist in results.distances:
        lost = sum(1 for s in dist.samples if s.burst is None)
        if dist.all_dropped:
            lines.append(f"  {dist.true_distance_m:7.2f} {0:4d} {'-':>8} {'-':>7} {'-':>7} "
                         f"{'-':>7} {'-':>7} {'all':>7}")
            continue
        st = dist.stats
        lines.append(f"  {st.true_distance_m:7.2f} {st.n_samples:4d} {st.mean_est_m:8.3f} "
                     f"{st.mean_error_m:7.3f} {st.std_est_m:7.3f} {st.mean_abs_error_m:7.3f} "
                     f"{st.p90_abs_error_m:7.3f} {lost:7d}")
    if results.attack is not None:
        lines.append(f"  attack {sc.attacker.kind.value}: {results.attack.report()}")
    return "\n".join(lines) + "\n"
