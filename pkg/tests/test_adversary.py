import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ftmsim import phy
from ftmsim.adversary import (
    ACCEPTED_NO_PN_CHECK,
    ACCEPTED_PLAINTEXT,
    ACCEPTED_RENUMBERED,
    REJECTED_BAD_TAG,
    REJECTED_DUPLICATE_PN,
    REJECTED_REDACTED,
    AttackerConfig,
    AttackKind,
    AttackOutcome,
    replay,
    rogue_t1_bias,
    sniff,
    sniff_outcome,
    sniff_report,
)
from ftmsim.errors import MalformedLog
from ftmsim.harness import presets
from ftmsim.phy import ChannelModel, DeviceProfile
from ftmsim.protocol import FtmSession, SessionConfig, rtt_to_distance_m, run_burst
from ftmsim.wire import FrameType, FtmFrame, encode_frame, protect, write_frame_log

KEY = bytes.fromhex("000102030405060708090a0b0c0d0e0f")
IDEAL = DeviceProfile("ideal", quantized=False, rx_sensitivity_dbm=-200)
QUIET = ChannelModel("quiet")


def victim(protected=False, pn_check=False, samples=3, seed=0):
    """A session that has run a few exchanges; returns it plus the first FTM frame."""
    cfg = SessionConfig(burst_size=1, protected=protected, pn_check=pn_check,
                        key=KEY if protected else None)
    session = FtmSession(cfg)
    session.establish()
    rng = phy.make_rng(seed)
    for _ in range(samples):
        run_burst(IDEAL, IDEAL, QUIET, 5.0, session, rng)
    first = next(f for _, f in session.frame_log if f.frame_type is FrameType.FTM)
    return session, first


class TestConfigTypes:
    def test_bias_only_for_rogue(self):
        with pytest.raises(ValueError):
            AttackerConfig(AttackKind.REPLAYER, t1_bias_ps=5)
        assert AttackerConfig("rogue_responder", t1_bias_ps=5).kind is AttackKind.ROGUE_RESPONDER

    def test_outcome_invariant(self):
        with pytest.raises(ValueError):
            AttackOutcome(True, REJECTED_BAD_TAG)
        AttackOutcome(False, REJECTED_BAD_TAG)

    def test_report(self):
        report = AttackOutcome(True, ACCEPTED_NO_PN_CHECK, 1.5).report()
        assert report == "succeeded=true mechanism=ACCEPTED_NO_PN_CHECK induced_distance_error_m=1.5000"


class TestSniff:
    def test_unprotected_t1_visible(self):
        log = write_frame_log([(5, FtmFrame(FrameType.FTM, 1, 1, 123456, 3))])
        entries = sniff(log)
        assert entries[0].t1_ps == 123456
        assert entries[0].line() == "0 FTM 3 0 123456 NONE"

    def test_protected_without_key(self):
        log = write_frame_log([(5, protect(FtmFrame(FrameType.FTM, 1, 1, 123456, 3), KEY))])
        entry = sniff(log)[0]
        assert entry.t1_ps is None
        assert entry.line() == "0 FTM 3 1 REDACTED UNVERIFIED"

    def test_protected_with_key(self):
        log = write_frame_log([(5, protect(FtmFrame(FrameType.FTM, 1, 1, 123456, 3), KEY))])
        assert sniff(log, KEY)[0].line() == "0 FTM 3 1 123456 VALID"
        assert sniff(log, bytes(16))[0].tag_status == "INVALID"

    @pytest.mark.parametrize("text", ["garbage", "1 " + "ff" * 24, "1 " + "00" * 10])
    def test_malformed(self, text):
        with pytest.raises(MalformedLog):
            sniff(text)

    def test_empty_log(self):
        assert sniff("") == []
        assert sniff_outcome([]).mechanism == REJECTED_REDACTED

    def test_outcomes(self):
        open_session, _ = victim()
        closed, _ = victim(protected=True)
        assert sniff_outcome(sniff(write_frame_log(open_session.frame_log))) == \
            AttackOutcome(True, ACCEPTED_PLAINTEXT)
        assert sniff_outcome(sniff(write_frame_log(closed.frame_log))).succeeded is False

    def test_completeness_end_to_end(self):
        session, _ = victim(samples=5)
        entries = sniff(write_frame_log(session.frame_log))
        assert len(entries) == len(session.frame_log)
        for entry, (us, frame) in zip(entries, session.frame_log):
            assert entry.frame == frame
            assert entry.capture_us == us
            assert encode_frame(entry.frame) == encode_frame(frame)
        report = sniff_report(entries).splitlines()
        assert report[0].startswith("0 FTMR 0 0 0 ")


class TestReplay:
    def test_no_pn_check(self):
        session, captured = victim()
        outcome = replay(captured, session, pn_check=False, key_known=False)
        assert outcome.succeeded and outcome.mechanism == ACCEPTED_NO_PN_CHECK
        assert outcome.induced_distance_error_m == pytest.approx(
            rtt_to_distance_m(session.last_t1_ps - captured.t1_ps))
        # two inter-measurement gaps of 1 ms at light speed
        assert outcome.induced_distance_error_m == pytest.approx(2 * 1e-3 / 2 * 299_792_458, rel=1e-6)

    def test_pn_check_rejects_duplicate(self):
        session, captured = victim(pn_check=True)
        assert replay(captured, session, pn_check=True, key_known=False) == \
            AttackOutcome(False, REJECTED_DUPLICATE_PN)

    def test_renumber_without_key_breaks_tag(self):
        session, captured = victim(protected=True, pn_check=True)
        outcome = replay(captured, session, pn_check=True, key_known=False, renumber=True)
        assert outcome == AttackOutcome(False, REJECTED_BAD_TAG)

    def test_renumber_with_key(self):
        session, captured = victim(protected=True, pn_check=True)
        outcome = replay(captured, session, pn_check=True, key_known=True, renumber=True)
        assert outcome.succeeded and outcome.mechanism == ACCEPTED_RENUMBERED

    def test_renumber_unprotected(self):
        session, captured = victim(pn_check=True)
        assert replay(captured, session, pn_check=True, key_known=False, renumber=True).succeeded

    def test_session_untouched(self):
        session, captured = victim()
        before = session.snapshot()
        replay(captured, session, pn_check=False, key_known=False)
        assert session.last_rx_pn == before.last_rx_pn
        assert session.frame_log == before.frame_log

    @settings(max_examples=30, deadline=None)
    @given(st.booleans(), st.booleans(), st.booleans(), st.integers(0, 2 ** 32))
    def test_outcome_independent_of_timing(self, pn_check, protected, key_known, seed):
        a_session, a_frame = victim(protected, pn_check, seed=seed)
        b_session, b_frame = victim(protected, pn_check, seed=seed + 1)
        a = replay(a_frame, a_session, pn_check, key_known)
        b = replay(b_frame, b_session, pn_check, key_known)
        assert (a.succeeded, a.mechanism) == (b.succeeded, b.mechanism)


class TestRogue:
    cfg = SessionConfig()

    def shift(self, bias, **kw):
        return rogue_t1_bias(IDEAL, IDEAL, QUIET, 10.0, self.cfg, bias, **kw)

    def test_examples(self):
        assert self.shift(66_712) == pytest.approx(-9.999877229, abs=1e-9)
        assert self.shift(-6671) == pytest.approx(0.99995774, abs=1e-8)
        assert self.shift(0) == 0

    def test_noise_cancels_on_real_hardware(self):
        s = presets.setup("config2")
        ini, res = presets.device(s.initiator), presets.device(s.responder)
        for seed in range(5):
            shift = rogue_t1_bias(ini, res, presets.channel("outdoor"), 5.0, self.cfg, 66_712, seed=seed)
            assert shift == pytest.approx(-9.999877229, abs=1e-9)

    @given(st.integers(-10 ** 7, 10 ** 7))
    def test_linear(self, bias):
        assert self.shift(bias) == pytest.approx(-bias / 2 * 299_792_458 / 1e12, abs=1e-9)


def test_mitigation_matrix():
    # location tracking: protection hides timestamps
    plain, _ = victim()
    guarded, _ = victim(protected=True)
    assert sniff_outcome(sniff(write_frame_log(plain.frame_log))).succeeded
    assert not sniff_outcome(sniff(write_frame_log(guarded.frame_log))).succeeded
    # replay: the PN check stops it
    session, captured = victim()
    assert replay(captured, session, pn_check=False, key_known=False).succeeded
    session, captured = victim(pn_check=True)
    assert not replay(captured, session, pn_check=True, key_known=False).succeeded


def test_replay_on_preset_hardware():
    s = presets.setup("config2")
    ini, res = presets.device(s.initiator), presets.device(s.responder)
    session = FtmSession(SessionConfig(burst_size=2))
    session.establish()
    rng = phy.make_rng(3)
    run_burst(ini, res, presets.channel("outdoor"), 3.0, session, rng)
    run_burst(ini, res, presets.channel("outdoor"), 3.0, session, rng)
    captured = next(f for _, f in session.frame_log if f.frame_type is FrameType.FTM)
    assert replay(captured, session, pn_check=False, key_known=False).mechanism == ACCEPTED_NO_PN_CHECK
    assert replay(captured, session, pn_check=True, key_known=False).mechanism == REJECTED_DUPLICATE_PN
