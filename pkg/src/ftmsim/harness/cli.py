"""``ftmsim`` command-line entry point.

Exit codes: 0 success, 2 config error, 3 runtime error.
"""

from __future__ import annotations

import argparse
import dataclasses
import sys
from pathlib import Path

from ..adversary import sniff, sniff_report
from ..errors import ConfigError, FtmSimError
from ..wire import write_frame_log
from . import presets
from .runner import export_csv, format_summary, run_attack, run_scenario
from .scenario import load_scenario

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_RUNTIME = 3


def _load(path: str, seed: int | None = None):
    try:
        text = Path(path).read_text(encoding="utf-8")
    except (OSError, UnicodeDecodeError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    scenario = load_scenario(text)
    if seed is not None:
        if not 0 <= seed < 2 ** 64:
            raise ConfigError(f"--seed must be an unsigned 64-bit integer, got {seed}")
        scenario = dataclasses.replace(
            scenario, seed=seed,
            defaults_applied=tuple(k for k in scenario.defaults_applied if k != "seed"))
    return scenario


def cmd_presets(args) -> int:
    table = presets.builtin_presets()
    print("setups:")
    for s in table["setups"].values():
        print(f"  {s.name}: {s.initiator} -> {s.responder}, {s.phy_mode} "
              f"@ {s.channel_mhz:g} MHz, burst {s.burst_size}, {s.ranging} ranging")
    print("devices:")
    for d in table["devices"].values():
        print(f"  {d.name}: {d.bandwidth_mhz} MHz @ {d.band_mhz:g} MHz, {d.antennas} antenna(s), "
              f"tx {d.tx_power_dbm:g} dBm, rx sens {d.rx_sensitivity_dbm:g} dBm"
              + ("" if d.quantized else ", ideal timestamps"))
    print("environments:")
    for c in table["channels"].values():
        dists = presets.ENVIRONMENT_DISTANCES.get(c.name, ())
        print(f"  {c.name}: n={c.pathloss_exponent_n:g} A={c.rssi_ref_dbm_A:g} dBm, "
              f"multipath {c.multipath_mean_excess_ns:g} ns x {c.fac_residual:g}, "
              f"shadowing {c.rssi_noise_db_std:g} dB, distances {list(dists)}")
    return EXIT_OK


def cmd_run(args) -> int:
    scenario = _load(args.config, args.seed)
    results = run_scenario(scenario)
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    csv_path = out_dir / f"{scenario.name}_{scenario.seed}.csv"
    csv_path.write_text(export_csv(results), encoding="utf-8", newline="")
    if args.frames:
        for dist in results.distances:
            path = out_dir / f"{scenario.name}_{scenario.seed}_{dist.true_distance_m:g}m.frames"
            path.write_text(write_frame_log(dist.frame_log), encoding="utf-8")
    sys.stdout.write(format_summary(results))
    print(f"wrote {csv_path}")
    return EXIT_OK


def cmd_attack(args) -> int:
    scenario = _load(args.config, args.seed)
    if scenario.attacker is None:
        raise ConfigError("config has no [attacker] table")
    outcome, entries = run_attack(scenario)
    print(f"attack {scenario.attacker.kind.value} on {scenario.name} "
          f"at {scenario.distances_m[0]:g} m (seed {scenario.seed})")
    if entries:
        sys.stdout.write(sniff_report(entries))
    print(outcome.report())
    return EXIT_OK


def cmd_sniff(args) -> int:
    try:
        text = Path(args.log).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read frame log {args.log}: {exc}") from exc
    key = None
    if args.key:
        try:
            key = bytes.fromhex(args.key)
        except ValueError:
            raise ConfigError("--key must be 32 hex characters") from None
        if len(key) != 16:
            raise ConfigError("--key must be 32 hex characters")
    sys.stdout.write(sniff_report(sniff(text, key)))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ftmsim", description="Wi-Fi FTM ranging simulator")
    sub = parser.add_subparsers(dest="command", required=True)

    sub.add_parser("presets", help="list built-in presets") \
        .set_defaults(func=cmd_presets)

    run = sub.add_parser("run", help="run a scenario and write its CSV")
    run.add_argument("--config", required=True)
    run.add_argument("--out", default=".")
    run.add_argument("--seed", type=int)
    run.add_argument("--frames", action="store_true", help="also write per-distance frame logs")
    run.set_defaults(func=cmd_run)

    attack = sub.add_parser("attack", help="run the scenario's attacker")
    attack.add_argument("--config", required=True)
    attack.add_argument("--seed", type=int)
    attack.set_defaults(func=cmd_attack)

    sn = sub.add_parser("sniff", help="decode a captured frame log")
    sn.add_argument("log")
    sn.add_argument("--key", help="16-octet session key as hex")
    sn.set_defaults(func=cmd_sniff)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_CONFIG
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"ftmsim: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (FtmSimError, OSError) as exc:
        print(f"ftmsim: error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
