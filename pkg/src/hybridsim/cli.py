"""Command-line entry point: ``hybridsim run|validate|report|mac-sim|calibrate|verify``."""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

import yaml

from . import calibration, config, scenario as scn, sweeps

EXIT_OK, EXIT_CONFIG, EXIT_RUNTIME = 0, 2, 3
log = logging.getLogger("hybridsim")


def parse_range(text: str) -> tuple[float, float, float]:
    parts = text.split(":")
    if len(parts) != 3:
        raise argparse.ArgumentTypeError("range must look like start:stop:step")
    try:
        return tuple(float(p) for p in parts)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"bad range {text!r}: {exc}") from exc


def parse_seed(text: str) -> int:
    try:
        v = int(text, 0)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"bad seed {text!r}") from exc
    if not 0 <= v < 2 ** 64:
        raise argparse.ArgumentTypeError("seed must fit in an unsigned 64-bit integer")
    return v


def _common(p: argparse.ArgumentParser):
    p.add_argument("--scenario", default=scn.DEFAULT_SCENARIO,
                   help="scenario file or bundled name (default: %(default)s)")
    p.add_argument("--seed", type=parse_seed, help="override the scenario seed")
    p.add_argument("--strict-paper", action="store_true",
                   help="require exactly 6 Wi-Fi and 4 VLC access points")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="hybridsim", description=__doc__)
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="run one figure sweep, or 'all'")
    p.add_argument("sweep", choices=sweeps.KINDS + ("all",))
    _common(p)
    p.add_argument("--out", type=Path, default=Path("results"), help="output directory")
    p.add_argument("--modes", help="comma-separated mode list")
    p.add_argument("--range", type=parse_range, dest="x_range", help="start:stop:step")
    p.add_argument("--deterministic-fading", action="store_true",
                   help="fix the Wi-Fi fading magnitude at 1")
    p.add_argument("--workers", type=int, default=1)

    p = sub.add_parser("validate", help="load and check a scenario file")
    p.add_argument("path", nargs="?", default=scn.DEFAULT_SCENARIO)
    p.add_argument("--strict-paper", action="store_true")

    p = sub.add_parser("report", help="summarise the SAR, PD, EE and battery sweeps")
    p.add_argument("--out", type=Path, default=Path("results"), help="directory holding the CSVs")
    p.add_argument("--baseline", default="WiFi")
    p.add_argument("--target", default="Vlc")

    p = sub.add_parser("mac-sim", help="run the optical-cell MAC simulation")
    _common(p)
    p.add_argument("--out", type=Path, default=Path("results"))
    p.add_argument("--range", type=parse_range, dest="x_range",
                   help="start:stop:beacon_interval in ms")

    p = sub.add_parser("calibrate", help="refit the calibration block")
    _common(p)
    p.add_argument("--out", type=Path, help="write the calibration block as YAML here")

    p = sub.add_parser("verify", help="re-check hashes embedded in emitted CSVs")
    p.add_argument("paths", nargs="+", type=Path, help="CSV files or directories")
    p.add_argument("--scenario", help="also require the config hash of this scenario")
    return ap


def _load(args) -> scn.Scenario:
    sc = scn.load_scenario(args.scenario, strict=args.strict_paper)
    if args.seed is not None:
        sc = scn.Scenario(sc.floor_plan, sc.aps, sc.ues, args.seed, sc.model)
    return sc


def cmd_run(args) -> int:
    sc = _load(args)
    kinds = sweeps.KINDS if args.sweep == "all" else (args.sweep,)
    if args.sweep == "all" and (args.modes or args.x_range):
        raise sweeps.SweepError("--modes and --range apply to a single sweep, not 'all'")
    modes = tuple(m.strip() for m in args.modes.split(",") if m.strip()) if args.modes else ()
    specs = [sweeps.SweepSpec(k, modes, args.x_range, sc.seed, args.out / sweeps.FILE_NAMES[k],
                              args.deterministic_fading, args.workers).validate() for k in kinds]
    for spec in specs:
        res = sweeps.run_sweep(sc, spec)
        print(f"{spec.kind}: {len(res.rows)} rows -> {spec.out}")
    return EXIT_OK


def cmd_validate(args) -> int:
    sc = scn.load_scenario(args.path, strict=args.strict_paper)
    n_w, n_v = len(sc.aps_of(scn.ApKind.WIFI)), len(sc.aps_of(scn.ApKind.VLC))
    print(f"ok: {n_w} Wi-Fi APs, {n_v} VLC APs, {len(sc.ues)} UEs, seed {sc.seed}, "
          f"{'calibrated' if sc.model.calibrated else 'uncalibrated'} model")
    return EXIT_OK


def cmd_report(args) -> int:
    results = []
    for kind in ("SarVsDepth", "PdVsDepth", "EeVsDistance", "BatteryVsDistance"):
        path = args.out / sweeps.FILE_NAMES[kind]
        if path.exists():
            results.append(sweeps.read_csv(path))
    summary = sweeps.report_summary(results, args.baseline, args.target)
    text = json.dumps(summary, indent=2, sort_keys=True)
    sweeps.write_atomic(args.out / "summary.json", text + "\n")
    print(text)
    return EXIT_OK


def cmd_mac(args) -> int:
    sc = _load(args)
    spec = sweeps.SweepSpec("MacTrace", (), args.x_range, sc.seed,
                            args.out / sweeps.FILE_NAMES["MacTrace"]).validate()
    res = sweeps.run_sweep(sc, spec)
    kinds = {}
    for row in res.rows:
        kinds[row[4]] = kinds.get(row[4], 0) + 1
    print(f"{len(res.rows)} events -> {spec.out}")
    for k in sorted(kinds):
        print(f"  {k}: {kinds[k]}")
    return EXIT_OK


def cmd_calibrate(args) -> int:
    sc = _load(args)
    cal = calibration.calibrate(sc.model)
    block = yaml.safe_dump({"calibration": config.to_dict(cal)}, sort_keys=False)
    if args.out:
        sweeps.write_atomic(args.out, block)
    print(block, end="")
    return EXIT_OK


def cmd_verify(args) -> int:
    expected = scn.load_scenario(args.scenario).digest() if args.scenario else None
    files = []
    for p in args.paths:
        files.extend(sorted(p.glob("*.csv")) if p.is_dir() else [p])
    if not files:
        raise config.ConfigError("no CSV files to verify")
    problems = []
    for f in files:
        found = sweeps.verify_csv(f, expected)
        problems.extend(found)
        print(f"{'FAIL' if found else 'ok  '} {f}")
    for msg in problems:
        print(msg, file=sys.stderr)
    return EXIT_RUNTIME if problems else EXIT_OK


COMMANDS = {"run": cmd_run, "validate": cmd_validate, "report": cmd_report,
            "mac-sim": cmd_mac, "calibrate": cmd_calibrate, "verify": cmd_verify}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        return COMMANDS[args.command](args)
    except (config.ConfigError, sweeps.SweepError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except Exception as exc:  # noqa: BLE001 - reported as a runtime failure
        log.debug("runtime failure", exc_info=True)
        print(f"runtime error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
