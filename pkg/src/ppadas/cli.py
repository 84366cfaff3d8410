"""Command-line front end.

Exit codes: 0 success, 2 infeasible plan, 3 decode failure, 4 config error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

from . import codes, dsp, experiments, planner
from .config import ConfigError, load_run_config, load_scenario
from .fibersim import build_taps, load_capture, save_capture, simulate_capture, synthesize_waveform
from .pipeline import (
    InfeasiblePlanError,
    demodulate,
    render_report,
    report_to_dict,
    run_e2e,
    write_phase_csv,
    write_profile_csv,
    write_spectrum_csv,
)

EXIT_OK = 0
EXIT_INFEASIBLE = 2
EXIT_DECODE = 3
EXIT_CONFIG = 4


def _cmd_gen_code(args) -> int:
    try:
        code = codes.legendre_sequence(args.n)
    except codes.CodeLengthError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    chips = codes.perfect_reference(code).taps if args.reference else code.chips
    if args.out:
        if args.binary:
            codes.write_chips_binary(args.out, chips)
        else:
            codes.write_chips_text(args.out, chips)
    else:
        for c in chips:
            print(int(c))
    return EXIT_OK


def _feasibility_lines(report) -> list[str]:
    lines = [
        f"feasible         : {report.feasible}",
        f"min circular gap : {report.min_circular_gap * 1e9:.2f} ns",
    ]
    if report.violating_pair:
        lines.append(f"violating pair   : {' <-> '.join(report.violating_pair)}")
    return lines


def _cmd_plan_check(args) -> int:
    scenario = load_scenario(args.config)
    residues = planner.roundtrip_delays(scenario)
    report = planner.check_separation(residues, args.delta)
    print(f"peaks            : {len(residues.peaks)}")
    print(f"period           : {residues.period * 1e6:.3f} us")
    for line in _feasibility_lines(report):
        print(line)
    if args.json:
        doc = {
            "feasible": report.feasible,
            "min_circular_gap_s": report.min_circular_gap,
            "violating_pair": report.violating_pair,
            "period_s": residues.period,
            "peaks": [
                {
                    "sensor_id": p.sensor_id,
                    "peak_id": p.peak_id,
                    "delay_s": p.delay,
                    "residue_s": p.residue,
                }
                for p in residues.peaks
            ],
        }
        with open(args.json, "w") as fh:
            json.dump(doc, fh, indent=2)
            fh.write("\n")
    return EXIT_OK if report.feasible else EXIT_INFEASIBLE


def _cmd_plan_search(args) -> int:
    scenario = load_scenario(args.config)
    chip = args.chip_duration or scenario.code.chip_duration
    found = planner.search_code_length(
        scenario.sensors, chip, args.delta, args.n_min, args.n_max, scenario.group_velocity
    )
    for n in found:
        print(n)
    if not found:
        print("no feasible code length in range", file=sys.stderr)
    return EXIT_OK


def _cmd_plan_couplers(args) -> int:
    ratios = planner.equalize_couplers(args.count)
    for j, (k, drive) in enumerate(zip(ratios, planner.drive_powers(ratios)), start=1):
        print(f"{j}\t{k:.10f}\t{drive:.10f}")
    return EXIT_OK


def _cmd_simulate(args) -> int:
    cfg = load_run_config(args.config, seed_override=args.seed)
    capture = simulate_capture(
        build_taps(cfg.scenario),
        synthesize_waveform(cfg.code, cfg.oversampling),
        cfg.excitations,
        cfg.noise,
        cfg.duration,
        oversampling=cfg.oversampling,
        chip_duration=cfg.code.chip_duration,
        phase_sampling=cfg.phase_sampling,
        scenario_digest=cfg.scenario.fingerprint(),
    )
    save_capture(args.out, capture)
    print(
        f"wrote {args.out}: {len(capture.samples)} samples @ "
        f"{capture.sample_rate / 1e6:.1f} MS/s, seed {capture.seed}"
    )
    return EXIT_OK


def _load_capture_checked(path, cfg):
    capture = load_capture(path)
    expect = cfg.scenario.fingerprint()[:16]
    if capture.scenario_digest and capture.scenario_digest != expect:
        print(
            f"warning: capture scenario digest {capture.scenario_digest} does not "
            f"match config ({expect})",
            file=sys.stderr,
        )
    return capture


def _cmd_demod(args) -> int:
    cfg = load_run_config(args.config, seed_override=None)
    capture = _load_capture_checked(args.capture, cfg)
    profile, tracks, report, series_list = demodulate(
        capture, cfg, sync=args.sync, mode=args.mode
    )
    os.makedirs(args.out, exist_ok=True)
    write_profile_csv(
        os.path.join(args.out, "profile.csv"), profile, dsp.average_power_profile(profile)
    )
    for series in series_list:
        write_phase_csv(os.path.join(args.out, f"phase_{series.sensor_id}.csv"), series)
    print(render_report(report))
    return EXIT_OK


def _cmd_spectrum(args) -> int:
    cfg = load_run_config(args.config, seed_override=None)
    capture = _load_capture_checked(args.capture, cfg)
    _, _, report, series_list = demodulate(capture, cfg, sync=args.sync, mode=args.mode)
    os.makedirs(args.out, exist_ok=True)
    for series, sensor in zip(series_list, report.sensors):
        spec = dsp.spectrum(series, window=args.window or cfg.window)
        write_spectrum_csv(os.path.join(args.out, f"spectrum_{series.sensor_id}.csv"), spec)
        sensor.dominant_tone_hz = spec.dominant_tone
        sensor.snr_db = spec.snr_db
    print(render_report(report))
    return EXIT_OK


def _cmd_e2e(args) -> int:
    cfg = load_run_config(args.config, seed_override=args.seed)
    out_dir = args.out or cfg.output_dir
    if not out_dir:
        raise ConfigError("no output directory: pass --out or set output_dir in the config")
    report = run_e2e(cfg, out_dir, sync=args.sync, mode=args.mode)
    print(render_report(report))
    print(f"artifacts in {out_dir}")
    return EXIT_OK


def _cmd_bench(args) -> int:
    rep = experiments.bench_correlator(
        n=args.n, oversampling=args.oversampling, n_periods=args.periods, mode=args.mode
    )
    print(f"n={rep.n} oversampling={rep.oversampling} periods={rep.n_periods} mode={rep.mode}")
    print(f"oracle max rel err : {rep.oracle_max_rel_err:.2e}")
    print(f"best wall time     : {rep.seconds:.4f} s")
    print(f"throughput         : {rep.periods_per_sec:,.0f} periods/s "
          f"({rep.samples_per_sec / 1e6:,.1f} MS/s)")
    print(f"scan rate          : {rep.scan_rate:,.0f} periods/s")
    print(f"real-time capable  : {rep.realtime_capable}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="ppadas", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gen-code", help="emit a code as chips (or its {0,2} reference)")
    g.add_argument("--n", type=int, required=True)
    g.add_argument("--reference", action="store_true", help="emit taps = chips + 1")
    g.add_argument("--out", help="write to file instead of stdout")
    g.add_argument("--binary", action="store_true", help="signed 8-bit file format")
    g.set_defaults(fn=_cmd_gen_code)

    plan = sub.add_parser("plan", help="layout feasibility tools")
    plan_sub = plan.add_subparsers(dest="plan_command", required=True)

    c = plan_sub.add_parser("check", help="non-overlap check for a scenario")
    c.add_argument("--config", required=True, help="scenario file")
    c.add_argument("--delta", type=float, default=planner.DEFAULT_MIN_SEPARATION)
    c.add_argument("--json", help="also write a machine-readable report")
    c.set_defaults(fn=_cmd_plan_check)

    s = plan_sub.add_parser("search", help="scan code lengths for feasibility")
    s.add_argument("--config", required=True, help="scenario file")
    s.add_argument("--chip-duration", type=float, default=None)
    s.add_argument("--delta", type=float, default=planner.DEFAULT_MIN_SEPARATION)
    s.add_argument("--n-min", type=int, required=True)
    s.add_argument("--n-max", type=int, required=True)
    s.set_defaults(fn=_cmd_plan_search)

    k = plan_sub.add_parser("couplers", help="equalizing tap ratios for n stages")
    k.add_argument("--count", type=int, required=True)
    k.set_defaults(fn=_cmd_plan_couplers)

    sim = sub.add_parser("simulate", help="synthesize a capture file")
    sim.add_argument("--config", required=True, help="run file")
    sim.add_argument("--seed", type=int, default=None)
    sim.add_argument("--out", required=True)
    sim.set_defaults(fn=_cmd_simulate)

    d = sub.add_parser("demod", help="correlate a capture and extract phases")
    d.add_argument("--capture", required=True)
    d.add_argument("--config", required=True, help="run file")
    d.add_argument("--out", required=True)
    d.add_argument("--mode", choices=["perfect", "matched"], default=None)
    d.add_argument("--sync", action="store_true", help="search the period alignment")
    d.set_defaults(fn=_cmd_demod)

    sp = sub.add_parser("spectrum", help="phase spectra of a capture")
    sp.add_argument("--capture", required=True)
    sp.add_argument("--config", required=True, help="run file")
    sp.add_argument("--out", required=True)
    sp.add_argument("--mode", choices=["perfect", "matched"], default=None)
    sp.add_argument("--window", choices=["none", "hann"], default=None)
    sp.add_argument("--sync", action="store_true")
    sp.set_defaults(fn=_cmd_spectrum)

    e = sub.add_parser("e2e", help="full pipeline with artifacts")
    e.add_argument("--config", required=True, help="run file")
    e.add_argument("--out", default=None)
    e.add_argument("--seed", type=int, default=None)
    e.add_argument("--mode", choices=["perfect", "matched"], default=None)
    e.add_argument("--sync", action="store_true")
    e.set_defaults(fn=_cmd_e2e)

    b = sub.add_parser("bench", help="correlator throughput")
    b.add_argument("--n", type=int, default=4003)
    b.add_argument("--oversampling", type=int, default=4)
    b.add_argument("--periods", type=int, default=187)
    b.add_argument("--mode", choices=["perfect", "matched"], default="perfect")
    b.set_defaults(fn=_cmd_bench)

    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except InfeasiblePlanError as exc:
        print(f"infeasible plan: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except dsp.PeakDetectionError as exc:
        print(f"decode failure: {exc}", file=sys.stderr)
        return EXIT_DECODE
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    raise SystemExit(main())
