"""Command line entry points: serve, replay, simulate, analyze, evaluate, report.

Zero-flag invocations use the reference parameters (256 Hz, 5 s epochs,
6 baseline epochs, scaling 1.1, 4-8 Hz band, rectangular window).
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from . import evaluation, ingest, records
from .engine import CalibrationConfig
from .errors import DegenerateDataError, VigilError
from .evaluation import EyeStatusTag, paired_t_test, percent, render_report, summarize
from .pipeline import run_offline
from .records import SessionMeta, load_session, session_scores, write_session
from .spectral import EpochConfig, WindowFn


def _epoch_seconds(text: str) -> int:
    value = int(text)
    if not 2 <= value <= 10:
        raise argparse.ArgumentTypeError(
            f"epoch length must be between 2 and 10 seconds, got {value}"
        )
    return value


def _band(text: str) -> tuple[float, float]:
    try:
        lo, hi = text.split(":")
        return float(lo), float(hi)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected LO:HI, got {text!r}")


def _config_parent() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    g = p.add_argument_group("pipeline configuration")
    g.add_argument("--sample-rate", type=int, default=256, metavar="HZ")
    g.add_argument("--epoch-seconds", type=_epoch_seconds, default=5, metavar="S")
    g.add_argument("--band", type=_band, default=(4.0, 8.0), metavar="LO:HI")
    g.add_argument("--window", choices=["rect", "hann"], default="rect")
    g.add_argument("--baseline-epochs", type=int, default=6, metavar="N")
    g.add_argument("--scaling", type=float, default=1.1, metavar="X")
    return p


def _configs(args) -> tuple[EpochConfig, CalibrationConfig]:
    epoch_cfg = EpochConfig(
        sample_rate_hz=args.sample_rate,
        epoch_seconds=args.epoch_seconds,
        window_fn=WindowFn.parse(args.window),
        band_lo_hz=args.band[0],
        band_hi_hz=args.band[1],
    )
    calib_cfg = CalibrationConfig(
        baseline_epoch_count=args.baseline_epochs, scaling=args.scaling
    )
    return epoch_cfg, calib_cfg


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="vigil",
        description="Theta-band vigilance monitoring: serve, simulate, analyze, evaluate.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    cfg = _config_parent()

    p = sub.add_parser("serve", parents=[cfg], help="run the session service")
    p.add_argument("--bind", default="127.0.0.1:8000", metavar="HOST:PORT")
    p.add_argument("--data-dir", default=None, help="session data directory (or $VIGIL_DATA_DIR)")
    p.add_argument("--session-cap", type=int, default=16)

    p = sub.add_parser("replay", parents=[cfg], help="run the pipeline over a recording")
    p.add_argument("recording", help="CSV recording (t,uv)")
    p.add_argument("--speed", type=float, default=0.0, help="0 = as fast as possible")
    p.add_argument("--tags", default=None, help="optional eye-status tag CSV")
    p.add_argument("--mode", choices=records.MODES, default="natural")
    p.add_argument("--out", default=None, help="session file to write (.jsonl)")

    p = sub.add_parser("simulate", parents=[cfg], help="run the pipeline over a synthetic stream")
    p.add_argument("source", help="preset name (clean, noisy) or synthetic config JSON path")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--mode", choices=records.MODES, default="instructed")
    p.add_argument("--record", default=None, help="also save the raw stream as CSV")
    p.add_argument("--out", default=None, help="session file to write (.jsonl)")

    p = sub.add_parser("analyze", parents=[cfg], help="offline analysis of a tagged recording")
    p.add_argument("recording", help="CSV recording (t,uv)")
    p.add_argument("--tags", required=True, help="eye-status tag CSV")
    p.add_argument("--mode", choices=records.MODES, default="natural")
    p.add_argument("--out", default=None, help="verdicts/session file to write (.jsonl)")

    p = sub.add_parser("evaluate", parents=[cfg], help="aggregate session files into accuracy tables")
    p.add_argument("sessions", nargs="*", help="session .jsonl files")

    p = sub.add_parser("report", parents=[cfg], help="evaluate plus confusion matrices and CSV export")
    p.add_argument("sessions", nargs="*", help="session .jsonl files")
    p.add_argument("--csv", default=None, help="write per-session rows as CSV")

    return parser


def _offline_session(
    samples, source_spec, session_id, mode, epoch_cfg, calib_cfg, tags
) -> tuple[SessionMeta, list[dict]]:
    """Run the pipeline over a finite stream and build persistable records."""
    frames = run_offline(samples, epoch_cfg, calib_cfg)
    events = [f for f in frames if f["type"] in ("baseline", "epoch")]
    verdict_count = sum(1 for f in events if f["type"] == "epoch")
    for tag in tags:
        events.append(records.tag_record(tag.t, tag.status.value))
    events.append(records.ended_record("end-of-stream", verdict_count))
    meta = SessionMeta(
        session_id=session_id,
        source=source_spec,
        epoch_cfg=epoch_cfg,
        calib_cfg=calib_cfg,
        mode=mode,
    )
    return meta, events


def _print_session_summary(meta: SessionMeta, events: list[dict]) -> None:
    verdicts = [e for e in events if e["type"] == "epoch"]
    baseline = next((e for e in events if e["type"] == "baseline"), None)
    print(f"session {meta.session_id}: {len(verdicts)} verdicts", end="")
    if baseline is not None:
        print(f", threshold {baseline['threshold']:.6g} uV^2", end="")
    print()


def cmd_replay(args) -> int:
    epoch_cfg, calib_cfg = _configs(args)
    tags = evaluation.read_tags(args.tags) if args.tags else []
    samples = ingest.replay(args.recording, args.speed)
    session_id = Path(args.recording).stem
    meta, events = _offline_session(
        samples,
        ingest.ReplaySpec(path=args.recording, speed=args.speed),
        session_id,
        args.mode,
        epoch_cfg,
        calib_cfg,
        tags,
    )
    out = args.out or str(Path(args.recording).with_suffix(".session.jsonl"))
    write_session(out, meta, events)
    _print_session_summary(meta, events)
    print(f"wrote {out}")
    return 0


def cmd_simulate(args) -> int:
    if os.path.exists(args.source):
        with open(args.source) as f:
            cfg = ingest.SyntheticConfig.from_dict(json.load(f))
        if args.seed is not None:
            cfg = ingest.SyntheticConfig(
                sample_rate_hz=cfg.sample_rate_hz, seed=args.seed, segments=cfg.segments
            )
        name = Path(args.source).stem
    else:
        cfg = ingest.preset(args.source, seed=args.seed)
        name = args.source
    samples = ingest.synthesize(cfg)
    if args.record:
        n = ingest.write_recording(args.record, samples)
        print(f"recorded {n} samples to {args.record}")
        samples = ingest.replay(args.record, 0.0)
    tags = [
        EyeStatusTag(t=t, status=evaluation.EyeStatus.parse(s))
        for t, s in cfg.eye_status_tags()
    ]
    session_id = f"sim-{name}-{cfg.seed}"
    epoch_cfg, calib_cfg = _configs(args)
    meta, events = _offline_session(
        samples,
        ingest.SyntheticSpec(config=cfg),
        session_id,
        args.mode,
        epoch_cfg,
        calib_cfg,
        tags,
    )
    out = args.out or f"{session_id}.session.jsonl"
    write_session(out, meta, events)
    _print_session_summary(meta, events)
    print(f"wrote {out}")
    return 0


def cmd_analyze(args) -> int:
    epoch_cfg, calib_cfg = _configs(args)
    tags = evaluation.read_tags(args.tags)
    samples = ingest.replay(args.recording, 0.0)
    session_id = Path(args.recording).stem
    meta, events = _offline_session(
        samples,
        ingest.ReplaySpec(path=args.recording, speed=0.0),
        session_id,
        args.mode,
        epoch_cfg,
        calib_cfg,
        tags,
    )
    out = args.out or str(Path(args.recording).with_suffix(".session.jsonl"))
    write_session(out, meta, events)
    record = load_session(out)
    report, conf = session_scores(record)
    text, _ = render_report([report], [conf], [f"Confusion ({report.mode})"])
    print(text, end="")
    print(f"wrote {out}")
    return 0


def _evaluate_sessions(paths, csv_out=None) -> int:
    if not paths:
        print("no session files given", file=sys.stderr)
        return 1
    loaded = [load_session(p) for p in paths]
    scored = [session_scores(rec) for rec in loaded]
    reports = [report for report, _ in scored]

    by_mode: dict[str, list] = {}
    for report, _ in scored:
        by_mode.setdefault(report.mode, []).append(report)

    # pooled-epoch confusion per mode
    matrices = []
    titles = []
    for mode in records.MODES:
        if mode not in by_mode:
            continue
        pooled = {
            est: {act: 0 for act in evaluation.EyeStatus} for est in evaluation.EyeStatus
        }
        for (report, conf) in scored:
            if report.mode != mode:
                continue
            for est in evaluation.EyeStatus:
                for act in evaluation.EyeStatus:
                    pooled[est][act] += conf.counts[est][act]
        matrices.append(evaluation.ConfusionMatrix(counts=pooled))
        titles.append(f"Confusion ({mode}, pooled epochs)")

    text, csv_text = render_report(reports, matrices, titles)
    print(text, end="")

    for mode in records.MODES:
        if mode in by_mode and len(by_mode[mode]) >= 2:
            mean, std = summarize([r.accuracy for r in by_mode[mode]])
            print(f"{mode}: Average {percent(mean)}  STD {percent(std)}  (n={len(by_mode[mode])})")
    if len(by_mode) == 2:
        pooled_acc = [r.accuracy for r in reports]
        if len(pooled_acc) >= 2:
            mean, std = summarize(pooled_acc)
            print(f"combined: Average {percent(mean)}  STD {percent(std)}  (n={len(pooled_acc)})")

    if csv_out:
        with open(csv_out, "w", newline="\n") as f:
            f.write(csv_text)
        print(f"wrote {csv_out}")

    instructed = by_mode.get("instructed", [])
    natural = by_mode.get("natural", [])
    if instructed and natural and len(instructed) == len(natural) and len(instructed) >= 2:
        try:
            result = paired_t_test(
                [r.accuracy for r in instructed], [r.accuracy for r in natural]
            )
        except DegenerateDataError:
            print("paired t-test: undefined (identical accuracy differences)")
        else:
            print(f"instructed vs natural: t={result.t_statistic:.4f}, df={result.df}")
            print(f"paired t-test: p={result.p_two_tailed:.4f}")
    return 0


def cmd_serve(args) -> int:
    import uvicorn

    from .service import create_app

    host, _, port = args.bind.rpartition(":")
    app = create_app(data_dir=args.data_dir, session_cap=args.session_cap)
    uvicorn.run(app, host=host or "127.0.0.1", port=int(port), log_level="info")
    return 0


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "serve":
            return cmd_serve(args)
        if args.command == "replay":
            return cmd_replay(args)
        if args.command == "simulate":
            return cmd_simulate(args)
        if args.command == "analyze":
            return cmd_analyze(args)
        if args.command == "evaluate":
            return _evaluate_sessions(args.sessions)
        if args.command == "report":
            return _evaluate_sessions(args.sessions, csv_out=args.csv)
        parser.error(f"unknown command {args.command!r}")
    except (VigilError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
