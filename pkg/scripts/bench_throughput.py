#!/usr/bin/env python3
"""Time offline analysis of one hour of 256 Hz single-channel data."""

import argparse
import os
import tempfile
import time

from vigil.engine import CalibrationConfig
from vigil.ingest import Segment, SyntheticConfig, ToneComponent, replay, synthesize, write_recording
from vigil.pipeline import run_offline
from vigil.spectral import EpochConfig


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--hours", type=float, default=1.0)
    parser.add_argument("--noise", type=float, default=1.0)
    args = parser.parse_args()

    cfg = SyntheticConfig(
        seed=99,
        segments=(
            Segment(
                duration_s=3600.0 * args.hours,
                components=(ToneComponent(freq_hz=6.0, amplitude_uv=10.0),),
                noise_sigma_uv=args.noise,
            ),
        ),
    )
    path = os.path.join(tempfile.gettempdir(), "vigil_bench.csv")
    print(f"generating {args.hours:.1f} h of samples...")
    n = write_recording(path, synthesize(cfg))
    size_mb = os.path.getsize(path) / 1e6
    print(f"  {n} samples, {size_mb:.1f} MB at {path}")

    start = time.perf_counter()
    events = run_offline(replay(path, 0.0), EpochConfig(), CalibrationConfig())
    elapsed = time.perf_counter() - start
    verdicts = sum(1 for e in events if e["type"] == "epoch")
    print(f"analyzed in {elapsed:.2f}s ({n / elapsed / 1e6:.2f} Msamples/s, {verdicts} verdicts)")


if __name__ == "__main__":
    main()
