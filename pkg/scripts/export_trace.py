#!/usr/bin/env python3
"""Export a session file's per-epoch theta band power as CSV for plotting."""

import argparse

from vigil.records import load_session


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("session", help="session .jsonl file")
    parser.add_argument("--out", default=None, help="output CSV (default: stdout)")
    args = parser.parse_args()

    record = load_session(args.session)
    lines = ["epoch_index,start_t,theta_bp,threshold,state,valid"]
    span = record.meta.epoch_cfg.epoch_seconds
    for v in record.verdicts:
        lines.append(
            f"{v['index']},{v['index'] * span},{v['theta_bp']!r},"
            f"{v['threshold']!r},{v['state'] or ''},{str(v['valid']).lower()}"
        )
    text = "\n".join(lines) + "\n"
    if args.out:
        with open(args.out, "w", newline="\n") as f:
            f.write(text)
        print(f"wrote {args.out} ({len(record.verdicts)} epochs)")
    else:
        print(text, end="")


if __name__ == "__main__":
    main()
