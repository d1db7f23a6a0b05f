#!/usr/bin/env python3
"""Run the service in-process and drive a paced synthetic session through it.

Starts the HTTP service, launches the clean alternating preset at 30x real
time, posts eye-status tags near each segment boundary, prints progress, and
fetches the end-of-session report.
"""

import argparse
import threading
import time

import httpx
import uvicorn

from vigil.ingest import alternating_session
from vigil.service import create_app


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--port", type=int, default=8731)
    parser.add_argument("--speed", type=float, default=30.0, help="pacing multiple")
    parser.add_argument("--data-dir", default="./data")
    args = parser.parse_args()

    app = create_app(data_dir=args.data_dir)
    config = uvicorn.Config(app, host="127.0.0.1", port=args.port, log_level="warning")
    server = uvicorn.Server(config)
    thread = threading.Thread(target=server.run, daemon=True)
    thread.start()

    base = f"http://127.0.0.1:{args.port}"
    client = httpx.Client(base_url=base, timeout=10)
    for _ in range(100):
        try:
            client.get("/sessions/__probe__")
            break
        except httpx.ConnectError:
            time.sleep(0.05)

    cfg = alternating_session(noise_sigma_uv=2.5)
    body = {
        "source": {"kind": "synthetic", "config": cfg.to_dict(), "speed": args.speed},
        "mode": "instructed",
    }
    meta = client.post("/sessions", json=body).json()
    sid = meta["session_id"]
    print(f"session {sid} started at {args.speed}x pacing")

    boundaries = cfg.eye_status_tags()
    next_tag = 0
    poll_s = max(0.05, 2.0 / args.speed)  # keep up with the accelerated clock
    last_print = 0.0
    while True:
        info = client.get(f"/sessions/{sid}").json()
        t = info["latest_t"]
        while next_tag < len(boundaries) and t >= boundaries[next_tag][0]:
            status = boundaries[next_tag][1]
            resp = client.post(f"/sessions/{sid}/tags", json={"status": status})
            if resp.status_code == 200:
                print(f"  tagged {status} at sample time {resp.json()['t']:.2f}s")
            else:
                print(f"  tag {status} rejected: {resp.json().get('detail')}")
            next_tag += 1
        if time.monotonic() - last_print >= 1.0 or info["ended"]:
            last_print = time.monotonic()
            print(
                f"  t={t:6.1f}s phase={info['phase']['phase']:<11} "
                f"verdicts={info['verdict_count']}"
            )
        if info["ended"]:
            break
        time.sleep(poll_s)

    report = client.get(f"/sessions/{sid}/report").json()
    r = report["report"]
    print(f"\naccuracy: {r['n_correct']}/{r['n_epochs']} = {r['accuracy']:.2%}")
    print(f"confusion (normalized): {report['confusion']['normalized']}")
    print(f"session file: {args.data_dir}/{sid}.jsonl")
    server.should_exit = True


if __name__ == "__main__":
    main()
