#!/usr/bin/env python3
"""Write a demo skeleton stream: each gesture held briefly with neutral
gaps, suitable for `pose2flight replay --input demo_stream.jsonl`.

Usage: python scripts/make_demo_stream.py [--out demo_stream.jsonl]
"""

import argparse

from pose2flight.gestures import Gesture
from pose2flight.pipeline import write_stream
from pose2flight.poses import pose_stream


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--out", default="demo_stream.jsonl")
    ap.add_argument("--hold-frames", type=int, default=12)
    ap.add_argument("--gap-frames", type=int, default=20)
    ap.add_argument("--interval-ms", type=int, default=33)
    args = ap.parse_args()

    frames = []
    ts = 0
    for gesture in Gesture:
        held = pose_stream(gesture, args.hold_frames, ts, args.interval_ms)
        frames.extend(held)
        ts = frames[-1].timestamp_ms + args.interval_ms
        gap = pose_stream(None, args.gap_frames, ts, args.interval_ms)
        frames.extend(gap)
        ts = frames[-1].timestamp_ms + args.interval_ms
    write_stream(args.out, frames)
    print(f"wrote {len(frames)} frames covering all {len(list(Gesture))} gestures to {args.out}")


if __name__ == "__main__":
    main()
