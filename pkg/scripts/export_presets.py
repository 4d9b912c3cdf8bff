#!/usr/bin/env python3
"""Export the canonical gesture poses as JSON for the operator console.

The frontend ships a frozen copy of this file; re-run after changing the
pose rig and commit the result (tests/test_presets_json.py keeps the two
sides honest).

Usage: python scripts/export_presets.py [--out frontend/src/presets.json]
"""

import argparse
import json

from pose2flight.gestures import Gesture
from pose2flight.poses import IMAGE_H, IMAGE_W, gesture_pose, neutral_pose


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--out", default="frontend/src/presets.json")
    args = ap.parse_args()

    presets = {"neutral": {str(k): [x, y] for k, (x, y) in neutral_pose().items()}}
    for gesture in Gesture:
        presets[gesture.value] = {
            str(k): [x, y] for k, (x, y) in gesture_pose(gesture).items()
        }
    payload = {"image_width": IMAGE_W, "image_height": IMAGE_H, "presets": presets}
    with open(args.out, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=1)
        fh.write("\n")
    print(f"wrote {len(presets)} presets to {args.out}")


if __name__ == "__main__":
    main()
