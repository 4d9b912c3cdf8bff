// Puppet skeleton model: 18 COCO joints with visibility, serialized to
// the pipeline's stream line format.

export const NUM_JOINTS = 18;

export const JOINT_NAMES = [
  "nose", "neck",
  "r-shoulder", "r-elbow", "r-wrist",
  "l-shoulder", "l-elbow", "l-wrist",
  "r-hip", "r-knee", "r-ankle",
  "l-hip", "l-knee", "l-ankle",
  "r-eye", "l-eye", "r-ear", "l-ear",
];

// bone segments for rendering
export const BONES: [number, number][] = [
  [0, 1], [1, 2], [2, 3], [3, 4], [1, 5], [5, 6], [6, 7],
  [1, 8], [8, 9], [9, 10], [1, 11], [11, 12], [12, 13],
  [0, 14], [0, 15], [14, 16], [15, 17],
];

export interface PuppetJoint {
  x: number;
  y: number;
  visible: boolean;
}

export interface PresetFile {
  image_width: number;
  image_height: number;
  presets: Record<string, Record<string, [number, number]>>;
}

export class PuppetPose {
  joints: PuppetJoint[];
  imageWidth: number;
  imageHeight: number;

  constructor(imageWidth = 640, imageHeight = 480) {
    this.imageWidth = imageWidth;
    this.imageHeight = imageHeight;
    this.joints = [];
    for (let i = 0; i < NUM_JOINTS; i++) {
      this.joints.push({ x: 320, y: 240, visible: true });
    }
  }

  applyPreset(entry: Record<string, [number, number]>): void {
    for (let i = 0; i < NUM_JOINTS; i++) {
      const coords = entry[String(i)];
      if (coords) {
        this.joints[i] = { x: coords[0], y: coords[1], visible: true };
      } else {
        this.joints[i] = { ...this.joints[i], visible: false };
      }
    }
  }

  toggleVisibility(id: number): void {
    this.joints[id].visible = !this.joints[id].visible;
  }

  /** One stream record. Hidden joints are omitted, which the pipeline
   * reads back as confidence-0 (missing). */
  toFrameLine(timestampMs: number, jitterSigma = 0, rand: () => number = Math.random): string {
    const keypoints = [];
    for (let i = 0; i < NUM_JOINTS; i++) {
      const j = this.joints[i];
      if (!j.visible) continue;
      let { x, y } = j;
      if (jitterSigma > 0) {
        x += gaussian(rand) * jitterSigma;
        y += gaussian(rand) * jitterSigma;
      }
      keypoints.push({ id: i, x, y, c: 0.9 });
    }
    return JSON.stringify({
      timestamp_ms: timestampMs,
      image_width: this.imageWidth,
      image_height: this.imageHeight,
      keypoints,
    });
  }
}

function gaussian(rand: () => number): number {
  let u = 0;
  let v = 0;
  while (u === 0) u = rand();
  while (v === 0) v = rand();
  return Math.sqrt(-2.0 * Math.log(u)) * Math.cos(2.0 * Math.PI * v);
}

/** Parse a stream line back into joint coordinates (absent ids are
 * invisible), mirroring the pipeline's reader. */
export function parseFrameLine(line: string): PuppetPose {
  const obj = JSON.parse(line);
  const pose = new PuppetPose(obj.image_width, obj.image_height);
  for (const j of pose.joints) j.visible = false;
  for (const kp of obj.keypoints) {
    if (kp.c > 0) {
      pose.joints[kp.id] = { x: kp.x, y: kp.y, visible: true };
    }
  }
  return pose;
}
