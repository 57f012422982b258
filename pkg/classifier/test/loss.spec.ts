import { beforeAll, describe, expect, it } from "vitest";
import * as tf from "@tensorflow/tfjs";
import { initBackend } from "../src/backend.js";
import { smoothedCrossEntropy } from "../src/loss.js";

function oneHotRows(labels: number[], k: number): tf.Tensor2D {
  return tf.oneHot(tf.tensor1d(labels, "int32"), k).toFloat() as tf.Tensor2D;
}

describe("label-smoothing cross-entropy", () => {
  beforeAll(async () => {
    await initBackend();
  });

  it("scores the uniform predictor at ln K for every smoothing factor", () => {
    for (const k of [2, 3]) {
      for (const smoothing of [0, 0.1, 0.5]) {
        for (const fillValue of [0, 0.7]) {
          const loss = tf.tidy(() => {
            const logits = tf.fill([6, k], fillValue) as tf.Tensor2D;
            const targets = oneHotRows([0, 1, 0, 1, 0, 1].map((v) => v % k), k);
            return smoothedCrossEntropy(logits, targets, smoothing).dataSync()[0];
          });
          expect(Math.abs(loss - Math.log(k))).toBeLessThan(1e-6);
        }
      }
    }
  });

  it("scores a confident correct prediction strictly between 0 and ln K", () => {
    const loss = tf.tidy(() => {
      const logits = tf.tensor2d([[8, 0]]);
      const targets = tf.tensor2d([[1, 0]]);
      return smoothedCrossEntropy(logits, targets, 0.1).dataSync()[0];
    });
    expect(loss).toBeGreaterThan(0);
    expect(loss).toBeLessThan(Math.log(2));
  });

  it("reduces to plain cross-entropy at smoothing zero", () => {
    const values = tf.tidy(() => {
      const logits = tf.tensor2d([
        [1.2, -0.3, 0.5],
        [-2.0, 0.1, 0.7],
        [0.0, 0.0, 3.0],
        [1.0, 1.0, 1.0],
      ]);
      const targets = oneHotRows([0, 2, 1, 2], 3);
      const ours = smoothedCrossEntropy(logits, targets, 0).dataSync()[0];
      const stock = tf.losses.softmaxCrossEntropy(targets, logits).dataSync()[0];
      return [ours, stock];
    });
    expect(Math.abs(values[0] - values[1])).toBeLessThan(1e-6);
  });

  it("averages over the batch", () => {
    const values = tf.tidy(() => {
      const row = tf.tensor2d([[2.0, -1.0]]);
      const target = tf.tensor2d([[1, 0]]);
      const single = smoothedCrossEntropy(row, target, 0.1).dataSync()[0];
      const tripled = smoothedCrossEntropy(
        tf.concat([row, row, row]) as tf.Tensor2D,
        tf.concat([target, target, target]) as tf.Tensor2D,
        0.1,
      ).dataSync()[0];
      return [single, tripled];
    });
    expect(values[1]).toBeCloseTo(values[0], 6);
  });

  it("rejects smoothing factors outside [0, 1)", () => {
    const logits = tf.tensor2d([[1, 0]]);
    const targets = tf.tensor2d([[1, 0]]);
    expect(() => smoothedCrossEntropy(logits, targets, 1)).toThrow(/smoothing/);
    expect(() => smoothedCrossEntropy(logits, targets, -0.2)).toThrow(/smoothing/);
    tf.dispose([logits, targets]);
  });
});
