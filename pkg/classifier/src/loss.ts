import * as tf from "@tensorflow/tfjs";

/** Label-smoothing cross-entropy from logits. One-hot targets are relaxed to
 * 1 - s + s/K on the true class and s/K elsewhere, so the uniform predictor
 * scores exactly ln K regardless of the smoothing factor. */
export function smoothedCrossEntropy(
  logits: tf.Tensor2D,
  oneHot: tf.Tensor2D,
  smoothing: number,
): tf.Scalar {
  if (smoothing < 0 || smoothing >= 1) {
    throw new Error(`smoothing must be in [0, 1), got ${smoothing}`);
  }
  return tf.tidy(() => {
    const k = oneHot.shape[1];
    const targets = oneHot.mul(1 - smoothing).add(smoothing / k);
    return targets.mul(tf.logSoftmax(logits)).sum(1).neg().mean() as tf.Scalar;
  });
}
