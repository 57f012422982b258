import * as tf from "@tensorflow/tfjs";
import { forwardLogits } from "./model.js";

/** Linear interpolation of `values` onto `length` evenly spaced points. */
export function upsampleLinear(values: Float32Array, length: number): Float32Array {
  const out = new Float32Array(length);
  if (values.length === 1) {
    out.fill(values[0]);
    return out;
  }
  const scale = (values.length - 1) / (length - 1);
  for (let i = 0; i < length; i++) {
    const u = i * scale;
    const lo = Math.floor(u);
    const hi = Math.min(lo + 1, values.length - 1);
    const frac = u - lo;
    out[i] = values[lo] * (1 - frac) + values[hi] * frac;
  }
  return out;
}

/** Class-activation importance over the input sequence: gradients of the
 * class score with respect to the final convolutional stage's activations
 * are pooled over time into per-channel weights, the weighted activation sum
 * is rectified, and the result is upsampled back to input length. Depends
 * only on the forward activations and the class-score gradient, so identical
 * inputs give identical maps. */
export function gradCam(model: tf.LayersModel, x: Float32Array, classIndex?: number): Float32Array {
  const inputLength = model.inputs[0].shape[1] as number;
  if (x.length !== inputLength) {
    throw new Error(`input length mismatch: model expects ${inputLength}, got ${x.length}`);
  }
  const featureLayer = model.getLayer("features");
  const embedding = model.getLayer("embedding");
  const head = model.getLayer("logits");
  const featureModel = tf.model({
    inputs: model.inputs,
    outputs: featureLayer.output as tf.SymbolicTensor,
  });

  const cam = tf.tidy(() => {
    const xs = tf.tensor3d(x, [1, inputLength, 1]);
    const chosen =
      classIndex ?? (forwardLogits(model, xs).argMax(1).dataSync()[0] as number);
    const activations = featureModel.apply(xs) as tf.Tensor3D;
    const classScore = (feat: tf.Tensor) => {
      const logits = head.apply(embedding.apply(feat)) as tf.Tensor2D;
      return logits.slice([0, chosen], [1, 1]).reshape([]) as tf.Scalar;
    };
    const grads = tf.grad(classScore)(activations) as tf.Tensor3D;
    const channelWeights = grads.mean([0, 1]);
    return tf.relu(activations.mul(channelWeights).sum(2)).reshape([-1]);
  });
  const out = upsampleLinear(cam.dataSync() as Float32Array, inputLength);
  cam.dispose();
  return out;
}
