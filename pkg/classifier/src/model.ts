import * as tf from "@tensorflow/tfjs";
import { BatchNorm1d } from "./layers.js";

/** Squeeze-and-excitation ResNet18 adapted to 1D sequences.
 *
 * Every temporal convolution uses kernel size 7 with stride 1 (same
 * padding), so sequence length is reduced only by max pooling: once at the
 * stem and once at the entry of each stage after the first. Four stages of
 * two squeeze-and-excitation residual blocks each double the channel count,
 * then global average pooling and a dense head produce the class logits.
 *
 * `baseChannels` scales the whole channel ramp (stages run at 1x, 2x, 4x,
 * 8x the base). The classic width is 64; narrow models train quickly on a
 * single CPU core and are what the tests use. */
export interface ModelSpec {
  inputLength: number;
  numClasses: number;
  baseChannels?: number;
  seed?: number;
}

const SE_REDUCTION = 16;

export function buildClassifier(spec: ModelSpec): tf.LayersModel {
  const base = spec.baseChannels ?? 64;
  if (spec.numClasses < 2) {
    throw new Error(`numClasses must be at least 2, got ${spec.numClasses}`);
  }
  let seedCounter = (spec.seed ?? 0) * 1000 + 1;
  const glorot = () => tf.initializers.glorotUniform({ seed: seedCounter++ });
  const conv = (filters: number, kernelSize: number, name: string) =>
    tf.layers.conv1d({
      filters,
      kernelSize,
      strides: 1,
      padding: "same",
      useBias: false,
      kernelInitializer: glorot(),
      name,
    });

  const seBlock = (x: tf.SymbolicTensor, channels: number, name: string): tf.SymbolicTensor => {
    const squeezed = tf.layers
      .globalAveragePooling1d({ name: `${name}_squeeze` })
      .apply(x) as tf.SymbolicTensor;
    const reduced = tf.layers
      .dense({
        units: Math.max(1, Math.round(channels / SE_REDUCTION)),
        activation: "relu",
        kernelInitializer: glorot(),
        name: `${name}_reduce`,
      })
      .apply(squeezed) as tf.SymbolicTensor;
    const excited = tf.layers
      .dense({
        units: channels,
        activation: "sigmoid",
        kernelInitializer: glorot(),
        name: `${name}_excite`,
      })
      .apply(reduced) as tf.SymbolicTensor;
    const broadcast = tf.layers
      .reshape({ targetShape: [1, channels], name: `${name}_expand` })
      .apply(excited) as tf.SymbolicTensor;
    return tf.layers.multiply({ name: `${name}_scale` }).apply([x, broadcast]) as tf.SymbolicTensor;
  };

  const residualBlock = (
    x: tf.SymbolicTensor,
    channels: number,
    project: boolean,
    name: string,
  ): tf.SymbolicTensor => {
    let y = conv(channels, 7, `${name}_conv1`).apply(x) as tf.SymbolicTensor;
    y = new BatchNorm1d({ name: `${name}_bn1` }).apply(y) as tf.SymbolicTensor;
    y = tf.layers.reLU({ name: `${name}_relu1` }).apply(y) as tf.SymbolicTensor;
    y = conv(channels, 7, `${name}_conv2`).apply(y) as tf.SymbolicTensor;
    y = new BatchNorm1d({ name: `${name}_bn2` }).apply(y) as tf.SymbolicTensor;
    y = seBlock(y, channels, `${name}_se`);
    let shortcut = x;
    if (project) {
      shortcut = conv(channels, 1, `${name}_proj`).apply(x) as tf.SymbolicTensor;
      shortcut = new BatchNorm1d({ name: `${name}_proj_bn` }).apply(shortcut) as tf.SymbolicTensor;
    }
    const added = tf.layers.add({ name: `${name}_add` }).apply([y, shortcut]) as tf.SymbolicTensor;
    return tf.layers.reLU({ name: `${name}_out` }).apply(added) as tf.SymbolicTensor;
  };

  const input = tf.input({ shape: [spec.inputLength, 1], name: "sequence" });
  let x = conv(base, 7, "stem_conv").apply(input) as tf.SymbolicTensor;
  x = new BatchNorm1d({ name: "stem_bn" }).apply(x) as tf.SymbolicTensor;
  x = tf.layers.reLU({ name: "stem_relu" }).apply(x) as tf.SymbolicTensor;
  x = tf.layers
    .maxPooling1d({ poolSize: 2, strides: 2, name: "stem_pool" })
    .apply(x) as tf.SymbolicTensor;

  for (let stage = 0; stage < 4; stage++) {
    const channels = base * 2 ** stage;
    if (stage > 0) {
      x = tf.layers
        .maxPooling1d({ poolSize: 2, strides: 2, name: `stage${stage + 1}_pool` })
        .apply(x) as tf.SymbolicTensor;
    }
    x = residualBlock(x, channels, stage > 0, `stage${stage + 1}_block1`);
    x = residualBlock(x, channels, false, `stage${stage + 1}_block2`);
  }

  // The output of the final residual stage is the feature map that Grad-CAM
  // and the t-SNE embedding read; keep its layer name stable.
  const features = tf.layers.reLU({ name: "features" }).apply(x) as tf.SymbolicTensor;
  const pooled = tf.layers
    .globalAveragePooling1d({ name: "embedding" })
    .apply(features) as tf.SymbolicTensor;
  const logits = tf.layers
    .dense({ units: spec.numClasses, kernelInitializer: glorot(), name: "logits" })
    .apply(pooled) as tf.SymbolicTensor;
  return tf.model({ inputs: input, outputs: logits, name: "seresnet18_1d" });
}

/** Forward pass with an explicit input-length check (the layers engine's own
 * message buries the shape mismatch). */
export function forwardLogits(
  model: tf.LayersModel,
  xs: tf.Tensor3D,
  training = false,
): tf.Tensor2D {
  const expected = model.inputs[0].shape[1];
  if (xs.shape[1] !== expected) {
    throw new Error(`input length mismatch: model expects ${expected} samples, got ${xs.shape[1]}`);
  }
  return model.apply(xs, { training }) as tf.Tensor2D;
}

/** Batch of row-normalized class probabilities. */
export function softmaxProbs(logits: tf.Tensor2D): tf.Tensor2D {
  return tf.softmax(logits);
}
