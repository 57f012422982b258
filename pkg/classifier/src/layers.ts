import * as tf from "@tensorflow/tfjs";

/** Batch normalization over (batch, time) for [batch, time, channels]
 * tensors, written with plain ops. The stock layer's backward pass leans on
 * Tile kernels that are slow on the wasm backend; expressing the forward
 * pass as mean/sub/square/rsqrt lets autodiff produce cheap reductions
 * instead. Training mode uses batch moments and updates moving statistics;
 * inference mode uses the moving statistics. */
export class BatchNorm1d extends tf.layers.Layer {
  static className = "BatchNorm1d";

  private momentum: number;
  private epsilon: number;
  private gamma!: tf.LayerVariable;
  private beta!: tf.LayerVariable;
  private movingMean!: tf.LayerVariable;
  private movingVar!: tf.LayerVariable;

  constructor(config: { momentum?: number; epsilon?: number; name?: string } = {}) {
    super({ name: config.name });
    this.momentum = config.momentum ?? 0.9;
    this.epsilon = config.epsilon ?? 1e-3;
  }

  override build(inputShape: tf.Shape | tf.Shape[]): void {
    const shape = (Array.isArray(inputShape[0]) ? inputShape[0] : inputShape) as tf.Shape;
    const channels = shape[2] as number;
    this.gamma = this.addWeight("gamma", [channels], "float32", tf.initializers.ones());
    this.beta = this.addWeight("beta", [channels], "float32", tf.initializers.zeros());
    this.movingMean = this.addWeight(
      "moving_mean",
      [channels],
      "float32",
      tf.initializers.zeros(),
      undefined,
      false,
    );
    this.movingVar = this.addWeight(
      "moving_var",
      [channels],
      "float32",
      tf.initializers.ones(),
      undefined,
      false,
    );
    this.built = true;
  }

  override computeOutputShape(inputShape: tf.Shape | tf.Shape[]): tf.Shape {
    return (Array.isArray(inputShape[0]) ? inputShape[0] : inputShape) as tf.Shape;
  }

  override call(inputs: tf.Tensor | tf.Tensor[], kwargs: { training?: boolean }): tf.Tensor {
    const x = (Array.isArray(inputs) ? inputs[0] : inputs) as tf.Tensor3D;
    if (!kwargs || !kwargs.training) {
      return tf.tidy(() =>
        x
          .sub(this.movingMean.read())
          .mul(tf.rsqrt(this.movingVar.read().add(this.epsilon)))
          .mul(this.gamma.read())
          .add(this.beta.read()),
      );
    }
    const [out, batchMean, batchVar] = tf.tidy(() => {
      const m = x.mean([0, 1]);
      const centered = x.sub(m);
      const v = centered.square().mean([0, 1]);
      const y = centered
        .mul(tf.rsqrt(v.add(this.epsilon)))
        .mul(this.gamma.read())
        .add(this.beta.read());
      return [y, m, v];
    });
    const mm = this.momentum;
    const newMean = tf.tidy(() => this.movingMean.read().mul(mm).add(batchMean.mul(1 - mm)));
    const newVar = tf.tidy(() => this.movingVar.read().mul(mm).add(batchVar.mul(1 - mm)));
    this.movingMean.write(newMean);
    this.movingVar.write(newVar);
    newMean.dispose();
    newVar.dispose();
    batchMean.dispose();
    batchVar.dispose();
    return out;
  }

  override getConfig(): tf.serialization.ConfigDict {
    const config = super.getConfig();
    config["momentum"] = this.momentum;
    config["epsilon"] = this.epsilon;
    return config;
  }
}

tf.serialization.registerClass(BatchNorm1d);
