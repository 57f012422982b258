import * as tf from "@tensorflow/tfjs";

// The wasm backend ships forward convolution kernels but not
// Conv2DBackpropFilter, so a conv layer cannot train on it out of the box.
// Both convolution gradients are themselves convolutions, though, so we
// re-register the Conv2D gradient with each side expressed as a native
// forward conv. This keeps training on the fast wasm kernels and works on
// the pure-JS backend as well. Only the case this model uses is supported:
// NHWC, filter height 1 (1D data laid out as [batch, 1, time, channels]),
// stride 1.

/** Gradient of the conv output with respect to its input: correlate the
 * incoming gradient with the kernel reversed in time and with the channel
 * axes swapped. The forward padding (padLeft, padRight) mirrors to
 * (k-1-padLeft, k-1-padRight) on the gradient; for odd kernels with same
 * padding that is again "same", which stays on the fastest kernel path. */
export function convInputGrad(
  dy: tf.Tensor4D,
  filter: tf.Tensor4D,
  pad: "same" | "valid",
): tf.Tensor4D {
  return tf.tidy(() => {
    const k = filter.shape[1];
    const flipped = tf.reverse(filter, 1).transpose([0, 1, 3, 2]) as tf.Tensor4D;
    const padLeft = pad === "same" ? Math.floor((k - 1) / 2) : 0;
    const padRight = pad === "same" ? k - 1 - padLeft : 0;
    if (pad === "same" && padLeft === padRight) {
      return tf.conv2d(dy, flipped, 1, "same");
    }
    const padded = tf.pad(dy, [
      [0, 0],
      [0, 0],
      [k - 1 - padLeft, k - 1 - padRight],
      [0, 0],
    ]) as tf.Tensor4D;
    return tf.conv2d(padded, flipped, 1, "valid");
  });
}

/** Gradient of the conv output with respect to the kernel. Moving batch and
 * time onto the contraction axes turns this into one forward convolution:
 * the padded input becomes a [cin, 1, time, batch] "image" and the incoming
 * gradient a [1, time, batch, cout] "kernel". */
export function convFilterGrad(
  x: tf.Tensor4D,
  dy: tf.Tensor4D,
  kernelSize: number,
  pad: "same" | "valid",
): tf.Tensor4D {
  return tf.tidy(() => {
    const [batch, , len, cin] = x.shape;
    const dyLen = dy.shape[2];
    const cout = dy.shape[3];
    const k = kernelSize;
    const padLeft = pad === "same" ? Math.floor((k - 1) / 2) : 0;
    const padRight = pad === "same" ? k - 1 - padLeft : 0;
    const paddedLen = len + padLeft + padRight;
    const xPad = tf.pad(x.reshape([batch, len, cin]), [
      [0, 0],
      [padLeft, padRight],
      [0, 0],
    ]);
    const xPerm = xPad.transpose([2, 1, 0]).reshape([cin, 1, paddedLen, batch]);
    const dyPerm = dy
      .reshape([batch, dyLen, cout])
      .transpose([1, 0, 2])
      .reshape([1, dyLen, batch, cout]);
    // valid correlation over time leaves exactly paddedLen - dyLen + 1 = k taps
    return tf
      .conv2d(xPerm as tf.Tensor4D, dyPerm as tf.Tensor4D, 1, "valid")
      .reshape([cin, k, cout])
      .transpose([1, 0, 2])
      .reshape([1, k, cin, cout]);
  });
}

let registered = false;

/** Replace the stock Conv2D gradient with the conv-expressed formulation.
 * Idempotent; called once during backend initialization. */
export function registerConvGradOverride(): void {
  if (registered) {
    return;
  }
  registered = true;
  // the second (override) argument is accepted at runtime but missing from
  // the type declarations
  const register = tf.registerGradient as unknown as (
    config: Parameters<typeof tf.registerGradient>[0],
    override?: boolean,
  ) => void;
  register(
    {
      kernelName: "Conv2D",
      inputsToSave: ["x", "filter"],
      gradFunc: (dy, saved, attrs) => {
        const [x, filter] = saved as [tf.Tensor4D, tf.Tensor4D];
        const a = attrs as unknown as {
          strides: number | [number, number];
          pad: "same" | "valid";
          dataFormat: string;
        };
        const strideW = Array.isArray(a.strides) ? a.strides[1] : a.strides;
        const strideH = Array.isArray(a.strides) ? a.strides[0] : a.strides;
        if (
          a.dataFormat !== "NHWC" ||
          x.shape[1] !== 1 ||
          filter.shape[0] !== 1 ||
          strideW !== 1 ||
          strideH !== 1
        ) {
          throw new Error(
            "conv gradient override supports NHWC height-1 stride-1 convolutions only " +
              `(got dataFormat=${a.dataFormat}, height=${x.shape[1]}, ` +
              `filterHeight=${filter.shape[0]}, strides=${JSON.stringify(a.strides)})`,
          );
        }
        const dy4 = dy as tf.Tensor4D;
        return {
          x: () => convInputGrad(dy4, filter, a.pad),
          filter: () => convFilterGrad(x, dy4, filter.shape[1], a.pad),
        };
      },
    },
    true,
  );
}
