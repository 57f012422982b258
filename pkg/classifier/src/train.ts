import * as tf from "@tensorflow/tfjs";
import { Dataset } from "./data.js";
import { smoothedCrossEntropy } from "./loss.js";
import { f1Score } from "./metrics.js";
import { predictDataset } from "./metrics.js";
import { forwardLogits } from "./model.js";
import { DEFAULT_SCHEDULE, ScheduleConfig, learningRateAt } from "./schedule.js";
import { mulberry32 } from "./splits.js";

export interface TrainConfig {
  epochs: number;
  batchSize: number;
  beta1: number;
  beta2: number;
  smoothing: number;
  schedule: ScheduleConfig;
  seed: number;
  /** print a progress line every n epochs; 0 silences logging */
  logEvery: number;
}

export const DEFAULT_TRAIN_CONFIG: TrainConfig = {
  epochs: 110,
  batchSize: 16,
  beta1: 0.9,
  beta2: 0.999,
  smoothing: 0.1,
  schedule: DEFAULT_SCHEDULE,
  seed: 0,
  logEvery: 10,
};

export interface EpochStats {
  epoch: number;
  lr: number;
  loss: number;
  valF1: number;
}

export interface TrainResult {
  bestF1: number;
  bestEpoch: number;
  history: EpochStats[];
}

function batchTensor(ds: Dataset, indices: number[]): { xs: tf.Tensor3D; ys: tf.Tensor2D } {
  const k = ds.classNames.length;
  const buf = new Float32Array(indices.length * ds.seqLength);
  const labels = new Float32Array(indices.length * k);
  indices.forEach((idx, row) => {
    buf.set(ds.xs[idx], row * ds.seqLength);
    labels[row * k + ds.ys[idx]] = 1;
  });
  return {
    xs: tf.tensor3d(buf, [indices.length, ds.seqLength, 1]),
    ys: tf.tensor2d(labels, [indices.length, k]),
  };
}

/** Mean smoothed cross-entropy over a dataset without any weight update.
 * Useful as the pre-training baseline when checking that optimization makes
 * progress. Runs the forward pass in inference mode so the model is left
 * untouched. */
export function datasetLoss(
  model: tf.LayersModel,
  ds: Dataset,
  smoothing: number,
  batchSize = 16,
): number {
  let weighted = 0;
  const all = ds.xs.map((_, i) => i);
  for (let start = 0; start < all.length; start += batchSize) {
    const indices = all.slice(start, start + batchSize);
    const { xs, ys } = batchTensor(ds, indices);
    const loss = tf.tidy(() => smoothedCrossEntropy(forwardLogits(model, xs), ys, smoothing));
    weighted += loss.dataSync()[0] * indices.length;
    loss.dispose();
    xs.dispose();
    ys.dispose();
  }
  return weighted / all.length;
}

/** Train with adaptive moment estimation under the cosine-annealing schedule
 * and label-smoothing cross-entropy, evaluating F1 on the validation fold
 * after every epoch. The weights giving the best validation F1 are restored
 * into the model before returning. A non-finite training loss aborts with
 * diagnostics. */
export async function trainClassifier(
  model: tf.LayersModel,
  trainSet: Dataset,
  valSet: Dataset,
  cfg: TrainConfig = DEFAULT_TRAIN_CONFIG,
): Promise<TrainResult> {
  const optimizer = tf.train.adam(cfg.schedule.baseLr, cfg.beta1, cfg.beta2);
  const rand = mulberry32(cfg.seed ^ 0x5eed);
  const k = trainSet.classNames.length;
  const history: EpochStats[] = [];
  let bestF1 = -1;
  let bestEpoch = -1;
  let bestWeights: tf.Tensor[] | null = null;

  const order = trainSet.xs.map((_, i) => i);
  try {
    for (let epoch = 0; epoch < cfg.epochs; epoch++) {
      const lr = learningRateAt(epoch, cfg.schedule);
      (optimizer as tf.AdamOptimizer & { learningRate: number }).learningRate = lr;

      for (let i = order.length - 1; i > 0; i--) {
        const j = Math.floor(rand() * (i + 1));
        [order[i], order[j]] = [order[j], order[i]];
      }

      let lossSum = 0;
      let batches = 0;
      for (let start = 0; start < order.length; start += cfg.batchSize) {
        const indices = order.slice(start, start + cfg.batchSize);
        const { xs, ys } = batchTensor(trainSet, indices);
        const lossTensor = optimizer.minimize(
          () => smoothedCrossEntropy(forwardLogits(model, xs, true), ys, cfg.smoothing),
          true,
        ) as tf.Scalar;
        const loss = lossTensor.dataSync()[0];
        lossTensor.dispose();
        xs.dispose();
        ys.dispose();
        if (!Number.isFinite(loss)) {
          throw new Error(
            `training aborted: non-finite loss ${loss} at epoch ${epoch}, ` +
              `batch ${batches} (lr=${lr.toExponential(3)})`,
          );
        }
        lossSum += loss;
        batches += 1;
      }

      const { yPred } = predictDataset(model, valSet, cfg.batchSize);
      const valF1 = f1Score(valSet.ys, yPred, k);
      const meanLoss = lossSum / batches;
      history.push({ epoch, lr, loss: meanLoss, valF1 });
      if (valF1 > bestF1) {
        bestF1 = valF1;
        bestEpoch = epoch;
        if (bestWeights) {
          bestWeights.forEach((w) => w.dispose());
        }
        bestWeights = model.getWeights().map((w) => w.clone());
      }
      if (cfg.logEvery > 0 && (epoch % cfg.logEvery === 0 || epoch === cfg.epochs - 1)) {
        console.log(
          `epoch ${String(epoch).padStart(3)}  lr ${lr.toExponential(2)}  ` +
            `loss ${meanLoss.toFixed(4)}  val F1 ${valF1.toFixed(4)}`,
        );
      }
      await tf.nextFrame();
    }

    if (bestWeights) {
      model.setWeights(bestWeights);
    }
    return { bestF1, bestEpoch, history };
  } finally {
    if (bestWeights) {
      bestWeights.forEach((w) => w.dispose());
    }
    optimizer.dispose();
  }
}
