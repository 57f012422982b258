import { beforeAll, describe, expect, it } from "vitest";
import * as tf from "@tensorflow/tfjs";
import { initBackend } from "../src/backend.js";
import { makeSeparableToy, subset } from "../src/data.js";
import { evaluateModel } from "../src/metrics.js";
import { buildClassifier } from "../src/model.js";
import { learningRateAt } from "../src/schedule.js";
import { mulberry32, stratifiedKFold } from "../src/splits.js";
import { DEFAULT_TRAIN_CONFIG, datasetLoss, trainClassifier } from "../src/train.js";

describe("training smoke", () => {
  beforeAll(async () => {
    await initBackend();
  });

  it("halves the loss and reaches F1 >= 0.95 on a separable toy within the CPU budget", async () => {
    const started = performance.now();

    // --- 1. data: 200 sequences of 12 x 500 samples, stratified 150/50 ---
    const seed = 7;
    const ds = makeSeparableToy(200, 500, seed);
    const folds = stratifiedKFold(ds.ys, 4, mulberry32(seed));
    const valSet = new Set(folds[0]);
    const trainIdx = ds.ys.map((_, i) => i).filter((i) => !valSet.has(i));
    const trainSet = subset(ds, trainIdx);
    const valFold = subset(ds, folds[0]);
    expect(trainSet.xs).toHaveLength(150);
    expect(valFold.xs).toHaveLength(50);

    // --- 2. untrained baseline loss (should sit near ln 2) ---
    const model = buildClassifier({
      inputLength: ds.seqLength,
      numClasses: 2,
      baseChannels: 8,
      seed,
    });
    const initialLoss = datasetLoss(model, trainSet, DEFAULT_TRAIN_CONFIG.smoothing);
    console.log(`untrained loss ${initialLoss.toFixed(4)}`);
    expect(initialLoss).toBeGreaterThan(0.4);
    expect(initialLoss).toBeLessThan(1.2);

    // --- 3. ten epochs of the standard recipe ---
    const cfg = { ...DEFAULT_TRAIN_CONFIG, epochs: 10, seed, logEvery: 1 };
    const result = await trainClassifier(model, trainSet, valFold, cfg);
    expect(result.history).toHaveLength(10);

    // --- 4. the smoke criteria ---
    const minLoss = Math.min(...result.history.map((h) => h.loss));
    console.log(
      `loss ${initialLoss.toFixed(4)} -> ${minLoss.toFixed(4)}, ` +
        `best F1 ${result.bestF1.toFixed(4)} at epoch ${result.bestEpoch}`,
    );
    expect(minLoss).toBeLessThanOrEqual(0.5 * initialLoss);
    expect(result.bestF1).toBeGreaterThanOrEqual(0.95);

    // the learning rate trace follows the schedule
    result.history.forEach((h, epoch) => {
      expect(h.epoch).toBe(epoch);
      expect(h.lr).toBeCloseTo(learningRateAt(epoch, cfg.schedule), 12);
    });

    // the restored best checkpoint scores well on the held-out fold
    const report = evaluateModel(model, valFold);
    expect(report.n).toBe(50);
    expect(report.accuracy).toBeGreaterThanOrEqual(0.95);
    expect(report.auc).toBeGreaterThanOrEqual(0.95);
    expect(report.inferenceMsPerSample).toBeGreaterThan(0);
    model.dispose();

    const elapsed = performance.now() - started;
    console.log(`smoke finished in ${(elapsed / 1000).toFixed(1)} s`);
    expect(elapsed).toBeLessThan(300_000);
  }, 400_000);

  it("reproduces the first-epoch loss under a fixed seed", async () => {
    const ds = makeSeparableToy(40, 100, 13);
    const folds = stratifiedKFold(ds.ys, 4, mulberry32(13));
    const valSet = new Set(folds[0]);
    const trainIdx = ds.ys.map((_, i) => i).filter((i) => !valSet.has(i));
    const cfg = { ...DEFAULT_TRAIN_CONFIG, epochs: 1, seed: 13, logEvery: 0 };

    const losses: number[] = [];
    let tensorsAfterFirst = 0;
    for (let run = 0; run < 2; run++) {
      const model = buildClassifier({
        inputLength: ds.seqLength,
        numClasses: 2,
        baseChannels: 4,
        seed: 13,
      });
      const result = await trainClassifier(model, subset(ds, trainIdx), subset(ds, folds[0]), cfg);
      losses.push(result.history[0].loss);
      model.dispose();
      if (run === 0) {
        tensorsAfterFirst = tf.memory().numTensors;
      }
    }
    expect(losses[1]).toBe(losses[0]);
    // training and disposal leave no tensors behind
    expect(tf.memory().numTensors).toBe(tensorsAfterFirst);
  }, 120_000);

  it("aborts with diagnostics when the loss diverges", async () => {
    const ds = makeSeparableToy(16, 20, 1);
    const model = buildClassifier({
      inputLength: ds.seqLength,
      numClasses: 2,
      baseChannels: 4,
      seed: 1,
    });
    // overflow the logits so the very first loss is non-finite
    const head = model.getLayer("logits");
    head.setWeights([tf.fill([32, 2], 1e38), tf.zeros([2])]);
    const cfg = { ...DEFAULT_TRAIN_CONFIG, epochs: 1, seed: 1, logEvery: 0 };
    await expect(trainClassifier(model, ds, ds, cfg)).rejects.toThrow(/non-finite loss/);
    model.dispose();
  }, 60_000);
});
