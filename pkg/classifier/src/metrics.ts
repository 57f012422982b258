import * as tf from "@tensorflow/tfjs";
import { Dataset } from "./data.js";
import { forwardLogits } from "./model.js";

/** Raised when a metric has no defined value on the given fold, e.g. AUC on
 * a single-class test set. */
export class UndefinedMetricError extends Error {}

export function confusionMatrix(yTrue: number[], yPred: number[], k: number): number[][] {
  if (yTrue.length !== yPred.length) {
    throw new Error(`length mismatch: ${yTrue.length} labels vs ${yPred.length} predictions`);
  }
  const cm = Array.from({ length: k }, () => new Array<number>(k).fill(0));
  for (let i = 0; i < yTrue.length; i++) {
    cm[yTrue[i]][yPred[i]] += 1;
  }
  return cm;
}

export function accuracyOf(cm: number[][]): number {
  let correct = 0;
  let total = 0;
  cm.forEach((row, i) => {
    row.forEach((v, j) => {
      total += v;
      if (i === j) {
        correct += v;
      }
    });
  });
  return total === 0 ? 0 : correct / total;
}

function recallOf(cm: number[][], c: number): number {
  const tp = cm[c][c];
  const fn = cm[c].reduce((a, b) => a + b, 0) - tp;
  return tp + fn === 0 ? 0 : tp / (tp + fn);
}

function precisionOf(cm: number[][], c: number): number {
  const tp = cm[c][c];
  let fp = 0;
  for (let i = 0; i < cm.length; i++) {
    if (i !== c) {
      fp += cm[i][c];
    }
  }
  return tp + fp === 0 ? 0 : tp / (tp + fp);
}

function f1Of(cm: number[][], c: number): number {
  const p = precisionOf(cm, c);
  const r = recallOf(cm, c);
  return p + r === 0 ? 0 : (2 * p * r) / (p + r);
}

function specificityOf(cm: number[][], c: number): number {
  let tn = 0;
  let fp = 0;
  for (let i = 0; i < cm.length; i++) {
    for (let j = 0; j < cm.length; j++) {
      if (i !== c && j !== c) {
        tn += cm[i][j];
      }
      if (i !== c && j === c) {
        fp += cm[i][j];
      }
    }
  }
  return tn + fp === 0 ? 0 : tn / (tn + fp);
}

const POSITIVE = 0; // binary tasks put the positive class first

/** F1 of the positive class for binary problems, macro-averaged otherwise. */
export function f1Score(yTrue: number[], yPred: number[], k: number): number {
  const cm = confusionMatrix(yTrue, yPred, k);
  if (k === 2) {
    return f1Of(cm, POSITIVE);
  }
  let sum = 0;
  for (let c = 0; c < k; c++) {
    sum += f1Of(cm, c);
  }
  return sum / k;
}

export function sensitivityScore(yTrue: number[], yPred: number[], k: number): number {
  const cm = confusionMatrix(yTrue, yPred, k);
  if (k === 2) {
    return recallOf(cm, POSITIVE);
  }
  let sum = 0;
  for (let c = 0; c < k; c++) {
    sum += recallOf(cm, c);
  }
  return sum / k;
}

export function specificityScore(yTrue: number[], yPred: number[], k: number): number {
  const cm = confusionMatrix(yTrue, yPred, k);
  if (k === 2) {
    return specificityOf(cm, POSITIVE);
  }
  let sum = 0;
  for (let c = 0; c < k; c++) {
    sum += specificityOf(cm, c);
  }
  return sum / k;
}

/** Area under the ROC curve via the rank statistic (midranks for ties). */
export function aucBinary(isPositive: boolean[], scores: number[]): number {
  const nPos = isPositive.filter(Boolean).length;
  const nNeg = isPositive.length - nPos;
  if (nPos === 0 || nNeg === 0) {
    throw new UndefinedMetricError(
      `AUC is undefined: fold has ${nPos} positive and ${nNeg} negative samples`,
    );
  }
  const order = scores.map((s, i) => i).sort((a, b) => scores[a] - scores[b]);
  const ranks = new Array<number>(scores.length);
  let i = 0;
  while (i < order.length) {
    let j = i;
    while (j + 1 < order.length && scores[order[j + 1]] === scores[order[i]]) {
      j++;
    }
    const midrank = (i + j) / 2 + 1;
    for (let t = i; t <= j; t++) {
      ranks[order[t]] = midrank;
    }
    i = j + 1;
  }
  let posRankSum = 0;
  isPositive.forEach((pos, idx) => {
    if (pos) {
      posRankSum += ranks[idx];
    }
  });
  return (posRankSum - (nPos * (nPos + 1)) / 2) / (nPos * nNeg);
}

/** Multi-class AUC: one-vs-rest per class, macro-averaged. */
export function aucScore(yTrue: number[], probs: number[][], k: number): number {
  if (k === 2) {
    return aucBinary(
      yTrue.map((y) => y === POSITIVE),
      probs.map((p) => p[POSITIVE]),
    );
  }
  let sum = 0;
  for (let c = 0; c < k; c++) {
    sum += aucBinary(
      yTrue.map((y) => y === c),
      probs.map((p) => p[c]),
    );
  }
  return sum / k;
}

export interface EvalReport {
  n: number;
  accuracy: number;
  f1: number;
  sensitivity: number;
  specificity: number;
  auc: number;
  inferenceMsPerSample: number;
}

export function reportFromPredictions(
  yTrue: number[],
  yPred: number[],
  probs: number[][],
  k: number,
  inferenceMsPerSample: number,
): EvalReport {
  const cm = confusionMatrix(yTrue, yPred, k);
  return {
    n: yTrue.length,
    accuracy: accuracyOf(cm),
    f1: f1Score(yTrue, yPred, k),
    sensitivity: sensitivityScore(yTrue, yPred, k),
    specificity: specificityScore(yTrue, yPred, k),
    auc: aucScore(yTrue, probs, k),
    inferenceMsPerSample,
  };
}

/** Batched predictions over a dataset. Returns class indices, row
 * probabilities, and forward wall-clock divided by sample count (the
 * reported per-sample inference time). */
export function predictDataset(
  model: tf.LayersModel,
  ds: Dataset,
  batchSize = 16,
): { yPred: number[]; probs: number[][]; inferenceMsPerSample: number } {
  const yPred: number[] = [];
  const probs: number[][] = [];
  let elapsed = 0;
  for (let start = 0; start < ds.xs.length; start += batchSize) {
    const stop = Math.min(start + batchSize, ds.xs.length);
    const buf = new Float32Array((stop - start) * ds.seqLength);
    for (let i = start; i < stop; i++) {
      buf.set(ds.xs[i], (i - start) * ds.seqLength);
    }
    const t0 = performance.now();
    const batchProbs = tf.tidy(() => {
      const xs = tf.tensor3d(buf, [stop - start, ds.seqLength, 1]);
      return tf.softmax(forwardLogits(model, xs)).arraySync() as number[][];
    });
    elapsed += performance.now() - t0;
    for (const row of batchProbs) {
      probs.push(row);
      yPred.push(row.indexOf(Math.max(...row)));
    }
  }
  return { yPred, probs, inferenceMsPerSample: elapsed / Math.max(1, ds.xs.length) };
}

/** Full evaluation of a trained model on a test dataset. */
export function evaluateModel(model: tf.LayersModel, ds: Dataset): EvalReport {
  const k = ds.classNames.length;
  const { yPred, probs, inferenceMsPerSample } = predictDataset(model, ds);
  return reportFromPredictions(ds.ys, yPred, probs, k, inferenceMsPerSample);
}

export function meanReport(reports: EvalReport[]): EvalReport {
  const n = reports.length;
  const mean = (f: (r: EvalReport) => number) => reports.reduce((a, r) => a + f(r), 0) / n;
  return {
    n: reports.reduce((a, r) => a + r.n, 0),
    accuracy: mean((r) => r.accuracy),
    f1: mean((r) => r.f1),
    sensitivity: mean((r) => r.sensitivity),
    specificity: mean((r) => r.specificity),
    auc: mean((r) => r.auc),
    inferenceMsPerSample: mean((r) => r.inferenceMsPerSample),
  };
}
