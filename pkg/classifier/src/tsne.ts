import * as tf from "@tensorflow/tfjs";
import { Dataset } from "./data.js";
import { mulberry32 } from "./splits.js";

/** Per-sample feature vectors from the final convolutional stage, pooled
 * over time (the same vector the classification head consumes). */
export function extractEmbeddings(
  model: tf.LayersModel,
  ds: Dataset,
  batchSize = 16,
): number[][] {
  const embeddingModel = tf.model({
    inputs: model.inputs,
    outputs: model.getLayer("embedding").output as tf.SymbolicTensor,
  });
  const out: number[][] = [];
  for (let start = 0; start < ds.xs.length; start += batchSize) {
    const stop = Math.min(start + batchSize, ds.xs.length);
    const buf = new Float32Array((stop - start) * ds.seqLength);
    for (let i = start; i < stop; i++) {
      buf.set(ds.xs[i], (i - start) * ds.seqLength);
    }
    const rows = tf.tidy(() => {
      const xs = tf.tensor3d(buf, [stop - start, ds.seqLength, 1]);
      return (embeddingModel.apply(xs) as tf.Tensor2D).arraySync();
    });
    out.push(...rows);
  }
  return out;
}

export interface TsneOptions {
  perplexity?: number;
  iterations?: number;
  learningRate?: number;
  seed?: number;
}

function squaredDistances(X: number[][]): Float64Array {
  const n = X.length;
  const d2 = new Float64Array(n * n);
  for (let i = 0; i < n; i++) {
    for (let j = i + 1; j < n; j++) {
      let s = 0;
      const a = X[i];
      const b = X[j];
      for (let t = 0; t < a.length; t++) {
        const diff = a[t] - b[t];
        s += diff * diff;
      }
      d2[i * n + j] = s;
      d2[j * n + i] = s;
    }
  }
  return d2;
}

/** Row-wise conditional probabilities with the bandwidth of each row tuned
 * by bisection so its entropy matches log(perplexity). */
function affinities(d2: Float64Array, n: number, perplexity: number): Float64Array {
  const target = Math.log(perplexity);
  const p = new Float64Array(n * n);
  const row = new Float64Array(n);
  for (let i = 0; i < n; i++) {
    let betaLo = 0;
    let betaHi = Infinity;
    let beta = 1;
    for (let iter = 0; iter < 50; iter++) {
      let sum = 0;
      for (let j = 0; j < n; j++) {
        row[j] = j === i ? 0 : Math.exp(-d2[i * n + j] * beta);
        sum += row[j];
      }
      let entropy = 0;
      for (let j = 0; j < n; j++) {
        if (row[j] > 1e-12) {
          const q = row[j] / sum;
          entropy -= q * Math.log(q);
        }
      }
      if (Math.abs(entropy - target) < 1e-5) {
        break;
      }
      if (entropy > target) {
        betaLo = beta;
        beta = betaHi === Infinity ? beta * 2 : (beta + betaHi) / 2;
      } else {
        betaHi = beta;
        beta = (beta + betaLo) / 2;
      }
    }
    let sum = 0;
    for (let j = 0; j < n; j++) {
      row[j] = j === i ? 0 : Math.exp(-d2[i * n + j] * beta);
      sum += row[j];
    }
    for (let j = 0; j < n; j++) {
      p[i * n + j] = sum > 0 ? row[j] / sum : 0;
    }
  }
  // symmetrize
  const sym = new Float64Array(n * n);
  for (let i = 0; i < n; i++) {
    for (let j = 0; j < n; j++) {
      sym[i * n + j] = Math.max((p[i * n + j] + p[j * n + i]) / (2 * n), 1e-12);
    }
  }
  return sym;
}

/** Exact t-distributed stochastic neighbor embedding to 2D. Quadratic in the
 * number of samples, which is fine for the corpus sizes involved (a few
 * thousand at most). Deterministic under the seed. */
export function tsne(X: number[][], options: TsneOptions = {}): number[][] {
  const n = X.length;
  if (n === 0) {
    return [];
  }
  if (n === 1) {
    return [[0, 0]];
  }
  const perplexity = Math.min(options.perplexity ?? 15, (n - 1) / 3);
  const iterations = options.iterations ?? 400;
  const eta = options.learningRate ?? 100;
  const rand = mulberry32(options.seed ?? 0);

  const p = affinities(squaredDistances(X), n, Math.max(perplexity, 1.01));
  const y = new Float64Array(2 * n);
  for (let i = 0; i < 2 * n; i++) {
    y[i] = (rand() - 0.5) * 1e-2;
  }
  const velocity = new Float64Array(2 * n);
  const grad = new Float64Array(2 * n);
  const q = new Float64Array(n * n);

  for (let iter = 0; iter < iterations; iter++) {
    const exaggeration = iter < 100 ? 4 : 1;
    const momentum = iter < 250 ? 0.5 : 0.8;

    let qSum = 0;
    for (let i = 0; i < n; i++) {
      for (let j = i + 1; j < n; j++) {
        const dx = y[2 * i] - y[2 * j];
        const dy = y[2 * i + 1] - y[2 * j + 1];
        const w = 1 / (1 + dx * dx + dy * dy);
        q[i * n + j] = w;
        q[j * n + i] = w;
        qSum += 2 * w;
      }
    }

    grad.fill(0);
    for (let i = 0; i < n; i++) {
      for (let j = 0; j < n; j++) {
        if (i === j) {
          continue;
        }
        const w = q[i * n + j];
        const coeff = 4 * (exaggeration * p[i * n + j] - w / qSum) * w;
        grad[2 * i] += coeff * (y[2 * i] - y[2 * j]);
        grad[2 * i + 1] += coeff * (y[2 * i + 1] - y[2 * j + 1]);
      }
    }

    for (let i = 0; i < 2 * n; i++) {
      velocity[i] = momentum * velocity[i] - eta * grad[i];
      y[i] += velocity[i];
    }
  }

  const points: number[][] = [];
  for (let i = 0; i < n; i++) {
    points.push([y[2 * i], y[2 * i + 1]]);
  }
  return points;
}

/** Mean silhouette coefficient of 2D points under the given labels. */
export function silhouetteScore(points: number[][], labels: number[]): number {
  const n = points.length;
  if (n < 2) {
    throw new Error("silhouette needs at least 2 points");
  }
  const dist = (a: number[], b: number[]) => Math.hypot(a[0] - b[0], a[1] - b[1]);
  const classes = [...new Set(labels)];
  if (classes.length < 2) {
    throw new Error("silhouette needs at least 2 classes");
  }
  let total = 0;
  for (let i = 0; i < n; i++) {
    const own: number[] = [];
    const otherMeans = new Map<number, { sum: number; count: number }>();
    for (let j = 0; j < n; j++) {
      if (j === i) {
        continue;
      }
      const d = dist(points[i], points[j]);
      if (labels[j] === labels[i]) {
        own.push(d);
      } else {
        const agg = otherMeans.get(labels[j]) ?? { sum: 0, count: 0 };
        agg.sum += d;
        agg.count += 1;
        otherMeans.set(labels[j], agg);
      }
    }
    const a = own.length > 0 ? own.reduce((s, v) => s + v, 0) / own.length : 0;
    let b = Infinity;
    for (const agg of otherMeans.values()) {
      b = Math.min(b, agg.sum / agg.count);
    }
    total += own.length > 0 ? (b - a) / Math.max(a, b) : 0;
  }
  return total / n;
}
