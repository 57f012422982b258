import { describe, expect, it } from "vitest";
import {
  UndefinedMetricError,
  accuracyOf,
  aucBinary,
  aucScore,
  confusionMatrix,
  f1Score,
  meanReport,
  reportFromPredictions,
  sensitivityScore,
  specificityScore,
} from "../src/metrics.js";

describe("confusion matrix", () => {
  it("counts true and predicted classes", () => {
    const cm = confusionMatrix([0, 0, 1, 1, 1], [0, 1, 1, 1, 0], 2);
    expect(cm).toEqual([
      [1, 1],
      [1, 2],
    ]);
    expect(accuracyOf(cm)).toBeCloseTo(3 / 5, 12);
  });

  it("rejects mismatched lengths", () => {
    expect(() => confusionMatrix([0, 1], [0], 2)).toThrow(/length mismatch/);
  });
});

describe("binary metrics with the positive class first", () => {
  it("scores a perfect predictor at one everywhere", () => {
    const yTrue = [0, 1, 0, 1, 1, 0];
    const probs = yTrue.map((y) => (y === 0 ? [0.9, 0.1] : [0.2, 0.8]));
    const report = reportFromPredictions(yTrue, yTrue, probs, 2, 1.5);
    expect(report.accuracy).toBe(1);
    expect(report.f1).toBe(1);
    expect(report.sensitivity).toBe(1);
    expect(report.specificity).toBe(1);
    expect(report.auc).toBe(1);
    expect(report.inferenceMsPerSample).toBe(1.5);
    expect(report.n).toBe(6);
  });

  it("exposes a majority-class predictor on an imbalanced cohort", () => {
    // 50 positives, 172 negatives, everything predicted negative
    const yTrue = [...Array(50).fill(0), ...Array(172).fill(1)];
    const yPred = Array(222).fill(1);
    expect(accuracyOf(confusionMatrix(yTrue, yPred, 2))).toBeCloseTo(172 / 222, 12);
    expect(sensitivityScore(yTrue, yPred, 2)).toBe(0);
    expect(specificityScore(yTrue, yPred, 2)).toBe(1);
    expect(f1Score(yTrue, yPred, 2)).toBe(0);
  });

  it("computes the rank-statistic AUC", () => {
    expect(aucBinary([false, false, true, true], [0.1, 0.4, 0.35, 0.8])).toBeCloseTo(0.75, 12);
    expect(aucBinary([true, false, true, false], [0.9, 0.1, 0.8, 0.2])).toBe(1);
    expect(aucBinary([true, false, true, false], [0.1, 0.9, 0.2, 0.8])).toBe(0);
  });

  it("resolves AUC ties with midranks", () => {
    expect(aucBinary([true, false, true, false], [0.5, 0.5, 0.5, 0.5])).toBeCloseTo(0.5, 12);
    expect(aucBinary([true, false, false], [0.7, 0.7, 0.1])).toBeCloseTo(0.75, 12);
  });

  it("declares AUC undefined on single-class folds", () => {
    expect(() => aucBinary([true, true], [0.5, 0.6])).toThrow(UndefinedMetricError);
    expect(() =>
      reportFromPredictions([0, 0], [0, 1], [[0.9, 0.1], [0.4, 0.6]], 2, 0),
    ).toThrow(UndefinedMetricError);
  });
});

describe("multi-class metrics", () => {
  it("macro-averages F1, sensitivity and specificity", () => {
    const yTrue = [0, 1, 2, 2];
    const yPred = [0, 2, 2, 2];
    // class 0: perfect (f1 1); class 1: never predicted (f1 0);
    // class 2: precision 2/3, recall 1 (f1 0.8)
    expect(f1Score(yTrue, yPred, 3)).toBeCloseTo((1 + 0 + 0.8) / 3, 12);
    expect(sensitivityScore(yTrue, yPred, 3)).toBeCloseTo((1 + 0 + 1) / 3, 12);
    // class 0: tn 3 fp 0; class 1: tn 3 fp 0; class 2: tn 1 fp 1
    expect(specificityScore(yTrue, yPred, 3)).toBeCloseTo((1 + 1 + 0.5) / 3, 12);
  });

  it("macro-averages one-vs-rest AUC", () => {
    const yTrue = [0, 1, 2];
    const probs = [
      [0.8, 0.1, 0.1],
      [0.1, 0.8, 0.1],
      [0.1, 0.1, 0.8],
    ];
    expect(aucScore(yTrue, probs, 3)).toBe(1);
  });
});

describe("report aggregation", () => {
  it("averages metrics and sums sample counts", () => {
    const a = { n: 10, accuracy: 0.8, f1: 0.6, sensitivity: 0.5, specificity: 0.9, auc: 0.7, inferenceMsPerSample: 2 };
    const b = { n: 20, accuracy: 1.0, f1: 1.0, sensitivity: 1.0, specificity: 1.0, auc: 0.9, inferenceMsPerSample: 4 };
    const mean = meanReport([a, b]);
    expect(mean.n).toBe(30);
    expect(mean.accuracy).toBeCloseTo(0.9, 12);
    expect(mean.f1).toBeCloseTo(0.8, 12);
    expect(mean.auc).toBeCloseTo(0.8, 12);
    expect(mean.inferenceMsPerSample).toBeCloseTo(3, 12);
  });
});
