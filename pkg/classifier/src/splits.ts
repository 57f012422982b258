/** Nested stratified cross-validation splits, deterministic under a seed. */

export class SplitError extends Error {}

/** Small deterministic PRNG (mulberry32); good enough for shuffling and
 * keeps split construction reproducible across platforms. */
export function mulberry32(seed: number): () => number {
  let state = seed >>> 0;
  return () => {
    state = (state + 0x6d2b79f5) >>> 0;
    let t = state;
    t = Math.imul(t ^ (t >>> 15), t | 1);
    t ^= t + Math.imul(t ^ (t >>> 7), t | 61);
    return ((t ^ (t >>> 14)) >>> 0) / 4294967296;
  };
}

function shuffledCopy<T>(items: T[], rand: () => number): T[] {
  const out = items.slice();
  for (let i = out.length - 1; i > 0; i--) {
    const j = Math.floor(rand() * (i + 1));
    [out[i], out[j]] = [out[j], out[i]];
  }
  return out;
}

/** Partition sample indices into k folds so that every class is spread as
 * evenly as possible: per class, fold counts differ by at most one. */
export function stratifiedKFold(y: number[], k: number, rand: () => number): number[][] {
  if (k < 2) {
    throw new SplitError(`need at least 2 folds, got ${k}`);
  }
  const byClass = new Map<number, number[]>();
  y.forEach((label, idx) => {
    const bucket = byClass.get(label);
    if (bucket) {
      bucket.push(idx);
    } else {
      byClass.set(label, [idx]);
    }
  });
  for (const [label, indices] of byClass) {
    if (indices.length < k) {
      throw new SplitError(
        `class ${label} has ${indices.length} samples, fewer than ${k} folds`,
      );
    }
  }
  const folds: number[][] = Array.from({ length: k }, () => []);
  // Deal each class round-robin from a rotating start so small classes do
  // not always overfill fold 0.
  let offset = 0;
  for (const label of [...byClass.keys()].sort((a, b) => a - b)) {
    const indices = shuffledCopy(byClass.get(label)!, rand);
    indices.forEach((idx, i) => folds[(i + offset) % k].push(idx));
    offset = (offset + indices.length) % k;
  }
  return folds.map((fold) => fold.sort((a, b) => a - b));
}

export interface InnerSplit {
  train: number[];
  val: number[];
}

export interface OuterSplit {
  test: number[];
  inner: InnerSplit[];
}

export interface CvPlan {
  outerFolds: number;
  innerFolds: number;
}

export const DEFAULT_CV_PLAN: CvPlan = { outerFolds: 5, innerFolds: 4 };

/** Outer stratified folds for testing; within each outer fold's remainder,
 * inner stratified folds for model selection. */
export function buildNestedSplits(
  y: number[],
  plan: CvPlan = DEFAULT_CV_PLAN,
  seed = 0,
): OuterSplit[] {
  const rand = mulberry32(seed);
  const outer = stratifiedKFold(y, plan.outerFolds, rand);
  return outer.map((test) => {
    const testSet = new Set(test);
    const rest: number[] = [];
    for (let i = 0; i < y.length; i++) {
      if (!testSet.has(i)) {
        rest.push(i);
      }
    }
    const innerFolds = stratifiedKFold(
      rest.map((i) => y[i]),
      plan.innerFolds,
      rand,
    );
    const inner = innerFolds.map((positions) => {
      const val = positions.map((p) => rest[p]);
      const valSet = new Set(val);
      const train = rest.filter((i) => !valSet.has(i));
      return { train, val };
    });
    return { test, inner };
  });
}

/** Classification tasks over record class labels. The first entry is the
 * positive class for binary metrics. "Others" merges the MI, RMI and
 * Abnormal labels into one class. */
export const TASKS: Record<string, { className: string; labels: string[] }[]> = {
  "covid-vs-normal": [
    { className: "COVID-19", labels: ["COVID-19"] },
    { className: "Normal", labels: ["Normal"] },
  ],
  "covid-vs-others": [
    { className: "COVID-19", labels: ["COVID-19"] },
    { className: "Others", labels: ["MI", "RMI", "Abnormal"] },
  ],
  "covid-vs-normal-vs-others": [
    { className: "COVID-19", labels: ["COVID-19"] },
    { className: "Normal", labels: ["Normal"] },
    { className: "Others", labels: ["MI", "RMI", "Abnormal"] },
  ],
};

export interface TaskTargets {
  /** positions into the original label array, in original order */
  indices: number[];
  /** class index per kept sample */
  y: number[];
  classNames: string[];
}

/** Map raw record labels onto a task's classes, dropping records whose label
 * is outside the task. */
export function taskTargets(labels: (string | null)[], task: string): TaskTargets {
  const classes = TASKS[task];
  if (!classes) {
    throw new SplitError(`unknown task "${task}" (known: ${Object.keys(TASKS).join(", ")})`);
  }
  const lookup = new Map<string, number>();
  classes.forEach((cls, idx) => cls.labels.forEach((label) => lookup.set(label, idx)));
  const indices: number[] = [];
  const y: number[] = [];
  labels.forEach((label, i) => {
    if (label !== null && lookup.has(label)) {
      indices.push(i);
      y.push(lookup.get(label)!);
    }
  });
  return { indices, y, classNames: classes.map((c) => c.className) };
}
