import { EcgRecord, LEAD_ORDER, concatLeads } from "./records.js";
import { mulberry32 } from "./splits.js";

/** In-memory dataset: one concatenated sequence and one class index per
 * sample. */
export interface Dataset {
  xs: Float32Array[];
  ys: number[];
  classNames: string[];
  seqLength: number;
}

function gaussian(rand: () => number): number {
  // Box-Muller; rand() is uniform in [0, 1)
  const u = Math.max(rand(), 1e-12);
  const v = rand();
  return Math.sqrt(-2 * Math.log(u)) * Math.cos(2 * Math.PI * v);
}

/** Two synthetic classes that differ in dominant oscillation frequency, with
 * per-lead random phase and mild additive noise. Separable enough that a
 * small model reaches high F1 within a few epochs, which makes it a training
 * smoke oracle. Sequence length is 12 * tLead, mirroring the concatenated
 * 12-lead layout. */
export function makeSeparableToy(n: number, tLead: number, seed = 0): Dataset {
  const rand = mulberry32(seed);
  const seqLength = LEAD_ORDER.length * tLead;
  const xs: Float32Array[] = [];
  const ys: number[] = [];
  const cycles = [3, 9]; // oscillations per lead segment, by class
  for (let s = 0; s < n; s++) {
    const label = s % 2;
    const amp = 0.8 + 0.4 * rand();
    const x = new Float32Array(seqLength);
    for (let lead = 0; lead < LEAD_ORDER.length; lead++) {
      const phase = 2 * Math.PI * rand();
      const omega = (2 * Math.PI * cycles[label]) / tLead;
      const offset = lead * tLead;
      for (let i = 0; i < tLead; i++) {
        x[offset + i] = amp * Math.sin(omega * i + phase) + 0.3 * gaussian(rand);
      }
    }
    xs.push(x);
    ys.push(label);
  }
  return { xs, ys, classNames: ["class_a", "class_b"], seqLength };
}

/** Dataset view of records restricted to the given class names; records with
 * other labels are skipped. */
export function datasetFromRecords(
  records: EcgRecord[],
  classNames: string[],
  classOfLabel: (label: string) => string | null,
  tLead: number,
): Dataset {
  const classIndex = new Map(classNames.map((name, i) => [name, i]));
  const xs: Float32Array[] = [];
  const ys: number[] = [];
  for (const record of records) {
    if (record.classLabel === null) {
      continue;
    }
    const cls = classOfLabel(record.classLabel);
    if (cls === null || !classIndex.has(cls)) {
      continue;
    }
    xs.push(concatLeads(record, tLead));
    ys.push(classIndex.get(cls)!);
  }
  return { xs, ys, classNames, seqLength: LEAD_ORDER.length * tLead };
}

/** Subset of a dataset by sample indices. */
export function subset(ds: Dataset, indices: number[]): Dataset {
  return {
    xs: indices.map((i) => ds.xs[i]),
    ys: indices.map((i) => ds.ys[i]),
    classNames: ds.classNames,
    seqLength: ds.seqLength,
  };
}
