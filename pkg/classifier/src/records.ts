import * as fs from "node:fs";
import * as path from "node:path";

/** Reader for digitized ECG record files (schema "diecg-record/1"): one JSON
 * object per record holding twelve leads of calibrated samples in
 * millivolts at a common sampling rate. */

export const LEAD_ORDER = [
  "I",
  "II",
  "III",
  "aVR",
  "aVL",
  "aVF",
  "V1",
  "V2",
  "V3",
  "V4",
  "V5",
  "V6",
] as const;

export const RECORD_SCHEMA = "diecg-record/1";

export class RecordFormatError extends Error {}

export interface EcgRecord {
  recordId: string;
  fsHz: number;
  classLabel: string | null;
  leads: Map<string, Float64Array>;
}

export function readRecordFile(filePath: string): EcgRecord {
  let parsed: unknown;
  try {
    parsed = JSON.parse(fs.readFileSync(filePath, "utf8"));
  } catch (err) {
    throw new RecordFormatError(`${filePath}: not valid JSON (${err})`);
  }
  const obj = parsed as Record<string, unknown>;
  if (obj === null || typeof obj !== "object" || obj["schema"] !== RECORD_SCHEMA) {
    throw new RecordFormatError(
      `${filePath}: expected schema "${RECORD_SCHEMA}", got ${JSON.stringify(obj?.["schema"])}`,
    );
  }
  const fsHz = obj["fs_hz"];
  if (typeof fsHz !== "number" || !(fsHz > 0)) {
    throw new RecordFormatError(`${filePath}: fs_hz must be a positive number`);
  }
  const rawLeads = obj["leads"] as Record<string, unknown>;
  if (rawLeads === null || typeof rawLeads !== "object") {
    throw new RecordFormatError(`${filePath}: missing leads object`);
  }
  const leads = new Map<string, Float64Array>();
  for (const name of LEAD_ORDER) {
    const samples = rawLeads[name];
    if (!Array.isArray(samples) || samples.length === 0) {
      throw new RecordFormatError(`${filePath}: lead ${name} missing or empty`);
    }
    const arr = new Float64Array(samples.length);
    for (let i = 0; i < samples.length; i++) {
      const v = samples[i];
      if (typeof v !== "number" || !Number.isFinite(v)) {
        throw new RecordFormatError(`${filePath}: lead ${name} sample ${i} is not finite`);
      }
      arr[i] = v;
    }
    leads.set(name, arr);
  }
  const label = obj["class_label"];
  return {
    recordId: typeof obj["record_id"] === "string" ? obj["record_id"] : path.parse(filePath).name,
    fsHz,
    classLabel: typeof label === "string" ? label : null,
    leads,
  };
}

/** All record files in a directory, sorted by filename. */
export function loadRecordDir(dir: string): EcgRecord[] {
  const files = fs
    .readdirSync(dir)
    .filter((f) => f.endsWith(".json"))
    .sort();
  if (files.length === 0) {
    throw new RecordFormatError(`no .json record files in ${dir}`);
  }
  return files.map((f) => readRecordFile(path.join(dir, f)));
}

/** Classifier input: the twelve leads z-scored independently, fitted to
 * `tLead` samples each (truncate or zero-pad at the tail), and concatenated
 * in canonical lead order. Normalizing before padding makes pad samples
 * coincide with the lead's post-normalization mean. Nearly constant leads
 * (sigma below 1e-6) normalize to zeros. */
export function concatLeads(record: EcgRecord, tLead: number): Float32Array {
  if (!(Number.isInteger(tLead) && tLead > 0)) {
    throw new RecordFormatError(`tLead must be a positive integer, got ${tLead}`);
  }
  const out = new Float32Array(LEAD_ORDER.length * tLead);
  LEAD_ORDER.forEach((name, leadIdx) => {
    const samples = record.leads.get(name)!;
    let mean = 0;
    for (let i = 0; i < samples.length; i++) {
      mean += samples[i];
    }
    mean /= samples.length;
    let varSum = 0;
    for (let i = 0; i < samples.length; i++) {
      const d = samples[i] - mean;
      varSum += d * d;
    }
    const sigma = Math.sqrt(varSum / samples.length);
    const n = Math.min(tLead, samples.length);
    const offset = leadIdx * tLead;
    if (sigma > 1e-6) {
      for (let i = 0; i < n; i++) {
        out[offset + i] = (samples[i] - mean) / sigma;
      }
    }
    // remaining positions stay zero (both the flat-lead and the pad case)
  });
  return out;
}
