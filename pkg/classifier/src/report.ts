import * as fs from "node:fs";
import * as path from "node:path";
import { EvalReport } from "./metrics.js";

/** Structured-text rendering of evaluation reports: one row per entry with
 * the metric columns accuracy, F1, sensitivity, specificity, AUC and mean
 * inference time per sample. */

export interface ReportRow {
  name: string;
  report: EvalReport;
}

const COLUMNS = [
  { header: "accuracy (%)", value: (r: EvalReport) => (100 * r.accuracy).toFixed(2) },
  { header: "F1", value: (r: EvalReport) => r.f1.toFixed(4) },
  { header: "sensitivity", value: (r: EvalReport) => r.sensitivity.toFixed(4) },
  { header: "specificity", value: (r: EvalReport) => r.specificity.toFixed(4) },
  { header: "AUC", value: (r: EvalReport) => r.auc.toFixed(4) },
  { header: "ms/sample", value: (r: EvalReport) => r.inferenceMsPerSample.toFixed(2) },
  { header: "n", value: (r: EvalReport) => String(r.n) },
];

export function formatReportTable(rows: ReportRow[]): string {
  const nameWidth = Math.max(4, ...rows.map((r) => r.name.length));
  const widths = COLUMNS.map((c) =>
    Math.max(c.header.length, ...rows.map((r) => c.value(r.report).length)),
  );
  const lines: string[] = [];
  lines.push(
    ["name".padEnd(nameWidth), ...COLUMNS.map((c, i) => c.header.padStart(widths[i]))].join("  "),
  );
  lines.push("-".repeat(nameWidth + widths.reduce((a, w) => a + w + 2, 0)));
  for (const row of rows) {
    lines.push(
      [
        row.name.padEnd(nameWidth),
        ...COLUMNS.map((c, i) => c.value(row.report).padStart(widths[i])),
      ].join("  "),
    );
  }
  return lines.join("\n");
}

export function writeReportFile(filePath: string, rows: ReportRow[]): void {
  fs.mkdirSync(path.dirname(filePath), { recursive: true });
  fs.writeFileSync(filePath, formatReportTable(rows) + "\n");
}
