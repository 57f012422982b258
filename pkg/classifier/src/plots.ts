import * as fs from "node:fs";
import * as path from "node:path";

/** Self-contained SVG plot writers for the explainability outputs. */

const PALETTE = ["#d62728", "#1f77b4", "#2ca02c", "#9467bd", "#ff7f0e"];

function ensureDir(filePath: string): void {
  fs.mkdirSync(path.dirname(filePath), { recursive: true });
}

/** Class-colored scatter of 2D embedding points. */
export function writeScatterSvg(
  filePath: string,
  points: number[][],
  labels: number[],
  classNames: string[],
  title = "",
): void {
  const width = 640;
  const height = 480;
  const margin = 48;
  const xs = points.map((p) => p[0]);
  const ys = points.map((p) => p[1]);
  const xMin = Math.min(...xs);
  const xMax = Math.max(...xs);
  const yMin = Math.min(...ys);
  const yMax = Math.max(...ys);
  const sx = (x: number) =>
    margin + ((x - xMin) / Math.max(xMax - xMin, 1e-12)) * (width - 2 * margin);
  const sy = (y: number) =>
    height - margin - ((y - yMin) / Math.max(yMax - yMin, 1e-12)) * (height - 2 * margin);

  const parts: string[] = [];
  parts.push(
    `<svg xmlns="http://www.w3.org/2000/svg" width="${width}" height="${height}" viewBox="0 0 ${width} ${height}">`,
  );
  parts.push(`<rect width="${width}" height="${height}" fill="white"/>`);
  if (title) {
    parts.push(
      `<text x="${width / 2}" y="24" text-anchor="middle" font-family="sans-serif" font-size="15">${title}</text>`,
    );
  }
  points.forEach((p, i) => {
    const color = PALETTE[labels[i] % PALETTE.length];
    parts.push(`<circle cx="${sx(p[0]).toFixed(1)}" cy="${sy(p[1]).toFixed(1)}" r="3.5" fill="${color}" fill-opacity="0.75"/>`);
  });
  classNames.forEach((name, c) => {
    const y = margin + 16 * c;
    parts.push(`<circle cx="${width - margin - 90}" cy="${y}" r="4" fill="${PALETTE[c % PALETTE.length]}"/>`);
    parts.push(
      `<text x="${width - margin - 80}" y="${y + 4}" font-family="sans-serif" font-size="12">${name}</text>`,
    );
  });
  parts.push("</svg>");
  ensureDir(filePath);
  fs.writeFileSync(filePath, parts.join("\n"));
}

/** Signal trace with the importance map rendered as a heat band behind it:
 * darker red marks segments the classifier weighs more heavily. */
export function writeImportanceSvg(
  filePath: string,
  signal: Float32Array | number[],
  importance: Float32Array | number[],
  title = "",
): void {
  const width = 960;
  const height = 280;
  const margin = 36;
  const n = signal.length;
  const innerW = width - 2 * margin;
  const innerH = height - 2 * margin;
  let sMin = Infinity;
  let sMax = -Infinity;
  let wMax = 0;
  for (let i = 0; i < n; i++) {
    sMin = Math.min(sMin, signal[i] as number);
    sMax = Math.max(sMax, signal[i] as number);
    wMax = Math.max(wMax, importance[i] as number);
  }
  const sx = (i: number) => margin + (i / Math.max(n - 1, 1)) * innerW;
  const sy = (v: number) =>
    height - margin - ((v - sMin) / Math.max(sMax - sMin, 1e-12)) * innerH;

  const parts: string[] = [];
  parts.push(
    `<svg xmlns="http://www.w3.org/2000/svg" width="${width}" height="${height}" viewBox="0 0 ${width} ${height}">`,
  );
  parts.push(`<rect width="${width}" height="${height}" fill="white"/>`);
  if (title) {
    parts.push(
      `<text x="${width / 2}" y="20" text-anchor="middle" font-family="sans-serif" font-size="14">${title}</text>`,
    );
  }
  // heat band: one column per downsampled bucket to keep the file small
  const buckets = Math.min(n, 480);
  for (let bIdx = 0; bIdx < buckets; bIdx++) {
    const lo = Math.floor((bIdx * n) / buckets);
    const hi = Math.max(lo + 1, Math.floor(((bIdx + 1) * n) / buckets));
    let acc = 0;
    for (let i = lo; i < hi; i++) {
      acc += importance[i] as number;
    }
    const level = wMax > 0 ? acc / (hi - lo) / wMax : 0;
    if (level < 0.02) {
      continue;
    }
    const x0 = sx(lo);
    const x1 = sx(hi - 1) + innerW / buckets;
    parts.push(
      `<rect x="${x0.toFixed(1)}" y="${margin}" width="${(x1 - x0).toFixed(1)}" height="${innerH}" ` +
        `fill="#d62728" fill-opacity="${(0.55 * level).toFixed(3)}"/>`,
    );
  }
  const lineParts: string[] = [];
  for (let i = 0; i < n; i++) {
    lineParts.push(`${i === 0 ? "M" : "L"}${sx(i).toFixed(1)},${sy(signal[i] as number).toFixed(1)}`);
  }
  parts.push(`<path d="${lineParts.join(" ")}" fill="none" stroke="#222" stroke-width="0.9"/>`);
  parts.push("</svg>");
  ensureDir(filePath);
  fs.writeFileSync(filePath, parts.join("\n"));
}
