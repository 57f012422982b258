import * as path from "node:path";
import { initBackend } from "./backend.js";
import { Dataset, datasetFromRecords, makeSeparableToy, subset } from "./data.js";
import { gradCam } from "./gradcam.js";
import { EvalReport, evaluateModel, meanReport } from "./metrics.js";
import { buildClassifier } from "./model.js";
import { writeImportanceSvg, writeScatterSvg } from "./plots.js";
import { loadRecordDir } from "./records.js";
import { ReportRow, formatReportTable, writeReportFile } from "./report.js";
import { DEFAULT_SCHEDULE } from "./schedule.js";
import { TASKS, buildNestedSplits, mulberry32, stratifiedKFold, taskTargets } from "./splits.js";
import { DEFAULT_TRAIN_CONFIG, TrainConfig, trainClassifier } from "./train.js";
import { extractEmbeddings, silhouetteScore, tsne } from "./tsne.js";

const USAGE = `usage:
  classifier demo --out DIR [--seed N] [--epochs N] [--width N]
      train on a generated separable toy set and write metrics + plots

  classifier run --records DIR --task TASK [--out DIR] [--seed N]
                 [--epochs N] [--width N] [--t-lead N]
      5-fold protocol over digitized record files
      tasks: ${Object.keys(TASKS).join(", ")}
`;

interface Args {
  command: string;
  options: Map<string, string>;
}

function parseArgs(argv: string[]): Args {
  const [command, ...rest] = argv;
  const options = new Map<string, string>();
  for (let i = 0; i < rest.length; i += 2) {
    const key = rest[i];
    if (!key.startsWith("--") || i + 1 >= rest.length) {
      throw new Error(`malformed option near "${key}"`);
    }
    options.set(key.slice(2), rest[i + 1]);
  }
  return { command: command ?? "", options };
}

function intOption(args: Args, name: string, fallback: number): number {
  const raw = args.options.get(name);
  if (raw === undefined) {
    return fallback;
  }
  const value = Number(raw);
  if (!Number.isInteger(value) || value <= 0) {
    throw new Error(`--${name} must be a positive integer, got "${raw}"`);
  }
  return value;
}

function trainConfig(epochs: number, seed: number): TrainConfig {
  return { ...DEFAULT_TRAIN_CONFIG, schedule: { ...DEFAULT_SCHEDULE }, epochs, seed };
}

function writeExplainability(
  outDir: string,
  model: ReturnType<typeof buildClassifier>,
  ds: Dataset,
  tag: string,
): void {
  // one importance map per class, from the first sample of that class
  for (let c = 0; c < ds.classNames.length; c++) {
    const idx = ds.ys.indexOf(c);
    if (idx < 0) {
      continue;
    }
    const cam = gradCam(model, ds.xs[idx]);
    writeImportanceSvg(
      path.join(outDir, `gradcam_${tag}_${ds.classNames[c]}.svg`),
      ds.xs[idx],
      cam,
      `class activation map: ${ds.classNames[c]}`,
    );
  }
  const features = extractEmbeddings(model, ds);
  const points = tsne(features, { seed: 1 });
  writeScatterSvg(
    path.join(outDir, `tsne_${tag}.svg`),
    points,
    ds.ys,
    ds.classNames,
    `embedding of final-stage features (${tag})`,
  );
  if (new Set(ds.ys).size > 1) {
    console.log(`silhouette of 2D embedding (${tag}): ${silhouetteScore(points, ds.ys).toFixed(3)}`);
  }
}

async function demoCommand(args: Args): Promise<number> {
  const outDir = args.options.get("out");
  if (!outDir) {
    throw new Error("demo requires --out DIR");
  }
  const seed = intOption(args, "seed", 7);
  const epochs = intOption(args, "epochs", 10);
  const width = intOption(args, "width", 8);

  console.log(`backend: ${await initBackend()}`);
  const ds = makeSeparableToy(200, 500, seed);
  const folds = stratifiedKFold(ds.ys, 4, mulberry32(seed));
  const valIdx = folds[0];
  const valSet = new Set(valIdx);
  const trainIdx = ds.ys.map((_, i) => i).filter((i) => !valSet.has(i));
  const model = buildClassifier({
    inputLength: ds.seqLength,
    numClasses: ds.classNames.length,
    baseChannels: width,
    seed,
  });
  console.log(`training ${model.countParams()} parameters on ${trainIdx.length} sequences`);
  const result = await trainClassifier(model, subset(ds, trainIdx), subset(ds, valIdx), trainConfig(epochs, seed));
  console.log(`best val F1 ${result.bestF1.toFixed(4)} at epoch ${result.bestEpoch}`);
  const report = evaluateModel(model, subset(ds, valIdx));
  const rows: ReportRow[] = [{ name: "toy-holdout", report }];
  console.log(formatReportTable(rows));
  writeReportFile(path.join(outDir, "metrics.txt"), rows);
  writeExplainability(outDir, model, subset(ds, valIdx), "toy");
  console.log(`outputs -> ${outDir}`);
  return 0;
}

async function runCommand(args: Args): Promise<number> {
  const recordsDir = args.options.get("records");
  const task = args.options.get("task");
  if (!recordsDir || !task) {
    throw new Error("run requires --records DIR and --task TASK");
  }
  const outDir = args.options.get("out") ?? "out";
  const seed = intOption(args, "seed", 0);
  const epochs = intOption(args, "epochs", DEFAULT_TRAIN_CONFIG.epochs);
  const width = intOption(args, "width", 64);
  const tLead = intOption(args, "t-lead", 500);

  console.log(`backend: ${await initBackend()}`);
  const records = loadRecordDir(recordsDir);
  console.log(`loaded ${records.length} records from ${recordsDir}`);
  const targets = taskTargets(records.map((r) => r.classLabel), task);
  const classes = TASKS[task];
  const labelToClass = new Map<string, string>();
  classes.forEach((cls) => cls.labels.forEach((l) => labelToClass.set(l, cls.className)));
  const ds = datasetFromRecords(
    targets.indices.map((i) => records[i]),
    targets.classNames,
    (label) => labelToClass.get(label) ?? null,
    tLead,
  );
  console.log(
    `task ${task}: ${ds.xs.length} records over classes [${ds.classNames.join(", ")}]`,
  );

  const splits = buildNestedSplits(ds.ys, undefined, seed);
  const reports: EvalReport[] = [];
  const rows: ReportRow[] = [];
  for (let f = 0; f < splits.length; f++) {
    const { test, inner } = splits[f];
    // inner fold 0 supplies the validation split for checkpoint selection
    const { train, val } = inner[0];
    console.log(
      `fold ${f + 1}/${splits.length}: train ${train.length}, val ${val.length}, test ${test.length}`,
    );
    const model = buildClassifier({
      inputLength: ds.seqLength,
      numClasses: ds.classNames.length,
      baseChannels: width,
      seed: seed + f,
    });
    const result = await trainClassifier(
      model,
      subset(ds, train),
      subset(ds, val),
      trainConfig(epochs, seed + f),
    );
    console.log(`fold ${f + 1} best val F1 ${result.bestF1.toFixed(4)} at epoch ${result.bestEpoch}`);
    const report = evaluateModel(model, subset(ds, test));
    reports.push(report);
    rows.push({ name: `fold ${f + 1}`, report });
    if (f === 0) {
      writeExplainability(outDir, model, subset(ds, test), task);
    }
    model.dispose();
  }
  rows.push({ name: "mean", report: meanReport(reports) });
  console.log(formatReportTable(rows));
  writeReportFile(path.join(outDir, `metrics_${task}.txt`), rows);
  console.log(`outputs -> ${outDir}`);
  return 0;
}

export async function main(argv: string[]): Promise<number> {
  let args: Args;
  try {
    args = parseArgs(argv);
    if (args.command === "demo") {
      return await demoCommand(args);
    }
    if (args.command === "run") {
      return await runCommand(args);
    }
    console.error(USAGE);
    return 1;
  } catch (err) {
    if (err instanceof Error && /requires|malformed|unknown task|must be/.test(err.message)) {
      console.error(`error: ${err.message}`);
      console.error(USAGE);
      return 1;
    }
    console.error(`FAIL ${err instanceof Error ? err.message : err}`);
    return 2;
  }
}

const isDirectRun =
  process.argv[1] !== undefined &&
  import.meta.url === new URL(`file://${path.resolve(process.argv[1])}`).href;
if (isDirectRun) {
  main(process.argv.slice(2)).then((code) => {
    process.exitCode = code;
  });
}
