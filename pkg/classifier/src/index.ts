export { initBackend } from "./backend.js";
export { convFilterGrad, convInputGrad, registerConvGradOverride } from "./convGrad.js";
export { BatchNorm1d } from "./layers.js";
export { ModelSpec, buildClassifier, forwardLogits, softmaxProbs } from "./model.js";
export { smoothedCrossEntropy } from "./loss.js";
export { DEFAULT_SCHEDULE, ScheduleConfig, learningRateAt } from "./schedule.js";
export {
  CvPlan,
  DEFAULT_CV_PLAN,
  InnerSplit,
  OuterSplit,
  SplitError,
  TASKS,
  TaskTargets,
  buildNestedSplits,
  mulberry32,
  stratifiedKFold,
  taskTargets,
} from "./splits.js";
export {
  EcgRecord,
  LEAD_ORDER,
  RECORD_SCHEMA,
  RecordFormatError,
  concatLeads,
  loadRecordDir,
  readRecordFile,
} from "./records.js";
export { Dataset, datasetFromRecords, makeSeparableToy, subset } from "./data.js";
export {
  EvalReport,
  UndefinedMetricError,
  accuracyOf,
  aucBinary,
  aucScore,
  confusionMatrix,
  evaluateModel,
  f1Score,
  meanReport,
  predictDataset,
  reportFromPredictions,
  sensitivityScore,
  specificityScore,
} from "./metrics.js";
export {
  DEFAULT_TRAIN_CONFIG,
  EpochStats,
  TrainConfig,
  TrainResult,
  datasetLoss,
  trainClassifier,
} from "./train.js";
export { gradCam, upsampleLinear } from "./gradcam.js";
export { TsneOptions, extractEmbeddings, silhouetteScore, tsne } from "./tsne.js";
export { writeImportanceSvg, writeScatterSvg } from "./plots.js";
export { ReportRow, formatReportTable, writeReportFile } from "./report.js";
