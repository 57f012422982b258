/** Cosine-annealing learning-rate schedule with warm restarts every `period`
 * epochs, frozen from `freezeEpoch` onward at the restart value (the base
 * rate). With the defaults the rate starts at 1e-3, decays along a cosine
 * over each 25-epoch cycle, and stops changing at epoch 100. */
export interface ScheduleConfig {
  baseLr: number;
  period: number;
  freezeEpoch: number;
}

export const DEFAULT_SCHEDULE: ScheduleConfig = {
  baseLr: 1e-3,
  period: 25,
  freezeEpoch: 100,
};

export function learningRateAt(epoch: number, cfg: ScheduleConfig = DEFAULT_SCHEDULE): number {
  if (epoch < 0 || !Number.isInteger(epoch)) {
    throw new Error(`epoch must be a non-negative integer, got ${epoch}`);
  }
  const phase = epoch >= cfg.freezeEpoch ? 0 : epoch % cfg.period;
  return cfg.baseLr * 0.5 * (1 + Math.cos((Math.PI * phase) / cfg.period));
}
