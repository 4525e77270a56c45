export {
  DTYPE_F32,
  STGP_VERSION,
  decodeTensor,
  elementCount,
  encodeTensor,
  tensorFromBase64,
  tensorToBase64,
  toArrayView,
} from "./format.js";
export type { ArrayView, ArrayViewLike } from "./format.js";
export { RUN_CONFIG_KEYS, checkRunConfig } from "./config.js";
export type { RunConfig } from "./config.js";
export { ServiceError, StGridPoolClient } from "./client.js";
export type {
  BudgetReport,
  NormStatsOptions,
  NormStatsResult,
  PoolResult,
  RegionStats,
  Schedule,
  ScheduleLevel,
  ScheduleSegment,
} from "./client.js";
