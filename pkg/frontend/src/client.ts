/**
 * Async HTTP bindings for the token-compression service.
 *
 * Every call validates tensor views locally, ships them as base64 STGP
 * bytes, and decodes responses into fresh buffers: input arrays are never
 * written to, and outputs never alias inputs. All methods are plain async
 * I/O, so long pooling calls never block the caller's event loop.
 */

import { checkRunConfig, type RunConfig } from "./config.js";
import {
  tensorFromBase64,
  tensorToBase64,
  toArrayView,
  type ArrayView,
  type ArrayViewLike,
} from "./format.js";

export interface BudgetReport {
  input_tokens: number;
  output_tokens: number;
  ratio: number;
}

export interface PoolResult {
  tensor: ArrayView;
  budget: BudgetReport;
}

export interface ScheduleSegment {
  level: number;
  index: number;
  start: number;
  span_end: number;
  update_index: number;
  sample_indices: number[];
}

export interface ScheduleLevel {
  level: number;
  segment_length: number;
  segment_count: number;
  segments: ScheduleSegment[];
}

export interface Schedule {
  n_frames: number;
  levels: ScheduleLevel[];
}

export interface RegionStats {
  region: string;
  count: number;
  mean: number;
  std: number;
  min: number;
  max: number;
}

export interface NormStatsResult {
  stats: RegionStats[];
  statsCsv: string;
  topMask?: ArrayView;
}

export interface NormStatsOptions {
  mask?: ArrayViewLike;
  normOrder?: number;
  fraction?: number;
  bins?: number;
}

export class ServiceError extends Error {
  constructor(
    readonly status: number,
    readonly detail: string,
    path: string,
  ) {
    super(`${path} failed (${status}): ${detail}`);
    this.name = "ServiceError";
  }
}

export class StGridPoolClient {
  constructor(readonly baseUrl: string) {
    this.baseUrl = baseUrl.replace(/\/+$/, "");
  }

  async health(): Promise<{ status: string; service: string; version: string }> {
    const response = await fetch(`${this.baseUrl}/health`);
    if (!response.ok) {
      throw new ServiceError(response.status, await response.text(), "/health");
    }
    return (await response.json()) as { status: string; service: string; version: string };
  }

  /** Run the full pipeline on a rank-4 tensor view; returns a new tensor. */
  async stGridPool(tensor: ArrayViewLike, config: RunConfig = {}): Promise<PoolResult> {
    const view = toArrayView(tensor, 4);
    const body = await this.post("/v1/pool", {
      tensor_b64: tensorToBase64(view),
      config: checkRunConfig(config),
    });
    return {
      tensor: tensorFromBase64(body.tensor_b64 as string),
      budget: body.budget as BudgetReport,
    };
  }

  async tokenBudget(
    nFrames: number,
    height: number,
    width: number,
    config: RunConfig = {},
  ): Promise<BudgetReport> {
    const body = await this.post("/v1/budget", {
      n_frames: nFrames,
      height,
      width,
      config: checkRunConfig(config),
    });
    return body as unknown as BudgetReport;
  }

  async buildSchedule(nFrames: number, config: RunConfig = {}): Promise<Schedule> {
    const body = await this.post("/v1/schedule", {
      n_frames: nFrames,
      config: checkRunConfig(config),
    });
    return body as unknown as Schedule;
  }

  /**
   * Per-region norm statistics for a rank-3 or rank-4 tensor, optionally
   * with a saliency mask (rank-3, single channel, 0/1 values) and a
   * top-fraction mask request.
   */
  async normStats(
    tensor: ArrayViewLike,
    options: NormStatsOptions = {},
  ): Promise<NormStatsResult> {
    const view = toArrayView(tensor);
    const body = await this.post("/v1/analyze", {
      tensor_b64: tensorToBase64(view),
      mask_b64: options.mask ? tensorToBase64(toArrayView(options.mask, 3)) : null,
      norm_order: options.normOrder ?? 2.0,
      fraction: options.fraction ?? null,
      bins: options.bins ?? 64,
    });
    const statsCsv = body.stats_csv as string;
    return {
      stats: parseSummaryRows(statsCsv),
      statsCsv,
      topMask: body.mask_b64 ? tensorFromBase64(body.mask_b64 as string) : undefined,
    };
  }

  private async post(path: string, payload: unknown): Promise<Record<string, unknown>> {
    const response = await fetch(`${this.baseUrl}${path}`, {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify(payload),
    });
    if (!response.ok) {
      let detail = await response.text();
      try {
        const parsed = JSON.parse(detail) as { detail?: unknown };
        if (parsed.detail !== undefined) detail = JSON.stringify(parsed.detail);
      } catch {
        // keep raw body
      }
      throw new ServiceError(response.status, detail, path);
    }
    return (await response.json()) as Record<string, unknown>;
  }
}

/** Pull the per-region summary rows out of the analysis CSV. */
function parseSummaryRows(csv: string): RegionStats[] {
  const lines = csv.trim().split("\n");
  const header = (lines[0] ?? "").split(",");
  const col = (name: string) => header.indexOf(name);
  const [kindCol, regionCol] = [col("kind"), col("region")];
  const numeric = {
    count: col("count"),
    mean: col("mean"),
    std: col("std"),
    min: col("min"),
    max: col("max"),
  };
  const stats: RegionStats[] = [];
  for (const line of lines.slice(1)) {
    const cells = line.split(",");
    if (cells[kindCol] !== "summary") continue;
    stats.push({
      region: cells[regionCol] ?? "",
      count: Number(cells[numeric.count]),
      mean: Number(cells[numeric.mean]),
      std: Number(cells[numeric.std]),
      min: Number(cells[numeric.min]),
      max: Number(cells[numeric.max]),
    });
  }
  return stats;
}
