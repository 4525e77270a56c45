/** Pipeline settings, mirroring the service's run-config keys. */
export interface RunConfig {
  base_length?: number;
  levels?: number;
  grid_m?: number;
  grid_n?: number;
  kernel_h?: number;
  kernel_w?: number;
  stride_h?: number;
  stride_w?: number;
  beta?: number;
  norm_order?: number;
  ptg_enabled?: boolean;
  nsp_enabled?: boolean;
}

export const RUN_CONFIG_KEYS: ReadonlyArray<keyof RunConfig> = [
  "base_length",
  "levels",
  "grid_m",
  "grid_n",
  "kernel_h",
  "kernel_w",
  "stride_h",
  "stride_w",
  "beta",
  "norm_order",
  "ptg_enabled",
  "nsp_enabled",
];

/** Reject unknown keys locally so typos fail before any network round trip. */
export function checkRunConfig(config: RunConfig): RunConfig {
  for (const key of Object.keys(config)) {
    if (!RUN_CONFIG_KEYS.includes(key as keyof RunConfig)) {
      throw new RangeError(`unknown config key: ${key}`);
    }
  }
  return config;
}
