export interface ServiceConfig {
  host: string;
  port: number;
  maxBatch: number;
  dim: number;
}

function intFromEnv(name: string, fallback: number, min: number): number {
  const raw = process.env[name];
  if (raw === undefined || raw === '') return fallback;
  const value = Number(raw);
  if (!Number.isInteger(value) || value < min) {
    throw new Error(`${name} must be an integer >= ${min}, got "${raw}"`);
  }
  return value;
}

export function configFromEnv(): ServiceConfig {
  return {
    host: process.env.HOST ?? '127.0.0.1',
    // 64 matches the client's default embedding batch size.
    port: intFromEnv('PORT', 8100, 0),
    maxBatch: intFromEnv('MAX_BATCH', 64, 1),
    dim: intFromEnv('EMBED_DIM', 768, 8),
  };
}
