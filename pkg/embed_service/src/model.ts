import { createHash } from 'node:crypto';

export interface EmbeddingModel {
  /** Identifier reported in /health and /embed responses. */
  readonly id: string;
  /** Output dimensionality; constant for the lifetime of the model. */
  readonly dim: number;
  /** Embed a batch of non-empty texts, one unit-norm vector per text, input order. */
  embed(texts: string[]): number[][];
}

const DEFAULT_DIM = 768;

/**
 * Deterministic feature-hashing sentence encoder.
 *
 * Each text is lowercased and split into word unigrams plus padded character
 * trigrams; every feature is hashed into a fixed-size count vector which is
 * then L2-normalized. Shared surface forms ("effusion" vs "effusions") share
 * most of their trigrams, so near-duplicate phrases land close together while
 * unrelated phrases stay far apart. No network or model files are needed, and
 * the same text always produces the same vector.
 */
export class HashedEncoder implements EmbeddingModel {
  readonly id: string;
  readonly dim: number;

  constructor(dim: number = DEFAULT_DIM) {
    if (!Number.isInteger(dim) || dim < 8) {
      throw new Error(`dim must be an integer >= 8, got ${dim}`);
    }
    this.dim = dim;
    this.id = `hashed-wt3-${dim}`;
  }

  embed(texts: string[]): number[][] {
    return texts.map((text) => this.embedOne(text));
  }

  private embedOne(text: string): number[] {
    const counts = new Float64Array(this.dim);
    for (const feature of features(text)) {
      counts[bucket(feature, this.dim)] += 1;
    }
    let sumSquares = 0;
    for (const c of counts) sumSquares += c * c;
    // Non-empty text always yields at least one trigram, so the norm is positive.
    const norm = Math.sqrt(sumSquares);
    const vector = new Array<number>(this.dim);
    for (let i = 0; i < this.dim; i += 1) {
      vector[i] = counts[i] / norm;
    }
    return vector;
  }
}

function* features(text: string): Generator<string> {
  const lower = text.toLowerCase();
  for (const word of lower.matchAll(/[a-z0-9]+/g)) {
    yield `w:${word[0]}`;
  }
  // Space padding lets leading and trailing characters form trigrams too,
  // and guarantees at least one trigram for any single-character text.
  const padded = ` ${lower.trim().replace(/\s+/g, ' ')} `;
  for (let i = 0; i + 3 <= padded.length; i += 1) {
    yield `t:${padded.slice(i, i + 3)}`;
  }
}

function bucket(feature: string, dim: number): number {
  const digest = createHash('sha256').update(feature, 'utf8').digest();
  return Number(digest.readBigUInt64BE(0) % BigInt(dim));
}

/**
 * Load the embedding model. Kept async so a heavier backend can be dropped in
 * without touching the server wiring; requests arriving before this resolves
 * are answered with 503.
 */
export async function loadModel(dim: number = DEFAULT_DIM): Promise<EmbeddingModel> {
  return new HashedEncoder(dim);
}

export function cosine(u: number[], v: number[]): number {
  let dot = 0;
  let nu = 0;
  let nv = 0;
  for (let i = 0; i < u.length; i += 1) {
    dot += u[i] * v[i];
    nu += u[i] * u[i];
    nv += v[i] * v[i];
  }
  return dot / (Math.sqrt(nu) * Math.sqrt(nv));
}
