import express, { type Express, type NextFunction, type Request, type Response } from 'express';
import type { EmbeddingModel } from './model.js';

export interface AppState {
  /** Null until the model has finished loading; /embed and /health answer 503 meanwhile. */
  model: EmbeddingModel | null;
  /** Largest number of texts accepted per /embed call. */
  maxBatch: number;
}

interface EmbedRequestBody {
  texts: string[];
}

function badRequest(res: Response, message: string): void {
  res.status(400).json({ error: message });
}

/**
 * Validate an /embed payload. Returns the texts on success, or null after
 * having written a 400 response describing the first problem found.
 */
function parseEmbedBody(body: unknown, maxBatch: number, res: Response): string[] | null {
  if (typeof body !== 'object' || body === null || Array.isArray(body)) {
    badRequest(res, 'request body must be a JSON object with a "texts" field');
    return null;
  }
  const texts = (body as Partial<EmbedRequestBody>).texts;
  if (!Array.isArray(texts)) {
    badRequest(res, '"texts" must be an array of strings');
    return null;
  }
  if (texts.length === 0) {
    badRequest(res, '"texts" must contain at least one text');
    return null;
  }
  if (texts.length > maxBatch) {
    badRequest(res, `"texts" holds ${texts.length} items, more than the batch limit of ${maxBatch}`);
    return null;
  }
  for (let i = 0; i < texts.length; i += 1) {
    const t = texts[i];
    if (typeof t !== 'string' || t.trim().length === 0) {
      badRequest(res, `texts[${i}] must be a non-empty string`);
      return null;
    }
  }
  return texts;
}

export function createApp(state: AppState): Express {
  const app = express();
  app.use(express.json({ limit: '1mb' }));

  app.get('/health', (_req: Request, res: Response) => {
    if (state.model === null) {
      res.status(503).json({ status: 'loading' });
      return;
    }
    res.json({ status: 'ok', model: state.model.id });
  });

  app.post('/embed', (req: Request, res: Response) => {
    if (state.model === null) {
      res.status(503).json({ error: 'model not loaded' });
      return;
    }
    const texts = parseEmbedBody(req.body, state.maxBatch, res);
    if (texts === null) return;
    const vectors = state.model.embed(texts);
    res.json({ model: state.model.id, dim: state.model.dim, vectors });
  });

  app.use((_req: Request, res: Response) => {
    res.status(404).json({ error: 'not found' });
  });

  // Malformed JSON bodies are a client error, not a crash.
  app.use((err: Error, _req: Request, res: Response, next: NextFunction) => {
    if (res.headersSent) {
      next(err);
      return;
    }
    badRequest(res, `invalid request body: ${err.message}`);
  });

  return app;
}
