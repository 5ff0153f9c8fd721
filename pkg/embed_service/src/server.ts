import { createApp, type AppState } from './app.js';
import { configFromEnv } from './config.js';
import { loadModel } from './model.js';

const config = configFromEnv();
const state: AppState = { model: null, maxBatch: config.maxBatch };
const app = createApp(state);

// Start listening immediately so probes get an honest 503 while the model
// loads, then flip to ready exactly once.
const server = app.listen(config.port, config.host, () => {
  const address = server.address();
  const where = typeof address === 'object' && address !== null ? `${address.address}:${address.port}` : String(address);
  console.log(`embed-service listening on ${where}`);
});

loadModel(config.dim)
  .then((model) => {
    state.model = model;
    console.log(`model ${model.id} ready (dim ${model.dim}, batch limit ${config.maxBatch})`);
  })
  .catch((err) => {
    console.error(`model load failed: ${err instanceof Error ? err.message : String(err)}`);
    server.close(() => process.exit(1));
  });

for (const signal of ['SIGINT', 'SIGTERM'] as const) {
  process.on(signal, () => server.close(() => process.exit(0)));
}
