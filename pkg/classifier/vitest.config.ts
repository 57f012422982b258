import { defineConfig } from "vitest/config";

// Single-core sandbox: run test files sequentially so the training smoke test
// gets the whole CPU, and give slow suites a generous timeout.
export default defineConfig({
  test: {
    include: ["test/**/*.spec.ts"],
    fileParallelism: false,
    testTimeout: 420_000,
    hookTimeout: 120_000,
  },
});
