import { defineConfig } from "vitest/config";

export default defineConfig({
  test: {
    include: ["test/**/*.test.ts"],
    environment: "node",
    testTimeout: 60_000,
    hookTimeout: 30_000,
    // The e2e suites each drive their own simulator process on a fixed
    // port; keep files sequential so ports never collide.
    fileParallelism: false,
  },
});
