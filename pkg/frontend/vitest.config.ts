import { defineConfig } from "vitest/config";

export default defineConfig({
  test: {
    include: ["tests/**/*.test.ts"],
    environment: "node", // DOM tests opt in per-file
    testTimeout: 120_000, // the e2e test boots the Python harness
    hookTimeout: 120_000,
  },
});
