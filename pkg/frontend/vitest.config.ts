import { defineConfig } from "vitest/config";

export default defineConfig({
  test: {
    environment: "node",
    include: ["test/**/*.test.ts"],
    // The replay test boots the real Python server.
    testTimeout: 30000,
    hookTimeout: 30000,
  },
});
