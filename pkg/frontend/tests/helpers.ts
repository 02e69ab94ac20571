// Shared test plumbing: fixture-backed fetch and app bootstrapping.

import { readFileSync } from "node:fs";
import { dirname, join } from "node:path";
import { fileURLToPath } from "node:url";

import { ApiClient } from "../src/api.js";

const FIXTURE_DIR = join(dirname(fileURLToPath(import.meta.url)), "fixtures");

export function fixture(name: string): unknown {
  return JSON.parse(readFileSync(join(FIXTURE_DIR, `${name}.json`), "utf8"));
}

function route(url: URL): string | null {
  const path = decodeURIComponent(url.pathname);
  if (path === "/vehicles") {
    if (!url.searchParams.get("subdiscipline")) return "vehicles";
    // the recorded benchmark is for this class only; others 404 like the service
    return url.searchParams.get("class") === "Large Family Car" ? "benchmark" : null;
  }
  if (path === "/vehicles/veh:dev-aldora/devtree") return "devtree";
  if (path === "/sims") {
    return url.searchParams.get("model") === "model:m1" ? "sims_filtered" : "sims";
  }
  const sim = path.match(/^\/sims\/sim:(.+)$/);
  if (sim) return `sim_${sim[1]}`;
  return null;
}

/** Serves the recorded query-service responses; 404s like the real thing. */
export function fixtureFetch(): (input: string) => Promise<Response> {
  return async (input: string) => {
    const url = new URL(input, "http://fixtures.test");
    const name = route(url);
    try {
      if (name === null) throw new Error("no route");
      const body = JSON.stringify(fixture(name));
      return new Response(body, {
        status: 200,
        headers: { "content-type": "application/json" },
      });
    } catch {
      return new Response(JSON.stringify({ detail: "Not Found" }), {
        status: 404,
        headers: { "content-type": "application/json" },
      });
    }
  };
}

export function fixtureClient(): ApiClient {
  return new ApiClient("", fixtureFetch());
}

export async function flush(): Promise<void> {
  // drain the microtask queue a few times; renders chain at most ~3 awaits
  for (let i = 0; i < 20; i++) {
    await Promise.resolve();
  }
}
