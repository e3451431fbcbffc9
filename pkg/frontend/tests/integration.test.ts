// Edit-loop test against the real explanation service: trains nothing,
// just loads a small randomly initialized checkpoint into the server and
// drives the UI with real HTTP round trips.

import { spawn, spawnSync, type ChildProcess } from "node:child_process";
import { mkdtempSync } from "node:fs";
import { tmpdir } from "node:os";
import { join } from "node:path";
import { afterAll, beforeAll, describe, expect, it } from "vitest";

import { ApiClient } from "../src/api.js";
import { createApp } from "../src/app.js";

const SALT = "CC[NH+](CCCl)CCOc1cccc2ccccc12.[Cl-]";
const PORT = 8971;
const BASE = `http://127.0.0.1:${PORT}`;

const MAKE_CHECKPOINT = `
import sys
import numpy as np
from fragnet.hiergraph import FeatureConfig
from fragnet.model import ModelConfig, init_params
from fragnet.training import Checkpoint, Standardizer, TaskKind, save_checkpoint

mcfg = ModelConfig(hidden_dim=8, layers_per_graph=1, heads=2)
fcfg = FeatureConfig()
ckpt = Checkpoint(version=1, task=TaskKind.REGRESSION, model_config=mcfg,
                  feature_config=fcfg, params=init_params(mcfg, fcfg, seed=12),
                  standardizer=Standardizer(np.array([-3.0]), np.array([2.0])),
                  metadata={})
save_checkpoint(ckpt, sys.argv[1])
`;

let server: ChildProcess | null = null;

async function waitForHealth(timeoutMs = 60000): Promise<void> {
  const deadline = Date.now() + timeoutMs;
  while (Date.now() < deadline) {
    try {
      const res = await fetch(`${BASE}/health`);
      if (res.ok) return;
    } catch {
      /* not up yet */
    }
    await new Promise((r) => setTimeout(r, 300));
  }
  throw new Error("service did not come up");
}

beforeAll(async () => {
  const dir = mkdtempSync(join(tmpdir(), "fragnet-models-"));
  const made = spawnSync(
    "python3", ["-c", MAKE_CHECKPOINT, join(dir, "sol.json")],
    { stdio: "inherit" });
  expect(made.status).toBe(0);
  server = spawn(
    "python3", ["-m", "fragnet.cli", "serve", "--models-dir", dir,
                "--port", String(PORT)],
    { stdio: "ignore" });
  await waitForHealth();
});

afterAll(() => {
  server?.kill();
});

describe("edit loop against the live service", () => {
  it("renders all overlays for the salt from a single explain call",
     async () => {
    const root = document.createElement("div");
    document.body.appendChild(root);
    const app = createApp(root, new ApiClient(BASE));
    await app.submit(SALT);

    expect(app.store.state.editHistory.length).toBe(1);
    expect(root.querySelector("svg")).not.toBeNull();
    expect(root.querySelectorAll(".atom").length).toBe(20);

    // all five overlays render client-side from the one payload
    const buttons = [...root.querySelectorAll(".overlay-btn")];
    expect(buttons.length).toBe(5);
    for (const btn of buttons) {
      (btn as HTMLButtonElement).click();
      expect(root.querySelector("svg")).not.toBeNull();
    }

    // the virtual connection to [Cl-] renders dashed
    (buttons.find((b) => b.textContent === "CONNECTION") as
      HTMLButtonElement).click();
    const virtual = root.querySelector(".connection-virtual");
    expect(virtual).not.toBeNull();
    expect(virtual!.getAttribute("stroke-dasharray")).toBe("6,4");

    // fragment table includes the chloride row
    const cells = [...root.querySelectorAll(".fragments-table td")]
      .map((td) => td.textContent);
    expect(cells).toContain("[Cl-]");
  });

  it("invalid SMILES preserves the prior view and surfaces the error",
     async () => {
    const root = document.createElement("div");
    document.body.appendChild(root);
    const app = createApp(root, new ApiClient(BASE));
    await app.submit(SALT);
    const before = root.querySelector(".canvas")!.innerHTML;

    await app.submit("c1ccccc1(");
    expect(root.querySelector(".canvas")!.innerHTML).toBe(before);
    const banner = root.querySelector(".error-banner") as HTMLElement;
    expect(banner.hidden).toBe(false);
    expect(app.store.state.editHistory.length).toBe(1);

    // a follow-up valid edit recovers and extends the history
    await app.submit("CCO");
    expect(app.store.state.editHistory.length).toBe(2);
    expect(app.store.state.error).toBeNull();
  });
});
