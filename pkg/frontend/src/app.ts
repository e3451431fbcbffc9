// DOM wiring: SMILES input, overlay buttons, canvas, tables, history.

import { ApiClient, ServiceError } from "./api.js";
import { renderMolecule, renderTables } from "./render.js";
import { Store } from "./state.js";
import { initialState, OVERLAYS } from "./types.js";

export interface App {
  store: Store;
  submit: (smiles: string) => Promise<void>;
  root: Element;
}

export function createApp(root: Element, api: ApiClient): App {
  root.innerHTML = `
    <div class="toolbar">
      <input type="text" class="smiles-input"
             placeholder="Enter a SMILES string" />
      <button class="submit-btn">Explain</button>
      <select class="model-select"></select>
      <span class="prediction-label"></span>
      <span class="stale-badge" hidden>edited since last explanation</span>
      <span class="error-banner" role="alert" hidden></span>
    </div>
    <div class="overlay-bar"></div>
    <div class="canvas"></div>
    <div class="tables"></div>
    <ol class="history"></ol>
  `;
  const input = root.querySelector(".smiles-input") as HTMLInputElement;
  const submitBtn = root.querySelector(".submit-btn") as HTMLButtonElement;
  const overlayBar = root.querySelector(".overlay-bar") as HTMLElement;
  const canvas = root.querySelector(".canvas") as HTMLElement;
  const tables = root.querySelector(".tables") as HTMLElement;
  const history = root.querySelector(".history") as HTMLElement;
  const staleBadge = root.querySelector(".stale-badge") as HTMLElement;
  const errorBanner = root.querySelector(".error-banner") as HTMLElement;
  const predictionLabel = root.querySelector(
    ".prediction-label") as HTMLElement;

  const store = new Store(initialState());

  for (const overlay of OVERLAYS) {
    const btn = document.createElement("button");
    btn.textContent = overlay;
    btn.className = `overlay-btn overlay-btn-${overlay.toLowerCase()}`;
    btn.addEventListener("click", () => store.setOverlay(overlay));
    overlayBar.appendChild(btn);
  }

  store.subscribe((s) => {
    staleBadge.hidden = !s.stale;
    errorBanner.hidden = s.error === null;
    errorBanner.textContent = s.error ?? "";
    overlayBar.querySelectorAll(".overlay-btn").forEach((b) => {
      b.classList.toggle("active", b.textContent === s.overlay);
    });
    if (s.lastExplanation) {
      renderMolecule(canvas, s.lastExplanation, s.overlay);
      renderTables(tables, s.lastExplanation);
      predictionLabel.textContent =
        `prediction: ${s.lastExplanation.prediction.toFixed(3)}`;
    }
    history.innerHTML = "";
    for (const entry of s.editHistory) {
      const li = document.createElement("li");
      li.textContent = `${entry.smiles} -> ${entry.prediction.toFixed(3)}`;
      history.appendChild(li);
    }
  });

  async function submit(smiles: string): Promise<void> {
    store.setSmilesInput(smiles);
    const token = store.beginRequest();
    try {
      const exp = await api.explain(smiles, store.state.selectedModel);
      store.applyExplanation(token, exp);
    } catch (err) {
      if (err instanceof DOMException && err.name === "AbortError") {
        return; // a newer edit superseded this request
      }
      const message = err instanceof ServiceError
        ? `${err.code}: ${err.message}`
        : `network failure: ${String(err)} (retry)`;
      store.applyError(token, message);
    }
  }

  submitBtn.addEventListener("click", () => {
    void submit(input.value.trim());
  });
  input.addEventListener("keydown", (ev) => {
    if ((ev as KeyboardEvent).key === "Enter") {
      void submit(input.value.trim());
    }
  });
  input.addEventListener("input", () => {
    store.setSmilesInput(input.value.trim());
  });

  void api.health().then((h) => {
    const select = root.querySelector(".model-select") as HTMLSelectElement;
    for (const name of h.models) {
      const opt = document.createElement("option");
      opt.value = name;
      opt.textContent = name;
      select.appendChild(opt);
    }
    if (h.models.length) store.setModel(h.models[0]);
    select.addEventListener("change", () => store.setModel(select.value));
  }).catch(() => {
    store.applyError(store.beginRequest(), "service unreachable (retry)");
  });

  return { store, submit, root };
}
