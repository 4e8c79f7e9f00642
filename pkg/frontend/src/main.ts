/**
 * Application bootstrap: wires the editor, flow picker, prompt builder,
 * generation controls, and gallery to the HTTP service.
 */

import { ServiceClient, ServiceError } from "./api.js";
import { WireframeEditor } from "./editor.js";
import { GalleryView } from "./gallery.js";
import { GalleryEntry, RequestEcho, VocabResponse } from "./schema.js";
import {
  EditorState,
  applyPin,
  buildPrompt,
  buildRequest,
  exportWireframe,
  importWireframe,
  initialState,
} from "./state.js";

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing #${id}`);
  return node as T;
}

function fillSelect(select: HTMLSelectElement, values: (string | number)[], current: string) {
  select.replaceChildren();
  for (const v of values) {
    const opt = document.createElement("option");
    opt.value = String(v);
    opt.textContent = String(v);
    opt.selected = String(v) === current;
    select.appendChild(opt);
  }
}

function main(): void {
  const state: EditorState = initialState();
  const status = el<HTMLElement>("status");
  const say = (msg: string, isError = false) => {
    status.textContent = msg;
    status.classList.toggle("error", isError);
  };

  const client = new ServiceClient(
    new URLSearchParams(location.search).get("service") ?? "http://127.0.0.1:8000",
  );

  let lastEcho: RequestEcho | null = null;
  const gallery = new GalleryView(el("gallery"), {
    onPin: (entry: GalleryEntry) => {
      if (!lastEcho) {
        say("nothing to pin yet: run a generation first", true);
        return;
      }
      applyPin(state, entry, lastEcho);
      syncControls();
      editor.render();
      say(`pinned ${entry.id}: seed ${entry.seed}, n=1 — regenerate to reproduce this tile`);
    },
  });

  const editor = new WireframeEditor(
    el("canvas"),
    state,
    () => syncControls(),
    (reason) => say(reason, true),
  );

  // -- mode tabs ---------------------------------------------------------------
  const editTab = el<HTMLButtonElement>("mode-edit");
  const flowTab = el<HTMLButtonElement>("mode-flow");
  const setMode = (mode: "edit" | "flow") => {
    editor.setMode(mode);
    editTab.classList.toggle("active", mode === "edit");
    flowTab.classList.toggle("active", mode === "flow");
  };
  editTab.addEventListener("click", () => setMode("edit"));
  flowTab.addEventListener("click", () => setMode("flow"));

  // -- prompt builder ------------------------------------------------------------
  const promptOn = el<HTMLInputElement>("prompt-enabled");
  const themeSel = el<HTMLSelectElement>("prompt-theme");
  const categorySel = el<HTMLSelectElement>("prompt-category");
  const countSel = el<HTMLSelectElement>("prompt-count");
  const promptPreview = el<HTMLElement>("prompt-preview");

  client
    .vocab()
    .then((vocab: VocabResponse) => {
      fillSelect(themeSel, vocab.themes, state.prompt.theme);
      fillSelect(categorySel, vocab.categories, state.prompt.category);
      fillSelect(countSel, vocab.counts, String(state.prompt.count));
      syncControls();
    })
    .catch((err) => say(`vocab unavailable: ${String(err)}`, true));

  promptOn.addEventListener("change", () => {
    state.promptEnabled = promptOn.checked;
    syncControls();
  });
  themeSel.addEventListener("change", () => {
    state.prompt.theme = themeSel.value;
    syncControls();
  });
  categorySel.addEventListener("change", () => {
    state.prompt.category = categorySel.value;
    syncControls();
  });
  countSel.addEventListener("change", () => {
    state.prompt.count = Number(countSel.value);
    syncControls();
  });

  // -- sampling controls -----------------------------------------------------------
  const nInput = el<HTMLInputElement>("ctl-n");
  const stepsInput = el<HTMLInputElement>("ctl-steps");
  const guidanceInput = el<HTMLInputElement>("ctl-guidance");
  const seedInput = el<HTMLInputElement>("ctl-seed");
  nInput.addEventListener("change", () => (state.n = Number(nInput.value)));
  stepsInput.addEventListener("change", () => (state.steps = Number(stepsInput.value)));
  guidanceInput.addEventListener("change", () => (state.guidance = Number(guidanceInput.value)));
  seedInput.addEventListener("change", () => {
    state.seed = seedInput.value.trim() === "" ? null : Number(seedInput.value);
  });

  function syncControls(): void {
    promptOn.checked = state.promptEnabled;
    themeSel.value = state.prompt.theme;
    categorySel.value = state.prompt.category;
    countSel.value = String(state.prompt.count);
    promptPreview.textContent = state.promptEnabled ? buildPrompt(state.prompt) : "(no prompt)";
    nInput.value = String(state.n);
    stepsInput.value = String(state.steps);
    guidanceInput.value = String(state.guidance);
    seedInput.value = state.seed === null ? "" : String(state.seed);
    el<HTMLElement>("order-readout").textContent = state.order.length
      ? `flow order: ${state.order.length} element(s)`
      : "flow order: empty (use the flow tab)";
  }

  // -- import / export ----------------------------------------------------------------
  const io = el<HTMLTextAreaElement>("wireframe-json");
  el<HTMLButtonElement>("btn-export").addEventListener("click", () => {
    io.value = JSON.stringify(exportWireframe(state), null, 2);
    say("wireframe exported to the JSON panel");
  });
  el<HTMLButtonElement>("btn-import").addEventListener("click", () => {
    try {
      importWireframe(state, JSON.parse(io.value));
      editor.render();
      syncControls();
      say(`imported ${state.elements.length} elements`);
    } catch (err) {
      say(`import failed: ${String(err)}`, true);
    }
  });

  // -- generation -----------------------------------------------------------------------
  const generateBtn = el<HTMLButtonElement>("btn-generate");
  const overlayToggle = el<HTMLInputElement>("overlay-toggle");
  overlayToggle.addEventListener("change", () => gallery.setOverlay(overlayToggle.checked));

  generateBtn.addEventListener("click", () => {
    if (client.busy) return;
    const request = buildRequest(state);
    generateBtn.disabled = true;
    gallery.clear();
    say("generating…");
    client
      .generate(request, (entry, index) => {
        gallery.addEntry(entry);
        say(`generating… ${index + 1}/${request.n ?? "?"}`);
      })
      .then(async (res) => {
        // The stream carries no request echo; the persisted gallery does.
        const persisted = await client.gallery(res.gallery_id);
        lastEcho = persisted.request ?? null;
        say(`gallery ${res.gallery_id}: ${res.entries.length} images (seed ${res.seed})`);
      })
      .catch((err) => {
        const detail = err instanceof ServiceError ? `${err.code}: ${err.detail}` : String(err);
        say(`generation failed — ${detail}`, true);
      })
      .finally(() => {
        generateBtn.disabled = false;
      });
  });

  client
    .health()
    .then((h) =>
      say(
        h.status === "ready"
          ? `service ready (model ${h.model_hash?.slice(0, 12)}…)`
          : "service has no model loaded",
        h.status !== "ready",
      ),
    )
    .catch(() => say(`service unreachable at ${client.baseUrl}`, true));

  syncControls();
}

main();
