/**
 * Gallery grid: one tile per generated entry, each with its scanpath overlay
 * (toggleable) and a pin button that feeds the tile's seed + conditions back
 * into the editor. A tile that fails to render reports inline instead of
 * taking down the grid.
 */

import { overlayGeometry, toSvg } from "./overlay.js";
import { GalleryEntry } from "./schema.js";

export const TILE_SIZE = 192;

export interface GalleryCallbacks {
  onPin: (entry: GalleryEntry) => void;
}

export class GalleryView {
  overlayOn = true;
  private entries: GalleryEntry[] = [];

  constructor(
    private root: HTMLElement,
    private callbacks: GalleryCallbacks,
  ) {
    root.classList.add("gallery-grid");
  }

  clear(): void {
    this.entries = [];
    this.root.replaceChildren();
  }

  setEntries(entries: GalleryEntry[]): void {
    this.clear();
    for (const e of entries) this.addEntry(e);
  }

  /** Streaming path: append one tile as soon as its entry arrives. */
  addEntry(entry: GalleryEntry): void {
    this.entries.push(entry);
    try {
      this.root.appendChild(this.buildTile(entry));
    } catch (err) {
      const broken = document.createElement("div");
      broken.className = "tile tile-error";
      broken.textContent = `tile ${entry.id} failed: ${String(err)}`;
      this.root.appendChild(broken);
    }
  }

  setOverlay(on: boolean): void {
    this.overlayOn = on;
    this.root
      .querySelectorAll<HTMLElement>(".tile-overlay")
      .forEach((n) => (n.style.display = on ? "block" : "none"));
  }

  private buildTile(entry: GalleryEntry): HTMLElement {
    const tile = document.createElement("figure");
    tile.className = "tile";
    tile.dataset.entryId = entry.id;

    const img = document.createElement("img");
    img.width = TILE_SIZE;
    img.height = TILE_SIZE;
    img.alt = `generated GUI ${entry.id}`;
    img.src = `data:image/png;base64,${entry.png_base64}`;
    tile.appendChild(img);

    const overlay = document.createElement("div");
    overlay.className = "tile-overlay";
    overlay.innerHTML = toSvg(overlayGeometry(entry.scanpath, TILE_SIZE), TILE_SIZE);
    overlay.style.display = this.overlayOn ? "block" : "none";
    tile.appendChild(overlay);

    const caption = document.createElement("figcaption");
    const label = document.createElement("span");
    label.textContent = `seed ${entry.seed}`;
    const pin = document.createElement("button");
    pin.textContent = "pin";
    pin.title = "copy this tile's seed and conditions into the editor";
    pin.addEventListener("click", () => this.callbacks.onPin(entry));
    caption.append(label, pin);
    tile.appendChild(caption);
    return tile;
  }
}
