/**
 * DOM wiring for the wireframe editor: a square canvas of absolutely
 * positioned element boxes. Dragging on empty space sketches a new box (any
 * jitter snaps away), dragging a box moves it, corner handles resize, a
 * per-box select retypes, and in flow mode clicks toggle order membership.
 *
 * All geometry/order logic lives in state.ts; this file only translates
 * pointer events and re-renders.
 */

import { ELEMENT_CLASSES, ElementClass } from "./schema.js";
import {
  EditorState,
  addElement,
  deleteElement,
  flowBadges,
  moveElement,
  resizeElement,
  retypeElement,
  toggleFlow,
} from "./state.js";
import { Point, strokeToBox } from "./snap.js";

export type EditorMode = "edit" | "flow";

interface DragContext {
  kind: "sketch" | "move" | "resize";
  elementId?: number;
  corner?: "nw" | "ne" | "sw" | "se";
  stroke: Point[];
  startX: number;
  startY: number;
  origX0?: number;
  origY0?: number;
  moved: boolean;
}

export class WireframeEditor {
  mode: EditorMode = "edit";
  private drag: DragContext | null = null;
  private sketchPreview: HTMLDivElement;

  constructor(
    private root: HTMLElement,
    private state: EditorState,
    private onChange: () => void,
    private onReject: (reason: string) => void,
  ) {
    root.classList.add("editor-canvas");
    this.sketchPreview = document.createElement("div");
    this.sketchPreview.className = "sketch-preview";
    root.addEventListener("pointerdown", (e) => this.pointerDown(e));
    root.addEventListener("pointermove", (e) => this.pointerMove(e));
    root.addEventListener("pointerup", (e) => this.pointerUp(e));
    this.render();
  }

  setMode(mode: EditorMode): void {
    this.mode = mode;
    this.render();
  }

  /** Pointer position in canvas units [0, 1]. */
  private unit(e: PointerEvent): Point {
    const r = this.root.getBoundingClientRect();
    return {
      x: Math.min(1, Math.max(0, (e.clientX - r.left) / r.width)),
      y: Math.min(1, Math.max(0, (e.clientY - r.top) / r.height)),
    };
  }

  private pointerDown(e: PointerEvent): void {
    const target = e.target as HTMLElement;
    const p = this.unit(e);
    this.root.setPointerCapture(e.pointerId);

    const handle = target.closest<HTMLElement>(".resize-handle");
    const boxEl = target.closest<HTMLElement>(".wf-box");
    if (handle && boxEl && this.mode === "edit") {
      this.drag = {
        kind: "resize",
        elementId: Number(boxEl.dataset.id),
        corner: handle.dataset.corner as DragContext["corner"],
        stroke: [],
        startX: p.x,
        startY: p.y,
        moved: false,
      };
      return;
    }
    if (boxEl) {
      const id = Number(boxEl.dataset.id);
      if (this.mode === "flow") {
        toggleFlow(this.state, id);
        this.onChange();
        this.render();
        return;
      }
      const el = this.state.elements.find((el) => el.id === id)!;
      this.drag = {
        kind: "move",
        elementId: id,
        stroke: [],
        startX: p.x,
        startY: p.y,
        origX0: el.x0,
        origY0: el.y0,
        moved: false,
      };
      return;
    }
    if (this.mode === "edit") {
      this.drag = { kind: "sketch", stroke: [p], startX: p.x, startY: p.y, moved: false };
      this.root.appendChild(this.sketchPreview);
    }
  }

  private pointerMove(e: PointerEvent): void {
    if (!this.drag) return;
    const p = this.unit(e);
    const d = this.drag;
    d.moved = d.moved || Math.abs(p.x - d.startX) + Math.abs(p.y - d.startY) > 0.004;

    if (d.kind === "sketch") {
      d.stroke.push(p);
      const box = strokeToBox(d.stroke);
      this.sketchPreview.style.display = box ? "block" : "none";
      if (box) {
        this.place(this.sketchPreview, box.x0, box.y0, box.x1, box.y1);
      }
    } else if (d.kind === "move" && d.elementId !== undefined) {
      const el = this.state.elements.find((el) => el.id === d.elementId)!;
      const wantX0 = d.origX0! + (p.x - d.startX);
      const wantY0 = d.origY0! + (p.y - d.startY);
      moveElement(this.state, d.elementId, wantX0 - el.x0, wantY0 - el.y0);
      this.render();
    } else if (d.kind === "resize" && d.elementId !== undefined && d.corner) {
      resizeElement(this.state, d.elementId, d.corner, p.x, p.y);
      this.render();
    }
  }

  private pointerUp(e: PointerEvent): void {
    const d = this.drag;
    this.drag = null;
    this.sketchPreview.remove();
    if (!d) return;
    if (d.kind === "sketch") {
      d.stroke.push(this.unit(e));
      const box = strokeToBox(d.stroke);
      if (!d.moved) return; // plain click on empty space: no box
      if (box === null) {
        this.onReject("box too small: it snapped to zero area on the 1/32 grid");
        return;
      }
      if (addElement(this.state, box) === null) {
        this.onReject("wireframe is full (12 elements) or box snapped to zero area");
        return;
      }
    }
    this.onChange();
    this.render();
  }

  private place(node: HTMLElement, x0: number, y0: number, x1: number, y1: number): void {
    node.style.left = `${x0 * 100}%`;
    node.style.top = `${y0 * 100}%`;
    node.style.width = `${(x1 - x0) * 100}%`;
    node.style.height = `${(y1 - y0) * 100}%`;
  }

  render(): void {
    this.root.querySelectorAll(".wf-box").forEach((n) => n.remove());
    const badges = flowBadges(this.state);
    for (const el of this.state.elements) {
      const box = document.createElement("div");
      box.className = `wf-box cls-${el.cls.toLowerCase()}`;
      box.dataset.id = String(el.id);
      this.place(box, el.x0, el.y0, el.x1, el.y1);

      const label = document.createElement("span");
      label.className = "wf-label";
      label.textContent = el.cls;
      box.appendChild(label);

      const badge = badges.get(el.id);
      if (badge !== undefined) {
        const b = document.createElement("span");
        b.className = "flow-badge";
        b.textContent = String(badge);
        box.appendChild(b);
      }

      if (this.mode === "edit") {
        for (const corner of ["nw", "ne", "sw", "se"] as const) {
          const h = document.createElement("div");
          h.className = `resize-handle handle-${corner}`;
          h.dataset.corner = corner;
          box.appendChild(h);
        }
        const tools = document.createElement("div");
        tools.className = "wf-tools";
        const select = document.createElement("select");
        for (const cls of ELEMENT_CLASSES) {
          const opt = document.createElement("option");
          opt.value = cls;
          opt.textContent = cls;
          opt.selected = cls === el.cls;
          select.appendChild(opt);
        }
        select.addEventListener("pointerdown", (e) => e.stopPropagation());
        select.addEventListener("change", () => {
          retypeElement(this.state, el.id, select.value as ElementClass);
          this.onChange();
          this.render();
        });
        const del = document.createElement("button");
        del.textContent = "x";
        del.title = "delete element";
        del.addEventListener("pointerdown", (e) => e.stopPropagation());
        del.addEventListener("click", () => {
          deleteElement(this.state, el.id);
          this.onChange();
          this.render();
        });
        tools.append(select, del);
        box.appendChild(tools);
      }
      this.root.appendChild(box);
    }
  }
}
