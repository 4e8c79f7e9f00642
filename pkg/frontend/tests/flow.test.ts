import { describe, expect, it } from "vitest";

import {
  addElement,
  deleteElement,
  flowBadges,
  initialState,
  orderAsIndices,
  toggleFlow,
} from "../src/state.js";

function threeElements() {
  const state = initialState();
  const a = addElement(state, { x0: 0.0, y0: 0.0, x1: 0.5, y1: 0.25 })!;
  const b = addElement(state, { x0: 0.5, y0: 0.0, x1: 1.0, y1: 0.25 })!;
  const c = addElement(state, { x0: 0.0, y0: 0.5, x1: 1.0, y1: 0.75 })!;
  return { state, a, b, c };
}

describe("flow order picker", () => {
  it("click A then B yields order [A, B]", () => {
    const { state, a, b } = threeElements();
    toggleFlow(state, a);
    toggleFlow(state, b);
    expect(state.order).toEqual([a, b]);
    expect(orderAsIndices(state)).toEqual([0, 1]);
  });

  it("re-clicking an element removes it from the order", () => {
    const { state, a, b } = threeElements();
    toggleFlow(state, a);
    expect(state.order).toEqual([a]);
    toggleFlow(state, a);
    expect(state.order).toEqual([]);
    toggleFlow(state, a);
    toggleFlow(state, b);
    toggleFlow(state, a); // second click on A removes it, B stays
    expect(state.order).toEqual([b]);
  });

  it("badges number the order 1, 2, 3, ...", () => {
    const { state, a, b, c } = threeElements();
    toggleFlow(state, c);
    toggleFlow(state, a);
    toggleFlow(state, b);
    expect(flowBadges(state)).toEqual(
      new Map([
        [c, 1],
        [a, 2],
        [b, 3],
      ]),
    );
  });

  it("deleting an ordered element shrinks the order and renumbers badges", () => {
    const { state, a, b, c } = threeElements();
    toggleFlow(state, a);
    toggleFlow(state, b);
    toggleFlow(state, c);
    deleteElement(state, b);
    expect(state.order).toEqual([a, c]);
    expect(flowBadges(state)).toEqual(
      new Map([
        [a, 1],
        [c, 2],
      ]),
    );
    // indices re-map onto the shrunken element list
    expect(orderAsIndices(state)).toEqual([0, 1]);
  });

  it("unknown element ids are rejected", () => {
    const { state } = threeElements();
    expect(() => toggleFlow(state, 999)).toThrow(/no element/);
  });
});
