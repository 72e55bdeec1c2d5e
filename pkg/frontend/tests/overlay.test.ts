import { describe, expect, it } from "vitest";

import { frameIndexAt, scaleBox } from "../src/overlay.js";

describe("frameIndexAt", () => {
  it("maps t=0 to the first frame", () => {
    expect(frameIndexAt(0, 25, 74)).toBe(0);
  });

  it("floors t * fps", () => {
    expect(frameIndexAt(0.999, 25, 74)).toBe(24);
    expect(frameIndexAt(1.0, 25, 74)).toBe(25);
  });

  it("returns null past the clip end", () => {
    expect(frameIndexAt(74 / 25, 25, 74)).toBeNull();
    expect(frameIndexAt(1e6, 25, 74)).toBeNull();
  });

  it("returns null before the clip and for junk input", () => {
    expect(frameIndexAt(-0.01, 25, 74)).toBeNull();
    expect(frameIndexAt(Number.NaN, 25, 74)).toBeNull();
    expect(frameIndexAt(0.5, 25, 0)).toBeNull();
  });

  it("clamps the last in-clip instant to the final frame", () => {
    // Just inside the clip but rounding up against its end.
    expect(frameIndexAt(73.99 / 25, 25, 74)).toBe(73);
  });
});

describe("scaleBox", () => {
  it("doubles coordinates at 2x display scaling", () => {
    expect(scaleBox([20, 10, 44, 38], 2, 2)).toEqual([40, 20, 88, 76]);
  });

  it("scales axes independently", () => {
    expect(scaleBox([10, 10, 20, 20], 1.5, 0.5)).toEqual([15, 5, 30, 10]);
  });
});
