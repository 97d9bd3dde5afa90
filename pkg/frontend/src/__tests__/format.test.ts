import { describe, expect, it } from "vitest";

import { equalToDisplayPrecision, formatSig12 } from "../format";

describe("formatSig12", () => {
  it("truncates instead of rounding", () => {
    // 0.5998509109755138: digit 13 is 5, rounding would bump digit 12.
    expect(formatSig12(0.5998509109755138)).toBe("0.599850910975");
    // 1.0986122886681098: digit 13 is 8, rounding would give ...867.
    expect(formatSig12(1.0986122886681098)).toBe("1.09861228866");
  });

  it("renders plain decimals in the readable range", () => {
    expect(formatSig12(0)).toBe("0");
    expect(formatSig12(1)).toBe("1");
    expect(formatSig12(0.5)).toBe("0.5");
    expect(formatSig12(1000)).toBe("1000");
    expect(formatSig12(-0.25)).toBe("-0.25");
  });

  it("falls back to exponential for extreme magnitudes", () => {
    expect(formatSig12(2.9802322387695312e-8)).toBe("2.98023223876e-8");
    expect(formatSig12(1e15)).toBe("1e+15");
  });

  it("defines display equality at 12 significant digits", () => {
    expect(equalToDisplayPrecision(1.098612288668109, 1.098612288668201)).toBe(true);
    expect(equalToDisplayPrecision(1.09861228866, 1.09861228867)).toBe(false);
  });
});
