/**
 * Display formatting: 12 significant digits, truncated (never rounded), so
 * what the user reads is literally a prefix of the service's value.
 */

const SIG_DIGITS = 12;

/** Truncate a finite number to 12 significant digits of display text. */
export function formatSig12(value: number): string {
  if (!Number.isFinite(value)) {
    return String(value);
  }
  if (value === 0) {
    return "0";
  }
  const sign = value < 0 ? "-" : "";
  // toExponential(16) preserves more digits than the double holds, so
  // cutting at digit 12 is a true truncation of the underlying value.
  const [mantissa, expText] = Math.abs(value).toExponential(16).split("e");
  const digits = (mantissa ?? "0").replace(".", "").slice(0, SIG_DIGITS);
  const exponent = Number(expText);
  return sign + placeDigits(digits, exponent);
}

/** Render digit string d1 d2 ... with the decimal point after 10^exponent. */
function placeDigits(digits: string, exponent: number): string {
  const trimmed = digits.replace(/0+$/, "") || "0";
  if (exponent < -6 || exponent >= SIG_DIGITS + 3) {
    const head = trimmed.length > 1 ? `${trimmed[0]}.${trimmed.slice(1)}` : trimmed;
    return `${head}e${exponent >= 0 ? "+" : ""}${exponent}`;
  }
  if (exponent < 0) {
    return `0.${"0".repeat(-exponent - 1)}${trimmed}`;
  }
  if (exponent >= trimmed.length - 1) {
    return trimmed + "0".repeat(exponent - trimmed.length + 1);
  }
  return `${trimmed.slice(0, exponent + 1)}.${trimmed.slice(exponent + 1)}`;
}

/** True when two numbers agree after 12-significant-digit truncation. */
export function equalToDisplayPrecision(a: number, b: number): boolean {
  return formatSig12(a) === formatSig12(b);
}
