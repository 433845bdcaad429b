/**
 * Color coding of fulfillment values.
 *
 * Each constraint kind owns one sequential scale: white at f = 1
 * (fulfilled), darkening toward the hue's deep end as f drops. All six
 * scales share the same lightness ramp so a 30% shortfall in glare reads
 * exactly as strong as a 30% shortfall in illuminance. The two uniformity
 * measures get neighboring green hues on purpose; they express close
 * cousins of the same idea.
 *
 * Comparison mode replaces the hue scales with a single neutral gray ramp
 * fed directly by the server's diff lightness values.
 */

export const KINDS = [
  "color_temperature",
  "cri",
  "ugr",
  "average_lux",
  "uniformity_min_avg",
  "uniformity_min_max",
] as const;

export type Kind = (typeof KINDS)[number];

export const KIND_LABELS: Record<Kind, string> = {
  color_temperature: "Color temp",
  cri: "CRI",
  ugr: "Glare",
  average_lux: "Avg lux",
  uniformity_min_avg: "Unif min/avg",
  uniformity_min_max: "Unif min/max",
};

const HUES: Record<Kind, number> = {
  color_temperature: 30, // amber
  cri: 300, // magenta
  ugr: 0, // red
  average_lux: 215, // blue
  uniformity_min_avg: 145, // green
  uniformity_min_max: 165, // teal green, deliberately close to min/avg
};

const SATURATION = 0.62;

// f = 0 bottoms out here instead of black so the hue stays readable
const FLOOR_LIGHTNESS = 0.28;

export function clamp01(v: number): number {
  return Math.min(1, Math.max(0, v));
}

/** Shared lightness ramp: the same f gives the same lightness in every hue. */
export function fulfillmentLightness(f: number): number {
  return FLOOR_LIGHTNESS + (1 - FLOOR_LIGHTNESS) * clamp01(f);
}

function hslToRgb(h: number, s: number, l: number): [number, number, number] {
  const c = (1 - Math.abs(2 * l - 1)) * s;
  const hp = (((h % 360) + 360) % 360) / 60;
  const x = c * (1 - Math.abs((hp % 2) - 1));
  let rgb: [number, number, number];
  if (hp < 1) rgb = [c, x, 0];
  else if (hp < 2) rgb = [x, c, 0];
  else if (hp < 3) rgb = [0, c, x];
  else if (hp < 4) rgb = [0, x, c];
  else if (hp < 5) rgb = [x, 0, c];
  else rgb = [c, 0, x];
  const m = l - c / 2;
  return [rgb[0] + m, rgb[1] + m, rgb[2] + m];
}

function toHex(rgb: [number, number, number]): string {
  const parts = rgb.map((v) =>
    Math.round(clamp01(v) * 255)
      .toString(16)
      .padStart(2, "0"),
  );
  return "#" + parts.join("");
}

/** Fill color for a fulfillment value in the normal (hue) presentation. */
export function fulfillmentColor(f: number, kind: string): string {
  const hue = HUES[kind as Kind] ?? 0;
  return toHex(hslToRgb(hue, SATURATION, fulfillmentLightness(f)));
}

/** Saturated swatch of a kind's hue, for slider labels and legends. */
export function kindSwatch(kind: string): string {
  const hue = HUES[kind as Kind] ?? 0;
  return toHex(hslToRgb(hue, SATURATION, 0.45));
}

/**
 * Neutral gray for a server-provided diff lightness in [0, 1].
 *
 * The mapping is the identity on the lightness channel: 0.5 is medium
 * gray, 1 white, 0 black, so rendered pixels equal the payload values.
 */
export function grayscale(lightness: number): string {
  const v = Math.round(clamp01(lightness) * 255);
  return `rgb(${v}, ${v}, ${v})`;
}

export type ComparisonMode = "off" | "global" | "local";

/**
 * The one color rule of the client: a pure function of value, kind, and
 * presentation mode. In comparison modes the value is the diff lightness;
 * otherwise it is the fulfillment.
 */
export function cellColor(value: number, kind: string, mode: ComparisonMode): string {
  if (mode === "off") return fulfillmentColor(value, kind);
  return grayscale(value);
}

/** Parse "rgb(r, g, b)" or "#rrggbb" into channel values 0..255. */
export function parseColor(text: string): [number, number, number] {
  const rgb = text.match(/^rgb\((\d+),\s*(\d+),\s*(\d+)\)$/);
  if (rgb) return [Number(rgb[1]), Number(rgb[2]), Number(rgb[3])];
  const hex = text.match(/^#([0-9a-f]{2})([0-9a-f]{2})([0-9a-f]{2})$/i);
  if (hex) return [parseInt(hex[1], 16), parseInt(hex[2], 16), parseInt(hex[3], 16)];
  throw new Error(`unparseable color ${text}`);
}
