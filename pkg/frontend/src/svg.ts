/**
 * Minimal SVG line-chart builder: log-scaled x axis, one line per series,
 * optional shaded band of plus/minus two standard errors around each line.
 * No drawing dependency; the output is a self-contained SVG document.
 */

export interface SeriesPoint {
  t: number;
  y: number;
  se: number | null;
}

export interface Series {
  label: string;
  points: SeriesPoint[];
}

export interface ChartSpec {
  title: string;
  xLabel: string;
  yLabel: string;
  series: Series[];
  note?: string;
}

const WIDTH = 860;
const HEIGHT = 520;
const MARGIN = { top: 48, right: 24, bottom: 56, left: 72 };

export const PALETTE = [
  "#4269d0",
  "#efb118",
  "#ff725c",
  "#6cc5b0",
  "#3ca951",
  "#ff8ab7",
  "#a463f2",
  "#97bbf5",
  "#9c6b4e",
  "#9498a0",
];

function esc(text: string): string {
  return text
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");
}

/** Round-numbered tick positions covering [lo, hi]. */
export function niceTicks(lo: number, hi: number, count: number): number[] {
  if (!(hi > lo)) {
    const pad = Math.max(Math.abs(lo) * 0.1, 0.5);
    return niceTicks(lo - pad, lo + pad, count);
  }
  const span = hi - lo;
  const step0 = Math.pow(10, Math.floor(Math.log10(span / count)));
  let step = step0;
  for (const mult of [1, 2, 5, 10]) {
    step = step0 * mult;
    if (span / step <= count) {
      break;
    }
  }
  const ticks: number[] = [];
  for (let v = Math.ceil(lo / step) * step; v <= hi + step * 1e-9; v += step) {
    ticks.push(Math.abs(v) < step * 1e-9 ? 0 : v);
  }
  return ticks;
}

function decadeLabel(exp: number): string {
  if (exp <= 3) {
    return String(Math.pow(10, exp));
  }
  return `1e${exp}`;
}

function fmt(v: number): string {
  return Number(v.toFixed(6)).toString();
}

export function buildChart(spec: ChartSpec): string {
  if (spec.series.length === 0 || spec.series.every((s) => s.points.length === 0)) {
    throw new Error("chart needs at least one non-empty series");
  }
  const innerW = WIDTH - MARGIN.left - MARGIN.right;
  const innerH = HEIGHT - MARGIN.top - MARGIN.bottom;

  let tMin = Infinity;
  let tMax = -Infinity;
  let yMin = Infinity;
  let yMax = -Infinity;
  for (const s of spec.series) {
    for (const p of s.points) {
      tMin = Math.min(tMin, p.t);
      tMax = Math.max(tMax, p.t);
      const half = p.se === null ? 0 : 2 * p.se;
      yMin = Math.min(yMin, p.y - half);
      yMax = Math.max(yMax, p.y + half);
    }
  }
  let lx0 = Math.log10(tMin);
  let lx1 = Math.log10(tMax);
  if (lx1 - lx0 < 1e-9) {
    // a single checkpoint still deserves a readable axis
    lx0 -= 0.5;
    lx1 += 0.5;
  }
  if (yMax - yMin < 1e-9) {
    yMin -= 0.5;
    yMax += 0.5;
  }
  const yPad = (yMax - yMin) * 0.05;
  yMin -= yPad;
  yMax += yPad;

  const x = (t: number) => MARGIN.left + ((Math.log10(t) - lx0) / (lx1 - lx0)) * innerW;
  const y = (v: number) => MARGIN.top + (1 - (v - yMin) / (yMax - yMin)) * innerH;

  const parts: string[] = [];
  parts.push(
    `<svg xmlns="http://www.w3.org/2000/svg" width="${WIDTH}" height="${HEIGHT}" ` +
      `viewBox="0 0 ${WIDTH} ${HEIGHT}" font-family="sans-serif" font-size="13">`,
  );
  if (spec.note) {
    parts.push(`<desc>${esc(spec.note)}</desc>`);
  }
  parts.push(`<rect width="${WIDTH}" height="${HEIGHT}" fill="white"/>`);
  parts.push(
    `<text x="${MARGIN.left}" y="24" font-size="16" font-weight="bold">${esc(spec.title)}</text>`,
  );

  const axisColor = "#444";
  const gridColor = "#ddd";

  const firstExp = Math.ceil(lx0 - 1e-9);
  const lastExp = Math.floor(lx1 + 1e-9);
  for (let exp = firstExp; exp <= lastExp; exp++) {
    const px = x(Math.pow(10, exp));
    parts.push(
      `<line x1="${fmt(px)}" y1="${MARGIN.top}" x2="${fmt(px)}" ` +
        `y2="${MARGIN.top + innerH}" stroke="${gridColor}"/>`,
    );
    parts.push(
      `<text x="${fmt(px)}" y="${MARGIN.top + innerH + 20}" text-anchor="middle" ` +
        `fill="${axisColor}">${decadeLabel(exp)}</text>`,
    );
  }
  for (const tick of niceTicks(yMin, yMax, 6)) {
    const py = y(tick);
    parts.push(
      `<line x1="${MARGIN.left}" y1="${fmt(py)}" x2="${MARGIN.left + innerW}" ` +
        `y2="${fmt(py)}" stroke="${gridColor}"/>`,
    );
    parts.push(
      `<text x="${MARGIN.left - 8}" y="${fmt(py + 4)}" text-anchor="end" ` +
        `fill="${axisColor}">${fmt(tick)}</text>`,
    );
  }
  parts.push(
    `<rect x="${MARGIN.left}" y="${MARGIN.top}" width="${innerW}" height="${innerH}" ` +
      `fill="none" stroke="${axisColor}"/>`,
  );
  parts.push(
    `<text x="${MARGIN.left + innerW / 2}" y="${HEIGHT - 12}" text-anchor="middle">` +
      `${esc(spec.xLabel)}</text>`,
  );
  parts.push(
    `<text x="18" y="${MARGIN.top + innerH / 2}" text-anchor="middle" ` +
      `transform="rotate(-90 18 ${MARGIN.top + innerH / 2})">${esc(spec.yLabel)}</text>`,
  );

  spec.series.forEach((series, idx) => {
    const color = PALETTE[idx % PALETTE.length];
    const pts = series.points;
    const banded = pts.filter((p) => p.se !== null);
    if (banded.length > 1) {
      const upper = banded.map((p) => `${fmt(x(p.t))},${fmt(y(p.y + 2 * (p.se as number)))}`);
      const lower = banded
        .slice()
        .reverse()
        .map((p) => `${fmt(x(p.t))},${fmt(y(p.y - 2 * (p.se as number)))}`);
      parts.push(
        `<polygon class="band" points="${upper.concat(lower).join(" ")}" ` +
          `fill="${color}" fill-opacity="0.18" stroke="none"/>`,
      );
    }
    const line = pts.map((p) => `${fmt(x(p.t))},${fmt(y(p.y))}`).join(" ");
    parts.push(
      `<polyline class="series" points="${line}" fill="none" stroke="${color}" ` +
        `stroke-width="1.8"/>`,
    );
  });

  const legendX = MARGIN.left + 12;
  spec.series.forEach((series, idx) => {
    const color = PALETTE[idx % PALETTE.length];
    const ly = MARGIN.top + 14 + idx * 18;
    parts.push(
      `<line x1="${legendX}" y1="${ly - 4}" x2="${legendX + 22}" y2="${ly - 4}" ` +
        `stroke="${color}" stroke-width="3"/>`,
    );
    parts.push(`<text x="${legendX + 28}" y="${ly}">${esc(series.label)}</text>`);
  });

  parts.push("</svg>");
  return parts.join("\n") + "\n";
}
