/** SVG renderers for the layout models. String-based so they work both in
 * the browser and under test without a DOM. */

import type { AttackPlanBoard } from "./layout/attackPlan.js";
import type { FeedbackLayout } from "./layout/feedback.js";
import type { OverviewLayout } from "./layout/overview.js";
import type { ScoreboardTable } from "./layout/scoreboard.js";

const BAR_PALETTE = ["#4e79a7", "#f28e2b", "#59a14f", "#e15759", "#76b7b2",
                     "#edc948", "#b07aa1", "#ff9da7"];

function esc(text: string): string {
  return text.replace(/&/g, "&amp;").replace(/</g, "&lt;").replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");
}

export function renderOverviewSvg(layout: OverviewLayout): string {
  const h = layout.rows.length * layout.rowHeight;
  const parts: string[] = [
    `<svg xmlns="http://www.w3.org/2000/svg" width="${layout.width + 120}" ` +
    `height="${h}" class="overview">`,
  ];
  layout.rows.forEach((row, i) => {
    const y = i * layout.rowHeight;
    parts.push(`<text x="0" y="${y + 18}" class="actor">${esc(row.actorId)}</text>`);
    parts.push(`<g transform="translate(120 ${y})">`);
    for (const bar of row.bars) {
      const color = BAR_PALETTE[bar.colorIndex % BAR_PALETTE.length];
      parts.push(
        `<rect x="${bar.xStart.toFixed(1)}" y="4" ` +
        `width="${Math.max(bar.xEnd - bar.xStart, 1).toFixed(1)}" height="16" ` +
        `fill="${color}" data-level="${esc(bar.levelId)}" ` +
        `data-outcome="${bar.outcome}"/>`);
    }
    for (const tick of row.ticks) {
      parts.push(`<line x1="${tick.x.toFixed(1)}" y1="2" x2="${tick.x.toFixed(1)}" ` +
                 `y2="22" stroke="#333" stroke-dasharray="2,2"/>`);
    }
    for (const dot of row.dots) {
      parts.push(`<circle cx="${dot.x.toFixed(1)}" cy="12" r="3" ` +
                 `data-glyph="${dot.glyph}" class="dot-${dot.glyph}"/>`);
    }
    parts.push("</g>");
  });
  parts.push("</svg>");
  return parts.join("");
}

export function renderFeedbackSvg(layout: FeedbackLayout): string {
  const parts: string[] = [
    `<svg xmlns="http://www.w3.org/2000/svg" width="${layout.width}" ` +
    `height="${layout.height + 40}" class="feedback">`,
  ];
  for (const band of layout.bands) {
    parts.push(
      `<rect x="${band.xStart.toFixed(1)}" y="0" ` +
      `width="${(band.xEnd - band.xStart).toFixed(1)}" height="${layout.height}" ` +
      `fill="${band.stripeIndex ? "#f2f2f2" : "#e0e8f0"}" ` +
      `data-level="${esc(band.levelId)}"/>`);
  }
  layout.polylines.forEach((line, i) => {
    const pts = line.points.map((p) => `${p.x.toFixed(1)},${p.y.toFixed(1)}`).join(" ");
    parts.push(`<polyline points="${pts}" fill="none" ` +
               `stroke="${BAR_PALETTE[i % BAR_PALETTE.length]}" stroke-width="2" ` +
               `data-actor="${esc(line.actorId)}"/>`);
    for (const dot of line.dots) {
      parts.push(`<circle cx="${dot.x.toFixed(1)}" cy="${dot.y.toFixed(1)}" r="4" ` +
                 `class="dot-${dot.kind}" data-delta="${dot.delta}"/>`);
    }
  });
  parts.push("</svg>");
  return parts.join("");
}

export function renderAttackBoardHtml(board: AttackPlanBoard): string {
  const blocks = board.blocks.map((b) =>
    `<div class="attack-block attack-${b.style}" style="background:${b.color}" ` +
    `data-attack="${esc(b.attackId)}" title="${esc(b.details)}">` +
    `<span class="label">${esc(b.label)}</span>` +
    `<span class="target">${esc(b.target)}</span>` +
    `</div>`);
  return `<div class="attack-board">${blocks.join("")}</div>`;
}

export function renderScoreboardHtml(table: ScoreboardTable): string {
  const head = ["team", "total", ...table.categories]
    .map((c) => `<th>${esc(c)}</th>`).join("");
  const rows = table.rows.map((r) => {
    const cells = r.cells.map((v) => `<td>${v}</td>`).join("");
    return `<tr><td>${esc(r.subject)}</td><td class="total">${r.total}</td>${cells}</tr>`;
  }).join("");
  return `<table class="scoreboard"><thead><tr>${head}</tr></thead>` +
         `<tbody>${rows}</tbody></table>`;
}
