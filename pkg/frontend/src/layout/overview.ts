/**
 * Session overview layout: one row per trainee, colored bars for level
 * intervals, dots for user events, vertical ticks at the expected level
 * duration. A single linear time-to-x mapping is shared by every row, so
 * trainees who start at slightly different times keep their own offsets.
 *
 * Pure: identical payloads produce identical layouts.
 */

import type { EventDotEntry, SupervisorPayload } from "../types.js";

export interface LevelBar {
  levelId: string;
  xStart: number;
  xEnd: number;
  colorIndex: number;
  outcome: string;
}

export interface OverviewDot {
  x: number;
  kind: string;
  glyph: string;
  levelId: string | null;
}

export interface TickMark {
  x: number;
  levelId: string;
}

export interface OverviewRow {
  actorId: string;
  total: number;
  currentLevelId: string | null;
  bars: LevelBar[];
  dots: OverviewDot[];
  ticks: TickMark[];
}

export interface OverviewLayout {
  width: number;
  rowHeight: number;
  axisStart: number;
  axisEnd: number;
  rows: OverviewRow[];
}

export const ROW_HEIGHT = 28;

export const EVENT_GLYPHS: Record<string, string> = {
  LevelStarted: "play",
  LevelCompleted: "flag",
  LevelSkipped: "skip",
  HintTaken: "bulb",
  FlagSubmitted: "cross",
  SolutionDisplayed: "eye",
  CommandEntered: "terminal",
  MessageSent: "mail",
  QuestionnaireAnswered: "form",
};

export function buildOverviewLayout(payload: SupervisorPayload,
                                    viewportWidth: number): OverviewLayout {
  const axisStart = payload.run.start_time;
  const axisEnd = resolveAxisEnd(payload, axisStart);
  const span = Math.max(axisEnd - axisStart, 1e-9);
  const x = (t: number) => clamp((t - axisStart) / span, 0, 1) * viewportWidth;

  const colorOf = levelColorMap(payload);
  const rows: OverviewRow[] = payload.rows.map((row) => {
    const bars: LevelBar[] = [...row.intervals]
      .sort((a, b) => a.start - b.start || a.level_id.localeCompare(b.level_id))
      .map((iv) => ({
        levelId: iv.level_id,
        xStart: x(iv.start),
        xEnd: x(iv.end ?? axisEnd),
        colorIndex: colorOf.get(iv.level_id) ?? 0,
        outcome: iv.outcome,
      }));
    const dots: OverviewDot[] = row.event_dots.map((d: EventDotEntry) => ({
      x: x(d.timestamp),
      kind: d.kind,
      glyph: EVENT_GLYPHS[d.kind] ?? "dot",
      levelId: d.level_id,
    }));
    const ticks: TickMark[] = row.intervals
      .filter((iv) => iv.expected_end != null)
      .map((iv) => ({ x: x(iv.expected_end as number), levelId: iv.level_id }));
    return {
      actorId: row.actor_id,
      total: row.total,
      currentLevelId: row.current_level_id,
      bars,
      dots,
      ticks,
    };
  });

  return { width: viewportWidth, rowHeight: ROW_HEIGHT, axisStart, axisEnd, rows };
}

function resolveAxisEnd(payload: SupervisorPayload, axisStart: number): number {
  if (payload.run.end_time != null) return payload.run.end_time;
  let latest = axisStart;
  for (const row of payload.rows) {
    for (const dot of row.event_dots) latest = Math.max(latest, dot.timestamp);
    for (const iv of row.intervals) latest = Math.max(latest, iv.end ?? iv.start);
  }
  return latest > axisStart ? latest : axisStart + 1;
}

/** Same level, same color across all rows; index follows play order. */
function levelColorMap(payload: SupervisorPayload): Map<string, number> {
  const firstSeen = new Map<string, number>();
  for (const row of payload.rows) {
    for (const iv of row.intervals) {
      const prev = firstSeen.get(iv.level_id);
      if (prev === undefined || iv.start < prev) firstSeen.set(iv.level_id, iv.start);
    }
  }
  const ordered = [...firstSeen.entries()].sort((a, b) => a[1] - b[1]);
  return new Map(ordered.map(([levelId], i) => [levelId, i]));
}

function clamp(v: number, lo: number, hi: number): number {
  return Math.min(Math.max(v, lo), hi);
}
