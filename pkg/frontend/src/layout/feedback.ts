/**
 * Feedback dashboard layout. Left: per-level score bars scaled so the
 * full width equals the slowest trainee's time on that level, with a
 * marker at the cohort mean. Right: score-development polyline over the
 * session, striped bands whose widths are the time spent per level, and
 * a dot per score change annotated with its delta. Supervisors can add
 * overlay timelines of other trainees onto the same axes.
 */

import type { FeedbackSummaryView, RunMeta } from "../types.js";

export class RunStillOpenError extends Error {}

export interface FeedbackInput {
  feedback: FeedbackSummaryView;
  timeline: [number, number][];
  run: RunMeta;
}

export interface FeedbackOptions {
  width?: number;
  height?: number;
  leftWidth?: number;
  overlays?: { actorId: string; timeline: [number, number][] }[];
}

export interface ScoreBar {
  levelId: string;
  scoreDelta: number;
  length: number;        // px; full leftWidth = slowest trainee's time
  meanMarker: number;    // px position of the cohort mean
  outcome: string;
}

export interface TimeBand {
  levelId: string;
  timeWidth: number;     // seconds spent in the level
  xStart: number;        // px, bands laid back to back over active time
  xEnd: number;
  stripeIndex: number;
}

export interface PolylinePoint {
  x: number;
  y: number;
  timestamp: number;
  total: number;
}

export interface ScoreDot extends PolylinePoint {
  delta: number;
  kind: "award" | "penalty";
}

export interface Polyline {
  actorId: string;
  points: PolylinePoint[];
  dots: ScoreDot[];
}

export interface FeedbackLayout {
  width: number;
  height: number;
  axisStart: number;
  axisEnd: number;
  scoreMin: number;
  scoreMax: number;
  leftBars: ScoreBar[];
  bands: TimeBand[];
  totalActiveTime: number;
  polylines: Polyline[];
}

export function buildTimelineLayout(input: FeedbackInput,
                                    options: FeedbackOptions = {}): FeedbackLayout {
  if (input.run.end_time == null) {
    throw new RunStillOpenError("feedback layout requires a closed run");
  }
  const width = options.width ?? 800;
  const height = options.height ?? 300;
  const leftWidth = options.leftWidth ?? 240;

  const slowest = new Map(input.feedback.cohort_stats.map(
    (s) => [s.level_id, s] as const));
  const leftBars: ScoreBar[] = input.feedback.per_level
    .filter((row) => row.time_spent != null)
    .map((row) => {
      const cohort = slowest.get(row.level_id);
      const denom = cohort && cohort.slowest_time > 0 ? cohort.slowest_time : 1;
      return {
        levelId: row.level_id,
        scoreDelta: row.score_delta,
        length: ((row.time_spent as number) / denom) * leftWidth,
        meanMarker: ((cohort?.mean_time ?? 0) / denom) * leftWidth,
        outcome: row.outcome,
      };
    });

  const closed = input.feedback.per_level.filter((r) => r.time_spent != null);
  const totalActiveTime = closed.reduce((acc, r) => acc + (r.time_spent as number), 0);
  let cursor = 0;
  const bands: TimeBand[] = closed.map((row, i) => {
    const spent = row.time_spent as number;
    const xStart = totalActiveTime > 0 ? (cursor / totalActiveTime) * width : 0;
    cursor += spent;
    const xEnd = totalActiveTime > 0 ? (cursor / totalActiveTime) * width : 0;
    return { levelId: row.level_id, timeWidth: spent, xStart, xEnd, stripeIndex: i % 2 };
  });

  const axisStart = input.run.start_time;
  const axisEnd = input.run.end_time;
  const series = [
    { actorId: input.feedback.actor_id, timeline: input.timeline },
    ...(options.overlays ?? []),
  ];
  let scoreMin = 0;
  let scoreMax = 0;
  for (const s of series) {
    for (const [, total] of s.timeline) {
      scoreMin = Math.min(scoreMin, total);
      scoreMax = Math.max(scoreMax, total);
    }
  }
  const span = Math.max(axisEnd - axisStart, 1e-9);
  const scoreSpan = Math.max(scoreMax - scoreMin, 1);
  const px = (t: number) => ((t - axisStart) / span) * width;
  const py = (total: number) => height - ((total - scoreMin) / scoreSpan) * height;

  const polylines: Polyline[] = series.map((s) => {
    const points: PolylinePoint[] = s.timeline.map(([t, total]) => ({
      x: px(t), y: py(total), timestamp: t, total,
    }));
    const dots: ScoreDot[] = points.map((p, i) => {
      const delta = p.total - (i > 0 ? points[i - 1].total : 0);
      return { ...p, delta, kind: delta < 0 ? "penalty" as const : "award" as const };
    });
    return { actorId: s.actorId, points, dots };
  });

  return {
    width, height, axisStart, axisEnd, scoreMin, scoreMax,
    leftBars, bands, totalActiveTime, polylines,
  };
}
