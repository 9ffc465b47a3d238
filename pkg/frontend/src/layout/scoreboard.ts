/**
 * CDX scoreboard table model: a restricted table view with the total and
 * per-category columns for every team, served live during the exercise.
 */

import type { ScoreboardRow } from "../types.js";

export interface ScoreboardTable {
  categories: string[];
  rows: { subject: string; total: number; cells: number[] }[];
}

export function buildScoreboardTable(rows: ScoreboardRow[]): ScoreboardTable {
  const categories = [...new Set(rows.flatMap((r) => Object.keys(r.per_category)))].sort();
  return {
    categories,
    rows: rows.map((r) => ({
      subject: r.subject,
      total: r.total,
      cells: categories.map((c) => r.per_category[c] ?? 0),
    })),
  };
}
