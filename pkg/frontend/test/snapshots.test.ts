/**
 * Layout snapshot suite over five seeded fixture runs exported from the
 * gateway. The snapshot files under __snapshots__/ are the committed
 * references; any pixel-coordinate drift fails the suite.
 */

import { readFileSync } from "node:fs";
import { join } from "node:path";

import { describe, expect, it } from "vitest";

import { attackStyle, buildAttackPlanBoard } from "../src/layout/attackPlan.js";
import { buildTimelineLayout } from "../src/layout/feedback.js";
import { buildOverviewLayout } from "../src/layout/overview.js";
import { buildScoreboardTable } from "../src/layout/scoreboard.js";
import type { SparringPayload, SupervisorPayload } from "../src/types.js";

const SEEDS = [11, 23, 37, 53, 71];
const FIXTURES = join(__dirname, "fixtures");

function load<T>(name: string): T {
  return JSON.parse(readFileSync(join(FIXTURES, name), "utf-8")) as T;
}

describe("overview layout snapshots", () => {
  for (const seed of SEEDS) {
    it(`matches the committed reference for run seed ${seed}`, () => {
      const payload = load<SupervisorPayload>(`overview-${seed}.json`);
      const layout = buildOverviewLayout(payload, 960);
      expect(layout).toMatchSnapshot();
      // structural invariants alongside the pixel snapshot
      for (const row of layout.rows) {
        for (let i = 1; i < row.bars.length; i++) {
          expect(row.bars[i].xStart + 1e-6).toBeGreaterThanOrEqual(row.bars[i - 1].xEnd);
        }
        for (const dot of row.dots) {
          expect(dot.x).toBeGreaterThanOrEqual(0);
          expect(dot.x).toBeLessThanOrEqual(layout.width);
        }
      }
    });
  }
});

describe("feedback layout snapshots", () => {
  for (const seed of SEEDS) {
    it(`matches the committed reference for run seed ${seed}`, () => {
      const fixture = load<{
        feedback: Parameters<typeof buildTimelineLayout>[0]["feedback"];
        timeline: [number, number][];
        run: { start_time: number; end_time: number };
      }>(`feedback-${seed}.json`);
      const layout = buildTimelineLayout({
        feedback: fixture.feedback,
        timeline: fixture.timeline,
        run: { run_id: `fixture-${seed}`, ...fixture.run },
      }, { width: 800, height: 300 });
      expect(layout).toMatchSnapshot();
      // invariants: polyline equals the timeline; bands sum to active time
      expect(layout.polylines[0].points.map((p) => [p.timestamp, p.total]))
        .toEqual(fixture.timeline);
      const active = fixture.feedback.per_level
        .filter((r) => r.time_spent != null)
        .reduce((acc, r) => acc + (r.time_spent as number), 0);
      const bandSum = layout.bands.reduce((acc, b) => acc + b.timeWidth, 0);
      expect(bandSum).toBeCloseTo(active, 6);
    });
  }
});

describe("attack plan board", () => {
  it("matches the committed reference for the CDX fixture", () => {
    const payload = load<SparringPayload>("attack-plan.json");
    const board = buildAttackPlanBoard(payload);
    expect(board).toMatchSnapshot();
  });

  it("verifies the style mapping for all six state/outcome combinations", () => {
    const combos: [string, string | null][] = [
      ["inactive", null], ["inactive", "failure"],
      ["ongoing", null], ["ongoing", "success"],
      ["completed", "success"], ["completed", "failure"],
    ];
    expect(combos.map(([s, o]) => attackStyle(s, o))).toEqual([
      "inactive", "inactive", "ongoing", "ongoing", "success", "defended",
    ]);
  });
});

describe("scoreboard table", () => {
  it("matches the committed reference for the CDX fixture", () => {
    const rows = load<Parameters<typeof buildScoreboardTable>[0]>("cdx-scoreboard.json");
    expect(buildScoreboardTable(rows)).toMatchSnapshot();
  });
});
