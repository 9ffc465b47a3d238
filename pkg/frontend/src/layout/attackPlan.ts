/**
 * Attack plan board: one block per scheduled attack showing the type
 * abbreviation and penalty points; clicking reveals details and
 * comments. Block style follows the runtime state and outcome: green for
 * successful attacks, red for defended ones.
 */

import type { AttackPlanEntryView, SparringPayload } from "../types.js";

export type AttackStyle = "inactive" | "ongoing" | "success" | "defended";

export const ATTACK_STYLE_COLORS: Record<AttackStyle, string> = {
  inactive: "#9e9e9e",
  ongoing: "#f9a825",
  success: "#2e7d32",
  defended: "#c62828",
};

export function attackStyle(state: string, outcome: string | null): AttackStyle {
  if (state === "completed") {
    return outcome === "success" ? "success" : "defended";
  }
  if (state === "ongoing") return "ongoing";
  return "inactive";
}

export interface AttackBlock {
  attackId: string;
  label: string;          // "DDoS -50"
  target: string;
  scheduledOffset: number;
  style: AttackStyle;
  color: string;
  details: string;
  comments: string[];
}

export interface AttackPlanBoard {
  blocks: AttackBlock[];
}

export function buildAttackPlanBoard(payload: SparringPayload): AttackPlanBoard {
  const blocks = [...payload.attack_plan]
    .sort((a, b) => a.scheduled_offset - b.scheduled_offset
      || a.attack_id.localeCompare(b.attack_id))
    .map((entry: AttackPlanEntryView) => {
      const style = attackStyle(entry.runtime_state, entry.outcome);
      return {
        attackId: entry.attack_id,
        label: `${entry.attack_type} -${entry.penalty_points}`,
        target: entry.target,
        scheduledOffset: entry.scheduled_offset,
        style,
        color: ATTACK_STYLE_COLORS[style],
        details: entry.details,
        comments: entry.comments,
      };
    });
  return { blocks };
}
