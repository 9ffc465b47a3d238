/** Wire types mirroring the gateway's JSON payloads. */

export type Role = "trainee" | "sparring_partner" | "supervisor" | "operator";

export interface RunMeta {
  run_id: string;
  start_time: number;
  end_time: number | null;
}

export interface IntervalEntry {
  level_id: string;
  start: number;
  end: number | null;
  outcome: "completed" | "skipped" | "in_progress";
  expected_end?: number | null;
}

export interface EventDotEntry {
  timestamp: number;
  kind: string;
  level_id: string | null;
}

export interface OverviewRowEntry {
  actor_id: string;
  team_id: string | null;
  current_level_id: string | null;
  levels_completed: number;
  levels_skipped: number;
  hints_taken: number;
  wrong_flags: number;
  total: number;
  intervals: IntervalEntry[];
  event_dots: EventDotEntry[];
}

export interface AlertEntry {
  actor_id: string;
  level_id: string;
  kind: "stuck" | "flag_bruteforce" | "about_to_quit";
  evidence: string;
  raised_at: number;
}

export interface ScoreboardRow {
  subject: string;
  total: number;
  per_category: Record<string, number>;
}

export interface SupervisorPayload {
  run: RunMeta;
  rows: OverviewRowEntry[];
  alerts: AlertEntry[];
  scoreboard: ScoreboardRow[];
}

export interface AttackPlanEntryView {
  attack_id: string;
  attack_type: string;
  target: string;
  scheduled_offset: number;
  penalty_points: number;
  details: string;
  runtime_state: "inactive" | "ongoing" | "completed";
  outcome: "success" | "failure" | null;
  comments: string[];
}

export interface SparringPayload {
  attack_plan: AttackPlanEntryView[];
}

export interface TopologyNodeView {
  node_id: string;
  role_glyph: string;
  down: boolean;
  services: { service_id: string; name: string; status: string }[];
  vulnerabilities: string[];
}

export interface TraineePayload {
  actor_id: string;
  current_level: { level_id: string; title: string; task_text: string } | null;
  hints_taken: { level_id: string; hint_id: string; text: string; penalty_points: number }[];
  solutions_displayed: { level_id: string; solution_text: string }[];
  intervals: IntervalEntry[];
  timeline: [number, number][];
  scoreboard_lite: { rank: number | null; total: number; cohort_size: number };
  messages: { from: string; text: string; timestamp: number }[];
  topology: { nodes: TopologyNodeView[]; links: [string, string][] };
}

export interface FeedbackLevelRow {
  level_id: string;
  time_spent: number | null;
  hints_taken: number;
  wrong_flags: number;
  score_delta: number;
  outcome: string;
}

export interface FeedbackSummaryView {
  actor_id: string;
  subject: string;
  total_score: number;
  rank: number;
  cohort_size: number;
  per_level: FeedbackLevelRow[];
  cohort_stats: { level_id: string; slowest_time: number; mean_time: number }[];
}

export interface RefreshNotice {
  seq?: number;
  timestamp?: number;
  channels?: [string, string][];
  closed?: boolean;
}
