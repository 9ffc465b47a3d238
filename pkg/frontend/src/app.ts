/**
 * Browser entry point. Reads run/actor/role/token from the query string,
 * renders the role's view, and re-renders whenever the push channel (or
 * the polling fallback) says this channel changed. Score data is always
 * re-fetched from the server; there are no optimistic updates.
 */

import { GatewayClient, RunStillOpenError, noticeConcerns, submitIntervention } from "./api.js";
import { buildAttackPlanBoard } from "./layout/attackPlan.js";
import { buildTimelineLayout } from "./layout/feedback.js";
import { buildOverviewLayout } from "./layout/overview.js";
import { buildScoreboardTable } from "./layout/scoreboard.js";
import { nodeGlyphs } from "./layout/topology.js";
import {
  renderAttackBoardHtml,
  renderFeedbackSvg,
  renderOverviewSvg,
  renderScoreboardHtml,
} from "./render.js";
import type {
  FeedbackSummaryView,
  Role,
  SparringPayload,
  SupervisorPayload,
  TraineePayload,
} from "./types.js";

interface ViewResponse {
  run_id: string;
  as_of: number;
  kind: string;
  payload: unknown;
}

function param(name: string): string {
  const value = new URLSearchParams(window.location.search).get(name);
  if (!value) throw new Error(`missing query parameter '${name}'`);
  return value;
}

async function refresh(client: GatewayClient, root: HTMLElement): Promise<void> {
  const view = await client.view() as ViewResponse;
  if (view.kind === "supervisor") {
    const payload = view.payload as SupervisorPayload;
    const layout = buildOverviewLayout(payload, root.clientWidth - 140 || 800);
    const alerts = payload.alerts.map((a) =>
      `<li class="alert-${a.kind}"><b>${a.actor_id}</b> ${a.kind} on ${a.level_id}: ` +
      `${a.evidence}</li>`).join("");
    root.innerHTML =
      `<h2>Session overview</h2>${renderOverviewSvg(layout)}` +
      `<h3>Alerts</h3><ul class="alerts">${alerts || "<li>none</li>"}</ul>` +
      `<h3>Scoreboard</h3>${renderScoreboardHtml(buildScoreboardTable(payload.scoreboard))}`;
    bindIntervention(client, root, payload);
  } else if (view.kind === "sparring") {
    const payload = view.payload as SparringPayload;
    root.innerHTML = `<h2>Attack plan</h2>` +
      renderAttackBoardHtml(buildAttackPlanBoard(payload));
  } else if (view.kind === "trainee") {
    const payload = view.payload as TraineePayload;
    root.innerHTML = renderTrainee(payload);
    await appendFeedbackSection(client, root, payload);
  } else {
    root.innerHTML = `<pre>${JSON.stringify(view.payload, null, 2)}</pre>`;
  }
}

/**
 * Post-run personalized feedback: score development with a short poll
 * attached to every score-change dot. Silently absent while the run is
 * still open.
 */
async function appendFeedbackSection(client: GatewayClient, root: HTMLElement,
                                     payload: TraineePayload): Promise<void> {
  let feedback: FeedbackSummaryView;
  try {
    feedback = await client.feedback(client.actorId) as FeedbackSummaryView;
  } catch (err) {
    if (err instanceof RunStillOpenError) return;
    throw err;
  }
  const intervals = payload.intervals.filter((iv) => iv.end !== null);
  const start = intervals.length > 0
    ? Math.min(...intervals.map((iv) => iv.start))
    : payload.timeline[0]?.[0] ?? 0;
  const end = intervals.length > 0
    ? Math.max(...intervals.map((iv) => iv.end as number))
    : payload.timeline.at(-1)?.[0] ?? start + 1;
  const layout = buildTimelineLayout({
    feedback,
    timeline: payload.timeline,
    run: { run_id: client.runId, start_time: start, end_time: end },
  }, { width: root.clientWidth - 40 || 800 });
  const section = document.createElement("section");
  section.className = "feedback-section";
  section.innerHTML = `<h3>Your score development</h3>${renderFeedbackSvg(layout)}` +
    `<form class="dot-poll"><label>How did this score change feel? ` +
    `<select name="rating"><option>fair</option><option>harsh</option>` +
    `<option>confusing</option></select></label>` +
    `<button type="submit">send</button></form>`;
  const form = section.querySelector("form") as HTMLFormElement;
  let selectedDelta: number | null = null;
  section.querySelectorAll("circle[data-delta]").forEach((dot) => {
    dot.addEventListener("click", () => {
      selectedDelta = Number((dot as SVGCircleElement).dataset.delta);
    });
  });
  form.addEventListener("submit", (ev) => {
    ev.preventDefault();
    const rating = String(new FormData(form).get("rating") ?? "");
    void client.answerPoll("score-dot-poll", { delta: selectedDelta, rating });
  });
  root.appendChild(section);
}

function renderTrainee(payload: TraineePayload): string {
  const task = payload.current_level
    ? `<h2>${payload.current_level.title}</h2><p>${payload.current_level.task_text}</p>`
    : "<h2>No open level</h2>";
  const hints = payload.hints_taken.map((h) =>
    `<li>[${h.level_id}] ${h.text} (-${h.penalty_points})</li>`).join("");
  const lite = payload.scoreboard_lite;
  const messages = payload.messages.map((m) =>
    `<li><b>${m.from}:</b> ${m.text}</li>`).join("");
  const glyphs = nodeGlyphs(payload.topology.nodes).map((n) =>
    `<span class="node node-${n.glyph}${n.down ? " node-down" : ""}">` +
    `${n.nodeId}${n.badges.map((b) => ` [${b}]`).join("")}</span>`).join(" ");
  return `${task}
<h3>Your position</h3>
<p>rank ${lite.rank ?? "-"} of ${lite.cohort_size}, total ${lite.total}</p>
<h3>Hints taken</h3><ul>${hints || "<li>none</li>"}</ul>
<h3>Messages</h3><ul class="messages">${messages || "<li>none</li>"}</ul>
<h3>Network</h3><div class="topology">${glyphs}</div>`;
}

function bindIntervention(client: GatewayClient, root: HTMLElement,
                          payload: SupervisorPayload): void {
  const form = document.createElement("form");
  form.className = "intervention";
  const options = payload.rows.map((r) =>
    `<option value="${r.actor_id}">${r.actor_id}</option>`).join("");
  form.innerHTML = `<h3>Intervene</h3><select name="target">${options}</select>` +
    `<input name="note" placeholder="note to trainee"/>` +
    `<button type="submit">send</button>`;
  form.addEventListener("submit", (ev) => {
    ev.preventDefault();
    const data = new FormData(form);
    const note = String(data.get("note") ?? "");
    if (note.trim() === "") return; // client-side validation, nothing sent
    void submitIntervention(client, String(data.get("target")), note);
  });
  root.appendChild(form);
}

export function start(): void {
  const root = document.getElementById("app");
  if (root === null) throw new Error("missing #app element");
  const client = new GatewayClient(
    window.location.origin,
    param("run"),
    param("actor"),
    param("role") as Role,
    param("token"),
  );
  void refresh(client, root);
  client.subscribe((notice) => {
    if (noticeConcerns(notice, client.role, client.actorId)) {
      void refresh(client, root);
    }
  });
}

if (typeof document !== "undefined" && document.getElementById("app") !== null) {
  start();
}
