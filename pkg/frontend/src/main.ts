import { HarnessClient } from "./api.js";
import { DraftStore } from "./drafts.js";
import { assignRank, unassignRank } from "./rank.js";
import { SessionRunner, SessionState } from "./session.js";
import { render, TaskHandlers } from "./ui.js";

function param(name: string): string | null {
  return new URLSearchParams(window.location.search).get(name);
}

async function startSession(root: HTMLElement, participantId: string, studyId: string) {
  const server = param("server") ?? window.location.origin;
  const client = new HarnessClient(server);
  const session = await client.createSession(studyId, participantId);
  const runner = new SessionRunner(client, new DraftStore(localStorage, session.session_id), session);

  const paint = (state: SessionState) => render(root, state, handlers);
  const handlers: TaskHandlers = {
    onAssign: (slot, position) =>
      paint(runner.updateDraft((d) => (d.kind === "rank" ? { ...d, order: assignRank(d.order, slot, position) } : d))),
    onUnassign: (slot) =>
      paint(runner.updateDraft((d) => (d.kind === "rank" ? { ...d, order: unassignRank(d.order, slot) } : d))),
    onLikert: (constructId, slot, value) =>
      paint(
        runner.updateDraft((d) =>
          d.kind === "rate"
            ? { ...d, likert: { ...d.likert, [constructId]: { ...d.likert[constructId], [slot]: value } } }
            : d,
        ),
      ),
    onPreference: (slot) =>
      paint(runner.updateDraft((d) => (d.kind === "rate" ? { ...d, preference: slot } : d))),
    onFreeText: (text) => {
      // no repaint: the textarea already holds the text, repainting would drop focus
      runner.updateDraft((d) => ({ ...d, freeText: text }));
    },
    onSubmit: () => void runner.submit().then(paint),
  };

  paint(await runner.start());
}

function renderEntryForm(root: HTMLElement) {
  root.replaceChildren();
  const form = document.createElement("form");
  form.className = "entry";
  form.innerHTML = `
    <h1>Scent plan study</h1>
    <label>Participant code <input name="participant" required autocomplete="off"></label>
    <label>Study
      <select name="study">
        <option value="study1">Ranking (study 1)</option>
        <option value="study2">Ratings (study 2)</option>
      </select>
    </label>
    <button type="submit">Begin</button>
  `;
  form.addEventListener("submit", (e) => {
    e.preventDefault();
    const data = new FormData(form);
    const participant = String(data.get("participant") ?? "").trim();
    if (participant) {
      void startSession(root, participant, String(data.get("study") ?? "study1"));
    }
  });
  root.append(form);
}

export function boot(): void {
  const root = document.getElementById("app");
  if (!root) throw new Error("missing #app element");
  const participant = param("participant");
  if (participant) {
    void startSession(root, participant, param("study") ?? "study1");
  } else {
    renderEntryForm(root);
  }
}

boot();
