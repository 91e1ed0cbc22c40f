import { Draft, RankDraft, RateDraft } from "./drafts.js";
import { pooledSlots } from "./rank.js";
import { SessionState } from "./session.js";
import { LikertItem, TaskView } from "./types.js";

export interface TaskHandlers {
  onAssign(slot: string, position: number): void;
  onUnassign(slot: string): void;
  onLikert(constructId: string, slot: string, value: number): void;
  onPreference(slot: string): void;
  onFreeText(text: string): void;
  onSubmit(): void;
}

function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  attrs: Record<string, string> = {},
  children: (Node | string)[] = [],
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  for (const [k, v] of Object.entries(attrs)) node.setAttribute(k, v);
  for (const child of children) {
    node.append(typeof child === "string" ? document.createTextNode(child) : child);
  }
  return node;
}

export function render(root: HTMLElement, state: SessionState, handlers: TaskHandlers): void {
  root.replaceChildren();
  if (state.phase === "done") {
    root.append(renderComplete());
    return;
  }
  root.append(renderTask(state.task, state.draft, state.error, handlers));
}

export function renderComplete(): HTMLElement {
  return el("section", { class: "complete" }, [
    el("h1", {}, ["All done"]),
    el("p", {}, ["Every answer was received. Thank you — you can close this tab."]),
  ]);
}

export function renderTask(
  task: TaskView,
  draft: Draft,
  error: string | null,
  handlers: TaskHandlers,
  clipUrl: (path: string) => string = (p) => p,
): HTMLElement {
  const section = el("section", { class: "task" });
  section.append(
    el("p", { class: "progress" }, [
      `Question ${task.question_index + 1} of ${task.question_count}`,
    ]),
    el("video", {
      class: "clip",
      controls: "",
      preload: "metadata",
      src: clipUrl(task.clip.url),
      "aria-label": "Video clip for this question",
    }),
    renderPlans(task),
  );

  if (draft.kind === "rank") {
    section.append(renderRankBuilder(task, draft, handlers));
  } else {
    section.append(renderRatingForm(task, draft, handlers));
  }

  const freeText = el("textarea", {
    class: "free-text",
    rows: "3",
    placeholder: "Anything you want to add about your answer (optional)",
    "aria-label": "Optional explanation",
  });
  freeText.value = draft.freeText;
  freeText.addEventListener("input", () => handlers.onFreeText(freeText.value));

  const alert = el("p", { class: "error", role: "alert" }, error ? [error] : []);
  const submit = el("button", { class: "submit", type: "button" }, ["Submit answer"]);
  submit.addEventListener("click", () => handlers.onSubmit());

  section.append(freeText, alert, submit);
  return section;
}

/** The stimulus cards, always in exactly the order the server sent. */
function renderPlans(task: TaskView): HTMLElement {
  return el(
    "div",
    { class: "plans" },
    task.plans.map((plan) =>
      el("article", { class: "plan-card", "data-slot": plan.slot }, [
        el("h2", {}, [`Plan ${plan.slot}`]),
        el("pre", { class: "plan-text" }, [plan.text]),
      ]),
    ),
  );
}

function renderRankBuilder(task: TaskView, draft: RankDraft, handlers: TaskHandlers): HTMLElement {
  const slots = task.plans.map((p) => p.slot);
  const container = el("div", { class: "rank-builder" }, [
    el("p", {}, ["Drag each plan into the ranking, most suitable first — or pick its letter from a dropdown."]),
  ]);

  const pool = el(
    "ul",
    { class: "pool", "aria-label": "Plans not ranked yet" },
    pooledSlots(slots, draft.order).map((slot) => {
      const chip = el("li", { class: "chip", draggable: "true", "data-slot": slot }, [
        `Plan ${slot}`,
      ]);
      chip.addEventListener("dragstart", (e) => {
        (e as DragEvent).dataTransfer?.setData("text/plain", slot);
      });
      return chip;
    }),
  );

  const list = el("ol", { class: "rank-slots" });
  draft.order.forEach((occupant, position) => {
    const label = position === 0 ? "most suitable" : position === draft.order.length - 1 ? "least suitable" : "";
    const item = el("li", { class: "rank-slot", "data-position": String(position) });
    item.addEventListener("dragover", (e) => e.preventDefault());
    item.addEventListener("drop", (e) => {
      e.preventDefault();
      const slot = (e as DragEvent).dataTransfer?.getData("text/plain");
      if (slot) handlers.onAssign(slot, position);
    });

    item.append(el("span", { class: "rank-label" }, [`${position + 1}. ${label}`]));
    if (occupant) {
      const chip = el("button", {
        class: "chip placed",
        type: "button",
        "data-slot": occupant,
        draggable: "true",
        title: "Click to send back to the pool",
      }, [`Plan ${occupant}`]);
      chip.addEventListener("click", () => handlers.onUnassign(occupant));
      chip.addEventListener("dragstart", (e) => {
        (e as DragEvent).dataTransfer?.setData("text/plain", occupant);
      });
      item.append(chip);
    }

    // keyboard path: a plain select per rank, mirroring the drag state
    const select = el("select", {
      class: "rank-select",
      "aria-label": `Plan at rank ${position + 1}`,
    });
    select.append(el("option", { value: "" }, ["—"]));
    for (const slot of slots) {
      select.append(el("option", { value: slot }, [`Plan ${slot}`]));
    }
    // set through the select so detached renders agree with live ones
    select.value = occupant ?? "";
    select.addEventListener("change", () => {
      if (select.value) handlers.onAssign(select.value, position);
      else if (occupant) handlers.onUnassign(occupant);
    });
    item.append(select);
    list.append(item);
  });

  container.append(pool, list);
  return container;
}

function renderRatingForm(task: TaskView, draft: RateDraft, handlers: TaskHandlers): HTMLElement {
  const slots = task.plans.map((p) => p.slot);
  const form = el("div", { class: "rating-form" });
  for (const item of task.likert_items ?? []) {
    form.append(renderLikert(item, slots, draft, handlers));
  }

  const pref = el("fieldset", { class: "preference" }, [
    el("legend", {}, ["Overall, which plan did you prefer?"]),
  ]);
  for (const slot of slots) {
    const input = el("input", {
      type: "radio",
      name: "preference",
      value: slot,
      id: `pref-${slot}`,
    });
    if (draft.preference === slot) input.checked = true;
    input.addEventListener("change", () => handlers.onPreference(slot));
    pref.append(el("label", { for: `pref-${slot}` }, [input, ` Plan ${slot}`]));
  }
  form.append(pref);
  return form;
}

/** One construct: a 7-point radio row per plan, nothing pre-selected. */
export function renderLikert(
  item: LikertItem,
  slots: readonly string[],
  draft: RateDraft,
  handlers: TaskHandlers,
): HTMLElement {
  const fieldset = el("fieldset", { class: "likert", "data-construct": item.construct_id }, [
    el("legend", {}, [item.prompt]),
  ]);
  for (const slot of slots) {
    const row = el("div", { class: "likert-row", "data-slot": slot }, [
      el("span", { class: "likert-plan" }, [`Plan ${slot}`]),
      el("span", { class: "likert-end" }, ["strongly disagree"]),
    ]);
    const chosen = draft.likert[item.construct_id]?.[slot];
    for (let value = 1; value <= item.scale_points; value++) {
      const id = `likert-${item.construct_id}-${slot}-${value}`;
      const input = el("input", {
        type: "radio",
        name: `likert-${item.construct_id}-${slot}`,
        value: String(value),
        id,
        "aria-label": `${value} of ${item.scale_points}`,
      });
      if (chosen === value) input.checked = true;
      input.addEventListener("change", () => handlers.onLikert(item.construct_id, slot, value));
      row.append(el("label", { for: id }, [input, String(value)]));
    }
    row.append(el("span", { class: "likert-end" }, ["strongly agree"]));
    fieldset.append(row);
  }
  return fieldset;
}
