/** DOM glue for the annotator page: wires the tested session/label/agreement
 * logic to a minimal framework-free UI. Served statically next to dist/;
 * the service base URL and annotator id come from the toolbar.
 */

import { ApiClient } from "./api.js";
import { agreementView } from "./agreement.js";
import { flushUnsynced, markReviewed, toggleLabel } from "./labels.js";
import { keyAction, Session } from "./session.js";
import type { PostViewModel } from "./session.js";

let session: Session | null = null;

function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  className?: string,
  text?: string,
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  if (className) node.className = className;
  if (text !== undefined) node.textContent = text;
  return node;
}

function $(id: string): HTMLElement {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing #${id}`);
  return node;
}

function renderStatus(): void {
  if (!session) return;
  $("status").textContent =
    `page ${session.page} — ${session.total} posts in view, ` +
    `${session.pendingCount} pending of ${session.totalPosts}`;
  const banner = $("banner");
  banner.textContent = session.retryBanner ?? "";
  banner.style.display = session.retryBanner ? "block" : "none";
  const queued = session.unsynced.length;
  $("queue").textContent = queued ? `${queued} unsynced edit(s)` : "";
}

function renderPost(row: PostViewModel, index: number): HTMLElement {
  const s = session!;
  const card = el("article", "post" + (index === s.focusIndex ? " focused" : ""));
  card.dataset.postId = row.id;
  const head = el("header");
  head.append(el("span", "post-id", row.id));
  if (row.pending) head.append(el("span", "pending-flag", "pending"));
  const reviewed = el("button", "reviewed-btn", "reviewed, no labels");
  reviewed.addEventListener("click", () => {
    void markReviewed(s, row.id).then(() => refreshRows());
  });
  head.append(reviewed);
  card.append(head);
  card.append(el("p", "problem", row.problem));
  card.append(el("p", "negative-take", row.negativeTake));
  for (const panel of row.panels) {
    const section = el("section", "panel");
    const toggle = el("h4", "panel-title",
      `${panel.category.replace("_", " ")} ${panel.collapsed ? "▸" : "▾"}`);
    toggle.addEventListener("click", () => {
      s.togglePanel(panel.category);
      refreshRows();
    });
    section.append(toggle);
    if (!panel.collapsed) {
      const chips = el("div", "chips");
      for (const chip of panel.chips) {
        const btn = el("button", "chip" + (chip.on ? " on" : ""),
          chip.displayName);
        btn.addEventListener("click", () => {
          void toggleLabel(s, row.id, chip.labelId).then((result) => {
            if (result.message) showMessage(result.message);
            refreshRows();
          });
        });
        chips.append(btn);
      }
      section.append(chips);
    }
    card.append(section);
  }
  return card;
}

function refreshRows(): void {
  if (!session) return;
  const list = $("posts");
  list.replaceChildren(...session.rows.map((row, i) => renderPost(row, i)));
  renderStatus();
}

function showMessage(text: string): void {
  const box = $("message");
  box.textContent = text;
  box.style.display = "block";
  setTimeout(() => (box.style.display = "none"), 4000);
}

async function connect(): Promise<void> {
  const base = ($("base-url") as HTMLInputElement).value.replace(/\/$/, "");
  const annotator = ($("annotator") as HTMLInputElement).value.trim();
  if (!annotator) {
    showMessage("Enter an annotator id first.");
    return;
  }
  session = new Session(new ApiClient(base), annotator);
  await session.init();
  await session.loadPage(1, "all");
  refreshRows();
}

async function loadAgreement(): Promise<void> {
  if (!session) return;
  const a = ($("agree-a") as HTMLInputElement).value;
  const b = ($("agree-b") as HTMLInputElement).value;
  const view = await agreementView(session.client, a, b);
  const out = $("agreement");
  out.replaceChildren();
  if (view.state !== "ok") {
    out.append(el("p", "empty-state", view.message ?? ""));
    return;
  }
  out.append(el("p", undefined, `doubly annotated posts: n = ${view.nPosts}`));
  for (const row of view.rows) {
    out.append(el("p", "kappa-row",
      `${row.category}: κ = ${row.kappa} ${row.interval} ` +
      `(${row.decisions} decisions)`));
  }
}

function bind(): void {
  $("connect").addEventListener("click", () => void connect());
  $("prev").addEventListener("click", () => {
    if (session && session.page > 1) {
      void session.loadPage(session.page - 1).then(refreshRows);
    }
  });
  $("next").addEventListener("click", () => {
    if (session) void session.loadPage(session.page + 1).then(refreshRows);
  });
  $("filter").addEventListener("change", (ev) => {
    const value = (ev.target as HTMLSelectElement).value as
      "all" | "pending" | "annotated";
    if (session) void session.loadPage(1, value).then(refreshRows);
  });
  $("retry").addEventListener("click", () => {
    if (!session) return;
    void flushUnsynced(session)
      .then(() => session!.loadPage(session!.page))
      .then(refreshRows);
  });
  $("agree-load").addEventListener("click", () => void loadAgreement());
  document.addEventListener("keydown", (ev) => {
    if (!session || (ev.target as HTMLElement).tagName === "INPUT") return;
    const action = keyAction(ev.key);
    if (!action) return;
    if (action.kind === "next-post") {
      session.focusIndex = Math.min(session.focusIndex + 1,
        session.rows.length - 1);
    } else if (action.kind === "prev-post") {
      session.focusIndex = Math.max(session.focusIndex - 1, 0);
    } else if (action.kind === "mark-reviewed") {
      const row = session.rows[session.focusIndex];
      if (row) void markReviewed(session, row.id).then(() => refreshRows());
    } else {
      session.togglePanel(action.category);
    }
    refreshRows();
  });
}

bind();
