/** Annotator session state: current page of post view models, status
 * filter, pending counts, and a queue of mutations that failed to reach
 * the server. Loading never corrupts state: on a network failure the
 * previous page stays rendered and a retry banner is raised.
 */

import { ApiClient, NetworkError } from "./api.js";
import type {
  CatalogEntry,
  CategoryId,
  PostSummary,
  StatusFilter,
} from "./types.js";

export interface LabelChip {
  labelId: string;
  displayName: string;
  on: boolean;
}

export interface CategoryPanel {
  category: CategoryId;
  collapsed: boolean;
  chips: LabelChip[];
}

export interface PostViewModel {
  id: string;
  problem: string;
  negativeTake: string; // rendered visually distinct from the problem
  pending: boolean;
  panels: CategoryPanel[];
}

export interface QueuedMutation {
  postId: string;
  add: string[];
  remove: string[];
}

const CATEGORY_ORDER: CategoryId[] = ["thinking_error", "emotion", "situation"];

export class Session {
  readonly pageSize: number;
  page = 1;
  status: StatusFilter = "all";
  rows: PostViewModel[] = [];
  total = 0;
  totalPosts = 0;
  pendingCount = 0;
  retryBanner: string | null = null;
  focusIndex = 0;
  collapsed: Record<CategoryId, boolean> = {
    thinking_error: false,
    emotion: false,
    situation: false,
  };
  /** Mutations that could not be delivered; flushed before new edits. */
  unsynced: QueuedMutation[] = [];
  private catalog: CatalogEntry[] = [];
  private catalogIds = new Set<string>();

  constructor(
    readonly client: ApiClient,
    readonly annotator: string,
    pageSize = 50,
  ) {
    if (!annotator) throw new Error("annotator id is required");
    this.pageSize = pageSize;
  }

  async init(): Promise<void> {
    this.catalog = await this.client.getCatalog();
    this.catalogIds = new Set(this.catalog.map((entry) => entry.id));
  }

  knownLabel(labelId: string): boolean {
    return this.catalogIds.has(labelId);
  }

  get catalogEntries(): CatalogEntry[] {
    return this.catalog;
  }

  buildViewModel(post: PostSummary): PostViewModel {
    const on = new Set(post.labels ?? []);
    const panels: CategoryPanel[] = CATEGORY_ORDER.map((category) => ({
      category,
      collapsed: this.collapsed[category],
      chips: this.catalog
        .filter((entry) => entry.category === category)
        .map((entry) => ({
          labelId: entry.id,
          displayName: entry.display_name,
          on: on.has(entry.id),
        })),
    }));
    return {
      id: post.id,
      problem: post.problem,
      negativeTake: post.negative_take,
      pending: post.pending ?? true,
      panels,
    };
  }

  /** Fetch and render one page; keeps existing rows on network failure. */
  async loadPage(page = this.page, status = this.status): Promise<boolean> {
    try {
      const data = await this.client.listPosts({
        page,
        pageSize: this.pageSize,
        status,
        annotator: this.annotator,
      });
      this.page = page;
      this.status = status;
      this.rows = data.items.map((post) => this.buildViewModel(post));
      this.total = data.total;
      this.totalPosts = data.total_posts;
      this.pendingCount = data.pending_count ?? 0;
      this.retryBanner = null;
      this.focusIndex = 0;
      return true;
    } catch (err) {
      if (err instanceof NetworkError) {
        this.retryBanner = "Service unreachable. Check the connection and retry.";
        return false;
      }
      throw err;
    }
  }

  row(postId: string): PostViewModel | undefined {
    return this.rows.find((row) => row.id === postId);
  }

  chip(postId: string, labelId: string): LabelChip | undefined {
    for (const panel of this.row(postId)?.panels ?? []) {
      const chip = panel.chips.find((c) => c.labelId === labelId);
      if (chip) return chip;
    }
    return undefined;
  }

  /** Replace a row's chip states and pending flag from a server label set. */
  applyServerLabels(postId: string, labels: string[]): void {
    const row = this.row(postId);
    if (!row) return;
    const on = new Set(labels);
    for (const panel of row.panels) {
      for (const chip of panel.chips) chip.on = on.has(chip.labelId);
    }
    row.pending = false;
  }

  togglePanel(category: CategoryId): void {
    this.collapsed[category] = !this.collapsed[category];
    for (const row of this.rows) {
      for (const panel of row.panels) {
        if (panel.category === category) panel.collapsed = this.collapsed[category];
      }
    }
  }
}

/** Keyboard shortcuts: returns the action for a key, or null. Throughput
 * matters (annotators spend about a minute per post), so navigation and
 * review need no mouse. */
export type KeyAction =
  | { kind: "next-post" }
  | { kind: "prev-post" }
  | { kind: "mark-reviewed" }
  | { kind: "toggle-panel"; category: CategoryId };

export function keyAction(key: string): KeyAction | null {
  switch (key) {
    case "j":
      return { kind: "next-post" };
    case "k":
      return { kind: "prev-post" };
    case "r":
      return { kind: "mark-reviewed" };
    case "1":
      return { kind: "toggle-panel", category: "thinking_error" };
    case "2":
      return { kind: "toggle-panel", category: "emotion" };
    case "3":
      return { kind: "toggle-panel", category: "situation" };
    default:
      return null;
  }
}
