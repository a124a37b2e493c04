/** Agreement dashboard view model: three per-category kappa rows with
 * confidence intervals and the size of the doubly-annotated subset. */

import { ApiClient, ApiRequestError } from "./api.js";

export interface AgreementRow {
  category: string;
  kappa: string; // fixed 2-decimal display
  interval: string; // "[lo, hi]"
  decisions: number;
}

export interface AgreementView {
  state: "ok" | "empty" | "invalid";
  message?: string;
  nPosts?: number;
  rows: AgreementRow[];
}

export async function agreementView(
  client: ApiClient,
  annotatorA: string,
  annotatorB: string,
): Promise<AgreementView> {
  if (!annotatorA.trim() || !annotatorB.trim()) {
    // validation failure: no request leaves the client
    return {
      state: "invalid",
      message: "Both annotator ids are required.",
      rows: [],
    };
  }
  try {
    const data = await client.getAgreement(annotatorA.trim(), annotatorB.trim());
    const rows = Object.entries(data.per_category).map(([category, entry]) => ({
      category,
      kappa: entry.kappa.toFixed(2),
      interval: `[${entry.ci_low.toFixed(2)}, ${entry.ci_high.toFixed(2)}]`,
      decisions: entry.n_decisions,
    }));
    return { state: "ok", nPosts: data.n_posts, rows };
  } catch (err) {
    if (err instanceof ApiRequestError && err.code === "NoDoublyAnnotatedPosts") {
      return {
        state: "empty",
        message: "These annotators have no posts in common yet.",
        rows: [],
      };
    }
    throw err;
  }
}
