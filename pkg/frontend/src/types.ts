/** Wire types of the annotation service API (all JSON endpoints use the
 * `{data, error}` envelope). */

export type CategoryId = "thinking_error" | "emotion" | "situation";

export interface CatalogEntry {
  category: CategoryId;
  id: string;
  display_name: string;
  description: string;
  prior: number;
}

export interface PostSummary {
  id: string;
  problem: string;
  negative_take: string;
  /** Present when the request carried an annotator id. */
  labels?: string[];
  pending?: boolean;
}

export interface PostPage {
  items: PostSummary[];
  page: number;
  page_size: number;
  total: number;
  total_posts: number;
  pending_count?: number;
}

export interface AnnotationAck {
  post_id: string;
  annotator: string;
  labels: string[];
  ts: number;
}

export interface KappaEntry {
  kappa: number;
  se: number;
  ci_low: number;
  ci_high: number;
  n_decisions: number;
}

export interface AgreementPayload {
  n_posts: number;
  per_category: Record<string, KappaEntry>;
}

export interface ApiError {
  code: string;
  message: string;
}

export interface Envelope<T> {
  data: T | null;
  error: ApiError | null;
}

export type StatusFilter = "all" | "pending" | "annotated";
