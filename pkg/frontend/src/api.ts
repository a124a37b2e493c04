/** Thin typed client over the annotation service HTTP API.
 *
 * The fetch function is injectable so tests can run against an in-memory
 * server; configuration is a single base URL.
 */

import type {
  AgreementPayload,
  AnnotationAck,
  CatalogEntry,
  Envelope,
  PostPage,
  PostSummary,
  StatusFilter,
} from "./types.js";

export type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

export class ApiRequestError extends Error {
  constructor(
    readonly status: number,
    readonly code: string,
    message: string,
  ) {
    super(message);
    this.name = "ApiRequestError";
  }
}

/** Network-level failure (server unreachable), as opposed to an API error. */
export class NetworkError extends Error {
  constructor(cause: unknown) {
    super(`service unreachable: ${String(cause)}`);
    this.name = "NetworkError";
  }
}

export class ApiClient {
  constructor(
    private readonly baseUrl: string,
    private readonly fetchFn: FetchLike = (...args) => fetch(...args),
  ) {}

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    let res: Response;
    try {
      res = await this.fetchFn(this.baseUrl + path, init);
    } catch (err) {
      throw new NetworkError(err);
    }
    const body = (await res.json()) as Envelope<T>;
    if (!res.ok || body.error) {
      const err = body.error ?? { code: "HttpError", message: `status ${res.status}` };
      throw new ApiRequestError(res.status, err.code, err.message);
    }
    return body.data as T;
  }

  getCatalog(): Promise<CatalogEntry[]> {
    return this.request<CatalogEntry[]>("/api/catalog");
  }

  listPosts(opts: {
    page: number;
    pageSize?: number;
    status?: StatusFilter;
    annotator?: string;
  }): Promise<PostPage> {
    const params = new URLSearchParams({ page: String(opts.page) });
    if (opts.pageSize !== undefined) params.set("page_size", String(opts.pageSize));
    if (opts.status) params.set("status", opts.status);
    if (opts.annotator) params.set("annotator", opts.annotator);
    return this.request<PostPage>(`/api/posts?${params}`);
  }

  getPost(postId: string, annotator?: string): Promise<PostSummary> {
    const params = annotator ? `?annotator=${encodeURIComponent(annotator)}` : "";
    return this.request<PostSummary>(`/api/posts/${encodeURIComponent(postId)}${params}`);
  }

  putLabels(
    postId: string,
    annotator: string,
    add: string[],
    remove: string[],
  ): Promise<AnnotationAck> {
    return this.request<AnnotationAck>(
      `/api/posts/${encodeURIComponent(postId)}/labels`,
      {
        method: "POST",
        headers: { "content-type": "application/json" },
        body: JSON.stringify({ annotator, add, remove }),
      },
    );
  }

  getAgreement(a: string, b: string): Promise<AgreementPayload> {
    const params = new URLSearchParams({ a, b });
    return this.request<AgreementPayload>(`/api/agreement?${params}`);
  }
}
