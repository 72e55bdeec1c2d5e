/** Typed client for the review-service HTTP API. */

import type {
  Candidate,
  CandidatePage,
  CandidateStatus,
  DecisionReply,
  Neighbors,
} from "./types.js";

export class ApiError extends Error {
  constructor(
    message: string,
    readonly status: number | null = null,
  ) {
    super(message);
  }
}

/** What the app needs from the service; ApiClient is the HTTP implementation. */
export interface ReviewApi {
  listCandidates(params?: {
    status?: CandidateStatus;
    limit?: number;
    cursor?: string;
  }): Promise<CandidatePage>;
  getCandidate(id: string): Promise<Candidate>;
  neighbors(id: string): Promise<Neighbors>;
  postDecision(
    id: string,
    body: { decision: "accepted" | "discarded"; edited_text?: string; annotator: string },
  ): Promise<DecisionReply>;
  patchTranscript(
    id: string,
    body: { edited_text: string; annotator: string },
  ): Promise<{ candidate_id: string; edited_text: string }>;
}

type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

export class ApiClient implements ReviewApi {
  constructor(
    private baseUrl = "",
    private fetchImpl: FetchLike = (input, init) => fetch(input, init),
  ) {}

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    let response: Response;
    try {
      response = await this.fetchImpl(this.baseUrl + path, init);
    } catch (err) {
      throw new ApiError(`service unreachable: ${String(err)}`);
    }
    if (!response.ok) {
      let detail = response.statusText;
      try {
        const body = (await response.json()) as { detail?: string };
        if (body.detail) detail = body.detail;
      } catch {
        // non-JSON error body; keep the status text
      }
      throw new ApiError(detail, response.status);
    }
    return (await response.json()) as T;
  }

  listCandidates(params: {
    status?: CandidateStatus;
    limit?: number;
    cursor?: string;
  } = {}): Promise<CandidatePage> {
    const query = new URLSearchParams();
    if (params.status) query.set("status", params.status);
    if (params.limit !== undefined) query.set("limit", String(params.limit));
    if (params.cursor) query.set("cursor", params.cursor);
    const suffix = query.toString() ? `?${query}` : "";
    return this.request<CandidatePage>(`/api/candidates${suffix}`);
  }

  getCandidate(id: string): Promise<Candidate> {
    return this.request<Candidate>(`/api/candidates/${encodeURIComponent(id)}`);
  }

  neighbors(id: string): Promise<Neighbors> {
    return this.request<Neighbors>(
      `/api/candidates/${encodeURIComponent(id)}/neighbors`,
    );
  }

  postDecision(
    id: string,
    body: { decision: "accepted" | "discarded"; edited_text?: string; annotator: string },
  ): Promise<DecisionReply> {
    return this.request<DecisionReply>(
      `/api/candidates/${encodeURIComponent(id)}/decision`,
      {
        method: "POST",
        headers: { "content-type": "application/json" },
        body: JSON.stringify(body),
      },
    );
  }

  patchTranscript(
    id: string,
    body: { edited_text: string; annotator: string },
  ): Promise<{ candidate_id: string; edited_text: string }> {
    return this.request(
      `/api/candidates/${encodeURIComponent(id)}/transcript`,
      {
        method: "PATCH",
        headers: { "content-type": "application/json" },
        body: JSON.stringify(body),
      },
    );
  }
}
