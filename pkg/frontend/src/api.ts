/** Wire types shared by the content script and the background relay.
 *
 * These mirror the local service's JSON schemas: POST /api/generate takes a
 * GenerateRequest and answers either a GenerateResponse or an error body of
 * the shape {error, message}.
 */

export type SnippetLanguage = "python" | "java";

export interface GenerateRequest {
  code: string;
  language: SnippetLanguage;
  question_title: string;
  question_body: string;
  mode: "plain" | "context_aware";
}

export interface CommentEntry {
  line: number;
  text: string;
  placement: "trailing" | "preceding";
}

export interface GenerateResponse {
  annotated_code: string;
  comments: CommentEntry[];
  preservation: "verified" | "repaired" | "failed";
  mode: string;
  context: string | null;
}

export interface RelayMessage {
  kind: "generate";
  request: GenerateRequest;
}

export type RelayReply =
  | { ok: true; response: GenerateResponse }
  | { ok: false; error: string; message: string; status?: number };

export const SERVICE_URL = "http://127.0.0.1:8178/api/generate";

/** Returns a problem description for a bad request, or null when usable.
 *
 * The relay refuses to make an HTTP call for payloads that would only come
 * back as a 400.
 */
export function validateRequest(request: unknown): string | null {
  if (typeof request !== "object" || request === null) {
    return "request must be an object";
  }
  const r = request as Record<string, unknown>;
  if (typeof r.code !== "string" || r.code.trim() === "") {
    return "code must be a non-empty string";
  }
  if (r.language !== "python" && r.language !== "java") {
    return "language must be python or java";
  }
  if (typeof r.question_title !== "string" || typeof r.question_body !== "string") {
    return "question_title and question_body must be strings";
  }
  if (r.mode !== "plain" && r.mode !== "context_aware") {
    return "mode must be plain or context_aware";
  }
  return null;
}
