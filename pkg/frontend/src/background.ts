/** Background service worker: relays generate requests to the local service.
 *
 * The content script cannot call the localhost service itself (page CSP and
 * mixed-content rules), so it messages this worker, which owns the HTTP hop
 * and returns either the parsed response or a structured error.
 */

import {
  GenerateResponse,
  RelayMessage,
  RelayReply,
  SERVICE_URL,
  validateRequest,
} from "./api";

export type FetchLike = (
  url: string,
  init: { method: string; headers: Record<string, string>; body: string },
) => Promise<{
  ok: boolean;
  status: number;
  json: () => Promise<unknown>;
}>;

export async function relay(
  message: RelayMessage,
  fetchFn: FetchLike = fetch as unknown as FetchLike,
): Promise<RelayReply> {
  const problem = validateRequest(message.request);
  if (problem !== null) {
    return { ok: false, error: "bad_request", message: problem };
  }
  let response;
  try {
    response = await fetchFn(SERVICE_URL, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(message.request),
    });
  } catch (err) {
    return { ok: false, error: "network", message: `service unreachable: ${String(err)}` };
  }

  let body: unknown = null;
  try {
    body = await response.json();
  } catch {
    body = null;
  }
  if (!response.ok) {
    const parsed = (body ?? {}) as { error?: string; message?: string };
    return {
      ok: false,
      error: parsed.error ?? "http_error",
      message: parsed.message ?? `service returned ${response.status}`,
      status: response.status,
    };
  }
  if (body === null || typeof body !== "object") {
    return { ok: false, error: "bad_response", message: "service returned non-JSON" };
  }
  return { ok: true, response: body as GenerateResponse };
}

function isRelayMessage(message: unknown): message is RelayMessage {
  return (
    typeof message === "object" &&
    message !== null &&
    (message as { kind?: unknown }).kind === "generate"
  );
}

if (typeof chrome !== "undefined" && chrome.runtime?.onMessage) {
  chrome.runtime.onMessage.addListener((message, _sender, sendResponse) => {
    if (!isRelayMessage(message)) {
      return false;
    }
    relay(message).then(sendResponse);
    return true; // keep the message channel open for the async reply
  });
}
