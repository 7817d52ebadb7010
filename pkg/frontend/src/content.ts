/** Content script: a button per answer code snippet, rendering on demand.
 *
 * Each answer's pre>code block gets one AUTOGENICS button. Clicking it sends
 * the snippet plus the question text through the background relay and renders
 * the annotated code in a visually distinct block right after the original.
 * The original block is never touched — everything we add is a sibling.
 */

import { GenerateRequest, GenerateResponse, RelayMessage, RelayReply, SnippetLanguage } from "./api";

export type Transport = (message: RelayMessage) => Promise<RelayReply>;

const BUTTON_CLASS = "autogenics-btn";
const RENDER_CLASS = "autogenics-render";
const NOTICE_CLASS = "autogenics-notice";
const BUTTON_LABEL = "AUTOGENICS";
const QUOTA_MESSAGE = "Daily quota exhausted — try again tomorrow.";

const buttonedBlocks = new WeakSet<Element>();
const renderSlots = new WeakMap<Element, HTMLElement>();

export function isQuestionPage(pathname: string): boolean {
  return /^\/questions\/\d+/.test(pathname);
}

/** Same rule the ingest pipeline uses: a tag equal to the language name or
 * starting with "<language>-" counts; both languages present → undetectable.
 */
export function detectPageLanguage(doc: Document): SnippetLanguage | null {
  const tags = Array.from(doc.querySelectorAll(".post-tag")).map(
    (el) => el.textContent?.trim().toLowerCase() ?? "",
  );
  const matches = (language: SnippetLanguage) =>
    tags.some((tag) => tag === language || tag.startsWith(`${language}-`));
  const python = matches("python");
  const java = matches("java");
  if (python && java) {
    return null;
  }
  if (python) {
    return "python";
  }
  if (java) {
    return "java";
  }
  return null;
}

/** Code blocks inside answers only; question-body blocks get no button. */
export function answerCodeBlocks(doc: Document): HTMLElement[] {
  return Array.from(doc.querySelectorAll<HTMLElement>("pre > code")).filter(
    (code) => code.closest(".answer") !== null,
  );
}

function questionTitle(doc: Document): string {
  return doc.querySelector("#question-header h1")?.textContent?.trim() ?? "";
}

function questionBody(doc: Document): string {
  return doc.querySelector(".question .js-post-body")?.textContent?.trim() ?? "";
}

function buildRequest(doc: Document, code: string, language: SnippetLanguage): GenerateRequest {
  return {
    code,
    language,
    question_title: questionTitle(doc),
    question_body: questionBody(doc),
    mode: "context_aware",
  };
}

function placeSlot(pre: Element, slot: HTMLElement): void {
  const previous = renderSlots.get(pre);
  if (previous && previous.isConnected) {
    previous.replaceWith(slot);
  } else {
    pre.insertAdjacentElement("afterend", slot);
  }
  renderSlots.set(pre, slot);
}

function renderResult(pre: Element, response: GenerateResponse): void {
  const slot = document.createElement("div");
  slot.className = RENDER_CLASS;
  slot.style.background = "#f3fbf3";
  slot.style.border = "1px solid #b9dcb9";
  slot.style.borderRadius = "4px";
  slot.style.padding = "8px";
  slot.style.margin = "6px 0";

  const badge = document.createElement("div");
  badge.className = "autogenics-badge";
  badge.textContent = `${BUTTON_LABEL} · ${response.preservation}`;
  badge.style.fontWeight = "bold";
  badge.style.fontSize = "0.85em";
  badge.style.marginBottom = "4px";
  slot.appendChild(badge);

  const block = document.createElement("pre");
  const codeEl = document.createElement("code");
  codeEl.textContent = response.annotated_code;
  block.appendChild(codeEl);
  slot.appendChild(block);

  placeSlot(pre, slot);
}

function renderNotice(pre: Element, text: string, onRetry?: () => void): void {
  const slot = document.createElement("div");
  slot.className = NOTICE_CLASS;
  slot.style.background = "#fff6f0";
  slot.style.border = "1px solid #e0b9a9";
  slot.style.borderRadius = "4px";
  slot.style.padding = "6px 8px";
  slot.style.margin = "6px 0";
  slot.textContent = text;

  if (onRetry) {
    const retry = document.createElement("button");
    retry.className = "autogenics-retry";
    retry.type = "button";
    retry.textContent = "Retry";
    retry.style.marginLeft = "8px";
    retry.addEventListener("click", onRetry);
    slot.appendChild(retry);
  }
  placeSlot(pre, slot);
}

function noticeFor(reply: Extract<RelayReply, { ok: false }>): string {
  if (reply.status === 429 || reply.error === "quota_exhausted") {
    return QUOTA_MESSAGE;
  }
  return `Could not generate comments: ${reply.message}`;
}

async function generateFor(
  doc: Document,
  pre: Element,
  code: HTMLElement,
  button: HTMLButtonElement,
  language: SnippetLanguage,
  transport: Transport,
): Promise<void> {
  if (button.dataset.busy === "1") {
    return; // one in-flight request per button
  }
  button.dataset.busy = "1";
  button.disabled = true;
  const idleLabel = button.textContent ?? BUTTON_LABEL;
  button.textContent = `${BUTTON_LABEL}…`;

  const request = buildRequest(doc, code.textContent ?? "", language);
  let reply: RelayReply;
  try {
    reply = await transport({ kind: "generate", request });
  } catch (err) {
    reply = { ok: false, error: "network", message: String(err) };
  }

  button.dataset.busy = "0";
  button.disabled = false;
  button.textContent = idleLabel;

  if (!reply.ok) {
    const retry =
      reply.error === "network"
        ? () => void generateFor(doc, pre, code, button, language, transport)
        : undefined;
    renderNotice(pre, noticeFor(reply), retry);
    return;
  }
  if (reply.response.preservation === "failed") {
    renderNotice(pre, "The generated comments altered the code, so nothing was rendered.");
    return;
  }
  renderResult(pre, reply.response);
}

/** Add one button per answer code block; safe to call repeatedly. */
export function injectButtons(doc: Document, transport: Transport): number {
  const language = detectPageLanguage(doc);
  if (language === null) {
    return 0; // unsupported or ambiguous page language; stay out of the way
  }
  let injected = 0;
  for (const code of answerCodeBlocks(doc)) {
    if (buttonedBlocks.has(code)) {
      continue;
    }
    const pre = code.parentElement;
    if (!pre) {
      continue;
    }
    const button = doc.createElement("button");
    button.className = BUTTON_CLASS;
    button.type = "button";
    button.textContent = BUTTON_LABEL;
    button.style.display = "block";
    button.style.margin = "4px 0";
    button.addEventListener("click", () => {
      void generateFor(doc, pre, code, button, language, transport);
    });
    pre.insertAdjacentElement("afterend", button);
    buttonedBlocks.add(code);
    injected += 1;
  }
  return injected;
}

function chromeTransport(message: RelayMessage): Promise<RelayReply> {
  return new Promise((resolve) => {
    chrome.runtime.sendMessage(message, (reply: RelayReply) => {
      const err = chrome.runtime.lastError;
      if (err) {
        resolve({ ok: false, error: "messaging", message: err.message ?? "message failed" });
        return;
      }
      resolve(reply);
    });
  });
}

if (typeof chrome !== "undefined" && chrome.runtime?.id !== undefined) {
  if (isQuestionPage(window.location.pathname)) {
    injectButtons(document, chromeTransport);
  }
}
