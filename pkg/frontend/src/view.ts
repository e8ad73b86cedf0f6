/**
 * DOM rendering.  Pure functions of the console state: the whole view is
 * re-rendered on every change (the state is tiny), which keeps the screen
 * a direct function of the event log.
 */

import { inputDisabled, type ChatEntry, type ConsoleState } from "./state.js";

export interface ViewHandlers {
  onSend(text: string): void;
  onQuickReply(option: string): void;
}

export function render(
  state: ConsoleState,
  handlers: ViewHandlers,
  doc: Document,
): HTMLElement {
  const root = doc.createElement("div");
  root.className = "console";
  root.appendChild(renderBanner(state, doc));
  const columns = doc.createElement("div");
  columns.className = "columns";
  columns.appendChild(renderDashboard(state, doc));
  columns.appendChild(renderChat(state, handlers, doc));
  root.appendChild(columns);
  return root;
}

function renderBanner(state: ConsoleState, doc: Document): HTMLElement {
  const banner = doc.createElement("div");
  banner.setAttribute("data-testid", "connection-banner");
  banner.className = `banner banner-${state.connection}`;
  if (state.connection === "open") {
    banner.textContent = "connected";
    banner.classList.add("hidden");
  } else {
    banner.textContent =
      state.connection === "reconnecting"
        ? "connection lost, reconnecting…"
        : state.connection;
  }
  return banner;
}

function renderDashboard(state: ConsoleState, doc: Document): HTMLElement {
  const dashboard = doc.createElement("section");
  dashboard.className = "dashboard";
  dashboard.setAttribute("data-testid", "dashboard");
  const heading = doc.createElement("h2");
  heading.textContent = `Home (v${state.stateVersion})`;
  dashboard.appendChild(heading);
  for (const room of Object.keys(state.home).sort()) {
    const roomBlock = doc.createElement("div");
    roomBlock.className = "room";
    const title = doc.createElement("h3");
    title.textContent = room;
    roomBlock.appendChild(title);
    const devices = state.home[room] ?? {};
    for (const deviceId of Object.keys(devices).sort()) {
      const device = devices[deviceId];
      if (device === undefined) {
        continue;
      }
      const card = doc.createElement("div");
      card.className = "device";
      card.setAttribute("data-testid", `device-${room}-${deviceId}`);
      const attrs = Object.keys(device.attributes)
        .sort()
        .map((key) => `${key}=${String(device.attributes[key])}`)
        .join(", ");
      card.textContent = `${deviceId} (${device.type}) ${attrs}`;
      roomBlock.appendChild(card);
    }
    dashboard.appendChild(roomBlock);
  }
  return dashboard;
}

function renderChat(state: ConsoleState, handlers: ViewHandlers, doc: Document): HTMLElement {
  const chat = doc.createElement("section");
  chat.className = "chat";
  const transcript = doc.createElement("div");
  transcript.className = "transcript";
  transcript.setAttribute("data-testid", "transcript");
  state.transcript.forEach((entry, index) => {
    transcript.appendChild(renderEntry(entry, index, handlers, doc));
  });
  chat.appendChild(transcript);
  chat.appendChild(renderComposer(state, handlers, doc));
  return chat;
}

function renderEntry(
  entry: ChatEntry,
  index: number,
  handlers: ViewHandlers,
  doc: Document,
): HTMLElement {
  const bubble = doc.createElement("div");
  bubble.setAttribute("data-entry-index", String(index));
  switch (entry.kind) {
    case "user": {
      bubble.className = "bubble user";
      bubble.textContent = entry.text;
      return bubble;
    }
    case "agent": {
      bubble.className = `bubble agent agent-${entry.tone}`;
      if (entry.tone === "rejected") {
        bubble.setAttribute("data-testid", "rejected-bubble");
      }
      bubble.textContent = entry.text;
      return bubble;
    }
    case "actions": {
      bubble.className = "bubble actions";
      const list = doc.createElement("ul");
      for (const badge of entry.badges) {
        const item = doc.createElement("li");
        item.className = badge.passed ? "action-passed" : "action-failed";
        if (badge.passed) {
          item.textContent = `✓ ${badge.action}`;
        } else {
          const struck = doc.createElement("s");
          struck.textContent = badge.action;
          item.appendChild(struck);
          const label = doc.createElement("span");
          label.className = "failure-reason";
          label.textContent = ` ${badge.failureReason ?? "error_input"}`;
          item.appendChild(label);
        }
        list.appendChild(item);
      }
      bubble.appendChild(list);
      return bubble;
    }
    case "clarification": {
      bubble.className = "bubble clarification";
      bubble.setAttribute("data-testid", "clarification-bubble");
      const question = doc.createElement("div");
      question.textContent = entry.question;
      bubble.appendChild(question);
      if (!entry.answered) {
        const replies = doc.createElement("div");
        replies.className = "quick-replies";
        for (const option of entry.options) {
          const button = doc.createElement("button");
          button.type = "button";
          button.setAttribute("data-testid", `quick-reply-${option}`);
          button.textContent = option;
          button.addEventListener("click", () => handlers.onQuickReply(option));
          replies.appendChild(button);
        }
        bubble.appendChild(replies);
      }
      return bubble;
    }
  }
}

function renderComposer(
  state: ConsoleState,
  handlers: ViewHandlers,
  doc: Document,
): HTMLElement {
  const form = doc.createElement("form");
  form.className = "composer";
  const input = doc.createElement("input");
  input.type = "text";
  input.setAttribute("data-testid", "command-input");
  input.placeholder = inputDisabled(state)
    ? "answer the question above (or tap a reply)"
    : "tell the home what to do…";
  input.disabled = inputDisabled(state);
  const button = doc.createElement("button");
  button.type = "submit";
  button.textContent = "Send";
  button.disabled = inputDisabled(state);
  form.appendChild(input);
  form.appendChild(button);
  form.addEventListener("submit", (event) => {
    event.preventDefault();
    const text = input.value.trim();
    if (text) {
      handlers.onSend(text);
      input.value = "";
    }
  });
  return form;
}
