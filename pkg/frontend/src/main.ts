/** Browser entry point: connect form, then the live console. */

import { ServiceClient } from "./api.js";
import { ConsoleApp } from "./app.js";
import { render } from "./view.js";

const DEFAULT_SERVICE = "http://127.0.0.1:8410";

function mount(): void {
  const params = new URLSearchParams(window.location.search);
  const root = document.getElementById("app");
  if (root === null) {
    throw new Error("missing #app element");
  }
  const service = params.get("service") ?? DEFAULT_SERVICE;
  const home = params.get("home");
  if (home === null) {
    root.appendChild(renderConnectForm(service));
    return;
  }
  void start(root, service, home);
}

function renderConnectForm(service: string): HTMLElement {
  const form = document.createElement("form");
  form.className = "connect";
  form.innerHTML = `
    <h1>homegate console</h1>
    <label>Service URL <input name="service" value="${service}"></label>
    <label>Home id <input name="home" placeholder="e.g. four_room_home"></label>
    <button type="submit">Connect</button>
  `;
  form.addEventListener("submit", (event) => {
    event.preventDefault();
    const data = new FormData(form);
    const query = new URLSearchParams({
      service: String(data.get("service") ?? service),
      home: String(data.get("home") ?? ""),
    });
    window.location.search = query.toString();
  });
  return form;
}

async function start(root: HTMLElement, service: string, homeId: string): Promise<void> {
  const client = new ServiceClient(service);
  const { session_id } = await client.createSession(homeId);
  const app = new ConsoleApp(client, session_id);
  const handlers = {
    onSend: (text: string) => void app.sendInstruction(text).catch(console.error),
    onQuickReply: (option: string) =>
      void app.sendClarification(option).catch(console.error),
  };
  const repaint = () => {
    root.replaceChildren(render(app.getState(), handlers, document));
  };
  app.onChange(repaint);
  await app.connect();
  repaint();
}

mount();
