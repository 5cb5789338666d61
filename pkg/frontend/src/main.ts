import { SessionClient } from "./api.js";
import { App } from "./app.js";
import { el } from "./dom.js";

declare global {
  interface Window {
    PROCAUSE_API?: string;
  }
}

async function bootstrap(): Promise<void> {
  const root = document.getElementById("app");
  if (!root) return;
  const base = window.PROCAUSE_API ?? "";
  const params = new URLSearchParams(window.location.search);
  let sessionId = params.get("session");
  if (!sessionId) {
    const reply = await SessionClient.listSessions(base);
    sessionId = reply.data.sessions[0]?.id ?? null;
  }
  if (!sessionId) {
    root.append(
      el("p", { class: "empty-state" }, [
        "No sessions found. Create one with the CLI (simulate/ingest --session) and reload.",
      ]),
    );
    return;
  }
  document.title = `procause — ${sessionId}`;
  new App(root, new SessionClient(base, sessionId));
}

void bootstrap();
