// Browser bootstrap: wires the controller to the document. All behavior
// lives in app.ts/render.ts so it can be exercised headlessly.

import { Api } from "./api.js";
import { Workbench } from "./app.js";

function baseUrl(): string {
  const params = new URLSearchParams(window.location.search);
  return params.get("api") ?? "";
}

function sessionId(): string | null {
  return new URLSearchParams(window.location.search).get("session");
}

async function boot(): Promise<void> {
  const root = document.getElementById("app");
  if (!root) return;
  const workbench = new Workbench(new Api(baseUrl()));
  const paint = () => {
    root.innerHTML =
      `<header class="toolbar">` +
      `<button type="button" data-action="iterate">Re-reduce now</button>` +
      `<button type="button" data-action="refresh">Refresh</button>` +
      `</header>` + workbench.html();
  };

  const sid = sessionId();
  if (sid) await workbench.load(sid);
  paint();

  root.addEventListener("click", async (event) => {
    const target = event.target as HTMLElement;
    const action = target.getAttribute("data-action");
    if (action === "iterate") {
      await workbench.iterate();
      paint();
      return;
    }
    if (action === "refresh") {
      await workbench.refresh();
      paint();
      return;
    }
    const atom = target.getAttribute("data-assert");
    if (atom) {
      const value = target.getAttribute("data-value") === "ff" ? "ff" : "tt";
      const input = root.querySelector<HTMLInputElement>(
        `input[data-justification-for="${CSS.escape(atom)}"]`);
      const ok = await workbench.submitAssertion(atom, value, input?.value ?? "");
      paint();
      if (ok) {
        // offer one-click re-reduction after a successful assertion
        const iterateButton = root.querySelector<HTMLButtonElement>(
          'button[data-action="iterate"]');
        iterateButton?.classList.add("suggested");
      }
    }
  });
}

void boot();
