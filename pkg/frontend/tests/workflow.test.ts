// Scripted analyst session: recommendations → plan → discover → orient →
// fit → click a node. Displayed numbers must match the server's bytes.

import { afterEach, beforeEach, describe, expect, it } from "vitest";
import { SessionClient } from "../src/api.js";
import { App } from "../src/app.js";
import { EFFECT_LITERAL, installMockServer, type Recorded } from "./mockServer.js";
import type { Pag } from "../src/types.js";
import { vi } from "vitest";

async function flush(times = 6): Promise<void> {
  for (let i = 0; i < times; i++) {
    await new Promise((resolve) => setTimeout(resolve, 0));
  }
}

function click(element: Element): void {
  element.dispatchEvent(new MouseEvent("click", { bubbles: true }));
}

function setInput(id: string, value: string): void {
  (document.getElementById(id) as HTMLInputElement).value = value;
}

function buildApp(): App {
  document.body.innerHTML = '<main id="app"></main>';
  return new App(
    document.getElementById("app")!,
    new SessionClient("", "demo"),
  );
}

async function runToRecommendations(): Promise<void> {
  setInput("class-scope", "Trace");
  setInput("class-attr", "ImplementationPhaseDuration");
  setInput("alpha", "0.05");
  setInput("bins", "10");
  setInput("undesirable", ">=600");
  click(document.getElementById("run-recommend")!);
  await flush();
}

describe("scripted workflow", () => {
  let recorded: Recorded;

  beforeEach(() => {
    recorded = installMockServer();
  });

  afterEach(() => {
    vi.unstubAllGlobals();
  });

  it("renders recommendations sorted descending by support", async () => {
    buildApp();
    await runToRecommendations();
    const rows = [...document.querySelectorAll("table.recs tr")].slice(1);
    expect(rows.length).toBe(4);
    const supports = rows.map((r) =>
      parseFloat(r.querySelector(".support")!.textContent!),
    );
    expect(supports).toEqual([...supports].sort((a, b) => b - a));
    expect(rows[3].querySelector(".flags")!.textContent).toContain("uniform");
  });

  it("sends exactly the toggled features as the plan", async () => {
    const app = buildApp();
    await runToRecommendations();
    // untick the Priority row
    const checkbox = [...document.querySelectorAll("table.recs input")].find(
      (box) =>
        box.closest("tr")!.textContent!.includes("Business case development,Priority"),
    ) as HTMLInputElement;
    checkbox.checked = false;
    checkbox.dispatchEvent(new Event("change", { bubbles: true }));
    click(document.querySelector(".accept-plan")!);
    await flush();
    const sent = recorded.planFeatures!;
    const labels = sent.map((f) =>
      f.scope === null ? `Trace,${f.attribute}` : `${f.scope.values[0]},${f.attribute}`,
    );
    expect(labels).toEqual([
      "Team charter,TeamSize",
      "Product backlog,Duration",
      "Trace,Complexity",
      "Trace,ImplementationPhaseDuration", // class feature appended
    ]);
    expect(app.status.textContent).toContain("plan accepted");
  });

  it("walks discover → orient → fit → intervene and shows the server's effect verbatim", async () => {
    buildApp();
    await runToRecommendations();
    click(document.querySelector(".accept-plan")!);
    await flush();

    click(document.getElementById("run-discover")!);
    await flush();
    const canvas = document.querySelector(".pag-canvas")!;
    expect(canvas.querySelectorAll("line.edge").length).toBe(5);
    // solid arrowheads for the fixed marks, hollow circles for the free ones
    expect(canvas.querySelectorAll(".mark.arrow").length).toBe(4);
    expect(canvas.querySelectorAll(".endpoint-circle").length).toBeGreaterThan(0);

    // one circle–circle edge: cycle it once (undecided → outward) and submit
    const endpoint = canvas.querySelector(
      '[data-endpoint="Trace,Complexity|Product backlog,Duration:A"]',
    )!;
    click(endpoint);
    await flush();
    click(document.querySelector(".submit-orientations")!);
    await flush();
    expect(recorded.orientations).toEqual([
      ["Trace,Complexity", "Product backlog,Duration"],
    ]);
    // validated structure is now drawn as a DAG
    expect(document.querySelector(".dag-canvas")).not.toBeNull();

    click(document.getElementById("run-fit")!);
    await flush();
    expect(document.getElementById("sem-text")!.textContent).toContain("49.4610");

    const node = document.querySelector('.dag-canvas [data-vertex="Trace,Complexity"]')!;
    click(node);
    await flush();
    const readout = document.querySelector(".effect-line")!;
    expect(readout.textContent).toContain(EFFECT_LITERAL);
    expect(recorded.interventions).toEqual([
      { on: "Trace,Complexity", target: "Trace,ImplementationPhaseDuration" },
    ]);
  });

  it("shows a zero-effect readout for a node with no directed path", async () => {
    buildApp();
    await runToRecommendations();
    click(document.querySelector(".accept-plan")!);
    await flush();
    click(document.getElementById("run-discover")!);
    await flush();
    click(
      document.querySelector(
        '[data-endpoint="Trace,Complexity|Product backlog,Duration:A"]',
      )!,
    );
    click(document.querySelector(".submit-orientations")!);
    await flush();
    click(document.getElementById("run-fit")!);
    await flush();
    click(document.querySelector('.dag-canvas [data-vertex="Product backlog,Duration"]')!);
    await flush();
    expect(document.querySelector(".effect-line")!.textContent).toContain("no effect");
  });

  it("reports an unresolved edge when submitted without orienting", async () => {
    buildApp();
    await runToRecommendations();
    click(document.querySelector(".accept-plan")!);
    await flush();
    click(document.getElementById("run-discover")!);
    await flush();
    click(document.querySelector(".submit-orientations")!);
    await flush();
    const banner = document.querySelector(".banner.error")!;
    expect(banner.textContent).toContain("unresolved edge");
    expect(document.querySelectorAll("line.edge.violation").length).toBe(1);
  });
});

describe("cycle handling", () => {
  const trianglePag: Pag = {
    vertices: ["a", "b", "c"],
    edges: [
      { a: "a", b: "b", markA: "circle", markB: "circle" },
      { a: "b", b: "c", markA: "circle", markB: "circle" },
      { a: "a", b: "c", markA: "circle", markB: "circle" },
    ],
  };

  afterEach(() => {
    vi.unstubAllGlobals();
  });

  it("highlights the server-reported cycle", async () => {
    installMockServer({ pag: trianglePag });
    buildApp();
    await runToRecommendations();
    click(document.querySelector(".accept-plan")!);
    await flush();
    click(document.getElementById("run-discover")!);
    await flush();
    const canvas = document.querySelector(".pag-canvas")!;
    // orient a→b, b→c, then c→a to close the cycle (endpoint A holds the
    // backward direction, so cycle twice on the a–c edge)
    click(canvas.querySelector('[data-endpoint="a|b:A"]')!);
    click(document.querySelector('[data-endpoint="b|c:A"]')!);
    click(document.querySelector('[data-endpoint="a|c:A"]')!);
    click(document.querySelector('[data-endpoint="a|c:A"]')!);
    click(document.querySelector(".submit-orientations")!);
    await flush();
    const banner = document.querySelector(".banner.error")!;
    expect(banner.textContent).toContain("cycle");
    expect(banner.querySelector(".cycle")!.textContent).toContain("→");
    expect(document.querySelectorAll("line.edge.violation").length).toBe(3);
  });
});

describe("degenerate states", () => {
  afterEach(() => {
    vi.unstubAllGlobals();
  });

  it("shows an empty state when nothing clears the threshold", async () => {
    installMockServer({ recommendations: [] });
    buildApp();
    await runToRecommendations();
    expect(document.querySelector(".empty-state")!.textContent).toContain(
      "No recommendations",
    );
  });

  it("warns about bidirected edges with the add-features remedy", async () => {
    installMockServer({
      pag: {
        vertices: ["a", "b"],
        edges: [{ a: "a", b: "b", markA: "arrow", markB: "arrow" }],
      },
    });
    buildApp();
    await runToRecommendations();
    click(document.querySelector(".accept-plan")!);
    await flush();
    click(document.getElementById("run-discover")!);
    await flush();
    expect(document.querySelector(".banner.warning")!.textContent).toContain(
      "add more situation features",
    );
  });
});

describe("categorical readout", () => {
  afterEach(() => vi.unstubAllGlobals());

  it("renders probability bars from the server's literals", async () => {
    const { InterventionPanel } = await import("../src/interventionPanel.js");
    document.body.innerHTML = '<div id="panel"></div>';
    const raw =
      '{"intervened":"T02,Resource","target":"Trace,traceDelay","value":"Resource14",' +
      '"distribution":{"probs":[["delayed",0.256],["onTime",0.744]]}}';
    const panel = new InterventionPanel(document.getElementById("panel")!, async () => ({
      raw,
      data: JSON.parse(raw) as Record<string, unknown>,
    }));
    panel.show(
      {
        vertices: ["T02,Resource", "Trace,traceDelay"],
        edges: [["T02,Resource", "Trace,traceDelay"]],
      },
      "Trace,traceDelay",
    );
    click(document.querySelector('[data-vertex="T02,Resource"]')!);
    await flush();
    const rows = [...document.querySelectorAll(".bar-row")];
    expect(rows.length).toBe(2);
    const values = rows.map((r) => r.querySelector(".bar-value")!.textContent);
    expect(values).toEqual(["0.256", "0.744"]);
    const total = values.map(Number).reduce((s, v) => s + v, 0);
    expect(total).toBeCloseTo(1.0, 9);
  });
});
