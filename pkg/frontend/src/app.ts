// Analyst workflow: recommend → accept plan → discover → orient → fit →
// click nodes for what-if queries. State only changes after a 2xx reply;
// every displayed number is the server's.

import { ApiFailure, SessionClient } from "./api.js";
import { clear, el } from "./dom.js";
import { InterventionPanel } from "./interventionPanel.js";
import { PagEditor } from "./pagEditor.js";
import { RecommendationTable } from "./recommendations.js";
import type { Feature, Violation } from "./types.js";

export function parseUndesirable(text: string): Record<string, unknown> {
  const trimmed = text.trim();
  const num = (s: string): string | number => {
    const n = Number(s);
    return Number.isFinite(n) && s !== "" ? n : s;
  };
  if (trimmed.startsWith("in:")) {
    return { in: trimmed.slice(3).split(",").map(num) };
  }
  for (const [prefix, op] of [
    [">=", "ge"],
    ["<=", "le"],
    [">", "gt"],
    ["<", "lt"],
    ["=", "eq"],
  ] as const) {
    if (trimmed.startsWith(prefix)) {
      return { [op]: num(trimmed.slice(prefix.length)) };
    }
  }
  return { eq: num(trimmed) };
}

export function featureFromInputs(scope: string, attribute: string): Feature {
  const where = scope.trim();
  if (where === "" || where === "Trace") {
    return { attribute: attribute.trim(), scope: null };
  }
  return {
    attribute: attribute.trim(),
    scope: { attribute: "actName", values: [where] },
  };
}

export class App {
  table: RecommendationTable;
  pagEditor: PagEditor;
  panel: InterventionPanel;
  status: HTMLElement;
  semText: HTMLElement;
  private classFeature: Feature | null = null;

  constructor(
    root: HTMLElement,
    private client: SessionClient,
  ) {
    clear(root);
    this.status = el("div", { class: "status", role: "status" });

    const classScope = el("input", { id: "class-scope", value: "Trace" });
    const classAttr = el("input", { id: "class-attr", placeholder: "attribute" });
    const alpha = el("input", { id: "alpha", value: "0.05" });
    const bins = el("input", { id: "bins", value: "10" });
    const undesirable = el("input", { id: "undesirable", placeholder: ">=600" });
    const runRecommend = el("button", { id: "run-recommend" }, ["Recommend features"]);

    const recommendSection = el("section", { id: "recommend-section" }, [
      el("h2", {}, ["1 · Recommended situation features"]),
      el("div", { class: "controls" }, [
        el("label", {}, ["class scope ", classScope]),
        el("label", {}, ["class attribute ", classAttr]),
        el("label", {}, ["α ", alpha]),
        el("label", {}, ["bins ", bins]),
        el("label", {}, ["undesirable ", undesirable]),
        runRecommend,
      ]),
      el("div", { id: "recommendations" }),
    ]);

    const knowledge = el("textarea", {
      id: "knowledge",
      placeholder: '{"required": [], "forbidden": []}',
    });
    const runDiscover = el("button", { id: "run-discover" }, ["Discover structure"]);
    const discoverSection = el("section", { id: "discover-section" }, [
      el("h2", {}, ["2 · Causal structure"]),
      el("div", { class: "controls" }, [
        el("label", {}, ["background knowledge ", knowledge]),
        runDiscover,
      ]),
      el("div", { id: "pag-editor" }),
    ]);

    const runFit = el("button", { id: "run-fit" }, ["Fit equations"]);
    this.semText = el("pre", { id: "sem-text" });
    const fitSection = el("section", { id: "fit-section" }, [
      el("h2", {}, ["3 · Model and what-if"]),
      runFit,
      this.semText,
      el("div", { id: "intervention" }),
    ]);

    root.append(this.status, recommendSection, discoverSection, fitSection);

    this.table = new RecommendationTable(
      root.querySelector("#recommendations")!,
      (features) => void this.acceptPlan(features),
    );
    this.pagEditor = new PagEditor(
      root.querySelector("#pag-editor")!,
      (orientations) => void this.orient(orientations),
    );
    this.panel = new InterventionPanel(
      root.querySelector("#intervention")!,
      async (on) => {
        const target = this.classFeature ? featureLabel(this.classFeature) : "";
        return this.client.intervene(on, target);
      },
    );

    runRecommend.addEventListener("click", () => void this.recommend());
    runDiscover.addEventListener("click", () => void this.discover());
    runFit.addEventListener("click", () => void this.fit());
  }

  private input(id: string): HTMLInputElement {
    return document.getElementById(id) as HTMLInputElement;
  }

  say(message: string, isError = false): void {
    this.status.textContent = message;
    this.status.className = isError ? "status error" : "status";
  }

  async recommend(): Promise<void> {
    try {
      const classFeature = featureFromInputs(
        this.input("class-scope").value,
        this.input("class-attr").value,
      );
      const reply = await this.client.recommend({
        alpha: Number(this.input("alpha").value),
        bins: Number(this.input("bins").value),
        undesirable: parseUndesirable(this.input("undesirable").value),
        classFeature,
      });
      this.classFeature = classFeature;
      this.table.show(reply.data.recommendations);
      this.say(`${reply.data.recommendations.length} recommendations`);
    } catch (err) {
      this.fail(err);
    }
  }

  async acceptPlan(features: Feature[]): Promise<void> {
    if (!this.classFeature) return;
    try {
      const reply = await this.client.setPlan({
        features: [...features, this.classFeature],
        classFeature: this.classFeature,
      });
      this.say(`plan accepted: ${reply.data.plan.features.length} features`);
    } catch (err) {
      this.fail(err);
    }
  }

  async discover(): Promise<void> {
    try {
      const text = (document.getElementById("knowledge") as HTMLTextAreaElement).value;
      const body = text.trim() ? { knowledge: JSON.parse(text) } : {};
      const reply = await this.client.discover(body);
      this.pagEditor.show(reply.data.pag);
      this.say(`PAG discovered: ${reply.data.pag.edges.length} edges`);
    } catch (err) {
      this.fail(err);
    }
  }

  async orient(orientations: Array<[string, string]>): Promise<void> {
    try {
      const reply = await this.client.orient(orientations);
      this.pagEditor.clearBanner();
      this.panel.show(reply.data.dag, this.classFeature ? featureLabel(this.classFeature) : null);
      this.say("structure validated");
    } catch (err) {
      if (err instanceof ApiFailure) {
        const detail = err.error.detail as
          | { cycle?: string[]; a?: string; b?: string }
          | Violation[]
          | null;
        if (detail && !Array.isArray(detail) && detail.cycle) {
          this.pagEditor.showCycle(detail.cycle);
          this.say(err.error.message, true);
          return;
        }
        const violations: Violation[] = Array.isArray(detail)
          ? (detail as Violation[])
          : [{ kind: err.error.code, message: err.error.message, ...(detail ?? {}) }];
        this.pagEditor.showViolations(violations, err.error.message);
        this.say(err.error.message, true);
        return;
      }
      this.fail(err);
    }
  }

  async fit(): Promise<void> {
    try {
      const reply = await this.client.fit();
      this.semText.textContent = reply.data.text;
      const state = await this.client.state();
      const dag = (state.data as { dag?: { vertices: string[]; edges: Array<[string, string]> } }).dag;
      if (dag) {
        this.panel.show(dag, reply.data.sem.classFeature);
      }
      this.say("model fitted; click a node to see its effect on the class feature");
    } catch (err) {
      this.fail(err);
    }
  }

  private fail(err: unknown): void {
    if (err instanceof ApiFailure) {
      this.say(`${err.error.code}: ${err.error.message}`, true);
    } else {
      this.say(String(err), true);
    }
  }
}

export function featureLabel(feature: Feature): string {
  if (feature.scope === null) return `Trace,${feature.attribute}`;
  const values = [...feature.scope.values].sort();
  const where =
    feature.scope.attribute === "actName" && values.length === 1
      ? String(values[0])
      : `${feature.scope.attribute}=${values.join("|")}`;
  return `${where},${feature.attribute}`;
}
