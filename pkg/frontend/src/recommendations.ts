// Recommendation review: a sortable table whose checked rows become the
// extraction plan.

import { clear, el } from "./dom.js";
import type { Feature, Recommendation } from "./types.js";

export class RecommendationTable {
  private recs: Recommendation[] = [];
  private selected = new Set<number>();
  private descending = true;

  constructor(
    private container: HTMLElement,
    private onAccept: (features: Feature[]) => void,
  ) {}

  show(recs: Recommendation[]): void {
    this.recs = recs.slice();
    this.selected = new Set(recs.map((_, i) => i));
    this.descending = true;
    this.render();
  }

  selectedFeatures(): Feature[] {
    // one feature per distinct label, in table order
    const seen = new Set<string>();
    const features: Feature[] = [];
    for (const i of [...this.selected].sort((a, b) => a - b)) {
      const rec = this.recs[i];
      if (!seen.has(rec.label)) {
        seen.add(rec.label);
        features.push(rec.feature);
      }
    }
    return features;
  }

  private render(): void {
    clear(this.container);
    if (this.recs.length === 0) {
      this.container.append(
        el("p", { class: "empty-state" }, [
          "No recommendations: no feature value clears the support threshold.",
        ]),
      );
      return;
    }
    const table = el("table", { class: "recs" });
    const sortLabel = `support ${this.descending ? "▾" : "▴"}`;
    const header = el("tr", {}, [
      el("th", {}, ["use"]),
      el("th", {}, ["situation feature"]),
      el("th", {}, ["value"]),
      (() => {
        const th = el("th", { class: "sortable" }, [sortLabel]);
        th.addEventListener("click", () => {
          this.descending = !this.descending;
          this.render();
        });
        return th;
      })(),
      el("th", {}, ["flags"]),
    ]);
    table.append(header);

    const order = this.recs
      .map((rec, i) => ({ rec, i }))
      .sort((p, q) =>
        this.descending ? q.rec.support - p.rec.support : p.rec.support - q.rec.support,
      );
    for (const { rec, i } of order) {
      const checkbox = el("input", { type: "checkbox", "data-index": String(i) });
      (checkbox as HTMLInputElement).checked = this.selected.has(i);
      checkbox.addEventListener("change", () => {
        if ((checkbox as HTMLInputElement).checked) this.selected.add(i);
        else this.selected.delete(i);
      });
      table.append(
        el("tr", { class: rec.flags.length ? "flagged" : "" }, [
          el("td", {}, [checkbox]),
          el("td", {}, [rec.label]),
          el("td", {}, [String(rec.value)]),
          el("td", { class: "support" }, [`${(rec.support * 100).toFixed(2)}%`]),
          el("td", { class: "flags" }, [rec.flags.join(", ")]),
        ]),
      );
    }
    const accept = el("button", { class: "accept-plan" }, ["Accept plan"]);
    accept.addEventListener("click", () => this.onAccept(this.selectedFeatures()));
    this.container.append(table, accept);
  }
}
