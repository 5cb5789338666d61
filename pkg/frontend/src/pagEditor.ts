// PAG canvas: endpoint marks drawn distinctly, circle–circle edges cycle
// through the legal orientations on click, violations returned by the server
// are highlighted on the offending edges.

import { clear, el, svgEl } from "./dom.js";
import { forceLayout, HEIGHT, WIDTH, type Point } from "./layout.js";
import type { Pag, PagEdge, Violation } from "./types.js";

type Direction = "none" | "forward" | "backward";

const NODE_R = 22;

function shortLabel(label: string): string {
  const parts = label.split(",");
  return parts[parts.length - 1];
}

function trim(p: Point, q: Point, radius: number): Point {
  const dx = q.x - p.x;
  const dy = q.y - p.y;
  const d = Math.max(Math.hypot(dx, dy), 1);
  return { x: q.x - (dx / d) * radius, y: q.y - (dy / d) * radius };
}

export class PagEditor {
  private pag: Pag | null = null;
  private positions = new Map<string, Point>();
  private choices = new Map<string, Direction>(); // key: "a|b" of circle–circle edges
  private highlighted = new Set<string>();
  banner: HTMLElement;

  constructor(
    private container: HTMLElement,
    private onSubmit: (orientations: Array<[string, string]>) => void,
  ) {
    this.banner = el("div", { class: "banner hidden" });
  }

  private key(edge: PagEdge): string {
    return `${edge.a}|${edge.b}`;
  }

  show(pag: Pag): void {
    this.pag = pag;
    this.positions = forceLayout(
      pag.vertices,
      pag.edges.map((e) => [e.a, e.b]),
    );
    this.choices = new Map(
      pag.edges
        .filter((e) => e.markA === "circle" && e.markB === "circle")
        .map((e) => [this.key(e), "none" as Direction]),
    );
    this.highlighted.clear();
    this.render();
  }

  orientations(): Array<[string, string]> {
    const out: Array<[string, string]> = [];
    for (const [key, direction] of this.choices) {
      const [a, b] = key.split("|");
      if (direction === "forward") out.push([a, b]);
      if (direction === "backward") out.push([b, a]);
    }
    return out;
  }

  cycle(a: string, b: string): void {
    const key = `${a}|${b}`;
    const current = this.choices.get(key);
    if (current === undefined) return; // only circle–circle edges are free
    const next: Direction =
      current === "none" ? "forward" : current === "forward" ? "backward" : "none";
    this.choices.set(key, next);
    this.render();
  }

  showViolations(violations: Violation[], headline: string): void {
    this.highlighted = new Set(
      violations
        .filter((v) => v.a !== undefined && v.b !== undefined)
        .map((v) => `${v.a}|${v.b}`),
    );
    this.banner.className = "banner error";
    clear(this.banner);
    this.banner.append(
      el("strong", {}, [headline]),
      el("ul", {}, violations.map((v) => el("li", {}, [v.message]))),
    );
    this.render();
  }

  showCycle(cycle: string[]): void {
    this.highlighted = new Set();
    for (let i = 0; i + 1 < cycle.length; i++) {
      this.highlighted.add(`${cycle[i]}|${cycle[i + 1]}`);
      this.highlighted.add(`${cycle[i + 1]}|${cycle[i]}`);
    }
    this.banner.className = "banner error";
    clear(this.banner);
    this.banner.append(
      el("strong", {}, ["The submitted orientations create a cycle: "]),
      el("span", { class: "cycle" }, [cycle.join(" → ")]),
    );
    this.render();
  }

  clearBanner(): void {
    this.banner.className = "banner hidden";
    clear(this.banner);
    this.highlighted.clear();
  }

  private render(): void {
    if (!this.pag) return;
    clear(this.container);
    this.container.append(this.banner);

    const bidirected = this.pag.edges.filter(
      (e) => e.markA === "arrow" && e.markB === "arrow",
    );
    if (bidirected.length > 0) {
      this.container.append(
        el("div", { class: "banner warning" }, [
          "Bidirected edge discovered (hidden confounder): add more situation " +
            "features to the plan and re-run discovery before orienting.",
        ]),
      );
    }

    const svg = svgEl("svg", {
      viewBox: `0 0 ${WIDTH} ${HEIGHT}`,
      class: "graph pag-canvas",
    });
    for (const edge of this.pag.edges) {
      svg.append(...this.renderEdge(edge));
    }
    for (const vertex of this.pag.vertices) {
      const p = this.positions.get(vertex)!;
      const group = svgEl("g", { class: "node", "data-vertex": vertex });
      group.append(
        svgEl("circle", { cx: String(p.x), cy: String(p.y), r: String(NODE_R) }),
      );
      const text = svgEl("text", { x: String(p.x), y: String(p.y + 4) });
      text.textContent = shortLabel(vertex);
      group.append(text);
      svg.append(group);
    }
    this.container.append(svg);

    const submit = el("button", { class: "submit-orientations" }, [
      "Validate structure",
    ]);
    submit.addEventListener("click", () => this.onSubmit(this.orientations()));
    this.container.append(
      el("p", { class: "hint" }, [
        "Click a hollow endpoint to cycle its orientation: undecided → " +
          "outward → inward. Solid arrowheads were fixed by the search.",
      ]),
      submit,
    );
  }

  private renderEdge(edge: PagEdge): SVGElement[] {
    const pa = this.positions.get(edge.a)!;
    const pb = this.positions.get(edge.b)!;
    const endA = trim(pb, pa, NODE_R); // point on the rim near a
    const endB = trim(pa, pb, NODE_R);
    const parts: SVGElement[] = [];
    const key = this.key(edge);
    const classes = ["edge"];
    if (this.highlighted.has(key) || this.highlighted.has(`${edge.b}|${edge.a}`)) {
      classes.push("violation");
    }
    const choice = this.choices.get(key);
    parts.push(
      svgEl("line", {
        x1: String(endA.x),
        y1: String(endA.y),
        x2: String(endB.x),
        y2: String(endB.y),
        class: classes.join(" "),
        "data-edge": key,
      }),
    );
    parts.push(this.renderMark(edge, "A", endA, endB, choice));
    parts.push(this.renderMark(edge, "B", endB, endA, choice));
    return parts;
  }

  private renderMark(
    edge: PagEdge,
    side: "A" | "B",
    at: Point,
    from: Point,
    choice: Direction | undefined,
  ): SVGElement {
    const mark = side === "A" ? edge.markA : edge.markB;
    const vertex = side === "A" ? edge.a : edge.b;
    const key = this.key(edge);
    if (mark === "arrow") {
      return arrowHead(from, at, "mark arrow");
    }
    if (mark === "tail") {
      return svgEl("circle", {
        cx: String(at.x),
        cy: String(at.y),
        r: "0",
        class: "mark tail",
      });
    }
    // circle endpoint: shows the proposed orientation when chosen
    const chosenHead =
      (choice === "forward" && side === "B") || (choice === "backward" && side === "A");
    const group = svgEl("g", {
      class: `mark circle${chosenHead ? " chosen" : ""}`,
      "data-endpoint": `${key}:${side}`,
      "data-vertex": vertex,
    });
    group.append(
      svgEl("circle", {
        cx: String(at.x),
        cy: String(at.y),
        r: "6",
        class: "endpoint-circle",
      }),
    );
    if (chosenHead) {
      group.append(arrowHead(from, at, "proposed"));
    }
    if (choice !== undefined) {
      group.addEventListener("click", () => this.cycle(edge.a, edge.b));
    }
    return group;
  }
}

function arrowHead(from: Point, to: Point, cls: string): SVGElement {
  const dx = to.x - from.x;
  const dy = to.y - from.y;
  const d = Math.max(Math.hypot(dx, dy), 1);
  const ux = dx / d;
  const uy = dy / d;
  const left = { x: to.x - 12 * ux + 6 * uy, y: to.y - 12 * uy - 6 * ux };
  const right = { x: to.x - 12 * ux - 6 * uy, y: to.y - 12 * uy + 6 * ux };
  return svgEl("polygon", {
    points: `${to.x},${to.y} ${left.x},${left.y} ${right.x},${right.y}`,
    class: cls,
  });
}
