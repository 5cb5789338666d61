// What-if panel: the validated DAG rendered in layers; clicking a node asks
// the server for the effect of intervening on it against the class feature.
// Displayed numbers are lifted verbatim from the server's response text.

import { rawField } from "./api.js";
import { clear, el, svgEl } from "./dom.js";
import { layeredLayout } from "./layout.js";
import type { Dag } from "./types.js";

const NODE_R = 22;

function shortLabel(label: string): string {
  const parts = label.split(",");
  return parts[parts.length - 1];
}

export class InterventionPanel {
  private dag: Dag | null = null;
  private classLabel: string | null = null;
  readout: HTMLElement;

  constructor(
    private container: HTMLElement,
    private query: (on: string) => Promise<{ raw: string; data: Record<string, unknown> }>,
  ) {
    this.readout = el("div", { class: "readout" });
  }

  show(dag: Dag, classLabel: string | null): void {
    this.dag = dag;
    this.classLabel = classLabel;
    this.render();
  }

  private render(): void {
    if (!this.dag) return;
    clear(this.container);
    const positions = layeredLayout(this.dag.vertices, this.dag.edges);
    const svg = svgEl("svg", { viewBox: "0 0 760 420", class: "graph dag-canvas" });
    for (const [a, b] of this.dag.edges) {
      const pa = positions.get(a)!;
      const pb = positions.get(b)!;
      const d = Math.max(Math.hypot(pb.x - pa.x, pb.y - pa.y), 1);
      const tipX = pb.x - ((pb.x - pa.x) / d) * NODE_R;
      const tipY = pb.y - ((pb.y - pa.y) / d) * NODE_R;
      svg.append(
        svgEl("line", {
          x1: String(pa.x),
          y1: String(pa.y),
          x2: String(tipX),
          y2: String(tipY),
          class: "edge directed",
          "marker-end": "url(#dag-arrow)",
        }),
      );
    }
    const defs = svgEl("defs");
    const marker = svgEl("marker", {
      id: "dag-arrow",
      viewBox: "0 0 10 10",
      refX: "9",
      refY: "5",
      markerWidth: "8",
      markerHeight: "8",
      orient: "auto-start-reverse",
    });
    marker.append(svgEl("path", { d: "M 0 0 L 10 5 L 0 10 z" }));
    defs.append(marker);
    svg.prepend(defs);

    for (const vertex of this.dag.vertices) {
      const p = positions.get(vertex)!;
      const isClass = vertex === this.classLabel;
      const group = svgEl("g", {
        class: `node clickable${isClass ? " class-node" : ""}`,
        "data-vertex": vertex,
      });
      group.append(
        svgEl("circle", { cx: String(p.x), cy: String(p.y), r: String(NODE_R) }),
      );
      const text = svgEl("text", { x: String(p.x), y: String(p.y + 4) });
      text.textContent = shortLabel(vertex);
      group.append(text);
      if (!isClass) {
        group.addEventListener("click", () => void this.handleClick(vertex));
      }
      svg.append(group);
    }
    this.container.append(svg, this.readout);
  }

  private async handleClick(vertex: string): Promise<void> {
    if (!this.classLabel) return;
    const target = this.classLabel;
    const reply = await this.query(vertex);
    clear(this.readout);
    const effectLiteral = rawField(reply.raw, "totalEffect");
    if (effectLiteral !== null) {
      const zero = Number(effectLiteral) === 0;
      this.readout.append(
        el("p", { class: "effect-line", "data-on": vertex }, [
          zero
            ? `no effect: ${shortLabel(target)} = 0 × ${shortLabel(vertex)}`
            : `${shortLabel(target)} = ${effectLiteral} × ${shortLabel(vertex)} + noise`,
        ]),
      );
      return;
    }
    const dist = (reply.data as { distribution?: { probs?: Array<[string, number]> } })
      .distribution;
    if (dist?.probs) {
      const chart = el("div", { class: "bars", "data-on": vertex });
      const literals = rawProbLiterals(reply.raw);
      for (const [value, prob] of dist.probs) {
        const bar = el("div", { class: "bar-row" }, [
          el("span", { class: "bar-label" }, [String(value)]),
          (() => {
            const bar = el("div", { class: "bar" });
            bar.style.width = `${Math.round(prob * 300)}px`;
            return bar;
          })(),
          el("span", { class: "bar-value" }, [literals.get(String(value)) ?? String(prob)]),
        ]);
        chart.append(bar);
      }
      this.readout.append(chart);
    }
  }
}

/** Literal probability text per value, preserving the server's formatting. */
export function rawProbLiterals(raw: string): Map<string, string> {
  const out = new Map<string, string>();
  const probs = raw.match(/"probs"\s*:\s*\[(.*?)\]\]/);
  if (!probs) return out;
  for (const match of probs[1].matchAll(/\["((?:[^"\\]|\\.)*)",([-0-9.eE+]+)/g)) {
    out.set(match[1], match[2]);
  }
  return out;
}
