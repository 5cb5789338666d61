// Graph layouts. DAGs get a layered (topological) layout; PAGs get a small
// force-directed relaxation seeded deterministically so screenshots and
// tests are reproducible.

export interface Point {
  x: number;
  y: number;
}

export const WIDTH = 760;
export const HEIGHT = 420;

/** mulberry32: tiny deterministic PRNG. */
export function seededRandom(seed: number): () => number {
  let a = seed >>> 0;
  return () => {
    a |= 0;
    a = (a + 0x6d2b79f5) | 0;
    let t = Math.imul(a ^ (a >>> 15), 1 | a);
    t = (t + Math.imul(t ^ (t >>> 7), 61 | t)) ^ t;
    return ((t ^ (t >>> 14)) >>> 0) / 4294967296;
  };
}

export function layeredLayout(
  vertices: string[],
  edges: Array<[string, string]>,
): Map<string, Point> {
  const parents = new Map<string, string[]>(vertices.map((v) => [v, []]));
  for (const [a, b] of edges) {
    parents.get(b)?.push(a);
  }
  // longest-path layering
  const layer = new Map<string, number>();
  const depth = (v: string): number => {
    const known = layer.get(v);
    if (known !== undefined) return known;
    const ps = parents.get(v) ?? [];
    const d = ps.length ? Math.max(...ps.map(depth)) + 1 : 0;
    layer.set(v, d);
    return d;
  };
  vertices.forEach(depth);
  const maxLayer = Math.max(0, ...layer.values());

  const byLayer = new Map<number, string[]>();
  for (const v of vertices) {
    const l = layer.get(v) ?? 0;
    if (!byLayer.has(l)) byLayer.set(l, []);
    byLayer.get(l)!.push(v);
  }
  const points = new Map<string, Point>();
  for (const [l, members] of byLayer) {
    // order within a layer by mean parent position for fewer crossings
    members.sort((a, b) => {
      const mean = (v: string) => {
        const ps = (parents.get(v) ?? []).map((p) => points.get(p)?.y ?? 0);
        return ps.length ? ps.reduce((s, y) => s + y, 0) / ps.length : 0;
      };
      return mean(a) - mean(b) || vertices.indexOf(a) - vertices.indexOf(b);
    });
    const x = maxLayer === 0 ? WIDTH / 2 : 60 + (l * (WIDTH - 120)) / maxLayer;
    members.forEach((v, i) => {
      points.set(v, { x, y: ((i + 1) * HEIGHT) / (members.length + 1) });
    });
  }
  return points;
}

export function forceLayout(
  vertices: string[],
  edges: Array<[string, string]>,
  seed = 7,
): Map<string, Point> {
  const rand = seededRandom(seed);
  const pos = new Map<string, Point>(
    vertices.map((v) => [
      v,
      { x: 60 + rand() * (WIDTH - 120), y: 40 + rand() * (HEIGHT - 80) },
    ]),
  );
  const spring = 160;
  for (let iter = 0; iter < 150; iter++) {
    const force = new Map<string, Point>(vertices.map((v) => [v, { x: 0, y: 0 }]));
    for (let i = 0; i < vertices.length; i++) {
      for (let j = i + 1; j < vertices.length; j++) {
        const a = pos.get(vertices[i])!;
        const b = pos.get(vertices[j])!;
        const dx = a.x - b.x;
        const dy = a.y - b.y;
        const d2 = Math.max(dx * dx + dy * dy, 1);
        const rep = 12000 / d2;
        const d = Math.sqrt(d2);
        force.get(vertices[i])!.x += (dx / d) * rep;
        force.get(vertices[i])!.y += (dy / d) * rep;
        force.get(vertices[j])!.x -= (dx / d) * rep;
        force.get(vertices[j])!.y -= (dy / d) * rep;
      }
    }
    for (const [a, b] of edges) {
      const pa = pos.get(a)!;
      const pb = pos.get(b)!;
      const dx = pb.x - pa.x;
      const dy = pb.y - pa.y;
      const d = Math.max(Math.sqrt(dx * dx + dy * dy), 1);
      const pull = (d - spring) * 0.02;
      force.get(a)!.x += (dx / d) * pull;
      force.get(a)!.y += (dy / d) * pull;
      force.get(b)!.x -= (dx / d) * pull;
      force.get(b)!.y -= (dy / d) * pull;
    }
    const cool = 1 - iter / 150;
    for (const v of vertices) {
      const p = pos.get(v)!;
      const f = force.get(v)!;
      p.x = Math.min(WIDTH - 60, Math.max(60, p.x + f.x * cool));
      p.y = Math.min(HEIGHT - 30, Math.max(30, p.y + f.y * cool));
    }
  }
  return pos;
}
