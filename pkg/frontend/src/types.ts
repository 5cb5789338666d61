// JSON shapes of the session API. The server is the source of truth; the UI
// only renders what it returns.

export interface FeatureScope {
  attribute: string;
  values: Array<string | number>;
}

export interface Feature {
  attribute: string;
  scope: FeatureScope | null;
}

export interface Recommendation {
  feature: Feature;
  label: string;
  value: string | number;
  support: number;
  flags: string[];
}

export type Mark = "tail" | "arrow" | "circle";

export interface PagEdge {
  a: string;
  b: string;
  markA: Mark;
  markB: Mark;
}

export interface Pag {
  vertices: string[];
  edges: PagEdge[];
}

export interface Dag {
  vertices: string[];
  edges: Array<[string, string]>;
}

export interface SemEquationLinear {
  intercept: number;
  coefficients: Record<string, number>;
  noiseVariance: number;
}

export interface Sem {
  mode: string;
  classFeature: string | null;
  vertices: string[];
  edges: Array<[string, string]>;
  equations: Record<string, SemEquationLinear | object>;
}

export interface InterventionResult {
  intervened: string;
  target: string;
  value: string | number | null;
  totalEffect?: number;
  distribution?: { probs?: Array<[string, number]>; mean?: number };
}

export interface SessionSummary {
  id: string;
  stages: string[];
}

export interface ApiError {
  code: string;
  message: string;
  detail: unknown;
}

export interface Violation {
  kind: string;
  a?: string;
  b?: string;
  message: string;
}
