import { afterEach, describe, expect, it, vi } from "vitest";
import { ApiFailure, rawField, SessionClient } from "../src/api.js";
import { featureLabel, parseUndesirable } from "../src/app.js";
import { rawProbLiterals } from "../src/interventionPanel.js";

describe("rawField", () => {
  it("returns the untouched literal", () => {
    const raw = '{"target":"t","totalEffect":75.0043,"value":null}';
    expect(rawField(raw, "totalEffect")).toBe("75.0043");
  });

  it("keeps trailing-zero formatting the server chose", () => {
    expect(rawField('{"totalEffect":0.0}', "totalEffect")).toBe("0.0");
    expect(rawField('{"totalEffect":-12.5,"x":1}', "totalEffect")).toBe("-12.5");
  });

  it("is null when the field is absent", () => {
    expect(rawField('{"other":1}', "totalEffect")).toBeNull();
  });
});

describe("rawProbLiterals", () => {
  it("maps each value to its literal probability text", () => {
    const raw = '{"distribution":{"probs":[["delayed",0.256],["onTime",0.744]]},"x":1}';
    const literals = rawProbLiterals(raw);
    expect(literals.get("delayed")).toBe("0.256");
    expect(literals.get("onTime")).toBe("0.744");
  });
});

describe("parseUndesirable", () => {
  it.each([
    [">=600", { ge: 600 }],
    ["<3", { lt: 3 }],
    ["in:a,b", { in: ["a", "b"] }],
    ["delayed", { eq: "delayed" }],
    ["=5", { eq: 5 }],
  ])("%s", (text, want) => {
    expect(parseUndesirable(text)).toEqual(want);
  });
});

describe("featureLabel", () => {
  it("matches the server's label format", () => {
    expect(featureLabel({ attribute: "Complexity", scope: null })).toBe("Trace,Complexity");
    expect(
      featureLabel({
        attribute: "Duration",
        scope: { attribute: "actName", values: ["Product backlog"] },
      }),
    ).toBe("Product backlog,Duration");
  });
});

describe("SessionClient errors", () => {
  afterEach(() => vi.unstubAllGlobals());

  it("wraps non-2xx replies in ApiFailure with the server's code", async () => {
    vi.stubGlobal(
      "fetch",
      vi.fn(async () =>
        new Response(
          JSON.stringify({ code: "stage-order", message: "needs table.json", detail: null }),
          { status: 409 },
        ),
      ),
    );
    const client = new SessionClient("", "demo");
    await expect(client.fit()).rejects.toMatchObject({
      status: 409,
      error: { code: "stage-order" },
    });
    await expect(client.fit()).rejects.toBeInstanceOf(ApiFailure);
  });
});
