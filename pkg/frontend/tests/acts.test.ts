import { describe, expect, it } from "vitest";

import { preselectAct, preselectLegalAct, tokenize } from "../src/acts.js";

describe("tokenize", () => {
  it("lowercases, keeps ? and decimals, expands contractions", () => {
    expect(tokenize("Add a RED circle.")).toEqual(["add", "a", "red", "circle"]);
    expect(tokenize("where to put circle?")).toEqual(["where", "to", "put", "circle", "?"]);
    expect(tokenize("x 0.62")).toEqual(["x", "0.62"]);
    expect(tokenize("can't")).toEqual(["cannot"]);
  });
});

describe("preselectAct mirrors the server cascade", () => {
  it("question shapes", () => {
    expect(preselectAct("where to put circle?", "designer")).toBe("QUESTION");
    expect(preselectAct("do the boxes mean squares", "designer")).toBe("QUESTION");
    expect(preselectAct("is it ok?", "director")).toBe("INSTRUCT");
  });

  it("verb heads", () => {
    expect(preselectAct("move the box left", "designer")).toBe("EDIT");
    expect(preselectAct("please add a red circle", "director")).toBe("INSTRUCT");
  });

  it("director corrections and confirmations", () => {
    expect(preselectAct("no, the circle goes left", "director")).toBe("SUGGEST_FIX");
    expect(preselectAct("that's it, looks perfect", "director")).toBe("CONFIRM_DONE");
    expect(preselectAct("done", "director")).toBe("CONFIRM_DONE");
  });

  it("fallbacks", () => {
    expect(preselectAct("hmm", "designer")).toBe("OTHER");
    expect(preselectAct("the circle goes on the left", "director")).toBe("INSTRUCT");
  });
});

describe("preselectLegalAct", () => {
  it("never proposes an act outside the server list", () => {
    expect(preselectLegalAct("done", "director", ["INSTRUCT"])).toBe("INSTRUCT");
    expect(preselectLegalAct("done", "director", ["INSTRUCT", "CONFIRM_DONE"])).toBe(
      "CONFIRM_DONE",
    );
  });
});
