/**
 * Dialog-act pre-selection for the compose box.
 *
 * Mirrors the server-side analyzer cascade so workers see the same reading
 * the validator will apply; the selection is only a default and the user
 * can override it with any act the server listed as legal.
 */
import type { Role } from "./types.js";

const WH_AUX = new Set(["where", "what", "which", "do", "does", "is", "are", "can"]);
const ACTION_VERBS = new Set([
  "add", "put", "place", "draw", "move", "remove", "delete", "resize", "make", "name",
]);
const FILLERS = new Set(["please", "ok", "okay", "now", "then", "just"]);
const CORRECTIONS = new Set(["no", "not", "instead", "actually", "wrong"]);
const CONFIRMS = new Set(["done", "finished", "correct"]);

export function tokenize(text: string): string[] {
  const lowered = text
    .toLowerCase()
    .replace(/can't/g, "cannot")
    .replace(/won't/g, "will not")
    .replace(/n't\b/g, " not");
  return lowered.match(/\d+\.\d+|\d+|[a-z]+|\?/g) ?? [];
}

function headToken(tokens: string[]): string | undefined {
  return tokens.find((t) => !FILLERS.has(t));
}

function containsRun(tokens: string[], run: string[]): boolean {
  outer: for (let i = 0; i + run.length <= tokens.length; i++) {
    for (let j = 0; j < run.length; j++) {
      if (tokens[i + j] !== run[j]) continue outer;
    }
    return true;
  }
  return false;
}

export function preselectAct(text: string, role: Role): string {
  const tokens = tokenize(text);
  const questionShaped =
    tokens.length > 0 &&
    (tokens[tokens.length - 1] === "?" || WH_AUX.has(tokens[0] ?? ""));
  const head = headToken(tokens);
  if (role === "designer") {
    if (questionShaped) return "QUESTION";
    if (head !== undefined && ACTION_VERBS.has(head)) return "EDIT";
    return "OTHER";
  }
  if (questionShaped) return "INSTRUCT";
  if (head !== undefined && ACTION_VERBS.has(head)) return "INSTRUCT";
  if (tokens.some((t) => CORRECTIONS.has(t))) return "SUGGEST_FIX";
  if (
    tokens.some((t) => CONFIRMS.has(t)) ||
    containsRun(tokens, ["that", "s", "it"]) ||
    containsRun(tokens, ["that", "is", "it"])
  ) {
    return "CONFIRM_DONE";
  }
  return "INSTRUCT";
}

/** Default act constrained to what the server allows right now. */
export function preselectLegalAct(text: string, role: Role, legal: string[]): string {
  const guess = preselectAct(text, role);
  if (legal.includes(guess)) return guess;
  return legal[0] ?? guess;
}
