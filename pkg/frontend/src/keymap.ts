/** Keyboard bindings with an on-screen legend. */

export type Action =
  | "playPause"
  | "accept"
  | "discard"
  | "prev"
  | "next"
  | "focusTranscript";

export type Keymap = Record<Action, string>;

export const DEFAULT_KEYMAP: Keymap = {
  playPause: " ",
  accept: "a",
  discard: "d",
  prev: "ArrowLeft",
  next: "ArrowRight",
  focusTranscript: "e",
};

const LABELS: Record<Action, string> = {
  playPause: "play / pause",
  accept: "accept",
  discard: "discard",
  prev: "previous",
  next: "next",
  focusTranscript: "edit transcript",
};

function keyLabel(key: string): string {
  if (key === " ") return "space";
  if (key === "ArrowLeft") return "←";
  if (key === "ArrowRight") return "→";
  return key;
}

/** Two actions on one key would make the UI ambiguous. */
export function assertInjective(keymap: Keymap): void {
  const seen = new Map<string, Action>();
  for (const [action, key] of Object.entries(keymap) as [Action, string][]) {
    const holder = seen.get(key);
    if (holder) {
      throw new Error(
        `key "${keyLabel(key)}" bound to both ${holder} and ${action}`,
      );
    }
    seen.set(key, action);
  }
}

export function actionForKey(keymap: Keymap, key: string): Action | null {
  for (const [action, bound] of Object.entries(keymap) as [Action, string][]) {
    if (bound === key) return action;
  }
  return null;
}

/** One "key action" entry per binding, for rendering on screen. */
export function legendEntries(keymap: Keymap): { key: string; label: string }[] {
  return (Object.entries(keymap) as [Action, string][]).map(([action, key]) => ({
    key: keyLabel(key),
    label: LABELS[action],
  }));
}
