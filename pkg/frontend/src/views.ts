/**
 * Director and designer views over a claimed job.
 *
 * Both render from the server payload alone. The designer view has no
 * reference panel by construction (its payload cannot even carry one), and
 * the submit path refuses any act the server did not list as legal.
 */
import { preselectLegalAct } from "./acts.js";
import { BoxCanvas, GridCanvas, PALETTE } from "./canvas.js";
import {
  GRID,
  SubmitRequestSchema,
  type DesignerJob,
  type DirectorJob,
  type Layout,
  type SubmitRequest,
  type Turn,
} from "./types.js";

export interface SubmitHandler {
  (jobId: string, request: SubmitRequest): Promise<{ verdict: string; notes: string[] }>;
}

export interface ViewHandle {
  element: HTMLElement;
  /** Drive the lease countdown; locks the view once the lease has lapsed. */
  tick(nowMs: number): void;
}

const SHAPE_GLYPHS: Record<string, string> = { circle: "●", square: "■", triangle: "▲" };

function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  className?: string,
  text?: string,
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  if (className) node.className = className;
  if (text !== undefined) node.textContent = text;
  return node;
}

function renderChat(history: Turn[], pendingInstruction?: string | null): HTMLElement {
  const pane = el("div", "chat-pane");
  for (const turn of history) {
    const line = el("div", `chat-turn ${turn.role}`);
    line.appendChild(el("span", "chat-act", `[${turn.act}]`));
    line.appendChild(
      el("span", "chat-text", turn.utterance || (turn.act === "EDIT" ? "(canvas edit)" : "")),
    );
    pane.appendChild(line);
  }
  if (pendingInstruction) {
    const line = el("div", "chat-turn director pending");
    line.appendChild(el("span", "chat-act", "[INSTRUCT]"));
    line.appendChild(el("span", "chat-text", pendingInstruction));
    pane.appendChild(line);
  }
  return pane;
}

function renderGrid(layout: Layout, editable: GridCanvas | null, selected: () => number): HTMLElement {
  const grid = el("div", editable ? "grid-canvas editable" : "grid-canvas");
  const source = editable ?? new GridCanvas(layout);
  for (let row = 0; row < GRID; row++) {
    for (let col = 0; col < GRID; col++) {
      const cell = el("div", "grid-cell");
      cell.dataset.row = String(row);
      cell.dataset.col = String(col);
      const obj = source.at(row, col);
      if (obj) {
        cell.appendChild(el("span", `obj ${obj.color} ${obj.shape}`, SHAPE_GLYPHS[obj.shape]));
      }
      if (editable) {
        cell.addEventListener("click", () => {
          const pick = PALETTE[selected()];
          if (!pick) return;
          if (editable.at(row, col)) {
            editable.remove(row, col); // click an occupied cell to clear it
          } else {
            editable.place(pick.color, pick.shape, row, col);
          }
          refreshGrid(grid, editable);
        });
      }
      grid.appendChild(cell);
    }
  }
  return grid;
}

function refreshGrid(grid: HTMLElement, canvas: GridCanvas): void {
  const cells = grid.querySelectorAll<HTMLElement>(".grid-cell");
  cells.forEach((cell) => {
    cell.textContent = "";
    const row = Number(cell.dataset.row);
    const col = Number(cell.dataset.col);
    const obj = canvas.at(row, col);
    if (obj) {
      cell.appendChild(el("span", `obj ${obj.color} ${obj.shape}`, SHAPE_GLYPHS[obj.shape]));
    }
  });
}

function renderBoxes(canvas: BoxCanvas): HTMLElement {
  const stage = el("div", "box-canvas");
  for (const id of canvas.ids()) {
    const obj = canvas.get(id)!;
    const box = el("div", "box-object");
    box.dataset.id = String(id);
    box.style.left = `${obj.x * 100}%`;
    box.style.top = `${obj.y * 100}%`;
    box.style.width = `${obj.w * 100}%`;
    box.style.height = `${obj.h * 100}%`;
    box.appendChild(el("span", "box-label", obj.name ? `${obj.class_label} (${obj.name})` : obj.class_label));
    stage.appendChild(box);
  }
  return stage;
}

function attachBoxEditing(stage: HTMLElement, canvas: BoxCanvas, rerender: () => void): void {
  // drag to move, drag the corner handle to resize, double-click to rename
  stage.querySelectorAll<HTMLElement>(".box-object").forEach((box) => {
    const id = Number(box.dataset.id);
    const handle = el("span", "resize-handle");
    box.appendChild(handle);

    box.addEventListener("mousedown", (down: MouseEvent) => {
      const rect = stage.getBoundingClientRect();
      const resizing = down.target === handle;
      const start = canvas.get(id);
      if (!start || rect.width === 0) return;
      const move = (ev: MouseEvent) => {
        const dx = (ev.clientX - down.clientX) / rect.width;
        const dy = (ev.clientY - down.clientY) / rect.height;
        if (resizing) {
          canvas.resizeTo(id, start.w + dx, start.h + dy);
        } else {
          canvas.moveTo(id, start.x + dx, start.y + dy);
        }
      };
      const up = () => {
        stage.ownerDocument.removeEventListener("mousemove", move);
        stage.ownerDocument.removeEventListener("mouseup", up);
        rerender();
      };
      stage.ownerDocument.addEventListener("mousemove", move);
      stage.ownerDocument.addEventListener("mouseup", up);
    });

    box.addEventListener("dblclick", () => {
      const name = stage.ownerDocument.defaultView?.prompt?.("name this object") ?? null;
      if (name) {
        canvas.rename(id, name);
        rerender();
      }
    });
  });
}

function renderCountdown(expiresAt: number): { element: HTMLElement; tick: (now: number) => boolean } {
  const label = el("span", "lease-countdown");
  const tick = (nowMs: number): boolean => {
    const left = Math.max(0, Math.round(expiresAt - nowMs / 1000));
    label.textContent = `lease: ${left}s`;
    return left <= 0;
  };
  tick(0);
  return { element: label, tick };
}

function lockView(root: HTMLElement): void {
  if (root.querySelector(".lease-expired")) return;
  const overlay = el("div", "lease-expired");
  overlay.appendChild(el("p", "", "Your lease expired. Claim the job again to continue."));
  overlay.appendChild(el("button", "reclaim", "Re-claim"));
  root.querySelectorAll("button, select, textarea").forEach((node) => {
    (node as HTMLButtonElement).disabled = true;
  });
  root.appendChild(overlay);
  root.classList.add("locked");
}

function renderComposer(
  root: HTMLElement,
  role: "director" | "designer",
  legal: string[],
  allActs: readonly string[],
  confirmGate: () => boolean,
  onSubmit: (act: string, utterance: string) => void,
): void {
  const composer = el("div", "composer");
  const textarea = el("textarea", "utterance-input");
  const select = el("select", "act-select");
  for (const act of allActs) {
    const option = el("option", "", act);
    option.value = act;
    option.disabled = !legal.includes(act) || (act === "CONFIRM_DONE" && !confirmGate());
    select.appendChild(option);
  }
  const firstLegal = allActs.find(
    (a) => legal.includes(a) && !(a === "CONFIRM_DONE" && !confirmGate()),
  );
  if (firstLegal) select.value = firstLegal;

  let userPinned = false;
  select.addEventListener("change", () => {
    userPinned = true;
  });
  textarea.addEventListener("input", () => {
    if (userPinned) return;
    const guess = preselectLegalAct(textarea.value, role, legal);
    const option = select.querySelector<HTMLOptionElement>(`option[value="${guess}"]`);
    if (option && !option.disabled) select.value = guess;
  });

  const button = el("button", "submit-turn", "Submit");
  button.addEventListener("click", () => {
    const act = select.value;
    if (!legal.includes(act)) return; // only server-legal acts leave the client
    onSubmit(act, textarea.value);
  });
  composer.appendChild(textarea);
  composer.appendChild(select);
  composer.appendChild(button);
  root.appendChild(composer);
}

function showError(root: HTMLElement, message: string): void {
  let banner = root.querySelector<HTMLElement>(".submit-error");
  if (!banner) {
    banner = el("div", "submit-error");
    root.appendChild(banner);
  }
  banner.textContent = message;
}

export function renderDirectorView(
  job: DirectorJob,
  workerId: string,
  onSubmit: SubmitHandler,
): ViewHandle {
  const root = el("div", "director-view");
  root.appendChild(el("h2", "", `Session ${job.session_id} (${job.scenario})`));
  const countdown = renderCountdown(job.lease_expires_at);
  root.appendChild(countdown.element);

  const panels = el("div", "panels");
  const referencePanel = el("div", "reference-panel");
  referencePanel.appendChild(el("h3", "", "Reference"));
  referencePanel.appendChild(
    job.kind === "shape2d"
      ? renderGrid(job.reference, null, () => -1)
      : renderBoxes(new BoxCanvas(job.reference)),
  );
  const livePanel = el("div", "live-panel");
  livePanel.appendChild(el("h3", "", "Designer progress"));
  livePanel.appendChild(
    job.kind === "shape2d"
      ? renderGrid(job.canvas, null, () => -1)
      : renderBoxes(new BoxCanvas(job.canvas)),
  );
  panels.appendChild(referencePanel);
  panels.appendChild(livePanel);
  root.appendChild(panels);

  if (job.kind === "coco") {
    // advisory only; completion stays the director's call
    root.appendChild(
      el("div", "similarity-advisory", `similarity: ${Number(job.match_now).toFixed(3)}`),
    );
  }

  root.appendChild(renderChat(job.history));

  const matched = job.kind === "shape2d" ? job.match_now === true : true;
  renderComposer(
    root,
    "director",
    job.legal_acts,
    ["INSTRUCT", "SUGGEST_FIX", "ANSWER", "CONFIRM_DONE"],
    () => matched && job.legal_acts.includes("CONFIRM_DONE"),
    (act, utterance) => {
      const request = SubmitRequestSchema.parse({
        worker_id: workerId,
        act,
        utterance,
        origin: "human",
      });
      onSubmit(job.job_id, request).then((result) => {
        if (result.verdict === "rejected") {
          showError(root, `rejected: ${result.notes.join("; ")}`);
        }
      });
    },
  );

  return {
    element: root,
    tick: (nowMs) => {
      if (countdown.tick(nowMs)) lockView(root);
    },
  };
}

export function renderDesignerView(
  job: DesignerJob,
  workerId: string,
  onSubmit: SubmitHandler,
): ViewHandle {
  const root = el("div", "designer-view");
  root.appendChild(el("h2", "", `Session ${job.session_id} (${job.scenario})`));
  const countdown = renderCountdown(job.lease_expires_at);
  root.appendChild(countdown.element);

  root.appendChild(renderChat(job.history, job.instruction));

  let selectedPalette = 0;
  let grid: GridCanvas | null = null;
  let boxes: BoxCanvas | null = null;

  if (job.kind === "shape2d") {
    grid = new GridCanvas(job.canvas);
    const palette = el("div", "palette");
    PALETTE.forEach((entry, i) => {
      const swatch = el("button", `palette-swatch ${entry.color} ${entry.shape}`,
        SHAPE_GLYPHS[entry.shape]);
      swatch.addEventListener("click", () => {
        selectedPalette = i;
        palette
          .querySelectorAll(".palette-swatch")
          .forEach((node, j) => node.classList.toggle("selected", j === i));
      });
      palette.appendChild(swatch);
    });
    root.appendChild(palette);
    root.appendChild(renderGrid(job.canvas, grid, () => selectedPalette));
  } else {
    boxes = new BoxCanvas(job.canvas);
    const toolbar = el("div", "box-toolbar");
    const labelInput = el("input", "class-input");
    labelInput.placeholder = "class label";
    const addButton = el("button", "add-box", "Add box");
    toolbar.appendChild(labelInput);
    toolbar.appendChild(addButton);
    root.appendChild(toolbar);
    let stage = renderBoxes(boxes);
    const rerender = () => {
      const fresh = renderBoxes(boxes!);
      attachBoxEditing(fresh, boxes!, rerender);
      stage.replaceWith(fresh);
      stage = fresh;
    };
    attachBoxEditing(stage, boxes, rerender);
    addButton.addEventListener("click", () => {
      if (!labelInput.value) return;
      boxes!.add(labelInput.value, 0.4, 0.4, 0.2, 0.2);
      rerender();
    });
    root.appendChild(stage);
  }

  renderComposer(
    root,
    "designer",
    job.legal_acts,
    ["EDIT", "QUESTION", "OTHER"],
    () => true,
    (act, utterance) => {
      const request = SubmitRequestSchema.parse({
        worker_id: workerId,
        act,
        utterance,
        origin: "human",
        ...(act === "EDIT"
          ? { canvas: (grid ?? boxes)!.toLayout() }
          : {}),
      });
      onSubmit(job.job_id, request).then((result) => {
        if (result.verdict === "rejected") {
          // canvas model is untouched so the worker can adjust and retry
          showError(root, `rejected: ${result.notes.join("; ")}`);
        }
      });
    },
  );

  return {
    element: root,
    tick: (nowMs) => {
      if (countdown.tick(nowMs)) lockView(root);
    },
  };
}
