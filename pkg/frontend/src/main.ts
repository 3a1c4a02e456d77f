/**
 * App shell: pick a worker id and role, claim the next job, work it, and
 * poll the session view between turns. Asynchronous by design, so polling
 * (not push) is all the liveness the task needs.
 */
import { DispatchClient } from "./api.js";
import { renderDesignerView, renderDirectorView, type ViewHandle } from "./views.js";
import { DEFAULT_CONFIG, type Role } from "./types.js";

const config = { ...DEFAULT_CONFIG };
const client = new DispatchClient(config);

function byId<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing #${id}`);
  return node as T;
}

let activeView: ViewHandle | null = null;
let countdownTimer: number | undefined;
let pollTimer: number | undefined;

function mount(view: ViewHandle): void {
  const host = byId<HTMLDivElement>("workspace");
  host.textContent = "";
  host.appendChild(view.element);
  activeView = view;
  window.clearInterval(countdownTimer);
  countdownTimer = window.setInterval(() => activeView?.tick(Date.now()), 1000);
}

function status(text: string): void {
  byId<HTMLParagraphElement>("status").textContent = text;
}

async function claimLoop(workerId: string, role: Role): Promise<void> {
  window.clearTimeout(pollTimer);
  status("looking for work...");
  const job = await client.claimJob(workerId, role);
  if (job === null) {
    status(`no open ${role} jobs right now; retrying`);
    pollTimer = window.setTimeout(() => void claimLoop(workerId, role), config.pollMs);
    return;
  }
  status(`working job ${job.job_id} in session ${job.session_id}`);
  const onSubmit = async (jobId: string, request: Parameters<DispatchClient["submitTurn"]>[1]) => {
    const result = await client.submitTurn(jobId, request);
    if (result.verdict !== "rejected") {
      status(`turn ${result.verdict}; session is ${result.session_status}`);
      pollTimer = window.setTimeout(() => void claimLoop(workerId, role), config.pollMs);
    }
    return result;
  };
  const view =
    job.role === "designer"
      ? renderDesignerView(job, workerId, onSubmit)
      : renderDirectorView(job, workerId, onSubmit);
  view.element.addEventListener("click", (ev) => {
    if ((ev.target as HTMLElement).classList?.contains("reclaim")) {
      void claimLoop(workerId, role);
    }
  });
  mount(view);
}

export function start(): void {
  byId<HTMLButtonElement>("claim").addEventListener("click", () => {
    const workerId = byId<HTMLInputElement>("worker-id").value.trim();
    const role = byId<HTMLSelectElement>("role").value as Role;
    if (!workerId) {
      status("enter a worker id first");
      return;
    }
    void claimLoop(workerId, role).catch((err) => status(String(err)));
  });
}

if (typeof document !== "undefined" && document.getElementById("claim")) {
  start();
}
