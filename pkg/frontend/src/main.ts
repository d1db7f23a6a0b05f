/** Console wiring: form -> service, live stream -> state -> render. */

import { ApiError, ServiceClient } from "./api.js";
import { alternatingSource } from "./presets.js";
import {
  ConsoleState,
  addPendingTag,
  applyEvent,
  duePromptFlips,
  failPendingTag,
  initialState,
  setConnection,
  setError,
  setMeta,
  setReport,
} from "./state.js";
import type { CalibrationConfigBody, EpochConfigBody, EyeStatus, Mode } from "./types.js";
import { validateCalibrationConfig, validateEpochConfig } from "./validate.js";
import { render } from "./view.js";

let state: ConsoleState = initialState();
let client: ServiceClient | null = null;
let sessionId: string | null = null;
let unsubscribe: (() => void) | null = null;
let promptClockT = 0; // last sample time seen, for the instructed schedule
let promptPeriodS = 30;
let promptStartT: number | null = null;

const $ = (id: string) => document.getElementById(id)! as HTMLInputElement;

function update(next: ConsoleState) {
  state = next;
  render(document, state);
  syncControls();
}

function syncControls() {
  const monitoring = state.phase?.phase === "monitoring" && !state.ended;
  ($("tag-open") as HTMLButtonElement).disabled = !monitoring;
  ($("tag-closed") as HTMLButtonElement).disabled = !monitoring;
  ($("btn-stop") as HTMLButtonElement).disabled = !sessionId || !!state.ended;
  const reconnect = $("btn-reconnect") as HTMLButtonElement;
  reconnect.style.display =
    sessionId && (state.connection === "closed" || state.connection === "error") && !state.ended
      ? "inline-block"
      : "none";
}

function readConfigs(): { epoch: EpochConfigBody; calibration: CalibrationConfigBody } {
  const [lo, hi] = $("band").value.split(":").map(Number);
  return {
    epoch: {
      sample_rate_hz: Number($("sample-rate").value),
      epoch_seconds: Number($("epoch-seconds").value),
      window_fn: "rect",
      band_lo_hz: lo,
      band_hi_hz: hi,
    },
    calibration: {
      baseline_epoch_count: Number($("baseline-epochs").value),
      scaling: Number($("scaling").value),
    },
  };
}

async function startSession() {
  const base = $("base-url").value;
  const mode = $("mode").value as Mode;
  const { epoch, calibration } = readConfigs();
  const errors = [...validateEpochConfig(epoch), ...validateCalibrationConfig(calibration)];
  if (errors.length > 0) {
    update(setError(state, errors.map((e) => `${e.field}: ${e.message}`).join("; ")));
    return;
  }
  const source =
    $("source-kind").value === "network"
      ? { kind: "network", listen: $("listen-addr").value }
      : alternatingSource({
          noiseSigmaUv: Number($("noise").value),
          speed: Number($("speed").value),
        });

  client = new ServiceClient(base);
  update(setError(setConnection(initialState(), "connecting"), null));
  try {
    const meta = await client.createSession({ source, epoch, calibration, mode });
    sessionId = meta.session_id;
    promptClockT = 0;
    promptStartT = calibration.baseline_epoch_count * epoch.epoch_seconds;
    promptPeriodS = Number($("prompt-period").value) || 30;
    update(setMeta(state, meta));
    subscribe();
  } catch (err) {
    update(setError(state, err instanceof Error ? err.message : String(err)));
  }
}

function subscribe() {
  if (!client || !sessionId) return;
  unsubscribe?.();
  unsubscribe = client.subscribeLive(
    sessionId,
    (event) => {
      update(applyEvent(state, event));
      if (event.type === "epoch") {
        onSampleClock((event.index + 1) * (state.meta?.epoch.epoch_seconds ?? 5));
      }
      if (event.type === "ended") void fetchReport();
    },
    (reason) => {
      if (!state.ended) update(setConnection(state, reason === "overflow" ? "error" : "closed"));
    },
  );
  update(setConnection(state, "live"));
}

/** Instructed mode: alternate the prompt and auto-send a tag at each flip. */
function onSampleClock(nowT: number) {
  const instructed = state.meta?.mode === "instructed";
  const prompt = document.getElementById("prompt-line")!;
  if (!instructed || promptStartT === null || state.ended) {
    prompt.textContent = "";
    promptClockT = nowT;
    return;
  }
  for (const flip of duePromptFlips(promptClockT, nowT, promptStartT, promptPeriodS)) {
    prompt.textContent = `please keep your eyes ${flip.status.toUpperCase()}`;
    void sendTag(flip.status);
  }
  promptClockT = nowT;
}

async function sendTag(status: EyeStatus) {
  if (!client || !sessionId) return;
  update(addPendingTag(state, status));
  try {
    await client.postTag(sessionId, status);
    // the confirming frame arrives over the live stream
  } catch (err) {
    update(failPendingTag(state, status));
    if (err instanceof ApiError && err.status !== 409) {
      update(setError(state, err.message));
    }
  }
}

async function stopSession() {
  if (!client || !sessionId) return;
  try {
    await client.stopSession(sessionId);
  } catch (err) {
    update(setError(state, err instanceof Error ? err.message : String(err)));
  }
}

async function fetchReport() {
  if (!client || !sessionId) return;
  try {
    update(setReport(state, await client.getReport(sessionId)));
  } catch {
    // sessions without tags have no report; the ended line still shows
  }
}

function wire() {
  document.getElementById("btn-start")!.addEventListener("click", () => void startSession());
  document.getElementById("btn-stop")!.addEventListener("click", () => void stopSession());
  document.getElementById("btn-reconnect")!.addEventListener("click", () => subscribe());
  document.getElementById("tag-open")!.addEventListener("click", () => void sendTag("open"));
  document.getElementById("tag-closed")!.addEventListener("click", () => void sendTag("closed"));
  $("source-kind").addEventListener("change", () => {
    document.getElementById("network-row")!.style.display =
      $("source-kind").value === "network" ? "flex" : "none";
    document.getElementById("synthetic-row")!.style.display =
      $("source-kind").value === "network" ? "none" : "flex";
  });
  update(state);
}

wire();
