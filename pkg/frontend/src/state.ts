/**
 * Console state and its pure reducer.
 *
 * Every rendered value is derived from the last received SessionEvent; the
 * console never predicts ahead of the service. Replaying a recorded event
 * sequence through applyEvent reproduces the exact same final state.
 */

import type {
  BaselineFrame,
  EndedFrame,
  EpochFrame,
  EyeStatus,
  PhaseFrame,
  SessionEvent,
  SessionMeta,
  SessionReportBody,
} from "./types.js";

/** Most recent epochs kept for the chart: one hour at 5 s per epoch. */
export const TRACE_CAP = 720;

export type Indicator = "vigilant" | "nonvigilant" | "invalid" | "unknown";

export type ConnectionStatus = "idle" | "connecting" | "live" | "closed" | "error";

export interface TagEntry {
  status: EyeStatus;
  t: number | null; // sample time, known once the service echoes
  state: "pending" | "confirmed" | "failed";
}

export interface ConsoleState {
  connection: ConnectionStatus;
  meta: SessionMeta | null;
  phase: PhaseFrame | null;
  baseline: BaselineFrame | null;
  epochs: EpochFrame[];
  tags: TagEntry[];
  indicator: Indicator;
  ended: EndedFrame | null;
  report: SessionReportBody | null;
  error: string | null;
}

export function initialState(): ConsoleState {
  return {
    connection: "idle",
    meta: null,
    phase: null,
    baseline: null,
    epochs: [],
    tags: [],
    indicator: "unknown",
    ended: null,
    report: null,
    error: null,
  };
}

export function indicatorFor(frame: EpochFrame): Indicator {
  if (frame.state === "vigilant") return "vigilant";
  if (frame.state === "nonvigilant") return "nonvigilant";
  return "invalid";
}

/** Apply one live-stream frame; returns a new state, never mutates. */
export function applyEvent(state: ConsoleState, event: SessionEvent): ConsoleState {
  switch (event.type) {
    case "phase":
      return { ...state, phase: event };
    case "baseline":
      return { ...state, baseline: event };
    case "epoch": {
      const epochs = [...state.epochs, event];
      if (epochs.length > TRACE_CAP) epochs.splice(0, epochs.length - TRACE_CAP);
      return { ...state, epochs, indicator: indicatorFor(event) };
    }
    case "tag":
      return { ...state, tags: confirmTag(state.tags, event.status, event.t) };
    case "ended":
      return { ...state, ended: event, connection: "closed" };
  }
}

/** Optimistic tag entry, shown as pending until the service echoes it. */
export function addPendingTag(state: ConsoleState, status: EyeStatus): ConsoleState {
  return { ...state, tags: [...state.tags, { status, t: null, state: "pending" }] };
}

function confirmTag(tags: TagEntry[], status: EyeStatus, t: number): TagEntry[] {
  const next = tags.slice();
  const i = next.findIndex((e) => e.state === "pending" && e.status === status);
  if (i >= 0) {
    next[i] = { status, t, state: "confirmed" };
  } else {
    // tag placed by another client; still part of the session's truth
    next.push({ status, t, state: "confirmed" });
  }
  return next;
}

/** The earliest matching pending tag is marked failed (e.g. a 409). */
export function failPendingTag(state: ConsoleState, status: EyeStatus): ConsoleState {
  const tags = state.tags.slice();
  const i = tags.findIndex((e) => e.state === "pending" && e.status === status);
  if (i >= 0) tags[i] = { ...tags[i], state: "failed" };
  return { ...state, tags };
}

export function setConnection(state: ConsoleState, connection: ConnectionStatus): ConsoleState {
  return { ...state, connection };
}

export function setMeta(state: ConsoleState, meta: SessionMeta): ConsoleState {
  return { ...state, meta };
}

export function setReport(state: ConsoleState, report: SessionReportBody): ConsoleState {
  return { ...state, report };
}

export function setError(state: ConsoleState, error: string | null): ConsoleState {
  return { ...state, error, connection: error ? "error" : state.connection };
}

/** Remaining eyes-closed epochs during calibration, for the countdown. */
export function remainingBaselineEpochs(state: ConsoleState): number | null {
  if (!state.phase || state.phase.phase !== "calibrating" || !state.meta) return null;
  return state.meta.calibration.baseline_epoch_count - (state.phase.completed ?? 0);
}

/** The chart's threshold line; exactly the baseline frame's threshold field. */
export function thresholdLine(state: ConsoleState): number | null {
  return state.baseline ? state.baseline.threshold : null;
}

/**
 * Instructed-mode prompt schedule: alternating open/closed flips every
 * `periodS` of sample time, starting at the first monitored epoch. Returns
 * the flips that became due between the two sample-clock readings.
 */
export function duePromptFlips(
  prevT: number,
  nowT: number,
  startT: number,
  periodS: number,
): { t: number; status: EyeStatus }[] {
  const flips: { t: number; status: EyeStatus }[] = [];
  if (periodS <= 0) return flips;
  let k = Math.max(0, Math.floor((prevT - startT) / periodS) + 1);
  if (prevT < startT) k = 0;
  for (; startT + k * periodS <= nowT; k++) {
    flips.push({ t: startT + k * periodS, status: k % 2 === 0 ? "open" : "closed" });
  }
  return flips;
}
