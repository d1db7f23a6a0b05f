import { describe, expect, it } from "vitest";

import {
  TRACE_CAP,
  addPendingTag,
  applyEvent,
  duePromptFlips,
  failPendingTag,
  initialState,
  remainingBaselineEpochs,
  setMeta,
  thresholdLine,
} from "../src/state.js";
import type { EpochFrame, SessionEvent, SessionMeta } from "../src/types.js";
import { validateCalibrationConfig, validateEpochConfig } from "../src/validate.js";

function epochFrame(index: number, bp: number, state: "vigilant" | "nonvigilant" | null): EpochFrame {
  return { type: "epoch", index, theta_bp: bp, threshold: 55.0, state, valid: state !== null };
}

function scriptedSequence(): SessionEvent[] {
  const events: SessionEvent[] = [{ type: "phase", phase: "calibrating", completed: 0 }];
  for (let k = 1; k <= 6; k++) events.push({ type: "phase", phase: "calibrating", completed: k });
  events.push({ type: "baseline", mean_theta_bp: 50.0, scaling: 1.1, threshold: 55.0 });
  events.push({ type: "phase", phase: "monitoring" });
  for (let i = 0; i < 10; i++) {
    events.push(epochFrame(6 + i, i % 2 === 0 ? 100.0 : 40.0, i % 2 === 0 ? "vigilant" : "nonvigilant"));
  }
  events.push({ type: "ended", reason: "end-of-stream", verdict_count: 10 });
  return events;
}

describe("scripted replay", () => {
  it("reaches the exact final state: indicator, threshold, 10 chart points", () => {
    let state = initialState();
    for (const ev of scriptedSequence()) state = applyEvent(state, ev);

    expect(state.epochs).toHaveLength(10);
    expect(state.epochs.map((e) => e.index)).toEqual([6, 7, 8, 9, 10, 11, 12, 13, 14, 15]);
    // last epoch (index 15, i=9) was nonvigilant
    expect(state.indicator).toBe("nonvigilant");
    expect(thresholdLine(state)).toBe(55.0);
    expect(state.baseline?.mean_theta_bp).toBe(50.0);
    expect(state.phase).toEqual({ type: "phase", phase: "monitoring" });
    expect(state.ended?.verdict_count).toBe(10);
    expect(state.connection).toBe("closed");
  });

  it("is deterministic: replaying twice gives identical states", () => {
    const run = () => {
      let state = initialState();
      for (const ev of scriptedSequence()) state = applyEvent(state, ev);
      return state;
    };
    expect(run()).toEqual(run());
  });

  it("never mutates prior states", () => {
    const s0 = initialState();
    const frozen = JSON.stringify(s0);
    applyEvent(s0, { type: "phase", phase: "monitoring" });
    applyEvent(s0, epochFrame(6, 1, "vigilant"));
    expect(JSON.stringify(s0)).toBe(frozen);
  });
});

describe("indicator mapping", () => {
  it.each([
    ["vigilant", "vigilant"],
    ["nonvigilant", "nonvigilant"],
    [null, "invalid"],
  ] as const)("state %s -> %s", (verdict, expected) => {
    const state = applyEvent(initialState(), epochFrame(6, 10, verdict));
    expect(state.indicator).toBe(expected);
  });
});

describe("trace cap", () => {
  it("keeps only the most recent 720 epochs, oldest evicted first", () => {
    let state = initialState();
    for (let i = 0; i < TRACE_CAP + 25; i++) {
      state = applyEvent(state, epochFrame(i, 1.0, "vigilant"));
    }
    expect(state.epochs).toHaveLength(TRACE_CAP);
    expect(state.epochs[0].index).toBe(25);
    expect(state.epochs[TRACE_CAP - 1].index).toBe(TRACE_CAP + 24);
  });
});

describe("tag reconciliation", () => {
  it("pending entries confirm on the service echo", () => {
    let state = addPendingTag(initialState(), "closed");
    expect(state.tags).toEqual([{ status: "closed", t: null, state: "pending" }]);
    state = applyEvent(state, { type: "tag", t: 42.5, status: "closed" });
    expect(state.tags).toEqual([{ status: "closed", t: 42.5, state: "confirmed" }]);
  });

  it("echoes from other clients append as confirmed", () => {
    const state = applyEvent(initialState(), { type: "tag", t: 10.0, status: "open" });
    expect(state.tags).toEqual([{ status: "open", t: 10.0, state: "confirmed" }]);
  });

  it("a rejected tag is marked failed", () => {
    let state = addPendingTag(initialState(), "open");
    state = failPendingTag(state, "open");
    expect(state.tags[0].state).toBe("failed");
  });
});

describe("baseline countdown", () => {
  const meta = {
    calibration: { baseline_epoch_count: 6, scaling: 1.1 },
  } as unknown as SessionMeta;

  it("counts down remaining calibration epochs", () => {
    let state = setMeta(initialState(), meta);
    state = applyEvent(state, { type: "phase", phase: "calibrating", completed: 0 });
    expect(remainingBaselineEpochs(state)).toBe(6);
    state = applyEvent(state, { type: "phase", phase: "calibrating", completed: 4 });
    expect(remainingBaselineEpochs(state)).toBe(2);
    state = applyEvent(state, { type: "phase", phase: "monitoring" });
    expect(remainingBaselineEpochs(state)).toBeNull();
  });
});

describe("instructed prompt schedule", () => {
  it("flips open/closed every period from the monitoring start", () => {
    // baseline ends at 30 s; sample clock advances epoch by epoch
    const flips: { t: number; status: string }[] = [];
    let prev = 0;
    for (let t = 5; t <= 180; t += 5) {
      flips.push(...duePromptFlips(prev, t, 30, 30));
      prev = t;
    }
    expect(flips).toEqual([
      { t: 30, status: "open" },
      { t: 60, status: "closed" },
      { t: 90, status: "open" },
      { t: 120, status: "closed" },
      { t: 150, status: "open" },
      { t: 180, status: "closed" },
    ]);
  });

  it("emits nothing before the start or for a zero period", () => {
    expect(duePromptFlips(0, 29, 30, 30)).toEqual([]);
    expect(duePromptFlips(0, 300, 30, 0)).toEqual([]);
  });
});

describe("client-side validation", () => {
  it("rejects an inverted band without any request", () => {
    const errors = validateEpochConfig({
      sample_rate_hz: 256,
      epoch_seconds: 5,
      window_fn: "rect",
      band_lo_hz: 8,
      band_hi_hz: 4,
    });
    expect(errors.some((e) => e.field === "band")).toBe(true);
  });

  it("rejects out-of-range epoch seconds", () => {
    const errors = validateEpochConfig({
      sample_rate_hz: 256,
      epoch_seconds: 12,
      window_fn: "rect",
      band_lo_hz: 4,
      band_hi_hz: 8,
    });
    expect(errors.some((e) => e.field === "epoch_seconds")).toBe(true);
  });

  it("accepts the defaults", () => {
    expect(
      validateEpochConfig({
        sample_rate_hz: 256,
        epoch_seconds: 5,
        window_fn: "rect",
        band_lo_hz: 4,
        band_hi_hz: 8,
      }),
    ).toEqual([]);
    expect(validateCalibrationConfig({ baseline_epoch_count: 6, scaling: 1.1 })).toEqual([]);
  });

  it("rejects non-positive scaling", () => {
    const errors = validateCalibrationConfig({ baseline_epoch_count: 6, scaling: 0 });
    expect(errors.some((e) => e.field === "scaling")).toBe(true);
  });
});
