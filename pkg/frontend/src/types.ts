/** Wire shapes of the session service: HTTP bodies and live-stream frames. */

export type VigilanceState = "vigilant" | "nonvigilant";
export type EyeStatus = "open" | "closed";
export type Mode = "instructed" | "natural";

export interface PhaseFrame {
  type: "phase";
  phase: "idle" | "calibrating" | "monitoring";
  completed?: number;
}

export interface BaselineFrame {
  type: "baseline";
  mean_theta_bp: number;
  scaling: number;
  threshold: number;
  degenerate?: boolean;
}

export interface EpochFrame {
  type: "epoch";
  index: number;
  theta_bp: number;
  threshold: number;
  state: VigilanceState | null;
  valid: boolean;
}

export interface TagFrame {
  type: "tag";
  t: number;
  status: EyeStatus;
}

export interface EndedFrame {
  type: "ended";
  reason: string;
  verdict_count: number;
  skip_count?: number;
}

export type SessionEvent = PhaseFrame | BaselineFrame | EpochFrame | TagFrame | EndedFrame;

export interface EpochConfigBody {
  sample_rate_hz: number;
  epoch_seconds: number;
  window_fn: "rect" | "hann";
  band_lo_hz: number;
  band_hi_hz: number;
}

export interface CalibrationConfigBody {
  baseline_epoch_count: number;
  scaling: number;
}

export interface SessionMeta {
  session_id: string;
  created_at: string | null;
  mode: Mode;
  source: Record<string, unknown>;
  epoch: EpochConfigBody;
  calibration: CalibrationConfigBody;
  seed: number | null;
  record_raw: boolean;
  phase: { phase: string; completed?: number };
  ended: boolean;
  verdict_count: number;
  tag_count: number;
  skip_count: number;
  latest_t: number;
}

export interface SessionReportBody {
  report: {
    session_id: string;
    mode: Mode;
    n_epochs: number;
    n_correct: number;
    accuracy: number;
  };
  confusion: {
    counts: Record<EyeStatus, Record<EyeStatus, number>>;
    normalized: Record<EyeStatus, Record<EyeStatus, number>>;
  };
}
