/** Client-side mirrors of the service's config invariants: catch bad input
 * before any request is sent. */

import type { CalibrationConfigBody, EpochConfigBody } from "./types.js";

export interface FieldError {
  field: string;
  message: string;
}

export function validateEpochConfig(cfg: EpochConfigBody): FieldError[] {
  const errors: FieldError[] = [];
  if (!Number.isInteger(cfg.sample_rate_hz) || cfg.sample_rate_hz <= 0) {
    errors.push({ field: "sample_rate_hz", message: "must be a positive integer" });
  }
  if (!Number.isInteger(cfg.epoch_seconds) || cfg.epoch_seconds < 2 || cfg.epoch_seconds > 10) {
    errors.push({ field: "epoch_seconds", message: "must be 2..10 seconds" });
  }
  const nyquist = cfg.sample_rate_hz / 2;
  if (!(cfg.band_lo_hz >= 0 && cfg.band_lo_hz < cfg.band_hi_hz && cfg.band_hi_hz <= nyquist)) {
    errors.push({ field: "band", message: `need 0 <= lo < hi <= ${nyquist}` });
  }
  return errors;
}

export function validateCalibrationConfig(cfg: CalibrationConfigBody): FieldError[] {
  const errors: FieldError[] = [];
  if (!Number.isInteger(cfg.baseline_epoch_count) || cfg.baseline_epoch_count < 1) {
    errors.push({ field: "baseline_epoch_count", message: "must be a positive integer" });
  }
  if (!(cfg.scaling > 0)) {
    errors.push({ field: "scaling", message: "must be > 0" });
  }
  return errors;
}
