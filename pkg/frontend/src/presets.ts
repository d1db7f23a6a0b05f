/**
 * Demo synthetic sources the console can start without any hardware: an
 * eyes-closed baseline segment then alternating open/closed segments, the
 * same shape the backend's presets use.
 */

export interface SyntheticPresetOptions {
  amplitudeUv?: number;
  noiseSigmaUv?: number;
  seed?: number;
  speed?: number; // pacing multiple; 1 = real time
}

export function alternatingSource(opts: SyntheticPresetOptions = {}): Record<string, unknown> {
  const a = opts.amplitudeUv ?? 10.0;
  const sigma = opts.noiseSigmaUv ?? 2.5;
  const segments = [];
  for (let i = 0; i < 6; i++) {
    const open = i % 2 === 1;
    segments.push({
      duration_s: 30.0,
      components: [{ freq_hz: 6.0, amplitude_uv: open ? 2 * a : a, phase_rad: 0.0 }],
      noise_sigma_uv: sigma,
      eye_status: open ? "open" : "closed",
    });
  }
  return {
    kind: "synthetic",
    config: { sample_rate_hz: 256, seed: opts.seed ?? 7, segments },
    speed: opts.speed ?? 1.0,
  };
}
