/** Canvas trace of theta band power per epoch with the threshold line. */

import type { EpochFrame } from "./types.js";

const COLORS: Record<string, string> = {
  vigilant: "#2e9e4f",
  nonvigilant: "#d99114",
  invalid: "#8a8a8a",
};

export function drawTrace(
  canvas: HTMLCanvasElement,
  epochs: EpochFrame[],
  threshold: number | null,
): void {
  const ctx = canvas.getContext("2d");
  if (!ctx) return;
  const { width, height } = canvas;
  ctx.clearRect(0, 0, width, height);
  ctx.fillStyle = "#11151a";
  ctx.fillRect(0, 0, width, height);

  const values = epochs.filter((e) => e.valid).map((e) => e.theta_bp);
  if (threshold !== null) values.push(threshold);
  if (values.length === 0) {
    ctx.fillStyle = "#667";
    ctx.font = "13px sans-serif";
    ctx.fillText("waiting for epochs...", 12, height / 2);
    return;
  }
  const maxV = Math.max(...values) * 1.15 || 1;
  const pad = 28;
  const plotW = width - pad * 2;
  const plotH = height - pad * 2;
  const n = Math.max(epochs.length, 24);
  const xAt = (i: number) => pad + (plotW * i) / (n - 1 || 1);
  const yAt = (v: number) => pad + plotH * (1 - v / maxV);

  // threshold line
  if (threshold !== null) {
    ctx.strokeStyle = "#c33";
    ctx.setLineDash([6, 4]);
    ctx.beginPath();
    ctx.moveTo(pad, yAt(threshold));
    ctx.lineTo(width - pad, yAt(threshold));
    ctx.stroke();
    ctx.setLineDash([]);
    ctx.fillStyle = "#c55";
    ctx.font = "11px sans-serif";
    ctx.fillText(`threshold ${threshold.toFixed(2)}`, pad + 4, yAt(threshold) - 5);
  }

  // band-power polyline over valid epochs
  ctx.strokeStyle = "#4aa3c7";
  ctx.lineWidth = 1.5;
  ctx.beginPath();
  let started = false;
  epochs.forEach((e, i) => {
    if (!e.valid) {
      started = false;
      return;
    }
    const x = xAt(i);
    const y = yAt(e.theta_bp);
    if (started) ctx.lineTo(x, y);
    else ctx.moveTo(x, y);
    started = true;
  });
  ctx.stroke();

  // per-epoch markers colored by verdict
  epochs.forEach((e, i) => {
    const key = e.state ?? "invalid";
    ctx.fillStyle = COLORS[key];
    ctx.beginPath();
    ctx.arc(xAt(i), e.valid ? yAt(e.theta_bp) : height - pad, 3, 0, Math.PI * 2);
    ctx.fill();
  });

  // axis hints
  ctx.fillStyle = "#99a";
  ctx.font = "11px sans-serif";
  ctx.fillText(`${maxV.toFixed(1)} uV²`, 4, pad);
  if (epochs.length > 0) {
    ctx.fillText(`epoch ${epochs[0].index}`, pad, height - 8);
    ctx.fillText(`epoch ${epochs[epochs.length - 1].index}`, width - pad - 50, height - 8);
  }
}
