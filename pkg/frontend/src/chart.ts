/** Canvas trend chart: levels as lines, setpoints as dashed steps. */

import type { TrendPoint } from './trends';

export interface Series {
  label: string;
  color: string;
  dashed?: boolean;
  value: (p: TrendPoint) => number;
}

export const LEVEL_SERIES: Series[] = [
  { label: 'water level', color: '#2c7bb6', value: (p) => p.water_level_pct },
  { label: 'water setpoint', color: '#2c7bb6', dashed: true, value: (p) => p.setpoint_w },
  { label: 'oil level', color: '#d7701f', value: (p) => p.oil_level_pct },
  { label: 'oil setpoint', color: '#d7701f', dashed: true, value: (p) => p.setpoint_o },
];

export function drawTrends(canvas: HTMLCanvasElement, points: TrendPoint[], series: Series[] = LEVEL_SERIES): void {
  const ctx = canvas.getContext('2d');
  if (ctx === null) return;
  const { width, height } = canvas;
  ctx.clearRect(0, 0, width, height);
  ctx.fillStyle = '#fafafa';
  ctx.fillRect(0, 0, width, height);
  if (points.length < 2) return;

  const t0 = points[0]!.time_s;
  const t1 = points[points.length - 1]!.time_s;
  const span = Math.max(t1 - t0, 1e-9);
  const pad = 24;
  const x = (t: number) => pad + ((t - t0) / span) * (width - 2 * pad);
  const y = (pct: number) => height - pad - (pct / 100) * (height - 2 * pad);

  ctx.strokeStyle = '#ddd';
  ctx.lineWidth = 1;
  for (const grid of [0, 25, 50, 75, 100]) {
    ctx.beginPath();
    ctx.moveTo(pad, y(grid));
    ctx.lineTo(width - pad, y(grid));
    ctx.stroke();
    ctx.fillStyle = '#888';
    ctx.fillText(`${grid}%`, 2, y(grid) + 3);
  }

  for (const s of series) {
    ctx.strokeStyle = s.color;
    ctx.lineWidth = s.dashed ? 1 : 2;
    ctx.setLineDash(s.dashed ? [5, 4] : []);
    ctx.beginPath();
    points.forEach((p, i) => {
      const px = x(p.time_s);
      const py = y(s.value(p));
      if (i === 0) ctx.moveTo(px, py);
      else ctx.lineTo(px, py);
    });
    ctx.stroke();
  }
  ctx.setLineDash([]);
}
