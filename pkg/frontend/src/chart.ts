// Scrolling dual-trace renderer. Telemetry can outrun the pixel budget, so
// each pixel column keeps the min and max of the samples that fell into it;
// spikes (threshold events) stay visible after decimation.

export interface Column {
  min: number;
  max: number;
}

/** Decimate samples into `columns` min/max buckets (left = oldest). */
export function decimateMinMax(samples: readonly number[], columns: number): Column[] {
  if (columns < 1 || samples.length === 0) return [];
  const out: Column[] = [];
  const per = samples.length / columns;
  for (let c = 0; c < columns; c++) {
    const start = Math.floor(c * per);
    const end = Math.max(start + 1, Math.floor((c + 1) * per));
    let lo = Infinity;
    let hi = -Infinity;
    for (let i = start; i < end && i < samples.length; i++) {
      const v = samples[i];
      if (v < lo) lo = v;
      if (v > hi) hi = v;
    }
    if (lo !== Infinity) out.push({ min: lo, max: hi });
  }
  return out;
}

export class TraceChart {
  private readonly ctx: CanvasRenderingContext2D;

  constructor(private readonly canvas: HTMLCanvasElement) {
    const ctx = canvas.getContext("2d");
    if (!ctx) throw new Error("canvas 2d context unavailable");
    this.ctx = ctx;
  }

  render(raw: readonly number[], recon: readonly number[]): void {
    const { width, height } = this.canvas;
    this.ctx.clearRect(0, 0, width, height);
    this.ctx.fillStyle = "#0b1020";
    this.ctx.fillRect(0, 0, width, height);
    this.trace(raw, width, height, "#7de0ff");
    this.trace(recon, width, height, "#ffb578");
  }

  private trace(samples: readonly number[], width: number, height: number, color: string): void {
    if (samples.length === 0) return;
    let lo = Infinity;
    let hi = -Infinity;
    for (const v of samples) {
      if (v < lo) lo = v;
      if (v > hi) hi = v;
    }
    if (lo === hi) {
      lo -= 1;
      hi += 1;
    }
    const y = (v: number) => height - ((v - lo) / (hi - lo)) * (height - 8) - 4;
    const cols = decimateMinMax(samples, width);
    this.ctx.strokeStyle = color;
    this.ctx.lineWidth = 1;
    this.ctx.beginPath();
    cols.forEach((col, x) => {
      this.ctx.moveTo(x + 0.5, y(col.max));
      this.ctx.lineTo(x + 0.5, y(col.min) + 0.5);
    });
    this.ctx.stroke();
  }
}
