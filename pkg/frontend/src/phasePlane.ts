// Canvas phase-plane view: axes, nullclines, equilibria, threshold curve
// with the infected-wins basin shaded, heteroclinic branches, the start
// marker, and the simulated orbit with jump arrows. Pixel mapping and tick
// placement are presentation arithmetic; every plotted value is a service
// number taken verbatim from the session overlays.

import type { SessionState } from './state.js';
import { thresholdReadout } from './state.js';
import type { PhasePoint } from './types.js';

export interface ViewBox {
  nMax: number;
  wMax: number;
}

const MARGIN = { left: 58, right: 14, top: 12, bottom: 40 };

export class PhasePlane {
  onClick: ((point: PhasePoint) => void) | null = null;
  private hover: PhasePoint | null = null;

  constructor(
    private canvas: HTMLCanvasElement,
    private session: SessionState,
  ) {
    canvas.addEventListener('click', (ev) => {
      const point = this.fromPixel(ev.offsetX, ev.offsetY);
      if (point && this.onClick) this.onClick(point);
    });
    canvas.addEventListener('mousemove', (ev) => {
      this.hover = this.fromPixel(ev.offsetX, ev.offsetY);
      this.draw();
    });
    canvas.addEventListener('mouseleave', () => {
      this.hover = null;
      this.draw();
    });
  }

  // Axis scales default to [0, 1.2 n#] x [0, 2 n#] so the steepest published
  // single-release threshold (1.85 n#) stays visible.
  viewBox(): ViewBox {
    const eq = this.session.equilibria?.data;
    const nSharp = eq ? eq.n_sharp : 2000;
    return { nMax: 1.2 * nSharp, wMax: 2.0 * nSharp };
  }

  private plotArea(): { x: number; y: number; width: number; height: number } {
    return {
      x: MARGIN.left,
      y: MARGIN.top,
      width: this.canvas.width - MARGIN.left - MARGIN.right,
      height: this.canvas.height - MARGIN.top - MARGIN.bottom,
    };
  }

  toPixel(point: PhasePoint): [number, number] {
    const view = this.viewBox();
    const area = this.plotArea();
    return [
      area.x + (point.n / view.nMax) * area.width,
      area.y + area.height - (point.w / view.wMax) * area.height,
    ];
  }

  fromPixel(px: number, py: number): PhasePoint | null {
    const view = this.viewBox();
    const area = this.plotArea();
    const n = ((px - area.x) / area.width) * view.nMax;
    const w = ((area.y + area.height - py) / area.height) * view.wMax;
    if (n < 0 || w < 0 || n > view.nMax || w > view.wMax) return null;
    return { n, w };
  }

  draw(): void {
    const ctx = this.canvas.getContext('2d');
    if (!ctx) return;
    ctx.clearRect(0, 0, this.canvas.width, this.canvas.height);
    this.drawAxes(ctx);
    this.drawBasinShading(ctx);
    this.drawNullclines(ctx);
    this.drawManifolds(ctx);
    this.drawSeparatrix(ctx);
    this.drawOrbit(ctx);
    this.drawEquilibria(ctx);
    this.drawStart(ctx);
    this.drawHoverReadout(ctx);
    this.drawStaleFlags(ctx);
  }

  private drawAxes(ctx: CanvasRenderingContext2D): void {
    const area = this.plotArea();
    const view = this.viewBox();
    ctx.strokeStyle = '#444';
    ctx.lineWidth = 1;
    ctx.strokeRect(area.x, area.y, area.width, area.height);
    ctx.fillStyle = '#333';
    ctx.font = '11px sans-serif';
    ctx.textAlign = 'center';
    const nStep = tickStep(view.nMax);
    for (let n = 0; n <= view.nMax; n += nStep) {
      const [px] = this.toPixel({ n, w: 0 });
      ctx.fillText(String(Math.round(n)), px, area.y + area.height + 14);
    }
    ctx.fillText('wild population N', area.x + area.width / 2, area.y + area.height + 30);
    ctx.textAlign = 'right';
    const wStep = tickStep(view.wMax);
    for (let w = 0; w <= view.wMax; w += wStep) {
      const [, py] = this.toPixel({ n: 0, w });
      ctx.fillText(String(Math.round(w)), area.x - 6, py + 4);
    }
    ctx.save();
    ctx.translate(14, area.y + area.height / 2);
    ctx.rotate(-Math.PI / 2);
    ctx.textAlign = 'center';
    ctx.fillText('infected population W', 0, 0);
    ctx.restore();
  }

  private drawBasinShading(ctx: CanvasRenderingContext2D): void {
    const sep = this.session.separatrix;
    if (!sep) return;
    const view = this.viewBox();
    const area = this.plotArea();
    ctx.beginPath();
    const points = sep.data.points;
    const [x0, y0] = this.toPixel(points[0]);
    ctx.moveTo(x0, y0);
    for (const point of points) {
      const [px, py] = this.toPixel(point);
      ctx.lineTo(Math.min(px, area.x + area.width), Math.max(py, area.y));
    }
    const last = points[points.length - 1];
    const [lastX] = this.toPixel({ n: Math.min(last.n, view.nMax), w: 0 });
    ctx.lineTo(lastX, area.y);
    ctx.lineTo(area.x, area.y);
    ctx.closePath();
    ctx.fillStyle = sep.stale ? 'rgba(150,150,150,0.12)' : 'rgba(60,170,90,0.15)';
    ctx.fill();
  }

  private drawPolyline(
    ctx: CanvasRenderingContext2D,
    points: PhasePoint[],
    style: string,
    width: number,
    dash: number[] = [],
  ): void {
    if (points.length < 2) return;
    ctx.beginPath();
    ctx.setLineDash(dash);
    const [x0, y0] = this.toPixel(points[0]);
    ctx.moveTo(x0, y0);
    for (const point of points.slice(1)) {
      const [px, py] = this.toPixel(point);
      ctx.lineTo(px, py);
    }
    ctx.strokeStyle = style;
    ctx.lineWidth = width;
    ctx.stroke();
    ctx.setLineDash([]);
  }

  private drawNullclines(ctx: CanvasRenderingContext2D): void {
    const eq = this.session.equilibria;
    if (!eq) return;
    const faded = eq.stale;
    this.drawPolyline(
      ctx,
      eq.data.nullclines.dn_zero,
      faded ? '#b8c4de' : '#3b6fd4',
      1.2,
      [5, 4],
    );
    this.drawPolyline(
      ctx,
      eq.data.nullclines.dw_zero,
      faded ? '#debcbc' : '#d44a3b',
      1.2,
      [5, 4],
    );
  }

  private drawManifolds(ctx: CanvasRenderingContext2D): void {
    const sep = this.session.separatrix;
    const manifold = sep?.data.unstable_manifold;
    if (!sep || !manifold) return;
    const style = sep.stale ? '#cdbfdd' : '#8e44ad';
    this.drawPolyline(ctx, manifold.to_en, style, 1.4);
    this.drawPolyline(ctx, manifold.to_ew, style, 1.4);
  }

  private drawSeparatrix(ctx: CanvasRenderingContext2D): void {
    const sep = this.session.separatrix;
    if (!sep) return;
    this.drawPolyline(
      ctx,
      sep.data.points,
      sep.stale ? '#9fb5a4' : '#1e8449',
      2.0,
    );
  }

  private drawOrbit(ctx: CanvasRenderingContext2D): void {
    const sim = this.session.simulation;
    if (!sim) return;
    const orbit = sim.data.n.map((n, i) => ({ n, w: sim.data.w[i] }));
    this.drawPolyline(ctx, orbit, sim.stale ? '#c9c9c9' : '#e67e22', 1.8);
    // jump arrows: vertical W increments at release instants
    ctx.strokeStyle = sim.stale ? '#c9c9c9' : '#b9770e';
    ctx.fillStyle = ctx.strokeStyle;
    for (const jump of sim.data.jumps) {
      const idx = nearestIndex(sim.data.t, jump.t);
      const n = sim.data.n[idx];
      const [px, pyFrom] = this.toPixel({ n, w: jump.w_before });
      const [, pyTo] = this.toPixel({ n, w: jump.w_after });
      ctx.beginPath();
      ctx.moveTo(px, pyFrom);
      ctx.lineTo(px, pyTo);
      ctx.stroke();
      ctx.beginPath();
      ctx.moveTo(px, pyTo);
      ctx.lineTo(px - 3, pyTo + 6);
      ctx.lineTo(px + 3, pyTo + 6);
      ctx.closePath();
      ctx.fill();
    }
  }

  private drawEquilibria(ctx: CanvasRenderingContext2D): void {
    const eq = this.session.equilibria;
    if (!eq) return;
    for (const record of eq.data.equilibria) {
      const [px, py] = this.toPixel(record.state);
      ctx.beginPath();
      if (record.classification === 'saddle') {
        ctx.moveTo(px - 5, py - 5);
        ctx.lineTo(px + 5, py + 5);
        ctx.moveTo(px - 5, py + 5);
        ctx.lineTo(px + 5, py - 5);
        ctx.strokeStyle = eq.stale ? '#aaa' : '#000';
        ctx.lineWidth = 2;
        ctx.stroke();
      } else {
        ctx.arc(px, py, 5, 0, 2 * Math.PI);
        ctx.fillStyle = eq.stale
          ? '#bbb'
          : record.classification === 'nodal attractor'
            ? '#111'
            : '#fff';
        ctx.fill();
        ctx.strokeStyle = eq.stale ? '#aaa' : '#111';
        ctx.lineWidth = 1.5;
        ctx.stroke();
      }
      ctx.fillStyle = eq.stale ? '#aaa' : '#111';
      ctx.font = '12px sans-serif';
      ctx.textAlign = 'left';
      ctx.fillText(record.label, px + 8, py - 6);
    }
  }

  private drawStart(ctx: CanvasRenderingContext2D): void {
    const start = this.session.start;
    if (!start) return;
    const [px, py] = this.toPixel(start);
    ctx.beginPath();
    ctx.arc(px, py, 5, 0, 2 * Math.PI);
    ctx.fillStyle = '#c0392b';
    ctx.fill();
  }

  private drawHoverReadout(ctx: CanvasRenderingContext2D): void {
    const sep = this.session.separatrix;
    if (!this.hover || !sep || sep.stale) return;
    const vertex = thresholdReadout(sep.data, this.hover.n);
    if (!vertex) return;
    const [px, py] = this.toPixel(vertex);
    ctx.beginPath();
    ctx.arc(px, py, 3.5, 0, 2 * Math.PI);
    ctx.fillStyle = '#1e8449';
    ctx.fill();
    ctx.font = '12px sans-serif';
    ctx.textAlign = 'left';
    ctx.fillText(
      `threshold at N=${vertex.n.toFixed(1)}: W=${vertex.w.toFixed(1)}`,
      px + 8,
      py - 8,
    );
  }

  private drawStaleFlags(ctx: CanvasRenderingContext2D): void {
    const staleNames = this.session
      .overlayProvenance()
      .filter((row) => row.stale)
      .map((row) => row.name);
    if (staleNames.length === 0) return;
    ctx.fillStyle = '#b03a2e';
    ctx.font = 'bold 12px sans-serif';
    ctx.textAlign = 'left';
    ctx.fillText(`stale: ${staleNames.join(', ')} (refresh)`, MARGIN.left + 6, MARGIN.top + 16);
  }
}

export function tickStep(extent: number): number {
  const raw = extent / 6;
  const magnitude = Math.pow(10, Math.floor(Math.log10(raw)));
  for (const mult of [1, 2, 5, 10]) {
    if (raw <= mult * magnitude) return mult * magnitude;
  }
  return 10 * magnitude;
}

export function nearestIndex(values: number[], target: number): number {
  let best = 0;
  let gap = Math.abs(values[0] - target);
  for (let i = 1; i < values.length; i++) {
    const g = Math.abs(values[i] - target);
    if (g < gap) {
      best = i;
      gap = g;
    }
  }
  return best;
}
