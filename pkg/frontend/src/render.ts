import type { Point } from "./protocol";
import type { CockpitViewModel } from "./viewmodel";

// Subset of CanvasRenderingContext2D the cockpit draws with; tests pass
// a recording stub instead of a real canvas.
export interface Draw2D {
  fillStyle: string | CanvasGradient | CanvasPattern;
  strokeStyle: string | CanvasGradient | CanvasPattern;
  lineWidth: number;
  font: string;
  globalAlpha: number;
  textAlign: string;
  textBaseline: string;
  beginPath(): void;
  moveTo(x: number, y: number): void;
  lineTo(x: number, y: number): void;
  closePath(): void;
  arc(x: number, y: number, r: number, a0: number, a1: number): void;
  stroke(): void;
  fill(): void;
  fillRect(x: number, y: number, w: number, h: number): void;
  strokeRect(x: number, y: number, w: number, h: number): void;
  clearRect(x: number, y: number, w: number, h: number): void;
  fillText(text: string, x: number, y: number): void;
  save(): void;
  restore(): void;
  translate(x: number, y: number): void;
  rotate(angle: number): void;
  scale(x: number, y: number): void;
  setLineDash(segments: number[]): void;
}

const COLORS = {
  background: "#10141a",
  grid: "#2a3442",
  path: "#54657c",
  obstacleFill: "#4a2a2a",
  obstacleEdge: "#b0624a",
  bound: "#d98e37",
  vehicle: "#cdd7e4",
  ref: "#8a97a8",
  applied: "#53c789",
  edgeLeft: "#5fb8d4",
  edgeRight: "#c77ad4",
  alphaLine: "#e05545",
  text: "#aab6c6",
  warn: "#e8a33d",
  fault: "#e05545",
};

export function renderFrame(
  ctx: Draw2D, vm: CockpitViewModel, width: number, height: number,
): void {
  ctx.fillStyle = COLORS.background;
  ctx.fillRect(0, 0, width, height);

  const chartBand = Math.round(height * 0.3);
  const planHeight = height - chartBand;

  if (vm.hello === null) {
    ctx.fillStyle = COLORS.text;
    ctx.font = "16px monospace";
    ctx.textAlign = "center";
    ctx.textBaseline = "middle";
    ctx.fillText(
      vm.connection === "closed" ? "DISCONNECTED" : "connecting...",
      width / 2, height / 2,
    );
    return;
  }

  drawPlanView(ctx, vm, width, planHeight);
  drawSteeringChart(ctx, vm, 0, planHeight, width / 2, chartBand);
  drawPotentialChart(ctx, vm, width / 2, planHeight, width / 2, chartBand);
  drawHud(ctx, vm);

  if (vm.connection === "closed") {
    ctx.globalAlpha = 0.55;
    ctx.fillStyle = "#000000";
    ctx.fillRect(0, 0, width, height);
    ctx.globalAlpha = 1;
    ctx.fillStyle = COLORS.text;
    ctx.font = "18px monospace";
    ctx.textAlign = "center";
    ctx.textBaseline = "middle";
    ctx.fillText("DISCONNECTED - frame frozen", width / 2, height / 2);
  }
}

function polyline(ctx: Draw2D, points: Point[], close = false): void {
  if (points.length === 0) return;
  ctx.beginPath();
  ctx.moveTo(points[0][0], points[0][1]);
  for (let i = 1; i < points.length; i++) ctx.lineTo(points[i][0], points[i][1]);
  if (close) ctx.closePath();
}

function drawPlanView(
  ctx: Draw2D, vm: CockpitViewModel, width: number, height: number,
): void {
  const hello = vm.hello!;
  const cam = vm.camera;
  ctx.save();
  // world-to-screen: metres scaled, y flipped so left of the vehicle is up
  ctx.translate(width * 0.38, height * 0.52);
  ctx.scale(cam.pixelsPerMeter, -cam.pixelsPerMeter);
  ctx.translate(-cam.centerX, -cam.centerY);
  const px = 1 / cam.pixelsPerMeter; // one device pixel in metres

  ctx.strokeStyle = COLORS.path;
  ctx.lineWidth = 2 * px;
  ctx.setLineDash([0.8, 0.6]);
  polyline(ctx, hello.path);
  ctx.stroke();
  ctx.setLineDash([]);

  for (const obs of hello.obstacles) {
    polyline(ctx, obs.outline, true);
    ctx.fillStyle = COLORS.obstacleFill;
    ctx.fill();
    ctx.strokeStyle = COLORS.obstacleEdge;
    ctx.lineWidth = 2 * px;
    ctx.stroke();
    polyline(ctx, obs.bound, true);
    ctx.strokeStyle = COLORS.bound;
    ctx.lineWidth = 1.5 * px;
    ctx.stroke();
  }

  const trail = vm.trail.toArray();
  if (trail.length > 1) {
    ctx.globalAlpha = 0.7;
    ctx.lineWidth = 1.5 * px;
    polyline(ctx, trail.map((e) => [e.flx, e.fly] as Point));
    ctx.strokeStyle = COLORS.edgeLeft;
    ctx.stroke();
    polyline(ctx, trail.map((e) => [e.frx, e.fry] as Point));
    ctx.strokeStyle = COLORS.edgeRight;
    ctx.stroke();
    ctx.globalAlpha = 1;
  }

  const pose = vm.latest ?? { x: hello.start.x, y: hello.start.y, heading: hello.start.heading };
  const veh = hello.vehicle;
  ctx.save();
  ctx.translate(pose.x, pose.y);
  ctx.rotate(pose.heading);
  ctx.strokeStyle = vm.latest?.intervention ? COLORS.warn : COLORS.vehicle;
  ctx.lineWidth = 2 * px;
  ctx.strokeRect(-veh.l_r, -veh.width / 2, veh.l_r + veh.l_f_bumper, veh.width);
  ctx.beginPath(); // heading tick at the nose
  ctx.moveTo(veh.l_f_bumper, 0);
  ctx.lineTo(veh.l_f_bumper + 0.6, 0);
  ctx.stroke();
  ctx.restore();

  ctx.restore();
}

interface Series {
  color: string;
  values: number[];
}

function drawChart(
  ctx: Draw2D,
  x0: number, y0: number, w: number, h: number,
  title: string,
  series: Series[],
  yMin: number, yMax: number,
  guides: { value: number; color: string }[],
): void {
  const pad = 8;
  const plotX = x0 + pad;
  const plotY = y0 + pad + 12;
  const plotW = w - 2 * pad;
  const plotH = h - 2 * pad - 14;
  const toY = (v: number) =>
    plotY + plotH - ((v - yMin) / (yMax - yMin)) * plotH;

  ctx.strokeStyle = COLORS.grid;
  ctx.lineWidth = 1;
  ctx.strokeRect(plotX, plotY, plotW, plotH);
  ctx.fillStyle = COLORS.text;
  ctx.font = "11px monospace";
  ctx.textAlign = "left";
  ctx.textBaseline = "top";
  ctx.fillText(title, plotX, y0 + pad - 2);

  for (const guide of guides) {
    const gy = toY(guide.value);
    if (gy < plotY || gy > plotY + plotH) continue;
    ctx.strokeStyle = guide.color;
    ctx.setLineDash([4, 3]);
    ctx.beginPath();
    ctx.moveTo(plotX, gy);
    ctx.lineTo(plotX + plotW, gy);
    ctx.stroke();
    ctx.setLineDash([]);
  }

  for (const s of series) {
    const n = s.values.length;
    if (n < 2) continue;
    ctx.strokeStyle = s.color;
    ctx.lineWidth = 1.5;
    ctx.beginPath();
    for (let i = 0; i < n; i++) {
      const sx = plotX + (i / (n - 1)) * plotW;
      const sy = toY(s.values[i]);
      if (i === 0) ctx.moveTo(sx, sy);
      else ctx.lineTo(sx, sy);
    }
    ctx.stroke();
  }
}

function drawSteeringChart(
  ctx: Draw2D, vm: CockpitViewModel,
  x0: number, y0: number, w: number, h: number,
): void {
  const hello = vm.hello!;
  const samples = vm.steering.toArray();
  const lim = hello.delta_limit;
  drawChart(
    ctx, x0, y0, w, h,
    "steering  ref/applied  [rad]",
    [
      { color: COLORS.ref, values: samples.map((s) => s.ref) },
      { color: COLORS.applied, values: samples.map((s) => s.applied) },
    ],
    -1.1 * lim, 1.1 * lim,
    [
      { value: lim, color: COLORS.grid },
      { value: -lim, color: COLORS.grid },
      { value: 0, color: COLORS.grid },
    ],
  );
}

function drawPotentialChart(
  ctx: Draw2D, vm: CockpitViewModel,
  x0: number, y0: number, w: number, h: number,
): void {
  const hello = vm.hello!;
  const samples = vm.potentials.toArray();
  const alpha = vm.latest?.alpha ?? hello.alpha;
  let top = 2 * alpha;
  for (const s of samples) top = Math.max(top, 1.1 * s.fl, 1.1 * s.fr);
  drawChart(
    ctx, x0, y0, w, h,
    "edge potential  fl/fr vs limit",
    [
      { color: COLORS.edgeLeft, values: samples.map((s) => s.fl) },
      { color: COLORS.edgeRight, values: samples.map((s) => s.fr) },
    ],
    0, top,
    [{ value: alpha, color: COLORS.alphaLine }],
  );
}

function drawHud(ctx: Draw2D, vm: CockpitViewModel): void {
  const latest = vm.latest;
  ctx.font = "12px monospace";
  ctx.textAlign = "left";
  ctx.textBaseline = "top";
  ctx.fillStyle = COLORS.text;
  const parts = latest
    ? [
        `tick ${latest.tick}`,
        `t ${latest.t.toFixed(2)}s`,
        `overruns ${latest.overruns}`,
        vm.staleDropped > 0 ? `stale ${vm.staleDropped}` : "",
      ]
    : ["waiting for first tick"];
  const latency = vm.latencyMs(Date.now());
  if (latency !== null) parts.push(`echo ${latency.toFixed(0)}ms`);
  ctx.fillText(parts.filter(Boolean).join("   "), 10, 8);

  if (latest?.fault) {
    ctx.fillStyle = COLORS.fault;
    ctx.font = "15px monospace";
    ctx.fillText("FAULT - vehicle stopped", 10, 30);
  } else if (latest?.intervention) {
    ctx.fillStyle = COLORS.warn;
    ctx.font = "15px monospace";
    ctx.fillText("CORRECTING", 10, 30);
  }
}
