import { KeyboardSteering, SteeringEmitter, gamepadSteering } from "./input";
import type { SteeringSource } from "./input";
import { BridgeClient, SessionSocket } from "./net";
import { renderFrame } from "./render";
import { ReplayScrubber, helloFromTrace, parseTrace } from "./replay";
import { CockpitViewModel } from "./viewmodel";

function byId<T extends HTMLElement>(id: string): T {
  const el = document.getElementById(id);
  if (!el) throw new Error(`missing element #${id}`);
  return el as T;
}

const canvas = byId<HTMLCanvasElement>("view");
const ctx = canvas.getContext("2d");
if (!ctx) throw new Error("2D context unavailable");

const scenarioSelect = byId<HTMLSelectElement>("scenario");
const assistedBox = byId<HTMLInputElement>("assisted");
const connectBtn = byId<HTMLButtonElement>("connect");
const startBtn = byId<HTMLButtonElement>("start");
const stopBtn = byId<HTMLButtonElement>("stop");
const resetBtn = byId<HTMLButtonElement>("reset");
const sourceSelect = byId<HTMLSelectElement>("source");
const slider = byId<HTMLInputElement>("slider");
const speedInput = byId<HTMLInputElement>("speed");
const statusLine = byId<HTMLSpanElement>("status");
const traceFile = byId<HTMLInputElement>("tracefile");
const scrub = byId<HTMLInputElement>("scrub");

const client = new BridgeClient(window.location.origin);
const vm = new CockpitViewModel();
const keyboard = new KeyboardSteering();
const emitter = new SteeringEmitter();

let socket: SessionSocket | null = null;
let scrubber: ReplayScrubber | null = null;
let uiMode: "live" | "replay" = "live";

function setStatus(text: string): void {
  statusLine.textContent = text;
}

client
  .scenarios()
  .then((names) => {
    scenarioSelect.innerHTML = "";
    for (const name of names) {
      const opt = document.createElement("option");
      opt.value = name;
      opt.textContent = name;
      scenarioSelect.appendChild(opt);
    }
  })
  .catch(() => setStatus("bridge unreachable"));

connectBtn.addEventListener("click", async () => {
  try {
    socket?.close();
    uiMode = "live";
    scrubber = null;
    vm.connection = "connecting";
    vm.hello = null;
    vm.clearRun();
    emitter.reset();
    const id = await client.openSession({
      scenario: scenarioSelect.value || "parking_lot",
      mode: "live",
      assisted: assistedBox.checked,
    });
    socket = client.connect(id, {
      onHello: (msg) => {
        vm.applyHello(msg);
        setStatus(`session ${msg.session} (${msg.scenario})`);
      },
      onState: (msg) => void vm.applyState(msg),
      onError: (msg) => setStatus(`bridge: ${msg.message}`),
      onClose: () => {
        vm.markClosed();
        setStatus("disconnected");
      },
    });
  } catch (err) {
    setStatus(String(err));
  }
});

startBtn.addEventListener("click", () => socket?.start());
stopBtn.addEventListener("click", () => socket?.stop());
resetBtn.addEventListener("click", () => {
  socket?.reset();
  vm.clearRun();
  vm.setInput(0);
  emitter.reset();
});

speedInput.addEventListener("input", () => {
  socket?.setSpeed(Number(speedInput.value));
});

slider.addEventListener("input", () => {
  if (currentSource() === "slider") vm.setInput(Number(slider.value) / 100);
});

function currentSource(): SteeringSource {
  return sourceSelect.value as SteeringSource;
}

window.addEventListener("keydown", (e) => {
  if (e.target instanceof HTMLInputElement || e.target instanceof HTMLSelectElement) return;
  keyboard.keydown(e.code);
  if (e.code.startsWith("Arrow")) e.preventDefault();
});
window.addEventListener("keyup", (e) => keyboard.keyup(e.code));
window.addEventListener("blur", () => keyboard.blur());

// Replay: load a trace file and scrub it; the render path is the same
// one live frames use.
traceFile.addEventListener("change", async () => {
  const file = traceFile.files?.[0];
  if (!file) return;
  try {
    const parsed = parseTrace(await file.text());
    socket?.close();
    socket = null;
    scrubber = new ReplayScrubber(parsed);
    uiMode = "replay";
    vm.applyHello(helloFromTrace(parsed));
    scrub.max = String(scrubber.length - 1);
    scrub.value = "0";
    showReplayFrame(0);
    setStatus(`replay: ${parsed.scenarioName}, ${scrubber.length} ticks`);
  } catch (err) {
    setStatus(String(err));
  }
});

scrub.addEventListener("input", () => {
  if (scrubber) showReplayFrame(Number(scrub.value));
});

function showReplayFrame(position: number): void {
  if (!scrubber) return;
  const target = scrubber.seek(position);
  // rebuild chart history up to the scrub point so the strips read the
  // same as they would have live
  vm.clearRun();
  const from = Math.max(0, target - vm.steering.capacity + 1);
  for (let i = from; i <= target; i++) {
    scrubber.seek(i);
    vm.applyState(scrubber.frame());
  }
  scrubber.seek(target);
}

function resizeCanvas(): void {
  const dpr = Math.min(window.devicePixelRatio || 1, 2);
  const w = canvas.clientWidth;
  const h = canvas.clientHeight;
  if (canvas.width !== Math.floor(w * dpr) || canvas.height !== Math.floor(h * dpr)) {
    canvas.width = Math.floor(w * dpr);
    canvas.height = Math.floor(h * dpr);
  }
  ctx!.setTransform(dpr, 0, 0, dpr, 0, 0);
}

let lastFrame = performance.now();
function frame(now: number): void {
  const dt = Math.min(0.1, (now - lastFrame) / 1000);
  lastFrame = now;

  if (uiMode === "live") {
    const source = currentSource();
    if (source === "keyboard") {
      vm.setInput(keyboard.advance(vm.input, dt));
    } else if (source === "gamepad") {
      const pad = navigator.getGamepads?.()[0];
      if (pad) vm.setInput(gamepadSteering(pad.axes[0] ?? 0));
    }
    slider.value = String(Math.round(vm.input * 100));
    emitter.set(vm.input);
    const out = emitter.flush();
    if (out !== null && socket) socket.steer(out, Date.now());
  }

  resizeCanvas();
  renderFrame(ctx!, vm, canvas.clientWidth, canvas.clientHeight);
  requestAnimationFrame(frame);
}

requestAnimationFrame(frame);
