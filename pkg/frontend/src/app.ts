/** Browser wiring: one socket, one session, DOM rendering.
 *
 * Server URL and token come from the query string (?server=...&token=...)
 * so the page itself stays static. Sliders enforce the widget bounds, so
 * out-of-range values never reach the wire.
 */

import { drawTrends } from './chart';
import type { MimicView } from './mimic';
import { UiSession } from './session';
import { ServiceSocket } from './socket';

const params = new URLSearchParams(window.location.search);
const server = params.get('server') ?? `ws://${window.location.hostname}:8000`;
const token = params.get('token') ?? undefined;

const session = new UiSession({ send: (cmd) => socket.send(cmd) });
const socket = new ServiceSocket(
  `${server}/ws`,
  {
    onMessage: (msg) => session.handleMessage(msg),
    onStatus: (status) => session.handleStatus(status),
  },
  { token },
);

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (node === null) throw new Error(`missing element #${id}`);
  return node as T;
}

function fillBar(id: string, pct: number, bottomPct = 0): void {
  const bar = el<HTMLDivElement>(id);
  bar.style.height = `${pct}%`;
  bar.style.bottom = `${bottomPct}%`;
}

function marker(id: string, pct: number): void {
  el<HTMLDivElement>(id).style.bottom = `${pct}%`;
}

function renderValves(view: MimicView): void {
  const box = el<HTMLDivElement>('valves');
  box.innerHTML = view.valves
    .map(
      (v) => `
      <div class="valve${v.moving ? ' moving' : ''}">
        <span class="valve-id">${v.id}</span>
        <span class="valve-pos">${v.positionPct.toFixed(1)}%</span>
        <span class="valve-cmd">cmd ${v.commandPct.toFixed(0)}%</span>
      </div>`,
    )
    .join('');
}

function renderBanners(): void {
  const box = el<HTMLDivElement>('banners');
  box.innerHTML = session.banners
    .map((b, i) => `<div class="banner ${b.kind}">${b.text} <button data-dismiss="${i}">x</button></div>`)
    .join('');
  box.querySelectorAll<HTMLButtonElement>('button[data-dismiss]').forEach((btn) => {
    btn.onclick = () => session.dismissBanner(Number(btn.dataset.dismiss));
  });
}

function renderPending(): void {
  const items = session.tracker
    .history()
    .slice(-8)
    .map((c) => `<li class="${c.state}">${c.kind} ${c.state}${c.reason ? `: ${c.reason}` : ''}</li>`);
  el<HTMLUListElement>('command-log').innerHTML = items.join('');
}

let lastRevision = -1;

function render(): void {
  if (session.revision === lastRevision) return;
  lastRevision = session.revision;
  const view = session.view();

  el<HTMLSpanElement>('status').textContent = session.status;
  el<HTMLSpanElement>('status').className = `status ${session.status}`;
  el<HTMLDivElement>('mimic').classList.toggle('greyed', view.greyed);
  el<HTMLSpanElement>('sim-time').textContent =
    view.simTimeS === null ? '-' : `${view.simTimeS.toFixed(1)} s`;

  fillBar('left-water', view.leftWaterPct);
  fillBar('left-oil', view.leftOilPct, view.leftWaterPct);
  fillBar('right-oil', view.rightOilPct);
  marker('sp-water', view.setpointWaterPct);
  marker('sp-oil', view.setpointOilPct);

  el<HTMLDivElement>('pump').className = `pump ${view.pumpOn ? 'on' : 'off'}`;
  el<HTMLDivElement>('pump').textContent = view.pumpOn ? 'PUMP ON' : 'PUMP OFF';

  const trip = el<HTMLDivElement>('trip-banner');
  trip.hidden = view.banner === null;
  trip.textContent = view.banner ?? '';

  const gates = view.controls;
  el<HTMLButtonElement>('btn-start').disabled = !gates.startPump;
  el<HTMLButtonElement>('btn-stop').disabled = !gates.stopPump;
  el<HTMLButtonElement>('btn-estop').disabled = !gates.emergencyStop;
  el<HTMLButtonElement>('btn-reset').disabled = !gates.resetLatch;
  for (const id of ['sp-water-input', 'sp-oil-input', 'valve-select', 'valve-input']) {
    el<HTMLInputElement>(id).disabled = !gates.setpoints && !gates.valves;
  }
  for (const id of ['jam-channels', 'jam-intensity', 'btn-jam-start', 'btn-jam-stop', 'blacklist-toggle']) {
    el<HTMLInputElement>(id).disabled = !gates.research;
  }

  if (view.network !== null) {
    el<HTMLSpanElement>('net-stability').textContent = `${view.network.stabilityPct.toFixed(2)}%`;
    el<HTMLSpanElement>('net-reliability').textContent = `${view.network.reliabilityPct.toFixed(2)}%`;
    el<HTMLSpanElement>('net-latency').textContent =
      view.network.latencyMs === null ? '-' : `${view.network.latencyMs.toFixed(1)} ms`;
    el<HTMLSpanElement>('net-blacklist').textContent = view.network.blacklistEnabled
      ? `on [${view.network.blacklistedChannels.join(', ')}]`
      : 'off';
  }
  el<HTMLSpanElement>('alarm-count').textContent = String(view.alarmCount);

  renderValves(view);
  renderBanners();
  renderPending();
  drawTrends(el<HTMLCanvasElement>('trend'), session.trends.points());
}

function wireControls(): void {
  el<HTMLButtonElement>('btn-start').onclick = () => session.send('start_pump');
  el<HTMLButtonElement>('btn-stop').onclick = () => session.send('stop_pump');
  el<HTMLButtonElement>('btn-estop').onclick = () => session.send('emergency_stop');
  el<HTMLButtonElement>('btn-reset').onclick = () => session.send('reset_latch');

  el<HTMLInputElement>('sp-water-input').onchange = (ev) => {
    const pct = Number((ev.target as HTMLInputElement).value);
    session.send('set_setpoint', { loop: 'water', percent: pct });
  };
  el<HTMLInputElement>('sp-oil-input').onchange = (ev) => {
    const pct = Number((ev.target as HTMLInputElement).value);
    session.send('set_setpoint', { loop: 'oil', percent: pct });
  };
  el<HTMLInputElement>('valve-input').onchange = () => {
    const valve = el<HTMLSelectElement>('valve-select').value;
    const pct = Number(el<HTMLInputElement>('valve-input').value);
    session.send('set_valve', { valve, percent: pct });
  };

  el<HTMLButtonElement>('btn-jam-start').onclick = () => {
    const channels = el<HTMLInputElement>('jam-channels')
      .value.split(',')
      .map((c) => Number(c.trim()))
      .filter((c) => Number.isInteger(c));
    const intensity = Number(el<HTMLInputElement>('jam-intensity').value) / 100;
    session.startJam(channels, intensity);
  };
  el<HTMLButtonElement>('btn-jam-stop').onclick = () => session.stopJam();
  el<HTMLInputElement>('blacklist-toggle').onchange = (ev) => {
    session.send('set_blacklist', { enabled: (ev.target as HTMLInputElement).checked });
  };
}

wireControls();
socket.connect();
setInterval(render, 100);
