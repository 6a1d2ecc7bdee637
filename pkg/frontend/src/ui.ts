// DOM wiring: parameter panel, live plots, battery notifier, LUT calibration
// over the camera image, and the keyframe motion editor. All robot state
// flows through the wire API; nothing is computed robot-side here.

import { RobotClient } from "./client.js";
import { rgbToYuv } from "./color.js";
import { CLASS_NAMES, DEFAULT_BRUSH_RADIUS, Lut, fromBase64, toBase64 } from "./lut.js";
import {
  JOINT_NAMES,
  Motion,
  motionDuration,
  parseMotion,
  serializeMotion,
} from "./motion.js";
import { ParamState, ParamStore } from "./params.js";
import { drawPlot, Trace } from "./plot.js";
import { ParamValue, TelemetryFrame } from "./protocol.js";
import { BatteryNotifier, PLOT_WINDOW_S, TelemetryBuffer } from "./telemetry.js";

const PLOT_COLORS = ["#4fc3f7", "#ffb74d", "#81c784", "#f06292", "#ba68c8"];

function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  cls?: string,
  text?: string,
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  if (cls) node.className = cls;
  if (text !== undefined) node.textContent = text;
  return node;
}

export class Dashboard {
  store = new ParamStore();
  telemetry = new TelemetryBuffer();
  lut: Lut | null = null;
  activeClass = 1;
  brushRadius = DEFAULT_BRUSH_RADIUS;
  motion: Motion | null = null;
  selectedJoints = [2, 3, 4]; // left hip/knee/ankle pitch
  private controls = new Map<string, { input: HTMLInputElement; label: HTMLElement; row: HTMLElement }>();
  private battery: BatteryNotifier;

  constructor(
    private client: RobotClient,
    private root: HTMLElement,
    private httpBase: string,
  ) {
    this.battery = new BatteryNotifier((v) => this.notifyLowBattery(v));
    this.buildLayout();
  }

  // -- layout -----------------------------------------------------------------

  private buildLayout(): void {
    const header = el("header");
    this.statusEl = el("span", "status offline", "connecting…");
    this.batteryEl = el("span", "battery", "— V");
    this.bannerEl = el("div", "banner hidden");
    header.append(el("h1", "", "robot dashboard"), this.statusEl, this.batteryEl);
    const main = el("main");
    this.paramsEl = el("section", "panel params");
    this.paramsEl.append(el("h2", "", "parameters"));
    const plots = el("section", "panel plots");
    plots.append(el("h2", "", "joints (solid = measured, dashed = target)"));
    this.jointPicker = el("div", "joint-picker");
    this.plotCanvas = el("canvas");
    this.plotCanvas.width = 640;
    this.plotCanvas.height = 260;
    this.stateEl = el("div", "state-line", "—");
    plots.append(this.jointPicker, this.plotCanvas, this.stateEl);
    const vision = el("section", "panel vision");
    vision.append(el("h2", "", "camera & color calibration"));
    this.cameraImg = el("img");
    this.cameraImg.width = 400;
    this.classesImg = el("img");
    this.classesImg.width = 400;
    this.lutToolbar = el("div", "toolbar");
    vision.append(this.lutToolbar, this.cameraImg, this.classesImg);
    this.motionEl = el("section", "panel motion");
    this.motionEl.append(el("h2", "", "motion editor"));
    this.motionToolbar = el("div", "toolbar");
    this.motionTable = el("div", "motion-table");
    this.motionEl.append(this.motionToolbar, this.motionTable);
    main.append(this.paramsEl, plots, vision, this.motionEl);
    this.root.append(header, this.bannerEl, main);
    this.buildJointPicker();
    this.buildLutToolbar();
    this.buildMotionToolbar();
    this.refreshImages();
    setInterval(() => this.refreshImages(), 500);
  }

  private statusEl!: HTMLElement;
  private batteryEl!: HTMLElement;
  private bannerEl!: HTMLElement;
  private paramsEl!: HTMLElement;
  private jointPicker!: HTMLElement;
  private plotCanvas!: HTMLCanvasElement;
  private stateEl!: HTMLElement;
  private cameraImg!: HTMLImageElement;
  private classesImg!: HTMLImageElement;
  private lutToolbar!: HTMLElement;
  private motionEl!: HTMLElement;
  private motionToolbar!: HTMLElement;
  private motionTable!: HTMLElement;

  // -- connection lifecycle ----------------------------------------------------

  setStatus(connected: boolean, attempt: number): void {
    this.statusEl.textContent = connected
      ? "connected"
      : `reconnecting (try ${attempt + 1})…`;
    this.statusEl.className = `status ${connected ? "online" : "offline"}`;
    if (connected) void this.loadParams();
  }

  async loadParams(): Promise<void> {
    const reply = await this.client.list("/");
    if (reply.ok && reply.entries) {
      this.store.loadEntries(reply.entries);
      this.renderParams();
    }
  }

  // -- parameter panel ----------------------------------------------------------

  private renderParams(): void {
    for (const [, control] of this.controls) control.row.remove();
    this.controls.clear();
    for (const [group, states] of this.store.groups()) {
      let section = this.paramsEl.querySelector(`[data-group="${group}"]`);
      if (!section) {
        section = el("details", "group");
        (section as HTMLDetailsElement).open = ["gait", "behavior"].includes(group);
        section.setAttribute("data-group", group);
        section.append(el("summary", "", group));
        this.paramsEl.append(section);
      }
      for (const state of states) this.renderControl(section as HTMLElement, state);
    }
    this.store.onChange((state) => this.updateControl(state));
  }

  private renderControl(section: HTMLElement, state: ParamState): void {
    const row = el("div", "param-row");
    const name = state.path.split("/").slice(2).join("/");
    const label = el("label", "", name);
    const valueEl = el("span", "value");
    const input = el("input") as HTMLInputElement;
    if (typeof state.confirmed === "boolean") {
      input.type = "checkbox";
      input.checked = state.confirmed;
      input.onchange = () => this.tune(state.path, input.checked);
    } else if (typeof state.confirmed === "number" && state.meta) {
      input.type = "range";
      input.min = String(state.meta.min);
      input.max = String(state.meta.max);
      input.step = String(state.meta.step);
      input.value = String(state.confirmed);
      input.oninput = () => (valueEl.textContent = input.value);
      input.onchange = () => this.tune(state.path, Number(input.value));
    } else {
      input.type = "text";
      input.value = String(state.confirmed);
      input.onchange = () => this.tune(state.path, input.value);
    }
    valueEl.textContent = String(state.confirmed);
    row.append(label, input, valueEl);
    section.append(row);
    this.controls.set(state.path, { input, label: valueEl, row });
  }

  private updateControl(state: ParamState): void {
    const control = this.controls.get(state.path);
    if (!control) return;
    control.row.classList.toggle("pending", state.pending !== null);
    // the displayed value is always the last server-confirmed one
    control.label.textContent = String(state.confirmed);
    if (state.pending === null) {
      if (control.input.type === "checkbox") {
        control.input.checked = Boolean(state.confirmed);
      } else {
        control.input.value = String(state.confirmed);
      }
    }
  }

  tune(path: string, value: ParamValue): void {
    this.store.markPending(path, value);
    this.client
      .set(path, value)
      .then((reply) => {
        if (reply.ok && reply.value !== undefined) {
          this.store.confirm(path, reply.value); // snaps to the clamped value
        }
      })
      .catch(() => {});
  }

  onParamEvent(path: string, value: ParamValue): void {
    this.store.confirm(path, value);
  }

  // -- telemetry / plots -----------------------------------------------------------

  onTelemetry(frame: TelemetryFrame): void {
    this.telemetry.push(frame);
    this.battery.update(frame.battery_v);
    this.batteryEl.textContent = `${frame.battery_v.toFixed(2)} V`;
    this.batteryEl.classList.toggle("low", frame.battery_v < 14.0);
    this.stateEl.textContent =
      `behavior=${frame.behavior_state}  fall=${frame.fall_state}  ` +
      `cycle=${frame.cycle}  warnings=${frame.warnings}`;
    this.redrawPlot();
  }

  private buildJointPicker(): void {
    const select = el("select") as HTMLSelectElement;
    select.multiple = true;
    select.size = 5;
    JOINT_NAMES.forEach((joint, index) => {
      const option = el("option", "", joint) as HTMLOptionElement;
      option.value = String(index);
      option.selected = this.selectedJoints.includes(index);
      select.append(option);
    });
    select.onchange = () => {
      this.selectedJoints = Array.from(select.selectedOptions).map((o) =>
        Number(o.value),
      );
      this.redrawPlot();
    };
    this.jointPicker.append(select);
  }

  private redrawPlot(): void {
    const traces: Trace[] = [];
    this.selectedJoints.forEach((joint, order) => {
      const series = this.telemetry.jointSeries(joint);
      const color = PLOT_COLORS[order % PLOT_COLORS.length];
      traces.push({ label: `${JOINT_NAMES[joint]} meas`, color, dashed: false,
                    t: series.t, v: series.position });
      traces.push({ label: `${JOINT_NAMES[joint]} tgt`, color, dashed: true,
                    t: series.t, v: series.target });
    });
    drawPlot(this.plotCanvas, traces, PLOT_WINDOW_S);
  }

  private notifyLowBattery(volts: number): void {
    this.bannerEl.textContent = `battery low: ${volts.toFixed(2)} V — charge soon`;
    this.bannerEl.classList.remove("hidden");
  }

  // -- LUT calibration -----------------------------------------------------------

  private buildLutToolbar(): void {
    const classSelect = el("select") as HTMLSelectElement;
    CLASS_NAMES.forEach((name, id) => {
      const option = el("option", "", `${id}: ${name}`) as HTMLOptionElement;
      option.value = String(id);
      option.selected = id === this.activeClass;
      classSelect.append(option);
    });
    classSelect.onchange = () => (this.activeClass = Number(classSelect.value));

    const radius = el("input") as HTMLInputElement;
    radius.type = "number";
    radius.min = "0";
    radius.max = "8";
    radius.value = String(this.brushRadius);
    radius.onchange = () => (this.brushRadius = Number(radius.value));

    const download = el("button", "", "save .lut") as HTMLButtonElement;
    download.onclick = () => this.saveLutFile();
    const reload = el("button", "", "reload from robot") as HTMLButtonElement;
    reload.onclick = () => void this.downloadLut();

    this.lutToolbar.append(
      el("span", "", "class:"), classSelect,
      el("span", "", "brush r:"), radius, download, reload,
    );
    this.cameraImg.onclick = (event) => void this.onCameraClick(event);
  }

  async downloadLut(): Promise<void> {
    const reply = await this.client.request({ op: "lut_download" });
    if (reply.ok && reply.data) this.lut = Lut.decode(fromBase64(reply.data));
  }

  private async onCameraClick(event: MouseEvent): Promise<void> {
    if (!this.lut) await this.downloadLut();
    if (!this.lut) return;
    const rect = this.cameraImg.getBoundingClientRect();
    const px = Math.floor(((event.clientX - rect.left) / rect.width) * this.cameraImg.naturalWidth);
    const py = Math.floor(((event.clientY - rect.top) / rect.height) * this.cameraImg.naturalHeight);
    const canvas = el("canvas");
    canvas.width = this.cameraImg.naturalWidth;
    canvas.height = this.cameraImg.naturalHeight;
    const ctx = canvas.getContext("2d");
    if (!ctx) return;
    ctx.drawImage(this.cameraImg, 0, 0);
    const [r, g, b] = ctx.getImageData(px, py, 1, 1).data;
    const [y, u, v] = rgbToYuv(r, g, b);
    // edit the local table, then upload atomically and refresh the overlay
    this.lut.grow(y, u, v, this.activeClass, this.brushRadius);
    const reply = await this.client.request({
      op: "lut_upload",
      data: toBase64(this.lut.encode()),
    });
    if (reply.ok) this.refreshImages();
  }

  private saveLutFile(): void {
    if (!this.lut) return;
    this.downloadFile("colors.lut", this.lut.encode());
  }

  private refreshImages(): void {
    const stamp = Date.now();
    this.cameraImg.src = `${this.httpBase}/camera.png?ts=${stamp}`;
    this.classesImg.src = `${this.httpBase}/classes.png?ts=${stamp}`;
  }

  // -- motion editor ---------------------------------------------------------------

  private buildMotionToolbar(): void {
    const picker = el("select") as HTMLSelectElement;
    const load = el("button", "", "open") as HTMLButtonElement;
    const play = el("button", "", "play on robot") as HTMLButtonElement;
    const save = el("button", "", "save .motion") as HTMLButtonElement;
    const refresh = async () => {
      const reply = await this.client.request({ op: "motion_list" });
      if (reply.ok && reply.names) {
        picker.replaceChildren(
          ...reply.names.map((n) => {
            const option = el("option", "", n) as HTMLOptionElement;
            option.value = n;
            return option;
          }),
        );
      }
    };
    load.onclick = async () => {
      await refresh();
      const reply = await this.client.request({
        op: "motion_download", name: picker.value,
      });
      if (reply.ok && reply.data) {
        this.motion = parseMotion(reply.data);
        this.renderMotion();
      }
    };
    play.onclick = async () => {
      if (!this.motion) return;
      const upload = await this.client.request({
        op: "motion_upload",
        name: this.motion.name,
        data: serializeMotion(this.motion),
      });
      if (upload.ok) await this.client.set("/motion/play", this.motion.name);
    };
    save.onclick = () => {
      if (!this.motion) return;
      this.downloadFile(
        `${this.motion.name}.motion`,
        new TextEncoder().encode(serializeMotion(this.motion)),
      );
    };
    this.motionToolbar.append(picker, load, play, save);
    void refresh();
  }

  private renderMotion(): void {
    this.motionTable.replaceChildren();
    if (!this.motion) return;
    const info = el("div", "motion-info",
      `${this.motion.name} — ${this.motion.keyframes.length} frames, ` +
      `${motionDuration(this.motion).toFixed(2)} s, ${this.motion.interpolation}`);
    this.motionTable.append(info);
    this.motion.keyframes.forEach((kf, index) => {
      const frame = el("details", "frame");
      const dur = el("input") as HTMLInputElement;
      dur.type = "number";
      dur.step = "0.05";
      dur.min = "0.05";
      dur.value = kf.durationS.toFixed(3);
      dur.onchange = () => (kf.durationS = Number(dur.value));
      const summary = el("summary", "", `frame ${index + 1} `);
      summary.append(dur, el("span", "", kf.hold ? " (hold)" : ""));
      frame.append(summary);
      kf.targets.forEach((value, joint) => {
        const row = el("div", "joint-row");
        const slider = el("input") as HTMLInputElement;
        slider.type = "range";
        slider.min = "-2.6";
        slider.max = "2.6";
        slider.step = "0.01";
        slider.value = String(value);
        const shown = el("span", "value", value.toFixed(4));
        slider.oninput = () => {
          kf.targets[joint] = Number(slider.value);
          shown.textContent = Number(slider.value).toFixed(4);
        };
        row.append(el("label", "", JOINT_NAMES[joint]), slider, shown);
        frame.append(row);
      });
      this.motionTable.append(frame);
    });
  }

  private downloadFile(name: string, bytes: Uint8Array): void {
    const blob = new Blob([bytes as unknown as BlobPart],
                          { type: "application/octet-stream" });
    const link = el("a") as HTMLAnchorElement;
    link.href = URL.createObjectURL(blob);
    link.download = name;
    link.click();
    URL.revokeObjectURL(link.href);
  }
}
