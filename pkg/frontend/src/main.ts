// Boot: connect to the robot's config/telemetry socket and build the UI.
// The socket port defaults to 7777 and the image HTTP endpoints live on
// whatever origin served this page; override via ?ws=HOST:PORT&http=URL.

import { RobotClient } from "./client.js";
import { Dashboard } from "./ui.js";

const query = new URLSearchParams(location.search);
const wsTarget = query.get("ws") ?? `${location.hostname || "127.0.0.1"}:7777`;
const httpBase = query.get("http") ?? (location.origin.startsWith("http") ? location.origin : "http://127.0.0.1:7778");

const root = document.getElementById("app")!;
let dashboard: Dashboard;

const client = new RobotClient(`ws://${wsTarget}`, {
  onStatus: (connected, attempt) => dashboard.setStatus(connected, attempt),
  onParam: (event) => dashboard.onParamEvent(event.path, event.value),
  onTelemetry: (frame) => dashboard.onTelemetry(frame),
});
dashboard = new Dashboard(client, root, httpBase);
client.connect();
