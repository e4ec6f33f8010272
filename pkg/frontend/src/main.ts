import { ApiClient } from "./api.js";
import { DashboardApp } from "./app.js";

// single configuration knob: API base URL (same origin by default)
const base = new URLSearchParams(window.location.search).get("api") ?? "";
const root = document.getElementById("app");
if (!root) throw new Error("missing #app mount point");
void new DashboardApp(root, new ApiClient(base)).start();
