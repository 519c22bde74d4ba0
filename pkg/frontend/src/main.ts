import { mount } from "./app";
import "./styles.css";

const params = new URLSearchParams(window.location.search);
const baseUrl = params.get("api") ?? "http://127.0.0.1:8765";

const root = document.getElementById("app");
if (!root) throw new Error("missing #app element");
const app = mount(root, baseUrl);

const sessionId = params.get("session");
if (sessionId) void app.openSession(sessionId);
