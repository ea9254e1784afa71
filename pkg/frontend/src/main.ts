import { ApiClient } from "./api.js";
import { AnnotationApp } from "./app.js";

const params = new URLSearchParams(window.location.search);
const base = params.get("api") ?? "http://localhost:8700";
const token = params.get("token");

const root = document.getElementById("app");
if (!root) throw new Error("missing #app container");

const app = new AnnotationApp(new ApiClient(base, token), root);
app.start().catch((err) => {
  root.textContent = `failed to reach annotation service at ${base}: ${err}`;
});
