/** Entry point: mount the app against the configured API base URL. */

import { mount } from "./app.js";

declare global {
  interface Window {
    STRATEGOS_API_BASE?: string;
  }
}

const base = window.STRATEGOS_API_BASE ?? "http://localhost:8080";
const root = document.getElementById("app");
if (root) {
  mount(root, base);
}
