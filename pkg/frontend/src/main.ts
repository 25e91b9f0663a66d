import { ApiClient } from "./api.js";
import { AnnotatorApp } from "./app.js";
import { DraftStore, IdentityStore } from "./storage.js";

const root = document.getElementById("app");
if (!root) throw new Error("missing #app container");

const app = new AnnotatorApp(
  root,
  new ApiClient(window.location.origin),
  new DraftStore(window.localStorage),
  new IdentityStore(window.sessionStorage)
);
void app.start();
