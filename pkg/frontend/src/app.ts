/** DOM glue: render into a root element and translate user input into
 * controller calls. Everything interesting lives in the pure modules. */

import { GatewayClient } from "./api.js";
import { Controller, createStore } from "./controller.js";
import { render } from "./render.js";

export function mount(root: HTMLElement, client: GatewayClient): Controller {
  const store = createStore((state) => {
    root.innerHTML = render(state);
  });
  const controller = new Controller(client, store);
  root.innerHTML = render(store.getState());

  root.addEventListener("click", (event) => {
    const target = (event.target as HTMLElement).closest<HTMLElement>("[data-action]");
    if (!target) return;
    const action = target.dataset.action;
    if (action === "mode") {
      controller.setMode(target.dataset.mode === "agent" ? "agent" : "search");
    } else if (action === "select") {
      controller.toggleSelection(target.dataset.video ?? "");
    } else if (action === "expand") {
      controller.toggleSummary(target.dataset.video ?? "");
    }
  });

  root.addEventListener("input", (event) => {
    const target = event.target as HTMLElement;
    if (target.dataset.action === "query") {
      controller.setQuery((target as HTMLInputElement).value);
    }
  });

  root.addEventListener("submit", (event) => {
    const target = event.target as HTMLElement;
    if (target.dataset.action === "submit") {
      event.preventDefault();
      void controller.submit();
    }
  });

  return controller;
}

declare global {
  interface Window {
    GATEWAY_URL?: string;
  }
}

if (typeof document !== "undefined") {
  const root = document.getElementById("app");
  if (root) {
    const base = window.GATEWAY_URL ?? window.location.origin;
    mount(root, new GatewayClient(base));
  }
}
