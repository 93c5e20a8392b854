import { beforeEach, describe, expect, it } from "vitest";

import { ApiClient } from "../src/api.js";
import { App } from "../src/app.js";
import { click, waitFor } from "./helpers.js";
import { MockServer } from "./mock_server.js";

function mount(server: MockServer): App {
  document.body.innerHTML = '<div id="app"></div>';
  const root = document.getElementById("app")!;
  const app = new App(root, new ApiClient("", server.fetch));
  app.start();
  return app;
}

function playCurrent(): void {
  document.getElementById("audio")!.dispatchEvent(new Event("play"));
}

const submitBtn = () => document.getElementById("submit-btn") as HTMLButtonElement;

async function enroll(subject = "eval-1"): Promise<void> {
  (document.getElementById("subject-input") as HTMLInputElement).value = subject;
  click(document.getElementById("start-btn"));
  await waitFor(() => !!document.getElementById("submit-btn"), 5000, "rate screen");
}

describe("enroll screen", () => {
  let server: MockServer;
  beforeEach(() => {
    server = new MockServer();
  });

  it("rejects an empty id inline without any request", async () => {
    mount(server);
    (document.getElementById("subject-input") as HTMLInputElement).value = "   ";
    click(document.getElementById("start-btn"));
    await new Promise((r) => setTimeout(r, 30));
    expect(document.getElementById("enroll-error")!.textContent).not.toBe("");
    expect(server.requests.length).toBe(0);
  });

  it("starts a session and shows the first stimulus", async () => {
    mount(server);
    await enroll();
    expect(document.getElementById("progress")!.textContent).toContain("0 / 2");
    expect(document.getElementById("audio")).toBeTruthy();
  });

  it("resumes server-side progress for a returning subject", async () => {
    server.cursorBySession.set("sess-back", 1);
    mount(server);
    await enroll("back");
    expect(document.getElementById("progress")!.textContent).toContain("1 / 2");
  });

  it("surfaces API failures with the error text", async () => {
    const failing = new MockServer();
    failing.fetch = async () =>
      new Response(JSON.stringify({ detail: "study not loaded" }), { status: 500 });
    mount(failing);
    (document.getElementById("subject-input") as HTMLInputElement).value = "x";
    click(document.getElementById("start-btn"));
    await waitFor(
      () => document.getElementById("enroll-error")!.textContent !== "",
      5000,
      "error text",
    );
    expect(document.getElementById("enroll-error")!.textContent).toContain("study not loaded");
  });
});

describe("rating screen gating", () => {
  let server: MockServer;
  beforeEach(async () => {
    server = new MockServer();
    mount(server);
    await enroll();
  });

  it("keeps submit disabled until playback and both judgments", () => {
    expect(submitBtn().disabled).toBe(true);
    click(document.getElementById("btn-real"));
    click(document.getElementById("likert-4"));
    expect(submitBtn().disabled).toBe(true); // no playback yet
    playCurrent();
    expect(submitBtn().disabled).toBe(false);
  });

  it("requires both judgments even after playback", () => {
    playCurrent();
    expect(submitBtn().disabled).toBe(true);
    click(document.getElementById("btn-artificial"));
    expect(submitBtn().disabled).toBe(true);
    click(document.getElementById("likert-2"));
    expect(submitBtn().disabled).toBe(false);
  });

  it("maps keyboard keys 1-5 to Likert grades", () => {
    playCurrent();
    click(document.getElementById("btn-real"));
    document.dispatchEvent(new KeyboardEvent("keydown", { key: "5" }));
    expect(submitBtn().disabled).toBe(false);
    expect(document.getElementById("likert-5")!.classList.contains("selected")).toBe(true);
  });

  it("shows Likert labels exactly as configured", () => {
    expect(document.getElementById("likert-5")!.textContent).toBe("5 Excellent");
    expect(document.getElementById("likert-4")!.textContent).toBe("4 Good");
    expect(document.getElementById("likert-3")!.textContent).toBe("3 Fair or OK");
    expect(document.getElementById("likert-2")!.textContent).toBe("2 Poor");
    expect(document.getElementById("likert-1")!.textContent).toBe("1 Bad");
  });

  it("submits a schema-conformant payload and advances", async () => {
    playCurrent();
    click(document.getElementById("btn-real"));
    click(document.getElementById("likert-4"));
    click(submitBtn());
    await waitFor(
      () => document.getElementById("progress")?.textContent?.includes("1 / 2") ?? false,
      5000,
      "advance",
    );
    expect(server.submissions).toEqual([
      { token: "tok-0", naturalness: "Real", likert: 4 },
    ]);
  });

  it("preserves selections and shows the error when the server rejects", async () => {
    server.failNextRating(403, "token is not for a current or past stimulus");
    playCurrent();
    click(document.getElementById("btn-artificial"));
    click(document.getElementById("likert-1"));
    click(submitBtn());
    await waitFor(
      () => document.getElementById("rate-error")!.textContent !== "",
      5000,
      "rate error",
    );
    expect(document.getElementById("rate-error")!.textContent).toContain("token");
    expect(document.getElementById("btn-artificial")!.classList.contains("selected")).toBe(true);
    expect(document.getElementById("likert-1")!.classList.contains("selected")).toBe(true);
    expect(submitBtn().disabled).toBe(false);
  });
});

describe("completion", () => {
  it("shows the done screen at 100% after the last stimulus", async () => {
    const server = new MockServer({ total: 1 });
    mount(server);
    await enroll();
    playCurrent();
    click(document.getElementById("btn-real"));
    click(document.getElementById("likert-3"));
    click(submitBtn());
    await waitFor(() => !!document.getElementById("done-screen"), 5000, "done screen");
    expect(document.getElementById("progress")!.textContent).toContain("100%");
  });

  it("never stores condition labels in session state or DOM", async () => {
    const server = new MockServer({ total: 1 });
    const app = mount(server);
    await enroll();
    const state = JSON.stringify(app.session);
    expect(state).not.toMatch(/Natural|Tacotron|VITS|condition/i);
    expect(document.body.innerHTML).not.toMatch(/Natural|Tacotron|VITS/);
  });
});
