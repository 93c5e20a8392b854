/**
 * Single-page evaluator flow: enroll -> rate (one stimulus at a time) -> done.
 *
 * The client holds only what the server sends it: a session id, opaque
 * stimulus tokens, audio URLs, and progress counts. Condition labels never
 * reach the browser. Submission unlocks only after playback has started and
 * both judgments are made; keys 1-5 pick the Likert grade.
 */

import { ApiClient, ApiError, Naturalness, Progress } from "./api.js";
import { LIKERT_LABELS, STRINGS } from "./config.js";

export interface UiSession {
  sessionId: string;
  progress: Progress;
  token: string | null;
  audioUrl: string | null;
}

type AudioFactory = (url: string) => HTMLAudioElement;

const defaultAudioFactory: AudioFactory = (url) => {
  const el = document.createElement("audio");
  el.controls = true;
  el.preload = "auto";
  el.src = url;
  return el;
};

export class App {
  readonly root: HTMLElement;
  private readonly api: ApiClient;
  private readonly audioFactory: AudioFactory;
  session: UiSession | null = null;

  private played = false;
  private naturalness: Naturalness | null = null;
  private likert: number | null = null;
  private keyHandler: ((ev: KeyboardEvent) => void) | null = null;

  constructor(root: HTMLElement, api: ApiClient, audioFactory: AudioFactory = defaultAudioFactory) {
    this.root = root;
    this.api = api;
    this.audioFactory = audioFactory;
  }

  start(): void {
    this.renderEnroll();
  }

  // -- enroll ----------------------------------------------------------------

  private renderEnroll(errorText = ""): void {
    this.detachKeys();
    this.root.replaceChildren();
    const box = el("div", { class: "screen enroll" });
    box.append(el("h1", { text: STRINGS.title }));
    box.append(el("p", { text: STRINGS.enrollPrompt }));
    const input = el("input", {
      id: "subject-input",
      attrs: { placeholder: STRINGS.enrollPlaceholder, autocomplete: "off" },
    }) as HTMLInputElement;
    const error = el("p", { id: "enroll-error", class: "error", text: errorText });
    const button = el("button", { id: "start-btn", text: STRINGS.enrollButton });
    button.addEventListener("click", () => void this.enroll(input.value));
    input.addEventListener("keydown", (ev) => {
      if (ev.key === "Enter") void this.enroll(input.value);
    });
    box.append(input, button, error);
    this.root.append(box);
  }

  private async enroll(subjectId: string): Promise<void> {
    const trimmed = subjectId.trim();
    const errorEl = this.root.querySelector("#enroll-error")!;
    if (!trimmed) {
      errorEl.textContent = STRINGS.enrollEmpty;
      return; // inline validation, no request
    }
    errorEl.textContent = "";
    try {
      const info = await this.api.createSession(trimmed);
      this.session = {
        sessionId: info.session_id,
        progress: info.progress,
        token: null,
        audioUrl: null,
      };
      await this.advance();
    } catch (err) {
      errorEl.textContent = describe(err);
    }
  }

  // -- rate ------------------------------------------------------------------

  private async advance(): Promise<void> {
    const session = this.session!;
    try {
      const next = await this.api.nextStimulus(session.sessionId);
      session.progress = next.progress;
      if (next.done) {
        this.renderDone();
        return;
      }
      session.token = next.token;
      session.audioUrl = next.audio_url;
      this.played = false;
      this.naturalness = null;
      this.likert = null;
      this.renderRate();
    } catch (err) {
      this.renderEnroll(describe(err));
    }
  }

  private renderRate(): void {
    const session = this.session!;
    this.detachKeys();
    this.root.replaceChildren();
    const box = el("div", { class: "screen rate" });
    box.append(el("h1", { text: STRINGS.title }));
    box.append(
      el("p", {
        id: "progress",
        text: `${STRINGS.progressLabel}: ${session.progress.completed} / ${session.progress.total}`,
      }),
    );

    const audio = this.audioFactory(session.audioUrl!);
    audio.id = "audio";
    audio.addEventListener("play", () => {
      this.played = true;
      this.refreshSubmit();
    });
    box.append(audio);

    box.append(el("p", { text: STRINGS.naturalnessQuestion }));
    const natRow = el("div", { class: "choices", id: "naturalness-row" });
    for (const value of ["Real", "Artificial"] as const) {
      const label =
        value === "Real" ? STRINGS.naturalnessReal : STRINGS.naturalnessArtificial;
      const btn = el("button", { id: `btn-${value.toLowerCase()}`, text: label });
      btn.addEventListener("click", () => {
        this.naturalness = value;
        mark(natRow, btn);
        this.refreshSubmit();
      });
      natRow.append(btn);
    }
    box.append(natRow);

    box.append(el("p", { text: STRINGS.likertQuestion }));
    const likertRow = el("div", { class: "choices", id: "likert-row" });
    for (const grade of [5, 4, 3, 2, 1]) {
      const btn = el("button", {
        id: `likert-${grade}`,
        text: `${grade} ${LIKERT_LABELS.get(grade)}`,
      });
      btn.addEventListener("click", () => this.pickLikert(grade));
      likertRow.append(btn);
    }
    box.append(likertRow);

    const hint = el("p", { id: "play-hint", class: "hint", text: STRINGS.playFirst });
    const error = el("p", { id: "rate-error", class: "error" });
    const submit = el("button", {
      id: "submit-btn",
      text: STRINGS.submit,
    }) as HTMLButtonElement;
    submit.disabled = true;
    submit.addEventListener("click", () => void this.submit());
    box.append(hint, submit, error);
    this.root.append(box);

    this.keyHandler = (ev) => {
      const grade = Number(ev.key);
      if (grade >= 1 && grade <= 5) this.pickLikert(grade);
    };
    document.addEventListener("keydown", this.keyHandler);
  }

  private pickLikert(grade: number): void {
    this.likert = grade;
    const row = this.root.querySelector("#likert-row");
    const btn = this.root.querySelector(`#likert-${grade}`);
    if (row && btn) mark(row as HTMLElement, btn as HTMLElement);
    this.refreshSubmit();
  }

  private refreshSubmit(): void {
    const submit = this.root.querySelector("#submit-btn") as HTMLButtonElement | null;
    const hint = this.root.querySelector("#play-hint") as HTMLElement | null;
    if (!submit) return;
    submit.disabled = !(this.played && this.naturalness !== null && this.likert !== null);
    if (hint) hint.hidden = this.played;
  }

  private async submit(): Promise<void> {
    const session = this.session!;
    if (!this.played || this.naturalness === null || this.likert === null) return;
    const errorEl = this.root.querySelector("#rate-error")!;
    errorEl.textContent = "";
    try {
      const ack = await this.api.submitRating(
        session.sessionId,
        session.token!,
        this.naturalness,
        this.likert,
      );
      session.progress = ack.progress;
      await this.advance();
    } catch (err) {
      // Keep the evaluator's selections; surface the rejection.
      errorEl.textContent = describe(err);
    }
  }

  // -- done --------------------------------------------------------------------

  private renderDone(): void {
    const session = this.session!;
    this.detachKeys();
    this.root.replaceChildren();
    const box = el("div", { class: "screen done", id: "done-screen" });
    box.append(el("h1", { text: STRINGS.title }));
    box.append(el("p", { text: STRINGS.doneThanks }));
    const pct =
      session.progress.total === 0
        ? 100
        : Math.round((100 * session.progress.completed) / session.progress.total);
    box.append(
      el("p", {
        id: "progress",
        text: `${STRINGS.progressLabel}: ${pct}%`,
      }),
    );
    this.root.append(box);
  }

  private detachKeys(): void {
    if (this.keyHandler) {
      document.removeEventListener("keydown", this.keyHandler);
      this.keyHandler = null;
    }
  }
}

function el(
  tag: string,
  opts: { id?: string; class?: string; text?: string; attrs?: Record<string, string> } = {},
): HTMLElement {
  const node = document.createElement(tag);
  if (opts.id) node.id = opts.id;
  if (opts.class) node.className = opts.class;
  if (opts.text) node.textContent = opts.text;
  for (const [k, v] of Object.entries(opts.attrs ?? {})) node.setAttribute(k, v);
  return node;
}

function mark(row: HTMLElement, chosen: HTMLElement): void {
  for (const child of Array.from(row.children)) child.classList.remove("selected");
  chosen.classList.add("selected");
}

function describe(err: unknown): string {
  if (err instanceof ApiError) return err.message;
  return STRINGS.networkError;
}
