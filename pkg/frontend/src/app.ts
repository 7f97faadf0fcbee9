// Annotation flow: play the assigned clip (replayable), collect a typed
// transcription in a bare text field, submit, advance. The text input keeps
// autocomplete, autocorrect, autocapitalize and spellcheck disabled; nothing
// is stored client-side beyond the in-progress field.

import { ApiClient, makeApi } from "./api.js";

export interface UiSessionState {
  annotatorId: string;
  currentAudioId: string | null;
  enteredText: string;
  completed: number;
  total: number;
}

const ASSIST_OFF: Record<string, string> = {
  autocomplete: "off",
  autocorrect: "off",
  autocapitalize: "off",
  spellcheck: "false",
};

export class AnnotationApp {
  state: UiSessionState = {
    annotatorId: "",
    currentAudioId: null,
    enteredText: "",
    completed: 0,
    total: 0,
  };

  private doc: Document;
  private api: ApiClient;

  constructor(doc: Document, api: ApiClient) {
    this.doc = doc;
    this.api = api;
    this.wireStartForm();
    this.wireTaskForm();
  }

  // --- element accessors ---

  private el<T extends HTMLElement>(id: string): T {
    const node = this.doc.getElementById(id);
    if (!node) throw new Error(`missing element #${id}`);
    return node as T;
  }

  get textInput(): HTMLInputElement {
    return this.el<HTMLInputElement>("transcription-input");
  }

  get submitButton(): HTMLButtonElement {
    return this.el<HTMLButtonElement>("submit-button");
  }

  // --- wiring ---

  private wireStartForm(): void {
    const form = this.el<HTMLFormElement>("start-form");
    form.addEventListener("submit", (event) => {
      event.preventDefault();
      const annotator = this.el<HTMLInputElement>("annotator-input").value.trim();
      const condition = this.el<HTMLSelectElement>("condition-select").value;
      if (annotator && condition) void this.start(annotator, condition);
    });
    void this.populateConditions();
  }

  private wireTaskForm(): void {
    const input = this.textInput;
    for (const [name, value] of Object.entries(ASSIST_OFF)) {
      input.setAttribute(name, value);
    }
    input.addEventListener("input", () => {
      this.state.enteredText = input.value;
      this.refreshSubmitEnabled();
    });
    this.el<HTMLFormElement>("transcription-form").addEventListener("submit", (event) => {
      event.preventDefault();
      void this.submit();
    });
    this.refreshSubmitEnabled();
  }

  private async populateConditions(): Promise<void> {
    const select = this.el<HTMLSelectElement>("condition-select");
    const conditions = await this.api.listConditions();
    select.innerHTML = "";
    for (const condition of conditions) {
      const option = this.doc.createElement("option");
      option.value = condition;
      option.textContent = condition;
      select.appendChild(option);
    }
  }

  // --- flow ---

  async start(annotatorId: string, condition: string): Promise<void> {
    this.hideError();
    const result = await this.api.createSession(annotatorId, condition);
    if (!result.ok) {
      this.showError(result.error ?? "could not start a session");
      return;
    }
    this.state.annotatorId = annotatorId;
    this.el("start-screen").hidden = true;
    await this.loadNext();
  }

  async loadNext(): Promise<void> {
    let item;
    try {
      item = await this.api.nextItem(this.state.annotatorId);
    } catch (err) {
      this.showError(String(err instanceof Error ? err.message : err));
      return;
    }
    this.state.completed = item.completed;
    this.state.total = item.total;
    if (item.done) {
      this.state.currentAudioId = null;
      this.el("task-screen").hidden = true;
      this.el("done-screen").hidden = false;
      return;
    }
    this.state.currentAudioId = item.audioId;
    this.el("task-screen").hidden = false;
    this.el("progress").textContent = `${item.completed} / ${item.total}`;
    this.replaceAudioElement(item.audioId as string);
    this.refreshSubmitEnabled();
    this.textInput.focus();
  }

  async submit(): Promise<void> {
    const text = this.state.enteredText;
    if (!text.trim() || this.state.currentAudioId === null) return;
    this.submitButton.disabled = true;
    try {
      await this.api.submitTranscription(
        this.state.annotatorId, this.state.currentAudioId, text,
      );
    } catch (err) {
      // entered text stays in the field so the annotator can retry
      this.showError(`submission failed, please retry: ${err instanceof Error ? err.message : err}`);
      this.refreshSubmitEnabled();
      return;
    }
    this.hideError();
    this.state.enteredText = "";
    this.textInput.value = "";
    await this.loadNext();
  }

  // --- presentation helpers ---

  private replaceAudioElement(audioId: string): void {
    const old = this.el<HTMLAudioElement>("player");
    const fresh = this.doc.createElement("audio");
    fresh.id = "player";
    fresh.setAttribute("controls", "");
    fresh.setAttribute("preload", "auto");
    fresh.src = this.api.audioUrl(this.state.annotatorId, audioId);
    old.replaceWith(fresh);
  }

  private refreshSubmitEnabled(): void {
    this.submitButton.disabled =
      !this.state.enteredText.trim() || this.state.currentAudioId === null;
  }

  private showError(message: string): void {
    const banner = this.el("error-banner");
    banner.textContent = message;
    banner.hidden = false;
  }

  private hideError(): void {
    this.el("error-banner").hidden = true;
  }
}

export function bootstrap(doc: Document): AnnotationApp {
  return new AnnotationApp(doc, makeApi((input, init) => fetch(input, init)));
}
