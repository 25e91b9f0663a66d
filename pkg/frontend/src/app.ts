import { ApiClient, FieldError, NetworkError } from "./api.js";
import { RatingDraft } from "./draft.js";
import { submitDraft } from "./flow.js";
import { DraftStore, IdentityStore } from "./storage.js";
import { CRITERIA, Criterion, ItemPayload, Progress } from "./types.js";

const RUBRIC: Record<Criterion, string> = {
  formality:
    "2 = clearly more formal than the input; 1 = somewhat more formal; 0 = not more formal at all",
  fluency:
    "2 = reads naturally and is grammatical; 1 = minor errors; 0 = errors make it hard to understand",
  meaning:
    "2 = keeps the input's meaning; 1 = small details differ; 0 = important information is lost",
};

export class AnnotatorApp {
  private api: ApiClient;
  private drafts: DraftStore;
  private identity: IdentityStore;
  private root: HTMLElement;
  private annotator: string | null = null;
  private draft: RatingDraft | null = null;
  private item: ItemPayload | null = null;

  constructor(root: HTMLElement, api: ApiClient, drafts: DraftStore, identity: IdentityStore) {
    this.root = root;
    this.api = api;
    this.drafts = drafts;
    this.identity = identity;
  }

  async start(): Promise<void> {
    this.annotator = this.identity.get();
    if (this.annotator) {
      await this.loadNext();
    } else {
      this.renderStart();
    }
  }

  private renderStart(): void {
    this.root.innerHTML = "";
    const box = el("div", "start-box");
    box.appendChild(el("h1", "", "Formality rating"));
    box.appendChild(
      el("p", "", "Enter your annotator id to begin. Your id is kept for this session only.")
    );
    const input = document.createElement("input");
    input.id = "annotator-input";
    input.placeholder = "annotator id";
    const button = el("button", "", "Start") as HTMLButtonElement;
    button.id = "start-button";
    button.onclick = async () => {
      const value = input.value.trim();
      if (!value) return;
      this.identity.set(value);
      this.annotator = value;
      await this.loadNext();
    };
    box.appendChild(input);
    box.appendChild(button);
    this.root.appendChild(box);
  }

  private async loadNext(): Promise<void> {
    try {
      const response = await this.api.fetchNext(this.annotator!);
      if (response.done) {
        this.renderDone(response.progress);
        return;
      }
      this.item = response.item!;
      const restored = this.drafts.load(this.annotator!, this.item.id);
      this.draft =
        restored && restored.itemId === this.item.id
          ? restored
          : new RatingDraft(
              this.annotator!,
              this.item.id,
              this.item.outputs.map((o) => o.display_index)
            );
      this.renderItem(response.progress);
    } catch (err) {
      if (err instanceof NetworkError) {
        this.renderRetry(String(err.message));
      } else {
        throw err;
      }
    }
  }

  private renderRetry(message: string): void {
    this.root.innerHTML = "";
    const banner = el("div", "retry-banner");
    banner.appendChild(el("p", "", `Connection problem: ${message}`));
    const retry = el("button", "", "Retry") as HTMLButtonElement;
    retry.id = "retry-button";
    retry.onclick = () => void this.loadNext();
    banner.appendChild(retry);
    this.root.appendChild(banner);
  }

  private renderDone(progress: Progress): void {
    this.root.innerHTML = "";
    const box = el("div", "done-box");
    box.appendChild(el("h1", "", "All items rated"));
    box.appendChild(el("p", "", `Final progress: ${progress.rated}/${progress.total}`));
    this.root.appendChild(box);
  }

  private renderItem(progress: Progress): void {
    const item = this.item!;
    const draft = this.draft!;
    this.root.innerHTML = "";

    const header = el("div", "header");
    header.appendChild(el("h1", "", `Item ${item.id}`));
    header.appendChild(
      el("p", "progress", `Progress: ${progress.rated}/${progress.total} items`)
    );
    this.root.appendChild(header);

    const source = el("div", "source");
    source.appendChild(el("h2", "", "Input sentence"));
    source.appendChild(el("p", "source-text", item.source));
    this.root.appendChild(source);

    for (const output of item.outputs) {
      const block = el("div", "output-block");
      block.dataset.display = String(output.display_index);
      block.appendChild(el("h3", "", `Output ${output.display_index + 1}`));
      block.appendChild(el("p", "output-text", output.text));
      if (item.rated_display_indices.includes(output.display_index)) {
        block.appendChild(el("p", "already-rated", "Already rated in an earlier session."));
      }
      for (const criterion of CRITERIA) {
        block.appendChild(this.renderControl(output.display_index, criterion));
      }
      this.root.appendChild(block);
    }

    const submit = el("button", "submit", "Submit ratings") as HTMLButtonElement;
    submit.id = "submit-button";
    submit.disabled = !draft.isComplete();
    submit.onclick = () => void this.handleSubmit();
    this.root.appendChild(submit);
  }

  private renderControl(displayIndex: number, criterion: Criterion): HTMLElement {
    const wrap = el("div", "control");
    wrap.dataset.criterion = criterion;
    const label = el("label", "", criterion);
    label.title = RUBRIC[criterion];
    wrap.appendChild(label);
    wrap.appendChild(el("small", "rubric", RUBRIC[criterion]));
    const group = el("div", "choices");
    for (const value of [0, 1, 2]) {
      const choice = document.createElement("input");
      choice.type = "radio";
      choice.name = `r-${displayIndex}-${criterion}`;
      choice.value = String(value);
      choice.checked = this.draft!.get(displayIndex, criterion) === value;
      choice.onchange = () => {
        this.draft!.set(displayIndex, criterion, value);
        this.drafts.save(this.draft!);
        const submit = document.getElementById("submit-button") as HTMLButtonElement | null;
        if (submit) submit.disabled = !this.draft!.isComplete();
      };
      const lab = document.createElement("label");
      lab.appendChild(choice);
      lab.appendChild(document.createTextNode(String(value)));
      group.appendChild(lab);
    }
    wrap.appendChild(group);
    return wrap;
  }

  private async handleSubmit(): Promise<void> {
    const draft = this.draft!;
    try {
      await submitDraft(this.api, draft);
      this.drafts.clear(draft.annotator, draft.itemId);
      await this.loadNext();
    } catch (err) {
      if (err instanceof FieldError) {
        this.highlightField(err.field);
      } else if (err instanceof NetworkError) {
        // draft stays persisted; let the annotator retry
        this.renderRetry(String(err.message));
      } else {
        throw err;
      }
    }
  }

  private highlightField(field: string | null): void {
    for (const control of Array.from(this.root.querySelectorAll(".control"))) {
      control.classList.toggle(
        "error",
        field !== null && (control as HTMLElement).dataset.criterion === field
      );
    }
  }
}

function el(tag: string, className = "", text = ""): HTMLElement {
  const node = document.createElement(tag);
  if (className) node.className = className;
  if (text) node.textContent = text;
  return node;
}
