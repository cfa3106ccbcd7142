/**
 * Browser wiring: binds the controller and renderers to the page, reading
 * drafts on every input so nothing is lost on reload.
 */
import { SurveyApi, ApiError } from "./api.js";
import { CRITERIA, type Choice, type Criterion } from "./schema.js";
import {
  DraftStore,
  IncompleteDraftError,
  MemoryStore,
  SurveyController,
  emptyDraft,
  type Draft,
} from "./state.js";
import { renderCase, renderDone, renderError } from "./render.js";

function storage(): DraftStore {
  try {
    window.localStorage.setItem("survey-probe", "1");
    window.localStorage.removeItem("survey-probe");
    return new DraftStore(window.localStorage);
  } catch {
    return new DraftStore(new MemoryStore());
  }
}

function readDraft(form: HTMLFormElement): Draft {
  const draft = emptyDraft();
  const choice = form.querySelector<HTMLInputElement>('input[name="choice"]:checked');
  draft.choice = (choice?.value as Choice | undefined) ?? null;
  const confidence = form.querySelector<HTMLInputElement>('input[name="confidence"]');
  draft.confidence = confidence ? Number(confidence.value) : null;
  for (const criterion of CRITERIA) {
    const selected = form.querySelector<HTMLInputElement>(`input[name="crit:${criterion}"]`);
    const importance = form.querySelector<HTMLInputElement>(`input[name="imp:${criterion}"]`);
    draft.criteria[criterion as Criterion] = {
      selected: selected?.checked ?? false,
      importance: importance ? Number(importance.value) : 1,
    };
  }
  return draft;
}

export async function boot(root: HTMLElement, baseUrl = ""): Promise<void> {
  const api = new SurveyApi(baseUrl);
  const drafts = storage();
  const controller = new SurveyController(api, drafts);

  const draw = (): void => {
    if (controller.state.finished || controller.state.current === null) {
      root.innerHTML = renderDone();
      return;
    }
    const current = controller.state.current;
    const draft = controller.draftFor(current.case_id, current.phase);
    root.innerHTML = renderCase(current, draft);
    const form = root.querySelector<HTMLFormElement>("form.case");
    if (!form) return;
    form.addEventListener("input", () => {
      controller.saveDraft(current.case_id, current.phase, readDraft(form));
    });
    form.querySelector("#submit")?.addEventListener("click", async () => {
      controller.saveDraft(current.case_id, current.phase, readDraft(form));
      const validation = form.querySelector<HTMLElement>("#validation");
      try {
        await controller.submitCurrent();
        draw();
      } catch (err) {
        if (err instanceof IncompleteDraftError && validation) {
          validation.textContent = err.message;
        } else if (err instanceof ApiError) {
          root.innerHTML = renderError(err.message, true);
          root.querySelector("#retry")?.addEventListener("click", draw);
        } else {
          throw err;
        }
      }
    });
  };

  const role = new URLSearchParams(window.location.search).get("role") ?? "other_physician";
  try {
    await controller.start(role);
  } catch (err) {
    root.innerHTML = renderError(err instanceof Error ? err.message : String(err), true);
    root.querySelector("#retry")?.addEventListener("click", () => void boot(root, baseUrl));
    return;
  }
  draw();
}

const mount = document.getElementById("app");
if (mount) {
  void boot(mount);
}
