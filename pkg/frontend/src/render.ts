/**
 * Pure HTML builders for the questionnaire views. Keeping these as string
 * functions makes the copy and structure testable without a DOM; main.ts
 * owns the event wiring.
 */
import {
  CHOICES,
  CHOICE_LABELS,
  CRITERIA,
  CRITERION_LABELS,
  type NextCase,
} from "./schema.js";
import type { Draft } from "./state.js";

function escapeHtml(text: string): string {
  return text
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");
}

function reportPanel(label: string, text: string): string {
  const paragraphs = text
    .split(/\n+/)
    .map((line) => `<p>${escapeHtml(line)}</p>`)
    .join("");
  return `<section class="report"><h3>Report ${label}</h3>${paragraphs}</section>`;
}

function choiceSelector(selected: string | null): string {
  const options = CHOICES.map((choice) => {
    const checked = choice === selected ? " checked" : "";
    return (
      `<label class="choice"><input type="radio" name="choice" value="${choice}"${checked}>` +
      `${CHOICE_LABELS[choice]}</label>`
    );
  }).join("");
  return `<fieldset class="choices"><legend>Who wrote these reports?</legend>${options}</fieldset>`;
}

function likertSlider(name: string, value: number | null): string {
  const current = value ?? 3;
  return (
    `<label class="likert">Confidence (1 = guessing, 5 = certain)` +
    `<input type="range" name="${name}" min="1" max="5" step="1" value="${current}"></label>`
  );
}

function criteriaBlock(draft: Draft): string {
  const rows = CRITERIA.map((criterion) => {
    const entry = draft.criteria[criterion];
    const checked = entry?.selected ? " checked" : "";
    const importance = entry?.importance ?? 3;
    return (
      `<li><label><input type="checkbox" name="crit:${criterion}"${checked}>` +
      `${CRITERION_LABELS[criterion]}</label>` +
      `<input type="range" name="imp:${criterion}" min="1" max="5" step="1" value="${importance}"` +
      ` aria-label="importance of ${CRITERION_LABELS[criterion]}"></li>`
    );
  }).join("");
  return `<fieldset class="criteria"><legend>What shaped your judgment? Rate each selected cue's importance.</legend><ul>${rows}</ul></fieldset>`;
}

function imageStrip(refs: string[]): string {
  if (refs.length === 0) {
    return `<p class="no-images">No scan images attached to this case.</p>`;
  }
  const slices = refs
    .map((ref) => `<img src="/assets/${escapeHtml(ref)}" alt="CT slice" loading="lazy">`)
    .join("");
  return `<div class="image-strip" role="list">${slices}</div>`;
}

function priorAnswer(next: NextCase): string {
  const prior = next.pre_image_response;
  if (!prior) return "";
  return (
    `<aside class="prior">Your pre-image answer: <strong>${CHOICE_LABELS[prior.choice]}</strong>` +
    ` (confidence ${prior.confidence}). Reassess with the scan in view; submitting the same` +
    ` choice records it explicitly.</aside>`
  );
}

export function renderCase(next: NextCase, draft: Draft): string {
  const { answered, total } = next.progress;
  const phaseTitle = next.phase === "pre_image" ? "Reports only" : "Reports with CT images";
  const parts = [
    `<header><h2>${phaseTitle}</h2><p class="progress">Case ${answered + 1}/${total}</p></header>`,
  ];
  if (next.phase === "post_image") {
    parts.push(imageStrip(next.image_refs ?? []));
    parts.push(priorAnswer(next));
  }
  parts.push(`<div class="pair">${reportPanel("A", next.report_a)}${reportPanel("B", next.report_b)}</div>`);
  parts.push(choiceSelector(draft.choice));
  parts.push(likertSlider("confidence", draft.confidence));
  parts.push(criteriaBlock(draft));
  parts.push(`<button type="button" id="submit">Submit answer</button>`);
  parts.push(`<p id="validation" class="validation" role="alert"></p>`);
  return `<form class="case" data-case-id="${escapeHtml(next.case_id)}" data-phase="${next.phase}">${parts.join("")}</form>`;
}

export function renderDone(): string {
  return (
    `<section class="done"><h2>Thank you</h2>` +
    `<p>Both phases are complete and your answers are recorded.</p></section>`
  );
}

export function renderError(message: string, retryable: boolean): string {
  const retry = retryable ? `<button type="button" id="retry">Retry</button>` : "";
  return `<section class="error"><p>${escapeHtml(message)}</p><p>Your drafts are saved locally.</p>${retry}</section>`;
}
