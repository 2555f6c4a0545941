// DOM rendering: turns view models into elements. Numbers are formatted
// for display here but always come straight off a view-model field.

import type { InstructorViewModel } from "./instructor.js";
import type { PracticeViewModel, QueueViewModel } from "./viewmodel.js";

const fmt = (x: number): string => x.toFixed(3);

export function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  className?: string,
  text?: string,
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  if (className) node.className = className;
  if (text !== undefined) node.textContent = text;
  return node;
}

export function renderConceptBars(root: HTMLElement, vm: PracticeViewModel): void {
  root.replaceChildren();
  root.append(el("div", "watermark", `as of answer #${vm.watermark}`));
  for (const bar of vm.bars) {
    const row = el("div", "bar-row");
    row.dataset.concept = bar.concept;
    row.append(el("span", "bar-label", bar.concept));
    const track = el("div", "bar-track");
    const fill = el("div", "bar-fill");
    fill.style.width = `${(bar.fraction * 100).toFixed(1)}%`;
    track.append(fill);
    row.append(track);
    row.append(el("span", "bar-value", fmt(bar.rating)));
    row.append(el("span", "bar-attempts", `${bar.attempts}x`));
    if (bar.delta !== null) {
      const badge = el(
        "span",
        bar.delta >= 0 ? "delta-badge up" : "delta-badge down",
        `${bar.delta >= 0 ? "+" : ""}${fmt(bar.delta)}`,
      );
      row.append(badge);
    }
    root.append(row);
  }
}

export function renderQueue(root: HTMLElement, vm: QueueViewModel): void {
  root.replaceChildren();
  if (vm.entries.length === 0) {
    root.append(el("div", "empty", `no recommendations (${vm.status})`));
    return;
  }
  for (const entry of vm.entries) {
    const row = el("div", "queue-row");
    row.dataset.item = entry.item;
    row.append(el("span", "queue-item", entry.item));
    row.append(el("span", "queue-p", `p(correct) ${fmt(entry.predictedSuccess)}`));
    root.append(row);
  }
}

export function renderInstructor(root: HTMLElement, vm: InstructorViewModel): void {
  root.replaceChildren();
  if (vm.status !== "ok") {
    root.append(el("div", "empty", "no students enrolled yet"));
    return;
  }
  root.append(el("div", "watermark",
                 `${vm.students} students, as of answer #${vm.watermark}`));
  for (const bar of vm.bars) {
    const row = el("div", "bar-row");
    row.dataset.concept = bar.concept;
    row.append(el("span", "bar-label", bar.concept));
    const track = el("div", "bar-track");
    const fill = el("div", "bar-fill cohort");
    fill.style.width = `${(bar.fraction * 100).toFixed(1)}%`;
    track.append(fill);
    row.append(track);
    row.append(el("span", "bar-value",
                  `mean ${fmt(bar.mean)} (p25 ${fmt(bar.p25)} / p75 ${fmt(bar.p75)})`));
    root.append(row);
  }
  if (vm.difficulty) {
    const d = vm.difficulty;
    root.append(el("div", "difficulty",
      `item difficulty: n=${d.count} min ${fmt(d.min)} p25 ${fmt(d.p25)} ` +
      `median ${fmt(d.p50)} p75 ${fmt(d.p75)} max ${fmt(d.max)}`));
  }
}
