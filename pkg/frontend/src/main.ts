// Entry point: wires the practice loop and instructor view to the page.
// Query parameters select the session: ?course=demo&student=alice[&token=..]

import { HttpPracticeApi } from "./api.js";
import { renderConceptBars, renderInstructor, renderQueue } from "./dom.js";
import { buildInstructorView } from "./instructor.js";
import { DoubleSubmitError, PracticeSession } from "./practice.js";
import { buildConceptBars, buildQueue } from "./viewmodel.js";

function must(id: string): HTMLElement {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing #${id}`);
  return node;
}

async function refresh(session: PracticeSession): Promise<void> {
  if (session.model) {
    renderConceptBars(must("bars"), buildConceptBars(session.model, session.lastAnswer));
  }
  renderQueue(must("queue"), buildQueue({
    student: session.model?.student ?? "",
    watermark: session.model?.watermark ?? 0,
    status: session.queue.length ? "ok" : "empty_pool",
    items: session.queue,
  }));
  const prompt = must("prompt");
  prompt.textContent = session.current
    ? `attempt item ${session.current.item} and report the outcome:`
    : "queue is empty";
}

async function main(): Promise<void> {
  const params = new URLSearchParams(window.location.search);
  const course = params.get("course") ?? "demo";
  const student = params.get("student") ?? "alice";
  const api = new HttpPracticeApi("", params.get("token") ?? undefined);
  const session = new PracticeSession(api, course, student);
  const banner = must("banner");

  const guard = async (action: () => Promise<void>) => {
    try {
      banner.textContent = "";
      await action();
      await refresh(session);
    } catch (err) {
      if (err instanceof DoubleSubmitError) return; // ignored: already in flight
      banner.textContent = `${err}`;
    }
  };

  must("answer-correct").addEventListener("click", () =>
    guard(async () => {
      await session.submit(true);
      await session.next();
    }),
  );
  must("answer-incorrect").addEventListener("click", () =>
    guard(async () => {
      await session.submit(false);
      await session.next();
    }),
  );
  must("reload-overview").addEventListener("click", () =>
    guard(async () => {
      const overview = await api.overview(course);
      renderInstructor(must("instructor"), buildInstructorView(overview));
    }),
  );

  await guard(() => session.start());
}

main();
