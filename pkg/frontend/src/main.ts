/** Browser entry point: wires the lobby, stream and screens to the DOM.
 * All behavior lives in the imported modules; this file only draws. */

import { SessionApi } from "./api.js";
import { isPaused, lightLocus, renderFlower } from "./flower.js";
import { FormState } from "./forms.js";
import { GuideAnimator } from "./guide.js";
import { Lobby, flowerPlacement } from "./lobby.js";
import { NBackScreen } from "./nback.js";
import { consumeStream } from "./stream.js";
import type { FeedbackEvent, GuideFrameView, QuestionnaireDef } from "./types.js";

const api = new SessionApi(window.location.origin.replace(/:\d+$/, ":8077"));
const lobby = new Lobby(api);
const animator = new GuideAnimator();
let nback: NBackScreen | null = null;
let form: FormState | null = null;
let defs: Record<string, QuestionnaireDef> = {};

const app = document.getElementById("app") ?? document.body;

function el(tag: string, text?: string, cls?: string): HTMLElement {
  const node = document.createElement(tag);
  if (text) node.textContent = text;
  if (cls) node.className = cls;
  return node;
}

function drawFlower(container: HTMLElement): void {
  const frame = animator.frameForDrawing(performance.now());
  container.replaceChildren();
  if (frame === null || isPaused(animator.lastFrameAtMs, performance.now())) {
    container.append(el("div", "paused", "paused-indicator"));
    return;
  }
  const scene = renderFlower(frame);
  const canvas = el("div", undefined, "flower");
  for (const light of scene.lights) {
    const dot = el("span", undefined, "light");
    dot.style.opacity = String(light.brightness);
    dot.dataset.petal = String(light.petal);
    dot.dataset.position = String(light.position);
    canvas.append(dot);
  }
  canvas.dataset.locus = String(lightLocus(frame));
  container.append(canvas);
}

function questionnaireIdForStage(stage: string): string {
  return stage.startsWith("stai") ? "stai6" : "use";
}

function render(): void {
  const screen = lobby.screen;
  app.replaceChildren();
  app.append(el("h1", "pacerlab"));

  if (screen === "lobby") {
    const input = el("input") as HTMLInputElement;
    input.placeholder = "participant id";
    const picker = el("select") as HTMLSelectElement;
    for (const c of ["focus-dynamic", "focus-static", "ambient-dynamic", "ambient-static"]) {
      const opt = el("option", c) as HTMLOptionElement;
      opt.value = c;
      picker.append(opt);
    }
    const start = el("button", "start session");
    start.onclick = async () => {
      await lobby.createSession(input.value || "anon", picker.value);
      if (lobby.session) void runStream();
      render();
    };
    app.append(input, picker, start);
    if (lobby.error) app.append(el("p", `${lobby.error} — retry?`, "error"));
    return;
  }

  const session = lobby.session!;
  app.append(el("p", `stage: ${session.current_stage ?? "done"} (${session.condition})`));

  const placement = flowerPlacement(session.condition, screen);
  if (placement !== "hidden") {
    const container = el("div", undefined, `flower-${placement}`);
    app.append(container);
    drawFlower(container);
  }

  if (screen === "calibration") {
    for (const action of ["faster", "slower", "accept"]) {
      const btn = el("button", action);
      btn.onclick = () => void lobby.submitEvent("calibration_event", { action }).then(render);
      app.append(btn);
    }
  } else if (screen === "stai" || screen === "use") {
    const qid = questionnaireIdForStage(session.current_stage!);
    const def = defs[qid];
    if (def && (!form || form.questionnaireId !== session.current_stage)) {
      form = new FormState(screen === "use" ? "use" : session.current_stage!, def);
    }
    if (def && form) {
      def.items.forEach((item, i) => {
        const row = el("div", item.text_en, "item");
        def.anchors_en.forEach((anchor, k) => {
          const btn = el("button", anchor);
          btn.onclick = () => {
            form!.answer(i, k + 1);
            render();
          };
          row.append(btn);
        });
        app.append(row);
      });
      const submit = el("button", "submit") as HTMLButtonElement;
      submit.disabled = !form.canSubmit;
      submit.onclick = () =>
        void lobby.submitEvent("questionnaire_submitted", form!.toPayload()).then(() => {
          form = null;
          render();
        });
      app.append(submit);
    }
  } else if (screen === "nback") {
    const letterBox = el("div", nback?.current?.visible ? nback.current.letter : "", "letter");
    letterBox.oncontextmenu = (e) => e.preventDefault();
    letterBox.onmousedown = (e) => nback?.onClick(e.button === 2 ? "right" : "left");
    app.append(letterBox);
    if (nback?.lastFeedback) {
      app.append(el("p", nback.lastFeedback.correct ? "correct" : "incorrect", "feedback"));
    }
  } else if (screen !== "done") {
    const advance = el("button", "advance stage");
    advance.onclick = () => void lobby.advance().then(render);
    app.append(advance);
  }
}

async function runStream(): Promise<void> {
  const session = lobby.session!;
  nback = new NBackScreen(
    (r) => void lobby.submitEvent("response", r),
    () => performance.now(),
  );
  await consumeStream(api.streamUrl(session.id), (event) => {
    if (event.name === "guide_frame") {
      animator.onFrame(event.data as GuideFrameView, performance.now());
    } else if (event.name === "stimulus") {
      const d = event.data as { letter: string; seq_index: number; position: number };
      nback!.onStimulus(d.letter, d.seq_index, d.position);
      render();
    } else if (event.name === "feedback") {
      nback!.onFeedback(event.data as FeedbackEvent);
      render();
    } else if (event.name === "stage") {
      void lobby.refresh().then(render);
    }
  });
}

async function boot(): Promise<void> {
  try {
    defs = (await api.questionnaires()) as unknown as Record<string, QuestionnaireDef>;
  } catch {
    // definitions load lazily on retry; the lobby still renders
  }
  render();
  setInterval(() => {
    if (flowerPlacement(lobby.session?.condition ?? "", lobby.screen) !== "hidden") render();
  }, 50);
}

void boot();
