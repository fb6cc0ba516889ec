/** Questionnaire form state: one 4-point choice per item, submission only
 * once every item has an answer. */

import type { QuestionnaireDef } from "./types.js";

export class FormState {
  readonly questionnaireId: string;
  readonly itemCount: number;
  private answers: (number | null)[];
  private readonly scale: [number, number];

  constructor(questionnaireId: string, def: QuestionnaireDef) {
    this.questionnaireId = questionnaireId;
    this.itemCount = def.items.length;
    this.scale = def.scale;
    this.answers = new Array(def.items.length).fill(null);
  }

  answer(itemIndex: number, value: number): void {
    if (itemIndex < 0 || itemIndex >= this.itemCount) {
      throw new Error(`item index ${itemIndex} out of range`);
    }
    const [lo, hi] = this.scale;
    if (!Number.isInteger(value) || value < lo || value > hi) {
      throw new Error(`answer ${value} outside the ${lo}..${hi} scale`);
    }
    this.answers[itemIndex] = value;
  }

  get canSubmit(): boolean {
    return this.answers.every((a) => a !== null);
  }

  /** Payload for the questionnaire_submitted event. */
  toPayload(): { questionnaire: string; items: number[] } {
    if (!this.canSubmit) throw new Error("form incomplete");
    return { questionnaire: this.questionnaireId, items: this.answers as number[] };
  }
}

/** Items grouped by subscale, preserving item order (for the usability form's
 * three labelled sections; forms without subscales get one unlabelled group). */
export function groupBySubscale(def: QuestionnaireDef): Map<string, number[]> {
  const groups = new Map<string, number[]>();
  def.items.forEach((item, i) => {
    const key = item.subscale ?? "";
    if (!groups.has(key)) groups.set(key, []);
    groups.get(key)!.push(i);
  });
  return groups;
}
