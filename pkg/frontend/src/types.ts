/** Shared view-model types mirroring the session service payloads. */

export type Direction = "outward" | "inward";

/** One frame of the breathing guide, as pushed on the event stream. */
export interface GuideFrameView {
  phase: number; // [0, 1): first half inhale, second half exhale
  br_bpm: number;
  direction: Direction;
  intensities: number[]; // per light position, petal center -> tip
}

/** One task letter as the participant sees it. */
export interface StimulusView {
  letter: string;
  seqIndex: number;
  position: number;
  onsetMs: number; // client clock
  visible: boolean;
}

export interface StageInfo {
  kind: string;
  index: number | null;
  name: string;
}

export interface SessionInfo {
  id: string;
  participant_id: string;
  condition: string;
  stages: string[];
  current_stage: string | null;
  completed: boolean;
}

export interface FeedbackEvent {
  seq_index: number;
  position: number;
  correct: boolean;
}

export interface QuestionnaireItem {
  id: string;
  text_en: string;
  text_fr: string;
  key?: string;
  subscale?: string;
}

export interface QuestionnaireDef {
  scale: [number, number];
  anchors_en: string[];
  anchors_fr: string[];
  items: QuestionnaireItem[];
}
