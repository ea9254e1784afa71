/** Payload shapes of the annotation service JSON API. */

export interface ExampleSentence {
  id: string;
  tokens: string[];
  subj_span: [number, number];
  obj_span: [number, number];
}

export interface Candidate {
  id: string;
  subj_type: string;
  obj_type: string;
  surface: string[];
  pattern: string[];
  frequency: number;
  match_count: number;
  decision: string | null;
  examples: ExampleSentence[];
}

export interface CandidatePage {
  items: Candidate[];
  next_page_token: string | null;
  total: number;
}

export interface Stats {
  total: number;
  labeled: number;
  discarded: number;
  remaining: number;
  matched: number;
  unmatched: number;
}

export interface LabelResponse {
  candidate_id: string;
  decision: string;
  stats: Stats;
}

export interface SchemaInfo {
  relations: string[];
  none: string;
}

export const DISCARD = "discard";

export type CandidateStatus = "all" | "unlabeled" | "labeled" | "discarded";
