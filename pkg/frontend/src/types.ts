export type BoundingBox = [number, number, number, number]; // x1, y1, x2, y2

export interface WordTiming {
  word: string;
  t0: number;
  t1: number;
}

export interface Transcription {
  text: string;
  language: string;
  words: WordTiming[];
}

export type CandidateStatus = "pending" | "accepted" | "discarded";

export interface Candidate {
  candidate_id: string;
  video_id: string;
  scene_index: number;
  track_id: number;
  start_frame: number;
  end_frame: number;
  per_frame_bboxes: BoundingBox[];
  transcription: Transcription;
  status: CandidateStatus;
  edited_text: string | null;
  transcription_failed: boolean;
  fps: number;
  frame_width: number | null;
  frame_height: number | null;
  start_seconds: number;
  end_seconds: number;
  media_url: string;
}

export interface CandidatePage {
  candidates: Candidate[];
  next_cursor: string | null;
}

export interface Neighbors {
  prev: string | null;
  next: string | null;
}

export interface DecisionReply {
  candidate_id: string;
  status: CandidateStatus;
}
