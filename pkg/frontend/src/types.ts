/** Payload types mirroring the annotation service's JSON API. */

export type Daytime = "Day" | "Night" | "Twilight";
export type PrecipitationKind = "None" | "Rain" | "Snow";
export type Intensity = "Light" | "Heavy";
export type Fog = "None" | "LightFog" | "DenseFog";
export type SurfaceCondition = "Dry" | "Wet" | "PartialSnow" | "FullSnow";
export type Infrastructure = "Urban" | "Suburban" | "Highway" | "Rural";
export type Source = "Auto" | "Human" | "Unset";

export type Category =
  | "daytime"
  | "precipitation"
  | "fog"
  | "road"
  | "roadside"
  | "infrastructure";

export const CATEGORIES: Category[] = [
  "daytime",
  "precipitation",
  "fog",
  "road",
  "roadside",
  "infrastructure",
];

/** Record field names the editor reads and writes. */
export type ValueField =
  | "daytime"
  | "precipitation_kind"
  | "precipitation_intensity"
  | "fog"
  | "road"
  | "roadside"
  | "infrastructure";

export const FIELD_VALUES: Record<ValueField, string[]> = {
  daytime: ["Day", "Night", "Twilight"],
  precipitation_kind: ["None", "Rain", "Snow"],
  precipitation_intensity: ["Light", "Heavy"],
  fog: ["None", "LightFog", "DenseFog"],
  road: ["Dry", "Wet", "PartialSnow", "FullSnow"],
  roadside: ["Dry", "Wet", "PartialSnow", "FullSnow"],
  infrastructure: ["Urban", "Suburban", "Highway", "Rural"],
};

export const FIELD_LABELS: Record<ValueField, string> = {
  daytime: "Daytime",
  precipitation_kind: "Precipitation",
  precipitation_intensity: "Intensity",
  fog: "Fog",
  road: "Road condition",
  roadside: "Roadside condition",
  infrastructure: "Infrastructure",
};

export interface AnnotationRecord {
  frame_id: string;
  daytime: Daytime | null;
  precipitation_kind: PrecipitationKind | null;
  precipitation_intensity: Intensity | null;
  fog: Fog | null;
  road: SurfaceCondition | null;
  roadside: SurfaceCondition | null;
  infrastructure: Infrastructure | null;
  provenance: Record<Category, Source>;
  clutter_fraction: number | null;
  updated_at: string;
}

/** Sparse PUT body: present = human decision, null = clear, absent = keep. */
export type AnnotationUpdate = Partial<Record<ValueField, string | null>>;

export interface AutoSuggestion {
  intensity: Intensity;
  clutter_fraction: number;
  diagnostics: string[];
}

export type FrameStatus = "unlabeled" | "draft" | "complete";

export interface FrameSummary {
  frame_id: string;
  image_url: string;
  status: FrameStatus;
}

export interface FramePage {
  total: number;
  offset: number;
  limit: number;
  frames: FrameSummary[];
}

export interface FrameDetail {
  frame_id: string;
  image_url: string;
  annotation: AnnotationRecord | null;
  auto_suggestion: AutoSuggestion | null;
  status: FrameStatus;
}

export interface ViolationItem {
  category: string;
  message: string;
}

export interface Histogram {
  n_final: number;
  counts: Record<string, Record<string, number>>;
}
