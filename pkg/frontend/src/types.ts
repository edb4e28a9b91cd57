/** Shared wire and UI types. Wire shapes mirror the orchestrator API. */

export interface BBox {
  min_lon: number;
  max_lon: number;
  min_lat: number;
  max_lat: number;
}

export interface CriterionSpec {
  name: string;
  direction: 'max' | 'min';
}

export type SelectorKind = 'topsis' | 'random';

/** One drawn rectangle plus its deployment configuration. */
export interface RegionSelection {
  id: number;
  bbox: BBox;
  /** Sensor count reported by the preview endpoint; null while loading. */
  available: number | null;
  requested: number;
  perDeviceLimit: number | null;
  targets: string[];
  selector: SelectorKind;
  source: string;
  /** Set when the preview call failed; the UI shows a retry banner. */
  previewError: string | null;
}

export interface JobRequest {
  region: BBox;
  count: number;
  targets: string[];
  selector: SelectorKind;
  source: string;
  seed?: number;
  per_device_limit?: number | null;
}

export interface PhaseTimings {
  unmarshal_ms: number | null;
  select_ms: number | null;
  marshal_ms: number | null;
  deploy_ms: number | null;
  setup_ms: number | null;
}

export type JobState =
  | 'created'
  | 'fetching'
  | 'selecting'
  | 'marshaling'
  | 'deploying'
  | 'complete'
  | 'failed';

export interface JobView {
  id: string;
  state: JobState;
  timings: PhaseTimings;
  acks: Record<string, string>;
  descriptor_count: number;
  error: string | null;
}

export interface PreviewResponse {
  count: number;
  sensors: unknown[];
}

export const TERMINAL_STATES: ReadonlySet<JobState> = new Set(['complete', 'failed']);
