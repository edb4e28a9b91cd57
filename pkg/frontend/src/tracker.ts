import type { ApiClient } from './api';
import type { JobView, RegionSelection } from './types';
import { TERMINAL_STATES } from './types';

export interface TrackedJob {
  jobId: string;
  draftId: number;
  view: JobView | null;
  /** Poll error text, cleared on the next successful poll. */
  pollError: string | null;
  done: boolean;
}

export interface SubmitResult {
  submitted: TrackedJob[];
  /** draftId -> validation or server rejection message. */
  rejected: Map<number, string>;
}

const POLL_INTERVAL_MS = 1000;

export type Sleeper = (ms: number) => Promise<void>;

const realSleep: Sleeper = (ms) => new Promise((resolve) => setTimeout(resolve, ms));

/**
 * Submits drafts as jobs and polls each until terminal, pushing every
 * status snapshot to `onUpdate`. All ranking and deployment state lives
 * server-side; this class only relays it.
 */
export class JobTracker {
  readonly jobs: TrackedJob[] = [];
  onUpdate: (job: TrackedJob) => void = () => {};

  constructor(
    private readonly api: ApiClient,
    private readonly sleep: Sleeper = realSleep,
  ) {}

  async submit(
    drafts: RegionSelection[],
    validate: (id: number) => string | null,
  ): Promise<SubmitResult> {
    const submitted: TrackedJob[] = [];
    const rejected = new Map<number, string>();
    for (const draft of drafts) {
      const problem = validate(draft.id);
      if (problem !== null) {
        rejected.set(draft.id, problem);
        continue;
      }
      try {
        const { id } = await this.api.createJob({
          region: draft.bbox,
          count: draft.requested,
          targets: draft.targets,
          selector: draft.selector,
          source: draft.source,
          per_device_limit: draft.perDeviceLimit,
        });
        const job: TrackedJob = {
          jobId: id,
          draftId: draft.id,
          view: null,
          pollError: null,
          done: false,
        };
        this.jobs.push(job);
        submitted.push(job);
      } catch (error) {
        rejected.set(draft.id, String(error));
      }
    }
    return { submitted, rejected };
  }

  /** Poll one job to a terminal state; resolves with the final view. */
  async track(job: TrackedJob): Promise<JobView> {
    for (;;) {
      try {
        const view = await this.api.getJob(job.jobId);
        job.view = view;
        job.pollError = null;
        if (TERMINAL_STATES.has(view.state)) {
          job.done = true;
          this.onUpdate(job);
          return view;
        }
        this.onUpdate(job);
      } catch (error) {
        job.pollError = String(error);
        this.onUpdate(job);
      }
      await this.sleep(POLL_INTERVAL_MS);
    }
  }

  async submitAndTrack(
    drafts: RegionSelection[],
    validate: (id: number) => string | null,
  ): Promise<{ finals: JobView[]; rejected: Map<number, string> }> {
    const { submitted, rejected } = await this.submit(drafts, validate);
    const finals = await Promise.all(submitted.map((job) => this.track(job)));
    return { finals, rejected };
  }
}

/** Per-phase progress-bar fractions for a job card, longest phase = 1. */
export function phaseBars(view: JobView): Array<{ phase: string; ms: number; fraction: number }> {
  const phases: Array<[string, number | null]> = [
    ['unmarshal', view.timings.unmarshal_ms],
    ['select', view.timings.select_ms],
    ['marshal', view.timings.marshal_ms],
    ['deploy', view.timings.deploy_ms],
  ];
  const known = phases.map(([, ms]) => ms ?? 0);
  const longest = Math.max(...known, 1e-9);
  return phases.map(([phase, ms]) => ({
    phase,
    ms: ms ?? 0,
    fraction: (ms ?? 0) / longest,
  }));
}

/** Ack chip model: label plus a css-friendly status class. */
export function ackChips(view: JobView): Array<{ device: string; status: string; kind: string }> {
  return Object.entries(view.acks).map(([device, status]) => ({
    device,
    status,
    kind: status === 'ok' ? 'ok' : status === 'pending' ? 'pending' : 'failed',
  }));
}
