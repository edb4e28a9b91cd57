import { describe, expect, it } from 'vitest';

import { ApiClient } from '../src/api';
import { JobTracker, ackChips, phaseBars } from '../src/tracker';
import type { JobView, RegionSelection } from '../src/types';

const EUROPE = { min_lon: -30, max_lon: 30, min_lat: 40, max_lat: 80 };

function draft(partial: Partial<RegionSelection> = {}): RegionSelection {
  return {
    id: 1,
    bbox: EUROPE,
    available: 5184,
    requested: 130,
    perDeviceLimit: null,
    targets: ['http://127.0.0.1:9101'],
    selector: 'topsis',
    source: 'fixture',
    previewError: null,
    ...partial,
  };
}

/**
 * Scripted orchestrator stand-in implementing the API contract: preview
 * returns the Europe fixture count; a created job walks through the phase
 * states and terminates per the configured script.
 */
class FakeOrchestrator {
  polls = 0;
  jobsCreated: unknown[] = [];

  constructor(
    private readonly script: JobView[],
    private readonly available = 5184,
  ) {}

  fetch = async (url: string, init?: RequestInit): Promise<Response> => {
    const path = url.replace(/^https?:\/\/[^/]+/, '');
    if (path.startsWith('/regions/sensors')) {
      return this.json({ count: this.available, sensors: [] });
    }
    if (path === '/jobs' && init?.method === 'POST') {
      const body = JSON.parse(String(init.body));
      if (body.count > this.available) {
        return this.json({ detail: { count: `requested ${body.count} > available ${this.available}` } }, 400);
      }
      this.jobsCreated.push(body);
      return this.json({ id: 'job-europe-1' }, 201);
    }
    if (path.startsWith('/jobs/')) {
      const view = this.script[Math.min(this.polls, this.script.length - 1)];
      this.polls += 1;
      return this.json(view);
    }
    return this.json({ detail: 'not found' }, 404);
  };

  private json(body: unknown, status = 200): Response {
    return new Response(JSON.stringify(body), { status });
  }
}

function view(state: JobView['state'], partial: Partial<JobView> = {}): JobView {
  return {
    id: 'job-europe-1',
    state,
    timings: {
      unmarshal_ms: null,
      select_ms: null,
      marshal_ms: null,
      deploy_ms: null,
      setup_ms: null,
    },
    acks: { 'http://127.0.0.1:9101': 'pending' },
    descriptor_count: 0,
    error: null,
    ...partial,
  };
}

const COMPLETE = view('complete', {
  timings: {
    unmarshal_ms: 231.4,
    select_ms: 7.2,
    marshal_ms: 14.9,
    deploy_ms: 52.8,
    setup_ms: 306.3,
  },
  acks: { 'http://127.0.0.1:9101': 'ok' },
  descriptor_count: 130,
});

describe('JobTracker: scripted Europe flow', () => {
  it('submits a 130-sensor job and polls it to complete', async () => {
    const fake = new FakeOrchestrator([view('fetching'), view('deploying'), COMPLETE]);
    const api = new ApiClient('', fake.fetch);
    const tracker = new JobTracker(api, async () => {});
    const updates: string[] = [];
    tracker.onUpdate = (job) => updates.push(job.view?.state ?? '?');

    const { finals, rejected } = await tracker.submitAndTrack([draft()], () => null);

    expect(rejected.size).toBe(0);
    expect(finals).toHaveLength(1);
    const final = finals[0];
    expect(final.state).toBe('complete');
    // four populated phase timings
    for (const phase of ['unmarshal_ms', 'select_ms', 'marshal_ms', 'deploy_ms'] as const) {
      expect(final.timings[phase]).not.toBeNull();
    }
    // ok ACK chip
    expect(ackChips(final)).toEqual([
      { device: 'http://127.0.0.1:9101', status: 'ok', kind: 'ok' },
    ]);
    expect(updates).toContain('fetching');
    expect(updates[updates.length - 1]).toBe('complete');
    expect(fake.jobsCreated).toHaveLength(1);
    expect((fake.jobsCreated[0] as any).count).toBe(130);
  });

  it('requested above available is rejected with no job created', async () => {
    const fake = new FakeOrchestrator([COMPLETE]);
    const api = new ApiClient('', fake.fetch);
    const tracker = new JobTracker(api, async () => {});
    const tooMany = draft({ requested: 9000 });

    // client-side validation catches it first
    const clientSide = await tracker.submit([tooMany], () =>
      'requested 9000 > available 5184',
    );
    expect(clientSide.submitted).toHaveLength(0);
    expect(clientSide.rejected.get(1)).toMatch(/9000/);

    // and the server rejects it even if the client check is bypassed
    const serverSide = await tracker.submit([tooMany], () => null);
    expect(serverSide.submitted).toHaveLength(0);
    expect(serverSide.rejected.get(1)).toMatch(/available 5184/);
    expect(fake.jobsCreated).toHaveLength(0);
  });

  it('dead device surfaces as a failed ack chip and failed job', async () => {
    const failed = view('failed', {
      acks: {
        'http://127.0.0.1:9101': 'ok',
        'http://127.0.0.1:9999': 'failed(timeout)',
      },
      error: 'deploy: devices did not acknowledge',
    });
    const fake = new FakeOrchestrator([view('deploying'), failed]);
    const api = new ApiClient('', fake.fetch);
    const tracker = new JobTracker(api, async () => {});
    const { finals } = await tracker.submitAndTrack(
      [draft({ targets: ['http://127.0.0.1:9101', 'http://127.0.0.1:9999'] })],
      () => null,
    );
    expect(finals[0].state).toBe('failed');
    const chips = ackChips(finals[0]);
    expect(chips.find((c) => c.device.endsWith('9999'))!.kind).toBe('failed');
    expect(chips.find((c) => c.device.endsWith('9101'))!.kind).toBe('ok');
  });

  it('poll errors are reported and polling continues', async () => {
    let calls = 0;
    const api = new ApiClient('', async (url: string, init?: RequestInit) => {
      const path = url.replace(/^https?:\/\/[^/]+/, '');
      if (path === '/jobs' && init?.method === 'POST') {
        return new Response(JSON.stringify({ id: 'j1' }), { status: 201 });
      }
      calls += 1;
      if (calls === 1) throw new Error('socket hang up');
      return new Response(JSON.stringify(COMPLETE), { status: 200 });
    });
    const tracker = new JobTracker(api, async () => {});
    const errors: string[] = [];
    tracker.onUpdate = (job) => {
      if (job.pollError) errors.push(job.pollError);
    };
    const { finals } = await tracker.submitAndTrack([draft()], () => null);
    expect(finals[0].state).toBe('complete');
    expect(errors.some((e) => e.includes('socket hang up'))).toBe(true);
  });
});

describe('phaseBars', () => {
  it('scales bars to the longest phase', () => {
    const bars = phaseBars(COMPLETE);
    expect(bars.map((b) => b.phase)).toEqual(['unmarshal', 'select', 'marshal', 'deploy']);
    const unmarshal = bars[0];
    expect(unmarshal.fraction).toBe(1);
    expect(bars[3].fraction).toBeCloseTo(52.8 / 231.4);
  });

  it('treats missing timings as zero-width', () => {
    const bars = phaseBars(view('fetching'));
    expect(bars.every((b) => b.fraction === 0)).toBe(true);
  });
});
