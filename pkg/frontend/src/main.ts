import { ApiClient } from './api';
import { DraftStore } from './drafts';
import { JobTracker, ackChips, phaseBars } from './tracker';
import type { TrackedJob } from './tracker';
import type { RegionSelection } from './types';
import { WorldMap } from './worldmap';

export interface AppOptions {
  apiBaseUrl?: string;
  defaultTargets?: string[];
  defaultSource?: string;
}

/**
 * Assemble the console: world map on top, draft pop-ups and job cards
 * below. Everything displayed is fetched from the orchestrator API.
 */
export function mountApp(root: HTMLElement, options: AppOptions = {}): {
  map: WorldMap;
  drafts: DraftStore;
  tracker: JobTracker;
} {
  const api = new ApiClient(options.apiBaseUrl ?? '');
  const drafts = new DraftStore(api, {
    targets: options.defaultTargets ?? [],
    source: options.defaultSource ?? 'fixture',
  });
  const tracker = new JobTracker(api);

  root.innerHTML = `
    <header><h1>sensedeploy console</h1>
      <p class="hint">drag to select a region; shift-drag pans; scroll zooms</p>
    </header>
    <div class="map-host"></div>
    <section class="drafts"></section>
    <button class="submit-all" disabled>Deploy selected regions</button>
    <section class="jobs"></section>
  `;

  const mapHost = root.querySelector<HTMLElement>('.map-host')!;
  const draftsHost = root.querySelector<HTMLElement>('.drafts')!;
  const jobsHost = root.querySelector<HTMLElement>('.jobs')!;
  const submitButton = root.querySelector<HTMLButtonElement>('.submit-all')!;

  const map = new WorldMap(mapHost, {
    onRegionDrawn: (bbox) => void drafts.addFromBBox(bbox),
  });

  function renderDrafts(list: RegionSelection[]): void {
    draftsHost.innerHTML = '';
    for (const draft of list) {
      const card = document.createElement('div');
      card.className = 'draft-card';
      card.dataset.draftId = String(draft.id);
      const availableText =
        draft.previewError !== null
          ? `<span class="banner error">preview unavailable
               <button class="retry">retry</button></span>`
          : draft.available === null
            ? '<em>counting sensors…</em>'
            : `<strong class="available">${draft.available}</strong> sensors available`;
      card.innerHTML = `
        <h3>Region ${draft.id}</h3>
        <p class="bbox">lon ${draft.bbox.min_lon.toFixed(2)}…${draft.bbox.max_lon.toFixed(2)},
           lat ${draft.bbox.min_lat.toFixed(2)}…${draft.bbox.max_lat.toFixed(2)}</p>
        <p class="preview">${availableText}</p>
        <label>sensors <input class="requested" type="number" min="1"
          value="${draft.requested}"></label>
        <label>targets <input class="targets" type="text"
          value="${draft.targets.join(',')}" placeholder="http://device:port,…"></label>
        <label>selector <select class="selector">
          <option value="topsis"${draft.selector === 'topsis' ? ' selected' : ''}>best trade-off</option>
          <option value="random"${draft.selector === 'random' ? ' selected' : ''}>random</option>
        </select></label>
        <span class="validation"></span>
        <button class="remove">remove</button>
      `;
      card.querySelector<HTMLInputElement>('.requested')!.addEventListener('change', (e) => {
        drafts.update(draft.id, { requested: Number((e.target as HTMLInputElement).value) });
      });
      card.querySelector<HTMLInputElement>('.targets')!.addEventListener('change', (e) => {
        const raw = (e.target as HTMLInputElement).value;
        drafts.update(draft.id, {
          targets: raw.split(',').map((t) => t.trim()).filter(Boolean),
        });
      });
      card.querySelector<HTMLSelectElement>('.selector')!.addEventListener('change', (e) => {
        drafts.setSelector(draft.id, (e.target as HTMLSelectElement).value as 'topsis' | 'random');
      });
      card.querySelector<HTMLButtonElement>('.remove')!.addEventListener('click', () => {
        drafts.remove(draft.id);
      });
      card.querySelector<HTMLButtonElement>('.retry')?.addEventListener('click', () => {
        void drafts.refreshPreview(draft.id);
      });
      const problem = drafts.validate(draft.id);
      const validation = card.querySelector<HTMLElement>('.validation')!;
      validation.textContent = problem ?? '';
      validation.className = problem ? 'validation error' : 'validation';
      draftsHost.appendChild(card);
    }
    submitButton.disabled = list.length === 0;
  }

  function renderJob(job: TrackedJob): void {
    let card = jobsHost.querySelector<HTMLElement>(`[data-job="${job.jobId}"]`);
    if (!card) {
      card = document.createElement('div');
      card.className = 'job-card';
      card.dataset.job = job.jobId;
      jobsHost.appendChild(card);
    }
    if (!job.view) {
      card.innerHTML = `<h3>${job.jobId}</h3><p class="state">submitted…</p>`;
      return;
    }
    const bars = phaseBars(job.view)
      .map(
        (bar) => `
        <div class="phase-row" data-phase="${bar.phase}">
          <span class="phase-name">${bar.phase}</span>
          <div class="bar"><div class="fill" style="width:${(bar.fraction * 100).toFixed(1)}%"></div></div>
          <span class="ms">${bar.ms.toFixed(0)} ms</span>
        </div>`,
      )
      .join('');
    const chips = ackChips(job.view)
      .map(
        (chip) =>
          `<span class="ack-chip ${chip.kind}" data-device="${chip.device}">${chip.device}: ${chip.status}</span>`,
      )
      .join('');
    card.innerHTML = `
      <h3>${job.jobId}</h3>
      <p class="state ${job.view.state}">${job.view.state}${job.view.error ? ` — ${job.view.error}` : ''}</p>
      <div class="phases">${bars}</div>
      <div class="acks">${chips}</div>
      ${job.pollError ? `<p class="banner error">${job.pollError}</p>` : ''}
    `;
  }

  drafts.onChange = renderDrafts;
  tracker.onUpdate = renderJob;

  submitButton.addEventListener('click', () => {
    void tracker
      .submitAndTrack(drafts.list(), (id) => drafts.validate(id))
      .then(({ rejected }) => {
        for (const [draftId, message] of rejected) {
          const card = draftsHost.querySelector<HTMLElement>(
            `[data-draft-id="${draftId}"] .validation`,
          );
          if (card) {
            card.textContent = message;
            card.className = 'validation error';
          }
        }
      });
  });

  return { map, drafts, tracker };
}
