import type { ApiClient } from './api';
import type { BBox, RegionSelection, SelectorKind } from './types';

/**
 * Holds the drawn-but-not-yet-submitted region selections. Each drawn
 * rectangle becomes an independent draft (multi-region selection); the
 * available count comes from the preview endpoint and nothing in here
 * computes anything the server already knows.
 */
export class DraftStore {
  private drafts = new Map<number, RegionSelection>();
  private nextId = 1;
  onChange: (drafts: RegionSelection[]) => void = () => {};

  constructor(
    private readonly api: ApiClient,
    private readonly defaults: { targets: string[]; source: string } = {
      targets: [],
      source: 'fixture',
    },
  ) {}

  list(): RegionSelection[] {
    return [...this.drafts.values()];
  }

  get(id: number): RegionSelection | undefined {
    return this.drafts.get(id);
  }

  /** Register a drawn rectangle and query its available-sensor count. */
  async addFromBBox(bbox: BBox): Promise<RegionSelection> {
    const draft: RegionSelection = {
      id: this.nextId++,
      bbox,
      available: null,
      requested: 1,
      perDeviceLimit: null,
      targets: [...this.defaults.targets],
      selector: 'topsis',
      source: this.defaults.source,
      previewError: null,
    };
    this.drafts.set(draft.id, draft);
    this.emit();
    await this.refreshPreview(draft.id);
    return this.drafts.get(draft.id)!;
  }

  /** (Re)load the available count; failures are retryable, not fatal. */
  async refreshPreview(id: number): Promise<void> {
    const draft = this.drafts.get(id);
    if (!draft) return;
    try {
      const preview = await this.api.previewSensors(draft.bbox, draft.source, 1);
      this.update(id, { available: preview.count, previewError: null });
    } catch (error) {
      this.update(id, { previewError: String(error) });
    }
  }

  update(id: number, patch: Partial<RegionSelection>): RegionSelection {
    const draft = this.drafts.get(id);
    if (!draft) throw new Error(`no draft ${id}`);
    const updated = { ...draft, ...patch, id };
    this.drafts.set(id, updated);
    this.emit();
    return updated;
  }

  setSelector(id: number, selector: SelectorKind): void {
    this.update(id, { selector });
  }

  remove(id: number): void {
    this.drafts.delete(id);
    this.emit();
  }

  /**
   * Client-side submission check (the server re-validates): a draft is
   * submittable when its preview arrived, the request fits availability,
   * and at least one target device is configured.
   */
  validate(id: number): string | null {
    const draft = this.drafts.get(id);
    if (!draft) return `no draft ${id}`;
    if (draft.previewError !== null) return 'preview unavailable; retry';
    if (draft.available === null) return 'preview still loading';
    if (draft.requested < 1) return 'requested count must be >= 1';
    if (draft.requested > draft.available) {
      return `requested ${draft.requested} > available ${draft.available}`;
    }
    if (draft.targets.length === 0) return 'select at least one target device';
    return null;
  }

  private emit(): void {
    this.onChange(this.list());
  }
}
