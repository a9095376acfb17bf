import type { ApiClient } from './api.js'
import type {
  EventChoice,
  PartySelection,
  SessionView,
  Side,
  SuggestResponse,
} from './types.js'

export interface WhatIfResult {
  choice: EventChoice
  preview: SessionView
}

/**
 * Client-side session state with replay-based undo.
 *
 * The controller remembers the composer selection and the committed event
 * list; undo deletes the server session and re-creates it with the prefix
 * of events, so the service stays append-only and every displayed number
 * still originates from a service response.
 */
export class SessionController {
  private api: ApiClient
  private selection: { actor: PartySelection; object: PartySelection; coefficients?: string } | null = null
  private committed: EventChoice[] = []

  view: SessionView | null = null
  pendingWhatIf: WhatIfResult | null = null

  constructor(api: ApiClient) {
    this.api = api
  }

  get events(): readonly EventChoice[] {
    return this.committed
  }

  async create(
    actor: PartySelection,
    object: PartySelection,
    coefficients?: string,
  ): Promise<SessionView> {
    this.selection = { actor, object, coefficients }
    this.committed = []
    this.pendingWhatIf = null
    this.view = await this.api.createSession(actor, object, coefficients)
    return this.view
  }

  private requireSession(): SessionView {
    if (!this.view) {
      throw new Error('no live session; create one first')
    }
    return this.view
  }

  async step(choice: EventChoice): Promise<SessionView> {
    const current = this.requireSession()
    this.view = await this.api.postEvent(current.id, choice)
    this.committed.push(choice)
    this.pendingWhatIf = null
    return this.view
  }

  /** Re-create the session and replay all but the last committed event. */
  async undo(): Promise<SessionView> {
    const current = this.requireSession()
    if (!this.selection || this.committed.length === 0) {
      return current
    }
    const replay = this.committed.slice(0, -1)
    await this.api.deleteSession(current.id)
    let view = await this.api.createSession(
      this.selection.actor,
      this.selection.object,
      this.selection.coefficients,
    )
    for (const choice of replay) {
      view = await this.api.postEvent(view.id, choice)
    }
    this.committed = replay
    this.pendingWhatIf = null
    this.view = view
    return view
  }

  async whatIf(choice: EventChoice): Promise<WhatIfResult> {
    const current = this.requireSession()
    const preview = await this.api.preview(current.id, choice)
    this.pendingWhatIf = { choice, preview }
    return this.pendingWhatIf
  }

  /** Commit the previewed behavior through the normal stepping path. */
  async commitWhatIf(): Promise<SessionView> {
    if (!this.pendingWhatIf) {
      throw new Error('nothing previewed')
    }
    return this.step(this.pendingWhatIf.choice)
  }

  cancelWhatIf(): void {
    this.pendingWhatIf = null
  }

  async suggest(side: Side, k = 5): Promise<SuggestResponse> {
    const current = this.requireSession()
    return this.api.suggest(current.id, side, k)
  }

  async refresh(): Promise<SessionView> {
    const current = this.requireSession()
    this.view = await this.api.getSession(current.id)
    return this.view
  }
}
