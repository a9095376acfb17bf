import type {
  ApiErrorBody,
  DictionaryEntry,
  EstimateResponse,
  EventChoice,
  PartySelection,
  SessionView,
  Side,
  SuggestResponse,
} from './types.js'

export class ApiError extends Error {
  readonly code: string
  readonly status: number

  constructor(status: number, body: ApiErrorBody) {
    super(body.message)
    this.code = body.code
    this.status = status
  }
}

async function parseError(response: Response): Promise<ApiError> {
  let body: ApiErrorBody = { code: 'unknown', message: response.statusText }
  try {
    const raw = await response.json()
    if (raw && typeof raw.message === 'string') {
      body = { code: raw.code ?? 'unknown', message: raw.message }
    } else if (raw && raw.detail) {
      body = { code: 'validation', message: JSON.stringify(raw.detail) }
    }
  } catch {
    // non-JSON error body; keep the status text
  }
  return new ApiError(response.status, body)
}

export class ApiClient {
  constructor(readonly baseUrl: string) {}

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    const response = await fetch(`${this.baseUrl}${path}`, {
      headers: { 'content-type': 'application/json' },
      ...init,
    })
    if (!response.ok) {
      throw await parseError(response)
    }
    return (await response.json()) as T
  }

  dictionary(category?: string): Promise<{ entries: DictionaryEntry[] }> {
    const query = category ? `?category=${encodeURIComponent(category)}` : ''
    return this.request(`/api/dictionary${query}`)
  }

  createSession(
    actor: PartySelection,
    object: PartySelection,
    coefficients?: string,
  ): Promise<SessionView> {
    return this.request('/api/sessions', {
      method: 'POST',
      body: JSON.stringify({ actor, object, coefficients }),
    })
  }

  getSession(id: string): Promise<SessionView> {
    return this.request(`/api/sessions/${id}`)
  }

  postEvent(id: string, choice: EventChoice): Promise<SessionView> {
    return this.request(`/api/sessions/${id}/events`, {
      method: 'POST',
      body: JSON.stringify(choice),
    })
  }

  preview(id: string, choice: EventChoice): Promise<SessionView> {
    return this.request(`/api/sessions/${id}/preview`, {
      method: 'POST',
      body: JSON.stringify(choice),
    })
  }

  suggest(id: string, side: Side, k = 5): Promise<SuggestResponse> {
    return this.request(`/api/sessions/${id}/suggest`, {
      method: 'POST',
      body: JSON.stringify({ side, k }),
    })
  }

  estimate(term: string, category: string, n = 300, seed = 0): Promise<EstimateResponse> {
    return this.request('/api/estimate', {
      method: 'POST',
      body: JSON.stringify({ term, category, n, seed }),
    })
  }

  deleteSession(id: string): Promise<{ deleted: string }> {
    return this.request(`/api/sessions/${id}`, { method: 'DELETE' })
  }
}
