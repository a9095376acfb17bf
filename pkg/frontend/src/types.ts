// Mirrors of the service's JSON bodies. The UI never computes EPA dynamics
// itself; every number rendered comes from one of these responses.

export type Side = 'actor' | 'object'

export type Epa = [number, number, number]

export interface PartySelection {
  identity: string
  modifier?: string | null
}

export interface DictionaryEntry {
  term: string
  category: string
  epa: Epa
}

export interface HistoryStep {
  index: number
  side: Side
  behavior: string
  behavior_epa: Epa
  behavior_transient: Epa
  actor_transient: Epa
  object_transient: Epa
  deflection: number
}

export interface PartyPair<T> {
  actor: T
  object: T
}

export interface SessionView {
  id: string
  actor: PartySelection
  object: PartySelection
  coefficients: string
  fundamentals: PartyPair<Epa>
  transients: PartyPair<Epa>
  deflection: number
  history: HistoryStep[]
  created: number
  updated: number
}

export interface EventChoice {
  side: Side
  behavior_term: string
}

export interface SuggestNeighbor {
  term: string
  epa: Epa
  distance: number
  deflection: number
}

export interface SuggestResponse {
  side: Side
  optimal: Epa
  optimal_deflection: number
  neighbors: SuggestNeighbor[]
}

export interface EstimateResponse {
  term: string
  category: string
  n_events: number
  mean: Epa
  sd: Epa
  min: Epa
  max: Epa
  model_id: string
}

export interface ApiErrorBody {
  code: string
  message: string
}
