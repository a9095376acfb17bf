import { readFileSync } from 'node:fs'

import { ApiClient } from '../src/api.js'

export function apiBase(): string {
  const info = JSON.parse(
    readFileSync(new URL('../.test-server.json', import.meta.url), 'utf-8'),
  )
  return info.baseUrl as string
}

export function client(): ApiClient {
  return new ApiClient(apiBase())
}

export const DEMO_EVENTS = [
  { side: 'actor', behavior_term: 'greet' },
  { side: 'object', behavior_term: 'ask' },
  { side: 'actor', behavior_term: 'reply to' },
  { side: 'object', behavior_term: 'argue with' },
  { side: 'actor', behavior_term: 'listen to' },
] as const
