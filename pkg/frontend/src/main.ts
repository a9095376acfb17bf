import { ApiClient, ApiError } from './api.js'
import { renderDeflectionSvg, renderTrajectorySvg } from './chart.js'
import { SessionController } from './store.js'
import type { DictionaryEntry, Side } from './types.js'

const API_BASE =
  new URLSearchParams(window.location.search).get('api') ?? 'http://127.0.0.1:8571'

const api = new ApiClient(API_BASE)
const controller = new SessionController(api)

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id)
  if (!node) {
    throw new Error(`missing element #${id}`)
  }
  return node as T
}

function fillPicker(select: HTMLSelectElement, entries: DictionaryEntry[], optional = false) {
  select.innerHTML = ''
  if (optional) {
    const none = document.createElement('option')
    none.value = ''
    none.textContent = '(none)'
    select.appendChild(none)
  }
  for (const entry of entries) {
    const option = document.createElement('option')
    option.value = entry.term
    option.textContent = entry.term
    select.appendChild(option)
  }
}

function formatEpa(values: number[]): string {
  return `(${values.map((v) => v.toFixed(2)).join(', ')})`
}

function showError(message: string) {
  const box = el<HTMLDivElement>('error')
  box.textContent = message
  box.style.display = message ? 'block' : 'none'
}

function renderState() {
  const view = controller.view
  const summary = el<HTMLDivElement>('summary')
  const chart = el<HTMLDivElement>('chart')
  const deflection = el<HTMLDivElement>('deflection-chart')
  const log = el<HTMLUListElement>('event-log')
  if (!view) {
    summary.textContent = 'No session yet.'
    chart.innerHTML = ''
    deflection.innerHTML = ''
    log.innerHTML = ''
    return
  }
  const actorLabel = view.actor.modifier
    ? `${view.actor.modifier} ${view.actor.identity}`
    : view.actor.identity
  const objectLabel = view.object.modifier
    ? `${view.object.modifier} ${view.object.identity}`
    : view.object.identity
  summary.innerHTML =
    `<strong>${actorLabel}</strong> vs <strong>${objectLabel}</strong> ` +
    `[${view.coefficients}] &mdash; actor ${formatEpa(view.transients.actor)}, ` +
    `object ${formatEpa(view.transients.object)}, state deflection ${view.deflection.toFixed(3)}`
  chart.innerHTML = renderTrajectorySvg(view)
  deflection.innerHTML = renderDeflectionSvg(view)
  log.innerHTML = ''
  for (const step of view.history) {
    const item = document.createElement('li')
    item.textContent =
      `${step.side} ${step.behavior}: actor ${formatEpa(step.actor_transient)}, ` +
      `object ${formatEpa(step.object_transient)}, deflection ${step.deflection.toFixed(3)}`
    log.appendChild(item)
  }
  el<HTMLButtonElement>('undo').disabled = view.history.length === 0
}

function renderWhatIf() {
  const panel = el<HTMLDivElement>('whatif-result')
  const pending = controller.pendingWhatIf
  if (!pending) {
    panel.innerHTML = ''
    return
  }
  const before = controller.view
  const preview = pending.preview
  const last = preview.history[preview.history.length - 1]
  const delta = before ? last.deflection - (before.history.at(-1)?.deflection ?? 0) : 0
  panel.innerHTML =
    `<p>If <em>${pending.choice.side}</em> does <em>${pending.choice.behavior_term}</em>: ` +
    `actor ${formatEpa(last.actor_transient)}, object ${formatEpa(last.object_transient)}, ` +
    `event deflection ${last.deflection.toFixed(3)} (Δ ${delta >= 0 ? '+' : ''}${delta.toFixed(3)})</p>`
}

async function refreshSuggestions(side: Side) {
  const list = el<HTMLOListElement>('suggestions')
  list.innerHTML = ''
  const response = await controller.suggest(side)
  const heading = document.createElement('li')
  heading.textContent = `optimal ${formatEpa(response.optimal)} (deflection ${response.optimal_deflection.toFixed(3)})`
  list.appendChild(heading)
  for (const neighbor of response.neighbors) {
    const item = document.createElement('li')
    item.textContent =
      `${neighbor.term} ${formatEpa(neighbor.epa)} — distance ${neighbor.distance.toFixed(3)}, ` +
      `deflection ${neighbor.deflection.toFixed(3)}`
    list.appendChild(item)
  }
}

async function boot() {
  const [identities, modifiers, behaviors] = await Promise.all([
    api.dictionary('identity'),
    api.dictionary('modifier'),
    api.dictionary('behavior'),
  ])
  fillPicker(el('actor-identity'), identities.entries)
  fillPicker(el('actor-modifier'), modifiers.entries, true)
  fillPicker(el('object-identity'), identities.entries)
  fillPicker(el('object-modifier'), modifiers.entries, true)
  fillPicker(el('behavior'), behaviors.entries)

  el<HTMLButtonElement>('create').addEventListener('click', async () => {
    showError('')
    try {
      await controller.create(
        {
          identity: el<HTMLSelectElement>('actor-identity').value,
          modifier: el<HTMLSelectElement>('actor-modifier').value || null,
        },
        {
          identity: el<HTMLSelectElement>('object-identity').value,
          modifier: el<HTMLSelectElement>('object-modifier').value || null,
        },
      )
      renderState()
      renderWhatIf()
    } catch (error) {
      showError(error instanceof ApiError ? error.message : String(error))
    }
  })

  const currentChoice = () => ({
    side: el<HTMLSelectElement>('side').value as Side,
    behavior_term: el<HTMLSelectElement>('behavior').value,
  })

  el<HTMLButtonElement>('step').addEventListener('click', async () => {
    showError('')
    try {
      await controller.step(currentChoice())
      renderState()
      renderWhatIf()
    } catch (error) {
      showError(error instanceof ApiError ? error.message : String(error))
    }
  })

  el<HTMLButtonElement>('undo').addEventListener('click', async () => {
    showError('')
    try {
      await controller.undo()
      renderState()
      renderWhatIf()
    } catch (error) {
      showError(error instanceof ApiError ? error.message : String(error))
    }
  })

  el<HTMLButtonElement>('preview').addEventListener('click', async () => {
    showError('')
    try {
      await controller.whatIf(currentChoice())
      renderWhatIf()
      await refreshSuggestions(currentChoice().side)
    } catch (error) {
      showError(error instanceof ApiError ? error.message : String(error))
    }
  })

  el<HTMLButtonElement>('commit-preview').addEventListener('click', async () => {
    showError('')
    try {
      await controller.commitWhatIf()
      renderState()
      renderWhatIf()
    } catch (error) {
      showError(error instanceof ApiError ? error.message : String(error))
    }
  })

  renderState()
}

boot().catch((error) => showError(String(error)))
