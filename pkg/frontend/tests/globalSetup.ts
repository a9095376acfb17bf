import { spawn, type ChildProcess } from 'node:child_process'
import { mkdtempSync, rmSync, writeFileSync } from 'node:fs'
import { tmpdir } from 'node:os'
import { join } from 'node:path'

// Boots the real engine service once for the whole suite; tests read the
// base URL from .test-server.json.

const INFO_PATH = new URL('../.test-server.json', import.meta.url).pathname

let child: ChildProcess | undefined
let stateDir: string | undefined

async function waitForReady(baseUrl: string, timeoutMs: number): Promise<void> {
  const deadline = Date.now() + timeoutMs
  let lastError: unknown
  while (Date.now() < deadline) {
    try {
      const response = await fetch(`${baseUrl}/api/dictionary?category=identity`)
      if (response.ok) {
        return
      }
      lastError = new Error(`status ${response.status}`)
    } catch (error) {
      lastError = error
    }
    await new Promise((resolve) => setTimeout(resolve, 250))
  }
  throw new Error(`service did not come up at ${baseUrl}: ${lastError}`)
}

export default async function setup(): Promise<() => void> {
  const port = 8600 + (process.pid % 997)
  const baseUrl = `http://127.0.0.1:${port}`
  stateDir = mkdtempSync(join(tmpdir(), 'affectkit-ui-test-'))

  child = spawn('affectkit', ['serve', '--port', String(port), '--state-dir', stateDir], {
    stdio: 'ignore',
  })
  child.on('error', (error) => {
    console.error('failed to spawn affectkit serve:', error)
  })

  await waitForReady(baseUrl, 60_000)
  writeFileSync(INFO_PATH, JSON.stringify({ baseUrl }))

  return () => {
    child?.kill('SIGTERM')
    if (stateDir) {
      rmSync(stateDir, { recursive: true, force: true })
    }
    rmSync(INFO_PATH, { force: true })
  }
}
