// App entry point: instructions with comprehension check, then the task,
// then the completion screen.

import { ApiClient } from './api.js'
import { loadContent } from './content.js'
import { SessionDriver } from './session.js'
import { renderChoiceScreen, renderCompletion, renderInstructions } from './ui.js'

export async function runApp(root: HTMLElement, baseUrl = ''): Promise<void> {
  const content = await loadContent()
  await renderInstructions(root, content)

  const api = new ApiClient(baseUrl)
  const driver = new SessionDriver(api)
  await driver.start()
  const unbindKeys = renderChoiceScreen(root, driver)
  driver.onChange((view) => {
    if (view.phase === 'done') {
      unbindKeys()
      renderCompletion(root, view)
    }
  })
}

declare global {
  interface Window { __FLIGHT_UI_AUTOSTART__?: boolean }
}

if (typeof window !== 'undefined' && window.__FLIGHT_UI_AUTOSTART__ !== false) {
  const root = document.getElementById('app')
  if (root) void runApp(root)
}
