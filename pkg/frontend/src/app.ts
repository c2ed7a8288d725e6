/**
 * DOM wiring for the navigator: parameter form, branch cards with
 * satisfied/dimmed highlighting, breadcrumb, free-text question box (the
 * generated query is always displayed beside the answer), and an opt-in
 * editor mode for constraint changes behind a confirmation dialog.
 */

import { ApiClient, BranchOption, describeConstraint, ServiceError } from './api.js';
import { Session } from './session.js';

function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  className?: string,
  text?: string,
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  if (className) node.className = className;
  if (text !== undefined) node.textContent = text;
  return node;
}

export class App {
  private session: Session;
  private editorMode = false;

  constructor(
    private rootEl: HTMLElement,
    api: ApiClient = new ApiClient(),
    private confirmFn: (message: string) => boolean = (m) => window.confirm(m),
  ) {
    this.session = new Session(api);
  }

  async start(): Promise<void> {
    this.renderSkeleton();
    await this.guard(async () => {
      await this.session.reset();
      this.renderAll();
    });
  }

  private renderSkeleton(): void {
    this.rootEl.innerHTML = `
      <header>
        <h1>Guideline navigator</h1>
        <label class="editor-toggle">
          <input type="checkbox" id="editor-mode"> editor mode
        </label>
      </header>
      <section id="error-banner" class="hidden"></section>
      <section class="params">
        <h2>Patient parameters</h2>
        <form id="param-form">
          <input name="key" placeholder="parameter (e.g. stratified)" required>
          <input name="value" placeholder="value (e.g. ph+ or 30)" required>
          <button type="submit">set</button>
          <button type="button" id="clear-params">clear all</button>
        </form>
        <div id="param-list"></div>
      </section>
      <section class="path">
        <h2>Current step</h2>
        <nav id="breadcrumb"></nav>
        <article id="current-node"></article>
        <h3>Next options</h3>
        <div id="options"></div>
      </section>
      <section class="ask">
        <h2>Ask a question</h2>
        <form id="ask-form">
          <input id="question" placeholder="e.g. A ph- ALL patient aged 37 ..." size="60">
          <button type="submit" id="ask-submit" disabled>ask</button>
        </form>
        <div id="answer"></div>
      </section>
    `;
    const paramForm = this.rootEl.querySelector<HTMLFormElement>('#param-form')!;
    paramForm.addEventListener('submit', (event) => {
      event.preventDefault();
      const data = new FormData(paramForm);
      const key = String(data.get('key') ?? '').trim().toLowerCase();
      const raw = String(data.get('value') ?? '').trim();
      if (!key || !raw) return;
      const value = /^-?\d+(\.\d+)?$/.test(raw) ? Number(raw) : raw;
      void this.guard(async () => {
        await this.session.setParams({ [key]: value });
        this.renderAll();
      });
      paramForm.reset();
    });
    this.rootEl.querySelector('#clear-params')!.addEventListener('click', () => {
      void this.guard(async () => {
        await this.session.reset();
        this.renderAll();
      });
    });
    const questionInput = this.rootEl.querySelector<HTMLInputElement>('#question')!;
    const askSubmit = this.rootEl.querySelector<HTMLButtonElement>('#ask-submit')!;
    questionInput.addEventListener('input', () => {
      askSubmit.disabled = questionInput.value.trim().length === 0;
    });
    this.rootEl.querySelector<HTMLFormElement>('#ask-form')!.addEventListener('submit', (event) => {
      event.preventDefault();
      const question = questionInput.value.trim();
      if (!question) return;
      void this.guard(async () => {
        await this.session.ask(question);
        this.renderAnswer();
      });
    });
    this.rootEl.querySelector<HTMLInputElement>('#editor-mode')!.addEventListener('change', (event) => {
      this.editorMode = (event.target as HTMLInputElement).checked;
      this.renderOptions();
    });
  }

  private async guard(action: () => Promise<void>): Promise<void> {
    const banner = this.rootEl.querySelector<HTMLElement>('#error-banner')!;
    try {
      banner.classList.add('hidden');
      await action();
    } catch (error) {
      banner.classList.remove('hidden');
      if (error instanceof ServiceError) {
        banner.textContent =
          error.code === 'no_matching_guideline'
            ? 'No matching guideline for these inputs.'
            : `${error.code}: ${error.message}`;
      } else {
        banner.textContent = `Service unreachable - retry. (${String(error)})`;
      }
    }
  }

  private renderAll(): void {
    this.renderParams();
    this.renderBreadcrumb();
    this.renderCurrentNode();
    this.renderOptions();
    this.renderAnswer();
  }

  private renderParams(): void {
    const list = this.rootEl.querySelector<HTMLElement>('#param-list')!;
    list.innerHTML = '';
    for (const [key, value] of Object.entries(this.session.state.params)) {
      const chip = el('span', 'param-chip', `${key}=${value}`);
      const remove = el('button', 'chip-remove', 'x');
      remove.addEventListener('click', () => {
        void this.guard(async () => {
          await this.session.setParams({ [key]: null });
          this.renderAll();
        });
      });
      chip.appendChild(remove);
      list.appendChild(chip);
    }
  }

  private renderBreadcrumb(): void {
    const nav = this.rootEl.querySelector<HTMLElement>('#breadcrumb')!;
    nav.innerHTML = '';
    this.session.state.breadcrumb.forEach((nodeId, index) => {
      if (index > 0) nav.appendChild(el('span', 'crumb-sep', ' > '));
      const link = el('a', 'crumb', `#${nodeId}`);
      link.addEventListener('click', () => {
        void this.guard(async () => {
          await this.session.backTo(nodeId);
          this.renderAll();
        });
      });
      nav.appendChild(link);
    });
  }

  private renderCurrentNode(): void {
    const article = this.rootEl.querySelector<HTMLElement>('#current-node')!;
    article.innerHTML = '';
    const node = this.session.state.currentNode;
    if (!node) {
      article.appendChild(el('p', 'empty', 'No node loaded.'));
      return;
    }
    article.appendChild(el('h4', 'node-title', `#${node.id} [${node.label}]`));
    article.appendChild(el('p', 'node-content', node.content));
  }

  private renderOptions(): void {
    const container = this.rootEl.querySelector<HTMLElement>('#options')!;
    container.innerHTML = '';
    const options = this.session.state.options;
    if (options.length === 0) {
      container.appendChild(el('p', 'empty', 'No further steps from here.'));
      return;
    }
    for (const option of options) {
      container.appendChild(this.renderOptionCard(option));
    }
  }

  private renderOptionCard(option: BranchOption): HTMLElement {
    const card = el('div', option.satisfied ? 'option satisfied' : 'option dimmed');
    card.appendChild(el('h4', 'node-title', `#${option.id} [${option.label}]`));
    card.appendChild(el('p', 'node-content', option.content));
    const constraints = Object.entries(option.constraints);
    if (constraints.length > 0) {
      const list = el('ul', 'constraints');
      for (const [key, value] of constraints) {
        const item = el('li', option.unsatisfied_keys.includes(key) ? 'unmet' : 'met');
        item.textContent = describeConstraint(key, value);
        if (this.editorMode) {
          const edit = el('button', 'edit', 'edit');
          edit.addEventListener('click', (event) => {
            event.stopPropagation();
            this.editConstraint(option.id, key);
          });
          const drop = el('button', 'edit', 'remove');
          drop.addEventListener('click', (event) => {
            event.stopPropagation();
            this.removeConstraint(option.id, key);
          });
          item.appendChild(edit);
          item.appendChild(drop);
        }
        list.appendChild(item);
      }
      card.appendChild(list);
    }
    const follow = el('button', 'follow', 'follow this branch');
    follow.addEventListener('click', () => {
      void this.guard(async () => {
        await this.session.selectBranch(option.id);
        this.renderAll();
      });
    });
    card.appendChild(follow);
    return card;
  }

  private editConstraint(nodeId: number, key: string): void {
    const raw = window.prompt(
      `New value for ${key} on #${nodeId} as JSON, e.g.\n` +
        `{"type": "interval", "low": 15, "high": 40}`,
    );
    if (!raw) return;
    if (!this.confirmFn(`Overwrite constraint ${key} on node ${nodeId}?`)) return;
    void this.guard(async () => {
      await this.session.editConstraint(nodeId, key, JSON.parse(raw));
      this.renderAll();
    });
  }

  private removeConstraint(nodeId: number, key: string): void {
    if (!this.confirmFn(`Remove constraint ${key} from node ${nodeId}?`)) return;
    void this.guard(async () => {
      await this.session.editConstraint(nodeId, key, null);
      this.renderAll();
    });
  }

  private renderAnswer(): void {
    const container = this.rootEl.querySelector<HTMLElement>('#answer')!;
    container.innerHTML = '';
    const answer = this.session.state.lastAnswer;
    if (!answer) return;
    container.appendChild(el('p', 'answer-text', answer.answer));
    container.appendChild(el('p', 'answer-node', `from node #${answer.node_id}`));
    const query = el('pre', 'answer-query');
    query.textContent = answer.query;
    container.appendChild(query);
  }
}
