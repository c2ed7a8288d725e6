/**
 * Session state for one navigation tab: accumulated patient parameters, the
 * current node, the breadcrumb of visited nodes, and the last answer.
 *
 * The breadcrumb only ever grows through branches the service reported for
 * the current node, so every hop is a real relationship. Clearing parameters
 * resets to the flowchart root.
 */

import {
  ApiClient,
  AskResponse,
  BranchOption,
  ConstraintValueJson,
  NodePayload,
  Params,
  ParamValue,
} from './api.js';

export interface SessionState {
  params: Params;
  currentNode: NodePayload | null;
  breadcrumb: number[];
  options: BranchOption[];
  lastAnswer: AskResponse | null;
}

export class Session {
  state: SessionState = {
    params: {},
    currentNode: null,
    breadcrumb: [],
    options: [],
    lastAnswer: null,
  };

  constructor(private api: ApiClient) {}

  /** Start over at the flowchart root with no parameters. */
  async reset(): Promise<SessionState> {
    const { node_id } = await this.api.root();
    this.state = {
      params: {},
      currentNode: null,
      breadcrumb: [],
      options: [],
      lastAnswer: this.state.lastAnswer,
    };
    if (node_id !== null) {
      const step = await this.api.step(node_id, {});
      this.state.currentNode = step.node;
      this.state.breadcrumb = [step.node.id];
      this.state.options = step.options;
    }
    return this.state;
  }

  /** Merge a parameter delta and recompute branch highlighting in place. */
  async setParams(delta: Record<string, ParamValue | null>): Promise<SessionState> {
    const params: Params = { ...this.state.params };
    for (const [key, value] of Object.entries(delta)) {
      if (value === null || value === '') {
        delete params[key];
      } else {
        params[key] = value;
      }
    }
    this.state.params = params;
    if (Object.keys(params).length === 0) {
      return this.reset();
    }
    const nodeId = this.state.currentNode?.id ?? null;
    const step = await this.api.step(nodeId, params);
    this.state.currentNode = step.node;
    if (this.state.breadcrumb.length === 0) {
      this.state.breadcrumb = [step.node.id];
    }
    this.state.options = step.options;
    return this.state;
  }

  /** Follow one outgoing branch; only service-reported options are legal. */
  async selectBranch(nodeId: number): Promise<SessionState> {
    if (!this.state.options.some((option) => option.id === nodeId)) {
      throw new Error(`node ${nodeId} is not a branch of the current node`);
    }
    const step = await this.api.step(nodeId, this.state.params);
    this.state.currentNode = step.node;
    this.state.breadcrumb = [...this.state.breadcrumb, step.node.id];
    this.state.options = step.options;
    return this.state;
  }

  /** Jump back to a node already on the breadcrumb. */
  async backTo(nodeId: number): Promise<SessionState> {
    const index = this.state.breadcrumb.indexOf(nodeId);
    if (index < 0) {
      throw new Error(`node ${nodeId} is not on the breadcrumb`);
    }
    const step = await this.api.step(nodeId, this.state.params);
    this.state.currentNode = step.node;
    this.state.breadcrumb = this.state.breadcrumb.slice(0, index + 1);
    this.state.options = step.options;
    return this.state;
  }

  /** Free-text question; the service's answer and generated query are stored
   * verbatim, never post-processed. */
  async ask(question: string): Promise<AskResponse> {
    const answer = await this.api.ask(question);
    this.state.lastAnswer = answer;
    return answer;
  }

  /** Editor-mode constraint change; the branch view is refreshed from the
   * service afterwards so highlighting always reflects stored state. */
  async editConstraint(
    nodeId: number,
    key: string,
    value: ConstraintValueJson | null,
  ): Promise<SessionState> {
    if (value === null) {
      await this.api.removeConstraint(nodeId, key);
    } else {
      await this.api.setConstraint(nodeId, key, value);
    }
    const current = this.state.currentNode?.id ?? null;
    if (current !== null) {
      const step = await this.api.step(current, this.state.params);
      this.state.currentNode = step.node;
      this.state.options = step.options;
    }
    return this.state;
  }
}
