/**
 * Typed client for the decision graph service. Every recommendation shown in
 * the UI comes from these calls; nothing is computed client-side.
 */

export type ParamValue = string | number;
export type Params = Record<string, ParamValue>;

export interface ConstraintValueJson {
  type: 'categorical' | 'numeric' | 'interval' | 'presence';
  value?: string | number;
  display?: string;
  op?: string;
  low?: number;
  high?: number;
  low_inclusive?: boolean;
  high_inclusive?: boolean;
  present?: boolean;
}

export interface NodePayload {
  id: number;
  label: string;
  content: string;
  constraints: Record<string, ConstraintValueJson>;
  is_decision_node: boolean;
}

export interface BranchOption extends NodePayload {
  satisfied: boolean;
  unsatisfied_keys: string[];
}

export interface StepResponse {
  node: NodePayload;
  options: BranchOption[];
}

export interface AskResponse {
  answer: string;
  node_id: number;
  query: string;
}

export interface Stats {
  total_nodes: number;
  decision_nodes: number;
  relations: number;
}

export class ServiceError extends Error {
  constructor(
    public code: string,
    message: string,
    public position?: string,
  ) {
    super(message);
    this.name = 'ServiceError';
  }
}

type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

async function parseBody<T>(response: Response): Promise<T> {
  const body = await response.json();
  if (!response.ok || body.error) {
    const err = body.error ?? { code: 'http_error', message: `HTTP ${response.status}` };
    throw new ServiceError(err.code, err.message, err.position);
  }
  return body as T;
}

export class ApiClient {
  constructor(
    private baseUrl: string = '',
    private fetchFn: FetchLike = (input, init) => fetch(input, init),
  ) {}

  private async get<T>(path: string): Promise<T> {
    return parseBody<T>(await this.fetchFn(`${this.baseUrl}${path}`));
  }

  private async post<T>(path: string, payload: unknown): Promise<T> {
    const response = await this.fetchFn(`${this.baseUrl}${path}`, {
      method: 'POST',
      headers: { 'Content-Type': 'application/json' },
      body: JSON.stringify(payload),
    });
    return parseBody<T>(response);
  }

  stats(): Promise<Stats> {
    return this.get<Stats>('/api/stats');
  }

  root(): Promise<{ node_id: number | null }> {
    return this.get<{ node_id: number | null }>('/api/root');
  }

  node(nodeId: number): Promise<{ node: NodePayload }> {
    return this.get<{ node: NodePayload }>(`/api/nodes/${nodeId}`);
  }

  step(nodeId: number | null, params: Params): Promise<StepResponse> {
    return this.post<StepResponse>('/api/step', { node_id: nodeId, params });
  }

  ask(question: string): Promise<AskResponse> {
    return this.post<AskResponse>('/api/ask', { question });
  }

  setConstraint(nodeId: number, key: string, value: ConstraintValueJson): Promise<{ node: NodePayload }> {
    return this.post<{ node: NodePayload }>('/api/constraints/set', {
      node_id: nodeId,
      key,
      value,
    });
  }

  removeConstraint(nodeId: number, key: string): Promise<{ removed: boolean; node: NodePayload }> {
    return this.post<{ removed: boolean; node: NodePayload }>('/api/constraints/remove', {
      node_id: nodeId,
      key,
    });
  }
}

/** Human-readable form of a constraint value for option cards. */
export function describeConstraint(key: string, value: ConstraintValueJson): string {
  switch (value.type) {
    case 'categorical':
      return `${key} = ${value.display ?? value.value}`;
    case 'numeric':
      return `${key} ${value.op} ${value.value}`;
    case 'interval': {
      const lb = value.low_inclusive === false ? '(' : '[';
      const rb = value.high_inclusive === false ? ')' : ']';
      return `${key} in ${lb}${value.low}, ${value.high}${rb}`;
    }
    case 'presence':
      return value.present ? `${key} present` : `no ${key}`;
  }
}
