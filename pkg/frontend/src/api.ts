// Typed client over the query-service envelope. Responses from an older
// snapshot that resolve after a newer one has been seen are discarded.

export interface Envelope<T> {
  payload: T;
  schema_version: string;
  graph_snapshot_id: string;
  timing_ms: number;
}

export interface BenchmarkRow {
  id: string;
  name: string;
  score: number;
  stars: number | null;
  test_year: number | null;
  spec: Record<string, string>;
}

export interface VehicleRow {
  id: string;
  name: string;
  on_market: boolean;
  class: string | null;
  test_year: number | null;
  stars: number | null;
  ratings: Record<string, number>;
}

export interface DevTreeNode {
  id: string;
  model_id: string;
  discipline: string | null;
  n_parts: number | null;
  sim_count: number;
  sims: string[];
  protocols: string[];
  status_reuse: string[];
  children: DevTreeNode[];
}

export interface SimRow {
  id: string;
  run_id: string;
  model: string | null;
  barrier: string | null;
  impactor: string | null;
  protocol: string | null;
  total_ie: number;
  max_similarity: number | null;
  clusters: string[];
}

export interface SimOverviewPayload {
  rows: SimRow[];
  page: number;
  page_size: number;
  total: number;
}

export interface EnergyRow {
  part: string;
  name: string | null;
  ie_max: number;
  t_start: number | null;
  t_end: number | null;
  rate: number | null;
}

export interface Curve {
  t: number[];
  v: number[];
}

export interface SimDetailPayload {
  id: string;
  run_id: string;
  total_mass: number | null;
  impact_energy: number | null;
  termination_time: number | null;
  model: string | null;
  barrier: string | null;
  impactor: string | null;
  protocol: string | null;
  parts: EnergyRow[];
  series: Record<string, Curve>;
  similar: { sim: string; score: number }[];
}

export class StaleResponseError extends Error {
  constructor(snapshotId: string) {
    super(`response from superseded snapshot ${snapshotId} discarded`);
  }
}

export class ApiError extends Error {
  constructor(public status: number, message: string) {
    super(message);
  }
}

type FetchLike = (input: string) => Promise<Response>;

export class ApiClient {
  snapshotId: string | null = null;
  private latestSeq = 0;
  private seqCounter = 0;

  constructor(
    private base: string = "",
    private fetcher: FetchLike = (input) => fetch(input),
  ) {}

  async get<T>(path: string, params?: Record<string, string | number | undefined>): Promise<T> {
    const seq = ++this.seqCounter;
    const search = new URLSearchParams();
    for (const [key, value] of Object.entries(params ?? {})) {
      if (value !== undefined && value !== "") search.set(key, String(value));
    }
    const query = search.toString();
    const response = await this.fetcher(`${this.base}${path}${query ? "?" + query : ""}`);
    if (!response.ok) {
      let detail = response.statusText;
      try {
        detail = ((await response.json()) as { detail?: string }).detail ?? detail;
      } catch {
        /* non-JSON error body */
      }
      throw new ApiError(response.status, detail);
    }
    const envelope = (await response.json()) as Envelope<T>;
    if (seq > this.latestSeq) {
      this.latestSeq = seq;
      this.snapshotId = envelope.graph_snapshot_id;
    } else if (envelope.graph_snapshot_id !== this.snapshotId) {
      throw new StaleResponseError(envelope.graph_snapshot_id);
    }
    return envelope.payload;
  }

  vehicles(params: Record<string, string | undefined>): Promise<VehicleRow[]> {
    return this.get("/vehicles", params);
  }

  benchmark(params: Record<string, string | undefined>): Promise<BenchmarkRow[]> {
    return this.get("/vehicles", params);
  }

  devtree(vehId: string): Promise<DevTreeNode[]> {
    return this.get(`/vehicles/${encodeURIComponent(vehId)}/devtree`);
  }

  sims(params: Record<string, string | number | undefined>): Promise<SimOverviewPayload> {
    return this.get("/sims", params);
  }

  simDetail(simId: string): Promise<SimDetailPayload> {
    return this.get(`/sims/${encodeURIComponent(simId)}`);
  }
}
