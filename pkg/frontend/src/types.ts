// Wire shapes of /api/v1 responses. The UI renders these verbatim and never
// recomputes counts, orderings, or clusters on its own.

export interface Vocabulary {
  active_status: string[];
  categories: string[];
  platforms: string[];
  visibility: string[];
  countries: string[];
}

export interface JobSpecPayload {
  search_term: string;
  reached_countries: string[];
  active_status: string;
  category: string;
  platforms: string[];
  visibility: string;
}

export interface UpsertCounts {
  inserted: number;
  updated: number;
  unchanged: number;
  skipped_invalid: number;
}

export interface PollReport {
  started_at: string;
  finished_at: string;
  pages_fetched: number;
  upsert: UpsertCounts;
  errors: [string, string][];
}

export interface Job {
  job_id: string;
  owner: string;
  spec: JobSpecPayload;
  created_at: string;
  state: string;
  last_poll_at: string | null;
  last_report: PollReport | null;
}

export interface JobList {
  jobs: Job[];
  total: number;
}

export interface ClusterMember {
  country_code: string;
  region_name: string;
}

export interface Cluster {
  centroid: { lat: number; lon: number };
  members: ClusterMember[];
  raw_count: number;
  weighted_reach: number;
}

export interface RankRow {
  country_code: string;
  region_name: string;
  raw_count: number;
  weighted_reach: number;
}

export interface RegionalReport {
  clusters: Cluster[];
  ranks: RankRow[];
  unresolved: RankRow[];
}

export interface Advertiser {
  page_id: string;
  page_name: string;
  ad_count: number;
  total_weighted_impressions: number;
  profile_image_ref: string | null;
}

export interface AdvertiserList {
  advertisers: Advertiser[];
}

export interface LoginResponse {
  token: string;
  expires_at: string;
}

export interface AccountInfo {
  account_id: string;
  email: string;
  role: string;
  status: string;
  identity_confirmed: boolean;
  developer_account: boolean;
  created_at: string;
}

export interface Violation {
  code: string;
  field: string;
  detail: string;
}
