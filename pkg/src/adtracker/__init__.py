"""Self-hosted monitoring service for a public ad archive: registered search
jobs feed a deduplicating store that backs geospatial and advertiser analyses,
CSV export, and a reviewed-signup HTTP API."""

__version__ = "0.1.0"
