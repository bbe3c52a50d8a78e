#!/usr/bin/env python3
"""Development server: simulated archive, data under ./demo-data, and a
demo manager account (demo-manager@example.org / demo-passphrase-1) created
on first run. For real deployments use `adtracker serve` with a config file."""

from __future__ import annotations

import argparse
import json
import tempfile

from adtracker.cli import main as cli_main
from adtracker.config import load_config
from adtracker.errors import EmailTaken
from adtracker.runtime import build_runtime

DEMO_EMAIL = "demo-manager@example.org"
DEMO_PASSWORD = "demo-passphrase-1"


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--data-dir", default="demo-data")
    parser.add_argument("--listen", default="127.0.0.1:8080")
    parser.add_argument("--seed", type=int, default=7)
    parser.add_argument("--ads", type=int, default=60)
    args = parser.parse_args()

    settings = {
        "data_dir": args.data_dir,
        "listen_addr": args.listen,
        "provider": "simulated",
        "seed": args.seed,
        "seed_count": args.ads,
    }
    with tempfile.NamedTemporaryFile("w", suffix=".json", delete=False) as fh:
        json.dump(settings, fh)
        config_path = fh.name

    rt = build_runtime(load_config(config_path))
    try:
        rt.accounts.bootstrap_manager(DEMO_EMAIL, DEMO_PASSWORD)
        print(f"created manager account {DEMO_EMAIL} / {DEMO_PASSWORD}")
    except EmailTaken:
        pass  # already bootstrapped on a previous run
    finally:
        rt.store.close()

    print(f"serving on http://{args.listen}  (data in {args.data_dir})")
    return cli_main(["--config", config_path, "serve"])


if __name__ == "__main__":
    raise SystemExit(main())
