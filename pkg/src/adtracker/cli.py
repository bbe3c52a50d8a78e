"""Command-line entry points: first-manager bootstrap and the HTTP server."""

from __future__ import annotations

import argparse
import getpass
import logging
import sys
from pathlib import Path

from .api import create_app
from .config import load_config
from .errors import AdTrackerError
from .runtime import build_runtime

logger = logging.getLogger(__name__)


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="adtracker",
        description="Self-hosted ad archive monitoring service.",
    )
    parser.add_argument("--config", help="path to a JSON config file")
    sub = parser.add_subparsers(dest="command", required=True)

    boot = sub.add_parser(
        "bootstrap-manager",
        help="create the first (approved) manager account",
    )
    boot.add_argument("--email", required=True)
    boot.add_argument(
        "--password",
        help="manager password; omit to be prompted interactively",
    )

    serve = sub.add_parser("serve", help="run the HTTP service")
    serve.add_argument(
        "--static-dir",
        default=None,
        help="directory of built UI assets to serve at / "
        "(default: ./frontend/dist when present)",
    )
    return parser


def _read_password() -> str:
    first = getpass.getpass("Manager password: ")
    second = getpass.getpass("Repeat password: ")
    if first != second:
        print("passwords do not match", file=sys.stderr)
        raise SystemExit(2)
    return first


def _cmd_bootstrap(args: argparse.Namespace) -> int:
    config = load_config(args.config)
    password = args.password if args.password is not None else _read_password()
    rt = build_runtime(config)
    try:
        account = rt.accounts.bootstrap_manager(args.email, password)
    finally:
        rt.store.close()
    print(f"manager account created: {account.account_id} ({account.email})")
    return 0


def _configure_request_log() -> None:
    log = logging.getLogger("adtracker.requests")
    handler = logging.StreamHandler(sys.stdout)
    handler.setFormatter(logging.Formatter("%(message)s"))
    log.addHandler(handler)
    log.setLevel(logging.INFO)
    log.propagate = False


def _cmd_serve(args: argparse.Namespace) -> int:
    import uvicorn

    config = load_config(args.config)
    logging.basicConfig(level=logging.INFO)
    _configure_request_log()

    static_dir = args.static_dir
    if static_dir is None:
        candidate = Path("frontend/dist")
        if candidate.is_dir():
            static_dir = str(candidate)
    rt = build_runtime(config)
    app = create_app(rt, static_dir=static_dir)
    rt.start()
    host, _, port = config.listen_addr.rpartition(":")
    try:
        uvicorn.run(app, host=host, port=int(port), log_level="warning")
    finally:
        rt.shutdown()
    return 0


def main(argv: list[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        if args.command == "bootstrap-manager":
            return _cmd_bootstrap(args)
        return _cmd_serve(args)
    except AdTrackerError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    raise SystemExit(main())
