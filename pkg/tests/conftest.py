"""Shared fixtures: a mock clock, runtimes wired to simulated providers, and
pre-approved accounts."""

from __future__ import annotations

import pytest

from adtracker.accounts import AccountService
from adtracker.config import AppConfig
from adtracker.domain import AccountStatus, ActiveStatus, JobSpec, Platform
from adtracker.provider import SIMULATED_COUNTRIES
from adtracker.runtime import Runtime, build_runtime
from adtracker.store import Store


class MockClock:
    """Manually advanced clock; starts inside the simulated data window."""

    def __init__(self, start: float = 1_700_000_000.0):
        self.now = start

    def __call__(self) -> float:
        return self.now

    def advance(self, seconds: float) -> float:
        self.now += seconds
        return self.now


@pytest.fixture
def clock() -> MockClock:
    return MockClock()


@pytest.fixture
def store(tmp_path, clock) -> Store:
    s = Store(tmp_path, clock=clock)
    yield s
    s.close()


@pytest.fixture
def accounts(store, clock) -> AccountService:
    return AccountService(store, clock=clock)


@pytest.fixture
def manager(accounts):
    return accounts.bootstrap_manager("manager@example.org", "manager-passphrase")


@pytest.fixture
def researcher(accounts, manager):
    acct = accounts.sign_up("researcher@example.org", "researcher-passphrase")
    return accounts.review(manager, acct.account_id, AccountStatus.APPROVED)


@pytest.fixture
def match_all_spec() -> JobSpec:
    # Every simulated ad body mentions "campaign" and reaches one of the
    # simulated countries, so this spec matches the whole fixture.
    return JobSpec(
        search_term="campaign",
        reached_countries=SIMULATED_COUNTRIES,
        active_status=ActiveStatus.ALL,
        platforms=(Platform.FACEBOOK, Platform.INSTAGRAM),
    )


def make_runtime(tmp_path, clock, **overrides) -> Runtime:
    merged = dict(
        data_dir=str(tmp_path),
        provider="simulated",
        seed=7,
        seed_count=60,
        page_size=25,
        poll_interval_s=300,
        worker_count=2,
    )
    merged.update(overrides)
    return build_runtime(AppConfig(**merged), clock=clock)


@pytest.fixture
def runtime(tmp_path, clock):
    rt = make_runtime(tmp_path, clock)
    yield rt
    rt.shutdown()
