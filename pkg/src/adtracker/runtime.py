"""Wires config into a running application: store, provider, job manager,
scheduler, account service, caches."""

from __future__ import annotations

import logging
import time
from dataclasses import dataclass
from pathlib import Path
from typing import Callable

from .accounts import AccountService
from .advertisers import (
    GraphProvider,
    LiveGraphProvider,
    ProfileImageCache,
    SimulatedGraphProvider,
)
from .config import AppConfig
from .geo import Gazetteer
from .jobs import JobManager, JobRunnerConfig, PollScheduler
from .provider import (
    AdsProvider,
    LiveAdsProvider,
    ProviderConfig,
    SimulatedAdsProvider,
)
from .store import Store

logger = logging.getLogger(__name__)


@dataclass
class Runtime:
    config: AppConfig
    store: Store
    provider: AdsProvider
    graph: GraphProvider
    image_cache: ProfileImageCache
    accounts: AccountService
    manager: JobManager
    scheduler: PollScheduler
    gazetteer: Gazetteer
    clock: Callable[[], float] = time.time

    def start(self) -> None:
        self.scheduler.start()

    def shutdown(self) -> None:
        self.scheduler.shutdown()
        self.store.close()


def build_runtime(
    config: AppConfig, clock: Callable[[], float] = time.time
) -> Runtime:
    data_dir = Path(config.data_dir)
    data_dir.mkdir(parents=True, exist_ok=True)

    store = Store(data_dir, clock=clock)
    provider: AdsProvider
    graph: GraphProvider
    if config.provider == "live":
        provider_config = ProviderConfig(
            base_url=config.base_url,
            access_token=config.api_token,
            max_requests_per_minute=config.requests_per_minute,
            page_size=config.page_size,
            retry_limit=config.retry_limit,
        )
        provider = LiveAdsProvider(provider_config)
        graph = LiveGraphProvider(config.base_url, config.api_token)
    else:
        provider = SimulatedAdsProvider.seed(
            config.seed, config.seed_count, page_size=config.page_size
        )
        graph = SimulatedGraphProvider()

    image_cache = ProfileImageCache(
        data_dir, graph, ttl_s=config.image_ttl_s, clock=clock
    )
    accounts = AccountService(store, clock=clock)
    manager = JobManager(
        store,
        provider,
        JobRunnerConfig(
            poll_interval_s=config.poll_interval_s,
            max_pages_per_cycle=config.max_pages_per_cycle,
            worker_count=config.worker_count,
        ),
        clock=clock,
    )
    scheduler = PollScheduler(manager, clock=clock)
    return Runtime(
        config=config,
        store=store,
        provider=provider,
        graph=graph,
        image_cache=image_cache,
        accounts=accounts,
        manager=manager,
        scheduler=scheduler,
        gazetteer=Gazetteer.bundled(),
        clock=clock,
    )
