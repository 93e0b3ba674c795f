"""Per-command logging context.

Binds command, seed and run_id into structlog contextvars so every event a
command emits (down to candidate evaluations) carries them.
"""

import time
from collections.abc import Iterator
from contextlib import contextmanager

import structlog
from structlog.contextvars import bind_contextvars, clear_contextvars

from varifrac.cli.manifest import RunManifest


@contextmanager
def command_context(manifest: RunManifest) -> Iterator[None]:
    logger = structlog.get_logger(__name__)
    clear_contextvars()
    bind_contextvars(command=manifest.command, seed=manifest.seed, run_id=manifest.run_id)

    start = time.perf_counter()
    logger.info("command started", out_dir=manifest.out_dir, inputs=manifest.inputs)
    try:
        yield
    finally:
        duration_ms = (time.perf_counter() - start) * 1000
        logger.info("command finished", duration_ms=round(duration_ms, 2))
        clear_contextvars()
