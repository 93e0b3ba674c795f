"""structlog setup shared by every command.

Events are rendered to stderr (JSON by default, console with
VARIFRAC_LOG_FORMAT=pretty) so that reports and CSV files written to --out
stay untouched. Solver events carry numpy scalars and small arrays; they are
converted to plain Python values before rendering. numpy/scipy warnings
(overflow in a barrier term, an L-BFGS-B warning) arrive through
`logging.captureWarnings` as `py.warnings` records and pass the same chain.
"""

import logging
import sys

import numpy as np
import structlog
from structlog.typing import EventDict, Processor

from varifrac.core.config.log_config import LogConfig

PACKAGE = "varifrac"
WARNINGS_LOGGER = "py.warnings"
MAX_LOGGED_ARRAY = 16


def coerce_numpy(_, __, event_dict: EventDict) -> EventDict:
    """np.float64 / np.int64 -> float / int; short arrays -> lists; long arrays -> shape summary."""
    for key, value in event_dict.items():
        if isinstance(value, np.generic):
            event_dict[key] = value.item()
        elif isinstance(value, np.ndarray):
            if value.size <= MAX_LOGGED_ARRAY:
                event_dict[key] = value.tolist()
            else:
                event_dict[key] = {"shape": list(value.shape), "dtype": str(value.dtype)}
    return event_dict


class PackageLevelFilter(logging.Filter):
    """varifrac records at the configured level; numerics warnings always; others from `floor` up."""

    def __init__(self, floor: int):
        super().__init__()
        self.floor = floor

    def filter(self, record: logging.LogRecord) -> bool:
        if record.name.startswith(PACKAGE) or record.name == WARNINGS_LOGGER:
            return True
        return record.levelno >= self.floor


def _renderer(log_config: LogConfig) -> Processor:
    if log_config.format == "pretty":
        return structlog.dev.ConsoleRenderer(colors=False)
    return structlog.processors.JSONRenderer(sort_keys=True)


def _timestamp() -> Processor:
    return structlog.processors.TimeStamper(fmt="iso", utc=True)


def configure_logging(log_config: LogConfig) -> None:
    """Route structlog and stdlib logging through one stderr handler.

    Args:
        log_config: level, output format and the floor for foreign loggers
    """
    processors: list[Processor] = [
        structlog.contextvars.merge_contextvars,
        structlog.stdlib.add_logger_name,
        structlog.stdlib.add_log_level,
        structlog.processors.format_exc_info,
        structlog.processors.CallsiteParameterAdder(
            parameters=[
                structlog.processors.CallsiteParameter.MODULE,
                structlog.processors.CallsiteParameter.LINENO,
            ]
        ),
        coerce_numpy,
        structlog.processors.EventRenamer("message"),
        _timestamp(),
    ]
    structlog.configure(
        processors=[*processors, structlog.stdlib.ProcessorFormatter.wrap_for_formatter],
        wrapper_class=structlog.make_filtering_bound_logger(log_config.level_int),
        logger_factory=structlog.stdlib.LoggerFactory(),
        cache_logger_on_first_use=False,
    )

    handler = logging.StreamHandler(sys.stderr)
    handler.setFormatter(
        structlog.stdlib.ProcessorFormatter(
            processors=[structlog.stdlib.ProcessorFormatter.remove_processors_meta, _renderer(log_config)],
            foreign_pre_chain=[
                structlog.stdlib.add_logger_name,
                structlog.stdlib.add_log_level,
                structlog.processors.EventRenamer("message"),
                _timestamp(),
            ],
        )
    )
    handler.addFilter(PackageLevelFilter(log_config.third_party_level_int))

    logging.captureWarnings(True)
    root = logging.getLogger()
    root.handlers.clear()
    root.addHandler(handler)
    root.setLevel(log_config.level_int)
