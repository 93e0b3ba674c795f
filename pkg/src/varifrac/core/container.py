from dependency_injector import containers, providers
from varifrac.core.config.log_config import LogConfig
from varifrac.core.config.runtime_config import RuntimeConfig


class Container(containers.DeclarativeContainer):
    """Core infrastructure container providing global configuration."""

    log_config = providers.Singleton(LogConfig)
    runtime_config = providers.Singleton(RuntimeConfig)
