from logging.handlers import RotatingFileHandler

from sparse_phase.lib.config import Config
from sparse_phase.lib.logging import SparsePhaseLogFormatter, lg


class _SparsePhaseContext:
    """Globally accessible wrapper class that centralizes access to the configuration"""

    # Attributes exposed via properties
    _config: Config | None = None

    @classmethod
    def _setup_logging_handler(cls, config: Config) -> None:
        """Setup the file logger for sparse-phase"""
        try:
            config.core.logfile_path.parent.mkdir(parents=True, exist_ok=True)
            lg_file_handler = RotatingFileHandler(
                filename=config.core.logfile_path,
                maxBytes=config.core.logfile_max_bytes,
                backupCount=config.core.logfile_count,
            )
            lg_file_handler.setFormatter(SparsePhaseLogFormatter())
            lg.addHandler(lg_file_handler)
        except Exception:
            lg.exception("Failed to setup file logger for sparse-phase")

    @property
    def config(cls) -> Config:
        if cls._config is None:
            cls._config = Config.load_config()
            cls._setup_logging_handler(cls._config)
        return cls._config

    def use_config(cls, config: Config) -> None:
        """Swaps in an explicit configuration (tests, worker processes) without touching the file on disk"""
        cls._config = config


SparsePhaseContext = _SparsePhaseContext()
