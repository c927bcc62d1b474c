from .logging_config import setup_logging, WarningCollector, LOG_LEVELS

__all__ = ['setup_logging', 'WarningCollector', 'LOG_LEVELS']
