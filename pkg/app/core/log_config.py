import os
import logging
import logging.handlers
from datetime import datetime
from logging.config import dictConfig

from app.core.config import settings

# Project root: this file lives at app/core/log_config.py
BASE_DIR = os.path.abspath(os.path.join(os.path.dirname(os.path.abspath(__file__)), "../.."))

LOG_DIR = settings.LOG_DIR if os.path.isabs(settings.LOG_DIR) else os.path.join(BASE_DIR, settings.LOG_DIR)
LOG_FILE = os.path.join(LOG_DIR, f"spintomo_{datetime.now().strftime('%Y%m%d')}.log")

# Set log level based on environment
ENV = settings.ENV.lower()
LOG_LEVELS = {
    "development": "DEBUG",
    "testing": "INFO",
    "production": "WARNING"
}
LOG_LEVEL = settings.LOG_LEVEL.upper() or LOG_LEVELS.get(ENV, "INFO")


class SafeTimedRotatingFileHandler(logging.handlers.TimedRotatingFileHandler):
    """Multi-process safe log file handler"""
    def __init__(self, filename, when='h', interval=1, backupCount=0, encoding=None, delay=False, utc=False, atTime=None):
        super().__init__(filename, when, interval, backupCount, encoding, delay, utc, atTime)
        # Delay file creation until first log is written
        self.delay = True
        self.mode = 'a'

    def _open(self):
        return open(self.baseFilename, self.mode, encoding=self.encoding)


def build_logging_config(level: str = LOG_LEVEL, to_file: bool = settings.LOG_TO_FILE) -> dict:
    """Build the dictConfig mapping; console always goes to stderr so reports on stdout stay clean"""
    handlers = {
        "console": {
            "class": "logging.StreamHandler",
            "level": level,
            "formatter": "console_formatter",
            "stream": "ext://sys.stderr",
        },
    }
    root_handlers = ["console"]
    if to_file:
        handlers["file"] = {
            "class": "app.core.log_config.SafeTimedRotatingFileHandler",
            "level": level,
            "formatter": "file_formatter",
            "filename": LOG_FILE,
            "when": "midnight",
            "interval": 1,
            "backupCount": 7,
            "encoding": "utf-8",
        }
        root_handlers.append("file")

    return {
        "version": 1,
        "disable_existing_loggers": False,
        "formatters": {
            "console_formatter": {
                "format": "%(asctime)s [%(levelname)s] [PID:%(process)d] %(name)s: %(message)s",
                "datefmt": "%Y-%m-%d %H:%M:%S",
            },
            "file_formatter": {
                "format": "%(asctime)s [%(levelname)s] [PID:%(process)d] %(name)s [%(pathname)s:%(lineno)d]: %(message)s",
                "datefmt": "%Y-%m-%d %H:%M:%S",
            },
        },
        "handlers": handlers,
        "loggers": {
            "": {
                "handlers": root_handlers,
                "level": level,
                "propagate": True,
            },
        },
    }


LOGGING_CONFIG = build_logging_config()


def setup_logging(level: str = None, to_file: bool = None):
    """Apply logging configuration"""
    config = LOGGING_CONFIG
    if level is not None or to_file is not None:
        config = build_logging_config(
            level=(level or LOG_LEVEL).upper(),
            to_file=settings.LOG_TO_FILE if to_file is None else to_file,
        )
    if "file" in config["handlers"] and not os.path.exists(LOG_DIR):
        os.makedirs(LOG_DIR)
    dictConfig(config)
    logging.getLogger("app.core.log_config").debug(f"Logging system initialized (level {config['handlers']['console']['level']})")


def shutdown_logging():
    """Flush and close log handlers"""
    logging.getLogger("app.core.log_config").debug("Shutting down logging system")
    logging.shutdown()
