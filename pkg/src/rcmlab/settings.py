"""
Django settings for the rcm-lab command-line tool.

There is no database, no web stack and no templates: Django provides the
settings layer, logging configuration and the management-command framework
that the CLI is built on.

Every value can be overridden from the environment.
"""

import os
from pathlib import Path

BASE_DIR = Path(__file__).resolve().parent.parent

INSTALLED_APPS = [
    "rcmlab",
]

DATABASES = {}

USE_TZ = True
TIME_ZONE = "UTC"

# Worker pool size used when --threads is not given on the command line
RCM_LAB_THREADS = int(os.getenv("RCM_LAB_THREADS", "1"))

# Where result tables, manifests and environment snapshots are written
RCM_LAB_OUTPUT_DIR = Path(os.getenv("RCM_LAB_OUTPUT_DIR", "results"))

# Numerical defaults (experiment configs may override them)
RCM_LAB_SOLVER = os.getenv("RCM_LAB_SOLVER", "cg")
RCM_LAB_SOLVER_TOL = float(os.getenv("RCM_LAB_SOLVER_TOL", "1e-10"))
RCM_LAB_HEAT_TOL = float(os.getenv("RCM_LAB_HEAT_TOL", "1e-10"))

# Logging
# RCM_LAB_LOG_FORMAT: "text" for terminals, "json" for log collectors
RCM_LAB_LOG_LEVEL = os.getenv("RCM_LAB_LOG_LEVEL", "INFO")
RCM_LAB_LOG_FORMAT = os.getenv("RCM_LAB_LOG_FORMAT", "text")

LOGGING = {
    "version": 1,
    "disable_existing_loggers": False,
    "formatters": {
        "text": {
            "format": "%(asctime)s %(levelname)-7s %(name)s: %(message)s",
        },
        "json": {
            "format": (
                '{"time": "%(asctime)s", "level": "%(levelname)s", '
                '"name": "%(name)s", "message": "%(message)s"}'
            ),
        },
    },
    "handlers": {
        "console": {
            "class": "logging.StreamHandler",
            "formatter": RCM_LAB_LOG_FORMAT,
        },
    },
    "root": {
        "handlers": ["console"],
        "level": "WARNING",
    },
    "loggers": {
        "rcmlab": {
            "handlers": ["console"],
            "level": RCM_LAB_LOG_LEVEL,
            "propagate": False,
        },
    },
}
