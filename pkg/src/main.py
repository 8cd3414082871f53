"""Entry point for the isingvote command."""

import logging
import sys
from typing import Optional, Sequence

from src.cli import run
from src.shared.logging_config import set_run_id, setup_logging
from src.shared.settings import get_settings

# Module loggers are named src.<module>, so the package root carries the handlers
PACKAGE_LOGGER = "src"
SERVICE_NAME = "isingvote"


def main(argv: Optional[Sequence[str]] = None) -> int:
    """Configure logging from the environment and run the command line."""
    settings = get_settings()
    setup_logging(
        PACKAGE_LOGGER,
        settings.LOG_LEVEL,
        settings.LOG_FILE,
        json_format=settings.LOG_JSON,
        service=SERVICE_NAME,
    )
    run_id = set_run_id()
    logging.getLogger(__name__).debug(f"Starting run {run_id}")
    return run(argv)


if __name__ == "__main__":
    sys.exit(main())
