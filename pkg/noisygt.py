"""
Noisy group testing toolkit entry point.
"""

import logging
import sys
from pathlib import Path

from src.cli import build_parser, run
from src.config import load_config


def setup_logging(
    log_level: str = "INFO", file_logging: bool = False, logs_dir: str = "logs"
) -> logging.Logger:
    """
    Configure logging for the toolkit.

    Log records go to stderr so that tables written to stdout stay clean.
    """
    formatter = logging.Formatter(
        "%(asctime)s - %(name)s - %(levelname)s - %(message)s",
        datefmt="%Y-%m-%d %H:%M:%S",
    )

    root = logging.getLogger()
    root.setLevel(getattr(logging, log_level.upper(), logging.INFO))
    root.handlers = []

    console_handler = logging.StreamHandler(sys.stderr)
    console_handler.setFormatter(formatter)
    root.addHandler(console_handler)

    logger = logging.getLogger("noisygt")

    if file_logging:
        logs_path = Path(logs_dir)
        logs_path.mkdir(exist_ok=True)
        log_file_path = logs_path / "noisygt.log"
        file_handler = logging.FileHandler(log_file_path)
        file_handler.setFormatter(formatter)
        root.addHandler(file_handler)
        logger.info(f"File logging enabled: {log_file_path}")

    logger.debug("Logging configured")
    return logger


def main() -> int:
    """Main entry point for the application."""
    try:
        args = build_parser().parse_args()

        config = load_config(require_server_key=args.command == "serve")

        log_level = args.log_level or config.LOG_LEVEL
        logger = setup_logging(log_level, config.FILE_LOGGING, config.LOGS_DIR)

        if args.log_level:
            logger.info(f"Log level overridden to {args.log_level.upper()}")

        return run(args, config)

    except Exception as e:
        if "logger" in locals():
            logger.critical(f"noisygt failed: {str(e)}", exc_info=True)
        else:
            logging.critical(f"noisygt failed: {str(e)}", exc_info=True)
        raise


if __name__ == "__main__":
    sys.exit(main())
