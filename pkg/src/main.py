import sys

from cli.runner import run
from config.logger import setup_logger

logger = setup_logger(__name__)


def main():
    try:
        sys.exit(run(sys.argv[1:]))
    except Exception as e:
        logger.error(f"Lab run failed: {e}")
        raise  # unexpected failures keep their traceback


if __name__ == "__main__":
    main()
