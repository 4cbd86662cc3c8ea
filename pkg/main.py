import sys

from app.core.log_config import shutdown_logging
from app.route import parse_and_dispatch

if __name__ == "__main__":
    code = parse_and_dispatch(sys.argv[1:])
    shutdown_logging()
    sys.exit(code)
