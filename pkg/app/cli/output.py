import json
import sys

from app.core.errors import MsanError


def emit(text: str) -> None:
    """One machine-readable record on standard output."""
    sys.stdout.write(text + "\n")
    sys.stdout.flush()


def report_error(exc: MsanError) -> int:
    sys.stderr.write(json.dumps({"error": exc.code, "message": str(exc)}) + "\n")
    return exc.exit_code
