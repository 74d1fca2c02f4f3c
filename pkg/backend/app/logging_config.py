# backend/app/logging_config.py
import logging

from rich.console import Console
from rich.logging import RichHandler

_HANDLER_NAME = "unc-lab"


def configure_logging(level: str = "WARNING") -> None:
    """Route library logs through rich on stderr. Safe to call repeatedly."""
    root = logging.getLogger("app")
    root.setLevel(level.upper())
    if any(h.get_name() == _HANDLER_NAME for h in root.handlers):
        return
    handler = RichHandler(
        console=Console(stderr=True),
        show_path=False,
        rich_tracebacks=True,
        log_time_format="[%X]",
    )
    handler.set_name(_HANDLER_NAME)
    handler.setFormatter(logging.Formatter("%(name)s: %(message)s"))
    root.addHandler(handler)
    root.propagate = False
