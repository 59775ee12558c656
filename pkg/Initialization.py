# Initialization.py
import json
import re
import threading
from concurrent.futures import ThreadPoolExecutor
from typing import Any, Callable, Iterable, List, Optional, TypeVar

# Import configuration variables
from CONFIGURATION import CSV_DIGITS, worker_count

T = TypeVar("T")
R = TypeVar("R")

_worker_state = threading.local()


class ConfigSyntaxError(ValueError):
    """Raised when a config file is not valid JSON; carries the 1-based line."""

    def __init__(self, message: str, line: int, column: int = 0):
        super().__init__(f"{message} (line {line}, column {column})")
        self.line = line
        self.column = column


# --- Helper Functions ---
def ordered_map(fn: Callable[[T], R], items: Iterable[T], threads: Optional[int] = None) -> List[R]:
    """
    Applies fn to every item on a thread pool and returns results in input order.

    Calls made from inside a worker run serially, so nested maps never multiply threads.
    Every task must be deterministic on its own; collection order is the input order.
    """
    items = list(items)
    workers = min(worker_count(threads), len(items))
    if workers <= 1 or getattr(_worker_state, "active", False):
        return [fn(item) for item in items]

    def run(item: T) -> R:
        _worker_state.active = True
        try:
            return fn(item)
        finally:
            _worker_state.active = False

    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(run, items))


def parse_json_config(config_text: str) -> dict[str, Any]:
    """Parses a JSON config, allowing whole-line // comments. Errors carry the line number."""
    # Blank out comment lines instead of removing them so line numbers survive
    cleaned = re.sub(r'(?m)^\s*//.*$', '', config_text)
    try:
        data = json.loads(cleaned)
    except json.JSONDecodeError as e:
        raise ConfigSyntaxError(f"Invalid JSON config: {e.msg}", e.lineno, e.colno) from e
    if not isinstance(data, dict):
        raise ConfigSyntaxError("Config must be a JSON object at the top level", 1, 1)
    return data


def format_float(value: float) -> str:
    """Diff-stable number text: 17 significant digits reload to the same double."""
    return f"{float(value):.{CSV_DIGITS}g}"
