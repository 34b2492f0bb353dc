"""
Debug System - Component-scoped structured logging

Every numerical step (normal forms, ε-searches, genericity draws, method
dispatch) reports through one buffered logger so that a run can be replayed
from its log alone:

    debugger = get_debugger()
    debugger.debug("perturb", "Searching epsilon", n=4, preserved="3")
    debugger.info("decomposer", "Method certified", method="square_3", terms=7)

Entries are always buffered; they are echoed to stderr only when debug mode
is enabled (options.debug in config.yml).
"""
import json
import sys
import threading
import time
from contextlib import contextmanager
from datetime import datetime, timezone
from pathlib import Path
from typing import Any, Dict, Iterator, List, Optional


LEVELS = ("DEBUG", "INFO", "WARN", "ERROR")


class DebugSystem:
    """
    Buffered logger with live stderr echo.

    Thread-safe: the selftest executor logs from worker threads.
    """

    def __init__(self, enabled: bool = False):
        self.enabled = enabled
        self.log_buffer: List[Dict[str, Any]] = []
        self._lock = threading.Lock()

    def _timestamp(self) -> str:
        """ISO8601 timestamp with timezone"""
        return datetime.now(timezone.utc).astimezone().isoformat(timespec='milliseconds')

    def _log(self, level: str, component: str, message: str, **fields):
        """
        Buffer one entry and echo it when enabled.

        Args:
            level: One of LEVELS
            component: Emitting component (module or plugin name)
            message: Human-readable message
            **fields: Context fields; None values are dropped
        """
        ts = self._timestamp()
        kept = {k: v for k, v in fields.items() if v is not None}

        entry = {
            "timestamp": ts,
            "level": level,
            "component": component,
            "message": message,
            "fields": kept,
        }
        with self._lock:
            self.log_buffer.append(entry)

            if not self.enabled:
                return

            context = " ".join(f"{k}={v}" for k, v in kept.items())
            if context:
                line = f"{ts}  {level:5s}  {component:12s} [{context}] {message}"
            else:
                line = f"{ts}  {level:5s}  {component:12s} {message}"

            print(line, file=sys.stderr)
            sys.stderr.flush()

    def debug(self, component: str, message: str, **fields):
        self._log("DEBUG", component, message, **fields)

    def info(self, component: str, message: str, **fields):
        self._log("INFO", component, message, **fields)

    def warn(self, component: str, message: str, **fields):
        self._log("WARN", component, message, **fields)

    def error(self, component: str, message: str, **fields):
        self._log("ERROR", component, message, **fields)

    @contextmanager
    def timed(self, component: str, message: str, **fields) -> Iterator[Dict[str, Any]]:
        """
        Log `message` with duration_ms when the block exits.

        The yielded dict may be filled by the block with extra fields
        (e.g. the term count of a decomposition) that are logged on exit.
        """
        extra: Dict[str, Any] = {}
        started = time.perf_counter()
        try:
            yield extra
        finally:
            duration_ms = int((time.perf_counter() - started) * 1000)
            self.debug(component, message, duration_ms=duration_ms, **fields, **extra)

    def get_logs(self, level: Optional[str] = None) -> List[Dict[str, Any]]:
        """Collected logs, optionally only those of one level"""
        with self._lock:
            if level is None:
                return list(self.log_buffer)
            return [e for e in self.log_buffer if e["level"] == level]

    def export_logs(self, filepath: Path) -> None:
        """
        Write the buffer to a JSON file with a _metadata block.

        Args:
            filepath: Destination path (parent directories are created)
        """
        filepath = Path(filepath)
        filepath.parent.mkdir(parents=True, exist_ok=True)

        with self._lock:
            entries = list(self.log_buffer)

        export_data = {
            "_metadata": {
                "type": "debug_log",
                "total_entries": len(entries),
                "debug_mode_was_enabled": self.enabled,
                "exported_at": datetime.now(timezone.utc).astimezone().isoformat(),
            },
            "logs": entries,
        }

        with open(filepath, 'w', encoding='utf-8') as f:
            json.dump(export_data, f, indent=2, ensure_ascii=False, default=str)

    def clear_logs(self) -> None:
        with self._lock:
            self.log_buffer.clear()


_debugger: Optional[DebugSystem] = None


def init_debugger(enabled: bool = False) -> DebugSystem:
    """
    Replace the global debugger.

    Args:
        enabled: Echo entries to stderr

    Returns:
        The new debugger
    """
    global _debugger
    _debugger = DebugSystem(enabled=enabled)
    return _debugger


def get_debugger() -> DebugSystem:
    """Global debugger (a silent one is created on first use)"""
    global _debugger
    if _debugger is None:
        _debugger = DebugSystem(enabled=False)
    return _debugger
