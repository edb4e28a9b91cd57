"""Background small-file writer.

Creating tens of thousands of small files is syscall-bound; the interpreter
lock is released during those calls, so pushing them onto one background
thread overlaps disk work with the producer's parsing or rendering loop.
Entries are batched to keep queue overhead negligible.
"""

from __future__ import annotations

import os
import queue
import threading


class FileWriter:
    """Writes (name, bytes) entries into one directory on a worker thread.

    ``put`` re-raises any earlier write error; ``finish`` drains the queue
    and re-raises too, so producers cannot miss a failure. ``abort`` is an
    idempotent shutdown for error paths.
    """

    def __init__(self, directory: str, chunk_size: int = 128) -> None:
        self._dir = directory
        self._chunk_size = chunk_size
        self._batch: list[tuple[str, bytes]] = []
        self._queue: queue.Queue = queue.Queue(maxsize=8)
        self._error: OSError | None = None
        self._thread = threading.Thread(target=self._run, daemon=True)
        self._thread.start()

    def _run(self) -> None:
        while True:
            batch = self._queue.get()
            if batch is None:
                return
            if self._error is not None:
                continue  # drain remaining batches after a failure
            try:
                for name, data in batch:
                    fd = os.open(f"{self._dir}/{name}", os.O_WRONLY | os.O_CREAT | os.O_TRUNC, 0o644)
                    try:
                        os.write(fd, data)
                    finally:
                        os.close(fd)
            except OSError as exc:
                self._error = exc

    def put(self, name: str, data: bytes) -> None:
        if self._error is not None:
            raise self._error
        self._batch.append((name, data))
        if len(self._batch) >= self._chunk_size:
            self._queue.put(self._batch)
            self._batch = []

    def finish(self) -> None:
        """Flush everything and join the worker; raises the first write error."""
        if self._batch:
            self._queue.put(self._batch)
            self._batch = []
        self._queue.put(None)
        self._thread.join()
        if self._error is not None:
            raise self._error

    def abort(self) -> None:
        if self._thread.is_alive():
            self._queue.put(None)
            self._thread.join(timeout=30.0)
