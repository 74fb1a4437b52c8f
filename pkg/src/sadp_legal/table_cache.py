# Copyright (c) 2026 sadp-legal contributors. MIT License; see LICENSE for details.

"""Build-once, share-everywhere cache of decomposability tables.

A table depends only on the library geometry and the process parameters, so
it is stored under a key derived from both.  Concurrent processes (pytest-xdist
workers, parallel CLI runs on a shared filesystem) serialize on a lock made
with ``os.mkdir``, which is atomic on local disks and on every NFS version;
the first one builds the table and the others load it.
"""

from __future__ import annotations

import contextlib
import hashlib
import json
import logging
import os
import socket
import time
from dataclasses import asdict, dataclass
from pathlib import Path

from .dplut import Dplut
from .errors import StaleTable, TableBuildFailed, TableLockTimeout
from .formats import Library, dump_table, load_table

log = logging.getLogger(__name__)

TABLE_SUFFIX = ".dplut.yaml"


@dataclass(frozen=True)
class LockHolder:
    """Who holds a :class:`TableLock`, as recorded in ``holder.json``."""

    hostname: str
    pid: int
    timestamp: float
    library: str = ""

    @classmethod
    def current(cls, library: str = "") -> LockHolder:
        return cls(socket.gethostname(), os.getpid(), time.time(), library)

    @classmethod
    def read(cls, path: Path) -> LockHolder | None:
        try:
            raw = json.loads(path.read_text())
            return cls(
                str(raw["hostname"]),
                int(raw["pid"]),
                float(raw["timestamp"]),
                str(raw.get("library", "")),
            )
        except (OSError, ValueError, KeyError, TypeError):
            return None

    def is_stale(self, max_age: float) -> bool:
        """A local holder is stale once its process is gone, a remote one by age."""
        if self.hostname != socket.gethostname():
            return time.time() - self.timestamp > max_age
        try:
            os.kill(self.pid, 0)
        except ProcessLookupError:
            return True
        except PermissionError:
            pass
        return False


@dataclass
class TableLock:
    """A cross-process lock: the directory ``path`` exists while it is held.

    ``timeout`` is the longest wait in seconds (negative waits forever);
    a lock whose holder is stale (see :meth:`LockHolder.is_stale`) is
    broken and retried.
    """

    path: Path
    timeout: float = 600.0
    poll_interval: float = 0.1
    stale_timeout: float = 3600.0
    owner: str = ""

    def __post_init__(self) -> None:
        self.path = Path(self.path)

    @property
    def holder_file(self) -> Path:
        return self.path / "holder.json"

    def holder(self) -> LockHolder | None:
        return LockHolder.read(self.holder_file)

    def __enter__(self) -> TableLock:
        self.acquire()
        return self

    def __exit__(self, *exc: object) -> None:
        self.release()

    def _try_mkdir(self) -> bool:
        try:
            self.path.mkdir()
        except FileExistsError:
            return False
        return True

    def acquire(self) -> None:
        started = time.monotonic()
        while not self._try_mkdir():
            if self._break_if_stale():
                continue
            waited = time.monotonic() - started
            if 0 <= self.timeout <= waited:
                raise TableLockTimeout(
                    f"table lock {self.path} still held after {waited:.1f}s"
                )
            time.sleep(self.poll_interval)
        record = asdict(LockHolder.current(self.owner))
        _write_file(self.holder_file, json.dumps(record))
        log.debug("Acquired table lock %s", self.path)

    def release(self) -> None:
        self.holder_file.unlink(missing_ok=True)
        with contextlib.suppress(OSError):
            self.path.rmdir()
        log.debug("Released table lock %s", self.path)

    def _break_if_stale(self) -> bool:
        holder = self.holder()
        if holder is None or not holder.is_stale(self.stale_timeout):
            return False
        log.info(
            "Breaking stale table lock %s held by %s:%d",
            self.path,
            holder.hostname,
            holder.pid,
        )
        self.holder_file.unlink(missing_ok=True)
        try:
            self.path.rmdir()
        except OSError:
            return False
        return True


def _sync_dir(directory: Path) -> None:
    fd = os.open(directory, os.O_RDONLY)
    try:
        os.fsync(fd)
    finally:
        os.close(fd)


def _write_file(path: Path, content: str, atomic: bool = False) -> None:
    """Write and fsync ``path``; ``atomic`` goes through a renamed temp file."""
    target = path
    if atomic:
        path = path.with_name(f".{path.name}.{socket.gethostname()}.{os.getpid()}")
    try:
        with path.open("w", encoding="utf-8") as f:
            f.write(content)
            f.flush()
            os.fsync(f.fileno())
        if atomic:
            path.replace(target)
    finally:
        if atomic:
            path.unlink(missing_ok=True)
    _sync_dir(target.parent)


def _visible(path: Path) -> bool:
    """NFS-safe existence check.

    Listing the parent refreshes a client's cached view of the directory
    before the file is looked up.
    """
    try:
        os.listdir(path.parent)
    except OSError:
        return False
    return path.is_file()


def cache_key(library: Library) -> str:
    p = library.params
    blob = json.dumps(
        [library.hash, p.s_dp, p.w_spacer, library.s_b_min], separators=(",", ":")
    )
    return hashlib.sha256(blob.encode()).hexdigest()[:16]


@dataclass
class TableCache:
    """Tables stored as ``<key>.dplut.yaml`` under ``directory``.

    Example::

        table = TableCache(Path("sadp_cache")).get(library)
    """

    directory: Path
    timeout: float = 600.0

    def __post_init__(self) -> None:
        self.directory = Path(self.directory)

    @property
    def _lock_dir(self) -> Path:
        return self.directory / ".locks"

    def table_path(self, library: Library) -> Path:
        return self.directory / f"{cache_key(library)}{TABLE_SUFFIX}"

    def _fail_file(self, library: Library) -> Path:
        return self._lock_dir / f"{cache_key(library)}.failed"

    def _load(self, path: Path, library: Library) -> Dplut | None:
        if not _visible(path):
            return None
        try:
            return load_table(path, library)
        except StaleTable as e:
            log.warning("Ignoring cached table: %s", e)
            return None

    def get(self, library: Library, jobs: int | None = None) -> Dplut:
        """Load the cached table for ``library`` or build it exactly once."""
        path = self.table_path(library)
        table = self._load(path, library)
        if table is not None:
            return table

        self._lock_dir.mkdir(parents=True, exist_ok=True)
        key = cache_key(library)
        with TableLock(
            self._lock_dir / f"{key}.lock", timeout=self.timeout, owner=library.hash
        ):
            table = self._load(path, library)
            if table is not None:
                log.info("Table %s built by another process", path.name)
                return table

            fail = self._fail_file(library)
            if _visible(fail):
                try:
                    reason = fail.read_text()
                except OSError:
                    reason = "<unreadable>"
                raise TableBuildFailed(
                    f"Previous build of table {key} failed: {reason}"
                )

            log.info("Building table %s in %s", key, self.directory)
            try:
                table = library.build_table(jobs)
                _write_file(path, dump_table(table), atomic=True)
            except Exception as e:
                _write_file(fail, f"{type(e).__name__}: {e}")
                raise
            return table

    def clear(self) -> None:
        """Remove cached tables and failure markers so tables are rebuilt."""
        for path in self.directory.glob(f"*{TABLE_SUFFIX}"):
            path.unlink(missing_ok=True)
        if self._lock_dir.is_dir():
            for marker in self._lock_dir.glob("*.failed"):
                marker.unlink(missing_ok=True)
