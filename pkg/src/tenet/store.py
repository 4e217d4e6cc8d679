"""Crash-safe transactional record store.

Layout on disk (all integers little-endian):

* ``commit.log``   — append-only frames: 4-byte length, payload, 4-byte crc32
  of the payload. Each payload is one canonical-JSON commit entry
  ``{txn_id, seq, ts, writes}`` where writes is a list of
  ``[collection, key, old_version, value-or-null]`` (null = tombstone).
* ``snapshot.db``  — length-prefixed frames; the first frame is the meta
  document ``{format, last_seq}``, each following frame one record
  ``{collection, key, value, version}``.

Recovery loads the snapshot then replays log entries with ``seq`` greater
than the snapshot's ``last_seq``; a torn or checksum-failing tail frame is
discarded (and truncated away) silently.

Transactions are optimistic: reads record the version they saw, commit
re-validates under the writer lock and retries the whole callback on
conflict. Readers take an immutable reference to the current state, so they
never block writers.
"""

from __future__ import annotations

import json
import os
import struct
import threading
import zlib
from typing import Any, Callable, Iterator, TypeVar

from .clock import Clock, SystemClock
from .errors import ApiError, ErrorCode, conflict, internal
from .ids import generate_id

T = TypeVar("T")

_LEN = struct.Struct("<I")
_CRC = struct.Struct("<I")
_SNAPSHOT_FORMAT = 1
_RETRY_BUDGET = 3

SNAPSHOT_FILE = "snapshot.db"
LOG_FILE = "commit.log"


def canonical_json(doc: Any) -> bytes:
    """Canonical serialization: sorted keys, compact separators, UTF-8."""
    return json.dumps(doc, sort_keys=True, separators=(",", ":"), ensure_ascii=False).encode("utf-8")


class SimulatedCrash(BaseException):
    """Raised by an injected crash hook; the store must be re-opened to continue."""


class _Stale(Exception):
    """Internal: optimistic validation failed, retry the transaction."""


class Txn:
    """Handle passed to the ``transact`` callback. Not thread-safe."""

    def __init__(self, state: dict[str, dict[str, tuple[int, Any]]], coll_versions: dict[str, int]):
        self._state = state
        self._coll_versions = coll_versions
        self._reads: dict[tuple[str, str], int] = {}
        self._scans: dict[str, int] = {}
        self._writes: dict[tuple[str, str], Any] = {}  # value or None (tombstone)

    def get(self, collection: str, key: str) -> Any | None:
        if (collection, key) in self._writes:
            value = self._writes[(collection, key)]
            return None if value is None else json.loads(canonical_json(value))
        version, value = self._state.get(collection, {}).get(key, (0, None))
        self._reads[(collection, key)] = version
        return None if value is None else json.loads(canonical_json(value))

    def put(self, collection: str, key: str, value: dict[str, Any]) -> None:
        # Round-trip through canonical JSON so the in-memory copy is detached
        # from caller mutations and always JSON-serializable.
        self._writes[(collection, key)] = json.loads(canonical_json(value))

    def delete(self, collection: str, key: str) -> None:
        self._writes[(collection, key)] = None

    def scan(self, collection: str, prefix: str = "") -> list[tuple[str, Any]]:
        self._scans[collection] = self._coll_versions.get(collection, 0)
        merged: dict[str, Any] = {
            key: value
            for key, (_, value) in self._state.get(collection, {}).items()
            if key.startswith(prefix)
        }
        for (coll, key), value in self._writes.items():
            if coll != collection or not key.startswith(prefix):
                continue
            if value is None:
                merged.pop(key, None)
            else:
                merged[key] = value
        return [(k, json.loads(canonical_json(merged[k]))) for k in sorted(merged)]


class RecordStore:
    """Single-node store: one writer lock, snapshot-consistent readers."""

    def __init__(
        self,
        data_dir: str,
        *,
        fsync: bool = True,
        clock: Clock | None = None,
        crash_hook: Callable[[str], None] | None = None,
    ):
        self._data_dir = data_dir
        self._fsync = fsync
        self._clock = clock or SystemClock()
        self._crash_hook = crash_hook
        self._lock = threading.Lock()
        self._state: dict[str, dict[str, tuple[int, Any]]] = {}
        self._coll_versions: dict[str, int] = {}
        self._seq = 0
        os.makedirs(data_dir, exist_ok=True)
        self._recover()
        self._log_fd = os.open(self.log_path, os.O_RDWR | os.O_CREAT | os.O_APPEND, 0o600)

    # -- paths ---------------------------------------------------------

    @property
    def snapshot_path(self) -> str:
        return os.path.join(self._data_dir, SNAPSHOT_FILE)

    @property
    def log_path(self) -> str:
        return os.path.join(self._data_dir, LOG_FILE)

    # -- lifecycle -----------------------------------------------------

    def close(self) -> None:
        try:
            os.close(self._log_fd)
        except OSError:  # pragma: no cover - double close in teardown
            pass

    def _hook(self, point: str) -> None:
        if self._crash_hook is not None:
            self._crash_hook(point)

    # -- recovery ------------------------------------------------------

    def _recover(self) -> None:
        if os.path.exists(self.snapshot_path):
            self._load_snapshot()
        if os.path.exists(self.log_path):
            valid_end = self._replay_log()
            size = os.path.getsize(self.log_path)
            if valid_end < size:
                # Torn tail: drop it so future appends start at a clean frame.
                fd = os.open(self.log_path, os.O_RDWR)
                try:
                    os.ftruncate(fd, valid_end)
                finally:
                    os.close(fd)

    def _load_snapshot(self) -> None:
        frames = list(_read_frames(self.snapshot_path, checksummed=False))
        if not frames:
            raise internal("corrupt snapshot: empty file")
        try:
            meta = json.loads(frames[0])
            if meta.get("format") != _SNAPSHOT_FORMAT:
                raise ValueError(f"unknown snapshot format {meta.get('format')}")
            self._seq = int(meta["last_seq"])
            for payload in frames[1:]:
                rec = json.loads(payload)
                coll = self._state.setdefault(rec["collection"], {})
                coll[rec["key"]] = (int(rec["version"]), rec["value"])
        except (KeyError, ValueError, TypeError) as exc:
            raise internal(f"corrupt snapshot: {exc}") from exc

    def _replay_log(self) -> int:
        """Apply valid log entries beyond the snapshot; return valid byte length."""
        valid_end = 0
        with open(self.log_path, "rb") as fh:
            while True:
                header = fh.read(_LEN.size)
                if len(header) < _LEN.size:
                    break
                (length,) = _LEN.unpack(header)
                payload = fh.read(length)
                crc_raw = fh.read(_CRC.size)
                if len(payload) < length or len(crc_raw) < _CRC.size:
                    break
                (crc,) = _CRC.unpack(crc_raw)
                if zlib.crc32(payload) != crc:
                    break
                try:
                    entry = json.loads(payload)
                except ValueError:
                    break
                if int(entry["seq"]) > self._seq:
                    self._apply_entry(entry)
                valid_end = fh.tell()
        return valid_end

    def _apply_entry(self, entry: dict[str, Any]) -> None:
        for coll_name, key, old_version, value in entry["writes"]:
            coll = self._state.setdefault(coll_name, {})
            if value is None:
                coll.pop(key, None)
            else:
                coll[key] = (int(old_version) + 1, value)
        self._seq = int(entry["seq"])

    # -- transactions ----------------------------------------------------

    def transact(self, fn: Callable[[Txn], T]) -> T:
        """Run ``fn`` against a consistent snapshot and commit its writes.

        Serializable via optimistic validation; the callback may run more
        than once, so it must not have side effects beyond the txn handle.
        """
        last_error: ApiError | None = None
        for _ in range(1 + _RETRY_BUDGET):
            txn = Txn(self._state, self._coll_versions)
            result = fn(txn)
            try:
                self._commit(txn)
            except _Stale:
                last_error = conflict("transaction conflict after retries")
                continue
            return result
        assert last_error is not None
        raise last_error

    def _commit(self, txn: Txn) -> None:
        if not txn._writes:
            # Read-only: still validate so callers see serializable reads.
            with self._lock:
                self._validate(txn)
            return
        with self._lock:
            self._validate(txn)
            self._seq += 1
            writes = []
            for (coll, key), value in sorted(txn._writes.items()):
                current_version, _ = self._state.get(coll, {}).get(key, (0, None))
                writes.append([coll, key, current_version, value])
            entry = {
                "txn_id": generate_id("txn"),
                "seq": self._seq,
                "ts": self._clock.now(),
                "writes": writes,
            }
            payload = canonical_json(entry)
            frame = _LEN.pack(len(payload)) + payload + _CRC.pack(zlib.crc32(payload))
            self._hook("commit:pre-append")
            half = len(frame) // 2
            try:
                os.write(self._log_fd, frame[:half])
                self._hook("commit:mid-append")
                os.write(self._log_fd, frame[half:])
            except OSError as exc:  # pragma: no cover - disk failure
                raise internal(f"log append failed: {exc}") from exc
            self._hook("commit:post-append")
            if self._fsync:
                os.fsync(self._log_fd)
            self._hook("commit:post-fsync")
            new_state = dict(self._state)
            touched = set()
            for coll, key, old_version, value in writes:
                new_coll = dict(new_state.get(coll, {}))
                if value is None:
                    new_coll.pop(key, None)
                else:
                    new_coll[key] = (old_version + 1, value)
                new_state[coll] = new_coll
                touched.add(coll)
            self._state = new_state
            for coll in touched:
                self._coll_versions[coll] = self._coll_versions.get(coll, 0) + 1

    def _validate(self, txn: Txn) -> None:
        for (coll, key), seen_version in txn._reads.items():
            current, _ = self._state.get(coll, {}).get(key, (0, None))
            if current != seen_version:
                raise _Stale()
        for coll, seen_version in txn._scans.items():
            if self._coll_versions.get(coll, 0) != seen_version:
                raise _Stale()

    # -- convenience reads (single consistent snapshot) -------------------

    def get(self, collection: str, key: str) -> Any | None:
        _, value = self._state.get(collection, {}).get(key, (0, None))
        return None if value is None else json.loads(canonical_json(value))

    def get_version(self, collection: str, key: str) -> int:
        version, _ = self._state.get(collection, {}).get(key, (0, None))
        return version

    def scan(self, collection: str, prefix: str = "") -> list[tuple[str, Any]]:
        coll = self._state.get(collection, {})
        return [
            (k, json.loads(canonical_json(coll[k][1])))
            for k in sorted(coll)
            if k.startswith(prefix)
        ]

    # -- snapshot compaction ----------------------------------------------

    def snapshot(self) -> None:
        """Write a compacted snapshot and truncate the log it subsumes."""
        with self._lock:
            state = self._state
            seq = self._seq
            tmp_path = self.snapshot_path + ".tmp"
            with open(tmp_path, "wb") as fh:
                meta = canonical_json({"format": _SNAPSHOT_FORMAT, "last_seq": seq})
                fh.write(_LEN.pack(len(meta)) + meta)
                for coll_name in sorted(state):
                    for key in sorted(state[coll_name]):
                        version, value = state[coll_name][key]
                        payload = canonical_json(
                            {"collection": coll_name, "key": key, "value": value, "version": version}
                        )
                        fh.write(_LEN.pack(len(payload)) + payload)
                fh.flush()
                if self._fsync:
                    os.fsync(fh.fileno())
            self._hook("snapshot:pre-replace")
            os.replace(tmp_path, self.snapshot_path)
            self._hook("snapshot:post-replace")
            # Entries up to seq are now in the snapshot; replay skips them even
            # if a crash lands before this truncate.
            os.ftruncate(self._log_fd, 0)
            self._hook("snapshot:post-truncate")


def _read_frames(path: str, *, checksummed: bool) -> Iterator[bytes]:
    with open(path, "rb") as fh:
        while True:
            header = fh.read(_LEN.size)
            if len(header) < _LEN.size:
                return
            (length,) = _LEN.unpack(header)
            payload = fh.read(length)
            if len(payload) < length:
                if checksummed:
                    return
                raise internal("corrupt snapshot: truncated frame")
            if checksummed:
                crc_raw = fh.read(_CRC.size)
                if len(crc_raw) < _CRC.size:
                    return
                (crc,) = _CRC.unpack(crc_raw)
                if zlib.crc32(payload) != crc:
                    return
            yield payload


def recover(data_dir: str, **kwargs: Any) -> RecordStore:
    """Open (or re-open after a crash) the store rooted at ``data_dir``."""
    return RecordStore(data_dir, **kwargs)
