"""Hierarchical parameter store with change notification and persistence.

Paths are absolute, slash-separated, segments [a-z0-9_]+. Numeric entries
carry {min, max, step, default} metadata (slider bounds for the tuning UI)
and committed values are clamped into [min, max]. Every committed change
gets a globally unique, gap-free sequence number and is delivered exactly
once to each subscription whose prefix matches.
"""

from __future__ import annotations

import json
import re
import threading
from collections import deque
from dataclasses import dataclass

_SEGMENT = re.compile(r"^[a-z0-9_]+$")


class DeclError(Exception):
    """Set on an undeclared path that needs metadata."""


class NotFound(KeyError):
    pass


class ParseError(ValueError):
    def __init__(self, msg: str, line: int | None = None, col: int | None = None):
        loc = f" at line {line}, column {col}" if line is not None else ""
        super().__init__(msg + loc)
        self.line = line
        self.col = col


def normalize_path(path: str) -> str:
    if not path.startswith("/"):
        raise ValueError(f"path must be absolute: {path!r}")
    segments = [s for s in path.split("/")[1:] if s != ""]
    if path != "/" and (not segments or any(not _SEGMENT.match(s) for s in segments)):
        raise ValueError(f"bad path {path!r}")
    return "/" + "/".join(segments) if segments else "/"


def _is_prefix(prefix: str, path: str) -> bool:
    if prefix == "/":
        return True
    return path == prefix or path.startswith(prefix + "/")


@dataclass(frozen=True)
class ParamMeta:
    min: float
    max: float
    step: float
    default: float

    def __post_init__(self):
        if not self.min <= self.default <= self.max:
            raise ValueError("meta must satisfy min <= default <= max")


@dataclass
class ParamEntry:
    value: object
    kind: type
    meta: ParamMeta | None = None


class Subscription:
    """Bounded notification buffer; overflow drops the oldest and flags it."""

    def __init__(self, prefix: str, maxlen: int | None = 1024):
        self.prefix = prefix
        self.lost = False
        self._cond = threading.Condition()
        self._queue: deque = deque()
        self._maxlen = maxlen
        self.closed = False

    def _push(self, item):
        with self._cond:
            if self._maxlen is not None and len(self._queue) >= self._maxlen:
                self._queue.popleft()
                self.lost = True
            self._queue.append(item)
            self._cond.notify_all()

    def pop(self, timeout: float | None = 0.0):
        """Next (path, value, seq) or None. timeout=None blocks until data."""
        with self._cond:
            if not self._queue and timeout != 0.0:
                self._cond.wait_for(lambda: self._queue or self.closed,
                                    timeout=timeout)
            return self._queue.popleft() if self._queue else None

    def drain(self) -> list:
        with self._cond:
            items = list(self._queue)
            self._queue.clear()
            return items

    def close(self):
        with self._cond:
            self.closed = True
            self._cond.notify_all()


class ParamTree:
    """Thread-safe parameter tree; many readers/writers, ordered commits."""

    def __init__(self):
        self._lock = threading.RLock()
        self._entries: dict[str, ParamEntry] = {}
        self._subs: list[Subscription] = []
        self._seq = 0
        self._extras: dict[str, object] = {}  # unknown file nodes, re-saved

    # -- declaration ------------------------------------------------------

    def declare(self, path: str, default, *, min=None, max=None, step=None):
        """Declare a parameter. Numerics need bounds; re-declaring is a no-op
        that keeps the stored value."""
        path = normalize_path(path)
        with self._lock:
            if path in self._entries:
                return self._entries[path].value
            if isinstance(default, bool) or isinstance(default, str):
                entry = ParamEntry(default, type(default))
            elif isinstance(default, (int, float)):
                if min is None or max is None:
                    raise DeclError(f"numeric {path} needs min/max metadata")
                kind = float if isinstance(default, float) else int
                meta = ParamMeta(min=kind(min), max=kind(max),
                                 step=kind(step if step is not None else 1),
                                 default=kind(default))
                entry = ParamEntry(kind(default), kind, meta)
            else:
                raise DeclError(f"unsupported type {type(default).__name__}")
            self._entries[path] = entry
            return entry.value

    # -- core ops ---------------------------------------------------------

    def set(self, path: str, value):
        """Commit a value (clamped for numerics) and notify subscribers.

        Returns the committed value. Strings and bools auto-declare.
        """
        path = normalize_path(path)
        with self._lock:
            entry = self._entries.get(path)
            if entry is None:
                if isinstance(value, bool) or isinstance(value, str):
                    entry = ParamEntry(value, type(value))
                    self._entries[path] = entry
                else:
                    raise DeclError(f"{path} not declared; numerics need metadata")
            if entry.kind is bool:
                if not isinstance(value, bool):
                    raise TypeError(f"{path} expects bool, got {type(value).__name__}")
                committed = value
            elif entry.kind is str:
                if not isinstance(value, str):
                    raise TypeError(f"{path} expects str, got {type(value).__name__}")
                committed = value
            else:
                if isinstance(value, bool) or not isinstance(value, (int, float)):
                    raise TypeError(f"{path} expects {entry.kind.__name__}, "
                                    f"got {type(value).__name__}")
                committed = entry.kind(value)
                if entry.meta:
                    committed = entry.kind(
                        min(entry.meta.max, max(entry.meta.min, committed)))
            entry.value = committed
            self._seq += 1
            seq = self._seq
            event = (path, committed, seq)
            for sub in self._subs:
                if _is_prefix(sub.prefix, path):
                    sub._push(event)
            return committed

    def get(self, path: str):
        path = normalize_path(path)
        with self._lock:
            entry = self._entries.get(path)
            if entry is None:
                raise NotFound(path)
            return entry.value

    def meta(self, path: str) -> ParamMeta | None:
        path = normalize_path(path)
        with self._lock:
            entry = self._entries.get(path)
            if entry is None:
                raise NotFound(path)
            return entry.meta

    def list(self, prefix: str = "/") -> list[tuple[str, object, ParamMeta | None]]:
        prefix = normalize_path(prefix)
        with self._lock:
            return sorted(
                (path, e.value, e.meta)
                for path, e in self._entries.items()
                if _is_prefix(prefix, path)
            )

    @property
    def seq(self) -> int:
        with self._lock:
            return self._seq

    # -- subscriptions ----------------------------------------------------

    def subscribe(self, prefix: str = "/", maxlen: int | None = 1024) -> Subscription:
        sub = Subscription(normalize_path(prefix), maxlen=maxlen)
        with self._lock:
            self._subs.append(sub)
        return sub

    def unsubscribe(self, sub: Subscription):
        with self._lock:
            if sub in self._subs:
                self._subs.remove(sub)
        sub.close()

    # -- persistence ------------------------------------------------------

    def save(self, path):
        doc: dict = {}
        with self._lock:
            for ppath, entry in self._entries.items():
                node = doc
                *parents, leaf = ppath[1:].split("/")
                for seg in parents:
                    node = node.setdefault(seg, {})
                record: dict = {"value": entry.value}
                if entry.meta:
                    record["meta"] = {
                        "min": entry.meta.min, "max": entry.meta.max,
                        "step": entry.meta.step, "default": entry.meta.default,
                    }
                node[leaf] = record
            for ppath, raw in self._extras.items():
                node = doc
                *parents, leaf = ppath[1:].split("/")
                for seg in parents:
                    node = node.setdefault(seg, {})
                node.setdefault(leaf, raw)
        text = json.dumps(doc, sort_keys=True, indent=2) + "\n"
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)

    def load(self, path):
        """Replay a saved document through set() (clamping and notifying).

        Undeclared numeric entries are declared from their saved meta;
        unrecognized nodes are preserved and written back on save.
        """
        with open(path, "r", encoding="utf-8") as fh:
            text = fh.read()
        try:
            doc = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ParseError(exc.msg, line=exc.lineno, col=exc.colno) from None
        if not isinstance(doc, dict):
            raise ParseError("top-level document must be an object")
        self._walk_load(doc, "")

    def _walk_load(self, node: dict, prefix: str):
        for key in sorted(node):
            sub = node[key]
            ppath = f"{prefix}/{key}"
            if isinstance(sub, dict) and "value" in sub:
                self._load_entry(ppath, sub)
            elif isinstance(sub, dict):
                self._walk_load(sub, ppath)
            else:
                with self._lock:
                    self._extras[ppath] = sub

    def _load_entry(self, ppath: str, record: dict):
        value = record["value"]
        with self._lock:
            if ppath not in self._entries:
                meta = record.get("meta")
                if isinstance(value, bool) or isinstance(value, str):
                    self.declare(ppath, value)
                elif isinstance(value, (int, float)) and meta:
                    default = meta.get("default", value)
                    lo, hi = meta["min"], meta["max"]
                    self.declare(ppath, type(value)(min(hi, max(lo, default))),
                                 min=lo, max=hi, step=meta.get("step", 1))
                else:
                    self._extras[ppath] = record
                    return
        self.set(ppath, value)
