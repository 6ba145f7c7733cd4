"""One-time challenge session store with TTL.

Both services key pending ceremonies by an opaque 16-byte token and need
atomic consume-once semantics under concurrent finish attempts. Ended
sessions leave tombstones (holding no ceremony data) so a late finish can
be answered precisely: replayed if it was consumed, expired if it timed
out, unknown if it never existed.
"""

from __future__ import annotations

import secrets
import threading
import time
from dataclasses import dataclass
from typing import Callable, Generic, TypeVar

from .core import b64_url_encode
from .errors import SessionExpired, SessionReplayed, UnknownSession

_CONSUMED = "consumed"
_EXPIRED = "expired"

T = TypeVar("T")


@dataclass
class _Entry(Generic[T]):
    payload: T
    expires_at: float


class OneTimeSessionStore(Generic[T]):
    def __init__(self, ttl_seconds: float, clock: Callable[[], float] = time.monotonic) -> None:
        self._ttl = ttl_seconds
        self._clock = clock
        self._lock = threading.Lock()
        self._pending: dict[str, _Entry[T]] = {}
        self._tombstones: dict[str, tuple[str, float]] = {}

    def create(self, payload: T) -> str:
        """Store a payload; returns the fresh opaque session token."""
        token = b64_url_encode(secrets.token_bytes(16))
        with self._lock:
            self._pending[token] = _Entry(payload, self._clock() + self._ttl)
        return token

    def consume(self, token: str) -> T:
        """Atomically take the payload; a session can only ever yield once."""
        now = self._clock()
        with self._lock:
            self._prune(now)
            tombstone = self._tombstones.get(token)
            if tombstone is not None:
                if tombstone[0] == _CONSUMED:
                    raise SessionReplayed("session was already consumed")
                raise SessionExpired("session expired before finish")
            entry = self._pending.pop(token, None)
            if entry is None:
                raise UnknownSession("no such session")
            if entry.expires_at < now:
                self._tombstones[token] = (_EXPIRED, now)
                raise SessionExpired("session expired before finish")
            self._tombstones[token] = (_CONSUMED, now)
            return entry.payload

    def live_count(self) -> int:
        """Number of unexpired pending sessions; does not mutate the store."""
        now = self._clock()
        with self._lock:
            return sum(1 for entry in self._pending.values() if entry.expires_at >= now)

    def _prune(self, now: float) -> None:
        expired = [t for t, e in self._pending.items() if e.expires_at < now]
        for token in expired:
            del self._pending[token]
            self._tombstones.setdefault(token, (_EXPIRED, now))
        # Bound tombstone growth; after ten TTLs a late finish degrading to
        # UnknownSession is acceptable.
        horizon = now - 10 * self._ttl
        stale = [t for t, (_, when) in self._tombstones.items() if when < horizon]
        for token in stale:
            del self._tombstones[token]
