import logging
import threading
from collections import Counter, defaultdict
from typing import Callable, Dict, List

from nemacol.nemacol_defs import EventType

logger = logging.getLogger(__name__)


class EventBus:
    """Thread-safe publish/subscribe hub for run events.

    Payloads are keyword arguments; STEP_COMPLETED carries ``row`` and ``state``,
    RUN_ABORTED adds ``error``.
    """

    def __init__(self):
        self._handlers: Dict[EventType, List[Callable]] = defaultdict(list)
        self._published = Counter()
        self._lock = threading.Lock()

    def subscribe(self, event_type: EventType, handler: Callable) -> Callable[[], None]:
        """Attach handler once; returns a callable that detaches it again."""
        with self._lock:
            if handler not in self._handlers[event_type]:
                self._handlers[event_type].append(handler)

        def detach():
            with self._lock:
                if handler in self._handlers[event_type]:
                    self._handlers[event_type].remove(handler)

        return detach

    def publish(self, event_type: EventType, **payload):
        """Run every handler of event_type outside the lock.

        A failing handler aborts the publish: the error is logged and re-raised so a
        broken output sink stops the run instead of silently dropping records.
        """
        with self._lock:
            self._published[event_type] += 1
            handlers = list(self._handlers.get(event_type, ()))

        for handler in handlers:
            try:
                handler(**payload)
            except Exception as e:
                logger.error(f"{event_type.value} handler {getattr(handler, '__name__', handler)!r} failed: {e}")
                raise

    def published(self, event_type: EventType) -> int:
        with self._lock:
            return self._published[event_type]

    def handler_count(self, event_type: EventType) -> int:
        with self._lock:
            return len(self._handlers.get(event_type, ()))
