import pytest

from nemacol.event_engine.event_bus import EventBus
from nemacol.nemacol_defs import EventType


def test_subscribe_is_idempotent_and_detachable():
    bus = EventBus()
    seen = []

    def handler(state):
        seen.append(state)

    detach = bus.subscribe(EventType.SNAPSHOT_DUE, handler)
    bus.subscribe(EventType.SNAPSHOT_DUE, handler)
    assert bus.handler_count(EventType.SNAPSHOT_DUE) == 1
    bus.publish(EventType.SNAPSHOT_DUE, state=1)
    detach()
    bus.publish(EventType.SNAPSHOT_DUE, state=2)
    assert seen == [1]
    assert bus.published(EventType.SNAPSHOT_DUE) == 2
    assert bus.published(EventType.RUN_FINISHED) == 0


def test_failing_handler_stops_publish():
    bus = EventBus()
    seen = []

    def broken(state):
        raise OSError("disk full")

    bus.subscribe(EventType.RUN_FINISHED, broken)
    bus.subscribe(EventType.RUN_FINISHED, lambda state: seen.append(state))
    with pytest.raises(OSError, match="disk full"):
        bus.publish(EventType.RUN_FINISHED, state=0)
    assert seen == []
