"""In-process topic bus with per-subscriber bounded FIFO inboxes.

Publishers fan out to every subscriber in registration order; each
subscriber owns a deque capped at the configured depth, dropping the
oldest message under backpressure (control loops prefer fresh data over
complete history). Delivery happens when the pump drains the inboxes,
which keeps virtual-clock runs fully deterministic.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from typing import Any, Callable, Optional

DEFAULT_QUEUE_CAP = 64


class UnknownTopic(Exception):
    pass


class SchemaMismatch(Exception):
    pass


@dataclass(frozen=True)
class Topic:
    name: str
    schema: type

    def validate(self, message: Any):
        if not isinstance(message, self.schema):
            raise SchemaMismatch(
                f"{self.name} expects {self.schema.__name__}, got {type(message).__name__}"
            )


@dataclass(frozen=True)
class Envelope:
    topic: str
    timestamp_ms: int
    message: Any


@dataclass(frozen=True)
class DeliveryReceipt:
    topic: str
    delivered: int
    dropped: int


@dataclass
class _Subscription:
    callback: Callable[[Envelope], None]
    inbox: deque = field(default_factory=deque)
    cap: int = DEFAULT_QUEUE_CAP


class Bus:
    def __init__(self, queue_cap: int = DEFAULT_QUEUE_CAP):
        self._topics: dict[str, Topic] = {}
        self._subs: dict[str, list[_Subscription]] = {}
        self._queue_cap = queue_cap

    def register(self, topic: Topic):
        if topic.name in self._topics:
            raise ValueError(f"topic {topic.name} already registered")
        self._topics[topic.name] = topic
        self._subs[topic.name] = []

    def topic(self, name: str) -> Topic:
        try:
            return self._topics[name]
        except KeyError:
            raise UnknownTopic(name) from None

    def subscribe(self, name: str, callback: Callable[[Envelope], None], cap: Optional[int] = None):
        sub = _Subscription(callback=callback, cap=cap or self._queue_cap)
        self._subs[self.topic(name).name].append(sub)
        return sub

    def publish(self, name: str, message: Any, timestamp_ms: int) -> DeliveryReceipt:
        topic = self.topic(name)
        topic.validate(message)
        env = Envelope(name, timestamp_ms, message)
        delivered = dropped = 0
        for sub in self._subs[name]:
            if len(sub.inbox) >= sub.cap:
                sub.inbox.popleft()
                dropped += 1
            sub.inbox.append(env)
            delivered += 1
        return DeliveryReceipt(name, delivered, dropped)

    def pump(self, max_rounds: int = 1000) -> int:
        """Drain all inboxes until quiescent; returns messages handled.

        Callbacks may publish further messages; rounds repeat until no
        inbox holds anything (bounded to catch runaway feedback loops).
        """
        handled = 0
        for _ in range(max_rounds):
            progressed = False
            for subs in self._subs.values():
                for sub in subs:
                    while sub.inbox:
                        env = sub.inbox.popleft()
                        sub.callback(env)
                        handled += 1
                        progressed = True
            if not progressed:
                return handled
        raise RuntimeError("bus pump did not quiesce")
