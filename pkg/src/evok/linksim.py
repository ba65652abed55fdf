"""Lossy-link emulation: drop, delay, jitter and duplication of datagrams.

Two entry points share one impairment engine:

* ``simulate_session`` -- pure, in-process: takes (send_ms, payload) pairs
  and returns the delivery schedule.  Used for deterministic end-to-end
  tests.
* ``run_proxy`` -- the same decisions applied to live UDP datagrams
  between a listen and a forward address.

Determinism contract (tests and external oracles rely on it): every
inbound datagram consumes exactly three uniform draws from a single
xorshift64* stream, in this order, regardless of the outcome:

    1. drop draw       -- dropped iff u < drop_prob
    2. duplicate draw  -- a second copy is queued iff kept and u < duplicate_prob
    3. jitter draw     -- delay_ms = delay_base_ms + u * delay_jitter_ms

A duplicate shares the original's delay and is delivered right after it.
Deliveries are ordered by scheduled time with FIFO tie-breaking.
"""

from __future__ import annotations

import argparse
import asyncio
import logging
import sys
from dataclasses import dataclass
from typing import Generic, Sequence, TypeVar

from .rng import Xorshift64Star
from .transport import parse_hostport

log = logging.getLogger(__name__)

T = TypeVar("T")


class BindError(Exception):
    """Could not bind the proxy's listen address."""


@dataclass(frozen=True)
class LinkImpairment:
    drop_prob: float = 0.0
    delay_base_ms: int = 0
    delay_jitter_ms: int = 0
    duplicate_prob: float = 0.0
    seed: int = 0

    def __post_init__(self):
        if not 0.0 <= self.drop_prob <= 1.0:
            raise ValueError(f"drop_prob {self.drop_prob} not in [0, 1]")
        if not 0.0 <= self.duplicate_prob <= 1.0:
            raise ValueError(f"duplicate_prob {self.duplicate_prob} not in [0, 1]")
        if self.delay_base_ms < 0:
            raise ValueError("delay_base_ms must be >= 0")
        if not 0 <= self.delay_jitter_ms <= 1000:
            raise ValueError("delay_jitter_ms must be in 0..1000")


@dataclass(frozen=True)
class Decision:
    """Outcome of the three per-datagram draws."""

    keep: bool
    duplicate: bool
    delay_ms: float


class ImpairmentModel:
    """Stateful decision stream; one instance per proxy/session run."""

    def __init__(self, imp: LinkImpairment):
        self.imp = imp
        self._rng = Xorshift64Star(imp.seed)

    def decide(self) -> Decision:
        u_drop = self._rng.uniform()
        u_dup = self._rng.uniform()
        u_jitter = self._rng.uniform()
        keep = u_drop >= self.imp.drop_prob
        return Decision(
            keep=keep,
            duplicate=keep and u_dup < self.imp.duplicate_prob,
            delay_ms=self.imp.delay_base_ms + u_jitter * self.imp.delay_jitter_ms,
        )


@dataclass(frozen=True)
class Delivery(Generic[T]):
    deliver_ms: float
    payload: T
    duplicate: bool = False


def simulate_session(
    sends: Sequence[tuple[int, T]], imp: LinkImpairment
) -> list[Delivery[T]]:
    """Run the impairment model over (send_ms, payload) pairs.

    Send times must be non-decreasing.  Returns deliveries sorted by
    delivery time, FIFO on ties (original before its duplicate).
    """
    last_t = None
    for t, _ in sends:
        if last_t is not None and t < last_t:
            raise ValueError("send times must be non-decreasing")
        last_t = t
    model = ImpairmentModel(imp)
    schedule: list[Delivery[T]] = []
    for t, payload in sends:
        d = model.decide()
        if not d.keep:
            continue
        schedule.append(Delivery(t + d.delay_ms, payload))
        if d.duplicate:
            schedule.append(Delivery(t + d.delay_ms, payload, duplicate=True))
    schedule.sort(key=lambda dv: dv.deliver_ms)  # stable: FIFO tie-break
    return schedule


class _ProxyProtocol(asyncio.DatagramProtocol):
    def __init__(self, model: ImpairmentModel, forward_to: tuple[str, int]):
        self.model = model
        self.forward_to = forward_to
        self.transport: asyncio.DatagramTransport | None = None
        self.received = 0
        self.forwarded = 0

    def connection_made(self, transport):
        self.transport = transport

    def datagram_received(self, data: bytes, addr):
        self.received += 1
        d = self.model.decide()
        if not d.keep:
            return
        copies = 2 if d.duplicate else 1
        loop = asyncio.get_running_loop()
        for _ in range(copies):
            self.forwarded += 1
            if d.delay_ms <= 0:
                self.transport.sendto(data, self.forward_to)
            else:
                loop.call_later(d.delay_ms / 1000.0, self.transport.sendto, data, self.forward_to)


async def run_proxy(
    listen: tuple[str, int],
    forward_to: tuple[str, int],
    imp: LinkImpairment,
    ready: asyncio.Event | None = None,
) -> None:
    """Forward impaired datagrams from ``listen`` to ``forward_to`` until cancelled.

    Decision-for-decision identical to simulate_session for the same seed
    and inbound count; delays are scheduled on the event loop clock.
    Raises BindError if the listen address is unavailable.
    """
    loop = asyncio.get_running_loop()
    model = ImpairmentModel(imp)
    try:
        transport, protocol = await loop.create_datagram_endpoint(
            lambda: _ProxyProtocol(model, forward_to), local_addr=listen
        )
    except OSError as exc:
        raise BindError(f"cannot bind {listen[0]}:{listen[1]}: {exc}") from exc
    log.info("proxy up: %s:%d -> %s:%d", listen[0], listen[1], *forward_to)
    if ready is not None:
        ready.set()
    try:
        await asyncio.Event().wait()  # run until cancelled
    finally:
        transport.close()
        log.info("proxy done: received=%d forwarded=%d", protocol.received, protocol.forwarded)


def main(argv: Sequence[str] | None = None) -> int:
    parser = argparse.ArgumentParser(
        prog="evok-sim", description="UDP impairment proxy (drop/delay/jitter/duplicate)"
    )
    parser.add_argument("--listen", type=parse_hostport, required=True)
    parser.add_argument("--forward", type=parse_hostport, required=True)
    parser.add_argument("--drop", type=float, default=0.0)
    parser.add_argument("--delay-ms", type=int, default=0)
    parser.add_argument("--jitter-ms", type=int, default=0)
    parser.add_argument("--dup", type=float, default=0.0)
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO, format="%(asctime)s %(levelname)s %(message)s")
    try:
        imp = LinkImpairment(
            drop_prob=args.drop,
            delay_base_ms=args.delay_ms,
            delay_jitter_ms=args.jitter_ms,
            duplicate_prob=args.dup,
            seed=args.seed,
        )
    except ValueError as exc:
        parser.error(str(exc))
    try:
        asyncio.run(run_proxy(args.listen, args.forward, imp))
    except BindError as exc:
        log.error("%s", exc)
        return 1
    except KeyboardInterrupt:
        pass
    return 0


if __name__ == "__main__":
    sys.exit(main())
