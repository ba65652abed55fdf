"""Datagram sinks: real UDP or an in-memory capture for tests."""

from __future__ import annotations

import socket
from typing import Protocol


class TransportError(Exception):
    """Destination unresolvable or socket setup failed."""


def parse_hostport(text: str) -> tuple[str, int]:
    """Split 'host:port' for CLI flags; raises ValueError on junk."""
    host, _, port = text.rpartition(":")
    if not host or not port.isdigit():
        raise ValueError(f"expected host:port, got {text!r}")
    return host, int(port)


class DatagramSink(Protocol):
    def send(self, payload: bytes) -> None: ...

    def close(self) -> None: ...


class UdpSink:
    """Fire-and-forget UDP datagrams to one destination."""

    def __init__(self, host: str, port: int):
        try:
            infos = socket.getaddrinfo(host, port, type=socket.SOCK_DGRAM)
        except socket.gaierror as exc:
            raise TransportError(f"cannot resolve {host}:{port}: {exc}") from exc
        family, socktype, proto, _, addr = infos[0]
        self._sock = socket.socket(family, socktype, proto)
        self._sock.connect(addr)

    def send(self, payload: bytes) -> None:
        self._sock.send(payload)

    def close(self) -> None:
        self._sock.close()


class MemorySink:
    """Collects sent datagrams; timing lives in the frames themselves."""

    def __init__(self):
        self.datagrams: list[bytes] = []
        self.closed = False

    def send(self, payload: bytes) -> None:
        self.datagrams.append(payload)

    def close(self) -> None:
        self.closed = True
