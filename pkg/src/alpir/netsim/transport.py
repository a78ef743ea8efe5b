"""Byte-stream transports: an in-process channel and localhost TCP.

Both expose the same minimal blocking interface (send / recv / close), so
the protocol layer cannot tell them apart; runs over either must produce
identical session records.
"""

from __future__ import annotations

import socket
from queue import SimpleQueue


class ChannelConnection:
    """One end of an in-memory duplex byte stream."""

    def __init__(self, inbox: SimpleQueue, outbox: SimpleQueue):
        self._inbox = inbox
        self._outbox = outbox
        self._buffer = b""
        self._eof = False
        self._closed = False

    def send(self, data: bytes) -> None:
        if self._closed:
            raise OSError("connection closed")
        self._outbox.put(bytes(data))

    def recv(self, max_n: int) -> bytes:
        if max_n <= 0:
            raise ValueError("max_n must be positive")
        while not self._buffer and not self._eof:
            chunk = self._inbox.get()
            if chunk is None:
                self._eof = True
            else:
                self._buffer += chunk
        if not self._buffer:
            return b""
        out, self._buffer = self._buffer[:max_n], self._buffer[max_n:]
        return out

    def close(self) -> None:
        if not self._closed:
            self._closed = True
            self._outbox.put(None)


def memory_pair() -> tuple[ChannelConnection, ChannelConnection]:
    a_to_b: SimpleQueue = SimpleQueue()
    b_to_a: SimpleQueue = SimpleQueue()
    return (ChannelConnection(b_to_a, a_to_b),
            ChannelConnection(a_to_b, b_to_a))


class SocketConnection:
    """Thin adapter giving a socket the channel interface."""

    def __init__(self, sock: socket.socket):
        self._sock = sock

    def send(self, data: bytes) -> None:
        self._sock.sendall(data)

    def recv(self, max_n: int) -> bytes:
        return self._sock.recv(max_n)

    def close(self) -> None:
        try:
            self._sock.shutdown(socket.SHUT_RDWR)
        except OSError:
            pass
        self._sock.close()


class TcpListener:
    """Loopback listener on an ephemeral port."""

    def __init__(self):
        self._sock = socket.socket(socket.AF_INET, socket.SOCK_STREAM)
        self._sock.setsockopt(socket.SOL_SOCKET, socket.SO_REUSEADDR, 1)
        self._sock.bind(("127.0.0.1", 0))
        self._sock.listen(4)

    @property
    def port(self) -> int:
        return self._sock.getsockname()[1]

    def accept(self) -> SocketConnection:
        sock, _ = self._sock.accept()
        sock.setsockopt(socket.IPPROTO_TCP, socket.TCP_NODELAY, 1)
        return SocketConnection(sock)

    def close(self) -> None:
        self._sock.close()


def tcp_connect(port: int) -> SocketConnection:
    sock = socket.create_connection(("127.0.0.1", port))
    sock.setsockopt(socket.IPPROTO_TCP, socket.TCP_NODELAY, 1)
    return SocketConnection(sock)
