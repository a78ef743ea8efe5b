"""End-to-end protocol simulation over real byte streams.

Each database runs in its own thread behind a single duplex connection
and sees nothing but that connection, its replicated store, and the
layout: there is no channel between servers. A trusted dealer provisions
the replicated store (messages plus shared key) before any session. The
client speaks the wire protocol, decodes, and keeps per-session records.

Session records are pure protocol outcomes, so a run is reproducible
bit for bit from (params, seed) regardless of transport.
"""

from __future__ import annotations

import threading
from contextlib import contextmanager
from dataclasses import dataclass
from typing import Optional, Sequence

from ..bits import BitString
from ..params import SystemParams
from ..scheme import (MessageStore, PartitionLayout, PathClass, QueryVector,
                      answer, decode, make_queries, path_distribution,
                      plan_partition, residual_view, sample_path)
from ..seeding import derived_rng
from . import wire
from .transport import TcpListener, memory_pair, tcp_connect

CSV_HEADER = "session_id,desired,class,bits,leaked_bits"


class SessionError(Exception):
    """A retrieval session failed; nothing was partially decoded."""


@dataclass(frozen=True)
class SessionRecord:
    session_id: int
    desired: int
    path_class: PathClass
    bits_downloaded: int
    decode_ok: bool
    leaked_bits: int

    def to_csv_row(self) -> str:
        return (f"{self.session_id},{self.desired},{self.path_class.value},"
                f"{self.bits_downloaded},{self.leaked_bits}")


def provision(params: SystemParams, layout: PartitionLayout,
              rng) -> MessageStore:
    """Dealer step: draw messages and shared key, replicated to every DB."""
    return MessageStore.random(params, layout, rng)


def serve_connection(db_index: int, store: MessageStore,
                     layout: PartitionLayout, conn) -> None:
    """Answer queries on one connection until it closes.

    Framing damage is unrecoverable on a byte stream, so it draws one
    Error frame and a hangup; bad-but-framed requests draw an Error frame
    and the connection continues.
    """
    try:
        while True:
            try:
                frame = wire.read_frame(conn)
            except wire.WireError as exc:
                conn.send(wire.encode_error(wire.ERR_MALFORMED, str(exc)))
                return
            if frame is None:
                return
            if frame.msg_type == wire.MSG_HELLO:
                try:
                    wire.decode_hello(frame.payload)
                except wire.WireError as exc:
                    conn.send(wire.encode_error(wire.ERR_MALFORMED, str(exc)))
                    continue
                conn.send(wire.encode_hello())
            elif frame.msg_type == wire.MSG_QUERY:
                try:
                    session_id, indices = wire.decode_query(frame.payload)
                except wire.WireError as exc:
                    conn.send(wire.encode_error(wire.ERR_MALFORMED, str(exc)))
                    continue
                if len(indices) != len(store.messages) or any(
                        v > layout.subpackets_per_part for v in indices):
                    conn.send(wire.encode_error(
                        wire.ERR_BAD_QUERY, "query vector out of range"))
                    continue
                ans = answer(store, layout, QueryVector(indices))
                conn.send(wire.encode_answer(session_id, ans))
            else:
                conn.send(wire.encode_error(
                    wire.ERR_UNKNOWN_TYPE,
                    f"unknown message type {frame.msg_type:#x}"))
    finally:
        conn.close()


class ServerHandle:
    """A database thread bound to exactly one connection source."""

    def __init__(self, db_index: int, store: MessageStore,
                 layout: PartitionLayout):
        self.db_index = db_index
        self._store = store
        self._layout = layout
        self._thread: Optional[threading.Thread] = None
        self._listener: Optional[TcpListener] = None

    def start_memory(self):
        client_end, server_end = memory_pair()
        self._thread = threading.Thread(
            target=serve_connection,
            args=(self.db_index, self._store, self._layout, server_end),
            daemon=True)
        self._thread.start()
        return client_end

    def start_tcp(self) -> int:
        self._listener = TcpListener()

        def accept_loop():
            while True:
                try:
                    conn = self._listener.accept()
                except OSError:
                    return
                serve_connection(self.db_index, self._store, self._layout,
                                 conn)

        self._thread = threading.Thread(target=accept_loop, daemon=True)
        self._thread.start()
        return self._listener.port

    def stop(self) -> None:
        if self._listener is not None:
            self._listener.close()


@contextmanager
def deployment(params: SystemParams, layout: PartitionLayout,
               store: MessageStore, transport: str = "memory"):
    """Bring up N servers and yield N connected, greeted client endpoints."""
    handles = [ServerHandle(d, store, layout)
               for d in range(params.n_databases)]
    conns = []
    try:
        for h in handles:
            if transport == "memory":
                conns.append(h.start_memory())
            elif transport == "tcp":
                conns.append(tcp_connect(h.start_tcp()))
            else:
                raise ValueError(f"unknown transport {transport!r}")
        for conn in conns:
            conn.send(wire.encode_hello())
            frame = wire.read_frame(conn)
            if frame is None or frame.msg_type != wire.MSG_HELLO:
                raise SessionError("handshake failed")
        yield conns
    finally:
        for conn in conns:
            conn.close()
        for h in handles:
            h.stop()


def _run_session(params: SystemParams, layout: PartitionLayout, desired: int,
                 conns: Sequence, rng, session_id: int, relabel: bool,
                 expected: Optional[BitString]):
    """One full session; returns (decoded, record, queries, upload_bits)."""
    if not 0 <= desired < params.n_messages:
        raise ValueError("desired message index out of range")
    if len(conns) != params.n_databases:
        raise ValueError("need one connection per database")
    dist = path_distribution(params)
    choice = sample_path(dist, desired, rng)
    queries = make_queries(choice, params)
    targets = list(range(params.n_databases))
    if relabel:
        rng.shuffle(targets)
    upload_bits = 0
    for d, qv in enumerate(queries):
        data = wire.encode_query(session_id, qv.indices)
        upload_bits += 8 * len(data)
        conns[targets[d]].send(data)
    answers = []
    for d in range(params.n_databases):
        frame = wire.read_frame(conns[targets[d]])
        if frame is None:
            raise SessionError("connection closed mid-session")
        if frame.msg_type == wire.MSG_ERROR:
            code, text = wire.decode_error(frame.payload)
            raise SessionError(f"server error {code}: {text}")
        if frame.msg_type != wire.MSG_ANSWER:
            raise SessionError(f"unexpected frame type {frame.msg_type:#x}")
        sid, ans = wire.decode_answer(frame.payload)
        if sid != session_id:
            raise SessionError("answer for a different session")
        if ans.masked.nbits != layout.key_bits or ans.open.nbits not in (
                0, layout.open_subpacket_bits):
            raise SessionError("answer part widths do not match layout")
        answers.append(ans)
    decoded = decode(answers, queries, desired)
    residual = residual_view(answers, queries, decoded, layout)
    bits_down = sum(a.masked.nbits + a.open.nbits for a in answers)
    ok = decoded == expected if expected is not None else True
    record = SessionRecord(session_id, desired, choice.path_class,
                           bits_down, ok, residual.leaked_bits)
    return decoded, record, queries, upload_bits


def retrieve(params: SystemParams, layout: PartitionLayout, desired: int,
             conns: Sequence, rng, session_id: int = 0,
             relabel: bool = True,
             expected: Optional[BitString] = None,
             ) -> tuple[BitString, SessionRecord]:
    """Run one full retrieval session over already-connected endpoints.

    Validates the desired index before anything is sent. With relabel on,
    a uniform permutation reassigns which server answers which query;
    stores are replicated, so this changes no outcome.
    """
    decoded, record, _, _ = _run_session(params, layout, desired, conns, rng,
                                         session_id, relabel, expected)
    return decoded, record


@dataclass
class TrialStats:
    """Aggregates over a run; structure_counts feeds the query auditor."""

    records: list[SessionRecord]
    mean_cost: float
    low_frequency: float
    mean_leaked_bits: float
    mean_upload_bits: float
    decode_failures: int
    structure_counts: dict
    trials_per_message: dict


def run_trials(trials: int, params: SystemParams, seed: int,
               transport: str = "memory", relabel: bool = True,
               desired: Optional[int] = None,
               layout: Optional[PartitionLayout] = None) -> TrialStats:
    """Run `trials` sessions against a fresh deployment.

    The desired index cycles through all K messages unless pinned.
    Per-session RNG streams are derived from (seed, session index), so
    records are reproducible and independent of transport.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    if layout is None:
        layout = plan_partition(params)
    store = provision(params, layout, derived_rng(seed, "store"))
    records = []
    structure_counts: dict = {}
    per_message: dict = {}
    upload_bits = 0
    with deployment(params, layout, store, transport) as conns:
        for i in range(trials):
            k = desired if desired is not None else i % params.n_messages
            rng = derived_rng(seed, "session", i)
            _, record, queries, up = _run_session(
                params, layout, k, conns, rng, i, relabel, store.messages[k])
            records.append(record)
            upload_bits += up
            per_message[k] = per_message.get(k, 0) + 1
            for db, qv in enumerate(queries):
                cell = (k, db, qv.indices)
                structure_counts[cell] = structure_counts.get(cell, 0) + 1
    n_low = sum(1 for r in records if r.path_class is PathClass.LOW)
    l = params.message_bits
    return TrialStats(
        records=records,
        mean_cost=sum(r.bits_downloaded for r in records) / (trials * l),
        low_frequency=n_low / trials,
        mean_leaked_bits=sum(r.leaked_bits for r in records) / trials,
        mean_upload_bits=upload_bits / trials,
        decode_failures=sum(1 for r in records if not r.decode_ok),
        structure_counts=structure_counts,
        trials_per_message=per_message,
    )


def records_to_csv(records: Sequence[SessionRecord], fh) -> None:
    fh.write(CSV_HEADER + "\n")
    for r in records:
        fh.write(r.to_csv_row() + "\n")
