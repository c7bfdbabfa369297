"""Streaming hub core: ingest, health check, aggregation, distribution.

Synchronous and clock-free; the network layer drives it.  Sessions feed
per-tick buffers through a small pool of in-process ingest nodes, each
tick closes into an aggregation window, and every few ticks the closed
windows concatenate into a distribution interval whose earliest bits go
to every subscribed lab (the same prefix for all of them).  Everything
that moves is appended to a monitor log from which lab streams can be
reconstructed bit for bit.
"""

from __future__ import annotations

import hashlib
import json
import time
from dataclasses import dataclass, field

import numpy as np

from .predictor import PredictorState, Prediction

TICK_SECONDS = 0.5
TICKS_PER_INTERVAL = 4
MAX_BITS_PER_TICK = 10
DEFAULT_ARCHIVE_LEN = 200_000


class UnknownSessionError(KeyError):
    pass


class SubscriptionError(ValueError):
    pass


@dataclass
class UserSession:
    user_id: str
    node_id: int
    window_count: int = 0
    flagged: bool = False
    total_bits: int = 0
    last_seen: float = 0.0
    flagged_at_tick: int | None = None


@dataclass
class BitRecord:
    bit: int
    user_id: str
    origin_ts: float
    tick_id: int
    seq: int
    delivered_to: set[str] = field(default_factory=set)


@dataclass
class LabSubscription:
    lab_id: str
    rate: int
    burst: bool = False
    delivered_total: int = 0
    starved_intervals: int = 0
    credit: int = 0
    pending_rate: int | None = None
    order: int = 0


@dataclass(frozen=True)
class Delivery:
    lab_id: str
    interval_id: int
    bits: str
    archived_from: int | None  # payload index where archive fill starts

    @property
    def live_bits(self) -> str:
        return self.bits if self.archived_from is None else self.bits[: self.archived_from]


@dataclass(frozen=True)
class TickBuffer:
    tick_id: int
    records: tuple[BitRecord, ...]

    def payload(self) -> str:
        return "".join(str(r.bit) for r in self.records)


class ArchiveReservoir:
    """Pre-recorded bits used to fill delivery deficits.

    Bits are marked archived in deliveries and never counted as live.
    Labs drawing from the same interval share the same archive segment,
    so the shared-prefix rule extends across the fill.
    """

    def __init__(self, bits: str | None = None, seed: int = 0, length: int = DEFAULT_ARCHIVE_LEN):
        if bits is None:
            rng = np.random.default_rng(seed ^ 0xA5C1)
            bits = "".join("1" if b else "0" for b in rng.integers(0, 2, size=length))
        self.bits = bits
        self.cursor = 0

    def peek(self, n: int) -> str:
        return self.bits[self.cursor:self.cursor + n]

    def advance(self, n: int) -> None:
        self.cursor = min(len(self.bits), self.cursor + n)


class MonitorLog:
    """Append-only record stream, optionally mirrored to a JSON-lines file.

    A failing file sink marks the log degraded and keeps recording in
    memory; distribution must never block on monitor storage.
    """

    def __init__(self, path=None):
        self.records: list[dict] = []
        self.sink_failed = False
        # line-buffered so an abrupt process death loses at most one record
        self._fh = open(path, "w", buffering=1) if path else None

    def append(self, kind: str, **fields) -> dict:
        record = {"kind": kind, **fields}
        self.records.append(record)
        if self._fh is not None and not self.sink_failed:
            try:
                self._fh.write(json.dumps(record, separators=(",", ":")) + "\n")
            except OSError:
                self.sink_failed = True
        return record

    def close(self) -> None:
        if self._fh is not None:
            try:
                self._fh.flush()
                self._fh.close()
            except OSError:
                self.sink_failed = True
            self._fh = None

    def __iter__(self):
        return iter(self.records)


def plan_deliveries(
    live: str,
    subs: list[LabSubscription],
    archive: ArchiveReservoir,
    interval_id: int,
) -> dict[str, Delivery]:
    """Pure slicing step shared by live distribution and log replay.

    Every lab sees the same earliest-bits prefix; non-burst labs top up
    any deficit from the shared archive segment, burst labs accumulate
    the deficit as credit instead and drain it when live supply allows.
    Mutates the subscriptions' tallies.
    """
    deliveries: dict[str, Delivery] = {}
    archive_used = 0
    for sub in sorted(subs, key=lambda s: s.order):
        if sub.burst:
            want = sub.rate + sub.credit
            take = min(want, len(live))
            payload = live[:take]
            sub.credit = want - take
            starved = sub.credit > 0
            archived_from = None
        else:
            want = sub.rate
            take = min(want, len(live))
            deficit = want - take
            fill = archive.peek(deficit) if deficit else ""
            archive_used = max(archive_used, len(fill))
            payload = live[:take] + fill
            archived_from = take if fill else None
            starved = deficit > 0
        sub.delivered_total += len(payload)
        if starved:
            sub.starved_intervals += 1
        deliveries[sub.lab_id] = Delivery(
            lab_id=sub.lab_id, interval_id=interval_id,
            bits=payload, archived_from=archived_from,
        )
    archive.advance(archive_used)
    return deliveries


class HubCore:
    """Single logical aggregator behind any number of ingest sessions."""

    def __init__(
        self,
        seed: int = 0,
        n_nodes: int = 2,
        max_bits_per_tick: int = MAX_BITS_PER_TICK,
        ticks_per_interval: int = TICKS_PER_INTERVAL,
        archive: ArchiveReservoir | None = None,
        log: MonitorLog | None = None,
        oracle_context: int = 3,
    ):
        self.seed = seed
        self.n_nodes = max(1, n_nodes)
        self.max_bits_per_tick = max_bits_per_tick
        self.ticks_per_interval = ticks_per_interval
        self.archive = archive if archive is not None else ArchiveReservoir(seed=seed)
        self.log = log if log is not None else MonitorLog()
        self.oracle_context = oracle_context

        self.sessions: dict[str, UserSession] = {}
        self.subscriptions: dict[str, LabSubscription] = {}
        self.predictors: dict[str, PredictorState] = {}
        self._open_tick: list[BitRecord] = []
        self._closed_ticks: list[TickBuffer] = []
        self.tick_id = 0
        self.interval_id = 0
        self._seq = 0
        self._sub_order = 0
        self.last_tick_total = 0
        self.last_interval_deliveries: dict[str, int] = {}
        self._missions: dict[str, int] = {}

        self.log.append(
            "header", seed=seed, archive_len=len(self.archive.bits),
            max_bits_per_tick=max_bits_per_tick, ticks_per_interval=ticks_per_interval,
        )

    # -- sessions ---------------------------------------------------------

    def register(self, user_id: str, now: float | None = None) -> UserSession:
        session = self.sessions.get(user_id)
        if session is None:
            session = UserSession(
                user_id=user_id, node_id=len(self.sessions) % self.n_nodes,
                last_seen=now if now is not None else time.time(),
            )
            self.sessions[user_id] = session
        return session

    def ingest(self, user_id: str, bits: str, origin_ts: float | None = None,
               now: float | None = None) -> int:
        """Append a session's bits to the open tick, health-checking rate.

        Bits beyond the per-tick ceiling flag the session; the excess and
        everything the session sends afterwards is dropped silently (the
        game keeps responding so the sender cannot tell).
        """
        session = self.sessions.get(user_id)
        if session is None:
            raise UnknownSessionError(user_id)
        bad = set(bits) - {"0", "1"}
        if bad:
            raise ValueError(f"payload must be ASCII bits, got {sorted(bad)}")
        now = now if now is not None else time.time()
        origin_ts = origin_ts if origin_ts is not None else now
        session.last_seen = now

        predictor = self.predictors.setdefault(
            user_id, PredictorState(l_max=self.oracle_context))
        accepted = 0
        dropped = 0
        for ch in bits:
            bit = int(ch)
            predictor.observe(bit)  # the Oracle keeps modelling flagged users too
            if session.flagged:
                dropped += 1
                continue
            if session.window_count >= self.max_bits_per_tick:
                session.flagged = True
                session.flagged_at_tick = self.tick_id
                self.log.append("flag", user=user_id, tick=self.tick_id)
                dropped += 1
                continue
            session.window_count += 1
            session.total_bits += 1
            self._open_tick.append(BitRecord(
                bit=bit, user_id=user_id, origin_ts=origin_ts,
                tick_id=self.tick_id, seq=self._seq,
            ))
            self._seq += 1
            accepted += 1
        if dropped:
            self.log.append("dropped", user=user_id, ts=origin_ts, n=dropped)
        return accepted

    def predict(self, user_id: str) -> Prediction:
        predictor = self.predictors.setdefault(
            user_id, PredictorState(l_max=self.oracle_context))
        return predictor.predict()

    # -- aggregation ------------------------------------------------------

    def tick(self) -> TickBuffer:
        """Close the current aggregation window in global arrival order."""
        buffer = TickBuffer(tick_id=self.tick_id, records=tuple(self._open_tick))
        self._open_tick = []
        self._closed_ticks.append(buffer)
        self.last_tick_total = len(buffer.records)
        for session in self.sessions.values():
            session.window_count = 0
        self.tick_id += 1
        return buffer

    # -- labs -------------------------------------------------------------

    def subscribe(self, lab_id: str, rate: int, burst: bool = False) -> LabSubscription:
        if lab_id in self.subscriptions:
            raise SubscriptionError(f"lab {lab_id!r} already subscribed")
        if rate < 0:
            raise SubscriptionError("rate must be >= 0")
        sub = LabSubscription(lab_id=lab_id, rate=rate, burst=burst, order=self._sub_order)
        self._sub_order += 1
        self.subscriptions[lab_id] = sub
        self.log.append("subscribe", lab=lab_id, rate=rate, burst=burst,
                        interval=self.interval_id)
        return sub

    def set_rate(self, lab_id: str, rate: int) -> LabSubscription:
        sub = self.subscriptions.get(lab_id)
        if sub is None:
            raise SubscriptionError(f"unknown lab {lab_id!r}")
        if rate < 0:
            raise SubscriptionError("rate must be >= 0")
        sub.pending_rate = rate  # effective next interval
        self.log.append("rate", lab=lab_id, rate=rate, interval=self.interval_id)
        return sub

    def distribute(self) -> dict[str, Delivery]:
        """Close the pending interval and deliver its prefix to every lab."""
        records: list[BitRecord] = []
        for buf in self._closed_ticks:
            records.extend(buf.records)
        self._closed_ticks = []
        live = "".join(str(r.bit) for r in records)
        interval_id = self.interval_id
        self.interval_id += 1

        deliveries = plan_deliveries(
            live, list(self.subscriptions.values()), self.archive, interval_id)

        for delivery in deliveries.values():
            n_live = len(delivery.live_bits)
            for rec in records[:n_live]:
                rec.delivered_to.add(delivery.lab_id)

        for rec in records:
            self.log.append(
                "bit", bit=rec.bit, user=rec.user_id, origin_ts=rec.origin_ts,
                tick=rec.tick_id, seq=rec.seq, interval=interval_id,
                labs=sorted(rec.delivered_to),
            )
        for lab_id in sorted(deliveries):
            delivery = deliveries[lab_id]
            self.log.append(
                "delivery", lab=lab_id, interval=interval_id,
                payload=delivery.bits, archived_from=delivery.archived_from,
            )
            self.last_interval_deliveries[lab_id] = len(delivery.bits)

        # apply rate changes for the next interval
        for sub in self.subscriptions.values():
            if sub.pending_rate is not None:
                sub.rate = sub.pending_rate
                sub.pending_rate = None
        return deliveries

    def flush(self) -> dict[str, Delivery]:
        """Distribute whatever closed ticks remain (shutdown path)."""
        if not self._closed_ticks:
            return {}
        return self.distribute()

    # -- feedback and audit -------------------------------------------------

    def mission_seed(self, user_id: str) -> int:
        index = self._missions.get(user_id, 0)
        self._missions[user_id] = index + 1
        digest = hashlib.sha256(f"{self.seed}:{user_id}:{index}".encode()).digest()
        return int.from_bytes(digest[:8], "big")

    def feedback(self, user_id: str, n: int, seed: int | None = None) -> list[dict]:
        """Per-lab usage report for a finished mission of ``n`` bits.

        Counts are independent binomial draws with p = (bits sent to the
        lab last interval) / (bits entered last tick), capped so the
        total never exceeds ``n``.
        """
        if user_id not in self.sessions:
            raise UnknownSessionError(user_id)
        if not self.subscriptions:
            return []
        seed = self.mission_seed(user_id) if seed is None else seed
        total = self.last_tick_total
        rng = np.random.default_rng(seed)
        report = []
        remaining = n
        for lab_id in sorted(self.subscriptions):
            if total <= 0:
                report.append({"lab": lab_id, "count": 0})
                continue
            p = min(1.0, self.last_interval_deliveries.get(lab_id, 0) / total)
            count = min(int(rng.binomial(n, p)), remaining)
            remaining -= count
            report.append({"lab": lab_id, "count": count})
        return report

    def mission_done(self, user_id: str, n: int, now: float | None = None) -> list[dict]:
        now = now if now is not None else time.time()
        self.log.append("mission", user=user_id, ts=now, n=n)
        return self.feedback(user_id, n)

    def close(self) -> None:
        self.flush()
        # anything still in the open tick is logged undelivered
        for rec in self._open_tick:
            self.log.append(
                "bit", bit=rec.bit, user=rec.user_id, origin_ts=rec.origin_ts,
                tick=rec.tick_id, seq=rec.seq, interval=None, labs=[],
            )
        self._open_tick = []
        self.log.close()


# -- audit ------------------------------------------------------------------

AUDIT_TOTAL_THRESHOLD = 2000     # bits; only heavy contributors are examined
AUDIT_GAP_FLOOR = 1.0            # seconds between missions a human needs
AUDIT_MISSION_CEILING = 600      # bits in a single mission
AUDIT_RATE_CEILING = 20.0        # sustained bits/second over the whole log


@dataclass(frozen=True)
class AuditReport:
    suspicious_users: tuple[str, ...]
    contamination: dict[str, float]
    post_flag_contamination: dict[str, float]
    flagged_users: tuple[str, ...]
    total_delivered: dict[str, int]


def audit(
    records,
    gap_floor: float = AUDIT_GAP_FLOOR,
    mission_ceiling: int = AUDIT_MISSION_CEILING,
    rate_ceiling: float = AUDIT_RATE_CEILING,
    total_threshold: int = AUDIT_TOTAL_THRESHOLD,
) -> AuditReport:
    """Post-hoc sweep of a monitor log for robot-like contributors.

    A user is suspicious when their total contribution is heavy and
    their timing is implausible: missions spaced closer than the gap
    floor, single missions above the bits ceiling, or a sustained input
    rate above the health-check ceiling.
    """
    totals: dict[str, int] = {}
    first_ts: dict[str, float] = {}
    last_ts: dict[str, float] = {}
    missions: dict[str, list[tuple[float, int]]] = {}
    delivered: dict[str, int] = {}
    delivered_by_user: dict[str, dict[str, int]] = {}
    post_flag: dict[str, int] = {}
    flag_tick: dict[str, int] = {}

    for rec in records:
        kind = rec.get("kind")
        if kind == "bit":
            user = rec["user"]
            totals[user] = totals.get(user, 0) + 1
            ts = rec.get("origin_ts", 0.0)
            first_ts.setdefault(user, ts)
            last_ts[user] = ts
            for lab in rec.get("labs", ()):
                delivered[lab] = delivered.get(lab, 0) + 1
                delivered_by_user.setdefault(lab, {})
                delivered_by_user[lab][user] = delivered_by_user[lab].get(user, 0) + 1
                if user in flag_tick and rec.get("tick", 0) > flag_tick[user]:
                    post_flag[lab] = post_flag.get(lab, 0) + 1
        elif kind == "mission":
            missions.setdefault(rec["user"], []).append((rec["ts"], rec["n"]))
        elif kind == "flag":
            flag_tick.setdefault(rec["user"], rec["tick"])

    suspicious = []
    for user, total in totals.items():
        if total <= total_threshold:
            continue
        reasons = []
        span = max(0.0, last_ts[user] - first_ts[user])
        if span > 0 and total / span > rate_ceiling:
            reasons.append("rate")
        user_missions = sorted(missions.get(user, []))
        gaps = [b[0] - a[0] for a, b in zip(user_missions, user_missions[1:])]
        if gaps and min(gaps) < gap_floor:
            reasons.append("gap")
        if user_missions and max(n for _, n in user_missions) > mission_ceiling:
            reasons.append("mission-size")
        if reasons:
            suspicious.append(user)

    contamination = {}
    post_flag_contamination = {}
    for lab, total in delivered.items():
        bad = sum(delivered_by_user[lab].get(u, 0) for u in suspicious)
        contamination[lab] = bad / total if total else 0.0
        post_flag_contamination[lab] = post_flag.get(lab, 0) / total if total else 0.0

    return AuditReport(
        suspicious_users=tuple(sorted(suspicious)),
        contamination=contamination,
        post_flag_contamination=post_flag_contamination,
        flagged_users=tuple(sorted(flag_tick)),
        total_delivered=delivered,
    )
