"""Deterministic reconstruction of lab input streams from a monitor log.

The log is the authority: logged bits rebuild each distribution
interval, logged subscription and rate events rebuild the lab timeline,
and the same slicing code that drove the live run replays the
deliveries.  A mismatch against the logged payloads means the log or the
hub is broken, and is reported as a hard error.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

from .hub import ArchiveReservoir, Delivery, LabSubscription, plan_deliveries


class LogFormatError(ValueError):
    pass


class ReplayMismatchError(RuntimeError):
    pass


@dataclass
class ParsedLog:
    header: dict
    records: list[dict]
    bit_records: list[dict] = field(default_factory=list)
    deliveries: dict[tuple[int, str], dict] = field(default_factory=dict)
    missions: list[dict] = field(default_factory=list)


def parse_log(path) -> ParsedLog:
    """Read a JSON-lines monitor log, failing loudly on malformed input."""
    records: list[dict] = []
    offset = 0
    with open(path, "rb") as fh:
        for lineno, raw in enumerate(fh, start=1):
            if not raw.endswith(b"\n"):
                raise LogFormatError(
                    f"truncated log: last line unterminated at byte offset {offset}"
                )
            try:
                rec = json.loads(raw)
            except json.JSONDecodeError as exc:
                raise LogFormatError(f"malformed log line {lineno}: {exc}") from exc
            if not isinstance(rec, dict) or "kind" not in rec:
                raise LogFormatError(f"malformed log line {lineno}: missing kind")
            records.append(rec)
            offset += len(raw)
    if not records or records[0].get("kind") != "header":
        raise LogFormatError("log must start with a header record")
    parsed = ParsedLog(header=records[0], records=records)
    for rec in records[1:]:
        kind = rec["kind"]
        if kind == "bit":
            parsed.bit_records.append(rec)
        elif kind == "delivery":
            parsed.deliveries[(rec["interval"], rec["lab"])] = rec
        elif kind == "mission":
            parsed.missions.append(rec)
    return parsed


def reconstruct_streams(parsed: ParsedLog, verify: bool = True) -> dict[str, str]:
    """Re-run distribution over the logged bits; returns per-lab streams.

    With ``verify`` set, every replayed delivery is checked byte for byte
    against the logged one.
    """
    header = parsed.header
    archive = ArchiveReservoir(
        seed=header.get("seed", 0), length=header.get("archive_len", 0) or 1)

    # Interval -> ordered live bits (arrival order == seq order).
    by_interval: dict[int, list[dict]] = {}
    max_interval = -1
    for rec in parsed.bit_records:
        interval = rec.get("interval")
        if interval is None:
            continue  # never distributed (hub shut down mid-interval)
        by_interval.setdefault(interval, []).append(rec)
        max_interval = max(max_interval, interval)

    # Subscription timeline.
    sub_events: dict[int, list[dict]] = {}
    for rec in parsed.records:
        if rec["kind"] in ("subscribe", "rate"):
            sub_events.setdefault(rec["interval"], []).append(rec)
    for (interval, _lab) in parsed.deliveries:
        max_interval = max(max_interval, interval)

    subs: dict[str, LabSubscription] = {}
    order = 0
    streams: dict[str, list[str]] = {}
    for interval in range(max_interval + 1):
        for event in sub_events.get(interval, []):
            if event["kind"] == "subscribe":
                subs[event["lab"]] = LabSubscription(
                    lab_id=event["lab"], rate=event["rate"],
                    burst=event["burst"], order=order,
                )
                order += 1
                streams.setdefault(event["lab"], [])
            else:
                subs[event["lab"]].pending_rate = event["rate"]

        recs = sorted(by_interval.get(interval, []), key=lambda r: r["seq"])
        live = "".join(str(r["bit"]) for r in recs)
        deliveries = plan_deliveries(live, list(subs.values()), archive, interval)
        for lab_id, delivery in deliveries.items():
            streams[lab_id].append(delivery.bits)
            if verify:
                logged = parsed.deliveries.get((interval, lab_id))
                if logged is None:
                    raise ReplayMismatchError(
                        f"no logged delivery for lab {lab_id} interval {interval}")
                if logged["payload"] != delivery.bits or (
                    logged["archived_from"] != delivery.archived_from
                ):
                    raise ReplayMismatchError(
                        f"delivery mismatch for lab {lab_id} interval {interval}")
        for sub in subs.values():
            if sub.pending_rate is not None:
                sub.rate = sub.pending_rate
                sub.pending_rate = None

    return {lab: "".join(parts) for lab, parts in streams.items()}


def replay_deliveries(path, verify: bool = True) -> tuple[ParsedLog, dict[str, str]]:
    parsed = parse_log(path)
    return parsed, reconstruct_streams(parsed, verify=verify)
