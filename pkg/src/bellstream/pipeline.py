"""End-to-end orchestration: hub server, synthetic users, attached labs.

The serve pipeline runs everything in one process: a hub server on a
local port, user clients pushing bits from seeded sources, and lab
clients that subscribe, collect their delivered streams, and analyze
them when the run ends.  The replay pipeline rebuilds the same lab
streams from the monitor log and re-runs the identical seeded analyses.
"""

from __future__ import annotations

import asyncio
import json
from dataclasses import dataclass, field

from .hub import HubCore, MonitorLog
from .inequalities import bilocality, chsh, k_statistic, mdl_i0, steering_s16_from_table
from .labs import LabRunReport, LabSpec, run_lab
from .replay import replay_deliveries
from .server import HubServer, LineClient
from .sources import BitSource, BufferSource, make_source
from .tables import BellResult


@dataclass
class UsersConfig:
    count: int = 10
    bits_per_second: float = 10.0
    source: str = "human"
    robots: int = 0
    robot_bits_per_tick: int = 11
    mission_every: int = 0  # bits between mission reports; 0 disables


@dataclass
class RunConfig:
    host: str = "127.0.0.1"
    port: int = 0  # 0 lets the OS pick
    seed: int = 0
    duration: float = 10.0
    tick_seconds: float = 0.5
    log_path: str = "hub.log"
    max_bits_per_tick: int = 10
    labs: list[LabSpec] = field(default_factory=list)
    users: UsersConfig = field(default_factory=UsersConfig)

    @classmethod
    def from_file(cls, path) -> "RunConfig":
        with open(path) as fh:
            raw = json.load(fh)
        labs = [
            LabSpec(
                lab_id=item["id"], kind=item["kind"], rate=int(item.get("rate", 1000)),
                burst=bool(item.get("burst", False)),
                visibility=float(item.get("visibility", 1.0)),
                eta=float(item.get("eta", 1.0)),
                pair_prob=float(item.get("pair_prob", 0.002)),
                seed=int(item.get("seed", 0)),
                angles_a_deg=tuple(item["angles_a"]) if "angles_a" in item else None,
                angles_b_deg=tuple(item["angles_b"]) if "angles_b" in item else None,
                trace_path=item.get("trace"),
            )
            for item in raw.get("labs", [])
        ]
        users_raw = raw.get("users", {})
        users = UsersConfig(
            count=int(users_raw.get("count", 10)),
            bits_per_second=float(users_raw.get("bits_per_second", 10.0)),
            source=users_raw.get("source", "human"),
            robots=int(users_raw.get("robots", 0)),
            robot_bits_per_tick=int(users_raw.get("robot_bits_per_tick", 11)),
            mission_every=int(users_raw.get("mission_every", 0)),
        )
        return cls(
            host=raw.get("host", "127.0.0.1"), port=int(raw.get("port", 0)),
            seed=int(raw.get("seed", 0)), duration=float(raw.get("duration", 10.0)),
            tick_seconds=float(raw.get("tick_seconds", 0.5)),
            log_path=raw.get("log", "hub.log"),
            max_bits_per_tick=int(raw.get("max_bits_per_tick", 10)),
            labs=labs, users=users,
        )


def analyze_counts(kind: str, counts) -> BellResult:
    """Dispatch a count structure to its inequality; the single analysis path."""
    if kind == "chsh":
        return chsh(counts)
    if kind == "steering":
        return steering_s16_from_table(counts)
    if kind == "bilocal":
        return bilocality(counts)
    if kind == "timebin":
        return k_statistic(counts)
    if kind == "mdl":
        trials = {
            (x, y): counts.trials(x, y) for x in (0, 1) for y in (0, 1)
        }
        return mdl_i0(counts.prob, trials=trials)
    raise ValueError(f"unknown lab kind {kind!r}")


@dataclass
class LabOutcome:
    spec: LabSpec
    stream: str
    archived_bits: int
    report: LabRunReport | None
    result: BellResult | None


async def _lab_client(host: str, port: int, spec: LabSpec, outcome: LabOutcome) -> None:
    client = await LineClient.connect(host, port)
    ack = await client.request({
        "type": "subscribe", "lab": spec.lab_id, "rate": spec.rate, "burst": spec.burst,
    })
    if ack.get("type") != "ack":
        raise RuntimeError(f"subscribe failed: {ack}")
    parts: list[str] = []
    archived = 0
    try:
        while True:
            message = await client.recv()
            if message.get("type") != "stream":
                continue
            payload = message["payload"]
            parts.append(payload)
            if message.get("archived_from") is not None:
                archived += len(payload) - message["archived_from"]
    except ConnectionError:
        pass
    finally:
        await client.close()
    outcome.stream = "".join(parts)
    outcome.archived_bits = archived


async def _user_client(
    host: str, port: int, user_id: str, source: BitSource,
    bits_per_batch: int, batch_interval: float, duration: float,
    mission_every: int = 0,
) -> int:
    client = await LineClient.connect(host, port)
    await client.send({"type": "hello", "user": user_id})
    sent = 0
    since_mission = 0
    loop = asyncio.get_running_loop()
    start = loop.time()
    batch = 0
    try:
        # absolute schedule so sleep jitter never accumulates into rate drift
        while batch * batch_interval < duration:
            payload = source.take_bits(bits_per_batch)
            if not payload:
                break
            await client.send({"type": "bits", "user": user_id, "seq": sent,
                               "payload": payload, "ts": loop.time()})
            sent += len(payload)
            since_mission += len(payload)
            if mission_every and since_mission >= mission_every:
                reply = await client.request(
                    {"type": "mission_done", "user": user_id, "n": since_mission})
                assert reply.get("type") == "feedback"
                since_mission = 0
            batch += 1
            await asyncio.sleep(max(0.0, start + batch * batch_interval - loop.time()))
    finally:
        await client.close()
    return sent


@dataclass
class ServeResult:
    outcomes: list[LabOutcome]
    log_path: str
    bits_sent: int

    def rows(self) -> list[tuple[str, str, BellResult]]:
        return [
            (o.spec.lab_id, o.spec.kind, o.result)
            for o in self.outcomes if o.result is not None
        ]


def analyze_stream(spec: LabSpec, stream: str) -> tuple[LabRunReport, BellResult | None]:
    buffer = BufferSource()
    buffer.push(stream)
    n_trials = len(stream) // spec.bits_per_trial
    if spec.trace_path:
        with open(spec.trace_path, "w") as trace:
            report = run_lab(spec, buffer, n_trials, trace=trace)
    else:
        report = run_lab(spec, buffer, n_trials)
    try:
        result = analyze_counts(spec.kind, report.counts)
    except ValueError:
        result = None  # not enough data to evaluate
    return report, result


async def serve(config: RunConfig, stop_event: asyncio.Event | None = None) -> ServeResult:
    """Run the hub for ``config.duration`` seconds (or until ``stop_event``)."""
    log = MonitorLog(config.log_path)
    core = HubCore(seed=config.seed, log=log,
                   max_bits_per_tick=config.max_bits_per_tick)
    server = HubServer(core, host=config.host, port=config.port,
                       tick_seconds=config.tick_seconds)
    await server.start()
    host, port = server.address
    print(f"hub listening on {host}:{port}", flush=True)
    loop = asyncio.get_running_loop()
    deadline = loop.time() + config.duration

    outcomes = [LabOutcome(spec=s, stream="", archived_bits=0, report=None, result=None)
                for s in config.labs]
    lab_tasks = [
        asyncio.create_task(_lab_client(host, port, outcome.spec, outcome))
        for outcome in outcomes
    ]
    await asyncio.sleep(0)  # let subscriptions land before users start

    users = config.users
    batch_interval = 0.2
    user_tasks = []
    for i in range(users.count):
        source = make_source(users.source, seed=config.seed * 100003 + i)
        per_batch = max(1, round(users.bits_per_second * batch_interval))
        user_tasks.append(asyncio.create_task(_user_client(
            host, port, f"user-{i}", source, per_batch, batch_interval,
            config.duration, users.mission_every,
        )))
    for j in range(users.robots):
        source = make_source("fair", seed=config.seed * 90001 + j)
        user_tasks.append(asyncio.create_task(_user_client(
            host, port, f"robot-{j}", source,
            users.robot_bits_per_tick, config.tick_seconds, config.duration,
        )))

    sent = sum(await asyncio.gather(*user_tasks))
    remaining = deadline - loop.time()
    waiters = [asyncio.create_task(asyncio.sleep(max(0.0, remaining)))]
    if stop_event is not None:
        waiters.append(asyncio.create_task(stop_event.wait()))
    _done, pending = await asyncio.wait(waiters, return_when=asyncio.FIRST_COMPLETED)
    for task in pending:
        task.cancel()
    # allow the final interval to close and stream out
    await asyncio.sleep(config.tick_seconds * core.ticks_per_interval + 0.2)
    await server.stop()
    await asyncio.gather(*lab_tasks, return_exceptions=True)

    for outcome in outcomes:
        outcome.report, outcome.result = analyze_stream(outcome.spec, outcome.stream)
    return ServeResult(outcomes=outcomes, log_path=config.log_path, bits_sent=sent)


def run_serve(config: RunConfig) -> ServeResult:
    async def main():
        import signal

        stop_event = asyncio.Event()
        loop = asyncio.get_running_loop()
        for sig in (signal.SIGTERM, signal.SIGINT):
            try:
                loop.add_signal_handler(sig, stop_event.set)
            except (NotImplementedError, RuntimeError):
                pass
        return await serve(config, stop_event)

    return asyncio.run(main())


def replay(log_path, lab_specs: list[LabSpec]) -> list[tuple[str, str, BellResult]]:
    """Rebuild lab streams from a log and re-run the seeded analyses."""
    _parsed, streams = replay_deliveries(log_path, verify=True)
    rows = []
    for spec in lab_specs:
        stream = streams.get(spec.lab_id, "")
        _report, result = analyze_stream(spec, stream)
        if result is not None:
            rows.append((spec.lab_id, spec.kind, result))
    return rows
