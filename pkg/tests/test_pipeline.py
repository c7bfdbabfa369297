import json

import pytest

from bellstream import pipeline
from bellstream.labs import LabSpec
from bellstream.replay import replay_deliveries


def small_config(tmp_path, seed=5, duration=3.0):
    return pipeline.RunConfig(
        seed=seed,
        duration=duration,
        tick_seconds=0.05,
        log_path=str(tmp_path / "run.log"),
        labs=[
            LabSpec(lab_id="chsh-1", kind="chsh", rate=40, seed=17),
            LabSpec(lab_id="chsh-2", kind="chsh", rate=90, seed=18),
        ],
        users=pipeline.UsersConfig(count=6, bits_per_second=40.0, source="human"),
    )


@pytest.fixture(scope="module")
def serve_result(tmp_path_factory):
    tmp = tmp_path_factory.mktemp("serve")
    config = small_config(tmp)
    result = pipeline.run_serve(config)
    return config, result


class TestServeAndReplay:
    def test_labs_received_streams(self, serve_result):
        _config, result = serve_result
        for outcome in result.outcomes:
            assert len(outcome.stream) > 0

    def test_replay_streams_match_live(self, serve_result):
        config, result = serve_result
        _parsed, streams = replay_deliveries(config.log_path, verify=True)
        for outcome in result.outcomes:
            assert streams[outcome.spec.lab_id] == outcome.stream

    def test_replay_reproduces_reports(self, serve_result):
        config, result = serve_result
        live_rows = result.rows()
        replay_rows = pipeline.replay(config.log_path, config.labs)
        assert len(replay_rows) == len(live_rows)
        for (lid, lkind, lres), (rid, rkind, rres) in zip(live_rows, replay_rows):
            assert (lid, lkind) == (rid, rkind)
            assert lres.value == rres.value
            assert lres.stderr == rres.stderr

    def test_shared_prefix_every_interval(self, serve_result):
        config, _result = serve_result
        parsed, _streams = replay_deliveries(config.log_path, verify=True)
        by_interval = {}
        for (interval, lab), rec in parsed.deliveries.items():
            by_interval.setdefault(interval, []).append(rec)
        checked = 0
        for interval, recs in by_interval.items():
            live_parts = []
            for rec in recs:
                payload = rec["payload"]
                if rec["archived_from"] is not None:
                    payload = payload[:rec["archived_from"]]
                live_parts.append(payload)
            live_parts.sort(key=len)
            for shorter, longer in zip(live_parts, live_parts[1:]):
                assert longer.startswith(shorter)
                checked += 1
        assert checked > 0


class TestConfigFile:
    def test_round_trip(self, tmp_path):
        raw = {
            "seed": 9, "duration": 1.5, "tick_seconds": 0.1,
            "log": str(tmp_path / "x.log"),
            "labs": [{"id": "L", "kind": "steering", "rate": 160, "seed": 2,
                      "visibility": 0.96}],
            "users": {"count": 3, "bits_per_second": 12, "source": "fair"},
        }
        path = tmp_path / "config.json"
        path.write_text(json.dumps(raw))
        config = pipeline.RunConfig.from_file(path)
        assert config.seed == 9
        assert config.labs[0].kind == "steering"
        assert config.labs[0].visibility == 0.96
        assert config.users.source == "fair"
