import io
import json
import sys
from pathlib import Path

import pytest

from bellstream.cli import main

DATA = Path(__file__).parent / "data"


def run_cli(argv, stdin_text=None, capsys=None):
    if stdin_text is not None:
        old = sys.stdin
        sys.stdin = io.StringIO(stdin_text)
        try:
            code = main(argv)
        finally:
            sys.stdin = old
    else:
        code = main(argv)
    return code


class TestAnalyze:
    def test_chsh_fixture(self, capsys):
        code = main(["analyze", str(DATA / "chsh_counts_hrn.csv"),
                     "--inequality", "chsh", "--signs", "+---"])
        out = capsys.readouterr().out
        assert code == 0
        assert "S = 2.6388" in out

    def test_k_fixture(self, capsys):
        code = main(["analyze", str(DATA / "timebin_counts_human.csv"),
                     "--inequality", "k"])
        out = capsys.readouterr().out
        assert code == 0
        assert "K = (1.70" in out

    def test_json_lines_format(self, capsys):
        code = main(["analyze", str(DATA / "timebin_counts_human.csv"),
                     "--inequality", "k", "--format", "json-lines"])
        out = capsys.readouterr().out.strip()
        assert code == 0
        record = json.loads(out)
        assert record["value"] == pytest.approx(1.699e-4, abs=1e-6)

    def test_wrong_shape_is_data_error(self, tmp_path, capsys):
        bad = tmp_path / "bad.csv"
        bad.write_text("a,b\n1,2\n")
        code = main(["analyze", str(bad), "--inequality", "chsh"])
        capsys.readouterr()
        assert code == 2

    def test_missing_file_is_data_error(self, capsys):
        code = main(["analyze", "nope.csv", "--inequality", "chsh"])
        capsys.readouterr()
        assert code == 2

    def test_usage_error_exit_code(self, capsys):
        code = main(["analyze", str(DATA / "chsh_counts_hrn.csv")])
        capsys.readouterr()
        assert code == 1


class TestPredict:
    def test_alternating_stream(self, capsys):
        code = run_cli(["predict"], stdin_text="01" * 50 + "\n")
        out = capsys.readouterr().out
        assert code == 0
        lines = [l for l in out.splitlines() if l.startswith("bits=")]
        assert len(lines) == 5  # every 20 bits
        final = out.splitlines()[-1]
        assert "accuracy=0.9" in final or "accuracy=1.0" in final

    def test_rejects_non_bits(self, capsys):
        code = run_cli(["predict"], stdin_text="0102\n")
        err = capsys.readouterr().err
        assert code == 2
        assert "non-bit" in err

    def test_fair_coin_near_half(self, capsys):
        import random
        rng = random.Random(8)
        bits = "".join(str(rng.randrange(2)) for _ in range(10_000))
        code = run_cli(["predict"], stdin_text=bits + "\n")
        out = capsys.readouterr().out
        assert code == 0
        final = [l for l in out.splitlines() if l.startswith("final")][0]
        accuracy = float(final.split("accuracy=")[1].split()[0])
        assert abs(accuracy - 0.5) < 0.015


class TestUsage:
    def test_no_command(self, capsys):
        code = main([])
        capsys.readouterr()
        assert code == 1

    def test_unknown_command(self, capsys):
        code = main(["frobnicate"])
        capsys.readouterr()
        assert code == 1
