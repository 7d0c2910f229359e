import json

import pytest

from shatter_lab.__main__ import main
from shatter_lab.arrayfile import write_array
from shatter_lab.config import SCAN_CSV_FIELDS
from shatter_lab.core import WordArray

PAIR_COVER = WordArray.from_rows(
    [(0, 0, 0, 0), (0, 1, 1, 1), (1, 0, 1, 1), (1, 1, 0, 1), (1, 1, 1, 0)], q=2
)


@pytest.fixture
def cover_file(tmp_path):
    path = tmp_path / "cover.txt"
    write_array(path, PAIR_COVER)
    return path


def _exit_code(argv: list[str]) -> int:
    with pytest.raises(SystemExit) as excinfo:
        main(argv)
    return excinfo.value.code


class TestGen:
    def test_words(self, tmp_path):
        out = tmp_path / "w.txt"
        args = ["gen", "--kind", "words", "--n", "4", "--k", "2", "--q", "2", "--seed", "7"]
        assert main([*args, "--out", str(out)]) == 0
        lines = out.read_text().splitlines()
        assert lines[0] == "words 2 2 4"
        assert len(lines) == 3
        assert all(len(line) == 4 and set(line) <= {"0", "1"} for line in lines[1:])

        again = tmp_path / "w2.txt"
        main([*args, "--out", str(again)])
        assert again.read_bytes() == out.read_bytes()

    def test_perms(self, tmp_path):
        out = tmp_path / "p.txt"
        argv = ["gen", "--kind", "perms", "--n", "3", "--k", "1", "--seed", "7"]
        assert main([*argv, "--out", str(out)]) == 0
        lines = out.read_text().splitlines()
        assert lines[0] == "perms 1 3"
        assert sorted(lines[1].split()) == ["1", "2", "3"]

    def test_order_statistics_sampler(self, tmp_path):
        out = tmp_path / "p.txt"
        argv = ["gen", "--kind", "perms", "--n", "5", "--k", "4", "--seed", "1"]
        assert main([*argv, "--generator", "order-stats", "--out", str(out)]) == 0
        assert out.read_text().startswith("perms 4 5\n")

    def test_missing_flag(self, tmp_path):
        argv = ["gen", "--kind", "words", "--n", "4", "--k", "2", "--q", "2"]
        assert _exit_code([*argv, "--out", str(tmp_path / "x.txt")]) == 2

    def test_words_need_q(self, tmp_path, capsys):
        argv = ["gen", "--kind", "words", "--n", "4", "--k", "2", "--seed", "1"]
        assert _exit_code([*argv, "--out", str(tmp_path / "x.txt")]) == 2
        assert "--q" in capsys.readouterr().err


class TestCheck:
    def test_covering(self, cover_file, capsys):
        assert main(["check", "--in", str(cover_file), "--t", "2"]) == 0
        report = json.loads(capsys.readouterr().out)
        assert report["schema"] == 1
        assert report["x_count"] == 0
        assert report["kind"] == "words"

    def test_not_covering(self, cover_file, capsys):
        assert main(["check", "--in", str(cover_file), "--t", "3", "--witnesses", "2"]) == 1
        report = json.loads(capsys.readouterr().out)
        assert report["x_count"] == 4
        assert report["witnesses"] == [[1, 2, 3], [1, 2, 4]]
        assert report["witnesses_truncated"] is True

    def test_corrupt_file(self, tmp_path, capsys):
        path = tmp_path / "bad.txt"
        path.write_text("words 2 3 4\n0101\n")
        assert _exit_code(["check", "--in", str(path), "--t", "2"]) == 2
        assert "declares 3" in capsys.readouterr().err

    def test_failure_is_logged_once_at_error(self, tmp_path, capsys):
        path = tmp_path / "bad.txt"
        path.write_text("words 2 3 4\n0101\n")
        assert _exit_code(["check", "--in", str(path), "--t", "2"]) == 2
        err = capsys.readouterr().err
        assert err.count("declares 3") == 1
        assert "ERROR" in err and "check failed" in err

    def test_missing_file(self, tmp_path):
        assert _exit_code(["check", "--in", str(tmp_path / "none.txt"), "--t", "2"]) == 2


def test_vc(cover_file, capsys):
    assert main(["vc", "--in", str(cover_file), "--t-max", "4"]) == 0
    assert capsys.readouterr().out.strip() == "3"
    main(["vc", "--in", str(cover_file), "--t-max", "2"])
    assert capsys.readouterr().out.strip() == "≥ 3"
    assert main(["vc", "--in", str(cover_file), "--t-max", "4", "--samples", "50"]) == 0
    assert capsys.readouterr().out.strip() == "3"


class TestTheory:
    def test_word_constants(self, capsys):
        assert main(["theory", "constants", "--q", "2", "--t", "3"]) == 0
        out = capsys.readouterr().out
        assert "15.57" in out
        assert "42.96" in out
        assert "excluded" in out

    def test_perm_constants(self, capsys):
        assert main(["theory", "constants", "--kind", "perms"]) == 0
        out = capsys.readouterr().out
        for value in ("8.55", "9.64", "10.41", "43/50", "3/4"):
            assert value in out

    def test_word_thresholds(self, capsys):
        argv = ["theory", "thresholds", "--kind", "words", "--n", "1024", "--q", "2", "--t", "3"]
        assert main(argv) == 0
        assert "155.7" in capsys.readouterr().out

    def test_perm_thresholds(self, capsys):
        assert main(["theory", "thresholds", "--kind", "perms", "--n", "1024", "--omega", "0"]) == 0
        out = capsys.readouterr().out
        assert out.count("114.05") == 2

    def test_word_thresholds_need_q(self):
        assert _exit_code(["theory", "thresholds", "--kind", "words", "--n", "1024"]) == 2


class TestOracle:
    def test_table1(self, capsys):
        assert main(["oracle", "table1"]) == 0
        lines = capsys.readouterr().out.splitlines()
        complements = [int(line.split()[3]) for line in lines[1:7]]
        assert complements == [14, 17, 19, 16, 17, 14]
        assert lines[-1].startswith("note:")

    def test_overlap2(self, capsys):
        assert main(["oracle", "overlap2"]) == 0
        rows = dict(line.split() for line in capsys.readouterr().out.splitlines())
        assert rows == {"identical": "2/24", "consistent": "1/24", "inconsistent": "0"}

    def test_exact_expect(self, capsys):
        assert main(["oracle", "exact-expect", "--k", "4", "--arity", "4"]) == 0
        assert "0.09375" in capsys.readouterr().out

    def test_pair_correlation(self, capsys):
        argv = ["oracle", "pair-corr", "--k", "5", "--trials", "10"]
        assert main(argv) == 0
        out = capsys.readouterr().out
        assert "estimate" in out and "1.0" in out


class TestScan:
    def test_writes_csv(self, tmp_path):
        out = tmp_path / "scan.csv"
        argv = ["scan", "--kind", "words", "--n", "5", "--t", "2", "--q", "2"]
        argv += ["--k-min", "4", "--k-max", "12", "--k-step", "4", "--trials", "50"]
        assert main([*argv, "--seed", "3", "--out", str(out)]) == 0
        lines = out.read_text().splitlines()
        assert lines[0] == ",".join(SCAN_CSV_FIELDS)
        assert len(lines) == 4

    def test_threads_do_not_change_output(self, tmp_path):
        argv = ["scan", "--kind", "perms", "--n", "5", "--t", "3", "--k-min", "8"]
        argv += ["--k-max", "16", "--k-step", "8", "--trials", "600", "--seed", "2"]
        one, two = tmp_path / "one.json", tmp_path / "two.json"
        main([*argv, "--format", "json", "--out", str(one)])
        main([*argv, "--format", "json", "--threads", "2", "--out", str(two)])
        assert one.read_bytes() == two.read_bytes()

    def test_bad_range(self, tmp_path):
        argv = ["scan", "--kind", "perms", "--n", "5", "--t", "3", "--k-min", "9"]
        argv += ["--k-max", "8", "--trials", "10", "--seed", "0", "--out", str(tmp_path / "x")]
        assert _exit_code(argv) == 2


def test_moments(capsys):
    argv = ["moments", "--kind", "words", "--n", "5", "--t", "2", "--q", "2"]
    assert main([*argv, "--k", "0", "--trials", "5", "--seed", "0"]) == 0
    record = json.loads(capsys.readouterr().out)
    assert record["mean_x"] == 10
    assert record["var_x"] == 0
