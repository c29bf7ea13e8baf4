import json

import pytest

from pegsol import cli

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_VERIFY_FAILED = 3


@pytest.fixture(scope="module")
def data_dir(tmp_path_factory):
    out = tmp_path_factory.mktemp("pegdata")
    assert cli.main(["compile", "triangle5", "--type", "1", "--out", str(out)]) == EXIT_OK
    assert cli.main(["compile", "triangle4", "--type", "1", "--out", str(out)]) == EXIT_OK
    return out


def test_compile_writes_files(data_dir):
    assert (data_dir / "Triangle15Winning.txt").exists()
    assert (data_dir / "Triangle15Winning_meta.json").exists()


def test_compile_reports_indexed_total(tmp_path, capsys):
    assert cli.main(["compile", "triangle5", "--type", "1", "--out", str(tmp_path)]) == EXIT_OK
    out = capsys.readouterr().out
    assert "indexed entries: 437" in out
    assert "unsolvable" in out  # problem 1:4


def test_verify_ok(data_dir, capsys):
    assert cli.main(["verify", "triangle5", "--out", str(data_dir)]) == EXIT_OK
    assert "checks passed" in capsys.readouterr().out


def test_verify_detects_tampering(tmp_path, capsys):
    assert cli.main(["compile", "triangle5", "--type", "1", "--out", str(tmp_path)]) == EXIT_OK
    path = tmp_path / "Triangle15Winning.txt"
    text = path.read_text().replace("1 2 8 16", "1 2 8 17")
    path.write_text(text)
    assert cli.main(["verify", "triangle5", "--out", str(tmp_path)]) == EXIT_VERIFY_FAILED
    assert "FAIL" in capsys.readouterr().out


def test_verify_missing_database(tmp_path, capsys):
    assert cli.main(["verify", "triangle5", "--out", str(tmp_path)]) == EXIT_ERROR
    assert "error" in capsys.readouterr().err


def test_verify_wiegleb_needs_no_database(tmp_path):
    assert cli.main(["verify", "wiegleb45", "--out", str(tmp_path)]) == EXIT_OK


def test_query_solvable_code(data_dir, capsys):
    rc = cli.main([
        "query", "triangle5", "--problem", "1:2", "--position", "28",
        "--out", str(data_dir),
    ])
    assert rc == EXIT_OK
    out = capsys.readouterr().out
    assert "verdict: solvable" in out
    assert "good" in out


def test_query_finish_anywhere_vs_complement(data_dir, capsys):
    rc = cli.main([
        "query", "triangle5", "--position", "1480", "--finish", "anywhere",
        "--type", "1", "--out", str(data_dir), "--json",
    ])
    assert rc == EXIT_OK
    payload = json.loads(capsys.readouterr().out)
    assert payload["solvable"] is True
    for i in range(1, 5):
        rc = cli.main([
            "query", "triangle5", "--problem", f"1:{i}", "--position", "1480",
            "--out", str(data_dir), "--json",
        ])
        assert rc == EXIT_OK
        assert json.loads(capsys.readouterr().out)["solvable"] is False


def test_query_with_start_orientation(data_dir, capsys):
    # canonical orientation: 50 solvable, its mirror 28 not
    for code, want in ((50, True), (28, False)):
        rc = cli.main([
            "query", "triangle5", "--problem", "1:1", "--position", str(code),
            "--out", str(data_dir), "--json",
        ])
        assert rc == EXIT_OK
        assert json.loads(capsys.readouterr().out)["solvable"] is want
    # explicit canonical start is the identity alignment
    rc = cli.main([
        "query", "triangle5", "--problem", "1:1", "--position", "50",
        "--start", "0,3", "--out", str(data_dir), "--json",
    ])
    assert rc == EXIT_OK
    assert json.loads(capsys.readouterr().out)["solvable"] is True


def test_query_ascii_position(data_dir, t5, capsys):
    diagram = t5.render_ascii(28)
    rc = cli.main([
        "query", "triangle5", "--problem", "1:2", "--position", diagram,
        "--out", str(data_dir), "--json",
    ])
    assert rc == EXIT_OK
    assert json.loads(capsys.readouterr().out)["position"] == 28


def test_query_bad_position(data_dir, capsys):
    rc = cli.main([
        "query", "triangle5", "--problem", "1:2", "--position", str(2**15),
        "--out", str(data_dir),
    ])
    assert rc == EXIT_ERROR
    assert "error" in capsys.readouterr().err


def test_query_board_flag_alias(data_dir, capsys):
    rc = cli.main([
        "query", "--board", "triangle5", "--problem", "1:2", "--position", "28",
        "--out", str(data_dir), "--json",
    ])
    assert rc == EXIT_OK
    assert json.loads(capsys.readouterr().out)["solvable"] is True


def test_export_byte_identical(data_dir, capsys):
    assert cli.main(["export", "triangle5", "--type", "1", "--out", str(data_dir)]) == EXIT_OK
    path = capsys.readouterr().out.strip()
    first = open(path, "rb").read()
    assert cli.main(["export", "triangle5", "--type", "1", "--out", str(data_dir)]) == EXIT_OK
    capsys.readouterr()
    assert open(path, "rb").read() == first


def test_export_missing_db(tmp_path, capsys):
    assert cli.main(["export", "triangle5", "--type", "1", "--out", str(tmp_path)]) == EXIT_ERROR
    assert "error" in capsys.readouterr().err


def test_stats(data_dir, capsys):
    assert cli.main(["stats", "triangle5", "--out", str(data_dir)]) == EXIT_OK
    out = capsys.readouterr().out
    assert "indexed 437" in out
    assert "problem 1:2" in out


def test_stats_json(data_dir, capsys):
    assert cli.main(["stats", "triangle5", "--out", str(data_dir), "--json"]) == EXIT_OK
    meta = json.loads(capsys.readouterr().out)
    assert meta["board"] == "triangle5"


def test_usage_error_exit_code():
    with pytest.raises(SystemExit) as exc:
        cli.main(["compile", "triangle5"])  # no scope
    assert exc.value.code == 2


def test_unknown_board(capsys):
    assert cli.main(["compile", "pentagon9", "--type", "1"]) == EXIT_ERROR
    assert "error" in capsys.readouterr().err
