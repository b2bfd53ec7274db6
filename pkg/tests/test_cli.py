import json

import numpy as np
import pytest

from deadbeat import cli

from oracles import rotation


def write_system(path, A, B, form="factored", **extra):
    A = np.asarray(A, float)
    B = np.asarray(B, float)
    n, m = A.shape[0], B.shape[1] if B.ndim == 2 else 1
    lines = [
        f"n = {n}",
        f"m = {m}",
        f"form = {form}",
        "A = " + " ".join(repr(float(v)) for v in A.reshape(-1)),
        "B = " + " ".join(repr(float(v)) for v in np.asarray(B).reshape(-1)),
    ]
    for key, value in extra.items():
        lines.append(f"{key} = {value}")
    path.write_text("\n".join(lines) + "\n")
    return str(path)


@pytest.fixture
def rotation_file(tmp_path):
    return write_system(tmp_path / "rot.txt", rotation(np.pi / 2), [[1.0], [0.0]])


@pytest.fixture
def rotation60_file(tmp_path):
    return write_system(tmp_path / "rot60.txt", rotation(np.pi / 3), [[1.0], [0.0]])


@pytest.fixture
def uncontrollable_file(tmp_path):
    return write_system(tmp_path / "unc.txt", np.diag([2.0, 3.0]), [[1.0], [0.0]])


@pytest.fixture
def singular_file(tmp_path):
    return write_system(
        tmp_path / "sing.txt", [[0.0, 1.0], [0.0, 0.0]], [[0.0], [1.0]]
    )


class TestCheck:
    def test_rotation_controllable(self, rotation_file, capsys):
        assert cli.main(["check", rotation_file]) == 0
        out = capsys.readouterr().out
        assert "chain dims: 1 2" in out
        assert "pbh: pass" in out
        assert "controllable: yes" in out

    def test_uncontrollable_reports_eigenvalue(self, uncontrollable_file, capsys):
        assert cli.main(["check", uncontrollable_file]) == 1
        out = capsys.readouterr().out
        assert "controllable: no" in out
        assert "failing eigenvalue: 3" in out

    def test_truncated_file(self, tmp_path, capsys):
        bad = tmp_path / "bad.txt"
        bad.write_text("n = 2\nm = 1\nA = 0 1 -1 0\n")  # B missing
        assert cli.main(["check", str(bad)]) == 2
        assert "'b'" in capsys.readouterr().err.lower()

    def test_wrong_entry_count_names_field(self, tmp_path, capsys):
        bad = tmp_path / "bad.txt"
        bad.write_text("n = 2\nm = 1\nA = 0 1 -1\nB = 1 0\n")
        assert cli.main(["check", str(bad)]) == 2
        assert "'A'" in capsys.readouterr().err

    def test_missing_file(self, tmp_path, capsys):
        assert cli.main(["check", str(tmp_path / "nope.txt")]) == 2

    def test_matrix_file_convenience(self, tmp_path, capsys):
        a = tmp_path / "A.txt"
        a.write_text("0 1\n-1 0\n")
        b = tmp_path / "B.txt"
        b.write_text("1\n0\n")
        assert cli.main(["check", "--a-file", str(a), "--b-file", str(b)]) == 0


class TestGain:
    def test_rotation_60_value(self, rotation60_file, capsys):
        assert cli.main(["gain", rotation60_file]) == 0
        out = capsys.readouterr().out
        assert "K2:" in out
        assert "-0.577350269190" in out.replace("-0.57735026919", "-0.577350269190")

    def test_json_roundtrip_bit_exact(self, rotation60_file, capsys):
        assert cli.main(["gain", rotation60_file, "--json"]) == 0
        payload = json.loads(capsys.readouterr().out)
        from deadbeat import linear
        from deadbeat.cli import parse_system_file

        result = linear.deadbeat_gain(parse_system_file(rotation60_file))
        assert payload["K2"] == result.K2.reshape(-1).tolist()
        assert payload["K"] == result.K.reshape(-1).tolist()
        assert payload["residual"] == result.nilpotency_residual

    def test_singular_suggests_dual(self, singular_file, capsys):
        assert cli.main(["gain", singular_file]) == 3
        assert "dual" in capsys.readouterr().err

    def test_dual_succeeds_on_singular(self, singular_file, capsys):
        assert cli.main(["gain", singular_file, "--dual"]) == 0
        assert "residual" in capsys.readouterr().out

    def test_uncontrollable(self, uncontrollable_file):
        assert cli.main(["gain", uncontrollable_file]) == 1


class TestTrack:
    def test_rotation_random_start(self, rotation_file, tmp_path, capsys):
        out_csv = tmp_path / "run.csv"
        code = cli.main(
            ["track", rotation_file, "--seed", "5", "--out", str(out_csv)]
        )
        assert code == 0
        out = capsys.readouterr().out
        assert "deadbeat_step:" in out
        text = out_csv.read_text()
        assert text.startswith("k,x1,x2,xhat1,xhat2\n")
        assert len(text.strip().splitlines()) == 2 * (2 + 1) + 2

    def test_same_start_step_zero(self, rotation_file, capsys):
        code = cli.main(
            ["track", rotation_file, "--x0", "1,2", "--xhat0", "1,2"]
        )
        assert code == 0
        assert "deadbeat_step: 0" in capsys.readouterr().out

    def test_uncontrollable_file(self, uncontrollable_file):
        assert cli.main(["track", uncontrollable_file]) == 1

    def test_standard_form_rejected(self, tmp_path):
        path = write_system(
            tmp_path / "std.txt", rotation(np.pi / 2), [[1.0], [0.0]], form="standard"
        )
        assert cli.main(["track", path]) == 2

    def test_bad_vector_length(self, rotation_file):
        assert cli.main(["track", rotation_file, "--x0", "1,2,3"]) == 2


class TestDemo:
    @pytest.mark.parametrize("name", ["homogeneous", "positive"])
    def test_demo_runs_clean(self, name, tmp_path, capsys):
        out_csv = tmp_path / f"{name}.csv"
        assert cli.main(["demo", name, "--seed", "1", "--out", str(out_csv)]) == 0
        out = capsys.readouterr().out
        step = int(out.split("deadbeat_step: ")[1].split()[0])
        assert step <= 3
        assert out_csv.exists()

    def test_unknown_demo(self, capsys):
        assert cli.main(["demo", "bogus"]) == 2


class TestBatch:
    def test_small_batch_passes(self, capsys):
        code = cli.main(
            ["batch", "--family", "linear-gain", "--count", "10", "--seed", "2"]
        )
        assert code == 0
        out = capsys.readouterr().out
        assert "passes: 10" in out

    def test_deterministic_output(self, capsys):
        argv = ["batch", "--family", "positive", "--count", "8", "--seed", "4"]
        assert cli.main(argv) == 0
        first = capsys.readouterr().out
        assert cli.main(argv) == 0
        assert capsys.readouterr().out == first


class TestEnvTolerance:
    def test_single_value_applies(self, rotation_file, monkeypatch, capsys):
        monkeypatch.setenv("DEADBEAT_TOL", "1e-6")
        assert cli.main(["check", rotation_file]) == 0

    def test_pair_applies(self, rotation_file, monkeypatch):
        monkeypatch.setenv("DEADBEAT_TOL", "1e-11,1e-7")
        assert cli.main(["check", rotation_file]) == 0

    def test_garbage_rejected(self, rotation_file, monkeypatch):
        monkeypatch.setenv("DEADBEAT_TOL", "abc")
        assert cli.main(["check", rotation_file]) == 2
