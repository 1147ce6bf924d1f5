import math
import shlex

import numpy as np
import pytest

from cascade_blockage.cli import main, parse_grid, parse_int_list, parse_stages

DEFAULTS = ["--lambda", "0.1", "--R", "1", "--p", "0.5", "--K", "0.1", "--stages", "5"]


def read_csv(path):
    lines = path.read_text().splitlines()
    header = [l for l in lines if l.startswith("#")]
    body = [l for l in lines if not l.startswith("#")]
    columns = body[0].split(",")
    data = np.array([[float(x) for x in row.split(",")] for row in body[1:]])
    return header, columns, data


def test_parse_helpers():
    np.testing.assert_array_equal(parse_grid("-10:30:10"), [-10, 0, 10, 20, 30])
    np.testing.assert_array_equal(parse_grid("3"), [3.0])
    assert len(parse_grid("-10:30:1")) == 41
    assert parse_stages("inf") is None
    assert parse_stages("5") == 5
    assert parse_int_list("0:4") == [0, 1, 2, 3, 4]
    assert parse_int_list("1,3") == [1, 3]
    with pytest.raises(ValueError):
        parse_grid("1:0:1")


def test_coverage_table(tmp_path):
    out = tmp_path / "cov.csv"
    assert main(["coverage", "--model", "basic", *DEFAULTS, "--theta-db", "-10:30:1",
                 "--output", str(out)]) == 0
    header, columns, data = read_csv(out)
    assert columns == ["theta_db", "p_cov"]
    assert data.shape == (41, 2)
    assert np.all(np.diff(data[:, 1]) <= 0)
    assert header[0].startswith("# cascade-blockage ")
    assert any(h == "# p: 0.5" for h in header)


@pytest.mark.parametrize("model", ["basic", "less_correlated", "periodic", "independent"])
def test_zero_blockage_probability_closed_form(tmp_path, model):
    out = tmp_path / "cov.csv"
    p = "0.5" if model == "periodic" else "0"
    K = "1" if model == "periodic" else "0.1"   # periodic blocks exactly half the arcs
    assert main(["coverage", "--model", model, "--lambda", "0.1", "--p", p, "--K", K,
                 "--stages", "5", "--theta-db", "-10:30:5", "--output", str(out)]) == 0
    _, _, data = read_csv(out)
    theta = 10 ** (data[:, 0] / 10)
    expected = np.exp(-0.1 * math.pi * 31 * theta / (1 + theta))
    np.testing.assert_allclose(data[:, 1], expected, rtol=0, atol=1e-10)


def test_basic_dominates_independent(tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    main(["coverage", "--model", "basic", *DEFAULTS, "--output", str(a)])
    main(["coverage", "--model", "independent", *DEFAULTS, "--output", str(b)])
    assert np.all(read_csv(a)[2][:, 1] >= read_csv(b)[2][:, 1] - 1e-12)


def test_best_beam_and_switch_tables(tmp_path):
    out = tmp_path / "best.csv"
    assert main(["best-beam", *DEFAULTS, "--k", "0:2", "--theta-db", "0:10:10",
                 "--output", str(out)]) == 0
    _, columns, data = read_csv(out)
    assert columns == ["theta_db", "k", "p_best", "p_random"]
    assert data.shape == (6, 4)
    assert np.all(data[:, 2] >= data[:, 3] - 1e-12)
    out = tmp_path / "switch.csv"
    assert main(["beam-switch", *DEFAULTS, "--k", "3", "--output", str(out)]) == 0
    _, columns, data = read_csv(out)
    assert columns == ["l", "shared_depth", "p_conditional", "p_conditional_given_outage"]
    np.testing.assert_array_equal(data[:, 0], np.arange(2, 9))
    np.testing.assert_array_equal(data[:, 1], [2, 1, 1, 0, 0, 0, 0])


def test_exit_codes(tmp_path, capsys):
    out = str(tmp_path / "x.csv")
    assert main(["coverage", "--p", "1.5", "--output", out]) == 1
    assert "p" in capsys.readouterr().err
    assert main(["coverage", "--stages", "inf", "--p", "0.6", "--K", "0.5", "--output", out]) == 3
    assert "divergent" in capsys.readouterr().err
    assert main(["coverage", "--stages", "inf", "--p", "0.9", "--K", "0.05",
                 "--max-iterations", "2", "--output", out]) == 3
    assert main(["beam-switch", "--k", "0", "--output", out]) == 1
    with pytest.raises(SystemExit) as exc:
        main(["coverage", "--bogus"])
    assert exc.value.code == 1


def test_header_round_trip(tmp_path):
    first = tmp_path / "first.csv"
    assert main(["simulate", "--what", "coverage", "--model", "basic", *DEFAULTS,
                 "--theta-db", "-10:10:10", "--n-samples", "500", "--seed", "3",
                 "--output", str(first)]) == 0
    text = first.read_text()
    command = next(l for l in text.splitlines() if l.startswith("# command: "))
    argv = shlex.split(command[len("# command: "):])
    second = tmp_path / "second.csv"
    assert main([*argv, "--output", str(second)]) == 0
    assert second.read_bytes() == first.read_bytes()


def test_analytic_header_round_trip(tmp_path):
    first = tmp_path / "first.csv"
    main(["best-beam", "--lambda", "1", "--k", "1,2", "--theta-db", "-10:10:10",
          "--output", str(first)])
    command = next(l for l in first.read_text().splitlines() if l.startswith("# command: "))
    second = tmp_path / "second.csv"
    main([*shlex.split(command[len("# command: "):]), "--output", str(second)])
    assert second.read_bytes() == first.read_bytes()


def test_output_directory_from_environment(tmp_path, monkeypatch):
    monkeypatch.setenv("CASCADE_BLOCKAGE_OUTPUT_DIR", str(tmp_path))
    assert main(["coverage", "--theta-db", "0"]) == 0
    assert (tmp_path / "coverage.csv").exists()


def test_stdout_without_output(capsys, monkeypatch):
    monkeypatch.delenv("CASCADE_BLOCKAGE_OUTPUT_DIR", raising=False)
    assert main(["coverage", "--theta-db", "0"]) == 0
    assert "theta_db,p_cov" in capsys.readouterr().out


def test_simulate_columns(tmp_path):
    out = tmp_path / "sim.csv"
    assert main(["simulate", "--what", "best-beam", *DEFAULTS, "--k", "1", "--theta-db", "0",
                 "--n-samples", "400", "--output", str(out)]) == 0
    _, columns, data = read_csv(out)
    assert columns == ["theta_db", "k", "p_best", "p_random", "std_error_best",
                       "std_error_random", "n_samples", "seed"]
    assert data[0, 6] == 400


@pytest.mark.parametrize("what, extra", [
    ("coverage", ["--theta-db", "-10:20:10"]),
    ("best-beam", ["--k", "1:2", "--theta-db", "0"]),
    ("beam-switch", ["--k", "2", "--theta-db", "0"]),
])
def test_compare_agrees(tmp_path, what, extra):
    out = tmp_path / "cmp.csv"
    assert main(["compare", "--what", what, *DEFAULTS, *extra, "--n-samples", "20000",
                 "--seed", "1", "--output", str(out)]) == 0
    _, columns, data = read_csv(out)
    z_cols = [i for i, c in enumerate(columns) if c.startswith("z_score")]
    assert z_cols
    assert np.all(np.abs(data[:, z_cols]) <= 4)
