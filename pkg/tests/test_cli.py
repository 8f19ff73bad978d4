import csv

import pytest

from ehdcnn import cli
from fixtures import write_housing_csv, write_wisdm_raw


def run(capsys, *argv):
    code = cli.main([str(a) for a in argv])
    out = capsys.readouterr()
    return code, out.out, out.err


def rows(path):
    with open(path, newline="") as fh:
        return list(csv.reader(fh))


@pytest.fixture(scope="module")
def housing(tmp_path_factory):
    return write_housing_csv(tmp_path_factory.mktemp("house") / "housing.csv")


def test_gen_data_shape_and_determinism(tmp_path, capsys):
    code, out, _ = run(capsys, "gen-data", "--fn", "sinc", "--m", 1000, "--dim", 10, "--out-dir", tmp_path / "a")
    assert code == 0 and "1000 rows x 11 columns" in out
    run(capsys, "gen-data", "--fn", "sinc", "--m", 1000, "--dim", 10, "--out-dir", tmp_path / "b")
    a = (tmp_path / "a" / "sinc_m1000_d10_s0.csv").read_bytes()
    b = (tmp_path / "b" / "sinc_m1000_d10_s0.csv").read_bytes()
    assert a == b
    table = rows(tmp_path / "a" / "sinc_m1000_d10_s0.csv")
    assert len(table) == 1001 and len(table[0]) == 11


def test_unknown_function_is_usage_error(capsys):
    code, _, err = run(capsys, "gen-data", "--fn", "tanc")
    assert code == cli.EXIT_USAGE and "invalid choice" in err


def test_missing_command_is_usage_error(capsys):
    assert run(capsys)[0] == cli.EXIT_USAGE


def test_train_house_defaults(tmp_path, capsys, housing):
    code, out, _ = run(capsys, "train", "--csv", housing, "--target-col", "price", "--batch", "full",
                       "--curvature", 0, "--out-dir", tmp_path)
    assert code == 0 and "final test rmse at c=0" in out
    table = rows(tmp_path / "history_c0.csv")
    assert table[0] == ["epoch", "curvature", "train_loss", "test_metric"]
    assert len(table) == 101
    assert all(float(r[1]) == 0.0 for r in table[1:])


def test_filter_wider_than_input_is_rejected(tmp_path, capsys, housing):
    code, _, err = run(capsys, "train", "--csv", housing, "--target-col", "price", "--filter-span", 20,
                       "--epochs", 1, "--out-dir", tmp_path)
    assert code == cli.EXIT_USAGE and "s <= n" in err


def test_bad_csv_is_data_error(tmp_path, capsys):
    bad = tmp_path / "bad.csv"
    bad.write_text("a,b,y\n1,2,3\n4,5\n")
    code, _, err = run(capsys, "train", "--csv", bad, "--epochs", 1, "--filter-span", 2, "--out-dir", tmp_path)
    assert code == cli.EXIT_DATA and "row 3" in err
    code, _, _ = run(capsys, "train", "--csv", tmp_path / "missing.csv", "--out-dir", tmp_path)
    assert code == cli.EXIT_DATA


def test_divergence_exit_code(tmp_path, capsys):
    code, _, _ = run(capsys, "train", "--fn", "cosc", "--m", 100, "--dim", 5, "--filter-span", 2, "--layers", 2,
                     "--curvature", 0, "--lr", "1e6", "--epochs", 3, "--out-dir", tmp_path)
    assert code == cli.EXIT_DIVERGED


def test_sweep_combined_csv(tmp_path, capsys):
    code, out, _ = run(capsys, "sweep", "--fn", "sinc", "--m", 100, "--dim", 4, "--filter-span", 2, "--layers", 2,
                       "--epochs", 3, "--out-dir", tmp_path)
    assert code == 0
    table = rows(tmp_path / "sweep.csv")
    assert len(table) == 1 + 6 * 3
    assert {float(r[1]) for r in table[1:]} == {0.0, 0.25, 0.5, 1.0, 2.0, 4.0}
    assert len(list(tmp_path.glob("history_c*.csv"))) == 6
    assert "curvature" in out and out.count("ok") == 6


def test_sweep_ablation_grid(tmp_path, capsys):
    code, _, _ = run(capsys, "sweep", "--fn", "sinc", "--m", 40, "--dim", 9, "--epochs", 1, "--batch", "full",
                     "--sweep", "0,1", "--ablation", "--out-dir", tmp_path)
    assert code == 0
    dirs = sorted(p.name for p in tmp_path.iterdir() if p.is_dir())
    assert len(dirs) == 16 and "ablation_s6_L3" in dirs and "ablation_s9_L6" in dirs
    assert len(rows(tmp_path / "ablation_s7_L5" / "sweep.csv")) == 1 + 2


def test_config_file_with_flag_override(tmp_path, capsys):
    conf = tmp_path / "run.conf"
    conf.write_text("# tiny run\nfn = sqrt_ratio\nm = 60\ndim = 4\nfilter-span = 2\nlayers = 2\n"
                    "epochs = 4\ncurvature = 0.5\nbatch = full\n")
    code, _, _ = run(capsys, "train", "--config", conf, "--epochs", 2, "--out-dir", tmp_path)
    assert code == 0
    table = rows(tmp_path / "history_c0p5.csv")
    assert len(table) == 3


def test_config_unknown_key(tmp_path, capsys):
    conf = tmp_path / "run.conf"
    conf.write_text("fn = sinc\nlearning_rate = 0.1\n")
    code, _, err = run(capsys, "train", "--config", conf)
    assert code == cli.EXIT_USAGE and "learning_rate" in err


def test_hyperbolicity_collinear_and_square(tmp_path, capsys):
    line = tmp_path / "line.csv"
    line.write_text("x,y\n" + "".join(f"{i},{2 * i}\n" for i in range(8)))
    code, out, _ = run(capsys, "hyperbolicity", "--csv", line, "--out-dir", tmp_path)
    assert code == 0
    table = rows(tmp_path / "hyperbolicity.csv")
    assert table[0] == ["delta", "quadruples_evaluated", "exhaustive"]
    assert float(table[1][0]) == pytest.approx(0.0, abs=1e-12) and table[1][2] == "True"

    square = tmp_path / "square.csv"
    square.write_text("x,y\n0,0\n1,0\n1,1\n0,1\n")
    run(capsys, "hyperbolicity", "--csv", square, "--out-dir", tmp_path)
    assert float(rows(tmp_path / "hyperbolicity.csv")[1][0]) == pytest.approx(0.4142136, abs=1e-6)


def test_hyperbolicity_too_few_points(tmp_path, capsys):
    tiny = tmp_path / "tiny.csv"
    tiny.write_text("x,y\n0,0\n1,0\n1,1\n")
    assert run(capsys, "hyperbolicity", "--csv", tiny, "--out-dir", tmp_path)[0] == cli.EXIT_DATA


def test_hyperbolicity_synthetic_sampled(tmp_path, capsys):
    code, out, _ = run(capsys, "hyperbolicity", "--fn", "cosc", "--m", 40, "--dim", 5,
                       "--max-quadruples", 5000, "--out-dir", tmp_path)
    assert code == 0 and "exhaustive=False" in out


def test_train_wisdm_classification(tmp_path, capsys):
    raw = write_wisdm_raw(tmp_path / "wisdm.txt", users=range(1, 5), per_run=90)
    code, out, _ = run(capsys, "train", "--wisdm", raw, "--train-users", 3, "--window", 10, "--filter-span", 9,
                       "--epochs", 2, "--out-dir", tmp_path)
    assert code == 0 and "accuracy" in out


def test_two_sources_is_usage_error(tmp_path, capsys, housing):
    assert run(capsys, "train", "--fn", "sinc", "--csv", housing, "--out-dir", tmp_path)[0] == cli.EXIT_USAGE
