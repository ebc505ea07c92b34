import csv
import io
import json
import math

import numpy as np
import pytest

from tfzeros import __version__
from tfzeros.analytic import pair_zero_lattice
from tfzeros.cli import config_hash, main
from tfzeros.signals import ChirpPair


def run(tmp_path, name, *args):
    out = tmp_path / name
    code = main([*args, "--out", str(out)])
    return code, out


def read_csv(path):
    lines = [ln for ln in path.read_text().splitlines() if not ln.startswith("#")]
    return list(csv.DictReader(io.StringIO("\n".join(lines))))


PAIR = ["--signal", "pair", "--a1", "-1", "--a2", "0", "--b", "0.4", "--gamma1", "100", "--gamma2", "40"]


def test_noiseless_pair_zeros_match_lattice(tmp_path):
    code, out = run(tmp_path, "z", "zeros", *PAIR, "--noiseless", "--domain", "-3,-3,3,3")
    assert code == 0
    rows = read_csv(out / "zeros.csv")
    z = np.array([complex(float(r["tau"]), float(r["omega"])) for r in rows])
    lat = pair_zero_lattice(ChirpPair(-1, 0, 0.4, 100, 40), range(-10, 10))
    assert len(z) > 0 and all(np.min(np.abs(lat - w)) < 1e-8 for w in z)
    assert all(r["multiplicity"] == "1" for r in rows)


def test_zeros_reproducible_bytes(tmp_path):
    args = ["zeros", "--signal", "hermite", "--k", "1", "--gamma", "5", "--seed", "4", "--domain", "-2,-2,2,2"]
    _, a = run(tmp_path, "a", *args)
    _, b = run(tmp_path, "b", *args)
    for name in ("zeros.csv", "spectrogram.csv", "summary.json", "config.json"):
        assert (a / name).read_bytes() == (b / name).read_bytes()


def test_pure_noise_zero_count_near_area(tmp_path):
    code, out = run(tmp_path, "z", "zeros", "--gamma", "0", "--seed", "1", "--domain", "-3,-3,3,3")
    s = json.loads((out / "summary.json").read_text())
    assert code == 0 and abs(s["total_count"] - 36) < 5 * 6


def test_outputs_are_stamped(tmp_path):
    code, out = run(tmp_path, "z", "zeros", "--seed", "9", "--domain", "-1,-1,1,1")
    cfg = json.loads((out / "config.json").read_text())
    assert cfg["version"] == __version__ and cfg["master_seed"] == 9
    assert cfg["config_hash"] == config_hash(cfg["config"])
    assert (out / "zeros.csv").read_text().startswith(f"# tfzeros {__version__} config_hash={cfg['config_hash']}")


def test_intensity_without_realizations(tmp_path):
    code, out = run(tmp_path, "i", "intensity", "--k", "10", "--gamma", "400", "--n", "0", "--domain", "-3,-3,3,3")
    assert code == 0
    assert (out / "analytic_density.csv").exists() and not (out / "histogram.csv").exists()
    rows = read_csv(out / "analytic_density.csv")
    assert len(rows) == 193 * 193 and float(rows[0]["tau"]) == -3.0


def test_intensity_chirp_figure_grid(tmp_path):
    code, out = run(tmp_path, "i", "intensity", "--signal", "chirp", "--gamma", "100", "--a", "-5", "--b", "0.4",
                    "--n", "0", "--res", "8", "--domain", "-3,-3,3,3")
    assert code == 0 and len(read_csv(out / "analytic_density.csv")) == 49 * 49


def test_intensity_thread_count_does_not_change_bytes(tmp_path):
    args = ["intensity", "--k", "1", "--gamma", "100", "--n", "300", "--domain", "-1.4,-1.4,1.4,1.4"]
    _, a = run(tmp_path, "a", *args, "--threads", "1")
    _, b = run(tmp_path, "b", *args, "--threads", "3")
    for f in ("histogram.csv", "radial_profile.csv", "summary.json", "config.json"):
        assert (a / f).read_bytes() == (b / f).read_bytes()


def test_counts_report_analytic_mean(tmp_path):
    code, out = run(tmp_path, "c", "counts", "--k", "2", "--gamma", "20", "--n", "500")
    d = json.loads((out / "counts.json").read_text())
    assert code == 0 and d["analytic_mean"] == pytest.approx(2.0)
    assert abs(d["statistics"]["mean"] - 2.0) <= 3 * d["statistics"]["std_error"] + 1e-12


def test_trap_hermite_auto_threshold_passes(tmp_path):
    code, out = run(tmp_path, "t", "trap", "--k", "1", "--eps", "0.05", "--n", "500", "--n-sup", "5000")
    rep = json.loads((out / "trap.json").read_text())["report"]
    assert code == 0 and rep["verdict"] == "pass"
    assert rep["details"]["gamma_threshold"] > 0


def test_trap_rejects_large_eps(tmp_path):
    code, out = run(tmp_path, "t", "trap", "--eps", "0.3")
    assert code == 1 and not out.exists()


def test_trap_separation_violated_exits_three(tmp_path):
    code, out = run(tmp_path, "t", "trap", "--signal", "pair", "--a1", "0", "--a2", "0.3",
                    "--gamma1", "100", "--gamma2", "1", "--n", "50", "--n-sup", "500")
    assert code == 3
    rep = json.loads((out / "trap.json").read_text())["report"]
    assert rep["verdict"] == "not-applicable"


def test_sup_command(tmp_path):
    code, out = run(tmp_path, "s", "sup", "--n", "2000")
    d = json.loads((out / "sup.json").read_text())
    assert code == 0 and len(d["tail"]) == 10 and all(r["ok"] for r in d["tail"])


def test_validate_passes_by_default(tmp_path):
    code, out = run(tmp_path, "v", "validate", "--family", "hermite")
    d = json.loads((out / "validate.json").read_text())
    assert code == 0 and d["failures"] == []
    assert all("Hermite" in c["signal"] for c in d["checks"])


def test_validate_impossible_tolerance_fails(tmp_path):
    code, out = run(tmp_path, "v", "validate", "--family", "chirp", "--tol", "1e-16")
    d = json.loads((out / "validate.json").read_text())
    assert code == 2 and len(d["failures"]) > 0


def test_config_file_and_flag_precedence(tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("# counts of a chirp strip\nsignal = chirp\nb = 0.4\ngamma = 10\nn = 40\nseed = 3\n")
    code, out = run(tmp_path, "c", "counts", "--config", str(cfg), "--n", "60")
    resolved = json.loads((out / "config.json").read_text())["config"]
    assert code == 0 and resolved["n"] == 60 and resolved["signal"] == "chirp" and resolved["b"] == 0.4


@pytest.mark.parametrize("args", [
    ["counts", "--region", "hexagon:1"],
    ["zeros", "--domain", "1,1,0,0"],
    ["zeros", "--res", "4"],
    ["validate", "--family", "wavelet"],
    ["counts", "--n", "0"],
])
def test_usage_errors_exit_one_without_output(tmp_path, args):
    out = tmp_path / "x"
    assert main([*args, "--out", str(out)]) == 1
    assert not out.exists()


def test_unknown_config_key(tmp_path):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text("colour = blue\n")
    code, out = run(tmp_path, "c", "counts", "--config", str(cfg))
    assert code == 1 and not out.exists()


@pytest.mark.parametrize("args", [["nonsense"], ["zeros", "--k", "one"], []])
def test_argparse_errors_use_exit_one(args):
    with pytest.raises(SystemExit) as e:
        main(args)
    assert e.value.code == 1
