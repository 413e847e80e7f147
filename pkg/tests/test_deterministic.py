from cli.commands import EXIT_OK, main
from common.experiment.io import CONFIG_NAME, FRF_NAME, spectrum_file_name

QUICK_ALGORITHM = {"nu0": 0.1, "beta": 0.1, "tol": 1e-12, "l_max": 2, "max_evals": 30, "d_floor_Hz": 1e-6}


def _run(config, root):
    data, results = root / "data", root / "results"
    assert main(["gen", "--config", str(config), "--out", str(data), "--seed", "11", "-q"]) == EXIT_OK
    assert main(["fit", "--config", str(data / CONFIG_NAME), "--out", str(results), "-q"]) == EXIT_OK
    return data, results


def test_gen_and_fit_are_byte_identical_across_runs(tmp_path, campaign_config):
    config = campaign_config(algorithm=QUICK_ALGORITHM)
    first_data, first_results = _run(config, tmp_path / "a")
    second_data, second_results = _run(config, tmp_path / "b")

    for name in (CONFIG_NAME, FRF_NAME, spectrum_file_name(1), spectrum_file_name(5)):
        assert (first_data / name).read_bytes() == (second_data / name).read_bytes()
    for name in ("report.json", "deviation.csv", "history.csv"):
        assert (first_results / name).read_bytes() == (second_results / name).read_bytes()
