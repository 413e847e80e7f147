# tests/conftest.py
import sys
import os

import pytest

sys.path.insert(0, os.path.abspath(os.path.join(os.path.dirname(__file__), '..')))


def pytest_configure(config):
    config.addinivalue_line("markers", "slow: long synthetic round trips")


@pytest.fixture(scope="session")
def eta_plus_experiment():
    """Noisy synthetic campaign on the eta-plus drive table with the default truth."""
    from common.experiment.scenarios import eta_plus_pairs
    from common.experiment.synthetic import SyntheticTruth, generate_synthetic

    return generate_synthetic(SyntheticTruth(seed=7), eta_plus_pairs())


@pytest.fixture(scope="session")
def noiseless_experiment():
    from common.experiment.scenarios import eta_plus_pairs
    from common.experiment.synthetic import SyntheticTruth, generate_synthetic

    return generate_synthetic(SyntheticTruth(noise_floor=0.0), eta_plus_pairs())


CONFIG_DIR = os.path.abspath(os.path.join(os.path.dirname(__file__), '..', 'configs'))


@pytest.fixture
def campaign_config(tmp_path):
    """
    Write configs/<name>.yaml into tmp_path with section overrides and return
    its path. A section set to None is dropped.
    """
    import yaml

    def write(name="eta_plus", **sections):
        with open(os.path.join(CONFIG_DIR, f"{name}.yaml"), encoding="utf-8") as fh:
            config = yaml.safe_load(fh)
        for key, value in sections.items():
            if value is None:
                config.pop(key, None)
            else:
                config[key] = value
        path = tmp_path / f"{name}.yaml"
        path.write_text(yaml.safe_dump(config, sort_keys=False), encoding="utf-8")
        return path

    return write
