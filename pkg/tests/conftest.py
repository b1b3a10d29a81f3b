import numpy as np
import pytest

from sacsp.data import EpochSet


def random_epochs(seed: int, n_channels: int = 6, n_samples: int = 100, per_class: int = 20,
                  fs: float = 100.0, mixing_scale: float = 0.5) -> EpochSet:
    """Two classes of correlated Gaussian noise with different channel variances."""
    rng = np.random.default_rng(seed)
    mix = np.eye(n_channels) + mixing_scale * rng.standard_normal((n_channels, n_channels))
    scales = [1 + rng.random(n_channels) * 2, 1 + rng.random(n_channels) * 2]
    data, labels = [], []
    for c in (1, 2):
        x = rng.standard_normal((per_class, n_channels, n_samples)) * scales[c - 1][:, None]
        data.append(np.einsum("ij,ejt->eit", mix, x))
        labels += [c] * per_class
    data = np.concatenate(data)
    data -= data.mean(axis=-1, keepdims=True)
    return EpochSet(data, np.array(labels), fs)


def random_spd(rng: np.random.Generator, n: int, floor: float = 0.1) -> np.ndarray:
    a = rng.standard_normal((n, n))
    return a @ a.T + floor * np.eye(n)


@pytest.fixture
def small_set() -> EpochSet:
    return random_epochs(0)


_ACCEPTANCE: dict[str, tuple[str, str]] = {}


def pytest_runtest_logreport(report):
    if "test_acceptance.py" not in report.nodeid:
        return
    if report.when == "call" or (report.when == "setup" and report.outcome != "passed"):
        name = report.nodeid.split("::")[-1]
        detail = dict(report.user_properties).get("measured", "")
        _ACCEPTANCE[name] = ("PASS" if report.passed else "FAIL", detail)


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for name in sorted(_ACCEPTANCE):
        verdict, detail = _ACCEPTANCE[name]
        terminalreporter.write_line(f"{verdict}  {name}  {detail}")
