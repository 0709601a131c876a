"""Fixtures compartilhadas dos testes do simulador MIMO."""

import logging
import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent.parent / 'scripts' / 'mimo'))

from channel import sample_channel, trial_rng  # noqa: E402
from constellation import build_qam  # noqa: E402
from utils import montar_config  # noqa: E402


def pytest_configure(config):
    config.addinivalue_line('markers', 'lento: varreduras Monte Carlo com milhares de tentativas')


@pytest.fixture(autouse=True)
def ambiente_limpo(monkeypatch):
    for nome in ('MIMO_WORKERS', 'MIMO_LOG_FORMAT', 'MIMO_LOG_LEVEL', 'MIMO_EXPORT_DIR'):
        monkeypatch.delenv(nome, raising=False)


@pytest.fixture(autouse=True)
def restaurar_logs():
    raiz = logging.getLogger()
    handlers, nivel = list(raiz.handlers), raiz.level
    yield
    for handler in list(raiz.handlers):
        if handler not in handlers:
            raiz.removeHandler(handler)
    raiz.setLevel(nivel)


@pytest.fixture
def rng():
    return np.random.default_rng(20240501)


@pytest.fixture
def qam4():
    return build_qam(4)


@pytest.fixture
def qam16():
    return build_qam(16)


@pytest.fixture
def canal_alto():
    """Canal 32×4 fixo: bem condicionado, S_k pequeno após poucas iterações."""
    return sample_channel(trial_rng(7, 0), 32, 4).H


@pytest.fixture
def fazer_config():
    def _fazer(**valores):
        base = {'n': 8, 'k_users': 4, 'mod': 4, 'snr': '10', 'trials': 10, 'seed': 1, 'workers': 1}
        base.update(valores)
        return montar_config(base)
    return _fazer
