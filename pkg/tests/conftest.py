import numpy as np
import pytest

from covlab import EnsembleConfig, distribution
from covlab.montecarlo import collect_spectra

ACCEPTANCE = pytest.StashKey[list]()


def pytest_configure(config):
    config.stash[ACCEPTANCE] = []


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = config.stash.get(ACCEPTANCE, [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines):
            terminalreporter.write_line(line)


@pytest.fixture
def acceptance_log(request):
    """Record one pass/fail line per acceptance criterion."""
    log = request.config.stash[ACCEPTANCE]

    def record(number, ok, detail):
        line = f"criterion {number}: {'PASS' if ok else 'FAIL'}  {detail}"
        log.append(line)
        print(line)
        return ok

    return record


class SpectraCache:
    """Eigenvalue arrays shared between tests.

    Replica streams are keyed by replica index, so a shorter run is the
    prefix of a longer one and only the longest request is ever computed.
    """

    def __init__(self):
        self._store = {}

    def config(self, dist, replicas, N=64, M=4096, t=None, sampler="entries", seed=42):
        cfg = EnsembleConfig(N, M, distribution(dist), replicas=replicas, seed=seed,
                             sampler=sampler)
        return cfg if t is None else cfg.with_truncation(t)

    def get(self, cfg):
        key = (cfg.N, cfg.M, cfg.dist, cfg.seed, cfg.truncation, cfg.sampler)
        have = self._store.get(key)
        if have is None or have.shape[0] < cfg.replicas:
            have = collect_spectra(cfg)
            self._store[key] = have
        return have[: cfg.replicas]


@pytest.fixture(scope="session")
def spectra_cache():
    return SpectraCache()


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
