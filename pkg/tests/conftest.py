import datetime as dt

import numpy as np
import pytest

from newsflow import synth
from newsflow.core import ThetaMatrix


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def make_daily_corpus(rows, start="1960-01-01", source_id="test"):
    """Daily ThetaMatrix from a row matrix."""
    rows = np.asarray(rows, dtype=np.float64)
    first = dt.date.fromisoformat(start)
    dates = [first + dt.timedelta(days=i) for i in range(rows.shape[0])]
    return ThetaMatrix(source_id, dates, rows)


def constant_corpus(n_days=120, k=4, start="1960-01-01", source_id="const"):
    rows = np.tile(np.full(k, 1.0 / k), (n_days, 1))
    return make_daily_corpus(rows, start, source_id)


def dirichlet_corpus(n_days, k, seed, alpha=1.0, start="1960-01-01", source_id="iid"):
    rng = np.random.default_rng(seed)
    rows = rng.dirichlet(np.full(k, alpha), size=n_days)
    return make_daily_corpus(rows, start, source_id)


def two_regime_corpus(n_days=200, boundary=100, start="1960-01-01"):
    """One-hot topic A strictly before the boundary date, topic B from it on."""
    rows = np.zeros((n_days, 2))
    rows[:boundary, 0] = 1.0
    rows[boundary:, 1] = 1.0
    return make_daily_corpus(rows, start, "two-regime")


@pytest.fixture(scope="session")
def benchmark():
    """The standard synthetic benchmark; expensive, so shared per session."""
    corpora, events, labels = synth.standard_benchmark(seed=0)
    return corpora, events, labels
