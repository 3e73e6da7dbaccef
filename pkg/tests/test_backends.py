"""Cross-checks between the compiled kernels and the numpy fallback.

DTW costs must agree bitwise (same IEEE operations in the same per-cell
order); transcendental-based kernels agree to ~1e-12 relative.
"""

import numpy as np
import pytest

from newsflow import _backend, _purepy
from newsflow.divergence import jsd

kernels = pytest.importorskip(
    "newsflow._kernels", reason="compiled extension not built"
)

BACKENDS = {"purepy": _purepy, "cython": kernels}


def test_active_backend_is_listed():
    assert _backend.BACKEND_NAME in _backend.available_backends()


def test_pure_python_env_forces_fallback():
    import subprocess
    import sys
    from pathlib import Path

    src = str(Path(__file__).resolve().parent.parent / "src")
    out = subprocess.run(
        [sys.executable, "-c", "import newsflow; print(newsflow.BACKEND_NAME)"],
        capture_output=True,
        text=True,
        env={"PYTHONPATH": src, "NEWSFLOW_PURE_PYTHON": "1"},
    )
    assert out.stdout.strip() == "purepy"


class TestParity:
    def test_dtw_cost_bitwise(self, rng):
        for _ in range(300):
            a = rng.normal(size=int(rng.integers(1, 40)))
            b = rng.normal(size=int(rng.integers(1, 40)))
            assert _purepy.dtw_cost(a, b) == kernels.dtw_cost(a, b)

    def test_dtw_cost_banded(self, rng):
        for _ in range(100):
            n = int(rng.integers(5, 25))
            a = rng.normal(size=n)
            b = rng.normal(size=n)
            band = int(rng.integers(0, n))
            assert _purepy.dtw_cost(a, b, band) == kernels.dtw_cost(a, b, band)

    def test_dtw_paths_identical(self, rng):
        for _ in range(200):
            a = rng.normal(size=int(rng.integers(2, 20)))
            b = rng.normal(size=int(rng.integers(2, 20)))
            c1, p1 = _purepy.dtw_cost_path(a, b)
            c2, p2 = kernels.dtw_cost_path(a, b)
            assert c1 == c2
            np.testing.assert_array_equal(p1, p2)

    def test_pairwise_matrix_bitwise(self, rng):
        x = rng.normal(size=(25, 31))
        np.testing.assert_array_equal(_purepy.pairwise_dtw(x), kernels.pairwise_dtw(x))

    def test_pairwise_chunking_invariant(self, rng):
        x = rng.normal(size=(13, 17))
        full = _purepy.pairwise_dtw(x, chunk=10_000)
        tiny = _purepy.pairwise_dtw(x, chunk=3)
        np.testing.assert_array_equal(full, tiny)

    def test_softdtw_close(self, rng):
        for gamma in (0.05, 1.0):
            a = rng.normal(size=15)
            b = rng.normal(size=12)
            v1 = _purepy.softdtw_cost(a, b, gamma)
            v2 = kernels.softdtw_cost(a, b, gamma)
            assert abs(v1 - v2) < 1e-12 * max(1.0, abs(v1))

    def test_softdtw_grad_close(self, rng):
        a = rng.normal(size=14)
        b = rng.normal(size=11)
        v1, g1 = _purepy.softdtw_grad(a, b, 0.8)
        v2, g2 = kernels.softdtw_grad(a, b, 0.8)
        assert abs(v1 - v2) < 1e-12
        np.testing.assert_allclose(g1, g2, atol=1e-12)

    def test_paired_jsd_close(self, rng):
        for _ in range(50):
            w, k = int(rng.integers(1, 20)), int(rng.integers(2, 40))
            a = rng.dirichlet(np.ones(k), w)
            b = rng.dirichlet(np.ones(k), w)
            v1 = _purepy.paired_jsd_mean(a, b)
            v2 = kernels.paired_jsd_mean(a, b)
            assert abs(v1 - v2) < 1e-13

    def test_paired_jsd_with_exact_zeros(self):
        a = np.array([[1.0, 0.0, 0.0], [0.5, 0.5, 0.0]])
        b = np.array([[0.0, 1.0, 0.0], [0.5, 0.25, 0.25]])
        v1 = _purepy.paired_jsd_mean(a, b)
        v2 = kernels.paired_jsd_mean(a, b)
        assert abs(v1 - v2) < 1e-14
        assert np.isfinite(v1)


class TestKernelAgainstLibrary:
    """The hot kernel and the validated public implementation must agree."""

    @pytest.mark.parametrize("name", sorted(BACKENDS))
    def test_paired_jsd_matches_divergence_module(self, rng, name):
        impl = BACKENDS[name]
        for _ in range(200):
            k = int(rng.integers(2, 30))
            p = rng.dirichlet(np.ones(k))
            q = rng.dirichlet(np.ones(k))
            kernel_value = impl.paired_jsd_mean(p[None, :], q[None, :])
            assert abs(kernel_value - jsd(p, q)) < 1e-12

    @pytest.mark.parametrize("name", sorted(BACKENDS))
    def test_read_only_inputs_accepted(self, rng, name):
        impl = BACKENDS[name]
        a = rng.normal(size=9)
        b = rng.normal(size=9)
        a.setflags(write=False)
        b.setflags(write=False)
        assert np.isfinite(impl.dtw_cost(a, b))
        block = rng.dirichlet(np.ones(4), 3)
        block.setflags(write=False)
        assert np.isfinite(impl.paired_jsd_mean(block, block))
