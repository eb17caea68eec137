"""Shared helpers: random matrix stacks and independent reference routes.

The reference implementations here deliberately use different numerics
than the package (explicit Kronecker products, det/inv instead of
Cholesky factorizations, python loops instead of vectorized kernels) so
agreement between the two is meaningful.
"""

from pathlib import Path

import numpy as np
import pytest

DEMO_SPEC = Path(__file__).resolve().parents[1] / "demo" / "three_region.spec"

# 4x4 expansion matrix mapping the lexicographic Sinclair product basis
# onto the Kennaugh basis.
_EXPANSION = np.array(
    [
        [1, 0, 0, 1],
        [1, 0, 0, -1],
        [0, 1, 1, 0],
        [0, 1j, -1j, 0],
    ],
    dtype=np.complex128,
)


def random_sinclair_stack(rng, n, scale=1.0):
    """(n, 2, 2) reciprocal scattering matrices with complex entries."""
    vals = scale * (rng.standard_normal((n, 3)) + 1j * rng.standard_normal((n, 3)))
    s = np.empty((n, 2, 2), dtype=np.complex128)
    s[:, 0, 0] = vals[:, 0]
    s[:, 0, 1] = vals[:, 1]
    s[:, 1, 0] = vals[:, 1]
    s[:, 1, 1] = vals[:, 2]
    return s


def random_psd_stack(rng, n, looks=4, scale=1.0):
    """(n, 3, 3) Hermitian positive semidefinite matrices.

    Built as averaged outer products of `looks` complex Gaussian vectors,
    which is also how measured coherency matrices arise.
    """
    z = scale * (
        rng.standard_normal((n, looks, 3)) + 1j * rng.standard_normal((n, looks, 3))
    )
    return np.einsum("nla,nlb->nab", z, z.conj()) / looks


def kennaugh_expansion_oracle(s):
    """Coherent Kennaugh matrices via the literal matrix construction
    K = (1/2) A* (S kron S*) A^H.

    Asserts that the imaginary residue of the construction is at floating
    point noise level before discarding it.
    """
    s = np.asarray(s, dtype=np.complex128)
    single = s.ndim == 2
    if single:
        s = s[None]
    out = np.empty(s.shape[:-2] + (4, 4), dtype=np.float64)
    for idx in range(s.shape[0]):
        kron = np.kron(s[idx], s[idx].conj())
        k = 0.5 * (_EXPANSION.conj() @ kron @ _EXPANSION.conj().T)
        scale = max(np.abs(k).max(), np.finfo(float).tiny)
        assert np.abs(k.imag).max() <= 1e-12 * scale
        out[idx] = k.real
    return out[0] if single else out


def wishart_pixel_oracle(t, v):
    """ln|V| + Tr(V^-1 T) via determinant and inverse."""
    sign, logdet = np.linalg.slogdet(v)
    assert sign.real > 0
    return float(logdet.real + np.trace(np.linalg.inv(v) @ t).real)


def wishart_center_oracle(v1, v2):
    s1, ld1 = np.linalg.slogdet(v1)
    s2, ld2 = np.linalg.slogdet(v2)
    assert s1.real > 0 and s2.real > 0
    cross = np.trace(np.linalg.inv(v1) @ v2) + np.trace(np.linalg.inv(v2) @ v1)
    return float(0.5 * (ld1.real + ld2.real + cross.real))


@pytest.fixture(scope="session")
def demo_scene(tmp_path_factory):
    """The demo scene generated once per test session."""
    from geopolsar import run_generate

    out = tmp_path_factory.mktemp("demo") / "scene"
    run_generate(DEMO_SPEC, out)
    return out
