import numpy as np
import pytest

from cavityscan.gaussian import (SymplecticMap, beam_splitter, direct_sum,
                                 rotation, single_mode_squeezer, symplectic_form)


def random_rotation(rng):
    return rotation(rng.uniform(-np.pi, np.pi))


def random_single_mode_symplectic(rng):
    s = random_rotation(rng).matrix @ single_mode_squeezer(rng.uniform(1.0, 5.0)).matrix \
        @ random_rotation(rng).matrix
    return SymplecticMap(s)


def random_symplectic(rng, n_modes, layers=3):
    """Random n-mode symplectic from layered local squeezers and pair mixers."""
    total = np.eye(2 * n_modes)
    for _ in range(layers):
        local = direct_sum(*[random_single_mode_symplectic(rng) for _ in range(n_modes)])
        total = local.matrix @ total
        for i in range(n_modes - 1):
            mixer = np.eye(2 * n_modes)
            block = beam_splitter(rng.uniform(0.0, 1.0)).matrix
            sl = slice(2 * i, 2 * i + 4)
            mixer[sl, sl] = block
            total = mixer @ total
    return SymplecticMap(total)


def random_physical_cov(rng, n_modes, max_thermal=3.0):
    s = random_symplectic(rng, n_modes, layers=2).matrix
    base = np.diag(rng.uniform(1.0, max_thermal, size=n_modes).repeat(2))
    return s @ base @ s.T


def min_physicality_eig(cov):
    n = cov.shape[0] // 2
    return float(np.linalg.eigvalsh(cov + 1j * symplectic_form(n)).min())


@pytest.fixture
def rng():
    return np.random.default_rng(20240811)
