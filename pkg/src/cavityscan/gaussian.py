"""Phase-space representation of multimode Gaussian states and channels.

All objects use the quadrature ordering (Q1, P1, Q2, P2, ...) and the
anticommutator covariance convention in which the vacuum covariance is the
identity.  A unitary on n modes generated by a quadratic Hamiltonian is a
2n x 2n symplectic matrix S with S @ Omega @ S.T == Omega; a general Gaussian
channel is a triple (X, Y, nu) acting as

    mean -> X @ mean + nu,    cov -> X @ cov @ X.T + Y.

Everything here is an immutable value; all operations are pure functions.
"""

from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "symplectic_form",
    "GaussianState",
    "SymplecticMap",
    "GaussianChannel",
    "vacuum_state",
    "thermal_state",
    "apply_symplectic",
    "apply_channel",
    "compose_channels",
    "reduce_to_channel",
    "rotation",
    "single_mode_squeezer",
    "two_mode_squeezer",
    "beam_splitter",
    "sum_gate",
    "direct_sum",
]

SYMPLECTIC_TOL = 1e-10
PSD_TOL = 1e-9
SYMMETRY_TOL = 1e-12

OMEGA_1 = np.array([[0.0, 1.0], [-1.0, 0.0]])


def symplectic_form(n_modes):
    """Return the 2n x 2n symplectic form for the (Q1, P1, ...) ordering."""
    return np.kron(np.eye(n_modes), OMEGA_1)


def _as_square(matrix, name):
    arr = np.array(matrix, dtype=float)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1] or arr.shape[0] % 2:
        raise ValueError(f"{name} must be a square 2n x 2n matrix, got shape {arr.shape}")
    return arr


def _min_eig_with_form(matrix, omega):
    """Smallest eigenvalue of the Hermitian matrix ``matrix + i*Omega``."""
    return float(np.linalg.eigvalsh(matrix + 1j * omega).min())


@dataclass(frozen=True)
class GaussianState:
    """Mean vector and covariance matrix of n bosonic modes.

    Parameters
    ----------
    mean : array_like
        Length 2n vector of first moments, ordering (Q1, P1, ..., Qn, Pn).
    cov : array_like
        Real symmetric 2n x 2n covariance matrix; vacuum = identity.
    """

    mean: np.ndarray
    cov: np.ndarray

    def __post_init__(self):
        mean = np.array(self.mean, dtype=float).ravel()
        cov = _as_square(self.cov, "cov")
        if mean.size != cov.shape[0]:
            raise ValueError(f"mean length {mean.size} does not match cov shape {cov.shape}")
        scale = max(np.abs(cov).max(), 1.0)
        if np.abs(cov - cov.T).max() > SYMMETRY_TOL * scale:
            raise ValueError("covariance matrix is not symmetric")
        mean.setflags(write=False)
        cov.setflags(write=False)
        object.__setattr__(self, "mean", mean)
        object.__setattr__(self, "cov", cov)

    @property
    def n_modes(self):
        return self.mean.size // 2

    def is_physical(self, tol=PSD_TOL):
        """True when cov + i*Omega is positive semidefinite within ``tol``."""
        return _min_eig_with_form(self.cov, symplectic_form(self.n_modes)) >= -tol


@dataclass(frozen=True)
class SymplecticMap:
    """A real 2n x 2n matrix S with S @ Omega @ S.T == Omega."""

    matrix: np.ndarray

    def __post_init__(self):
        mat = _as_square(self.matrix, "matrix")
        omega = symplectic_form(mat.shape[0] // 2)
        defect = np.abs(mat @ omega @ mat.T - omega).max()
        if defect > SYMPLECTIC_TOL:
            raise ValueError(f"matrix is not symplectic (|S Omega S^T - Omega|_max = {defect:.3e})")
        mat.setflags(write=False)
        object.__setattr__(self, "matrix", mat)

    @property
    def n_modes(self):
        return self.matrix.shape[0] // 2

    def inverse(self):
        """Group inverse, computed as -Omega @ S.T @ Omega."""
        omega = symplectic_form(self.n_modes)
        return SymplecticMap(-omega @ self.matrix.T @ omega)

    def __matmul__(self, other):
        return SymplecticMap(self.matrix @ other.matrix)


@dataclass(frozen=True)
class GaussianChannel:
    """Gaussian channel (X, Y, nu): mean -> X mean + nu, cov -> X cov X^T + Y."""

    scale: np.ndarray
    noise: np.ndarray
    displacement: np.ndarray = field(default=None)

    def __post_init__(self):
        scale = _as_square(self.scale, "scale")
        noise = _as_square(self.noise, "noise")
        if scale.shape != noise.shape:
            raise ValueError("scale and noise must have the same shape")
        disp = self.displacement
        disp = np.zeros(scale.shape[0]) if disp is None else np.array(disp, dtype=float).ravel()
        if disp.size != scale.shape[0]:
            raise ValueError("displacement length does not match scale")
        omega = symplectic_form(scale.shape[0] // 2)
        defect = float(np.linalg.eigvalsh(noise + 1j * omega - 1j * scale @ omega @ scale.T).min())
        if defect < -PSD_TOL:
            raise ValueError(f"channel is not completely positive (min eig = {defect:.3e})")
        for arr in (scale, noise, disp):
            arr.setflags(write=False)
        object.__setattr__(self, "scale", scale)
        object.__setattr__(self, "noise", noise)
        object.__setattr__(self, "displacement", disp)

    @property
    def n_modes(self):
        return self.scale.shape[0] // 2


def vacuum_state(n_modes):
    return GaussianState(np.zeros(2 * n_modes), np.eye(2 * n_modes))


def thermal_state(n_modes, variance=1.0):
    """Thermal state with covariance ``variance * I`` (variance = 1 + 2 nbar)."""
    if variance < 1.0:
        raise ValueError("thermal variance must be >= 1 (vacuum)")
    return GaussianState(np.zeros(2 * n_modes), variance * np.eye(2 * n_modes))


def apply_symplectic(s, state):
    mat = s.matrix if isinstance(s, SymplecticMap) else np.asarray(s, dtype=float)
    if mat.shape[0] != state.mean.size:
        raise ValueError("symplectic dimension does not match state")
    return GaussianState(mat @ state.mean, mat @ state.cov @ mat.T)


def apply_channel(channel, state):
    """Propagate ``state`` through ``channel``."""
    if channel.scale.shape[0] != state.mean.size:
        raise ValueError(
            f"channel acts on {channel.n_modes} modes but state has {state.n_modes}"
        )
    mean = channel.scale @ state.mean + channel.displacement
    cov = channel.scale @ state.cov @ channel.scale.T + channel.noise
    return GaussianState(mean, cov)


def compose_channels(second, first):
    """Channel equal to applying ``first`` then ``second``."""
    scale = second.scale @ first.scale
    noise = second.scale @ first.noise @ second.scale.T + second.noise
    disp = second.scale @ first.displacement + second.displacement
    return GaussianChannel(scale, noise, disp)


def _quad_indices(modes):
    idx = []
    for m in modes:
        idx.extend((2 * m, 2 * m + 1))
    return np.asarray(idx, dtype=int)


def reduce_to_channel(s, env_mean, env_cov, system_modes):
    """Reduce a joint symplectic on system + environment to a system channel.

    Writing the quadrature rows/columns of ``s`` restricted to the system
    block as A and the system-row/environment-column block as B, the reduced
    channel is X = A, Y = B @ env_cov @ B.T, nu = B @ env_mean.  Applying it
    to any system input reproduces the system marginal of the jointly evolved
    state, with the environment in the Gaussian state (env_mean, env_cov).

    Parameters
    ----------
    s : SymplecticMap
        Joint symplectic on all modes.
    env_mean, env_cov : array_like
        Moments of the environment modes (every mode not in ``system_modes``),
        in increasing mode order.
    system_modes : sequence of int
        Mode indices retained as the channel's system.
    """
    if not isinstance(s, SymplecticMap):
        s = SymplecticMap(s)
    n = s.n_modes
    system_modes = sorted(set(int(m) for m in system_modes))
    if not system_modes:
        raise ValueError("system_modes must be nonempty")
    if system_modes[0] < 0 or system_modes[-1] >= n:
        raise ValueError(f"system_modes out of range for {n}-mode symplectic")
    env_modes = [m for m in range(n) if m not in system_modes]

    env_mean = np.array(env_mean, dtype=float).ravel()
    env_cov = _as_square(env_cov, "env_cov")
    if env_mean.size != 2 * len(env_modes) or env_cov.shape[0] != 2 * len(env_modes):
        raise ValueError("environment moments do not match the environment mode count")
    if len(env_modes) and not GaussianState(env_mean, env_cov).is_physical():
        raise ValueError("environment covariance is unphysical")

    sys_q = _quad_indices(system_modes)
    env_q = _quad_indices(env_modes)
    a_block = s.matrix[np.ix_(sys_q, sys_q)]
    b_block = s.matrix[np.ix_(sys_q, env_q)]
    return GaussianChannel(a_block, b_block @ env_cov @ b_block.T, b_block @ env_mean)


# ---------------------------------------------------------------------------
# Symplectic factory functions
# ---------------------------------------------------------------------------

def rotation(theta):
    """Single-mode phase-space rotation by ``theta``."""
    c, s = np.cos(theta), np.sin(theta)
    return SymplecticMap(np.array([[c, -s], [s, c]]))


def single_mode_squeezer(gain):
    """Single-mode squeezer mapping the vacuum to cov diag(1/gain, gain)."""
    if gain < 1.0:
        raise ValueError("squeezer gain must be >= 1")
    return SymplecticMap(np.diag([1.0 / np.sqrt(gain), np.sqrt(gain)]))


def two_mode_squeezer(r):
    """Two-mode squeezer; on thermal input N*I it yields blocks
    N cosh(2r) I on the diagonal and N sinh(2r) sigma_z off-diagonal."""
    if r < 0.0:
        raise ValueError("two-mode squeezing parameter must be >= 0")
    ch, sh = np.cosh(r), np.sinh(r)
    sz = np.diag([1.0, -1.0])
    eye = np.eye(2)
    return SymplecticMap(np.block([[ch * eye, sh * sz], [sh * sz, ch * eye]]))


def beam_splitter(transmissivity):
    """Two-mode beam splitter with the given power transmissivity."""
    if not 0.0 <= transmissivity <= 1.0:
        raise ValueError("transmissivity must lie in [0, 1]")
    t, r = np.sqrt(transmissivity), np.sqrt(1.0 - transmissivity)
    eye = np.eye(2)
    return SymplecticMap(np.block([[t * eye, r * eye], [-r * eye, t * eye]]))


def sum_gate():
    """Two-mode SUM gate: Q_anc -> Q_anc + Q, P -> P - P_anc."""
    pi_q = np.diag([1.0, 0.0])
    pi_p = np.diag([0.0, 1.0])
    eye = np.eye(2)
    return SymplecticMap(np.block([[eye, -pi_p], [pi_q, eye]]))


def direct_sum(*maps):
    """Block-diagonal symplectic acting independently on groups of modes."""
    mats = [m.matrix if isinstance(m, SymplecticMap) else np.asarray(m, float) for m in maps]
    size = sum(m.shape[0] for m in mats)
    out = np.zeros((size, size))
    pos = 0
    for m in mats:
        k = m.shape[0]
        out[pos:pos + k, pos:pos + k] = m
        pos += k
    return SymplecticMap(out)
