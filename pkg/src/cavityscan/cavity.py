"""Three-port cavity susceptibility and its single-mode Gaussian channel.

A damped cavity couples three travelling modes: the measurement port (m),
the signal drive (s) and the intrinsic loss port (l).  In the spectral
domain the input-output map at detuning ``omega`` from resonance is the
unitary susceptibility matrix

    chi_kj(omega) = delta_kj - sqrt(gamma_k gamma_j) / (gamma/2 + i omega),

with gamma the total coupling rate.  Restricting to the measurement port
gives a single-mode Gaussian channel: a thermal-loss channel with
transmission |chi_mm|^2 and noise N_T, a rotation by theta_mm, and a
displacement |chi_ms| O(theta_ms) mu_s driven by the signal.

Angle convention: ``mixing_angles`` returns the principal values of
arg(chi_mm) and arg(chi_ms) of the exact complex entries, so that
|chi| O(theta) reproduces each entry exactly (this is what the channel
decomposition and all oracles require).  Note Re(chi_ms) < 0 at every
detuning, so theta_ms lies in the outer quadrants (theta_ms(0) = pi); the
inner-quadrant branch theta = arcsin(omega / sqrt(gamma^2/4 + omega^2))
seen in plots differs by a global pi, which no observable depends on.
At the removable zero of chi_mm (critical coupling on resonance) theta_mm
is defined as 0.

All rates are expressed in units of a common reference rate; the default
convention throughout the package is gamma_ell of the (first) cavity = 1.
"""

from dataclasses import dataclass

import numpy as np

from .gaussian import GaussianChannel, SymplecticMap

__all__ = [
    "CavityParams",
    "PORT_MEASURE",
    "PORT_SIGNAL",
    "PORT_LOSS",
    "susceptibility",
    "chi_mm",
    "chi_ms",
    "chi_mm_sq",
    "chi_ms_sq",
    "chi_mm_sq_expanded",
    "chi_ms_sq_expanded",
    "mixing_angles",
    "theta_mm_slope",
    "cavity_symplectic",
    "cavity_channel",
]

PORT_MEASURE, PORT_SIGNAL, PORT_LOSS = 0, 1, 2

# gamma_s / min(gamma_ell, gamma_m) bound under which the expanded forms
# are valid approximations of the exact susceptibilities.
EXPANSION_RATIO = 1e-3


@dataclass(frozen=True)
class CavityParams:
    """Coupling rates and occupations of one cavity.

    Parameters
    ----------
    gamma_ell : float
        Intrinsic loss rate (> 0).
    gamma_m : float
        Measurement-port coupling rate (>= 0).
    gamma_s : float
        Signal conversion rate (>= 0, typically << gamma_ell, gamma_m).
    n_t_bar : float
        Thermal occupation; the additive noise parameter is N_T = 1 + 2 n_t_bar.
    n_s : float
        Signal occupation-number spectral density.
    delta_a : float
        Signal bandwidth (> 0), in the same rate units.
    """

    gamma_ell: float
    gamma_m: float
    gamma_s: float = 0.0
    n_t_bar: float = 0.0
    n_s: float = 1.0
    delta_a: float = 1.0

    def __post_init__(self):
        if self.gamma_ell <= 0:
            raise ValueError("gamma_ell must be > 0")
        if self.gamma_m < 0 or self.gamma_s < 0:
            raise ValueError("coupling rates must be >= 0")
        if self.n_t_bar < 0 or self.n_s < 0:
            raise ValueError("occupations must be >= 0")
        if self.delta_a <= 0:
            raise ValueError("delta_a must be > 0")

    @property
    def gamma(self):
        """Total coupling rate gamma_m + gamma_ell + gamma_s."""
        return self.gamma_m + self.gamma_ell + self.gamma_s

    @property
    def n_t(self):
        """Additive noise parameter N_T = 1 + 2 n_t_bar."""
        return 1.0 + 2.0 * self.n_t_bar

    @property
    def beta(self):
        """Coupling ratio gamma_m / gamma_ell."""
        return self.gamma_m / self.gamma_ell


def susceptibility(params, omega):
    """Exact 3x3 complex susceptibility matrix at detuning ``omega``.

    Port order is (measurement, signal, loss); the matrix is unitary.
    """
    rates = np.array([params.gamma_m, params.gamma_s, params.gamma_ell])
    v = np.sqrt(rates)
    return np.eye(3) - np.outer(v, v) / (params.gamma / 2.0 + 1j * omega)


def chi_mm(params, omega):
    """Measurement-to-measurement entry of the susceptibility matrix."""
    omega = np.asarray(omega, dtype=float)
    return 1.0 - params.gamma_m / (params.gamma / 2.0 + 1j * omega)


def chi_ms(params, omega):
    """Signal-to-measurement entry of the susceptibility matrix."""
    omega = np.asarray(omega, dtype=float)
    return -np.sqrt(params.gamma_m * params.gamma_s) / (params.gamma / 2.0 + 1j * omega)


def chi_mm_sq(params, omega):
    """Exact |chi_mm|^2 (cavity transmission)."""
    omega = np.asarray(omega, dtype=float)
    denom = (params.gamma / 2.0) ** 2 + omega**2
    return 1.0 - params.gamma_m * (params.gamma_ell + params.gamma_s) / denom


def chi_ms_sq(params, omega):
    """Exact |chi_ms|^2 (signal transmission)."""
    omega = np.asarray(omega, dtype=float)
    return params.gamma_m * params.gamma_s / ((params.gamma / 2.0) ** 2 + omega**2)


def _check_expansion(params):
    bound = EXPANSION_RATIO * min(params.gamma_ell, params.gamma_m)
    if params.gamma_s > bound:
        raise ValueError(
            "expanded susceptibilities require gamma_s <= "
            f"{EXPANSION_RATIO:g} * min(gamma_ell, gamma_m); got gamma_s = {params.gamma_s:g}"
        )


def chi_mm_sq_expanded(params, omega):
    """|chi_mm|^2 with gamma_s dropped from the total rate (fast approximation)."""
    _check_expansion(params)
    omega = np.asarray(omega, dtype=float)
    loaded = params.gamma_m + params.gamma_ell
    return ((params.gamma_m - params.gamma_ell) ** 2 / 4.0 + omega**2) / (
        (loaded / 2.0) ** 2 + omega**2
    )


def chi_ms_sq_expanded(params, omega):
    """|chi_ms|^2 with gamma_s dropped from the total rate (fast approximation)."""
    _check_expansion(params)
    omega = np.asarray(omega, dtype=float)
    loaded = params.gamma_m + params.gamma_ell
    return params.gamma_m * params.gamma_s / ((loaded / 2.0) ** 2 + omega**2)


def mixing_angles(params, omega):
    """Principal values (theta_mm, theta_ms) of the complex susceptibilities.

    The removable singularity of theta_mm at chi_mm = 0 (critical coupling on
    resonance) is fixed to 0 by convention.
    """
    z_mm = chi_mm(params, omega)
    z_ms = chi_ms(params, omega)
    theta_mm = np.where(np.abs(z_mm) < 1e-300, 0.0, np.angle(z_mm))
    theta_ms = np.angle(z_ms)
    if np.ndim(omega) == 0:
        return float(theta_mm), float(theta_ms)
    return theta_mm, theta_ms


def theta_mm_slope(params, omega):
    """Exact derivative d theta_mm / d omega.

    theta_mm = atan2(omega, a) - atan2(omega, b) with a = (gamma/2 - gamma_m)
    and b = gamma/2, so the slope is a/(a^2+w^2) - b/(b^2+w^2).
    """
    omega = np.asarray(omega, dtype=float)
    a = params.gamma / 2.0 - params.gamma_m
    b = params.gamma / 2.0
    return a / (a**2 + omega**2) - b / (b**2 + omega**2)


def _quad_block(z):
    """2x2 quadrature representation [[Re z, -Im z], [Im z, Re z]] of a complex scalar."""
    return np.array([[z.real, -z.imag], [z.imag, z.real]])


def cavity_symplectic(params, omega):
    """6x6 symplectic quadrature representation of the susceptibility matrix."""
    chi = susceptibility(params, omega)
    out = np.zeros((6, 6))
    for i in range(3):
        for j in range(3):
            out[2 * i:2 * i + 2, 2 * j:2 * j + 2] = _quad_block(chi[i, j])
    return SymplecticMap(out)


def cavity_channel(params, omega, signal_mean=(0.0, 0.0)):
    """Single-mode Gaussian channel of the measurement port.

    X = |chi_mm| O(theta_mm), Y = N_T (1 - |chi_mm|^2) I and
    nu = |chi_ms| O(theta_ms) @ signal_mean, built directly from the exact
    complex susceptibilities so that the channel moments coincide with the
    full three-mode evolution traced over signal and loss ports.
    """
    z_mm = complex(chi_mm(params, omega))
    z_ms = complex(chi_ms(params, omega))
    scale = _quad_block(z_mm)
    noise = params.n_t * (1.0 - abs(z_mm) ** 2) * np.eye(2)
    disp = _quad_block(z_ms) @ np.asarray(signal_mean, dtype=float)
    return GaussianChannel(scale, noise, disp)
