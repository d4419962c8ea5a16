"""Two-mode-squeezed (parametric-amplifier) readout of the cavity.

A parametric amplifier pumped at twice the cavity resonance emits photon
pairs at detunings +omega and -omega.  Decomposed into Gaussian elements,
the source is a Q-squeezer on the upper mode and a P-squeezer on the lower
mode followed by a balanced splitter; after the two sidebands pass through
the cavity, a second balanced splitter undoes the first and the Q (upper)
and P (lower) quadratures are homodyned.

Because theta_mm is odd in detuning, the cavity-induced rotations of the
pair cancel inside the two-mode-squeezed covariance, so the output variances

    Var Q(+omega) = Var P(-omega) = N_T (|chi_mm|^2 e^{-2r} + 1 - |chi_mm|^2)

never see theta_mm, and the per-pair SNR is exactly twice the single-mode
squeezed SNR at gain G = e^{2r}.  A pump-frequency offset epsilon breaks the
+/-omega symmetry and leaks anti-squeezing into the measured quadratures;
``variance_with_pump_offset`` gives the standard closed form for the upper
mode and ``circuit_variances`` the exact two-mode result for both.
"""

from dataclasses import dataclass

import numpy as np

from .cavity import chi_mm, chi_mm_sq, chi_ms_sq, mixing_angles
from .gaussian import beam_splitter, direct_sum
from .radiometry import substream, visibility

__all__ = [
    "JpaParams",
    "output_variances",
    "circuit_variances",
    "snr_jpa",
    "variance_with_pump_offset",
    "mc_pump_fluctuation_excess",
]


@dataclass(frozen=True)
class JpaParams:
    """Squeezing parameter r (gain e^{2r}) and pump-frequency jitter."""

    r: float
    sigma_c: float = 0.0
    n_t_bar: float = 0.0

    def __post_init__(self):
        if self.r < 0.0:
            raise ValueError("squeezing parameter r must be >= 0")
        if self.sigma_c < 0.0:
            raise ValueError("sigma_c must be >= 0")
        if self.n_t_bar < 0.0:
            raise ValueError("n_t_bar must be >= 0")

    @property
    def gain(self):
        return float(np.exp(2.0 * self.r))


def output_variances(cavity, jpa, omega):
    """(Var Q(+omega), Var P(-omega)) of the recombined pair; both equal
    N_T (|chi_mm|^2 e^{-2r} + 1 - |chi_mm|^2) independent of theta_mm."""
    t = chi_mm_sq(cavity, omega)
    var = cavity.n_t * (t * np.exp(-2.0 * jpa.r) + 1.0 - t)
    return var, var


def _quad_block(z):
    return np.array([[z.real, -z.imag], [z.imag, z.real]])


def circuit_variances(cavity, jpa, omega, pump_offset=0.0, drop_theta_mm=False):
    """Exact (Var Q(upper), Var P(lower)) from the full two-mode circuit.

    The upper/lower modes sit at detunings pump_offset +/- omega.  With
    ``drop_theta_mm`` the cavity rotations are deleted from the circuit,
    which must not change anything at pump_offset = 0.
    """
    n_t = cavity.n_t
    splitter = beam_splitter(0.5)
    squeezers = direct_sum(np.diag([np.exp(-jpa.r), np.exp(jpa.r)]),
                           np.diag([np.exp(jpa.r), np.exp(-jpa.r)]))
    source = splitter @ squeezers

    cov = n_t * np.eye(4)
    cov = source.matrix @ cov @ source.matrix.T

    scale = np.zeros((4, 4))
    for i, detuning in enumerate((pump_offset + omega, pump_offset - omega)):
        z = complex(chi_mm(cavity, detuning))
        block = abs(z) * np.eye(2) if drop_theta_mm else _quad_block(z)
        scale[2 * i:2 * i + 2, 2 * i:2 * i + 2] = block
    cov = scale @ cov @ scale.T
    for i, detuning in enumerate((pump_offset + omega, pump_offset - omega)):
        t = float(chi_mm_sq(cavity, detuning))
        cov[2 * i:2 * i + 2, 2 * i:2 * i + 2] += n_t * (1.0 - t) * np.eye(2)

    undo = splitter.inverse().matrix
    cov = undo @ cov @ undo.T
    return float(cov[0, 0]), float(cov[3, 3])


def snr_jpa(cavity, jpa, omega):
    """Pair SNR: exactly twice the single-mode squeezed visibility at e^{2r}.

    The Q(+omega) and P(-omega) amplitudes obey
    <Q>^2 + <P>^2 = 2 |chi_ms|^2 mu_s^2 cos^2(phi_s), and their SNRs add in
    quadrature over the shared variance.
    """
    var, _ = output_variances(cavity, jpa, omega)
    return 2.0 * chi_ms_sq(cavity, omega) * cavity.n_s / var


def snr_jpa_reference(cavity, jpa, omega):
    """Same quantity computed through the single-mode squeezed path."""
    return 2.0 * visibility(cavity, jpa.gain, omega, kind="squeezed")


def variance_with_pump_offset(cavity, jpa, omega, epsilon):
    """Upper-mode Q variance with the pump offset by ``epsilon``.

    N_T |chi_mm(e+w)|^2 [e^{-2r} (1+cos T)/2 + e^{2r} (1-cos T)/2]
      + N_T (1 - |chi_mm(e+w)|^2),   T = theta_mm(e+w) + theta_mm(e-w).

    The e^{2r} term is the anti-squeezing admitted by the broken +/- omega
    symmetry; at epsilon = 0 the angles cancel and the expression reduces to
    ``output_variances``.
    """
    epsilon = np.asarray(epsilon, dtype=float)
    t = chi_mm_sq(cavity, epsilon + omega)
    theta_sum = mixing_angles(cavity, epsilon + omega)[0] \
        + mixing_angles(cavity, epsilon - omega)[0]
    c = np.cos(theta_sum)
    squeezed = np.exp(-2.0 * jpa.r) * (1.0 + c) / 2.0 + np.exp(2.0 * jpa.r) * (1.0 - c) / 2.0
    return cavity.n_t * (t * squeezed + (1.0 - t))


def mc_pump_fluctuation_excess(cavity, jpa, omega, n_samples, seed, task_index=0):
    """Monte Carlo mean excess noise from Gaussian pump-frequency jitter.

    Draws epsilon ~ Normal(0, sigma_c) per detection interval and returns
    (mean excess over the epsilon = 0 variance, standard error).
    """
    if jpa.sigma_c == 0.0:
        return 0.0, 0.0
    rng = substream(seed, task_index)
    eps = rng.normal(0.0, jpa.sigma_c, size=n_samples)
    variances = variance_with_pump_offset(cavity, jpa, omega, eps)
    baseline = float(variance_with_pump_offset(cavity, jpa, omega, 0.0))
    excess = variances - baseline
    return float(excess.mean()), float(excess.std(ddof=1) / np.sqrt(n_samples))
