"""Single-cavity SNR, visibility functions and the scan-rate integral.

The visibility alpha(omega) is the frequency-resolved SNR prefactor of a
power measurement before the sqrt(delta_a * T_obs) sampling factor.  For a
target integrated SNR ``zeta`` the achievable tuning rate of the resonance
is

    R = delta_a / (2 pi zeta^2) * Integral alpha^2(w) dw,

evaluated here by adaptive quadrature with an analytic Lorentzian tail
correction.  Closed forms are provided for the vacuum-input rate and the
squeezing-enhanced rate ratio.

Mean-squared signal amplitudes and quadrature variances follow the
anticommutator normalization (vacuum variance = 1), so e.g. the homodyne
SNR of a coherent displacement is mean^2 / N_T.
"""

from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import quad

from .cavity import chi_mm_sq, chi_ms_sq, mixing_angles

__all__ = [
    "IntegrationError",
    "VisibilityCurve",
    "ScanResult",
    "MonteCarloSnr",
    "substream",
    "snr_homodyne_single_shot",
    "snr_heterodyne",
    "amplifier_degradation_ratio",
    "visibility",
    "sample_visibility",
    "scan_rate",
    "ql_scan_rate",
    "ql_scan_rate_peak",
    "scan_rate_ratio_squeezed",
    "optimal_coupling_squeezed",
    "monte_carlo_snr",
]

VISIBILITY_KINDS = ("quantum_limited", "squeezed", "gkp", "jpa", "network")


class IntegrationError(RuntimeError):
    """Scan-rate integration failure, carrying searched-cutoff diagnostics."""

    def __init__(self, message, **diagnostics):
        super().__init__(message)
        self.diagnostics = diagnostics


@dataclass(frozen=True)
class VisibilityCurve:
    """Sampled visibility alpha(omega) for one cavity configuration."""

    params: object
    gain: float
    omegas: np.ndarray
    values: np.ndarray
    kind: str = "quantum_limited"

    def __post_init__(self):
        if self.kind not in VISIBILITY_KINDS:
            raise ValueError(f"unknown visibility kind {self.kind!r}")
        omegas = np.array(self.omegas, dtype=float)
        values = np.array(self.values, dtype=float)
        if omegas.shape != values.shape:
            raise ValueError("omega and value arrays must have the same shape")
        if (values < 0).any():
            raise ValueError("visibility must be nonnegative")
        omegas.setflags(write=False)
        values.setflags(write=False)
        object.__setattr__(self, "omegas", omegas)
        object.__setattr__(self, "values", values)


@dataclass(frozen=True)
class ScanResult:
    """Scan-rate value plus the integration metadata that produced it."""

    rate: float
    target_snr: float
    cutoff: float
    rel_tol: float
    evaluations: int
    tail_fraction: float = 0.0
    seed: int | None = None


@dataclass(frozen=True)
class MonteCarloSnr:
    """Monte Carlo SNR estimate with its standard error."""

    value: float
    std_error: float
    n_samples: int
    seed: int


def substream(seed, index=0):
    """Counter-based generator for worker ``index`` of master ``seed``."""
    mask = (1 << 64) - 1
    key = np.array([int(seed) & mask, int(index) & mask], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))


def snr_homodyne_single_shot(params, omega, signal_amplitude, angle):
    """Single-shot homodyne power SNR for a coherent signal.

    ``angle`` is the total angle phi_s + theta_ms between the displacement
    and the measured quadrature; the result is
    |chi_ms|^2 amplitude^2 cos^2(angle) / N_T.
    """
    if params.n_t < 1.0:
        raise ValueError("N_T must be >= 1")
    return chi_ms_sq(params, omega) * signal_amplitude**2 * np.cos(angle) ** 2 / params.n_t


def snr_heterodyne(params, omega, signal_amplitude, amplifier_gain=1.0):
    """Heterodyne power SNR; independent of any phase-insensitive pre-gain.

    The signal is split 50:50 onto two quadrature detectors, so the signal
    power is halved while the amplified noise N_T(2g - 1) plus the splitter's
    own N_T average to g N_T, leaving the SNR at its g = 1 value.
    """
    if amplifier_gain < 1.0:
        raise ValueError("amplifier gain must be >= 1")
    g = amplifier_gain
    signal_power = g * chi_ms_sq(params, omega) * signal_amplitude**2 / 2.0
    noise_power = (params.n_t * (2.0 * g - 1.0) + params.n_t) / 2.0
    return signal_power / noise_power


def amplifier_degradation_ratio(gain):
    """Homodyne/heterodyne SNR ratio g / (2g - 1) under phase-insensitive gain g."""
    gain = np.asarray(gain, dtype=float)
    if (gain < 1.0).any():
        raise ValueError("amplifier gain must be >= 1")
    return gain / (2.0 * gain - 1.0)


def visibility(params, gain, omega, kind="quantum_limited"):
    """Visibility alpha(omega) for vacuum or squeezed-vacuum input.

    kind='quantum_limited' gives |chi_ms|^2 n_s / N_T; kind='squeezed' divides
    the transmitted-noise part of the denominator by the squeezer gain:
    |chi_ms|^2 n_s / (N_T (|chi_mm|^2 / G + 1 - |chi_mm|^2)).  The two
    coincide exactly at G = 1.
    """
    if gain < 1.0:
        raise ValueError("squeezer gain must be >= 1")
    signal = chi_ms_sq(params, omega) * params.n_s
    if kind == "quantum_limited":
        return signal / params.n_t
    if kind == "squeezed":
        t = chi_mm_sq(params, omega)
        # t/G + 1 - t, written so that G = 1 gives exactly the vacuum noise.
        return signal / (params.n_t * (1.0 - t * (1.0 - 1.0 / gain)))
    raise ValueError(f"unsupported visibility kind {kind!r} (see gkp/jpa/network modules)")


def sample_visibility(params, gain, omegas, kind="quantum_limited"):
    """Evaluate ``visibility`` on a grid and wrap it in a VisibilityCurve."""
    omegas = np.asarray(omegas, dtype=float)
    values = visibility(params, gain, omegas, kind)
    return VisibilityCurve(params, gain, omegas, values, kind)


def scan_rate(alpha, zeta_snr, delta_a, scale_hint=1.0, rel_tol=1e-8,
              cutoff_ratio=1e-6, max_doublings=60):
    """Scan-rate R = delta_a / (2 pi zeta^2) * Integral alpha(w)^2 dw.

    ``alpha`` must be even in omega and decay at large omega.  The cutoff is
    found by doubling from ``scale_hint`` until alpha drops below
    ``cutoff_ratio`` times its on-resonance value; the remainder is added as
    an analytic 1/omega^2 (Lorentzian) tail.

    Raises
    ------
    IntegrationError
        If alpha fails to decay within ``max_doublings`` doublings.
    """
    if zeta_snr <= 0:
        raise ValueError("target SNR must be > 0")
    if delta_a <= 0:
        raise ValueError("delta_a must be > 0")
    peak = float(alpha(0.0))
    if not np.isfinite(peak) or peak <= 0.0:
        raise IntegrationError("visibility at omega = 0 must be finite and positive",
                               peak=peak)
    cutoff = float(scale_hint)
    for _ in range(max_doublings):
        if float(alpha(cutoff)) / peak < cutoff_ratio:
            break
        cutoff *= 2.0
    else:
        raise IntegrationError(
            "visibility does not decay below the cutoff ratio",
            cutoff=cutoff, ratio=float(alpha(cutoff)) / peak, cutoff_ratio=cutoff_ratio)

    integral, _, info = quad(lambda w: float(alpha(w)) ** 2, 0.0, cutoff,
                             epsabs=0.0, epsrel=rel_tol, limit=200, full_output=True)
    # alpha ~ C / w^2 beyond the cutoff: integral of alpha(cutoff)^2 (cutoff/w)^4.
    tail = float(alpha(cutoff)) ** 2 * cutoff / 3.0
    total = 2.0 * (integral + tail)
    rate = delta_a * total / (2.0 * np.pi * zeta_snr**2)
    return ScanResult(rate=rate, target_snr=zeta_snr, cutoff=cutoff, rel_tol=rel_tol,
                      evaluations=int(info["neval"]), tail_fraction=tail / (integral + tail))


def ql_scan_rate(params, zeta_snr):
    """Closed-form vacuum-input scan-rate.

    R = (2 delta_a n_s^2 gamma_s^2 / (zeta^2 N_T^2 gamma_ell)) x^2/(x+1)^3
    with x = gamma_m / gamma_ell; the loaded linewidth ignores gamma_s.
    """
    x = params.beta
    pref = 2.0 * params.delta_a * params.n_s**2 * params.gamma_s**2 / (
        zeta_snr**2 * params.n_t**2 * params.gamma_ell)
    return pref * x**2 / (x + 1.0) ** 3


def ql_scan_rate_peak(params, zeta_snr):
    """Closed-form vacuum-input rate at its optimal coupling x = 2."""
    pref = 2.0 * params.delta_a * params.n_s**2 * params.gamma_s**2 / (
        zeta_snr**2 * params.n_t**2 * params.gamma_ell)
    return pref * 4.0 / 27.0


def scan_rate_ratio_squeezed(x, gain):
    """Squeezing-enhanced rate over the optimal vacuum rate.

    27 sqrt(G) x^2 / (32 ((x-1)^2/(4G) + x)^(3/2)); equals 1 at G=1, x=2.
    """
    x = np.asarray(x, dtype=float)
    return 27.0 * np.sqrt(gain) * x**2 / (32.0 * ((x - 1.0) ** 2 / (4.0 * gain) + x) ** 1.5)


def optimal_coupling_squeezed(gain):
    """Coupling ratio maximizing the squeezed rate: root of x^2 + (1-2G)x - 2."""
    b = 2.0 * gain - 1.0
    return (b + np.sqrt(b * b + 8.0)) / 2.0


def monte_carlo_snr(params, gain, omega, n_samples, seed, task_index=0):
    """Monte Carlo estimate of the homodyne visibility alpha(omega).

    Each sample draws a signal displacement from the zero-mean bivariate
    Gaussian with per-quadrature variance n_s, rotates it by theta_ms,
    simulates the homodyne outcome as a Gaussian with the channel's mean and
    (squeezed) quadrature variance, and averages the measured power.  The
    estimate is (mean power - noise power) / noise power, matching the
    closed-form visibility.
    """
    if n_samples < 10_000:
        raise ValueError("n_samples must be >= 1e4 for a meaningful estimate")
    rng = substream(seed, task_index)
    t = chi_mm_sq(params, omega)
    noise_var = params.n_t * (t / gain + 1.0 - t)
    _, theta_ms = mixing_angles(params, omega)
    amp = np.sqrt(chi_ms_sq(params, omega))

    mu = rng.normal(0.0, np.sqrt(params.n_s), size=(n_samples, 2)) if params.n_s > 0 \
        else np.zeros((n_samples, 2))
    means = amp * (np.cos(theta_ms) * mu[:, 0] - np.sin(theta_ms) * mu[:, 1])
    outcomes = rng.normal(means, np.sqrt(noise_var))
    power = outcomes**2
    estimate = (power.mean() - noise_var) / noise_var
    std_error = power.std(ddof=1) / np.sqrt(n_samples) / noise_var
    return MonteCarloSnr(value=float(estimate), std_error=float(std_error),
                         n_samples=n_samples, seed=seed)
