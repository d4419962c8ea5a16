"""Entangled M-cavity network: weight design, SNR and scan-rate scaling.

One squeezed-vacuum mode is split over M cavities by a power divider W'
(an M x M unitary), each cavity applies its thermal-loss channel plus a
common-signal displacement, and a power combiner W coherently sums the
outputs onto the primary mode, which is read out by homodyne detection.

Cavity-induced reflection phases theta_mm are taken as resolved upstream
(the two-mode-squeezing readout in :mod:`cavityscan.jpa` justifies this),
so the network algebra uses susceptibility magnitudes plus the signal
angles theta_ms only.  With the combiner phases set to -theta_ms and the
divider phases to +theta_ms, the primary-mode output has

    signal power = n_s (sum_k |w_k| |chi_ms,k|)^2
    noise power  = N_T (c^2 / G + 1 - c^2),   c = sum_k |w_k||w'_k||chi_mm,k|

for any unit-norm weight magnitudes.  All cavities share one resonance
frequency; ``omega`` is the common detuning.
"""

import warnings
from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize

from .radiometry import ScanResult, scan_rate, visibility

__all__ = [
    "NetworkConfig",
    "NetworkOutput",
    "WeightOptimization",
    "near_optimal_weights",
    "uniform_weights",
    "network_output",
    "network_snr",
    "signal_power_with_interference",
    "optimize_weights",
    "network_scan_rate",
    "linewidth_spread",
    "spread_network",
]

NORM_TOL = 1e-12


def _require_common(cavities, attr):
    values = {getattr(c, attr) for c in cavities}
    if len(values) != 1:
        raise ValueError(f"network cavities must share {attr}; got {sorted(values)}")
    return values.pop()


@dataclass(frozen=True)
class NetworkConfig:
    """M cavities sharing one resonance, one squeezer, and fixed weights."""

    cavities: tuple
    gain: float = 1.0
    combiner_weights: np.ndarray = None
    divider_weights: np.ndarray = None

    def __post_init__(self):
        cavities = tuple(self.cavities)
        if not cavities:
            raise ValueError("network needs at least one cavity")
        if self.gain < 1.0:
            raise ValueError("squeezer gain must be >= 1")
        _require_common(cavities, "n_t_bar")
        _require_common(cavities, "n_s")
        _require_common(cavities, "delta_a")
        m = len(cavities)
        w = self.combiner_weights
        wp = self.divider_weights
        w = np.full(m, 1.0 / np.sqrt(m), dtype=complex) if w is None else np.array(w, dtype=complex)
        wp = np.full(m, 1.0 / np.sqrt(m), dtype=complex) if wp is None else np.array(wp, dtype=complex)
        for name, vec in (("combiner_weights", w), ("divider_weights", wp)):
            if vec.shape != (m,):
                raise ValueError(f"{name} must have length {m}")
            if abs(np.vdot(vec, vec).real - 1.0) > NORM_TOL * max(m, 10):
                raise ValueError(f"{name} must be unit-norm")
            vec.setflags(write=False)
        object.__setattr__(self, "cavities", cavities)
        object.__setattr__(self, "combiner_weights", w)
        object.__setattr__(self, "divider_weights", wp)

    @property
    def n_cavities(self):
        return len(self.cavities)


@dataclass(frozen=True)
class NetworkOutput:
    """Signal and noise power of the primary output mode."""

    signal_power: float
    noise_power: float

    @property
    def snr(self):
        return self.signal_power / self.noise_power


def _stack(cavities, omega):
    """|chi_ms|, |chi_mm| and theta_ms for every cavity at one detuning."""
    m = len(cavities)
    g_m = np.fromiter((c.gamma_m for c in cavities), float, m)
    g_l = np.fromiter((c.gamma_ell for c in cavities), float, m)
    g_s = np.fromiter((c.gamma_s for c in cavities), float, m)
    half = (g_m + g_l + g_s) / 2.0
    denom = half**2 + omega**2
    cms = np.sqrt(g_m * g_s / denom)
    cmm = np.sqrt(np.maximum(1.0 - g_m * (g_l + g_s) / denom, 0.0))
    ths = np.angle(-1.0 / (half + 1j * omega))
    return cms, cmm, ths


def near_optimal_weights(cavities, omega):
    """Two-step analytic weights (w, w').

    Combiner: w_k = |chi_ms,k| e^{-i theta_ms,k} / norm, matching each
    cavity's share of the signal while undoing its phase.  Divider:
    w'_k proportional to |chi_ms,k||chi_mm,k| e^{+i theta_ms,k}, routing
    squeezing toward cavities that both transmit it and carry signal.  The
    opposite phases cancel (arg w_k + arg w'_k = 0) so no anti-squeezing
    leaks into the measured quadrature.
    """
    cms, cmm, ths = _stack(cavities, omega)
    if not cms.any():
        warnings.warn("all signal couplings vanish; falling back to uniform weights")
        m = len(cavities)
        uniform = np.full(m, 1.0 / np.sqrt(m), dtype=complex)
        return uniform, uniform.copy()
    w = cms / np.linalg.norm(cms) * np.exp(-1j * ths)
    d = cms * cmm
    wp = d / np.linalg.norm(d) * np.exp(1j * ths)
    return w, wp


def uniform_weights(m):
    return np.full(m, 1.0 / np.sqrt(m), dtype=complex)


def _aligned_output(cavities, gain, w_mag, wp_mag, omega):
    cms, cmm, _ = _stack(cavities, omega)
    n_s = cavities[0].n_s
    n_t = cavities[0].n_t
    signal = n_s * float(np.dot(w_mag, cms)) ** 2
    c = float(np.dot(w_mag * wp_mag, cmm))
    # c^2/G + 1 - c^2, arranged so G = 1 gives exactly the vacuum noise.
    noise = n_t * (1.0 - c * c * (1.0 - 1.0 / gain))
    return NetworkOutput(signal_power=signal, noise_power=noise)


def network_output(config, omega):
    """Primary-mode signal and noise power for the configured weights.

    Assumes the weight phases resolve the signal angles (as the analytic
    weights do); only the magnitudes enter.
    """
    return _aligned_output(config.cavities, config.gain,
                           np.abs(config.combiner_weights),
                           np.abs(config.divider_weights), omega)


def network_snr(cavities, gain, omega, weights=None):
    """Network SNR at one detuning; ``weights=None`` re-derives the analytic
    near-optimal pair at this frequency."""
    if weights is None:
        w, wp = near_optimal_weights(cavities, omega)
    else:
        w, wp = weights
    return _aligned_output(cavities, gain, np.abs(w), np.abs(wp), omega).snr


def signal_power_with_interference(cavities, combiner_weights, omega):
    """Signal power n_s |sum_k w_k chi_ms,k|^2 for arbitrary combiner phases.

    Expanding the square gives the per-cavity powers plus cross terms
    |w_i||w_j||chi_i||chi_j| cos(theta_i - theta_j + arg w_i - arg w_j);
    weights that do not track theta_ms therefore interfere destructively.
    """
    cms, _, ths = _stack(cavities, omega)
    w = np.asarray(combiner_weights, dtype=complex)
    amplitude = np.sum(w * cms * np.exp(1j * ths))
    return cavities[0].n_s * float(np.abs(amplitude) ** 2)


@dataclass(frozen=True)
class WeightOptimization:
    """Optimized weight magnitudes (phases are the analytic ones)."""

    combiner: np.ndarray
    divider: np.ndarray
    objective: float
    converged: bool


def _mags(u):
    v = np.abs(u)
    n = np.linalg.norm(v)
    if n == 0.0:
        raise FloatingPointError("degenerate weight iterate")
    return v / n


def _optimize_single(objective, x0):
    m = x0.size // 2
    res = minimize(lambda u: -objective(_mags(u[:m]), _mags(u[m:])), x0,
                   method="Nelder-Mead",
                   options={"xatol": 1e-12, "fatol": 1e-14, "maxiter": 4000, "maxfev": 8000})
    return _mags(res.x[:m]), _mags(res.x[m:]), -res.fun, bool(res.success)


def optimize_weights(cavities, gain, mode, omega_grid):
    """Numerically refine the weight magnitudes from the analytic seed.

    mode='per_frequency' maximizes SNR^2 independently at each grid point and
    returns a list of WeightOptimization, one per frequency.
    mode='frequency_independent' maximizes the trapezoid-rule integral of
    SNR^2 over the grid with a single weight pair.  Either way the returned
    objective is never below the analytic seed's.
    """
    if len(cavities) < 2:
        raise ValueError("weight optimization needs at least two cavities")
    omega_grid = np.asarray(omega_grid, dtype=float)

    def snr2(w_mag, wp_mag, omega):
        return _aligned_output(cavities, gain, w_mag, wp_mag, omega).snr ** 2

    if mode == "per_frequency":
        results = []
        for omega in omega_grid:
            w0, wp0 = near_optimal_weights(cavities, omega)
            x0 = np.concatenate([np.abs(w0), np.abs(wp0)])
            seed_obj = snr2(np.abs(w0), np.abs(wp0), omega)
            w_mag, wp_mag, best, ok = _optimize_single(
                lambda a, b, _w=omega: snr2(a, b, _w), x0)
            if best < seed_obj:
                w_mag, wp_mag, best = np.abs(w0), np.abs(wp0), seed_obj
            results.append(WeightOptimization(w_mag, wp_mag, best, ok))
        return results

    if mode == "frequency_independent":
        def integrated(w_mag, wp_mag):
            vals = np.array([snr2(w_mag, wp_mag, w) for w in omega_grid])
            return float(np.trapezoid(vals, omega_grid))

        w0, wp0 = near_optimal_weights(cavities, 0.0)
        x0 = np.concatenate([np.abs(w0), np.abs(wp0)])
        seed_obj = integrated(np.abs(w0), np.abs(wp0))
        w_mag, wp_mag, best, ok = _optimize_single(integrated, x0)
        if best < seed_obj:
            w_mag, wp_mag, best = np.abs(w0), np.abs(wp0), seed_obj
        return WeightOptimization(w_mag, wp_mag, best, ok)

    raise ValueError(f"unknown mode {mode!r}")


def network_scan_rate(config, zeta_snr, mode="coherent", weights="near_optimal"):
    """Scan-rate of the network.

    mode='coherent' integrates the coherently combined SNR^2 over detuning;
    with weights='near_optimal' the analytic pair is re-derived at every
    frequency, while weights='config' freezes the configured magnitudes.
    mode='independent' sums the single-cavity squeezed scan-rates (each
    cavity individually squeezed at the same gain); SNRs then add in
    quadrature rather than amplitudes.
    """
    cavities = config.cavities
    delta_a = cavities[0].delta_a
    scale = max(c.gamma for c in cavities)
    if mode == "independent":
        total = 0.0
        evals = 0
        cutoff = 0.0
        for cav in cavities:
            res = scan_rate(lambda w, _c=cav: visibility(_c, config.gain, w, "squeezed"),
                            zeta_snr, delta_a, scale_hint=scale)
            total += res.rate
            evals += res.evaluations
            cutoff = max(cutoff, res.cutoff)
        return ScanResult(rate=total, target_snr=zeta_snr, cutoff=cutoff,
                          rel_tol=1e-8, evaluations=evals)
    if mode == "coherent":
        if weights == "near_optimal":
            alpha = lambda w: network_snr(cavities, config.gain, w)
        elif weights == "config":
            frozen = (config.combiner_weights, config.divider_weights)
            alpha = lambda w: network_snr(cavities, config.gain, w, frozen)
        else:
            raise ValueError(f"unknown weight strategy {weights!r}")
        return scan_rate(alpha, zeta_snr, delta_a, scale_hint=scale)
    raise ValueError(f"unknown mode {mode!r}")


def linewidth_spread(m, low=1.0, high=3.0, midpoint=True):
    """M unique linewidths uniformly covering [low, high].

    ``midpoint=True`` places them at the midpoint quantiles of the interval,
    which keeps the empirical distribution M-independent (the discretization
    used for scaling benchmarks); ``midpoint=False`` includes the endpoints.
    """
    if m < 1:
        raise ValueError("m must be >= 1")
    if midpoint:
        k = np.arange(1, m + 1)
        return low + (high - low) * (k - 0.5) / m
    if m == 1:
        return np.array([(low + high) / 2.0])
    return np.linspace(low, high, m)


def spread_network(m, gain, coupling_factor=None, low=1.0, high=3.0, midpoint=True,
                   gamma_s=1e-9, n_s=1.0, n_t_bar=0.0, delta_a=1.0):
    """Heterogeneous benchmark network with linewidths spread over [low, high].

    Each cavity is over-coupled at gamma_m = coupling_factor * gamma_ell
    (default 2 * gain, the near-optimal squeezed coupling).
    """
    from .cavity import CavityParams

    factor = 2.0 * gain if coupling_factor is None else coupling_factor
    cavities = tuple(
        CavityParams(gamma_ell=gl, gamma_m=factor * gl, gamma_s=gamma_s,
                     n_t_bar=n_t_bar, n_s=n_s, delta_a=delta_a)
        for gl in linewidth_spread(m, low, high, midpoint)
    )
    return NetworkConfig(cavities=cavities, gain=gain)
