"""Dictionary between laboratory cavity parameters and the channel model.

Laboratory inputs (quality factors, field strength, mode volume, coupling
constant, temperature) map onto the model's rates and occupations:

    gamma_ell = omega_c / Q_c            gamma_m = beta * gamma_ell
    gamma_s   = (g B sqrt(eta))^2 / (4 delta_a)      delta_a = omega_c / Q_a
    n_s       = rho V / m_a              N_T from Bose-Einstein at (omega_c, T)

Internally everything is reduced to powers of angular frequency (hbar =
k_B = 1); SI and particle-physics units are converted only at this module's
boundary.  A minimal dimension tag (the power of frequency carried by each
quantity) is threaded through the formula evaluations so that mixing rates
with occupations or powers fails loudly.

Interface units: angular frequencies in rad/s, temperature in kelvin,
magnetic field in tesla, coupling in 1/GeV, density in GeV/cm^3, volume in
m^3, powers in watts.
"""

import numpy as np
from dataclasses import dataclass

from scipy import constants as _const

from .cavity import CavityParams, chi_ms_sq

__all__ = [
    "PhysicalParams",
    "Dim",
    "to_model_params",
    "from_model_params",
    "thermal_occupation",
    "occupation_temperature",
    "signal_power_quantum",
    "signal_power_classical",
    "dark_photon_substitution",
    "readout_displacement_ratio",
]

# Frequency equivalent of 1 GeV: E / hbar.
GEV_IN_RADS = _const.e * 1e9 / _const.hbar
# 1 tesla expressed in GeV^2 (Heaviside-Lorentz natural units), derived from
# the field energy density B^2 / (2 mu_0) = B_nat^2 / 2.
_JOULE_IN_GEV = 1.0 / (_const.e * 1e9)
_METER_IN_INV_GEV = GEV_IN_RADS / _const.c
_ENERGY_DENSITY_J_M3_IN_GEV4 = _JOULE_IN_GEV / _METER_IN_INV_GEV**3
TESLA_IN_GEV2 = np.sqrt(2.0 * (0.5 / _const.mu_0) * _ENERGY_DENSITY_J_M3_IN_GEV4)


@dataclass(frozen=True)
class Dim:
    """A value tagged with its power of frequency (hbar = k_B = 1).

    Rates and energies carry power 1, occupations power 0, emitted powers
    power 2.  Arithmetic tracks the exponent; ``expect`` asserts it.
    """

    value: float
    power: int = 0

    def __mul__(self, other):
        other = other if isinstance(other, Dim) else Dim(float(other))
        return Dim(self.value * other.value, self.power + other.power)

    __rmul__ = __mul__

    def __truediv__(self, other):
        other = other if isinstance(other, Dim) else Dim(float(other))
        return Dim(self.value / other.value, self.power - other.power)

    def __rtruediv__(self, other):
        other = other if isinstance(other, Dim) else Dim(float(other))
        return other.__truediv__(self)

    def __add__(self, other):
        other = other if isinstance(other, Dim) else Dim(float(other))
        if other.power != self.power:
            raise ValueError(f"cannot add frequency powers {self.power} and {other.power}")
        return Dim(self.value + other.value, self.power)

    __radd__ = __add__

    def expect(self, power):
        if self.power != power:
            raise ValueError(f"expected frequency power {power}, got {self.power}")
        return self.value


@dataclass(frozen=True)
class PhysicalParams:
    """Laboratory description of one cavity haloscope.

    Parameters
    ----------
    coupling : float
        Signal-to-photon coupling constant, 1/GeV.
    b_field : float
        Magnetic field, tesla.
    form_factor : float
        Mode overlap factor, in (0, 1].
    omega_c : float
        Resonant angular frequency, rad/s;  equals the searched mass.
    rho : float
        Local dark-matter energy density, GeV/cm^3.
    volume : float
        Cavity volume, m^3.
    q_intrinsic : float
        Intrinsic quality factor.
    beta : float
        Coupling ratio gamma_m / gamma_ell.
    temperature : float
        Physical temperature, kelvin.
    q_signal : float
        Signal quality factor (bandwidth = omega_c / q_signal), default 1e6.
    """

    coupling: float
    b_field: float
    form_factor: float
    omega_c: float
    rho: float
    volume: float
    q_intrinsic: float
    beta: float
    temperature: float
    q_signal: float = 1e6

    def __post_init__(self):
        positive = ("coupling", "b_field", "form_factor", "omega_c", "rho",
                    "volume", "q_intrinsic", "beta", "temperature", "q_signal")
        for name in positive:
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be > 0")
        if self.form_factor > 1.0:
            raise ValueError("form_factor must be <= 1")


def thermal_occupation(omega_c, temperature):
    """Bose-Einstein occupation 1 / (exp(hbar w / k_B T) - 1)."""
    x = _const.hbar * omega_c / (_const.k * temperature)
    return 1.0 / np.expm1(x)


def occupation_temperature(omega_c, n_bar):
    """Temperature at which the Bose-Einstein occupation equals ``n_bar``."""
    return _const.hbar * omega_c / (_const.k * np.log1p(1.0 / n_bar))


def _signal_rate(coupling_inv_gev, b_tesla, form_factor, delta_a):
    """gamma_s = (g B sqrt(eta))^2 / (4 delta_a), rad/s, dimension-checked."""
    g_b = Dim(coupling_inv_gev / GEV_IN_RADS, -1) * Dim(b_tesla * TESLA_IN_GEV2 * GEV_IN_RADS**2, 2)
    rate = g_b * g_b * Dim(form_factor) / (4.0 * Dim(delta_a, 1))
    return rate.expect(1)


def to_model_params(phys, reference_rate=None):
    """CavityParams for a laboratory description.

    Rates are returned in rad/s unless ``reference_rate`` is given, in which
    case everything is divided by it (pass ``'gamma_ell'`` to use the
    intrinsic loss rate, the package's default normalization).
    """
    gamma_ell = phys.omega_c / phys.q_intrinsic
    delta_a = phys.omega_c / phys.q_signal
    gamma_s = _signal_rate(phys.coupling, phys.b_field, phys.form_factor, delta_a)
    # rho * V is an energy in GeV; express it and the mass as rates.
    rho_v = Dim(phys.rho * 1e6 * phys.volume * GEV_IN_RADS, 1)
    n_s = (rho_v / Dim(phys.omega_c, 1)).expect(0)
    n_bar = thermal_occupation(phys.omega_c, phys.temperature)
    if reference_rate == "gamma_ell":
        reference_rate = gamma_ell
    ref = 1.0 if reference_rate is None else float(reference_rate)
    return CavityParams(gamma_ell=gamma_ell / ref, gamma_m=phys.beta * gamma_ell / ref,
                        gamma_s=gamma_s / ref, n_t_bar=n_bar, n_s=n_s,
                        delta_a=delta_a / ref)


def from_model_params(model, omega_c, b_field, form_factor, volume, q_signal=1e6,
                      rate_unit=1.0):
    """Invert ``to_model_params`` given the non-rate laboratory context.

    ``rate_unit`` converts the model's rates to rad/s (1.0 if the model is
    already in SI rates).
    """
    gamma_ell = model.gamma_ell * rate_unit
    gamma_s = model.gamma_s * rate_unit
    delta_a = model.delta_a * rate_unit
    q_intrinsic = omega_c / gamma_ell
    beta = model.gamma_m / model.gamma_ell
    b_nat_rads = b_field * TESLA_IN_GEV2 * GEV_IN_RADS**2
    coupling = np.sqrt(4.0 * delta_a * gamma_s / form_factor) / b_nat_rads * GEV_IN_RADS
    mass_gev = omega_c / GEV_IN_RADS
    rho = model.n_s * mass_gev / (volume * 1e6)
    temperature = occupation_temperature(omega_c, model.n_t_bar) if model.n_t_bar > 0 else 0.0
    return PhysicalParams(coupling=coupling, b_field=b_field, form_factor=form_factor,
                          omega_c=omega_c, rho=rho, volume=volume,
                          q_intrinsic=q_intrinsic, beta=beta, temperature=temperature,
                          q_signal=q_signal)


def _q_effective(phys):
    return 1.0 / ((1.0 + phys.beta) / phys.q_intrinsic + 1.0 / phys.q_signal)


def signal_power_quantum(phys):
    """Output signal power from the channel model, watts.

    P = |chi_ms(0)|^2 hbar omega_c n_s delta_a with the loaded width read
    from the effective quality factor (which includes the signal bandwidth),
    i.e. 4 beta/(1+beta) * (hbar omega_c / gamma_eff) * n_s delta_a gamma_s.
    """
    model = to_model_params(phys)
    gamma_eff = Dim(phys.omega_c / _q_effective(phys), 1)
    prefactor = Dim(4.0 * phys.beta / (1.0 + phys.beta))
    power = prefactor * Dim(phys.omega_c, 1) * Dim(model.n_s) \
        * Dim(model.delta_a, 1) * Dim(model.gamma_s, 1) / gamma_eff
    return power.expect(2) * _const.hbar


def signal_power_classical(phys):
    """Output signal power from the laboratory formula, watts.

    P = beta/(1+beta) g^2 (rho/m) B^2 V eta Q_eff, with
    1/Q_eff = (1+beta)/Q_c + 1/Q_a capturing readout loading and the signal
    bandwidth.
    """
    g_rads = Dim(phys.coupling / GEV_IN_RADS, -1)
    b_rads = Dim(phys.b_field * TESLA_IN_GEV2 * GEV_IN_RADS**2, 2)
    mass = Dim(phys.omega_c, 1)
    rho_v = Dim(phys.rho * 1e6 * phys.volume * GEV_IN_RADS, 1)
    power = Dim(phys.beta / (1.0 + phys.beta)) * g_rads * g_rads * b_rads * b_rads \
        * rho_v / mass * Dim(phys.form_factor) * Dim(_q_effective(phys))
    return power.expect(2) * _const.hbar


def power_in_cavity(phys):
    """Circulating signal power g^2 (rho/m) B^2 V eta min(Q_c, Q_a), watts."""
    g_rads = Dim(phys.coupling / GEV_IN_RADS, -1)
    b_rads = Dim(phys.b_field * TESLA_IN_GEV2 * GEV_IN_RADS**2, 2)
    rho_v = Dim(phys.rho * 1e6 * phys.volume * GEV_IN_RADS, 1)
    power = g_rads * g_rads * b_rads * b_rads * rho_v / Dim(phys.omega_c, 1) \
        * Dim(phys.form_factor) * Dim(min(phys.q_intrinsic, phys.q_signal))
    return power.expect(2) * _const.hbar


def dark_photon_substitution(kinetic_mixing, mass_omega, form_factor, bandwidth,
                             rho, volume):
    """(gamma_s, n_s) for a kinetically mixed dark photon.

    gamma_s = (eps * m * sqrt(eta))^2 / (4 * bandwidth) and n_s = rho V / m;
    ``mass_omega`` and ``bandwidth`` in rad/s, rho in GeV/cm^3, volume in m^3.
    """
    if kinetic_mixing < 0:
        raise ValueError("kinetic mixing must be >= 0")
    eps_m = Dim(kinetic_mixing) * Dim(mass_omega, 1)
    gamma_s = (eps_m * eps_m * Dim(form_factor) / (4.0 * Dim(bandwidth, 1))).expect(1)
    n_s = (Dim(rho * 1e6 * volume * GEV_IN_RADS, 1) / Dim(mass_omega, 1)).expect(0)
    return gamma_s, n_s


def readout_displacement_ratio(beta):
    """Diagnostic order-of-magnitude ratio of the readout displacement to the
    circulating field displacement, sqrt(beta / (1 + beta)^2).  Normalization
    conventions differ between treatments; do not build tests on it."""
    return np.sqrt(beta / (1.0 + beta) ** 2)


def signal_power_from_model(model, omega_c, rate_unit=1.0):
    """P = |chi_ms(0)|^2 hbar omega_c n_s delta_a directly from CavityParams."""
    return float(chi_ms_sq(model, 0.0)) * _const.hbar * omega_c * model.n_s \
        * model.delta_a * rate_unit
