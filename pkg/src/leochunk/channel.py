"""Optical link budget: path loss, atmosphere, turbulence, pointing and capacity.

Functions accept scalars or numpy arrays wherever the maths is elementwise so
that a whole snapshot's worth of links can be evaluated at once.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np
from scipy import integrate, optimize, special, stats

REFERENCE_WAVELENGTH_M = 550e-9


def to_db(x):
    return 10.0 * np.log10(x)


def from_db(db):
    return 10.0 ** (np.asarray(db, dtype=float) / 10.0)


# ---------------------------------------------------------------------------
# free space and atmosphere

def fso_path_loss(wavelength_m: float, range_km):
    """Linear free-space loss factor ``(lambda / 4 pi R)^2``."""
    r = np.asarray(range_km, dtype=float)
    if np.any(r <= 0):
        raise ValueError("range must be positive")
    return (wavelength_m / (4.0 * math.pi * r * 1e3)) ** 2


def kim_exponent(visibility_km: float) -> float:
    v = visibility_km
    if v > 50.0:
        return 1.6
    if v > 6.0:
        return 1.3
    if v > 1.0:
        return 0.16 * v + 0.34
    if v > 0.5:
        return v - 0.5
    return 0.0


def kim_scattering_coeff(visibility_km: float, wavelength_m: float) -> float:
    """Kim-model scattering attenuation in dB/km."""
    if visibility_km <= 0:
        raise ValueError("visibility must be positive")
    if math.isinf(visibility_km):
        return 0.0
    q = kim_exponent(visibility_km)
    per_km = (3.91 / visibility_km) * (wavelength_m / REFERENCE_WAVELENGTH_M) ** (-q)
    return per_km * 10.0 / math.log(10.0)


def atmospheric_attenuation(
    visibility_km: float,
    wavelength_m: float,
    elevation_deg,
    extinction_ratio: float,
    h_atm_km: float = 20.0,
    range_km=None,
):
    """Linear transmittance of the atmosphere along a slant path.

    Scattering (dB/km) acts over the in-atmosphere part of the path, which is
    capped at ``h_atm_km / sin(el)``; the Mie term is ``exp(-rho / sin(el))``.
    """
    el = np.asarray(elevation_deg, dtype=float)
    if np.any(el <= 0):
        raise ValueError("elevation must be > 0 deg for an atmospheric link")
    sin_el = np.sin(np.radians(el))
    d_atm = h_atm_km / sin_el
    if range_km is not None:
        d_atm = np.minimum(d_atm, range_km)
    alpha_db = kim_scattering_coeff(visibility_km, wavelength_m)
    return 10.0 ** (-alpha_db * d_atm / 10.0) * np.exp(-extinction_ratio / sin_el)


# ---------------------------------------------------------------------------
# turbulence

def gamma_gamma_pdf(intensity, alpha: float, beta: float):
    """Gamma-Gamma irradiance density (unit mean), evaluated in log space."""
    i = np.asarray(intensity, dtype=float)
    if np.any(i <= 0):
        raise ValueError("intensity must be positive")
    ab = alpha * beta
    x = 2.0 * np.sqrt(ab * i)
    log_f = (
        math.log(2.0)
        + 0.5 * (alpha + beta) * math.log(ab)
        - special.gammaln(alpha)
        - special.gammaln(beta)
        + (0.5 * (alpha + beta) - 1.0) * np.log(i)
        + np.log(special.kve(alpha - beta, x))
        - x
    )
    return np.exp(log_f)


def gamma_gamma_cdf(intensity: float, alpha: float, beta: float) -> float:
    """P(I <= intensity), using I = X*Y with X~Gamma(a, 1/a), Y~Gamma(b, 1/b)."""
    if intensity <= 0:
        return 0.0

    def integrand(y):
        return special.gammainc(alpha, alpha * intensity / y) * np.exp(
            beta * math.log(beta) - special.gammaln(beta) + (beta - 1) * np.log(y) - beta * y
        )

    y_hi = stats.gamma.isf(1e-16, beta, scale=1.0 / beta)
    val, _ = integrate.quad(integrand, 0.0, y_hi, epsabs=1e-13, epsrel=1e-11, limit=200)
    return float(min(max(val, 0.0), 1.0))


def sample_gamma_gamma(rng: np.random.Generator, alpha: float, beta: float, size=None):
    return rng.gamma(alpha, 1.0 / alpha, size) * rng.gamma(beta, 1.0 / beta, size)


def scintillation_loss(alpha: float, beta: float, outage_percentile: float = 0.01) -> float:
    """Fade margin factor: the ``outage_percentile`` quantile of the irradiance."""
    if not 0.0 < outage_percentile <= 0.5:
        raise ValueError("outage_percentile must lie in (0, 0.5]")
    f = lambda log_i: gamma_gamma_cdf(math.exp(log_i), alpha, beta) - outage_percentile
    lo, hi = math.log(1e-12), math.log(50.0)
    if f(lo) > 0 or f(hi) < 0:
        raise ArithmeticError("Gamma-Gamma quantile not bracketed")
    root, info = optimize.brentq(f, lo, hi, xtol=1e-12, full_output=True)
    if not info.converged:
        raise ArithmeticError(f"Gamma-Gamma CDF inversion did not converge: {info.flag}")
    return min(math.exp(root), 1.0)


# ---------------------------------------------------------------------------
# pointing error

def pointing_geometry(w_d, w_z, sigma_p):
    """``A0``, equivalent beam width and jitter ratio of the displacement model."""
    w_z = np.asarray(w_z, dtype=float)
    v = math.sqrt(math.pi) * w_d / (math.sqrt(2.0) * w_z)
    ec = special.erfc(v)
    a0 = ec**2
    w_zeq = np.sqrt(w_z**2 * math.sqrt(math.pi) * ec / (2.0 * v * np.exp(-(v**2))))
    gamma = w_zeq / (2.0 * sigma_p)
    return a0, w_zeq, gamma


def pointing_pdf(h, a0: float, gamma: float):
    h = np.asarray(h, dtype=float)
    g2 = gamma**2
    inside = (h > 0) & (h <= a0)
    with np.errstate(divide="ignore", invalid="ignore"):
        # log space: a0**(-g2) alone overflows for narrow jitter (large gamma)
        log_val = math.log(g2) + (g2 - 1.0) * np.log(h / a0) - math.log(a0)
    return np.where(inside, np.exp(np.where(inside, log_val, 0.0)), 0.0)


def pointing_loss(w_d, w_z, sigma_p, mode: str = "mean", rng: np.random.Generator | None = None):
    """Pointing-error loss factor in (0, A0].

    ``mode="mean"`` returns the expectation ``g^2 A0 / (g^2 + 1)``;
    ``mode="sample"`` draws one realisation per element via the inverse CDF.
    """
    if np.any(np.asarray(w_z) <= 0) or w_d <= 0 or sigma_p <= 0:
        raise ValueError("pointing parameters must be positive")
    a0, _, gamma = pointing_geometry(w_d, w_z, sigma_p)
    g2 = gamma**2
    if mode == "mean":
        return g2 * a0 / (g2 + 1.0)
    if mode == "sample":
        if rng is None:
            raise ValueError("sample mode needs an rng")
        u = 1.0 - rng.random(np.shape(a0))  # (0, 1]
        return a0 * u ** (1.0 / g2)
    raise ValueError(f"unknown pointing mode {mode!r}")


# ---------------------------------------------------------------------------
# link budget

@dataclass(frozen=True)
class LinkBudgetParams:
    """Physical-layer inputs. Gains are in dBi, losses in dB, lengths in SI units."""

    gs_tx_power_w: float = 10.0
    sat_tx_power_w: float = 0.7
    n_channels: int = 4
    gs_gain_dbi: float = 125.0
    sat_gain_dbi: float = 120.0
    eta_t: float = 0.8
    eta_r: float = 0.8
    bandwidth_hz: float = 5e9
    noise_w: float = 1.4e-10
    wavelength_m: float = 1550e-9
    visibility_km: float = 60.0
    extinction_ratio: float = 0.1
    h_atm_km: float = 20.0
    aperture_radius_m: float = 0.4
    divergence_rad: float = 15e-6
    jitter_ratio: float = 0.30
    turb_alpha: float = 4.0
    turb_beta: float = 2.0
    outage_percentile: float = 0.01
    fc_loss_db: float = 1.0
    extra_loss_db: float = 0.0

    def __post_init__(self):
        bad = [
            name
            for name in (
                "gs_tx_power_w", "sat_tx_power_w", "eta_t", "eta_r", "bandwidth_hz",
                "noise_w", "wavelength_m", "visibility_km", "aperture_radius_m",
                "divergence_rad", "jitter_ratio", "turb_alpha", "turb_beta",
            )
            if not getattr(self, name) > 0
        ]
        if self.eta_t > 1 or self.eta_r > 1:
            bad.append("eta_t/eta_r must be <= 1")
        if self.n_channels < 1:
            bad.append("n_channels")
        if self.extinction_ratio < 0 or self.fc_loss_db < 0 or self.extra_loss_db < 0:
            bad.append("extinction_ratio/fc_loss_db/extra_loss_db must be >= 0")
        if bad:
            raise ValueError(f"invalid link budget parameters: {', '.join(bad)}")

    @property
    def sigma_p(self) -> float:
        return self.jitter_ratio * self.aperture_radius_m

    def with_overrides(self, **kw) -> "LinkBudgetParams":
        return replace(self, **kw)


@dataclass(frozen=True)
class LinkLossBreakdown:
    l_fso: float
    l_atm: float
    l_p: float
    l_fc: float
    p_r: float
    snr: float
    capacity_bps: float
    l_sc: float = 1.0
    p_t: float = 0.0
    g_t_db: float = 0.0
    g_r_db: float = 0.0

    def as_db_table(self) -> dict[str, float]:
        return {
            "P_T_dBW": float(to_db(self.p_t)),
            "G_T_dBi": self.g_t_db,
            "G_R_dBi": self.g_r_db,
            "L_FSO_dB": float(to_db(self.l_fso)),
            "L_atm_dB": float(to_db(self.l_atm)),
            "L_sc_dB": float(to_db(self.l_sc)),
            "L_p_dB": float(to_db(self.l_p)),
            "L_fc_dB": float(to_db(self.l_fc)),
            "P_R_dBW": float(to_db(self.p_r)),
            "SNR_dB": float(to_db(self.snr)) if self.snr > 0 else float("-inf"),
            "capacity_Gbps": self.capacity_bps / 1e9,
        }


def capacity(p_r, noise_w: float, bandwidth_hz: float):
    """Shannon capacity ``B log2(1 + P_R/N0)`` in bit/s."""
    if noise_w <= 0 or bandwidth_hz <= 0:
        raise ValueError("noise and bandwidth must be positive")
    return bandwidth_hz * np.log2(1.0 + np.asarray(p_r, dtype=float) / noise_w)


_SCINT_CACHE: dict[tuple[float, float, float], float] = {}


def _scint(params: LinkBudgetParams) -> float:
    key = (params.turb_alpha, params.turb_beta, params.outage_percentile)
    if key not in _SCINT_CACHE:
        _SCINT_CACHE[key] = scintillation_loss(*key)
    return _SCINT_CACHE[key]


def _finish(params, p_t, g_t_db, g_r_db, l_fso, l_atm, l_p, l_sc, scalar):
    l_fc = float(from_db(-(params.fc_loss_db + params.extra_loss_db)))
    p_r = (
        p_t / params.n_channels
        * from_db(g_t_db) * params.eta_t
        * from_db(g_r_db) * params.eta_r
        * l_fso * l_atm * l_sc * l_fc * l_p
    )
    snr = p_r / params.noise_w
    cap = capacity(p_r, params.noise_w, params.bandwidth_hz)
    if not scalar:
        return p_r, snr, cap
    return LinkLossBreakdown(
        l_fso=float(l_fso), l_atm=float(l_atm), l_p=float(l_p), l_fc=l_fc,
        p_r=float(p_r), snr=float(snr), capacity_bps=float(cap), l_sc=float(l_sc),
        p_t=p_t, g_t_db=g_t_db, g_r_db=g_r_db,
    )


def received_power_updown(
    params: LinkBudgetParams,
    range_km,
    elevation_deg,
    direction: str,
    pointing_mode: str = "mean",
    rng: np.random.Generator | None = None,
    scintillation_mode: str = "percentile",
):
    """Ground-satellite link budget.

    Uplink: ground transmitter, atmospheric attenuation times scintillation
    fade. Downlink: satellite transmitter, attenuation only. Scalar inputs give
    a :class:`LinkLossBreakdown`; array inputs give ``(P_R, SNR, capacity)``.
    """
    scalar = np.ndim(range_km) == 0 and np.ndim(elevation_deg) == 0
    r = np.asarray(range_km, dtype=float)
    l_fso = fso_path_loss(params.wavelength_m, r)
    l_att = atmospheric_attenuation(
        params.visibility_km, params.wavelength_m, elevation_deg,
        params.extinction_ratio, params.h_atm_km, r,
    )
    l_p = pointing_loss(
        params.aperture_radius_m, r * 1e3 * params.divergence_rad, params.sigma_p,
        pointing_mode, rng,
    )
    if direction == "up":
        if scintillation_mode == "percentile":
            l_sc = _scint(params)
        elif scintillation_mode == "sample":
            if rng is None:
                raise ValueError("sample scintillation needs an rng")
            l_sc = np.minimum(sample_gamma_gamma(rng, params.turb_alpha, params.turb_beta, np.shape(r)), 1.0)
        else:
            raise ValueError(f"unknown scintillation mode {scintillation_mode!r}")
        p_t, g_t, g_r = params.gs_tx_power_w, params.gs_gain_dbi, params.sat_gain_dbi
    elif direction == "down":
        l_sc = 1.0
        p_t, g_t, g_r = params.sat_tx_power_w, params.sat_gain_dbi, params.gs_gain_dbi
    else:
        raise ValueError(f"direction must be 'up' or 'down', got {direction!r}")
    return _finish(params, p_t, g_t, g_r, l_fso, l_att, l_p, l_sc, scalar)


def received_power_lisl(
    params: LinkBudgetParams,
    range_km,
    pointing_mode: str = "mean",
    rng: np.random.Generator | None = None,
):
    """Inter-satellite link budget (no atmospheric terms)."""
    scalar = np.ndim(range_km) == 0
    r = np.asarray(range_km, dtype=float)
    if np.any(r <= 1.0):
        raise ValueError("LISL range must exceed 1 km")
    l_fso = fso_path_loss(params.wavelength_m, r)
    l_p = pointing_loss(
        params.aperture_radius_m, r * 1e3 * params.divergence_rad, params.sigma_p,
        pointing_mode, rng,
    )
    return _finish(
        params, params.sat_tx_power_w, params.sat_gain_dbi, params.sat_gain_dbi,
        l_fso, 1.0, l_p, 1.0, scalar,
    )
