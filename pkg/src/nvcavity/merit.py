"""Figures of merit for the collected single-photon emission.

Two equivalent evaluation routes are provided and cross-checked:

* an exact route that expands the generator in its eigenbasis and performs
  every time integral in closed form (resolvent sums), used for parameter
  sweeps where timescales may be separated by many orders of magnitude;
* a grid route that Fourier-transforms a sampled two-time correlator into a
  two-colour spectrum ``S(omega, nu)`` and integrates it numerically, used
  for spectra, peak structure and external-filter studies.

Definitions (angular units, frame rotating at the cavity frequency)::

    S(omega, nu) = r int dt1 int dt2 e^{i omega t1} e^{-i nu t2} <E^dag(t1) E(t2)>
    F            = (1/2pi) int S(omega, omega) d omega      (collected photon number)
    I            = int int |S|^2 d omega d nu / (2 pi F)^2  (indistinguishability)

with ``E`` the collected port operator and ``r`` its rate.  Parseval ties the
grid route to the time domain: ``I = r^2 int int |<E^dag(t1)E(t2)>|^2 / F^2``.

The phonon sideband enters as a static spectral density filtered by the
cavity Lorentzian, reducing the total figure of merit to
``I_total = I * (F / (F + F_sb))^2``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.integrate

from .dynamics import (
    CorrelatorGrid,
    NumericsError,
    two_time_correlator,
    vectorize,
)
from .models import EmitterCavityModel, SidebandModel, with_output_filter

#: Relative weight allowed on non-decaying modes before integrals are refused.
KERNEL_WEIGHT_TOL = 1e-9


@dataclass(frozen=True)
class FilterSpec:
    """External Fabry-Perot filter: FWHM ``kappa_f`` centred at ``center``."""

    kappa_f: float
    center: float = 0.0

    def __post_init__(self):
        if self.kappa_f <= 0.0:
            raise ValueError("kappa_f must be positive")

    def amplitude(self, omega: np.ndarray) -> np.ndarray:
        """h(omega) with |h|^2 Lorentzian of FWHM kappa_f and unit peak."""
        half = self.kappa_f / 2.0
        return half / (half - 1j * (np.asarray(omega, dtype=float) - self.center))


@dataclass(frozen=True)
class TwoColourSpectrum:
    """S(omega, nu) on a shared uniform frequency axis (offsets from carrier)."""

    omega_axis: np.ndarray
    values: np.ndarray
    emission_rate: float

    def __post_init__(self):
        omega = np.asarray(self.omega_axis, dtype=float)
        vals = np.asarray(self.values, dtype=complex)
        if omega.ndim != 1 or omega.size < 8:
            raise ValueError("omega_axis must be 1-D with at least 8 points")
        steps = np.diff(omega)
        if np.any(steps <= 0.0):
            raise ValueError("omega_axis must be strictly increasing")
        if np.max(np.abs(steps - steps[0])) > 1e-9 * abs(steps[0]):
            raise ValueError("omega_axis must be uniform")
        if vals.shape != (omega.size, omega.size):
            raise ValueError("values must be square on the omega axis")
        object.__setattr__(self, "omega_axis", omega)
        object.__setattr__(self, "values", vals)

    @property
    def diagonal(self) -> np.ndarray:
        """Real one-colour spectrum S(omega, omega)."""
        return np.real(np.diagonal(self.values))


@dataclass(frozen=True)
class FigureOfMerit:
    """Collected-emission metrics; ``beta = 1`` when no external filter."""

    i_zpl: float
    f_zpl: float
    f_sb: float
    i_total: float
    beta: float = 1.0

    def __post_init__(self):
        for name in ("i_zpl", "f_zpl", "f_sb", "i_total", "beta"):
            if not np.isfinite(getattr(self, name)):
                raise ValueError(f"{name} is not finite")


# ---------------------------------------------------------------------------
# exact (resolvent) route
# ---------------------------------------------------------------------------


def _pair_integral_matrix(lambdas: np.ndarray, rate_scale: float) -> np.ndarray:
    """M[j, k] = -1 / (lambda_j + conj(lambda_k)), singular pairs zeroed."""
    s = lambdas[:, None] + lambdas.conj()[None, :]
    singular = np.abs(s) <= 1e-12 * rate_scale
    with np.errstate(divide="ignore", invalid="ignore"):
        m = np.where(singular, 0.0, -1.0 / np.where(singular, 1.0, s))
    return m


def _emission_pair_weights(model: EmitterCavityModel):
    """Coefficients P with <E^dag(t+tau) E(t)> = sum_jk P[j,k] e^{l_j tau + l_k t}."""
    modal = model.liouvillian.modal()
    if not modal.well_conditioned:
        raise NumericsError(
            f"generator eigenbasis condition {modal.condition:.2e} too large"
        )
    b = model.emission_operator.matrix
    d = model.space.total_dim
    coords = modal.seed(vectorize(model.initial_state.matrix))
    u = modal.trace_row(b.conj().T)
    mapped = modal.inverse_modes @ np.kron(np.eye(d, dtype=complex), b) @ modal.modes
    pair = u[:, None] * mapped * coords[None, :]
    return modal, pair, coords


def exact_emission_metrics(model: EmitterCavityModel) -> tuple[float, float]:
    """Collected photon number and indistinguishability, in closed form.

    Every time integral is evaluated exactly from the eigendecomposition of
    the generator, so widely separated rates cost nothing.  Returns
    ``(f, i)``; a dark port returns ``(0, 0)``.
    """
    modal, pair, coords = _emission_pair_weights(model)
    b = model.emission_operator.matrix
    n_row = modal.trace_row(b.conj().T @ b)
    rate = model.emission_rate
    f = rate * modal.integrated_weights(n_row * coords, KERNEL_WEIGHT_TOL).real
    # kernel modes must not contribute to the decaying correlator
    kernel = modal.kernel
    total = float(np.sum(np.abs(pair)))
    if total > 0.0:
        kernel_weight = float(np.sum(np.abs(pair[kernel, :]))) + float(
            np.sum(np.abs(pair[:, kernel]))
        )
        if kernel_weight > KERNEL_WEIGHT_TOL * total:
            raise NumericsError("emission correlator has weight on stationary modes")
    m = _pair_integral_matrix(modal.lambdas, modal.rate_scale)
    inner = pair.T @ m @ pair.conj()  # sum over tau-index pairs
    wedge = float(np.real(np.sum(inner * m)))
    numerator = 2.0 * rate**2 * wedge
    if f <= 1e-12:
        return max(f, 0.0), 0.0
    return f, numerator / f**2


def channel_yields(model: EmitterCavityModel) -> np.ndarray:
    """Exact ``rate_i * int_0^inf <O_i^dag O_i> dt`` for every channel.

    For channels that remove excitation these are emitted fractions; summed
    over :meth:`EmitterCavityModel.loss_channels` they account for the entire
    initial excitation.
    """
    modal = model.liouvillian.modal()
    if not modal.well_conditioned:
        raise NumericsError(
            f"generator eigenbasis condition {modal.condition:.2e} too large"
        )
    coords = modal.seed(vectorize(model.initial_state.matrix))
    out = np.empty(len(model.channels))
    for k, ch in enumerate(model.channels):
        o = ch.operator.matrix
        row = modal.trace_row(o.conj().T @ o)
        out[k] = ch.rate * modal.integrated_weights(row * coords, KERNEL_WEIGHT_TOL).real
    return out


def recommended_time_axes(
    model: EmitterCavityModel,
    n_points: int = 1024,
    tail: float = 1e-6,
) -> tuple[np.ndarray, np.ndarray]:
    """Square (t, tau) axes long enough that the untracked tail is below ``tail``.

    The horizon bounds the remaining excitation ``<N_exc>(T) <= tail`` using
    the modal expansion, then stretches to cover the slowest decaying mode so
    correlator tails are captured as well.
    """
    if n_points < 16:
        raise ValueError("n_points must be at least 16")
    if not 0.0 < tail < 1.0:
        raise ValueError("tail must lie in (0, 1)")
    modal = model.liouvillian.modal()
    if not modal.well_conditioned:
        raise NumericsError(
            f"generator eigenbasis condition {modal.condition:.2e} too large"
        )
    coords = modal.seed(vectorize(model.initial_state.matrix))
    weights = modal.trace_row(model.excitation_operator.matrix) * coords
    live = ~modal.kernel
    if float(np.sum(np.abs(weights[modal.kernel]))) > KERNEL_WEIGHT_TOL * max(
        float(np.sum(np.abs(weights))), 1e-300
    ):
        raise NumericsError("excitation weight on stationary modes")
    w = np.abs(weights[live])
    decay = -np.real(modal.lambdas[live])
    active = w > 1e-30
    if not np.any(active):
        raise NumericsError("initial state carries no excitation")
    n_active = int(np.count_nonzero(active))
    horizons = np.log(np.maximum(w[active] * n_active / tail, 1.0)) / decay[active]
    t_pop = float(np.max(horizons))
    slowest = float(np.min(decay[decay > 0.0]))
    t_coh = math.log(1.0 / tail) / slowest
    t_max = max(t_pop, 0.5 * t_coh)
    axis = np.linspace(0.0, t_max, n_points)
    return axis, axis.copy()


# ---------------------------------------------------------------------------
# grid (spectral) route
# ---------------------------------------------------------------------------


def default_frequency_axis(
    g: float,
    kappa_c: float,
    gamma_star: float,
    detuning: float = 0.0,
    n_points: int = 2048,
    window_factor: float = 10.0,
) -> np.ndarray:
    """Symmetric uniform axis spanning ``window_factor`` times the top rate."""
    top = max(g, kappa_c, gamma_star, abs(detuning))
    if top <= 0.0:
        raise ValueError("at least one rate must be positive")
    w = window_factor * top
    return np.linspace(-w, w, n_points)


def two_colour_spectrum(
    grid: CorrelatorGrid,
    emission_rate: float,
    omega_axis: np.ndarray,
) -> TwoColourSpectrum:
    """Double Fourier transform of the emission correlator (trapezoid weights).

    Requires matching uniform t and tau axes starting at zero; the lower
    triangle ``t1 < t2`` is filled by the conjugate symmetry of the
    correlator, so the result is exactly Hermitian.  Raises
    :class:`NumericsError` when the frequency axis exceeds the Nyquist limit
    of the time step or when the correlator decays within a single tau step
    (under-resolved grid).
    """
    if emission_rate <= 0.0:
        raise ValueError("emission_rate must be positive")
    t = grid.t_axis
    tau = grid.tau_axis
    if t.size != tau.size or not np.allclose(t, tau, rtol=1e-9, atol=0.0):
        raise ValueError("spectrum requires identical t and tau axes")
    if t[0] != 0.0:
        raise ValueError("time axes must start at zero")
    steps = np.diff(t)
    dt = steps[0]
    if np.max(np.abs(steps - dt)) > 1e-9 * dt:
        raise ValueError("time axes must be uniform")
    omega = np.asarray(omega_axis, dtype=float)
    if np.max(np.abs(omega)) * dt > math.pi:
        raise NumericsError(
            "frequency axis exceeds the Nyquist limit of the time grid"
        )
    g_vals = grid.values
    peak_row = int(np.argmax(np.abs(g_vals[:, 0])))
    peak = abs(g_vals[peak_row, 0])
    if peak > 0.0 and abs(g_vals[peak_row, 1]) < 0.2 * peak:
        raise NumericsError(
            "correlator decays within one tau step; refine the time grid"
        )
    n = t.size
    corr = np.zeros((n, n), dtype=complex)
    rows = np.arange(n)
    for k in range(n):
        corr[rows[: n - k] + k, rows[: n - k]] = g_vals[: n - k, k]
    upper = np.triu_indices(n, k=1)
    corr[upper] = np.conj(corr.T[upper])
    weights = np.full(n, dt)
    weights[0] = weights[-1] = dt / 2.0
    basis = np.exp(1j * np.outer(omega, t)) * weights[None, :]
    s = emission_rate * (basis @ corr @ basis.conj().T)
    s = (s + s.conj().T) / 2.0
    return TwoColourSpectrum(omega, s, emission_rate)


def _tail_coefficients(x: np.ndarray, y: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Fit y ~ a/x^2 + c/x^4 on the sampled tail; y may be (n,) or (m, n)."""
    design = np.stack([1.0 / x**2, 1.0 / x**4], axis=1)
    coeffs, *_ = np.linalg.lstsq(design, np.atleast_2d(y).T, rcond=None)
    return coeffs[0], coeffs[1]


def _completed_curve_integral(omega: np.ndarray, values: np.ndarray,
                              outer_fraction: float = 0.12) -> float:
    """Trapezoid over the window plus fitted inverse-power tails beyond it."""
    total = float(np.trapezoid(values, omega))
    n_outer = max(6, int(outer_fraction * omega.size / 2))
    for sl in (slice(0, n_outer), slice(omega.size - n_outer, omega.size)):
        x = np.abs(omega[sl])
        a, c = _tail_coefficients(x, values[sl])
        w_edge = float(np.max(x))
        total += float(a[0]) / w_edge + float(c[0]) / (3.0 * w_edge**3)
    return total


def zpl_power(spectrum: TwoColourSpectrum) -> float:
    """Collected photon number ``(1/2pi) int S(omega, omega) d omega``.

    The finite window is completed with fitted ``1/omega^2 + 1/omega^4``
    tails, which restores the slowly decaying Lorentzian wings and keeps the
    sum rule against the time domain at the 1e-4 level.
    """
    return _completed_curve_integral(spectrum.omega_axis, spectrum.diagonal) / (
        2.0 * math.pi
    )


def zpl_indistinguishability(spectrum: TwoColourSpectrum) -> float:
    """``int int |S|^2 / (2 pi F)^2`` with the same tail completion as the power.

    Edge strips beyond the window are restored from per-row tail fits (the
    row and column strips coincide by Hermitian symmetry) plus a separable
    corner estimate.
    """
    omega = spectrum.omega_axis
    power = np.abs(spectrum.values) ** 2
    inner = float(np.trapezoid(np.trapezoid(power, omega, axis=1), omega))
    n_outer = max(6, int(0.06 * omega.size))
    strip = 0.0
    for sl in (slice(0, n_outer), slice(omega.size - n_outer, omega.size)):
        x = np.abs(omega[sl])
        a, c = _tail_coefficients(x, power[:, sl])
        w_edge = float(np.max(x))
        per_row = a / w_edge + c / (3.0 * w_edge**3)
        strip += float(np.trapezoid(per_row, omega))
    corner = strip**2 / inner if inner > 0.0 else 0.0
    numerator = inner + 2.0 * strip + corner
    f = zpl_power(spectrum)
    if f <= 1e-12:
        return 0.0
    return numerator / (2.0 * math.pi * f) ** 2


def time_domain_metrics(grid: CorrelatorGrid, emission_rate: float) -> tuple[float, float]:
    """Parseval partner of the grid route, integrated in the time domain.

    ``F = r int <E^dag E> dt`` from the ``tau = 0`` column and
    ``I = 2 r^2 int int_{tau>0} |G|^2 / F^2`` by 2-D trapezoid.
    """
    if emission_rate <= 0.0:
        raise ValueError("emission_rate must be positive")
    f = emission_rate * float(np.trapezoid(grid.values[:, 0].real, grid.t_axis))
    sq = np.abs(grid.values) ** 2
    wedge = float(np.trapezoid(np.trapezoid(sq, grid.tau_axis, axis=1), grid.t_axis))
    if f <= 1e-12:
        return max(f, 0.0), 0.0
    return f, 2.0 * emission_rate**2 * wedge / f**2


# ---------------------------------------------------------------------------
# sideband and filters
# ---------------------------------------------------------------------------


def sideband_power(sideband: SidebandModel, kappa_c: float) -> float:
    """Sideband fraction passing the cavity Lorentzian ``|h_c|^2``.

    Each Lorentzian component overlaps the filter in closed form:
    ``w A (A + B) / ((A + B)^2 + delta^2)`` with ``A = kappa_c/2`` the filter
    half width, ``B`` the component half width and ``delta`` its detuning.
    """
    if kappa_c <= 0.0:
        raise ValueError("kappa_c must be positive")
    a = kappa_c / 2.0
    b = sideband.fwhms / 2.0
    total = sideband.weights * a * (a + b) / ((a + b) ** 2 + sideband.centers**2)
    return float(np.sum(total))


def _filtered_component(a1: float, c1: float, a2: float, c2: float,
                        b: float, delta: float) -> float:
    """int |h1|^2 |h2|^2 L(omega) for Lorentzian filters and line, by residues.

    Filters have half widths ``a1, a2`` centred at ``c1, c2``; the unit-area
    line has half width ``b`` at ``delta``.  Falls back to adaptive
    quadrature when poles nearly coincide.
    """
    poles = np.array([c1 + 1j * a1, c2 + 1j * a2, delta + 1j * b])
    numerator = a1**2 * a2**2 * b / math.pi
    scale = float(np.max(np.abs(poles))) + 1.0
    pairs = [(0, 1), (0, 2), (1, 2)]
    degenerate = any(abs(poles[i] - poles[j]) < 1e-9 * scale for i, j in pairs)
    if degenerate:
        def integrand(w):
            return numerator / (
                ((w - c1) ** 2 + a1**2)
                * ((w - c2) ** 2 + a2**2)
                * ((w - delta) ** 2 + b**2)
            )

        val, _ = scipy.integrate.quad(
            integrand, -np.inf, np.inf, epsabs=0.0, epsrel=1e-11, limit=400
        )
        return float(val)
    centres = np.array([c1, c2, delta])
    halves = np.array([a1, a2, b])
    total = 0.0 + 0.0j
    for k in range(3):
        others = [j for j in range(3) if j != k]
        denom = 1.0 + 0.0j
        for j in others:
            denom *= (poles[k] - centres[j]) ** 2 + halves[j] ** 2
        total += 1.0 / (halves[k] * denom)
    return float(np.real(math.pi * numerator * total / 1.0))


def filtered_sideband_power(
    sideband: SidebandModel, kappa_c: float, ext: FilterSpec
) -> float:
    """Sideband fraction passing both the cavity and the external filter."""
    if kappa_c <= 0.0:
        raise ValueError("kappa_c must be positive")
    a1 = kappa_c / 2.0
    a2 = ext.kappa_f / 2.0
    total = 0.0
    for c, fw, w in zip(sideband.centers, sideband.fwhms, sideband.weights):
        total += w * _filtered_component(a1, 0.0, a2, ext.center, fw / 2.0, c)
    return total


def total_indistinguishability(i_zpl: float, f_zpl: float, f_sb: float) -> float:
    """Combine line and sideband: ``I (F / (F + F_sb))^2``; dark port gives 0."""
    if f_sb < 0.0:
        raise ValueError("f_sb must be non-negative")
    if f_zpl <= 0.0:
        return 0.0
    return i_zpl * (f_zpl / (f_zpl + f_sb)) ** 2


def apply_external_filter(
    spectrum: TwoColourSpectrum, ext: FilterSpec
) -> TwoColourSpectrum:
    """Multiply the two-colour spectrum by ``h(omega) h*(nu)``.

    Composition is associative and order-free: filtering twice equals a
    single filter with the product amplitude.
    """
    h = ext.amplitude(spectrum.omega_axis)
    values = h[:, None] * spectrum.values * h.conj()[None, :]
    return TwoColourSpectrum(spectrum.omega_axis, values, spectrum.emission_rate)


# ---------------------------------------------------------------------------
# end-to-end evaluation
# ---------------------------------------------------------------------------


def evaluate_point(
    model: EmitterCavityModel,
    sideband: SidebandModel | None = None,
    external_filter: FilterSpec | None = None,
) -> FigureOfMerit:
    """Figure of merit for one assembled model, via the exact route.

    With an external filter the collected port is cascaded through a matched
    Fabry-Perot stage and ``beta`` reports the filtered-to-unfiltered power
    ratio including the sideband; without one ``beta = 1``.  The sideband is
    filtered by the cavity Lorentzian of the model's collected port.
    """
    kappa_c = model.emission_rate
    f_plain, i_plain = exact_emission_metrics(model)
    f_sb_plain = sideband_power(sideband, kappa_c) if sideband else 0.0
    if external_filter is None:
        i_total = total_indistinguishability(i_plain, f_plain, f_sb_plain)
        return FigureOfMerit(
            i_zpl=i_plain, f_zpl=f_plain, f_sb=f_sb_plain, i_total=i_total, beta=1.0
        )
    filtered = with_output_filter(model, external_filter.kappa_f, external_filter.center)
    f_filt, i_filt = exact_emission_metrics(filtered)
    f_sb_filt = (
        filtered_sideband_power(sideband, kappa_c, external_filter) if sideband else 0.0
    )
    i_total = total_indistinguishability(i_filt, f_filt, f_sb_filt)
    denom = f_plain + f_sb_plain
    beta = (f_filt + f_sb_filt) / denom if denom > 0.0 else 0.0
    return FigureOfMerit(
        i_zpl=i_filt, f_zpl=f_filt, f_sb=f_sb_filt, i_total=i_total, beta=beta
    )
