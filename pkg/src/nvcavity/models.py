"""Emitter-cavity models and the emitter's spectral inputs.

Builds the Lindblad models used throughout: a two-level zero-phonon-line
emitter coupled to a single cavity mode, a three-level variant with two
orthogonally polarised excited states exchanging population thermally, and a
phonon-sideband line shape carried as a sum of Lorentzian components.

Conventions
-----------
All rates are angular (rad/s) and Hamiltonians live in the frame rotating at
the cavity frequency, so only detunings appear.  ``gamma`` is the total
radiative decay of the excited state, ``gamma_star`` the pure-dephasing rate,
``debye_waller`` the fraction of free-space emission in the zero-phonon line.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

try:
    import tomllib
except ModuleNotFoundError:  # Python 3.10
    import tomli as tomllib

from .dynamics import (
    CollapseChannel,
    DensityOperator,
    HilbertSpace,
    Operator,
    Superoperator,
    basis_state,
    build_liouvillian,
    lowering_operator,
    number_operator,
    projector,
    subsystem_operator,
    transition_operator,
)
from .units import BOLTZMANN, HBAR, TWO_PI, to_angular


class SidebandFileError(ValueError):
    """A sideband parameter file failed validation."""


@dataclass(frozen=True)
class EmitterParams:
    """Two-level emitter rates (angular, rad/s) and optical frequency."""

    gamma: float
    gamma_star: float
    debye_waller: float
    omega0: float

    def __post_init__(self):
        if self.gamma <= 0.0:
            raise ValueError("gamma must be positive")
        if self.gamma_star < 0.0:
            raise ValueError("gamma_star must be non-negative")
        if not 0.0 < self.debye_waller <= 1.0:
            raise ValueError("debye_waller must lie in (0, 1]")
        if self.omega0 <= 0.0:
            raise ValueError("omega0 must be positive")


@dataclass(frozen=True)
class ThreeLevelParams:
    """Two bright excited states split by ``delta`` exchanging population.

    ``gamma_xy`` is the downhill inter-branch relaxation rate; the uphill rate
    carries the Boltzmann factor ``exp(-hbar*delta/(kB*temperature))``.
    ``upper`` names which excited state (``"x"`` or ``"y"``) sits ``delta``
    above the cavity-resonant one.
    """

    gamma: float
    gamma_xy: float
    delta: float
    temperature: float
    upper: str = "x"

    def __post_init__(self):
        if self.gamma <= 0.0:
            raise ValueError("gamma must be positive")
        if self.gamma_xy < 0.0:
            raise ValueError("gamma_xy must be non-negative")
        if self.delta < 0.0:
            raise ValueError("delta must be non-negative")
        if self.temperature <= 0.0:
            raise ValueError("temperature must be positive")
        if self.upper not in ("x", "y"):
            raise ValueError("upper must be 'x' or 'y'")

    @property
    def boltzmann_factor(self) -> float:
        """exp(-hbar*delta / kB*T), the uphill/downhill rate ratio."""
        return math.exp(-HBAR * self.delta / (BOLTZMANN * self.temperature))


@dataclass(frozen=True)
class EmitterCavityModel:
    """Assembled Lindblad model plus the collected-emission bookkeeping."""

    space: HilbertSpace
    hamiltonian: Operator
    channels: tuple[CollapseChannel, ...]
    liouvillian: Superoperator
    initial_state: DensityOperator
    emission_operator: Operator
    emission_rate: float
    excitation_operator: Operator

    def loss_channels(self) -> tuple[int, ...]:
        """Indices of channels that lower the excitation number.

        A channel conserves excitation iff its operator commutes with the
        excitation-number operator (pure dephasing, inter-branch relaxation);
        the rest carry quanta out of the system.
        """
        n = self.excitation_operator.matrix
        out = []
        for k, ch in enumerate(self.channels):
            o = ch.operator.matrix
            comm = o @ n - n @ o
            scale = max(1.0, float(np.max(np.abs(o))))
            if float(np.max(np.abs(comm))) > 1e-12 * scale:
                out.append(k)
        return tuple(out)


def bare_indistinguishability(gamma: float, gamma_star: float, debye_waller: float) -> float:
    """Cavity-free estimate: Debye-Waller squared times gamma/(gamma+gamma*).

    Both rates must use the same convention (angular or ordinary); only their
    ratio enters.
    """
    if gamma <= 0.0:
        raise ValueError("gamma must be positive")
    if gamma_star < 0.0:
        raise ValueError("gamma_star must be non-negative")
    if not 0.0 < debye_waller <= 1.0:
        raise ValueError("debye_waller must lie in (0, 1]")
    return debye_waller**2 * gamma / (gamma + gamma_star)


def _assemble(space, hamiltonian, channels, initial_state, emission_operator,
              emission_rate, excitation_operator) -> EmitterCavityModel:
    return EmitterCavityModel(
        space=space,
        hamiltonian=hamiltonian,
        channels=tuple(channels),
        liouvillian=build_liouvillian(hamiltonian, list(channels)),
        initial_state=initial_state,
        emission_operator=emission_operator,
        emission_rate=emission_rate,
        excitation_operator=excitation_operator,
    )


def build_two_level_model(
    em: EmitterParams,
    g: float,
    kappa_c: float,
    detuning: float = 0.0,
    photon_cutoff: int = 1,
) -> EmitterCavityModel:
    """Two-level emitter exchanging one excitation with a damped cavity mode.

    H = detuning * sigma^dag sigma + g (sigma^dag a + sigma a^dag) with
    channels (gamma, sigma), (gamma_star, sigma^dag sigma), (kappa_c, a).
    The initial state is the bare excited state with an empty cavity; the
    collected port is the cavity output at rate ``kappa_c``.
    """
    if g < 0.0 or kappa_c <= 0.0:
        raise ValueError("g must be non-negative and kappa_c positive")
    if photon_cutoff < 1:
        raise ValueError("photon_cutoff must be at least 1")
    space = HilbertSpace((2, photon_cutoff + 1))
    sigma = transition_operator(space, 0, 0, 1)
    a = lowering_operator(space, 1)
    excited = projector(space, 0, 1)
    h = detuning * excited + g * (sigma.dagger() @ a + sigma @ a.dagger())
    channels = [
        CollapseChannel(em.gamma, sigma),
        CollapseChannel(em.gamma_star, excited),
        CollapseChannel(kappa_c, a),
    ]
    rho0 = basis_state(space, (1, 0))
    n_exc = excited + number_operator(space, 1)
    return _assemble(space, h, channels, rho0, a, kappa_c, n_exc)


def build_bare_emitter_model(em: EmitterParams) -> EmitterCavityModel:
    """Emitter alone; the collected port is the radiative channel itself."""
    space = HilbertSpace((2,))
    sigma = transition_operator(space, 0, 0, 1)
    excited = projector(space, 0, 1)
    h = Operator(np.zeros((2, 2)), space)
    channels = [
        CollapseChannel(em.gamma, sigma),
        CollapseChannel(em.gamma_star, excited),
    ]
    rho0 = basis_state(space, (1,))
    return _assemble(space, h, channels, rho0, sigma, em.gamma, excited)


def build_three_level_model(
    params: ThreeLevelParams,
    g: float,
    kappa_c: float,
    theta: float,
    photon_cutoff: int = 1,
    initial: DensityOperator | None = None,
) -> EmitterCavityModel:
    """Three-level emitter: ground plus two excited branches, one cavity mode.

    The cavity couples to the dipole combination
    ``sin(theta) sigma_x + cos(theta) sigma_y`` and is resonant with the
    lower branch; the upper branch sits ``delta`` higher.  Thermal exchange
    runs downhill at ``gamma_xy`` and uphill at the Boltzmann-suppressed rate.
    By default the initial state populates the branches with weights
    ``(sin(theta), cos(theta))`` normalised by their sum.
    """
    if g < 0.0 or kappa_c <= 0.0:
        raise ValueError("g must be non-negative and kappa_c positive")
    if not 0.0 <= theta <= math.pi / 2.0:
        raise ValueError("theta must lie in [0, pi/2]")
    if photon_cutoff < 1:
        raise ValueError("photon_cutoff must be at least 1")
    space = HilbertSpace((3, photon_cutoff + 1))
    # atom levels: 0 = ground, 1 = e_x, 2 = e_y
    sigma_x = transition_operator(space, 0, 0, 1)
    sigma_y = transition_operator(space, 0, 0, 2)
    p_x = projector(space, 0, 1)
    p_y = projector(space, 0, 2)
    a = lowering_operator(space, 1)
    if params.upper == "x":
        p_upper, upper_idx, lower_idx = p_x, 1, 2
    else:
        p_upper, upper_idx, lower_idx = p_y, 2, 1
    downhill = transition_operator(space, 0, lower_idx, upper_idx)
    uphill = transition_operator(space, 0, upper_idx, lower_idx)
    sigma_m = math.sin(theta) * sigma_x + math.cos(theta) * sigma_y
    h = params.delta * p_upper + g * (sigma_m.dagger() @ a + sigma_m @ a.dagger())
    channels = [
        CollapseChannel(params.gamma, sigma_x),
        CollapseChannel(params.gamma, sigma_y),
        CollapseChannel(params.gamma_xy, downhill),
        CollapseChannel(params.gamma_xy * params.boltzmann_factor, uphill),
        CollapseChannel(kappa_c, a),
    ]
    if initial is None:
        wx, wy = math.sin(theta), math.cos(theta)
        norm = wx + wy
        mat = (wx * p_x.matrix + wy * p_y.matrix) / norm
        vac = np.zeros((photon_cutoff + 1, photon_cutoff + 1), dtype=complex)
        vac[0, 0] = 1.0
        # the projectors already carry the photon identity; restrict to vacuum
        vac_proj = subsystem_operator(space, 1, vac)
        mat = vac_proj.matrix @ mat @ vac_proj.matrix
        initial = DensityOperator(mat, space)
    elif initial.space != space:
        raise ValueError("initial state acts on a different space")
    n_exc = p_x + p_y + number_operator(space, 1)
    return _assemble(space, h, channels, initial, a, kappa_c, n_exc)


def with_output_filter(model: EmitterCavityModel, kappa_f: float,
                       center: float = 0.0) -> EmitterCavityModel:
    """Cascade a matched two-sided Fabry-Perot filter onto the collected port.

    The filter mode ``b`` has total linewidth ``kappa_f`` split equally
    between an input port (fed unidirectionally by the model's emission port)
    and an output port, giving the on-resonance-unity transmission
    ``|h(omega)|^2 = (kappa_f/2)^2 / ((omega - center)^2 + (kappa_f/2)^2)``.
    The returned model's collected port is the filter output.
    """
    if kappa_f <= 0.0:
        raise ValueError("kappa_f must be positive")
    space = HilbertSpace(model.space.dims + (2,))
    eye_f = np.eye(2, dtype=complex)

    def lift(op: Operator) -> Operator:
        return Operator(np.kron(op.matrix, eye_f), space)

    b = lowering_operator(space, len(space.dims) - 1)
    n_b = number_operator(space, len(space.dims) - 1)
    half = kappa_f / 2.0
    c1 = math.sqrt(model.emission_rate) * lift(model.emission_operator)
    c2 = math.sqrt(half) * b
    cascade = 0.5j * (c1.dagger() @ c2 - c2.dagger() @ c1)
    h = lift(model.hamiltonian) + center * n_b + cascade
    channels = [CollapseChannel(1.0, c1 + c2), CollapseChannel(half, b)]
    for ch in model.channels:
        if ch.rate == model.emission_rate and np.array_equal(
            ch.operator.matrix, model.emission_operator.matrix
        ):
            continue  # absorbed into the cascaded jump
        channels.append(CollapseChannel(ch.rate, lift(ch.operator)))
    rho_mat = np.kron(model.initial_state.matrix, np.diag([1.0, 0.0]).astype(complex))
    rho0 = DensityOperator(rho_mat, space)
    n_exc = lift(model.excitation_operator) + n_b
    return _assemble(space, h, tuple(channels), rho0, b, half, n_exc)


@dataclass(frozen=True)
class SidebandModel:
    """Phonon sideband as weighted Lorentzian components.

    Centers are detunings from the zero-phonon line (red side negative),
    widths are FWHM, all angular (rad/s).  Weights sum to
    ``1 - debye_waller``: the full free-space emission spectrum integrates to
    one with ``debye_waller`` in the line itself.
    """

    centers: np.ndarray
    fwhms: np.ndarray
    weights: np.ndarray
    debye_waller: float

    def __post_init__(self):
        centers = np.atleast_1d(np.asarray(self.centers, dtype=float))
        fwhms = np.atleast_1d(np.asarray(self.fwhms, dtype=float))
        weights = np.atleast_1d(np.asarray(self.weights, dtype=float))
        if centers.shape != fwhms.shape or centers.shape != weights.shape:
            raise SidebandFileError("component arrays must share one length")
        if centers.ndim != 1 or centers.size == 0:
            raise SidebandFileError("at least one component required")
        if np.any(fwhms <= 0.0):
            raise SidebandFileError("component widths must be positive")
        if np.any(weights < 0.0):
            raise SidebandFileError("component weights must be non-negative")
        if not 0.0 < self.debye_waller <= 1.0:
            raise SidebandFileError("debye_waller must lie in (0, 1]")
        target = 1.0 - self.debye_waller
        if abs(float(weights.sum()) - target) > 1e-9 * max(target, 1e-30):
            raise SidebandFileError(
                f"weights sum to {weights.sum()!r}, expected {target!r}"
            )
        object.__setattr__(self, "centers", centers)
        object.__setattr__(self, "fwhms", fwhms)
        object.__setattr__(self, "weights", weights)

    @classmethod
    def from_raw(cls, centers, fwhms, weights, debye_waller) -> "SidebandModel":
        """Build with weights renormalised to ``1 - debye_waller``."""
        weights = np.atleast_1d(np.asarray(weights, dtype=float))
        total = float(weights.sum())
        if total <= 0.0:
            raise SidebandFileError("weights must have a positive sum")
        scaled = weights * (1.0 - debye_waller) / total
        return cls(np.asarray(centers, float), np.asarray(fwhms, float), scaled, debye_waller)


def sideband_spectrum(model: SidebandModel, omega_axis: np.ndarray) -> np.ndarray:
    """Sideband spectral density on an axis of detunings from the line."""
    omega = np.asarray(omega_axis, dtype=float)
    out = np.zeros_like(omega)
    for c, fw, w in zip(model.centers, model.fwhms, model.weights):
        half = fw / 2.0
        out += w * (fw / TWO_PI) / ((omega - c) ** 2 + half**2)
    return out


def load_sideband_model(path: str | Path) -> SidebandModel:
    """Read a sideband parameter file (TOML or JSON by extension).

    Schema: optional ``angular`` (default false) and ``debye_waller``
    (default 0.02), plus a ``components`` list of tables with ``center_THz``,
    ``fwhm_THz`` and ``weight``.  Weights are renormalised on load.
    """
    path = Path(path)
    text = path.read_text()
    try:
        if path.suffix.lower() == ".json":
            raw = json.loads(text)
        else:
            raw = tomllib.loads(text)
    except (json.JSONDecodeError, tomllib.TOMLDecodeError) as exc:
        raise SidebandFileError(f"{path}: cannot parse: {exc}") from exc
    if not isinstance(raw, dict) or "components" not in raw:
        raise SidebandFileError(f"{path}: missing 'components' list")
    angular = bool(raw.get("angular", False))
    debye_waller = float(raw.get("debye_waller", 0.02))
    comps = raw["components"]
    if not isinstance(comps, list) or not comps:
        raise SidebandFileError(f"{path}: 'components' must be a non-empty list")
    centers, fwhms, weights = [], [], []
    for k, comp in enumerate(comps):
        try:
            centers.append(to_angular(float(comp["center_THz"]), "THz", angular))
            fwhms.append(to_angular(float(comp["fwhm_THz"]), "THz", angular))
            weights.append(float(comp["weight"]))
        except (KeyError, TypeError, ValueError) as exc:
            raise SidebandFileError(
                f"{path}: component {k}: expected center_THz, fwhm_THz, weight ({exc})"
            ) from exc
    try:
        return SidebandModel.from_raw(centers, fwhms, weights, debye_waller)
    except SidebandFileError as exc:
        raise SidebandFileError(f"{path}: {exc}") from exc
