"""Electromagnetic post-processing for cavity QED parameters.

Bridges field exports from an FDTD (or any grid-based Maxwell) solver to the
quantities the emitter-cavity model needs: mode volume from the electric
energy density, the spatial structure factor f(r) and polarization overlap
at a candidate emitter site, the (V_m, Q) -> (g, kappa_c) mapping, Purcell
enhancement spectra, and resonance extraction from ringdown signals by
harmonic inversion.

Field-grid files come in two layouts:

* binary: a single UTF-8 JSON header line (terminated by a newline) with
  keys ``version``, ``shape`` ([nx, ny, nz]), ``x``/``y``/``z`` axis
  coordinate lists in meters, followed by ``7 * nx * ny * nz`` little-endian
  float64 values in C order: the relative permittivity block, then the
  real and imaginary parts of each field component (Ex, Ey, Ez).
* CSV fallback: columns ``x, y, z, eps, ReEx, ImEx, ReEy, ImEy, ReEz,
  ImEz``, one row per grid point in any order, forming a complete
  rectilinear grid.

Q convention throughout: field amplitude decays as exp(-pi f t / Q) so the
energy decay rate matches kappa_c = omega_c / Q.
"""

from __future__ import annotations

import json
import warnings
from dataclasses import dataclass, field

import numpy as np

from .models import EmitterParams
from .units import SPEED_OF_LIGHT, TWO_PI

__all__ = [
    "FieldFileError",
    "FieldGrid",
    "CouplingGeometry",
    "CavityParams",
    "Resonance",
    "ResonanceSet",
    "PurcellSpectrum",
    "load_field_grid",
    "save_field_grid",
    "mode_volume",
    "field_structure",
    "coupling_from_geometry",
    "purcell_enhancement",
    "harmonic_inversion",
    "synthesize_ringdown",
    "load_ringdown",
    "load_purcell_spectrum",
]

# A pole with |z| >= 1 describes a non-decaying signal; its Q is reported
# capped rather than infinite so downstream consumers stay finite.
_Q_CAP = 1e9


class FieldFileError(ValueError):
    """Raised when a field or signal file violates its documented layout."""


@dataclass(frozen=True)
class FieldGrid:
    """Sampled permittivity and complex electric field on a rectilinear grid.

    Attributes:
        x, y, z: strictly increasing axis coordinates in meters.
        epsilon: relative permittivity, shape (nx, ny, nz), everywhere >= 1.
        e_field: complex field, shape (nx, ny, nz, 3), arbitrary overall
            scale; at least one sample must be non-zero.
    """

    x: np.ndarray
    y: np.ndarray
    z: np.ndarray
    epsilon: np.ndarray
    e_field: np.ndarray

    def __post_init__(self) -> None:
        x = np.asarray(self.x, dtype=float)
        y = np.asarray(self.y, dtype=float)
        z = np.asarray(self.z, dtype=float)
        eps = np.asarray(self.epsilon, dtype=float)
        e = np.asarray(self.e_field, dtype=complex)
        for name, axis in (("x", x), ("y", y), ("z", z)):
            if axis.ndim != 1 or axis.size < 2:
                raise ValueError(f"axis {name} needs at least two samples")
            if not np.all(np.diff(axis) > 0):
                raise ValueError(f"axis {name} must be strictly increasing")
        shape = (x.size, y.size, z.size)
        if eps.shape != shape:
            raise ValueError(f"epsilon shape {eps.shape} != grid {shape}")
        if e.shape != shape + (3,):
            raise ValueError(f"e_field shape {e.shape} != grid {shape + (3,)}")
        if not (np.all(np.isfinite(eps)) and np.all(np.isfinite(e.view(float)))):
            raise ValueError("non-finite samples in field grid")
        if np.any(eps < 1.0):
            raise ValueError("relative permittivity below 1")
        if not np.any(e != 0):
            raise ValueError("field is zero everywhere")
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "y", y)
        object.__setattr__(self, "z", z)
        object.__setattr__(self, "epsilon", eps)
        object.__setattr__(self, "e_field", e)

    @property
    def energy_density(self) -> np.ndarray:
        """Electric energy density eps * |E|^2 up to constant factors."""
        return self.epsilon * np.sum(np.abs(self.e_field) ** 2, axis=-1)


@dataclass(frozen=True)
class CouplingGeometry:
    """Spatial coupling factors for an emitter placed inside a cavity field.

    ``v_m_eff = v_m / f_r**2`` is the mode volume the emitter effectively
    sees; it diverges (numpy inf) where the field vanishes.
    """

    f_r: float
    eta: float
    v_m: float
    v_m_eff: float

    def __post_init__(self) -> None:
        if not 0.0 <= self.f_r <= 1.0:
            raise ValueError("f_r outside [0, 1]")
        if not 0.0 <= self.eta <= 1.0 + 1e-12:
            raise ValueError("eta outside [0, 1]")
        if self.v_m <= 0:
            raise ValueError("v_m must be positive")
        if self.v_m_eff < self.v_m * (1 - 1e-12):
            raise ValueError("v_m_eff smaller than v_m")


# Geometry of a perfectly placed, perfectly aligned emitter.
IDEAL_PLACEMENT = None


@dataclass(frozen=True)
class CavityParams:
    """Cavity description by relative mode volume and quality factor.

    ``v_m_rel`` is the mode volume in units of (lambda/n)^3 where lambda is
    the free-space resonance wavelength.
    """

    v_m_rel: float
    q: float
    omega_c: float
    n: float = 2.0

    def __post_init__(self) -> None:
        if self.v_m_rel <= 0:
            raise ValueError("v_m_rel must be positive")
        if self.q < 1:
            raise ValueError("quality factor must be >= 1")
        if self.omega_c <= 0 or self.n < 1:
            raise ValueError("invalid cavity frequency or index")

    @property
    def kappa_c(self) -> float:
        """Cavity energy decay rate omega_c / Q in rad/s."""
        return self.omega_c / self.q

    @property
    def wavelength(self) -> float:
        """Free-space resonance wavelength in meters."""
        return TWO_PI * SPEED_OF_LIGHT / self.omega_c

    @property
    def v_m(self) -> float:
        """Absolute mode volume in m^3."""
        return self.v_m_rel * (self.wavelength / self.n) ** 3


def save_field_grid(path, grid: FieldGrid) -> None:
    """Write a grid in the binary layout documented in the module docstring."""
    header = {
        "version": 1,
        "shape": [grid.x.size, grid.y.size, grid.z.size],
        "axis_unit": "m",
        "x": grid.x.tolist(),
        "y": grid.y.tolist(),
        "z": grid.z.tolist(),
        "layout": "eps, then Re/Im per component (Ex, Ey, Ez), C order",
    }
    blocks = [grid.epsilon]
    for comp in range(3):
        blocks.append(grid.e_field[..., comp].real)
        blocks.append(grid.e_field[..., comp].imag)
    payload = np.concatenate([b.ravel(order="C") for b in blocks])
    with open(path, "wb") as fh:
        fh.write(json.dumps(header).encode("utf-8") + b"\n")
        fh.write(payload.astype("<f8").tobytes())


def _load_binary_grid(path, first_line: bytes, offset: int) -> FieldGrid:
    try:
        header = json.loads(first_line.decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise FieldFileError(
            f"{path}: header line (bytes 0..{offset}) is not valid JSON: {exc}"
        ) from None
    for key in ("shape", "x", "y", "z"):
        if key not in header:
            raise FieldFileError(f"{path}: header missing key {key!r}")
    nx, ny, nz = (int(s) for s in header["shape"])
    n_pts = nx * ny * nz
    expected = 7 * n_pts * 8
    with open(path, "rb") as fh:
        fh.seek(offset)
        raw = fh.read()
    if len(raw) != expected:
        raise FieldFileError(
            f"{path}: payload is {len(raw)} bytes at offset {offset}, "
            f"expected {expected} (7 x {n_pts} float64)"
        )
    data = np.frombuffer(raw, dtype="<f8")
    shape = (nx, ny, nz)
    eps = data[:n_pts].reshape(shape)
    e = np.empty(shape + (3,), dtype=complex)
    for comp in range(3):
        start = n_pts * (1 + 2 * comp)
        e[..., comp] = (
            data[start : start + n_pts].reshape(shape)
            + 1j * data[start + n_pts : start + 2 * n_pts].reshape(shape)
        )
    try:
        return FieldGrid(header["x"], header["y"], header["z"], eps, e)
    except ValueError as exc:
        raise FieldFileError(f"{path}: {exc}") from None


def _load_csv_grid(path) -> FieldGrid:
    try:
        table = np.genfromtxt(path, delimiter=",", comments="#", skip_header=0)
    except OSError:
        raise
    if table.ndim == 1:
        table = table.reshape(1, -1)
    # A non-numeric header row shows up as a leading all-NaN row.
    if table.size and np.all(np.isnan(table[0])):
        table = table[1:]
    if table.ndim != 2 or table.shape[1] != 10:
        raise FieldFileError(
            f"{path}: expected 10 CSV columns "
            "(x,y,z,eps,ReEx,ImEx,ReEy,ImEy,ReEz,ImEz), "
            f"got shape {table.shape}"
        )
    if np.any(np.isnan(table)):
        bad = int(np.argwhere(np.isnan(table))[0][0])
        raise FieldFileError(f"{path}: non-numeric value in data row {bad}")
    x = np.unique(table[:, 0])
    y = np.unique(table[:, 1])
    z = np.unique(table[:, 2])
    if x.size * y.size * z.size != table.shape[0]:
        raise FieldFileError(
            f"{path}: {table.shape[0]} rows do not fill the "
            f"{x.size} x {y.size} x {z.size} rectilinear grid"
        )
    ix = np.searchsorted(x, table[:, 0])
    iy = np.searchsorted(y, table[:, 1])
    iz = np.searchsorted(z, table[:, 2])
    shape = (x.size, y.size, z.size)
    eps = np.zeros(shape)
    e = np.zeros(shape + (3,), dtype=complex)
    seen = np.zeros(shape, dtype=bool)
    eps[ix, iy, iz] = table[:, 3]
    for comp in range(3):
        e[ix, iy, iz, comp] = table[:, 4 + 2 * comp] + 1j * table[:, 5 + 2 * comp]
    seen[ix, iy, iz] = True
    if not np.all(seen):
        raise FieldFileError(f"{path}: duplicate rows leave grid points unset")
    try:
        return FieldGrid(x, y, z, eps, e)
    except ValueError as exc:
        raise FieldFileError(f"{path}: {exc}") from None


def load_field_grid(path) -> FieldGrid:
    """Load a field grid, auto-detecting the binary or CSV layout."""
    with open(path, "rb") as fh:
        first = fh.readline()
    if first.lstrip().startswith(b"{"):
        return _load_binary_grid(path, first, len(first))
    return _load_csv_grid(path)


def _trapezoid_3d(values: np.ndarray, grid: FieldGrid) -> float:
    part = np.trapezoid(values, x=grid.z, axis=2)
    part = np.trapezoid(part, x=grid.y, axis=1)
    return float(np.trapezoid(part, x=grid.x, axis=0))


def mode_volume(grid: FieldGrid) -> float:
    """Mode volume: integral of eps*|E|^2 normalised by its maximum, in m^3."""
    u = grid.energy_density
    peak = float(u.max())
    if peak <= 0:
        raise ValueError("energy density vanishes everywhere")
    return _trapezoid_3d(u, grid) / peak


def _interpolate_field(grid: FieldGrid, r) -> np.ndarray:
    """Trilinear interpolation of the complex field at position r."""
    r = np.asarray(r, dtype=float)
    if r.shape != (3,):
        raise ValueError("position must be a 3-vector")
    weights = []
    cells = []
    for axis, coord in zip((grid.x, grid.y, grid.z), r):
        if coord < axis[0] or coord > axis[-1]:
            raise ValueError(f"position component {coord} outside grid domain")
        idx = min(int(np.searchsorted(axis, coord, side="right")) - 1, axis.size - 2)
        idx = max(idx, 0)
        frac = (coord - axis[idx]) / (axis[idx + 1] - axis[idx])
        cells.append(idx)
        weights.append(frac)
    out = np.zeros(3, dtype=complex)
    for dx in (0, 1):
        for dy in (0, 1):
            for dz in (0, 1):
                w = (
                    (weights[0] if dx else 1 - weights[0])
                    * (weights[1] if dy else 1 - weights[1])
                    * (weights[2] if dz else 1 - weights[2])
                )
                if w:
                    out += w * grid.e_field[cells[0] + dx, cells[1] + dy, cells[2] + dz]
    return out


def field_structure(grid: FieldGrid, r, dipole_axis) -> CouplingGeometry:
    """Coupling geometry for a dipole at position ``r`` (meters).

    f_r compares the dipole-projected field at ``r`` with the peak field at
    the energy-density maximum; eta is the overlap of the dipole axis with
    the peak field polarization.
    """
    d = np.asarray(dipole_axis, dtype=float)
    norm = np.linalg.norm(d)
    if norm == 0:
        raise ValueError("dipole axis must be non-zero")
    d = d / norm
    u = grid.energy_density
    peak_idx = np.unravel_index(int(np.argmax(u)), u.shape)
    e_peak = grid.e_field[peak_idx]
    peak_norm = np.linalg.norm(e_peak)
    pol_c = e_peak / peak_norm
    e_r = _interpolate_field(grid, r)
    f_r = float(np.clip(abs(np.dot(d, e_r)) / peak_norm, 0.0, 1.0))
    eta = float(min(abs(np.dot(d, pol_c.conj())), 1.0))
    v_m = mode_volume(grid)
    v_m_eff = v_m / f_r**2 if f_r > 0 else np.inf
    return CouplingGeometry(f_r=f_r, eta=eta, v_m=v_m, v_m_eff=v_m_eff)


def coupling_from_geometry(
    cav: CavityParams,
    em: EmitterParams,
    geom: CouplingGeometry | None = IDEAL_PLACEMENT,
    radiative_rate: float | None = None,
) -> float:
    """Emitter-cavity coupling rate g in rad/s.

    g = eta * f_r * sqrt(3 pi c^3 gamma_zpl / (2 omega0^2 n^3 V_m)), which
    for V_m = v_m_rel (lambda/n)^3 reduces to the index-independent form
    sqrt(3 omega0 gamma_zpl / (16 pi^2 v_m_rel)). The rate feeding the
    dipole defaults to the Debye-Waller weighted radiative rate
    ``em.debye_waller * em.gamma``; pass ``radiative_rate`` to override
    (the bundled configurations use the full rate ``em.gamma``, see their
    comments). On resonance this makes the weak-coupling Purcell factor
    obey 4 g^2 / (kappa_c gamma_zpl) = (3 / 4 pi^2) (lambda/n)^3 Q / V_m
    exactly.
    """
    gamma_zpl = (
        em.debye_waller * em.gamma if radiative_rate is None else float(radiative_rate)
    )
    if gamma_zpl <= 0:
        raise ValueError("radiative rate must be positive")
    g = np.sqrt(3.0 * em.omega0 * gamma_zpl / (16.0 * np.pi**2 * cav.v_m_rel))
    if geom is not IDEAL_PLACEMENT and geom is not None:
        g *= geom.eta * geom.f_r
    return float(g)


@dataclass(frozen=True)
class PurcellSpectrum:
    """Pointwise enhancement ratio on the overlap of two spectra."""

    frequency: np.ndarray
    f_p: np.ndarray
    n_excluded: int = 0

    def __post_init__(self) -> None:
        f = np.asarray(self.frequency, dtype=float)
        v = np.asarray(self.f_p, dtype=float)
        if f.shape != v.shape or f.ndim != 1:
            raise ValueError("frequency and f_p must be matching 1-D arrays")
        if not np.all(np.isfinite(v)) or np.any(v < 0):
            raise ValueError("enhancement must be finite and non-negative")
        object.__setattr__(self, "frequency", f)
        object.__setattr__(self, "f_p", v)


def purcell_enhancement(p_wg, p_0) -> PurcellSpectrum:
    """Ratio of two (frequency, power) spectra on their common axis.

    Both inputs are (N, 2) arrays or equivalent pairs of columns; the ratio
    is taken after linear interpolation onto the merged axis restricted to
    the overlap. Samples where the reference power is zero are excluded and
    counted.
    """
    wg = np.asarray(p_wg, dtype=float)
    ref = np.asarray(p_0, dtype=float)
    if wg.ndim != 2 or wg.shape[1] != 2 or ref.ndim != 2 or ref.shape[1] != 2:
        raise ValueError("spectra must be (N, 2) arrays of (frequency, power)")
    wg = wg[np.argsort(wg[:, 0])]
    ref = ref[np.argsort(ref[:, 0])]
    lo = max(wg[0, 0], ref[0, 0])
    hi = min(wg[-1, 0], ref[-1, 0])
    if not lo < hi:
        raise ValueError("spectra have disjoint frequency ranges")
    axis = np.unique(np.concatenate([wg[:, 0], ref[:, 0]]))
    axis = axis[(axis >= lo) & (axis <= hi)]
    num = np.interp(axis, wg[:, 0], wg[:, 1])
    den = np.interp(axis, ref[:, 0], ref[:, 1])
    keep = den > 0
    n_excluded = int(np.sum(~keep))
    if n_excluded:
        warnings.warn(
            f"excluded {n_excluded} samples with zero reference power",
            stacklevel=2,
        )
    if not np.any(keep):
        raise ValueError("reference power is zero on the entire overlap")
    return PurcellSpectrum(axis[keep], num[keep] / den[keep], n_excluded)


@dataclass(frozen=True)
class Resonance:
    """One damped mode: s(t) ~ amplitude * exp(-i 2 pi f t - pi f t / Q)."""

    frequency: float
    q: float
    amplitude: complex

    def __post_init__(self) -> None:
        if self.frequency < 0:
            raise ValueError("frequency must be non-negative")
        if self.q <= 0:
            raise ValueError("Q must be positive")

    @property
    def decay_rate(self) -> float:
        """Field-amplitude decay rate pi f / Q in 1/s."""
        return np.pi * self.frequency / self.q


@dataclass(frozen=True)
class ResonanceSet:
    """Modes sorted by |amplitude| descending."""

    modes: tuple = field(default_factory=tuple)

    def __post_init__(self) -> None:
        amps = [abs(m.amplitude) for m in self.modes]
        if any(a < b for a, b in zip(amps, amps[1:])):
            raise ValueError("modes must be sorted by |amplitude| descending")

    def __len__(self) -> int:
        return len(self.modes)

    def __iter__(self):
        return iter(self.modes)

    def __getitem__(self, i):
        return self.modes[i]


def synthesize_ringdown(modes, n_samples: int, dt: float) -> np.ndarray:
    """Complex time series produced by a set of damped modes."""
    k = np.arange(n_samples)
    signal = np.zeros(n_samples, dtype=complex)
    for m in modes:
        pole = np.exp((-1j * TWO_PI * m.frequency - m.decay_rate) * dt)
        signal += m.amplitude * pole**k
    return signal


def harmonic_inversion(
    signal,
    dt: float,
    max_modes: int = 8,
    noise_floor: float = 1e-6,
) -> ResonanceSet:
    """Extract damped modes from a uniformly sampled complex series.

    Subspace rotation on the shifted Hankel data matrix: the signal poles
    are eigenvalues of the operator mapping the signal subspace onto its
    one-sample shift; amplitudes follow from a Vandermonde least-squares
    fit. Returns at most ``max_modes`` modes with |A| above
    ``noise_floor * max |A|``, each obeying the Nyquist bound
    f < 1/(2 dt). Fewer recoverable modes than requested is a valid
    outcome. Real-signal inputs contain each physical mode twice
    (conjugate pair); only the non-negative-frequency member is kept.
    """
    s = np.asarray(signal, dtype=complex).ravel()
    if dt <= 0:
        raise ValueError("dt must be positive")
    if max_modes < 1:
        raise ValueError("max_modes must be at least 1")
    if s.size < 4 * max_modes:
        raise ValueError(
            f"need at least {4 * max_modes} samples for {max_modes} modes, got {s.size}"
        )
    if not np.all(np.isfinite(s.view(float))):
        raise ValueError("non-finite samples in signal")
    if not np.any(s != 0):
        return ResonanceSet(())

    n = s.size
    n_cols = n // 2
    hankel = np.lib.stride_tricks.sliding_window_view(s, n_cols)
    u, sing, _ = np.linalg.svd(hankel, full_matrices=False)
    rank = int(np.sum(sing > max(1e-12 * sing[0], 0.0)))
    r = min(max_modes, rank)
    if r == 0:
        return ResonanceSet(())
    u_r = u[:, :r]
    # Poles are the eigenvalues of pinv(U[:-1]) @ U[1:].
    rotation = np.linalg.pinv(u_r[:-1]) @ u_r[1:]
    poles = np.linalg.eigvals(rotation)

    # Amplitudes from the full record, then noise gating.
    k = np.arange(n)[:, None]
    vander = np.power(poles[None, :], k)
    amps, *_ = np.linalg.lstsq(vander, s, rcond=None)

    modes = []
    for pole, amp in zip(poles, amps):
        mag = abs(pole)
        if mag == 0:
            continue
        freq = -np.angle(pole) / (TWO_PI * dt)
        if freq < 0:
            continue
        decay = -np.log(mag) / dt if mag < 1 else 0.0
        if freq == 0 and decay == 0:
            continue
        if decay <= 0 or np.pi * freq / decay > _Q_CAP:
            q = _Q_CAP
        else:
            q = np.pi * freq / decay
        if freq == 0:
            continue
        modes.append(Resonance(frequency=freq, q=q, amplitude=complex(amp)))
    if not modes:
        return ResonanceSet(())
    peak = max(abs(m.amplitude) for m in modes)
    modes = [m for m in modes if abs(m.amplitude) >= noise_floor * peak]
    modes.sort(key=lambda m: abs(m.amplitude), reverse=True)
    return ResonanceSet(tuple(modes))


def load_ringdown(path):
    """Read a ringdown CSV: (time, Re) or (time, Re, Im) columns.

    Returns ``(signal, dt)``; the time axis must be uniform to 1e-6
    relative.
    """
    table = np.genfromtxt(path, delimiter=",", comments="#")
    if table.ndim == 1:
        table = table.reshape(1, -1)
    if table.size and np.all(np.isnan(table[0])):
        table = table[1:]
    if table.ndim != 2 or table.shape[1] not in (2, 3):
        raise FieldFileError(
            f"{path}: expected 2 or 3 CSV columns (time, Re[, Im])"
        )
    if table.shape[0] < 2:
        raise FieldFileError(f"{path}: need at least two samples")
    if np.any(np.isnan(table)):
        raise FieldFileError(f"{path}: non-numeric value in signal file")
    t = table[:, 0]
    steps = np.diff(t)
    dt = float(np.mean(steps))
    if dt <= 0 or np.max(np.abs(steps - dt)) > 1e-6 * abs(dt):
        raise FieldFileError(f"{path}: time axis is not uniformly spaced")
    signal = table[:, 1].astype(complex)
    if table.shape[1] == 3:
        signal = signal + 1j * table[:, 2]
    return signal, dt


def load_purcell_spectrum(path) -> np.ndarray:
    """Read a two-column (frequency_THz, power) CSV as an (N, 2) array."""
    table = np.genfromtxt(path, delimiter=",", comments="#")
    if table.ndim == 1:
        table = table.reshape(1, -1)
    if table.size and np.all(np.isnan(table[0])):
        table = table[1:]
    if table.ndim != 2 or table.shape[1] != 2:
        raise FieldFileError(f"{path}: expected 2 CSV columns (frequency_THz, power)")
    if np.any(np.isnan(table)):
        raise FieldFileError(f"{path}: non-numeric value in spectrum file")
    return table
