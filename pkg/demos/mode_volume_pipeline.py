#
# From a field export to cavity QED rates: mode volume, placement factors,
# and the (V_m, Q) -> (g, kappa_c) mapping.
#
# Stands in for a solver export with a Gaussian mode of known analytic
# volume so every number printed here has a closed form to compare against.
#
import tempfile
from pathlib import Path

import numpy as np

from nvcavity.models import EmitterParams
from nvcavity.photonics import (
    CavityParams,
    FieldGrid,
    coupling_from_geometry,
    field_structure,
    load_field_grid,
    mode_volume,
    save_field_grid,
)
from nvcavity.units import TWO_PI, wavelength_to_angular

SIGMA = 80e-9  # mode radius in meters


def gaussian_export(path):
    half_width, per_sigma = 3.0, 12
    n = 2 * int(round(half_width * per_sigma)) + 1
    axis = np.linspace(-half_width * SIGMA, half_width * SIGMA, n)
    xx, yy, zz = np.meshgrid(axis, axis, axis, indexing="ij", sparse=True)
    e = np.zeros((n, n, n, 3), dtype=complex)
    e[..., 0] = np.exp(-(xx**2 + yy**2 + zz**2) / (2.0 * SIGMA**2))
    save_field_grid(path, FieldGrid(axis, axis, axis, np.ones((n, n, n)), e))


def main():
    with tempfile.TemporaryDirectory() as tmp:
        path = Path(tmp) / "mode.field"
        gaussian_export(path)
        grid = load_field_grid(path)

        v_m = mode_volume(grid)
        print(f"mode volume {v_m:.4e} m^3 (analytic {np.pi**1.5 * SIGMA**3:.4e})")
        wavelength, n_index = 637e-9, 2.0
        v_m_rel = v_m / (wavelength / n_index) ** 3
        print(f"            {v_m_rel:.4f} (lambda/n)^3 at lambda = 637 nm, n = 2")

        # placement: the structure factor falls off the energy-density peak
        print("\nf(r) along x from the mode center:")
        for offset in (0.0, 0.5, 1.0, 1.5):
            geom = field_structure(grid, [offset * SIGMA, 0.0, 0.0], [1.0, 0.0, 0.0])
            print(
                f"  r = {offset:3.1f} sigma: f = {geom.f_r:.4f}, "
                f"effective V_m x {geom.v_m_eff / geom.v_m:6.2f}"
            )

        # the same mapping the sweep tools use
        em = EmitterParams(
            gamma=TWO_PI * 30e6, gamma_star=TWO_PI * 1e12, debye_waller=0.02,
            omega0=wavelength_to_angular(wavelength),
        )
        cav = CavityParams(v_m_rel=v_m_rel, q=457.0, omega_c=em.omega0, n=n_index)
        g = coupling_from_geometry(cav, em, radiative_rate=em.gamma)
        purcell = 4.0 * g**2 / (cav.kappa_c * em.gamma)
        print(f"\nat Q = 457: g = {g:.3e} rad/s, kappa_c = {cav.kappa_c:.3e} rad/s")
        print(f"Purcell factor 4g^2/(kappa_c gamma) = {purcell:.3e}")


if __name__ == "__main__":
    main()
