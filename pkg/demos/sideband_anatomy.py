#
# Anatomy of the phonon sideband: what the cavity transmits of it, what an
# external filter removes, and what that does to the photon statistics.
#
from pathlib import Path

import numpy as np

from nvcavity.config import load_config
from nvcavity.merit import filtered_sideband_power, sideband_power
from nvcavity.models import sideband_spectrum
from nvcavity.units import TWO_PI

CONFIG = Path(__file__).resolve().parents[1] / "configs" / "fig3b.toml"


def main():
    cfg = load_config(CONFIG)
    sb = cfg.sideband
    print(f"{len(sb.weights)} Lorentzian components, "
          f"total weight {np.sum(sb.weights):.3f} (1 - D_W)")
    print(f"{'center [THz]':>13} {'FWHM [THz]':>11} {'weight':>8}")
    for c, w, wt in zip(sb.centers, sb.fwhms, sb.weights):
        print(f"{c / TWO_PI / 1e12:13.2f} {w / TWO_PI / 1e12:11.2f} {wt:8.4f}")

    # spectral density at a few probe detunings
    probe = np.array([-15.7e12, -47.2e12, -94.3e12]) * TWO_PI
    values = sideband_spectrum(sb, probe)
    print("\nspectral density S(omega) at probe detunings:")
    for p, v in zip(probe, values):
        print(f"  {p / TWO_PI / 1e12:7.1f} THz: {v:.3e} per rad/s")

    # transmission through cavities of decreasing linewidth
    print(f"\n{'kappa_c [rad/s]':>16} {'F_SB':>9}")
    for kappa_c in (1e14, 1e13, 1e12):
        print(f"{kappa_c:16.1e} {sideband_power(sb, kappa_c):9.5f}")
    print("a narrower cavity already rejects most of the sideband")

    # an external filter takes out nearly all of the remainder
    kappa_c = 1e13
    plain = sideband_power(sb, kappa_c)
    for kappa_f in (TWO_PI * 1e12, TWO_PI * 0.1e12):
        kept = filtered_sideband_power(sb, kappa_c, kappa_f, 0.0)
        print(
            f"filter kappa_f = {kappa_f:.2e} rad/s keeps "
            f"{kept / plain:6.2%} of the transmitted sideband"
        )


if __name__ == "__main__":
    main()
