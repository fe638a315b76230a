#
# Map the total indistinguishability over the (V_m, Q) design plane of the
# thermally dephased emitter and locate the optimum cavity.
#
from pathlib import Path

import numpy as np

from nvcavity.cli import sweep_rows
from nvcavity.config import load_config

CONFIG = Path(__file__).resolve().parents[1] / "configs" / "fig2a.toml"
I_TOTAL = 7  # column index in sweep_rows output

SHADES = " .:-=+*#%@"


def main():
    cfg = load_config(CONFIG)
    print(f"config {CONFIG.name}  hash {cfg.config_hash[:12]}")
    print(f"sweeping {cfg.v_m_axis.size} mode volumes x {cfg.q_axis.size} quality factors")

    rows = sweep_rows(cfg)
    i_total = np.array([r[I_TOTAL] for r in rows]).reshape(
        cfg.v_m_axis.size, cfg.q_axis.size
    )

    # coarse text contour, one row per mode volume, columns follow Q
    top = i_total.max()
    print(f"\nI (total) landscape, '@' = {top:.3f}")
    print(f"{'V_m [(lambda/n)^3]':>20}  Q {cfg.q_axis[0]:.0f} .. {cfg.q_axis[-1]:.0f}")
    for i, v in enumerate(cfg.v_m_axis):
        line = "".join(
            SHADES[min(int(x / top * (len(SHADES) - 1)), len(SHADES) - 1)]
            for x in i_total[i]
        )
        print(f"{v:20.4g}  {line}")

    iv, iq = np.unravel_index(np.argmax(i_total), i_total.shape)
    print(
        f"\noptimum I = {top:.4f} at V_m = {cfg.v_m_axis[iv]:.4g} (lambda/n)^3, "
        f"Q = {cfg.q_axis[iq]:.0f}"
    )
    # dephasing caps the purity well below 1 even at the best cavity
    print(f"best beta*I on the grid: {max(r[9] for r in rows):.4f}")


if __name__ == "__main__":
    main()
