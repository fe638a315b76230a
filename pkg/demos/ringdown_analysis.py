#
# Recover cavity resonances from a noisy ringdown record by harmonic
# inversion, round-tripping through the on-disk signal format.
#
import tempfile
from pathlib import Path

import numpy as np

from nvcavity.photonics import (
    Resonance,
    harmonic_inversion,
    load_ringdown,
    synthesize_ringdown,
)

TRUE_MODES = [
    Resonance(frequency=471.0e12, q=320.0, amplitude=1.0),
    Resonance(frequency=452.0e12, q=180.0, amplitude=0.35 * np.exp(0.8j)),
    Resonance(frequency=488.5e12, q=900.0, amplitude=0.12),
]
DT = 1e-15
N_SAMPLES = 4096
NOISE = 1e-4


def main():
    rng = np.random.default_rng(2026)
    signal = synthesize_ringdown(TRUE_MODES, N_SAMPLES, DT)
    signal = signal + NOISE * (
        rng.normal(size=N_SAMPLES) + 1j * rng.normal(size=N_SAMPLES)
    )

    with tempfile.TemporaryDirectory() as tmp:
        path = Path(tmp) / "ringdown.csv"
        t = np.arange(N_SAMPLES) * DT
        with open(path, "w") as fh:
            fh.write("# time_s, Re, Im\n")
            for ti, s in zip(t, signal):
                fh.write(f"{ti:.9e},{s.real:.9e},{s.imag:.9e}\n")
        loaded, dt = load_ringdown(path)

    modes = harmonic_inversion(loaded, dt, max_modes=6, noise_floor=1e-3)
    print(f"{len(modes)} modes above the noise floor "
          f"(signal-to-noise {1.0 / NOISE:.0e})\n")
    print(f"{'f [THz]':>10} {'Q':>8} {'|A|':>8}   nearest truth")
    for m in modes:
        truth = min(TRUE_MODES, key=lambda s: abs(s.frequency - m.frequency))
        print(
            f"{m.frequency / 1e12:10.3f} {m.q:8.1f} {abs(m.amplitude):8.4f}"
            f"   f err {abs(m.frequency - truth.frequency) / truth.frequency:.1e},"
            f" Q err {abs(m.q - truth.q) / truth.q:.1e}"
        )


if __name__ == "__main__":
    main()
