"""Figures of merit for cavity-enhanced single-photon emission under thermal dephasing.

The package is organised as a pipeline:

* :mod:`nvcavity.dynamics`: Lindblad evolution and two-time correlators.
* :mod:`nvcavity.models`: emitter-cavity model builders and the sideband model.
* :mod:`nvcavity.merit`: emission spectra and figures of merit.
* :mod:`nvcavity.photonics`: mode volume, coupling rates, harmonic inversion.
* :mod:`nvcavity.config` / :mod:`nvcavity.cli`: TOML-driven command line.

The most common entry points are re-exported here.
"""

from .config import ConfigError, RunConfig, load_config
from .dynamics import NumericsError
from .merit import (
    FigureOfMerit,
    FilterSpec,
    TwoColourSpectrum,
    apply_external_filter,
    evaluate_point,
    exact_emission_metrics,
    sideband_power,
    total_indistinguishability,
    two_colour_spectrum,
    zpl_indistinguishability,
    zpl_power,
)
from .models import (
    EmitterCavityModel,
    EmitterParams,
    SidebandFileError,
    SidebandModel,
    ThreeLevelParams,
    bare_indistinguishability,
    build_bare_emitter_model,
    build_three_level_model,
    build_two_level_model,
    load_sideband_model,
    sideband_spectrum,
    with_output_filter,
)
from .photonics import (
    CavityParams,
    CouplingGeometry,
    FieldFileError,
    FieldGrid,
    PurcellSpectrum,
    Resonance,
    ResonanceSet,
    coupling_from_geometry,
    field_structure,
    harmonic_inversion,
    load_field_grid,
    load_purcell_spectrum,
    load_ringdown,
    mode_volume,
    purcell_enhancement,
    save_field_grid,
    synthesize_ringdown,
)

__version__ = "0.1.0"

__all__ = [
    "__version__",
    "ConfigError",
    "RunConfig",
    "load_config",
    "NumericsError",
    "FigureOfMerit",
    "FilterSpec",
    "TwoColourSpectrum",
    "apply_external_filter",
    "evaluate_point",
    "exact_emission_metrics",
    "sideband_power",
    "total_indistinguishability",
    "two_colour_spectrum",
    "zpl_indistinguishability",
    "zpl_power",
    "EmitterCavityModel",
    "EmitterParams",
    "SidebandFileError",
    "SidebandModel",
    "ThreeLevelParams",
    "bare_indistinguishability",
    "build_bare_emitter_model",
    "build_three_level_model",
    "build_two_level_model",
    "load_sideband_model",
    "sideband_spectrum",
    "with_output_filter",
    "CavityParams",
    "CouplingGeometry",
    "FieldFileError",
    "FieldGrid",
    "PurcellSpectrum",
    "Resonance",
    "ResonanceSet",
    "coupling_from_geometry",
    "field_structure",
    "harmonic_inversion",
    "load_field_grid",
    "load_purcell_spectrum",
    "load_ringdown",
    "mode_volume",
    "purcell_enhancement",
    "save_field_grid",
    "synthesize_ringdown",
]
