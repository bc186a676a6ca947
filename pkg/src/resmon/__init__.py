"""resmon: projective robustness and related resource monotones.

The main entry points are :func:`proj_robustness` (and its state, channel,
measurement and incompatibility variants), the free-set constructors in
:mod:`resmon.freesets`, and the seeded property suites behind ``resmon verify``.
"""
from .errors import (
    ConfigurationError,
    DomainError,
    IllPosedError,
    NumericalFailure,
    ResmonError,
    SizeError,
)
from .freesets import (
    ConeSpec,
    cone_from_registry,
    custom_state_cone,
    embedded_jm_channel_cone,
    incoherent_state_cone,
    jointly_measurable_cone,
    replacement_channel_cone,
    trivial_povm_cone,
)
from .monotones import (
    bounds_report,
    gen_robustness,
    proj_robustness,
    proj_robustness_channel,
    proj_robustness_incompatibility,
    proj_robustness_measurement,
    proj_robustness_state,
    weight,
)
from .objects import Channel, Ensemble, PovmSet

__version__ = "0.1.0"

__all__ = [
    "Channel",
    "ConeSpec",
    "ConfigurationError",
    "DomainError",
    "Ensemble",
    "IllPosedError",
    "NumericalFailure",
    "PovmSet",
    "ResmonError",
    "SizeError",
    "bounds_report",
    "cone_from_registry",
    "custom_state_cone",
    "embedded_jm_channel_cone",
    "gen_robustness",
    "incoherent_state_cone",
    "jointly_measurable_cone",
    "proj_robustness",
    "proj_robustness_channel",
    "proj_robustness_incompatibility",
    "proj_robustness_measurement",
    "proj_robustness_state",
    "replacement_channel_cone",
    "trivial_povm_cone",
    "weight",
]
