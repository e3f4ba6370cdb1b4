"""OU normal tempered stable processes: transition laws, exact simulation, pricing and calibration."""

from ._ounts import (
    ConfigError,
    DomainError,
    NtsParams,
    NumericalError,
    OuNtsParams,
    calibrate_synthetic,
    gauss_2f1,
    nts_cumulant,
    ou_cumulant,
    price_asian,
    price_call_strip,
    price_swing,
    run_command,
    simulate_ou,
    simulate_spot,
    transition_cgf,
    transition_lch,
    transition_lch_oracle,
)

__all__ = [
    "ConfigError",
    "DomainError",
    "NtsParams",
    "NumericalError",
    "OuNtsParams",
    "calibrate_synthetic",
    "gauss_2f1",
    "nts_cumulant",
    "ou_cumulant",
    "price_asian",
    "price_call_strip",
    "price_swing",
    "run_command",
    "simulate_ou",
    "simulate_spot",
    "transition_cgf",
    "transition_lch",
    "transition_lch_oracle",
]
