"""Stress objects, body forces and the operators relating them."""
from .values import (
    BodyForce,
    HyperTraction,
    NonHolStress,
    TractionStress,
    VariationalStress,
    component_keys,
    flat_size,
)
from .fields import Field, field_from_json, field_to_json, zero_field
from .operators import (
    DivergenceSlotError,
    cauchy_pullback,
    contraction_weights,
    divergence,
    exterior_jet,
    form_on_frame,
    holonomic_kernel_element,
    hyper_traction,
    induced_nhs,
    nh_pair,
    p_tau,
    reduced_exterior_jet,
    restrict_to_holonomic,
    restriction_matrix,
    symmetric_gauge_k2,
    traction_action,
    var_pair,
    var_stress_from_force_system,
)
from .constitutive import constitutive_nhs, constitutive_var

__all__ = [
    "BodyForce",
    "HyperTraction",
    "NonHolStress",
    "TractionStress",
    "VariationalStress",
    "component_keys",
    "flat_size",
    "Field",
    "field_from_json",
    "field_to_json",
    "zero_field",
    "DivergenceSlotError",
    "cauchy_pullback",
    "contraction_weights",
    "divergence",
    "exterior_jet",
    "form_on_frame",
    "holonomic_kernel_element",
    "hyper_traction",
    "induced_nhs",
    "nh_pair",
    "p_tau",
    "reduced_exterior_jet",
    "restrict_to_holonomic",
    "restriction_matrix",
    "symmetric_gauge_k2",
    "traction_action",
    "var_pair",
    "var_stress_from_force_system",
    "constitutive_nhs",
    "constitutive_var",
]
