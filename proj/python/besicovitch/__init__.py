"""Certified cocycles over irrational rotations, nested Cantor sets and suspension flows."""

from ._besi import (
    BesiError,
    ContinuedFraction,
    Cocycle,
    DrivingFunction,
    OrbitTypeSet,
    approximation_gap,
    birkhoff,
    classify,
    direct_sum,
    distance_to_integers,
    divergence_certificate,
    eightpiece,
    exact_flow,
    fourier,
    integrate_s3,
    middle_third_lower_bound,
    orbit_type_set,
    phi,
    psi_from_phi,
    run_criterion,
    tent_custom,
    tent_holder,
    tent_linear,
    trapezoid,
)

__all__ = [name for name in dir() if not name.startswith("_")]
