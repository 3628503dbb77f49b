"""Two-peak construction and verification toolkit for the critical biharmonic
equation, backed by the C++ core."""

from ._core import (
    Bubble,
    Dimension,
    KProfile,
    QuadratureSpec,
    RunConfig,
    ScalingFit,
    StructureConstants,
    brouwer_degree,
    bubble_grad_center,
    bubble_grad_scale,
    bubble_residual,
    bubble_value,
    c_n_beta,
    closed_form_A,
    d_n_beta,
    fit_power_law,
    g_map,
    integrate_radial,
    jac_g,
    l_eps,
    run_pipeline,
    solve_reduced,
    sphere_moment,
    structure_constants,
    theta,
    verify_lemma_b1,
    verify_lemma_b2,
)

__all__ = [
    "Bubble",
    "Dimension",
    "KProfile",
    "QuadratureSpec",
    "RunConfig",
    "ScalingFit",
    "StructureConstants",
    "brouwer_degree",
    "bubble_grad_center",
    "bubble_grad_scale",
    "bubble_residual",
    "bubble_value",
    "c_n_beta",
    "closed_form_A",
    "d_n_beta",
    "fit_power_law",
    "g_map",
    "integrate_radial",
    "jac_g",
    "l_eps",
    "run_pipeline",
    "solve_reduced",
    "sphere_moment",
    "structure_constants",
    "theta",
    "verify_lemma_b1",
    "verify_lemma_b2",
]
