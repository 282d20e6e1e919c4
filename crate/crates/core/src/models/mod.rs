//! Concrete wave systems and kernels.

mod binary;
mod circle;
mod four_point;
mod graphs;
mod periodic;
mod perturbation;
mod symmetric;

pub use binary::binary_cycling_system;
pub use circle::{
    circle_kernel, circle_perturbation, circle_shift, circle_system, lazy_circle_kernel, lazy_circle_perturbation,
    lazy_circle_system, symmetric_circle_walk, tilde_pi_closed_form_shift_minus1,
};
pub use four_point::four_point_example;
pub use graphs::random_regular_graph_walk;
pub use periodic::periodic_class_example;
pub use perturbation::{single_point_perturbation, PerturbationSpec};
pub use symmetric::{
    cyclic_to_random_system, deck_reversal_system, group_walk, sticky_permutation_system, GroupWalkSpec,
    StickyPermutation, SymmetricGroup, MAX_GROUP_ORDER,
};
