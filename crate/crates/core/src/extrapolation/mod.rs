//! Extrapolation toolkit: exact exponent calculus and the weight constructions
//! behind self-improvement.

pub mod calculus;
pub mod rdf;

pub use calculus::{
    beta_gamma, beta_gamma_identity, choose_rs_for_l2, largest_epsilon, limited_range_plan, lr_factorization, lr_rescale_t,
    lr_theta_p, rescale_recip, rescaled_exponents, self_improvement_r0, EpsilonSearch, ExtrapolationPlan, RsChoice,
};
pub use rdf::{
    buckley_bound, buckley_constant, check_rdf, default_rh_constant, rdf_weight, reverse_holder_check, rh_exponent,
    smallest_rh_constant, RdfCheck, RdfWeight, ReverseHolder, SmallestConstant,
};
