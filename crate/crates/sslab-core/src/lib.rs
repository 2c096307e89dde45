//! Numerical laboratory for deterministic soliton gases of the focusing mKdV
//! equation q_t + 6q²q_x + q_xxx = 0.

pub mod dressing_solver;
pub mod ellipse_gas;
pub mod numerics;
pub mod quadrature_shielding;
pub mod special_functions;
pub mod spectral_model;
