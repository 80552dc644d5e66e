//! Pointwise exterior and complex calculus on `ℝ^{2n} ≅ ℂⁿ` with exact derivatives.
//!
//! Coordinates are ordered `(x₁, y₁, …, xₙ, yₙ)` with `z_j = x_j + i y_j`, and the
//! complex structure is the constant `J∂x_j = ∂y_j`, `J∂y_j = −∂x_j`.

pub mod complex;
pub mod field;
pub mod form;
pub mod jet;
pub mod linalg;
pub mod quadrature;

pub use complex::{CJet, C64};
pub use field::{j_vector, Point, ScalarField, SmoothMap, VectorField};
pub use form::{
    apply_j, apply_j_mult, basis, dc, difference_norm, exterior_d, interior_product, j_d_commutator,
    lie_derivative, pullback, twisted_d, twisted_d_checked, type_11_residual, wedge, ClosednessWarning,
    DifferentialForm, Twist,
};
pub use jet::Jet;
