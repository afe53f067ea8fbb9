//! Fixtures shared by the benchmarks.

use deformq_core::MultivectorField;

/// The linear structure on so(3)*.
pub fn so3() -> MultivectorField {
    MultivectorField::parse(3, "x * d/dy ^ d/dz + y * d/dz ^ d/dx + z * d/dx ^ d/dy").expect("valid structure")
}

/// x ∂x ∧ ∂y on the plane.
pub fn plane() -> MultivectorField {
    MultivectorField::parse(2, "x * d/dx ^ d/dy").expect("valid structure")
}
