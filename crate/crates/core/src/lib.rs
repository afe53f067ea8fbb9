//! Kontsevich star products for polynomial Poisson structures on ℝᵈ.
//!
//! The crate is organised bottom-up:
//!
//! * [`poly`] exact multivariate polynomials, [`series`] truncated ħ-series;
//! * [`multivector`] multivector fields, the Schouten–Nijenhuis bracket and
//!   Poisson / formal-Poisson checks;
//! * [`operator`] and [`hochschild`] multidifferential operators, the
//!   Gerstenhaber bracket, the Hochschild differential, the HKR map and
//!   gauge transformations of star products;
//! * [`graphs`] admissible graphs, [`weights`] their weights (Monte-Carlo,
//!   closed-form wedge integral, exact MZV-basis values);
//! * [`star`] the graph formula itself, Moyal products and verification.

pub mod error;
pub mod graphs;
pub mod hochschild;
pub mod linalg;
pub mod multivector;
pub mod operator;
pub mod poly;
pub mod series;
pub mod star;
pub mod text;
pub mod weights;

pub use error::{Error, Result};
pub use hochschild::{FormalBidiffSeries, GaugeSeries};
pub use multivector::{FormalMultivector, MultivectorField};
pub use operator::MultidiffOperator;
pub use poly::{MultiIndex, Polynomial, Rational};
pub use series::FormalSeries;
pub use star::StarProduct;
pub use weights::WeightValue;
pub use graphs::AdmissibleGraph;
