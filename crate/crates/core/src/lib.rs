//! Exact chart-level homological algebra for sheaf stacks: a Gröbner-based
//! kernel, finitely presented modules and Koszul homology, a chart calculus
//! with descent, K-theoretic Gysin maps, Kuranishi models and virtual
//! structure sheaf classes.

pub mod apot;
pub mod chart;
pub mod complex;
pub mod error;
pub mod groebner;
pub mod hilbert;
pub mod ktheory;
pub mod kuranishi;
pub mod matrix;
pub mod modgb;
pub mod module;
pub mod order;
pub mod poly;
pub mod ring;
pub mod space;

pub use complex::{koszul_complex, total_space_ring, ChainComplex, ComplexMap, HomologyData};
pub use error::{Error, Result};
pub use hilbert::{default_degree_bound, hilbert_series, length};
pub use matrix::PolyMatrix;
pub use module::{
    base_change, base_change_map, tensor, tensor_map_left, FpModule, Grading, ModuleMap,
};
pub use order::{Monomial, MonomialOrder, OrderKind};
pub use poly::{coef_int, coef_ratio, Coef, Polynomial};
pub use ring::{Ideal, Ring, RingMap, RingPresentation};
