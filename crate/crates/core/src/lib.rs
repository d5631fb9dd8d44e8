//! Exact Kubert V-function arithmetic, the V-test for finite monodromy of
//! hypergeometric sheaves in characteristic 2, spectra of m2sp torus
//! elements, and a small classification driver.

pub mod catalog;
pub mod charset;
pub mod digits;
pub mod error;
pub mod qz;
pub mod scalar;
pub mod spec_json;
pub mod spectra;
pub mod vtest;

use num_bigint::BigUint;

pub use charset::{CharSetOf, DownstairsShape, HypSpecOf, ProductProfile, Upstairs};
pub use error::{Error, Result};
pub use qz::{v_eval, QzOf, VValue};
pub use scalar::Scalar;

/// Exact rationals for V-test quantities.
pub type Rational = num_rational::BigRational;

/// Arbitrary-precision class in `Q/Z`.
pub type Qz = QzOf<BigUint>;
/// Word-sized class in `Q/Z`, for sweeps with bounded denominators.
pub type Qz64 = QzOf<u64>;

pub type CharSet = CharSetOf<u64>;
pub type HypSpec = HypSpecOf<u64>;
pub type BigCharSet = CharSetOf<BigUint>;
pub type BigHypSpec = HypSpecOf<BigUint>;
