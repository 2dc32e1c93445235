//! Scalar special functions and one-dimensional solvers used by the
//! entropy estimators and the optimizer.

mod beta;
mod binomial;
mod erf;
mod minimize;
mod roots;

pub use beta::inv_beta_approx;
pub use binomial::binom_tail_deficit;
pub use erf::erf_inv;
pub use minimize::{minimize_scalar, Minimum};
pub use roots::{find_root, find_root_within};

use crate::error::{QkdError, Result};

/// A search interval with `lo < hi`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bracket {
    pub lo: f64,
    pub hi: f64,
}

impl Bracket {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if lo < hi {
            Ok(Bracket { lo, hi })
        } else {
            Err(QkdError::domain("Bracket::new", lo, "lo < hi"))
        }
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lo <= x && x <= self.hi
    }
}
