use std::fmt;

use crate::error::{Error, Result};

/// Space dimension `n` of the ambient `R^n`; always at least 3.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Dim(usize);

impl Dim {
    pub fn new(n: usize) -> Result<Self> {
        if n < 3 {
            return Err(Error::Dimension(n));
        }
        Ok(Dim(n))
    }

    #[inline]
    pub fn get(self) -> usize {
        self.0
    }

    #[inline]
    pub fn as_f64(self) -> f64 {
        self.0 as f64
    }

    /// HLS exponent `2n/(n+2)`.
    pub fn hls_exponent(self) -> f64 {
        let n = self.as_f64();
        2.0 * n / (n + 2.0)
    }

    /// Critical Sobolev exponent `2n/(n-2)`.
    pub fn sobolev_exponent(self) -> f64 {
        let n = self.as_f64();
        2.0 * n / (n - 2.0)
    }
}

impl fmt::Display for Dim {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl TryFrom<usize> for Dim {
    type Error = Error;

    fn try_from(n: usize) -> Result<Self> {
        Dim::new(n)
    }
}
