//! Hash families over prime fields.
//!
//! [`PolyHash`] is a uniformly random polynomial of degree `m - 1` over
//! `GF(ell)`, giving an `m`-wise independent map `[domain] -> [range]` after
//! the fold `h(x) = (h'(x) mod range) + 1`. With `ell >= 2 max(domain, range)`
//! no output value is more than twice as likely as any other.

use crate::error::{Error, Result};
use crate::gf::find_prime;
use crate::seed::SeedStream;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PolyHash {
    ell: u64,
    /// Highest-degree coefficient first.
    coeffs: Vec<u64>,
    domain: u64,
    range: u64,
}

impl PolyHash {
    pub fn sample(independence: usize, domain: u64, range: u64, stream: &mut SeedStream) -> Self {
        assert!(independence >= 1 && domain >= 1 && range >= 1);
        let ell = find_prime(2 * domain.max(range));
        let coeffs = (0..independence).map(|_| stream.below(ell)).collect();
        PolyHash {
            ell,
            coeffs,
            domain,
            range,
        }
    }

    /// Builds a hash from explicit coefficients (highest degree first).
    pub fn from_coeffs(coeffs: Vec<u64>, domain: u64, range: u64) -> Result<Self> {
        let ell = find_prime(2 * domain.max(range));
        if coeffs.is_empty() || coeffs.iter().any(|&c| c >= ell) {
            return Err(Error::InvalidParameter(format!(
                "coefficients must be nonempty and below {ell}"
            )));
        }
        Ok(PolyHash {
            ell,
            coeffs,
            domain,
            range,
        })
    }

    pub fn modulus(&self) -> u64 {
        self.ell
    }

    pub fn coeffs(&self) -> &[u64] {
        &self.coeffs
    }

    pub fn independence(&self) -> usize {
        self.coeffs.len()
    }

    pub fn domain(&self) -> u64 {
        self.domain
    }

    pub fn range(&self) -> u64 {
        self.range
    }

    /// Unfolded value `h'(x)` in `GF(ell)`.
    #[inline]
    pub fn eval_raw(&self, x: u64) -> u64 {
        let x = (x % self.ell) as u128;
        let ell = self.ell as u128;
        self.coeffs
            .iter()
            .fold(0u128, |acc, &c| (acc * x + c as u128) % ell) as u64
    }

    /// Value in `1..=range`. The caller guarantees `1 <= x <= domain`.
    #[inline]
    pub fn eval_unchecked(&self, x: u64) -> u64 {
        self.eval_raw(x) % self.range + 1
    }

    pub fn eval(&self, x: u64) -> Result<u64> {
        if x == 0 || x > self.domain {
            return Err(Error::IndexOutOfRange {
                index: x,
                n: self.domain,
            });
        }
        Ok(self.eval_unchecked(x))
    }
}

/// `h(x) = a x + b mod q`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct AffineHash {
    pub q: u64,
    pub a: u64,
    pub b: u64,
}

impl AffineHash {
    pub fn sample(q: u64, stream: &mut SeedStream) -> Self {
        let a = stream.below(q);
        let b = stream.below(q);
        AffineHash { q, a, b }
    }

    #[inline]
    pub fn eval(&self, x: u64) -> u64 {
        ((self.a as u128 * (x % self.q) as u128 + self.b as u128) % self.q as u128) as u64
    }
}
