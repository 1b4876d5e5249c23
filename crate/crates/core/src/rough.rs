//! Constant-factor L1 estimate from a Cauchy median sketch.
//!
//! Row `w` accumulates `Σ_i f_i C(w, i)` with `C(w, i)` standard Cauchy, so
//! each row is distributed as `||f||_1` times a standard Cauchy and the
//! median of the absolute row values concentrates at `||f||_1`. Variates are
//! recomputed from a keyed mixer on demand and quantized to fixed point, and
//! the accumulators are exact integers: combining sketches is exactly linear.

use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::seed::{stream, MasterSeed};

pub const ROWS: usize = 600;

/// Fractional bits of the fixed-point variates.
pub const FRAC_BITS: u32 = 16;

const MAX_VARIATE: f64 = (1u64 << 46) as f64;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RoughSketch {
    key: [u64; 2],
    n: u64,
    acc: Vec<i128>,
}

#[inline]
fn mix(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

impl RoughSketch {
    pub fn new(n: u64, seed: &MasterSeed) -> Self {
        let mut s = seed.stream(stream::ROUGH);
        RoughSketch {
            key: [s.next_u64(), s.next_u64()],
            n,
            acc: vec![0; ROWS],
        }
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    pub fn accumulators(&self) -> &[i128] {
        &self.acc
    }

    pub fn load_accumulators(&mut self, acc: Vec<i128>) -> Result<()> {
        if acc.len() != ROWS {
            return Err(Error::CorruptParams(format!("expected {ROWS} rough rows")));
        }
        self.acc = acc;
        Ok(())
    }

    /// Fixed-point Cauchy variate for `(row, i)`.
    #[inline]
    pub fn variate(&self, row: usize, i: u64) -> i64 {
        let word = mix(mix(self.key[0] ^ i) ^ self.key[1].wrapping_add((row as u64).wrapping_mul(0x9e37_79b9_7f4a_7c15)));
        let u = ((word >> 11) as f64 + 0.5) / (1u64 << 53) as f64;
        let c = (std::f64::consts::PI * (u - 0.5)).tan().clamp(-MAX_VARIATE, MAX_VARIATE);
        (c * (1u64 << FRAC_BITS) as f64).round() as i64
    }

    pub fn update(&mut self, i: u64, v: i64) -> Result<()> {
        if i == 0 || i > self.n {
            return Err(Error::IndexOutOfRange { index: i, n: self.n });
        }
        if v == 0 {
            return Ok(());
        }
        for w in 0..ROWS {
            let c = self.variate(w, i);
            self.acc[w] += v as i128 * c as i128;
        }
        Ok(())
    }

    /// Applies many updates; rows are independent and may run in parallel.
    /// Indices must already be validated.
    pub fn apply_batch(&mut self, updates: &[(u64, i64)], exec: Execution) {
        let this = &*self;
        let sums = exec.map_range(ROWS, |w| {
            updates
                .iter()
                .map(|&(i, v)| v as i128 * this.variate(w, i) as i128)
                .sum::<i128>()
        });
        for (a, s) in self.acc.iter_mut().zip(sums) {
            *a += s;
        }
    }

    /// Median of the absolute rows, an estimate of `||f||_1` within a
    /// `(1 ± 1/3)` factor with high probability.
    pub fn raw_estimate(&self) -> f64 {
        let mut mags: Vec<u128> = self.acc.iter().map(|a| a.unsigned_abs()).collect();
        mags.sort_unstable();
        let mid = (mags[ROWS / 2 - 1] as f64 + mags[ROWS / 2] as f64) / 2.0;
        mid / (1u64 << FRAC_BITS) as f64
    }

    /// `R' = Ê / (4/3)`, which lies in `[L1/2, L1]` whenever `Ê` is within
    /// `[2/3, 4/3]·L1`.
    pub fn estimate(&self) -> f64 {
        self.raw_estimate() * 0.75
    }

    pub fn check_compatible(&self, other: &RoughSketch) -> Result<()> {
        if self.key != other.key || self.n != other.n {
            return Err(Error::Incompatible("rough sketches use different seeds".into()));
        }
        Ok(())
    }

    pub fn subtract(&mut self, other: &RoughSketch) -> Result<()> {
        self.check_compatible(other)?;
        for (a, &b) in self.acc.iter_mut().zip(&other.acc) {
            *a -= b;
        }
        Ok(())
    }

    pub fn combine(a: &RoughSketch, b: &RoughSketch) -> Result<RoughSketch> {
        let mut out = a.clone();
        out.subtract(b)?;
        Ok(out)
    }
}
