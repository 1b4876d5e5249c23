//! Range-efficient counting of `|{0 <= i <= r : (a(x+i) + b) mod m ∈ [c, d]}|`.
//!
//! The count is a difference of two floor sums
//! `F(β) = Σ_{i<N} ⌊(a i + β) / m⌋`, since `[y mod m >= T] =
//! ⌊(y + m - T)/m⌋ - ⌊y/m⌋`. Each floor sum runs the Euclid-like descent,
//! taking `O(log min(a, r))` iterations.

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RangeQuery {
    pub a: u64,
    pub b: u64,
    pub c: u64,
    pub d: u64,
    pub x: u64,
    pub r: u64,
    pub m: u64,
}

impl RangeQuery {
    pub fn validate(&self) -> Result<()> {
        let ok = self.m > 0
            && self.m < 1 << 63
            && self.a < self.m
            && self.b < self.m
            && self.c <= self.d
            && self.d < self.m
            && self.r < u32::MAX as u64;
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidParameter(format!("malformed range query {self:?}")))
        }
    }
}

macro_rules! floor_sum {
    ($name:ident, $t:ty) => {
        /// `Σ_{i=0}^{n-1} ⌊(a i + b) / m⌋`, counting loop iterations into `steps`.
        fn $name(mut n: $t, mut m: $t, mut a: $t, mut b: $t, steps: &mut u32) -> $t {
            let mut ans = 0;
            loop {
                *steps += 1;
                if a >= m {
                    ans += n * (n - 1) / 2 * (a / m);
                    a %= m;
                }
                if b >= m {
                    ans += n * (b / m);
                    b %= m;
                }
                let y_max = a * n + b;
                if y_max < m {
                    return ans;
                }
                n = y_max / m;
                b = y_max % m;
                std::mem::swap(&mut m, &mut a);
            }
        }
    };
}

floor_sum!(floor_sum_wide, u128);
floor_sum!(floor_sum_narrow, u64);

/// Exact hit count together with the number of descent iterations.
pub fn count_hits_counted(q: &RangeQuery) -> (u64, u32) {
    debug_assert!(q.validate().is_ok(), "{q:?}");
    let m = q.m as u128;
    let n = q.r as u128 + 1;
    let start = (q.a as u128 * (q.x as u128 % m) + q.b as u128) % m;
    let mut steps = 0;
    if q.a == 0 {
        steps += 1;
        let hit = (q.c as u128..=q.d as u128).contains(&start);
        return (if hit { n as u64 } else { 0 }, steps);
    }
    let (hi_b, lo_b) = (start + m - q.c as u128, start + m - q.d as u128 - 1);
    // With m < 2^31 and n <= 2^32 every intermediate stays below 2^64.
    let count = if q.m < 1 << 31 {
        let (n, m, a) = (n as u64, q.m, q.a);
        floor_sum_narrow(n, m, a, hi_b as u64, &mut steps)
            - floor_sum_narrow(n, m, a, lo_b as u64, &mut steps)
    } else {
        let a = q.a as u128;
        (floor_sum_wide(n, m, a, hi_b, &mut steps) - floor_sum_wide(n, m, a, lo_b, &mut steps)) as u64
    };
    (count, steps)
}

pub fn count_hits(q: &RangeQuery) -> u64 {
    count_hits_counted(q).0
}
