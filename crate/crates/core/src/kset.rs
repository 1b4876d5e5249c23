//! Exact L1 for small-support turnstile vectors.
//!
//! Coordinates are spread over `B = ⌈k / ⌈log k⌉⌉` buckets by a `t`-wise
//! independent `h1`, and each bucket keeps the first `2s` power sums of its
//! coordinates placed at the field points `h2(i) ∈ F_p^*`. When
//! `||f||_1 <= k`, with probability at least 3/4 every bucket is `s`-sparse
//! and collision-free, so syndrome decoding recovers each frequency and the
//! estimate equals `||f||_1` exactly.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::gf::{find_prime, FieldCtx, MAX_MODULUS};
use crate::hashfam::PolyHash;
use crate::seed::{stream, MasterSeed};
use crate::syndrome::{decode, PowerSums, SparseVector};

/// Layout derived from the sparsity budget `k`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct KSetParams {
    pub k: u64,
    /// `⌈log2 k⌉`
    pub log_k: u64,
    /// Independence of `h1`: `2⌈log k⌉ + 12`.
    pub t: u64,
    /// Per-bucket sparsity: `2t + ⌈log k⌉`.
    pub s: u64,
    /// `⌈k / ⌈log k⌉⌉`
    pub buckets: u64,
    /// `4 s^2 B + 1`; the modulus must be at least this.
    pub c_bound: u64,
    pub p: u64,
}

pub fn ceil_log2(k: u64) -> u64 {
    (64 - (k - 1).leading_zeros()) as u64
}

impl KSetParams {
    /// Parameters with `p` the least prime at or above the bound `C`.
    pub fn new(k: u64) -> Result<Self> {
        let mut params = Self::layout(k)?;
        params.p = find_prime(params.c_bound);
        if params.p > MAX_MODULUS {
            return Err(Error::InvalidParameter(format!("k = {k} needs a modulus above 2^32")));
        }
        Ok(params)
    }

    /// Parameters for `k` over a caller-supplied prime, which must be at
    /// least this `k`'s bound `C` (a larger shared field is fine).
    pub fn with_modulus(k: u64, p: u64) -> Result<Self> {
        let mut params = Self::layout(k)?;
        if p < params.c_bound || p > MAX_MODULUS || !crate::gf::is_prime(p) {
            return Err(Error::InvalidParameter(format!(
                "modulus {p} is not a prime in [{}, 2^32)",
                params.c_bound
            )));
        }
        params.p = p;
        Ok(params)
    }

    /// Hand-chosen layout, bypassing the formulas. Used for toy fields.
    pub fn explicit(t: u64, s: u64, buckets: u64, p: u64) -> Result<Self> {
        if buckets == 0 || s == 0 || 2 * s + 1 >= p || !crate::gf::is_prime(p) {
            return Err(Error::InvalidParameter("inconsistent explicit layout".into()));
        }
        Ok(KSetParams {
            k: s * buckets,
            log_k: 0,
            t,
            s,
            buckets,
            c_bound: 0,
            p,
        })
    }

    fn layout(k: u64) -> Result<Self> {
        if k < 4 {
            return Err(Error::InvalidParameter(format!("k = {k} must be at least 4")));
        }
        let log_k = ceil_log2(k);
        let t = 2 * log_k + 12;
        let s = 2 * t + log_k;
        let buckets = k.div_ceil(log_k);
        let c_bound = 4 * s * s * buckets + 1;
        Ok(KSetParams {
            k,
            log_k,
            t,
            s,
            buckets,
            c_bound,
            p: 0,
        })
    }

    pub fn counters_per_bucket(&self) -> usize {
        2 * self.s as usize
    }

    pub fn counter_count(&self) -> usize {
        self.buckets as usize * self.counters_per_bucket()
    }

    /// Counter storage in bits at `⌈log2 p⌉` bits per counter.
    pub fn space_bits(&self) -> u64 {
        self.counter_count() as u64 * ceil_log2(self.p)
    }
}

/// Where a coordinate lands: its bucket and its field point `h2(i)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Slot {
    pub bucket: usize,
    pub point: u64,
}

#[derive(Clone, Debug)]
pub struct KSetSketch {
    params: KSetParams,
    ctx: Arc<FieldCtx>,
    h1: Arc<PolyHash>,
    h2: Arc<PolyHash>,
    counters: Vec<u32>,
    ops: u64,
}

impl KSetSketch {
    /// Standalone sketch over `[n]` with hashes drawn from `seed`.
    pub fn new(k: u64, n: u64, seed: &MasterSeed) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidParameter("n must be positive".into()));
        }
        let params = KSetParams::new(k)?;
        let ctx = FieldCtx::shared(params.p)?;
        let h1 = PolyHash::sample(params.t as usize, n, params.buckets, &mut seed.stream(stream::KSET_H1));
        let h2 = PolyHash::sample(2, n, params.p - 1, &mut seed.stream(stream::H2));
        Self::from_parts(params, ctx, Arc::new(h1), Arc::new(h2))
    }

    pub fn from_parts(
        params: KSetParams,
        ctx: Arc<FieldCtx>,
        h1: Arc<PolyHash>,
        h2: Arc<PolyHash>,
    ) -> Result<Self> {
        let mismatch = |what: &str| Err(Error::InvalidParameter(format!("{what} does not match the layout")));
        if ctx.p() != params.p {
            return mismatch("field");
        }
        if h1.range() != params.buckets {
            return mismatch("h1");
        }
        if h2.range() != params.p - 1 || h2.independence() != 2 || h2.domain() != h1.domain() {
            return mismatch("h2");
        }
        Ok(KSetSketch {
            counters: vec![0; params.counter_count()],
            params,
            ctx,
            h1,
            h2,
            ops: 0,
        })
    }

    pub fn params(&self) -> &KSetParams {
        &self.params
    }

    pub fn ctx(&self) -> &Arc<FieldCtx> {
        &self.ctx
    }

    pub fn n(&self) -> u64 {
        self.h1.domain()
    }

    pub fn counters(&self) -> &[u32] {
        &self.counters
    }

    pub fn bucket(&self, j: usize) -> &[u32] {
        let w = self.params.counters_per_bucket();
        &self.counters[j * w..(j + 1) * w]
    }

    /// Counter additions performed so far.
    pub fn op_count(&self) -> u64 {
        self.ops
    }

    pub fn is_zero(&self) -> bool {
        self.counters.iter().all(|&c| c == 0)
    }

    /// Replaces the counter state, e.g. after deserialization.
    pub fn load_counters(&mut self, counters: Vec<u32>) -> Result<()> {
        if counters.len() != self.counters.len() || counters.iter().any(|&c| c as u64 >= self.params.p) {
            return Err(Error::CorruptParams("counter block does not fit the layout".into()));
        }
        self.counters = counters;
        Ok(())
    }

    /// Slot of coordinate `i`, assumed to lie in `1..=n`.
    #[inline]
    pub fn slot(&self, i: u64) -> Slot {
        Slot {
            bucket: self.h1.eval_unchecked(i) as usize - 1,
            point: self.h2.eval_unchecked(i),
        }
    }

    /// Slot with this sketch's bucket and another slot's field point, for
    /// sketches that share `h2` but not `h1`.
    #[inline]
    pub fn rebucket(&self, i: u64, point: u64) -> Slot {
        Slot {
            bucket: self.h1.eval_unchecked(i) as usize - 1,
            point,
        }
    }

    pub fn update(&mut self, i: u64, v: i64) -> Result<()> {
        if i == 0 || i > self.n() {
            return Err(Error::IndexOutOfRange { index: i, n: self.n() });
        }
        if v != 0 {
            let slot = self.slot(i);
            self.apply(slot, v);
        }
        Ok(())
    }

    /// `X[bucket][z] += v · point^z` for `z = 1..=2s`.
    #[inline]
    pub fn apply(&mut self, slot: Slot, v: i64) {
        if v == 0 {
            return;
        }
        let mut powers = vec![0u32; self.params.counters_per_bucket()];
        self.ctx.fill_powers(slot.point, &mut powers);
        self.apply_powers(slot.bucket, v, &powers);
    }

    /// Adds `v·x^k` to counter k of `bucket`, given `powers[k-1] = x^k`.
    /// `powers` may be longer than the bucket.
    pub fn apply_powers(&mut self, bucket: usize, v: i64, powers: &[u32]) {
        if v == 0 {
            return;
        }
        let p = self.ctx.p();
        let w = self.params.counters_per_bucket();
        let vm = self.ctx.reduce(v);
        let row = &mut self.counters[bucket * w..(bucket + 1) * w];
        for (c, &pw) in row.iter_mut().zip(&powers[..w]) {
            // c < 2^32 and vm * pw < (2^32 - 1)^2, so the sum fits in u64
            *c = ((*c as u64 + vm * pw as u64) % p) as u32;
        }
        self.ops += w as u64;
    }

    pub fn decode_buckets(&self) -> Result<Vec<SparseVector>> {
        self.decode_buckets_with(Execution::default())
    }

    pub fn decode_buckets_with(&self, exec: Execution) -> Result<Vec<SparseVector>> {
        let decoded = exec.map_range(self.params.buckets as usize, |j| {
            let row = self.bucket(j);
            if row.iter().all(|&c| c == 0) {
                return Ok(SparseVector::default());
            }
            let sums = PowerSums {
                sums: row.iter().map(|&c| c as u64).collect(),
            };
            decode(&sums, &self.ctx)
        });
        decoded.into_iter().collect()
    }

    /// `Σ_j Σ_x |σ((f_j)_x)|` over the decoded buckets.
    pub fn estimate(&self) -> Result<u64> {
        self.estimate_with(Execution::default())
    }

    pub fn estimate_with(&self, exec: Execution) -> Result<u64> {
        self.estimate_mapped(exec, |ctx, alpha| ctx.sigma(alpha))
    }

    /// Like [`estimate_with`](Self::estimate_with) with a caller-supplied
    /// map from decoded residues to signed frequencies.
    pub fn estimate_mapped(&self, exec: Execution, map: impl Fn(&FieldCtx, u64) -> i64) -> Result<u64> {
        let buckets = self
            .decode_buckets_with(exec)
            .map_err(|_| Error::EstimateFailure("a bucket failed to decode".into()))?;
        Ok(buckets
            .iter()
            .flat_map(|b| b.entries.iter())
            .map(|&(_, alpha)| map(&self.ctx, alpha).unsigned_abs())
            .sum())
    }

    pub fn check_compatible(&self, other: &KSetSketch) -> Result<()> {
        if self.params != other.params || self.ctx.p() != other.ctx.p() {
            return Err(Error::Incompatible("k-set parameters differ".into()));
        }
        if *self.h1 != *other.h1 || *self.h2 != *other.h2 {
            return Err(Error::Incompatible("k-set hash functions differ".into()));
        }
        Ok(())
    }

    /// In place `self - other`, counter by counter.
    pub fn subtract(&mut self, other: &KSetSketch) -> Result<()> {
        self.check_compatible(other)?;
        let p = self.params.p;
        for (a, &b) in self.counters.iter_mut().zip(&other.counters) {
            *a = ((*a as u64 + p - b as u64) % p) as u32;
        }
        Ok(())
    }

    /// Sketch of `a`'s stream followed by `b`'s stream negated.
    pub fn combine(a: &KSetSketch, b: &KSetSketch) -> Result<KSetSketch> {
        let mut out = a.clone();
        out.subtract(b)?;
        Ok(out)
    }
}

impl PartialEq for KSetSketch {
    fn eq(&self, other: &Self) -> bool {
        self.check_compatible(other).is_ok() && self.counters == other.counters
    }
}
