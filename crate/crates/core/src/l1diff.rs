//! The full L1-difference sketch.
//!
//! Each update `(i, v)` stands for the `|v|` items `(i-1)M+1, …, (i-1)M+|v|`
//! of an implicit universe of size `nM`, so that `||f||_1` becomes the number
//! of items whose net count is nonzero. A pairwise hash `h(x) = ax + b mod q`
//! subsamples that universe: level `j` keeps the items hashing into
//! `[2^{⌊log q⌋-j}, 2^{⌊log q⌋-j+1})`, and the number of an update's items
//! landing there is counted in logarithmic time. Every level feeds a k-set
//! sketch; at query time a rough estimate picks the level expected to hold
//! `Θ(1/ε²)` items and its exact count is scaled back up. Small distances are
//! answered exactly by a separate k-set sketch that sees every update.

use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::gf::{find_prime, FieldCtx};
use crate::hashfam::{AffineHash, PolyHash};
use crate::kset::{KSetParams, KSetSketch, Slot};
use crate::rangecount::{count_hits_counted, RangeQuery};
use crate::rough::{RoughSketch, ROWS};
use crate::seed::{stream, MasterSeed};

const BATCH_CHUNK: usize = 1024;
const MAX_UNIVERSE: u64 = 1 << 60;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    Sketch,
    /// `ε < 1/√n`: the vector itself is smaller than a sketch would be.
    Exact,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct L1DiffParams {
    pub eps: f64,
    /// `ε / 8`
    pub eps_prime: f64,
    pub n: u64,
    /// Bound on input coordinates, `|x_i| <= max_raw`.
    pub max_raw: u64,
    /// Bound after the nonnegativity shift, `2 · max_raw`.
    pub max_mag: u64,
    pub mode: Mode,
    /// Least prime `>= 2 n max_mag`. Zero in exact mode.
    pub q: u64,
    pub levels: u32,
    pub k_level: u64,
    pub k_small: u64,
}

/// `⌈x⌉` for values meant to be integers up to rounding noise.
fn ceil_tol(x: f64) -> u64 {
    (x * (1.0 - 1e-12)).ceil() as u64
}

/// Smallest `l` with `2^l >= x`, for `x > 0`.
fn ceil_log2_f(x: f64) -> i64 {
    let x = x * (1.0 - 1e-12);
    let mut l = x.log2().ceil() as i64;
    while 2f64.powi(l as i32 - 1) >= x {
        l -= 1;
    }
    while 2f64.powi(l as i32) < x {
        l += 1;
    }
    l
}

impl L1DiffParams {
    pub fn new(eps: f64, n: u64, max_raw: u64) -> Result<Self> {
        if !(eps > 0.0 && eps <= 1.0) {
            return Err(Error::InvalidParameter(format!("eps = {eps} must lie in (0, 1]")));
        }
        if n == 0 || max_raw == 0 {
            return Err(Error::InvalidParameter("n and M must be positive".into()));
        }
        if max_raw > 1 << 31 {
            return Err(Error::InvalidParameter(format!("M = {max_raw} exceeds 2^31")));
        }
        let max_mag = 2 * max_raw;
        let universe = n
            .checked_mul(max_mag)
            .filter(|&u| u <= MAX_UNIVERSE)
            .ok_or_else(|| Error::InvalidParameter("n·M exceeds 2^59".into()))?;
        let eps_prime = eps / 8.0;
        let mut params = L1DiffParams {
            eps,
            eps_prime,
            n,
            max_raw,
            max_mag,
            mode: Mode::Exact,
            q: 0,
            levels: 0,
            k_level: 0,
            k_small: 0,
        };
        if eps < 1.0 / (n as f64).sqrt() {
            return Ok(params);
        }
        let ep2 = eps_prime * eps_prime;
        params.mode = Mode::Sketch;
        params.q = find_prime(2 * universe);
        params.levels = ceil_log2_f(ep2 * universe as f64).max(1) as u32;
        params.k_level = ceil_tol(4.0 / ep2);
        params.k_small = ceil_tol(1.0 / ep2);
        Ok(params)
    }

    /// `⌊log2 q⌋`
    pub fn q_log(&self) -> u32 {
        63 - self.q.leading_zeros()
    }

    /// Hash interval `[c_j, d_j]` of level `j` (1-based).
    pub fn level_interval(&self, j: u32) -> (u64, u64) {
        let lo = 1u64 << (self.q_log() - j);
        (lo, 2 * lo - 1)
    }

    /// `q · 2^{j - ⌊log q⌋}`, the inverse sampling rate of level `j`.
    pub fn level_scale(&self, j: u32) -> f64 {
        self.q as f64 * 2f64.powi(j as i32 - self.q_log() as i32)
    }

    /// Level chosen for a rough estimate `r`, clamped into `1..=levels`.
    pub fn level_for(&self, rough: f64) -> u32 {
        let j = ceil_log2_f(self.eps_prime * self.eps_prime * rough);
        j.clamp(1, self.levels as i64) as u32
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Branch {
    Exact,
    Small,
    Level(u32),
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub branch: Branch,
    /// `R'`, or `NaN` in exact mode.
    pub rough: f64,
}

#[derive(Clone, Debug)]
pub(crate) struct SketchState {
    pub(crate) hash: AffineHash,
    pub(crate) levels: Vec<KSetSketch>,
    pub(crate) small: KSetSketch,
    pub(crate) rough: RoughSketch,
    range_steps: u64,
    rough_ops: u64,
}

impl SketchState {
    /// Longest bucket among the levels and the small sketch.
    fn power_width(&self) -> usize {
        self.levels[0]
            .params()
            .counters_per_bucket()
            .max(self.small.params().counters_per_bucket())
    }
}

#[derive(Clone, Debug)]
pub(crate) enum State {
    Exact(Vec<i64>),
    Sketch(Box<SketchState>),
}

#[derive(Clone, Debug)]
pub struct L1DiffSketch {
    params: L1DiffParams,
    seed: MasterSeed,
    pub(crate) state: State,
}

impl L1DiffSketch {
    pub fn new(eps: f64, n: u64, max_raw: u64, seed: MasterSeed) -> Result<Self> {
        let params = L1DiffParams::new(eps, n, max_raw)?;
        Self::from_params(params, seed)
    }

    pub fn from_params(params: L1DiffParams, seed: MasterSeed) -> Result<Self> {
        let state = match params.mode {
            Mode::Exact => {
                let len = usize::try_from(params.n)
                    .map_err(|_| Error::InvalidParameter("n too large for exact mode".into()))?;
                State::Exact(vec![0; len])
            }
            Mode::Sketch => State::Sketch(Box::new(Self::build_state(&params, &seed)?)),
        };
        Ok(L1DiffSketch { params, seed, state })
    }

    fn build_state(params: &L1DiffParams, seed: &MasterSeed) -> Result<SketchState> {
        let n = params.n;
        let level_params = KSetParams::new(params.k_level)?;
        let ctx: Arc<FieldCtx> = FieldCtx::shared(level_params.p)?;
        let h1 = Arc::new(PolyHash::sample(
            level_params.t as usize,
            n,
            level_params.buckets,
            &mut seed.stream(stream::LEVEL_H1),
        ));
        let h2 = Arc::new(PolyHash::sample(2, n, level_params.p - 1, &mut seed.stream(stream::H2)));
        let template = KSetSketch::from_parts(level_params, ctx.clone(), h1, h2.clone())?;
        let levels = vec![template; params.levels as usize];

        let small_params = KSetParams::with_modulus(params.k_small, level_params.p)?;
        let small_h1 = Arc::new(PolyHash::sample(
            small_params.t as usize,
            n,
            small_params.buckets,
            &mut seed.stream(stream::SMALL_H1),
        ));
        let small = KSetSketch::from_parts(small_params, ctx, small_h1, h2)?;

        Ok(SketchState {
            hash: AffineHash::sample(params.q, &mut seed.stream(stream::AFFINE)),
            levels,
            small,
            rough: RoughSketch::new(n, seed),
            range_steps: 0,
            rough_ops: 0,
        })
    }

    pub fn params(&self) -> &L1DiffParams {
        &self.params
    }

    pub fn seed(&self) -> &MasterSeed {
        &self.seed
    }

    pub fn mode(&self) -> Mode {
        self.params.mode
    }

    pub fn levels(&self) -> &[KSetSketch] {
        match &self.state {
            State::Sketch(s) => &s.levels,
            State::Exact(_) => &[],
        }
    }

    pub fn small(&self) -> Option<&KSetSketch> {
        match &self.state {
            State::Sketch(s) => Some(&s.small),
            State::Exact(_) => None,
        }
    }

    pub fn rough(&self) -> Option<&RoughSketch> {
        match &self.state {
            State::Sketch(s) => Some(&s.rough),
            State::Exact(_) => None,
        }
    }

    pub fn affine_hash(&self) -> Option<AffineHash> {
        match &self.state {
            State::Sketch(s) => Some(s.hash),
            State::Exact(_) => None,
        }
    }

    pub fn exact_buffer(&self) -> Option<&[i64]> {
        match &self.state {
            State::Exact(b) => Some(b),
            State::Sketch(_) => None,
        }
    }

    /// Word operations spent on updates: counter additions, floor-sum
    /// iterations, and rough-row additions.
    pub fn op_count(&self) -> u64 {
        match &self.state {
            State::Exact(_) => 0,
            State::Sketch(s) => {
                s.levels.iter().map(KSetSketch::op_count).sum::<u64>()
                    + s.small.op_count()
                    + s.range_steps
                    + s.rough_ops
            }
        }
    }

    fn check_update(&self, i: u64, v: i64) -> Result<()> {
        if i == 0 || i > self.params.n {
            return Err(Error::IndexOutOfRange { index: i, n: self.params.n });
        }
        if v.unsigned_abs() > self.params.max_mag {
            return Err(Error::MagnitudeTooLarge { value: v, bound: self.params.max_mag });
        }
        Ok(())
    }

    /// Items of update `(i, |v|)` landing in each level, in level order.
    pub fn level_counts(&self, i: u64, v: i64) -> Vec<u64> {
        let Some(hash) = self.affine_hash() else { return Vec::new() };
        (1..=self.params.levels)
            .map(|j| count_hits_counted(&self.level_query(&hash, j, i, v)).0)
            .collect()
    }

    #[inline]
    fn level_query(&self, hash: &AffineHash, j: u32, i: u64, v: i64) -> RangeQuery {
        let (c, d) = self.params.level_interval(j);
        RangeQuery {
            a: hash.a,
            b: hash.b,
            c,
            d,
            x: (i - 1) * self.params.max_mag + 1,
            r: v.unsigned_abs() - 1,
            m: self.params.q,
        }
    }

    /// Turnstile update `f_i += v` on the shifted, nonnegative scale:
    /// `|v| <= 2M`.
    pub fn update(&mut self, i: u64, v: i64) -> Result<()> {
        self.check_update(i, v)?;
        if v == 0 {
            return Ok(());
        }
        let queries: Vec<RangeQuery> = match &self.state {
            State::Exact(_) => Vec::new(),
            State::Sketch(s) => {
                let hash = s.hash;
                (1..=self.params.levels).map(|j| self.level_query(&hash, j, i, v)).collect()
            }
        };
        match &mut self.state {
            State::Exact(buf) => buf[(i - 1) as usize] += v,
            State::Sketch(s) => {
                let slot = s.levels[0].slot(i);
                let mut powers = vec![0u32; s.power_width()];
                s.small.ctx().fill_powers(slot.point, &mut powers);
                let sign = v.signum();
                for (level, q) in s.levels.iter_mut().zip(&queries) {
                    let (hits, steps) = count_hits_counted(q);
                    s.range_steps += steps as u64;
                    level.apply_powers(slot.bucket, sign * hits as i64, &powers);
                }
                let small_bucket = s.small.rebucket(i, slot.point).bucket;
                s.small.apply_powers(small_bucket, v, &powers);
                s.rough.update(i, v)?;
                s.rough_ops += ROWS as u64;
            }
        }
        Ok(())
    }

    /// Adds one party's coordinate `x_i ∈ [-M, M]`, shifted by `M`.
    pub fn ingest(&mut self, i: u64, x: i64) -> Result<()> {
        self.update(i, self.shift(x)?)
    }

    fn shift(&self, x: i64) -> Result<i64> {
        if x.unsigned_abs() > self.params.max_raw {
            return Err(Error::MagnitudeTooLarge { value: x, bound: self.params.max_raw });
        }
        Ok(x + self.params.max_raw as i64)
    }

    /// Ingests a whole dense vector `x_1..x_n`.
    pub fn ingest_dense(&mut self, x: &[i64]) -> Result<()> {
        self.ingest_dense_with(x, Execution::default())
    }

    pub fn ingest_dense_with(&mut self, x: &[i64], exec: Execution) -> Result<()> {
        if x.len() as u64 != self.params.n {
            return Err(Error::InvalidParameter(format!(
                "vector has {} coordinates, expected {}",
                x.len(),
                self.params.n
            )));
        }
        let updates = x
            .iter()
            .enumerate()
            .map(|(i, &xi)| Ok((i as u64 + 1, self.shift(xi)?)))
            .collect::<Result<Vec<_>>>()?;
        self.update_batch_with(&updates, exec)
    }

    /// Applies a batch of turnstile updates. Levels, the small sketch and the
    /// rough rows are processed independently.
    pub fn update_batch_with(&mut self, updates: &[(u64, i64)], exec: Execution) -> Result<()> {
        for &(i, v) in updates {
            self.check_update(i, v)?;
        }
        let updates: Vec<(u64, i64)> = updates.iter().copied().filter(|&(_, v)| v != 0).collect();
        let params = self.params;
        match &mut self.state {
            State::Exact(buf) => {
                for &(i, v) in &updates {
                    buf[(i - 1) as usize] += v;
                }
            }
            State::Sketch(s) => {
                let hash = s.hash;
                let width = s.power_width();
                let steps = AtomicU64::new(0);
                let SketchState { levels, small, rough, .. } = &mut **s;
                let ctx = small.ctx().clone();
                for chunk in updates.chunks(BATCH_CHUNK) {
                    let head = &levels[0];
                    let prepared: Vec<(Slot, usize, Vec<u32>)> = exec.map_range(chunk.len(), |u| {
                        let i = chunk[u].0;
                        let slot = head.slot(i);
                        let mut powers = vec![0u32; width];
                        ctx.fill_powers(slot.point, &mut powers);
                        (slot, small.rebucket(i, slot.point).bucket, powers)
                    });
                    exec.join(
                        || {
                            exec.for_each_indexed_mut(levels, |idx, level| {
                                let j = idx as u32 + 1;
                                let (c, d) = params.level_interval(j);
                                let mut local = 0u64;
                                for (&(i, v), (slot, _, powers)) in chunk.iter().zip(&prepared) {
                                    let q = RangeQuery {
                                        a: hash.a,
                                        b: hash.b,
                                        c,
                                        d,
                                        x: (i - 1) * params.max_mag + 1,
                                        r: v.unsigned_abs() - 1,
                                        m: params.q,
                                    };
                                    let (hits, st) = count_hits_counted(&q);
                                    local += st as u64;
                                    level.apply_powers(slot.bucket, v.signum() * hits as i64, powers);
                                }
                                steps.fetch_add(local, Ordering::Relaxed);
                            })
                        },
                        || {
                            for (&(_, v), (_, bucket, powers)) in chunk.iter().zip(&prepared) {
                                small.apply_powers(*bucket, v, powers);
                            }
                        },
                    );
                }
                rough.apply_batch(&updates, exec);
                s.range_steps += steps.into_inner();
                s.rough_ops += (ROWS * updates.len()) as u64;
            }
        }
        Ok(())
    }

    pub fn check_compatible(&self, other: &L1DiffSketch) -> Result<()> {
        if self.params != other.params {
            return Err(Error::Incompatible("sketch parameters differ".into()));
        }
        if self.seed != other.seed {
            return Err(Error::Incompatible("sketches were built from different seeds".into()));
        }
        Ok(())
    }

    /// In place `self - other`.
    pub fn subtract(&mut self, other: &L1DiffSketch) -> Result<()> {
        self.check_compatible(other)?;
        match (&mut self.state, &other.state) {
            (State::Exact(a), State::Exact(b)) => {
                a.iter_mut().zip(b).for_each(|(x, y)| *x -= y);
            }
            (State::Sketch(a), State::Sketch(b)) => {
                for (la, lb) in a.levels.iter_mut().zip(&b.levels) {
                    la.subtract(lb)?;
                }
                a.small.subtract(&b.small)?;
                a.rough.subtract(&b.rough)?;
            }
            _ => return Err(Error::Incompatible("sketch modes differ".into())),
        }
        Ok(())
    }

    /// Sketch of `a`'s stream followed by `b`'s stream negated; for party
    /// sketches of `x` and `y` this sketches `x - y`.
    pub fn combine(a: &L1DiffSketch, b: &L1DiffSketch) -> Result<L1DiffSketch> {
        let mut out = a.clone();
        out.subtract(b)?;
        Ok(out)
    }

    pub fn estimate(&self) -> Result<f64> {
        self.estimate_detail(Execution::default()).map(|e| e.value)
    }

    /// Estimate of `||f||_1`. Only the k-set sketch the rough estimate
    /// selects is decoded.
    pub fn estimate_detail(&self, exec: Execution) -> Result<Estimate> {
        match &self.state {
            State::Exact(buf) => Ok(Estimate {
                value: buf.iter().map(|v| v.unsigned_abs()).sum::<u64>() as f64,
                branch: Branch::Exact,
                rough: f64::NAN,
            }),
            State::Sketch(s) => {
                let rough = s.rough.estimate();
                if rough <= self.params.k_small as f64 {
                    let value = s.small.estimate_with(exec)? as f64;
                    return Ok(Estimate { value, branch: Branch::Small, rough });
                }
                let j = self.params.level_for(rough);
                let count = s.levels[j as usize - 1].estimate_with(exec)?;
                Ok(Estimate {
                    value: self.params.level_scale(j) * count as f64,
                    branch: Branch::Level(j),
                    rough,
                })
            }
        }
    }
}

/// Median of the per-repetition estimates of `x - y`, one `(x, y)` sketch
/// pair per independently seeded repetition. Failed repetitions are
/// dropped; a failed majority is an error.
pub fn estimate_median(pairs: &[(L1DiffSketch, L1DiffSketch)], exec: Execution) -> Result<f64> {
    if pairs.is_empty() {
        return Err(Error::InvalidParameter("no repetitions".into()));
    }
    let results = exec.map_range(pairs.len(), |r| {
        let (a, b) = &pairs[r];
        L1DiffSketch::combine(a, b).map(|d| d.estimate_detail(Execution::Sequential))
    });
    let mut values = Vec::with_capacity(pairs.len());
    for res in results {
        if let Ok(est) = res? {
            values.push(est.value);
        }
    }
    let failed = pairs.len() - values.len();
    if values.is_empty() || 2 * failed > pairs.len() {
        return Err(Error::MajorityFailure { failed, reps: pairs.len() });
    }
    values.sort_by(f64::total_cmp);
    Ok(values[(values.len() - 1) / 2])
}
