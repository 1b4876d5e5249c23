//! Oracle-equivalence self-test suites.

use l1sketch::kset::KSetParams;
use l1sketch::{
    count_hits, decode, power_sums, Execution, FieldCtx, KSetSketch, L1DiffSketch, MasterSeed, RangeQuery,
    SparseVector,
};
use rand::rngs::StdRng;
use rand::seq::index::sample;
use rand::{Rng, SeedableRng};

/// Map from a decoded residue to a signed frequency.
pub type ResidueMap = fn(&FieldCtx, u64) -> i64;

pub fn sigma(ctx: &FieldCtx, alpha: u64) -> i64 {
    ctx.sigma(alpha)
}

#[derive(Clone, Debug)]
pub struct SuiteReport {
    pub name: &'static str,
    pub successes: u64,
    pub trials: u64,
    pub threshold: f64,
}

impl SuiteReport {
    pub fn rate(&self) -> f64 {
        self.successes as f64 / self.trials as f64
    }

    pub fn passed(&self) -> bool {
        self.trials == 0 || self.rate() >= self.threshold
    }
}

impl std::fmt::Display for SuiteReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.trials == 0 {
            return write!(f, "{}: skipped (0 trials) PASS", self.name);
        }
        write!(
            f,
            "{}: {}/{} (rate {:.3}, threshold {:.2}) {}",
            self.name,
            self.successes,
            self.trials,
            self.rate(),
            self.threshold,
            if self.passed() { "PASS" } else { "FAIL" }
        )
    }
}

fn run(name: &'static str, trials: u64, threshold: f64, mut trial: impl FnMut() -> bool) -> SuiteReport {
    let successes = (0..trials).filter(|_| trial()).count() as u64;
    SuiteReport { name, successes, trials, threshold }
}

fn rangecount(rng: &mut StdRng, trials: u64) -> SuiteReport {
    run("rangecount", trials, 1.0, || {
        let m = rng.gen_range(1..=10_000u64);
        let c = rng.gen_range(0..m);
        let q = RangeQuery {
            a: rng.gen_range(0..m),
            b: rng.gen_range(0..m),
            c,
            d: rng.gen_range(c..m),
            x: rng.gen_range(0..1_000_000),
            r: rng.gen_range(0..=1_000),
            m,
        };
        let brute = (0..=q.r)
            .filter(|i| (q.c..=q.d).contains(&((q.a * ((q.x + i) % m) + q.b) % m)))
            .count() as u64;
        count_hits(&q) == brute
    })
}

fn syndrome(rng: &mut StdRng, trials: u64) -> SuiteReport {
    let params = KSetParams::new(16).unwrap();
    let ctx = FieldCtx::shared(params.p).unwrap();
    let s = params.s as usize;
    run("syndrome", trials, 1.0, || {
        let size = rng.gen_range(0..=s);
        let entries = sample(rng, (params.p - 1) as usize, size)
            .into_iter()
            .map(|loc| (loc as u64 + 1, rng.gen_range(1..params.p)))
            .collect();
        let v = SparseVector::new(entries);
        let sums = power_sums(&v, s, &ctx).unwrap();
        decode(&sums, &ctx).ok() == Some(v)
    })
}

fn kset(rng: &mut StdRng, trials: u64, map: ResidueMap) -> SuiteReport {
    let (k, n) = (64u64, 1u64 << 16);
    run("kset", trials, 0.70, || {
        let mut sk = KSetSketch::new(k, n, &MasterSeed(rng.gen())).unwrap();
        for (pos, i) in sample(rng, n as usize, k as usize).into_iter().enumerate() {
            sk.update(i as u64 + 1, if pos % 2 == 0 { 1 } else { -1 }).unwrap();
        }
        sk.estimate_mapped(Execution::Sequential, map).ok() == Some(k)
    })
}

fn end_to_end(rng: &mut StdRng, trials: u64) -> SuiteReport {
    let (n, m, eps) = (2_000u64, 50i64, 0.25);
    run("end-to-end", trials, 0.60, || {
        let x: Vec<i64> = (0..n).map(|_| rng.gen_range(-m..=m)).collect();
        let y: Vec<i64> = (0..n).map(|_| rng.gen_range(-m..=m)).collect();
        let truth = x.iter().zip(&y).map(|(a, b)| (a - b).unsigned_abs()).sum::<u64>() as f64;
        let mut sx = L1DiffSketch::new(eps, n, m as u64, MasterSeed(rng.gen())).unwrap();
        let mut sy = sx.clone();
        sx.ingest_dense(&x).unwrap();
        sy.ingest_dense(&y).unwrap();
        L1DiffSketch::combine(&sx, &sy)
            .and_then(|d| d.estimate())
            .is_ok_and(|est| (est - truth).abs() <= eps * truth)
    })
}

/// Runs every suite with `trials` trials each.
pub fn run_all(trials: u64, seed: &MasterSeed, map: ResidueMap) -> Vec<SuiteReport> {
    let mut rng = StdRng::from_seed(*seed.as_bytes());
    vec![
        rangecount(&mut rng, trials),
        syndrome(&mut rng, trials),
        kset(&mut rng, trials, map),
        end_to_end(&mut rng, trials),
    ]
}
