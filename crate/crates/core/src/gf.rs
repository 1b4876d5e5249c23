//! Prime-field context: prime and generator search plus exp/dlog tables.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use crate::error::{Error, Result};

/// Largest `p - 1` for which exp/dlog tables are materialized (two `u32`
/// arrays of this length). Larger fields fall back to square-and-multiply.
pub const TABLE_LIMIT: u64 = 1 << 25;

/// Largest modulus accepted; counters and table entries are 32-bit words.
pub const MAX_MODULUS: u64 = u32::MAX as u64;

const WITNESSES: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];

#[inline]
pub fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

pub fn pow_mod(mut base: u64, mut exp: u64, m: u64) -> u64 {
    let mut acc = 1 % m;
    base %= m;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mul_mod(acc, base, m);
        }
        base = mul_mod(base, base, m);
        exp >>= 1;
    }
    acc
}

/// Deterministic Miller-Rabin; the witness set is exact for all `u64`.
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for &w in &WITNESSES {
        if n % w == 0 {
            return n == w;
        }
    }
    let mut d = n - 1;
    let mut r = 0;
    while d % 2 == 0 {
        d /= 2;
        r += 1;
    }
    'witness: for &a in &WITNESSES {
        let mut x = pow_mod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..r {
            x = mul_mod(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

/// Least prime `>= c`. By Bertrand's postulate it is at most `2c`.
pub fn find_prime(c: u64) -> u64 {
    let mut n = c.max(2);
    while !is_prime(n) {
        n += 1;
    }
    n
}

fn prime_factors(mut n: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut f = 2;
    while f * f <= n {
        if n % f == 0 {
            out.push(f);
            while n % f == 0 {
                n /= f;
            }
        }
        f += if f == 2 { 1 } else { 2 };
    }
    if n > 1 {
        out.push(n);
    }
    out
}

/// Smallest generator of `F_p^*` in `2..p`. Requires `p` prime and `p >= 3`.
pub fn find_generator(p: u64) -> u64 {
    assert!(p >= 3, "generator search needs p >= 3");
    let factors = prime_factors(p - 1);
    (2..p)
        .find(|&g| factors.iter().all(|&f| pow_mod(g, (p - 1) / f, p) != 1))
        .expect("a prime field always has a generator")
}

/// `exp[i] = g^i` for `i in 0..p-1`, and `log[x - 1] = dlog_g(x)`.
pub fn build_tables(p: u64, g: u64) -> (Vec<u32>, Vec<u32>) {
    let order = (p - 1) as usize;
    let mut exp = Vec::with_capacity(order);
    let mut log = vec![0u32; order];
    let mut x = 1u64;
    for i in 0..order {
        exp.push(x as u32);
        log[(x - 1) as usize] = i as u32;
        x = x * g % p;
    }
    (exp, log)
}

struct Tables {
    exp: Vec<u32>,
    log: Vec<u32>,
}

/// Immutable context for arithmetic in `GF(p)`.
pub struct FieldCtx {
    p: u64,
    g: u64,
    tables: Option<Tables>,
}

impl std::fmt::Debug for FieldCtx {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("FieldCtx")
            .field("p", &self.p)
            .field("g", &self.g)
            .field("tables", &self.tables.is_some())
            .finish()
    }
}

impl FieldCtx {
    pub fn new(p: u64) -> Result<Self> {
        if p < 3 || p > MAX_MODULUS || !is_prime(p) {
            return Err(Error::InvalidParameter(format!(
                "field modulus {p} must be an odd prime below 2^32"
            )));
        }
        let g = find_generator(p);
        let tables = (p - 1 <= TABLE_LIMIT).then(|| {
            let (exp, log) = build_tables(p, g);
            Tables { exp, log }
        });
        Ok(FieldCtx { p, g, tables })
    }

    /// Context for the least prime in `[c, 2c]`.
    pub fn for_bound(c: u64) -> Result<Self> {
        FieldCtx::new(find_prime(c))
    }

    /// Process-wide cached context for `p`. Contexts depend only on `p`, so
    /// every sketch over the same field shares one set of tables.
    pub fn shared(p: u64) -> Result<Arc<FieldCtx>> {
        static CACHE: OnceLock<Mutex<HashMap<u64, Arc<FieldCtx>>>> = OnceLock::new();
        let cache = CACHE.get_or_init(Default::default);
        if let Some(ctx) = cache.lock().unwrap().get(&p) {
            return Ok(ctx.clone());
        }
        let ctx = Arc::new(FieldCtx::new(p)?);
        let mut map = cache.lock().unwrap();
        if map.len() >= 8 {
            map.clear();
        }
        Ok(map.entry(p).or_insert(ctx).clone())
    }

    #[inline]
    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn generator(&self) -> u64 {
        self.g
    }

    pub fn has_tables(&self) -> bool {
        self.tables.is_some()
    }

    pub fn exp_table(&self) -> Option<&[u32]> {
        self.tables.as_ref().map(|t| t.exp.as_slice())
    }

    pub fn log_table(&self) -> Option<&[u32]> {
        self.tables.as_ref().map(|t| t.log.as_slice())
    }

    pub fn dlog(&self, x: u64) -> Result<u64> {
        let x = x % self.p;
        if x == 0 {
            return Err(Error::ZeroElement);
        }
        match &self.tables {
            Some(t) => Ok(t.log[(x - 1) as usize] as u64),
            None => Ok(self.dlog_slow(x)),
        }
    }

    // Baby-step giant-step; only reached for fields too large for tables.
    fn dlog_slow(&self, x: u64) -> u64 {
        let order = self.p - 1;
        let m = (order as f64).sqrt().ceil() as u64 + 1;
        let mut baby = HashMap::with_capacity(m as usize);
        let mut e = 1u64;
        for j in 0..m {
            baby.entry(e).or_insert(j);
            e = mul_mod(e, self.g, self.p);
        }
        let factor = pow_mod(self.g, order - m % order, self.p);
        let mut gamma = x;
        for i in 0..m {
            if let Some(&j) = baby.get(&gamma) {
                return (i * m + j) % order;
            }
            gamma = mul_mod(gamma, factor, self.p);
        }
        unreachable!("g generates the multiplicative group")
    }

    /// `x^z`, via `exp[(z * dlog x) mod (p-1)]` when tables are present.
    pub fn pow(&self, x: u64, z: u64) -> Result<u64> {
        let x = x % self.p;
        if x == 0 {
            return Err(Error::ZeroElement);
        }
        match &self.tables {
            Some(t) => {
                let l = t.log[(x - 1) as usize] as u64;
                let e = mul_mod(z % (self.p - 1), l, self.p - 1);
                Ok(t.exp[e as usize] as u64)
            }
            None => Ok(pow_mod(x, z, self.p)),
        }
    }

    pub fn inv(&self, x: u64) -> Result<u64> {
        let x = x % self.p;
        if x == 0 {
            return Err(Error::ZeroElement);
        }
        match &self.tables {
            Some(t) => {
                let l = t.log[(x - 1) as usize] as usize;
                let order = (self.p - 1) as usize;
                Ok(t.exp[(order - l) % order] as u64)
            }
            None => Ok(pow_mod(x, self.p - 2, self.p)),
        }
    }

    #[inline]
    pub fn mul(&self, a: u64, b: u64) -> u64 {
        a * b % self.p
    }

    #[inline]
    pub fn add(&self, a: u64, b: u64) -> u64 {
        let s = a + b;
        if s >= self.p {
            s - self.p
        } else {
            s
        }
    }

    #[inline]
    pub fn sub(&self, a: u64, b: u64) -> u64 {
        if a >= b {
            a - b
        } else {
            a + self.p - b
        }
    }

    #[inline]
    pub fn neg(&self, a: u64) -> u64 {
        if a == 0 {
            0
        } else {
            self.p - a
        }
    }

    /// Residue of a signed integer.
    #[inline]
    pub fn reduce(&self, v: i64) -> u64 {
        v.rem_euclid(self.p as i64) as u64
    }

    /// Signed representative: `α` if `α <= p/2`, else `α - p`.
    #[inline]
    pub fn sigma(&self, alpha: u64) -> i64 {
        if alpha <= self.p / 2 {
            alpha as i64
        } else {
            alpha as i64 - self.p as i64
        }
    }

    /// `x^1, x^2, …, x^count` for nonzero `x`.
    /// Writes `x, x^2, ..., x^len` into `out` by running product.
    pub fn fill_powers(&self, x: u64, out: &mut [u32]) {
        let p = self.p;
        let mut cur = x % p;
        for slot in out.iter_mut() {
            *slot = cur as u32;
            cur = cur * x % p;
        }
    }

    pub fn powers(&self, x: u64, count: usize) -> Powers<'_> {
        debug_assert!(x % self.p != 0);
        let step = self.tables.as_ref().map(|t| t.log[(x - 1) as usize] as u64);
        Powers {
            ctx: self,
            x,
            cur: step.unwrap_or(x),
            step,
            left: count,
        }
    }
}

/// Iterator over successive powers. With tables the exponent advances by
/// `dlog x` each step and the value is a single lookup.
pub struct Powers<'a> {
    ctx: &'a FieldCtx,
    x: u64,
    cur: u64,
    step: Option<u64>,
    left: usize,
}

impl Iterator for Powers<'_> {
    type Item = u64;

    #[inline]
    fn next(&mut self) -> Option<u64> {
        if self.left == 0 {
            return None;
        }
        self.left -= 1;
        match (self.step, &self.ctx.tables) {
            (Some(step), Some(t)) => {
                let out = t.exp[self.cur as usize] as u64;
                self.cur += step;
                if self.cur >= self.ctx.p - 1 {
                    self.cur -= self.ctx.p - 1;
                }
                Some(out)
            }
            _ => {
                let out = self.cur;
                self.cur = self.ctx.mul(self.cur, self.x);
                Some(out)
            }
        }
    }
}
