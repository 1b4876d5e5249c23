//! Recovery of a sparse vector over `F_p`, indexed by `F_p^*`, from its
//! first `2s` power sums `S_z = Σ r_x x^z`.
//!
//! Decoding runs Berlekamp-Massey on `S_1..S_2s` to get the minimal
//! recurrence, whose reversal is the locator `Λ(X) = Π (X - x)`. Its roots
//! are split out with Cantor-Zassenhaus (a deterministic shift sequence
//! keeps results reproducible), and the values come from the Lagrange basis
//! of the roots in `O(s^2)`. Every result is re-checked against all `2s`
//! sums before it is returned.

use crate::error::{Error, Result};
use crate::gf::FieldCtx;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PowerSums {
    /// `sums[z - 1] = S_z` for `z = 1..=2s`.
    pub sums: Vec<u64>,
}

impl PowerSums {
    pub fn sparsity(&self) -> usize {
        self.sums.len() / 2
    }
}

/// Nonzero entries `(location, value)` sorted by location.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct SparseVector {
    pub entries: Vec<(u64, u64)>,
}

impl SparseVector {
    pub fn new(mut entries: Vec<(u64, u64)>) -> Self {
        entries.sort_unstable();
        SparseVector { entries }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

pub fn power_sums(v: &SparseVector, s: usize, ctx: &FieldCtx) -> Result<PowerSums> {
    let p = ctx.p();
    if v.len() > s || 2 * s as u64 + 1 >= p {
        return Err(Error::InvalidParameter(format!(
            "{} entries with sparsity {s} over GF({p})",
            v.len()
        )));
    }
    let mut sums = vec![0u64; 2 * s];
    for &(x, r) in &v.entries {
        if x == 0 || x >= p || r % p == 0 {
            return Err(Error::InvalidParameter(format!("bad entry ({x}, {r})")));
        }
        let r = r % p;
        for (acc, pw) in sums.iter_mut().zip(ctx.powers(x, 2 * s)) {
            *acc = ctx.add(*acc, ctx.mul(r, pw));
        }
    }
    Ok(PowerSums { sums })
}

pub fn decode(sums: &PowerSums, ctx: &FieldCtx) -> Result<SparseVector> {
    let s = sums.sparsity();
    let seq = &sums.sums;
    if seq.iter().all(|&v| v == 0) {
        return Ok(SparseVector::default());
    }
    let (conn, len) = berlekamp_massey(seq, ctx);
    if len > s || conn.len() != len + 1 || conn[len] == 0 {
        return Err(Error::DecodeFailure);
    }
    let locator: Vec<u64> = conn.iter().rev().copied().collect();
    let roots = find_roots(&locator, ctx).ok_or(Error::DecodeFailure)?;
    if roots.len() != len {
        return Err(Error::DecodeFailure);
    }

    let deriv: Vec<u64> = (1..locator.len())
        .map(|j| ctx.mul(locator[j], j as u64 % ctx.p()))
        .collect();
    let mut entries = Vec::with_capacity(len);
    for &x in &roots {
        // Λ(X) / (X - x), low degree first.
        let mut quot = vec![0u64; len];
        quot[len - 1] = locator[len];
        for j in (1..len).rev() {
            quot[j - 1] = ctx.add(locator[j], ctx.mul(x, quot[j]));
        }
        let w = quot
            .iter()
            .zip(seq)
            .fold(0u64, |acc, (&a, &sv)| ctx.add(acc, ctx.mul(a, sv)));
        let denom = ctx.mul(poly::eval(&deriv, x, ctx), x);
        let r = ctx.mul(w, ctx.inv(denom).map_err(|_| Error::DecodeFailure)?);
        if r == 0 {
            return Err(Error::DecodeFailure);
        }
        entries.push((x, r));
    }
    let out = SparseVector::new(entries);
    match power_sums(&out, s, ctx) {
        Ok(check) if check.sums == *seq => Ok(out),
        _ => Err(Error::DecodeFailure),
    }
}

/// Connection polynomial `C(X) = 1 + c_1 X + … + c_L X^L` (low degree first,
/// padded to length `L + 1`) of the shortest recurrence generating `seq`.
fn berlekamp_massey(seq: &[u64], ctx: &FieldCtx) -> (Vec<u64>, usize) {
    let mut c = vec![1u64];
    let mut b = vec![1u64];
    let mut len = 0usize;
    let mut shift = 1usize;
    let mut last = 1u64;
    for n in 0..seq.len() {
        let mut d = seq[n];
        for i in 1..=len.min(c.len() - 1) {
            d = ctx.add(d, ctx.mul(c[i], seq[n - i]));
        }
        if d == 0 {
            shift += 1;
            continue;
        }
        let coef = ctx.mul(d, ctx.inv(last).expect("discrepancy base is nonzero"));
        let prev = c.clone();
        if c.len() < b.len() + shift {
            c.resize(b.len() + shift, 0);
        }
        for (i, &bi) in b.iter().enumerate() {
            c[i + shift] = ctx.sub(c[i + shift], ctx.mul(coef, bi));
        }
        if 2 * len <= n {
            len = n + 1 - len;
            b = prev;
            last = d;
            shift = 1;
        } else {
            shift += 1;
        }
    }
    c.resize(len + 1, 0);
    (c, len)
}

/// All roots of `f` when it splits into distinct linear factors over
/// `F_p^*`; `None` otherwise.
fn find_roots(f: &[u64], ctx: &FieldCtx) -> Option<Vec<u64>> {
    let f = poly::monic(poly::trim(f.to_vec()), ctx);
    let deg = f.len() - 1;
    if deg == 0 {
        return Some(Vec::new());
    }
    if f[0] == 0 {
        return None;
    }
    let xp = poly::pow_mod(&[0, 1], ctx.p() - 1, &f, ctx);
    if xp != [1] {
        return None;
    }
    let mut roots = Vec::with_capacity(deg);
    let mut salt = 0u64;
    split(f, ctx, &mut salt, &mut roots)?;
    roots.sort_unstable();
    Some(roots)
}

const SPLIT_ATTEMPTS: u32 = 256;

fn split(f: Vec<u64>, ctx: &FieldCtx, salt: &mut u64, out: &mut Vec<u64>) -> Option<()> {
    let p = ctx.p();
    match f.len() - 1 {
        0 => return Some(()),
        1 => {
            out.push(ctx.neg(f[0]));
            return Some(());
        }
        _ => {}
    }
    for _ in 0..SPLIT_ATTEMPTS {
        *salt += 1;
        let delta = splitmix(*salt) % p;
        let mut t = poly::pow_mod(&[delta, 1], (p - 1) / 2, &f, ctx);
        if t.is_empty() {
            t.push(0);
        }
        t[0] = ctx.sub(t[0], 1);
        let g = poly::gcd(f.clone(), poly::trim(t), ctx);
        let dg = g.len() - 1;
        if dg > 0 && dg < f.len() - 1 {
            let (h, rem) = poly::div_rem(&f, &g, ctx);
            debug_assert!(rem.is_empty());
            split(g, ctx, salt, out)?;
            return split(poly::monic(h, ctx), ctx, salt, out);
        }
    }
    None
}

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Dense polynomials over `GF(p)`, low degree first, no trailing zeros
/// (the zero polynomial is empty).
mod poly {
    use crate::gf::FieldCtx;

    pub fn trim(mut a: Vec<u64>) -> Vec<u64> {
        while a.last() == Some(&0) {
            a.pop();
        }
        a
    }

    pub fn monic(a: Vec<u64>, ctx: &FieldCtx) -> Vec<u64> {
        let Some(&lead) = a.last() else { return a };
        if lead == 1 {
            return a;
        }
        let inv = ctx.inv(lead).expect("leading coefficient is nonzero");
        a.into_iter().map(|c| ctx.mul(c, inv)).collect()
    }

    pub fn eval(a: &[u64], x: u64, ctx: &FieldCtx) -> u64 {
        a.iter().rev().fold(0, |acc, &c| ctx.add(ctx.mul(acc, x), c))
    }

    fn mul(a: &[u64], b: &[u64], ctx: &FieldCtx) -> Vec<u64> {
        if a.is_empty() || b.is_empty() {
            return Vec::new();
        }
        let p = ctx.p() as u128;
        let mut acc = vec![0u128; a.len() + b.len() - 1];
        for (i, &ai) in a.iter().enumerate() {
            if ai == 0 {
                continue;
            }
            for (j, &bj) in b.iter().enumerate() {
                acc[i + j] += (ai * bj) as u128;
            }
            if i % 64 == 63 {
                acc.iter_mut().for_each(|v| *v %= p);
            }
        }
        trim(acc.into_iter().map(|v| (v % p) as u64).collect())
    }

    pub fn div_rem(a: &[u64], m: &[u64], ctx: &FieldCtx) -> (Vec<u64>, Vec<u64>) {
        let dm = m.len() - 1;
        let mut r = a.to_vec();
        if r.len() <= dm {
            return (Vec::new(), trim(r));
        }
        let inv = ctx.inv(m[dm]).expect("divisor is nonzero");
        let mut q = vec![0u64; r.len() - dm];
        for i in (dm..r.len()).rev() {
            let coef = ctx.mul(r[i], inv);
            if coef == 0 {
                continue;
            }
            q[i - dm] = coef;
            for (j, &mj) in m.iter().enumerate() {
                let k = i - dm + j;
                r[k] = ctx.sub(r[k], ctx.mul(coef, mj));
            }
        }
        r.truncate(dm);
        (trim(q), trim(r))
    }

    pub fn pow_mod(base: &[u64], mut e: u64, m: &[u64], ctx: &FieldCtx) -> Vec<u64> {
        let mut result = div_rem(&[1], m, ctx).1;
        let mut b = div_rem(base, m, ctx).1;
        while e > 0 {
            if e & 1 == 1 {
                result = div_rem(&mul(&result, &b, ctx), m, ctx).1;
            }
            e >>= 1;
            if e > 0 {
                b = div_rem(&mul(&b, &b, ctx), m, ctx).1;
            }
        }
        result
    }

    /// Monic gcd.
    pub fn gcd(mut a: Vec<u64>, mut b: Vec<u64>, ctx: &FieldCtx) -> Vec<u64> {
        while !b.is_empty() {
            let r = div_rem(&a, &b, ctx).1;
            a = b;
            b = r;
        }
        monic(a, ctx)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{seq::index::sample, Rng, SeedableRng};

    fn sparse(entries: &[(u64, u64)]) -> SparseVector {
        SparseVector::new(entries.to_vec())
    }

    #[test]
    fn power_sum_examples() {
        let ctx = FieldCtx::new(11).unwrap();
        let empty = power_sums(&SparseVector::default(), 2, &ctx).unwrap();
        assert_eq!(empty.sums, vec![0; 4]);
        let one = power_sums(&sparse(&[(3, 5)]), 1, &ctx).unwrap();
        assert_eq!(one.sums, vec![4, 1]);
        let two = power_sums(&sparse(&[(2, 1), (5, 10)]), 2, &ctx).unwrap();
        let expect: Vec<u64> = (1..=4u32)
            .map(|z| (2u64.pow(z) + 10 * 5u64.pow(z)) % 11)
            .collect();
        assert_eq!(two.sums, expect);
    }

    #[test]
    fn decode_examples() {
        let ctx = FieldCtx::new(11).unwrap();
        let zero = PowerSums { sums: vec![0; 4] };
        assert!(decode(&zero, &ctx).unwrap().is_empty());
        let spike = PowerSums { sums: vec![4, 1] };
        assert_eq!(decode(&spike, &ctx).unwrap(), sparse(&[(3, 5)]));
        let two = power_sums(&sparse(&[(2, 1), (5, 10)]), 2, &ctx).unwrap();
        assert_eq!(decode(&two, &ctx).unwrap(), sparse(&[(2, 1), (5, 10)]));
    }

    #[test]
    fn single_spike_closed_form() {
        let ctx = FieldCtx::new(101).unwrap();
        for x in 1..101u64 {
            for r in [1u64, 7, 100] {
                let ps = power_sums(&sparse(&[(x, r)]), 1, &ctx).unwrap();
                let (s1, s2) = (ps.sums[0], ps.sums[1]);
                let loc = ctx.mul(s2, ctx.inv(s1).unwrap());
                let val = ctx.mul(s1, ctx.inv(loc).unwrap());
                assert_eq!((loc, val), (x, r));
                assert_eq!(decode(&ps, &ctx).unwrap(), sparse(&[(x, r)]));
            }
        }
    }

    fn for_each_sparse(p: u64, max_len: usize, f: &mut impl FnMut(&SparseVector)) {
        fn rec(
            p: u64,
            start: u64,
            left: usize,
            cur: &mut Vec<(u64, u64)>,
            f: &mut impl FnMut(&SparseVector),
        ) {
            f(&SparseVector::new(cur.clone()));
            if left == 0 {
                return;
            }
            for x in start..p {
                for r in 1..p {
                    cur.push((x, r));
                    rec(p, x + 1, left - 1, cur, f);
                    cur.pop();
                }
            }
        }
        rec(p, 1, max_len, &mut Vec::new(), f);
    }

    #[test]
    fn exhaustive_round_trip_small_fields() {
        for (p, s) in [(7u64, 2usize), (11, 3), (13, 2)] {
            let ctx = FieldCtx::new(p).unwrap();
            let mut count = 0;
            for_each_sparse(p, s, &mut |v| {
                let ps = power_sums(v, s, &ctx).unwrap();
                assert_eq!(&decode(&ps, &ctx).unwrap(), v, "p={p}");
                count += 1;
            });
            assert!(count > 100);
        }
    }

    #[test]
    fn random_round_trip_p31() {
        let ctx = FieldCtx::new(31).unwrap();
        let mut rng = rand::rngs::StdRng::seed_from_u64(31);
        for _ in 0..20_000 {
            let len = rng.gen_range(0..=3);
            let locs = sample(&mut rng, 30, len);
            let v = SparseVector::new(locs.iter().map(|l| (l as u64 + 1, rng.gen_range(1..31))).collect());
            let ps = power_sums(&v, 3, &ctx).unwrap();
            assert_eq!(decode(&ps, &ctx).unwrap(), v);
        }
    }

    #[test]
    fn overfull_vectors_fail_or_stay_consistent() {
        let ctx = FieldCtx::new(1009).unwrap();
        let mut rng = rand::rngs::StdRng::seed_from_u64(5);
        let s = 4;
        let mut failures = 0;
        for _ in 0..500 {
            let locs = sample(&mut rng, 1008, s + 3);
            let v = SparseVector::new(locs.iter().map(|l| (l as u64 + 1, rng.gen_range(1..1009))).collect());
            let mut sums = vec![0u64; 2 * s];
            for &(x, r) in &v.entries {
                for (z, acc) in sums.iter_mut().enumerate() {
                    *acc = ctx.add(*acc, ctx.mul(r, ctx.pow(x, z as u64 + 1).unwrap()));
                }
            }
            let ps = PowerSums { sums };
            match decode(&ps, &ctx) {
                Err(Error::DecodeFailure) => failures += 1,
                Ok(out) => {
                    assert!(out.len() <= s);
                    assert_eq!(power_sums(&out, s, &ctx).unwrap(), ps);
                }
                Err(e) => panic!("{e}"),
            }
        }
        assert!(failures > 400);
    }

    #[test]
    fn decoding_is_deterministic_and_valid() {
        let ctx = FieldCtx::new(30983).unwrap();
        let mut rng = rand::rngs::StdRng::seed_from_u64(8);
        for _ in 0..50 {
            let sums: Vec<u64> = (0..8).map(|_| rng.gen_range(0..30983)).collect();
            let ps = PowerSums { sums };
            let a = decode(&ps, &ctx);
            assert_eq!(a, decode(&ps, &ctx));
            if let Ok(v) = a {
                assert!(v.entries.iter().all(|&(x, r)| (1..30983).contains(&x) && r != 0));
            }
        }
    }

    #[test]
    fn rejects_the_zero_location() {
        let ctx = FieldCtx::new(11).unwrap();
        assert!(power_sums(&sparse(&[(0, 1)]), 1, &ctx).is_err());
        assert!(power_sums(&sparse(&[(1, 1), (2, 1)]), 1, &ctx).is_err());
        assert!(power_sums(&SparseVector::default(), 5, &ctx).is_err());
    }
}
