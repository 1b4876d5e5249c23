//! Versioned binary format for [`L1DiffSketch`].
//!
//! All integers are little-endian and fixed width:
//!
//! ```text
//! magic    "L1DF"          4 bytes
//! version  u16             currently 1
//! mode     u8              0 = sketch, 1 = exact
//! eps      f64 (IEEE-754)
//! n        u64
//! max_raw  u64
//! seed     [u8; 32]
//! q        u64             0 in exact mode
//! p        u64             0 in exact mode
//! levels   u32             0 in exact mode
//! k_level  u64             0 in exact mode
//! k_small  u64             0 in exact mode
//! payload  sketch: level counters (u32, level order), small counters (u32),
//!                  600 rough accumulators (i128)
//!          exact:  n coordinates (i64)
//! ```
//!
//! Hash functions are not stored; they are re-derived from the seed.

use crate::error::{Error, Result};
use crate::kset::KSetParams;
use crate::l1diff::{L1DiffParams, L1DiffSketch, Mode, State};
use crate::rough::ROWS;
use crate::seed::MasterSeed;

pub const MAGIC: &[u8; 4] = b"L1DF";
pub const VERSION: u16 = 1;
pub const HEADER_LEN: usize = 4 + 2 + 1 + 8 + 8 + 8 + 32 + 8 + 8 + 4 + 8 + 8;

pub fn serialize(sk: &L1DiffSketch) -> Vec<u8> {
    let params = sk.params();
    let mut out = Vec::with_capacity(serialized_len(params));
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    out.push(match params.mode {
        Mode::Sketch => 0,
        Mode::Exact => 1,
    });
    out.extend_from_slice(&params.eps.to_le_bytes());
    out.extend_from_slice(&params.n.to_le_bytes());
    out.extend_from_slice(&params.max_raw.to_le_bytes());
    out.extend_from_slice(sk.seed().as_bytes());
    let p = sk.small().map_or(0, |s| s.params().p);
    out.extend_from_slice(&params.q.to_le_bytes());
    out.extend_from_slice(&p.to_le_bytes());
    out.extend_from_slice(&params.levels.to_le_bytes());
    out.extend_from_slice(&params.k_level.to_le_bytes());
    out.extend_from_slice(&params.k_small.to_le_bytes());
    match &sk.state {
        State::Exact(buf) => buf.iter().for_each(|v| out.extend_from_slice(&v.to_le_bytes())),
        State::Sketch(s) => {
            for level in s.levels.iter().chain(std::iter::once(&s.small)) {
                level.counters().iter().for_each(|c| out.extend_from_slice(&c.to_le_bytes()));
            }
            s.rough
                .accumulators()
                .iter()
                .for_each(|a| out.extend_from_slice(&a.to_le_bytes()));
        }
    }
    out
}

/// Exact size of the serialized form of a sketch with these parameters.
pub fn serialized_len(params: &L1DiffParams) -> usize {
    HEADER_LEN
        + match params.mode {
            Mode::Exact => 8 * params.n as usize,
            Mode::Sketch => {
                let level = KSetParams::new(params.k_level).map_or(0, |p| p.counter_count());
                let small = KSetParams::new(params.k_small).map_or(0, |p| p.counter_count());
                4 * (level * params.levels as usize + small) + 16 * ROWS
            }
        }
}

struct Reader<'a> {
    buf: &'a [u8],
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        if self.buf.len() < n {
            return Err(Error::CorruptParams("file is truncated".into()));
        }
        let (head, rest) = self.buf.split_at(n);
        self.buf = rest;
        Ok(head)
    }

    fn array<const N: usize>(&mut self) -> Result<[u8; N]> {
        Ok(self.take(N)?.try_into().unwrap())
    }

    fn u32(&mut self) -> Result<u32> {
        self.array().map(u32::from_le_bytes)
    }

    fn u64(&mut self) -> Result<u64> {
        self.array().map(u64::from_le_bytes)
    }
}

fn corrupt<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::CorruptParams(msg.into()))
}

pub fn deserialize(bytes: &[u8]) -> Result<L1DiffSketch> {
    let head = &bytes[..bytes.len().min(4)];
    if head != &MAGIC[..head.len()] {
        return Err(Error::BadMagic);
    }
    let mut r = Reader { buf: bytes };
    r.take(4)?;
    let version = u16::from_le_bytes(r.array()?);
    if version != VERSION {
        return Err(Error::UnsupportedVersion(version));
    }
    let mode = match r.array::<1>()?[0] {
        0 => Mode::Sketch,
        1 => Mode::Exact,
        other => return corrupt(format!("unknown mode byte {other}")),
    };
    let eps = f64::from_le_bytes(r.array()?);
    let n = r.u64()?;
    let max_raw = r.u64()?;
    let seed = MasterSeed(r.array()?);
    let q = r.u64()?;
    let p = r.u64()?;
    let levels = r.u32()?;
    let k_level = r.u64()?;
    let k_small = r.u64()?;

    let params = L1DiffParams::new(eps, n, max_raw).or_else(|e| corrupt(e.to_string()))?;
    if params.mode != mode {
        return corrupt("mode byte disagrees with eps and n");
    }
    match mode {
        Mode::Exact => {
            if (q, p, levels, k_level, k_small) != (0, 0, 0, 0, 0) {
                return corrupt("exact-mode file carries sketch parameters");
            }
            if r.buf.len() as u64 != 8 * n {
                return corrupt("exact payload has the wrong length");
            }
        }
        Mode::Sketch => {
            let nm = n * params.max_mag;
            if !crate::gf::is_prime(q) || q < 2 * nm || q > 4 * nm || q != params.q {
                return corrupt(format!("q = {q} is not the prime for n·M = {nm}"));
            }
            if (levels, k_level, k_small) != (params.levels, params.k_level, params.k_small) {
                return corrupt("level count or k values disagree with eps");
            }
            let kp = KSetParams::new(k_level).or_else(|e| corrupt(e.to_string()))?;
            if p != kp.p || p < kp.c_bound || p > 2 * kp.c_bound {
                return corrupt(format!("p = {p} is not the prime for k = {k_level}"));
            }
            if r.buf.len() != serialized_len(&params) - HEADER_LEN {
                return corrupt("sketch payload has the wrong length");
            }
        }
    }

    let mut sk = L1DiffSketch::from_params(params, seed).or_else(|e| corrupt(e.to_string()))?;
    match &mut sk.state {
        State::Exact(buf) => {
            for v in buf.iter_mut() {
                *v = i64::from_le_bytes(r.array()?);
            }
        }
        State::Sketch(s) => {
            let s = &mut **s;
            for level in s.levels.iter_mut().chain(std::iter::once(&mut s.small)) {
                let count = level.counters().len();
                let counters = (0..count).map(|_| r.u32()).collect::<Result<Vec<_>>>()?;
                level.load_counters(counters)?;
            }
            let acc = (0..ROWS)
                .map(|_| r.array().map(i128::from_le_bytes))
                .collect::<Result<Vec<_>>>()?;
            s.rough.load_accumulators(acc)?;
        }
    }
    Ok(sk)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample(eps: f64, n: u64) -> L1DiffSketch {
        let mut sk = L1DiffSketch::new(eps, n, 20, MasterSeed::from_u64(11)).unwrap();
        for i in 1..=n {
            sk.ingest(i, (i as i64 * 7) % 41 - 20).unwrap();
        }
        sk
    }

    #[test]
    fn round_trip_sketch_mode() {
        let sk = sample(0.5, 300);
        let bytes = serialize(&sk);
        assert_eq!(bytes.len(), serialized_len(sk.params()));
        let back = deserialize(&bytes).unwrap();
        assert_eq!(serialize(&back), bytes);
        let d = L1DiffSketch::combine(&sk, &back).unwrap();
        assert_eq!(d.estimate().unwrap(), 0.0);
    }

    #[test]
    fn round_trip_exact_mode() {
        let sk = sample(0.05, 100);
        assert_eq!(sk.mode(), Mode::Exact);
        let bytes = serialize(&sk);
        assert_eq!(bytes.len(), HEADER_LEN + 800);
        let back = deserialize(&bytes).unwrap();
        assert_eq!(back.exact_buffer(), sk.exact_buffer());
    }

    #[test]
    fn distinct_errors() {
        let bytes = serialize(&sample(0.5, 100));
        let mut bad = bytes.clone();
        bad[0] = b'X';
        assert_eq!(deserialize(&bad).unwrap_err(), Error::BadMagic);
        assert_eq!(deserialize(b"nope").unwrap_err(), Error::BadMagic);
        let mut bad = bytes.clone();
        bad[4] = 9;
        assert_eq!(deserialize(&bad).unwrap_err(), Error::UnsupportedVersion(9));
        for cut in [0, 2, 5, HEADER_LEN - 1, HEADER_LEN + 3, bytes.len() - 1] {
            assert!(
                matches!(deserialize(&bytes[..cut]), Err(Error::CorruptParams(_))),
                "cut at {cut}"
            );
        }
        let mut long = bytes.clone();
        long.push(0);
        assert!(matches!(deserialize(&long), Err(Error::CorruptParams(_))));
        let q_at = 4 + 2 + 1 + 8 + 8 + 8 + 32;
        let mut bad = bytes.clone();
        bad[q_at] ^= 1;
        assert!(matches!(deserialize(&bad), Err(Error::CorruptParams(_))));
        let mut bad = bytes.clone();
        bad[q_at + 8] ^= 2;
        assert!(matches!(deserialize(&bad), Err(Error::CorruptParams(_))));
        let mut bad = bytes.clone();
        bad[6] = 1;
        assert!(matches!(deserialize(&bad), Err(Error::CorruptParams(_))));
    }

    #[test]
    fn counters_above_modulus_rejected() {
        let mut bytes = serialize(&sample(0.5, 100));
        bytes[HEADER_LEN..HEADER_LEN + 4].copy_from_slice(&u32::MAX.to_le_bytes());
        assert!(matches!(deserialize(&bytes), Err(Error::CorruptParams(_))));
    }
}
