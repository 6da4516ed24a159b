//! Block segmentation into shares, reconstruction, and seed-based
//! integrity/replay verification.
//!
//! A block's polynomial has `t` coefficients laid out as
//!
//! ```text
//! degree:  0 .. W-1        W .. t-n_seed-1     t-n_seed .. t-1
//!          data segments   random fill         coefficient seeds
//! ```
//!
//! and every share is an evaluation `(x, f(x))` at a nonzero `x`. Any `t`
//! shares determine the polynomial; the seed coefficients are recomputed
//! from `(key, address, write counter)` on reconstruction and must match.

use std::collections::HashSet;

use rand::RngCore;
use thiserror::Error;

use crate::field::{batch_invert, Field, FieldError, Gf64};
use crate::mix::keyed_mix;

pub const BLOCK_BYTES: usize = 64;
pub const SEGMENT_BYTES: usize = 8;
pub const SHARE_BYTES: usize = 16;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CodecError {
    #[error("invalid codec parameters: {0}")]
    InvalidParams(String),
    #[error("duplicate share x-value {0:#x}")]
    DuplicateX(u64),
    #[error("query point {0:#x} coincides with a share x-value")]
    NodeCollision(u64),
    #[error("seed index {index} out of range (n_seed = {n_seed})")]
    SeedIndex { index: usize, n_seed: usize },
    #[error("expected {expected} shares, got {got}")]
    ShareCount { expected: usize, got: usize },
    #[error(transparent)]
    Field(#[from] FieldError),
}

/// `K` shares per block, threshold `t`, `W` data segments and `n_seed` seed
/// coefficients. The polynomial degree is `t - 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CodecParams {
    pub k: usize,
    pub t: usize,
    pub w: usize,
    pub n_seed: usize,
}

impl Default for CodecParams {
    fn default() -> Self {
        CodecParams {
            k: 32,
            t: 16,
            w: 8,
            n_seed: 1,
        }
    }
}

impl CodecParams {
    pub fn new(k: usize, t: usize, w: usize, n_seed: usize) -> Result<Self, CodecError> {
        let p = CodecParams { k, t, w, n_seed };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<(), CodecError> {
        let bad = |m: String| Err(CodecError::InvalidParams(m));
        if self.t == 0 || self.t > self.k {
            return bad(format!("need 1 <= t <= K, got t={} K={}", self.t, self.k));
        }
        if self.w == 0 || self.w > BLOCK_BYTES / SEGMENT_BYTES {
            return bad(format!("W must be in 1..=8, got {}", self.w));
        }
        if self.w + self.n_seed > self.t {
            return bad(format!(
                "W + n_seed must not exceed t ({} + {} > {})",
                self.w, self.n_seed, self.t
            ));
        }
        if self.k > u16::MAX as usize {
            return bad(format!("K too large: {}", self.k));
        }
        Ok(())
    }

    /// Degree of the sharing polynomial.
    pub fn degree(&self) -> usize {
        self.t - 1
    }
}

/// A 64-byte plaintext block. Segment `i` is bytes `[8i, 8i + 8)`, little-endian.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct DataBlock(pub [u8; BLOCK_BYTES]);

impl Default for DataBlock {
    fn default() -> Self {
        DataBlock([0; BLOCK_BYTES])
    }
}

impl std::fmt::Debug for DataBlock {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "DataBlock(")?;
        for b in &self.0[..8] {
            write!(f, "{b:02x}")?;
        }
        write!(f, "..)")
    }
}

impl DataBlock {
    pub fn zeroed() -> Self {
        Self::default()
    }

    pub fn segment(&self, i: usize) -> u64 {
        let mut word = [0u8; SEGMENT_BYTES];
        word.copy_from_slice(&self.0[i * SEGMENT_BYTES..(i + 1) * SEGMENT_BYTES]);
        u64::from_le_bytes(word)
    }

    pub fn segments(&self) -> [u64; BLOCK_BYTES / SEGMENT_BYTES] {
        std::array::from_fn(|i| self.segment(i))
    }

    /// Inverse of [`DataBlock::segments`]; missing trailing segments are zero.
    pub fn from_segments(segments: &[u64]) -> Self {
        let mut bytes = [0u8; BLOCK_BYTES];
        for (i, s) in segments.iter().take(BLOCK_BYTES / SEGMENT_BYTES).enumerate() {
            bytes[i * SEGMENT_BYTES..(i + 1) * SEGMENT_BYTES].copy_from_slice(&s.to_le_bytes());
        }
        DataBlock(bytes)
    }
}

/// Coefficient form, index = degree.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Polynomial<F> {
    pub coeffs: Vec<F>,
}

impl<F: Field> Polynomial<F> {
    pub fn eval(&self, x: F) -> F {
        self.coeffs.iter().rev().fold(F::ZERO, |acc, &c| acc * x + c)
    }
}

/// One evaluation point of a block polynomial. Serialized as 16 bytes,
/// little-endian `x` followed by little-endian `y`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct Share {
    pub x: Gf64,
    pub y: Gf64,
}

impl Share {
    pub fn new(x: u64, y: u64) -> Self {
        Share {
            x: Gf64(x),
            y: Gf64(y),
        }
    }

    pub fn to_bytes(&self) -> [u8; SHARE_BYTES] {
        let mut out = [0u8; SHARE_BYTES];
        out[..8].copy_from_slice(&self.x.to_le_bytes());
        out[8..].copy_from_slice(&self.y.to_le_bytes());
        out
    }

    pub fn from_bytes(bytes: &[u8; SHARE_BYTES]) -> Self {
        let mut x = [0u8; 8];
        let mut y = [0u8; 8];
        x.copy_from_slice(&bytes[..8]);
        y.copy_from_slice(&bytes[8..]);
        Share {
            x: Gf64::from_le_bytes(x),
            y: Gf64::from_le_bytes(y),
        }
    }
}

/// Inputs to the seed PRF. `write_counter` advances on every write to
/// `logical_addr`, so shares from an older write carry different seeds.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SeedContext {
    pub seed_key: u128,
    pub logical_addr: u64,
    pub write_counter: u64,
}

/// Outcome of the seed comparison on reconstruction.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Integrity {
    Pass,
    Fail,
}

impl Integrity {
    pub fn passed(self) -> bool {
        self == Integrity::Pass
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Reconstruction {
    pub block: DataBlock,
    pub integrity: Integrity,
}

const SEED_DOMAIN: u64 = 0x5353_4d2d_5345_4544; // "SSM-SEED"

pub fn derive_seed(
    ctx: &SeedContext,
    seed_index: usize,
    params: &CodecParams,
) -> Result<Gf64, CodecError> {
    if seed_index >= params.n_seed {
        return Err(CodecError::SeedIndex {
            index: seed_index,
            n_seed: params.n_seed,
        });
    }
    Ok(Gf64(keyed_mix(
        ctx.seed_key,
        &[
            SEED_DOMAIN,
            ctx.logical_addr,
            ctx.write_counter,
            seed_index as u64,
        ],
    )))
}

/// Builds the block polynomial: data segments, `rng` fill, then seeds.
pub fn build_polynomial<R: RngCore + ?Sized>(
    block: &DataBlock,
    params: &CodecParams,
    ctx: &SeedContext,
    rng: &mut R,
) -> Polynomial<Gf64> {
    let t = params.t;
    let mut coeffs = Vec::with_capacity(t);
    coeffs.extend((0..params.w).map(|i| Gf64(block.segment(i))));
    coeffs.extend((params.w..t - params.n_seed).map(|_| Gf64(rng.next_u64())));
    for i in 0..params.n_seed {
        coeffs.push(derive_seed(ctx, i, params).expect("seed index in range"));
    }
    Polynomial { coeffs }
}

/// Evaluates `poly` at `k` distinct nonzero points drawn from `rng`.
pub fn evaluate_shares<R: RngCore + ?Sized>(
    poly: &Polynomial<Gf64>,
    k: usize,
    rng: &mut R,
) -> Vec<Share> {
    let mut seen = HashSet::with_capacity(k);
    let mut shares = Vec::with_capacity(k);
    while shares.len() < k {
        let x = rng.next_u64();
        // x = 0 would expose the first data segment as f(0).
        if x == 0 || !seen.insert(x) {
            continue;
        }
        shares.push(Share {
            x: Gf64(x),
            y: poly.eval(Gf64(x)),
        });
    }
    shares
}

pub fn segment_block<R: RngCore + ?Sized>(
    block: &DataBlock,
    params: &CodecParams,
    ctx: &SeedContext,
    rng: &mut R,
) -> Vec<Share> {
    let poly = build_polynomial(block, params, ctx, rng);
    evaluate_shares(&poly, params.k, rng)
}

/// Barycentric weights `w_i = 1 / prod_{j != i} (x_i - x_j)`.
fn weights<F: Field>(xs: &[F], dup: impl Fn(F) -> CodecError) -> Result<Vec<F>, CodecError> {
    let mut w = Vec::with_capacity(xs.len());
    for (i, &xi) in xs.iter().enumerate() {
        let mut prod = F::ONE;
        for (j, &xj) in xs.iter().enumerate() {
            if i != j {
                prod *= xi - xj;
            }
        }
        if prod.is_zero() {
            return Err(dup(xi));
        }
        w.push(prod);
    }
    batch_invert(&mut w)?;
    Ok(w)
}

/// Evaluates the interpolant of `points` at `x` with the barycentric
/// formula `sum(w_i / (x - x_i) * y_i) / sum(w_i / (x - x_i))`.
pub fn barycentric_eval_generic<F: Field>(
    points: &[(F, F)],
    x: F,
    dup: impl Fn(F) -> CodecError,
    collide: impl Fn(F) -> CodecError,
) -> Result<F, CodecError> {
    let xs: Vec<F> = points.iter().map(|p| p.0).collect();
    let w = weights(&xs, dup)?;
    let mut diffs = Vec::with_capacity(xs.len());
    for &xi in &xs {
        let d = x - xi;
        if d.is_zero() {
            return Err(collide(xi));
        }
        diffs.push(d);
    }
    batch_invert(&mut diffs)?;
    let (mut num, mut den) = (F::ZERO, F::ZERO);
    for ((&(_, yi), &wi), &di) in points.iter().zip(&w).zip(&diffs) {
        let term = wi * di;
        num += term * yi;
        den += term;
    }
    Ok(num * den.inv()?)
}

/// Full coefficient vector of the interpolant through `points`, by
/// expanding the Lagrange basis against the master polynomial.
pub fn interpolate_generic<F: Field>(
    points: &[(F, F)],
    dup: impl Fn(F) -> CodecError,
) -> Result<Polynomial<F>, CodecError> {
    let n = points.len();
    let xs: Vec<F> = points.iter().map(|p| p.0).collect();
    let w = weights(&xs, dup)?;

    // master(x) = prod (x - x_j), degree n
    let mut master = vec![F::ZERO; n + 1];
    master[0] = F::ONE;
    for (deg, &xj) in xs.iter().enumerate() {
        for k in (0..=deg + 1).rev() {
            let shifted = if k > 0 { master[k - 1] } else { F::ZERO };
            master[k] = shifted - xj * master[k];
        }
    }

    let mut coeffs = vec![F::ZERO; n];
    let mut quotient = vec![F::ZERO; n];
    for ((&xi, &yi), &wi) in xs.iter().zip(points.iter().map(|p| &p.1)).zip(&w) {
        // master / (x - x_i) by synthetic division
        quotient[n - 1] = master[n];
        for k in (1..n).rev() {
            quotient[k - 1] = master[k] + xi * quotient[k];
        }
        let scale = wi * yi;
        for (c, &q) in coeffs.iter_mut().zip(&quotient) {
            *c += scale * q;
        }
    }
    Ok(Polynomial { coeffs })
}

fn share_points(shares: &[Share]) -> Vec<(Gf64, Gf64)> {
    shares.iter().map(|s| (s.x, s.y)).collect()
}

pub fn barycentric_eval(shares: &[Share], x: Gf64) -> Result<Gf64, CodecError> {
    barycentric_eval_generic(
        &share_points(shares),
        x,
        |v| CodecError::DuplicateX(v.0),
        |v| CodecError::NodeCollision(v.0),
    )
}

pub fn interpolate_coefficients(shares: &[Share]) -> Result<Polynomial<Gf64>, CodecError> {
    interpolate_generic(&share_points(shares), |v| CodecError::DuplicateX(v.0))
}

/// Interpolates exactly `t` shares, reassembles the data segments and
/// compares the seed coefficients against `ctx`.
pub fn reconstruct(
    shares: &[Share],
    params: &CodecParams,
    ctx: &SeedContext,
) -> Result<Reconstruction, CodecError> {
    if shares.len() != params.t {
        return Err(CodecError::ShareCount {
            expected: params.t,
            got: shares.len(),
        });
    }
    let poly = interpolate_coefficients(shares)?;
    let segments: Vec<u64> = poly.coeffs[..params.w].iter().map(|c| c.0).collect();
    let block = DataBlock::from_segments(&segments);
    let seed_base = params.t - params.n_seed;
    let mut integrity = Integrity::Pass;
    for i in 0..params.n_seed {
        if poly.coeffs[seed_base + i] != derive_seed(ctx, i, params)? {
            integrity = Integrity::Fail;
        }
    }
    Ok(Reconstruction { block, integrity })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::rngs::mock::StepRng;
    use rand::seq::index::sample;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn ctx(addr: u64, counter: u64) -> SeedContext {
        SeedContext {
            seed_key: 0x0123_4567_89ab_cdef_fedc_ba98_7654_3210,
            logical_addr: addr,
            write_counter: counter,
        }
    }

    fn random_block(rng: &mut impl Rng) -> DataBlock {
        let mut b = [0u8; 64];
        rng.fill(&mut b[..]);
        DataBlock(b)
    }

    /// Solves the two-point line `y = p + a x` directly.
    fn linear_oracle(s1: (u64, u64), s2: (u64, u64)) -> (Gf64, Gf64) {
        let (x1, y1, x2, y2) = (Gf64(s1.0), Gf64(s1.1), Gf64(s2.0), Gf64(s2.1));
        let a = (y1 + y2) * (x1 + x2).inv().unwrap();
        (y1 + a * x1, a)
    }

    #[test]
    fn params_validation() {
        assert!(CodecParams::default().validate().is_ok());
        assert!(CodecParams::new(32, 33, 8, 1).is_err());
        assert!(CodecParams::new(32, 8, 8, 1).is_err());
        assert!(CodecParams::new(32, 16, 9, 1).is_err());
        assert!(CodecParams::new(6, 3, 1, 1).is_ok());
        assert_eq!(CodecParams::default().degree(), 15);
    }

    #[test]
    fn share_bytes_layout() {
        let s = Share::new(0x0102_0304_0506_0708, 0x1112_1314_1516_1718);
        let b = s.to_bytes();
        assert_eq!(b[0], 0x08);
        assert_eq!(b[7], 0x01);
        assert_eq!(b[8], 0x18);
        assert_eq!(Share::from_bytes(&b), s);
    }

    #[test]
    fn seed_is_deterministic_and_indexed() {
        let p = CodecParams::new(32, 16, 8, 2).unwrap();
        let c = ctx(3, 9);
        assert_eq!(derive_seed(&c, 0, &p), derive_seed(&c, 0, &p));
        assert_ne!(derive_seed(&c, 0, &p), derive_seed(&c, 1, &p));
        assert_eq!(
            derive_seed(&c, 2, &p),
            Err(CodecError::SeedIndex { index: 2, n_seed: 2 })
        );
    }

    #[test]
    fn seed_changes_with_counter_and_address() {
        let p = CodecParams::default();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..10_000 {
            let c = SeedContext {
                seed_key: rng.gen(),
                logical_addr: rng.gen_range(0..1 << 20),
                write_counter: rng.gen_range(0..1 << 40),
            };
            let base = derive_seed(&c, 0, &p).unwrap();
            let bumped = SeedContext {
                write_counter: c.write_counter + 1,
                ..c
            };
            let moved = SeedContext {
                logical_addr: c.logical_addr + 1,
                ..c
            };
            assert_ne!(base, derive_seed(&bumped, 0, &p).unwrap());
            assert_ne!(base, derive_seed(&moved, 0, &p).unwrap());
        }
    }

    #[test]
    fn segment_defaults_produce_distinct_nonzero_points() {
        let p = CodecParams::default();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let block = random_block(&mut rng);
        let shares = segment_block(&block, &p, &ctx(1, 0), &mut rng);
        assert_eq!(shares.len(), 32);
        let xs: HashSet<u64> = shares.iter().map(|s| s.x.0).collect();
        assert_eq!(xs.len(), 32);
        assert!(!xs.contains(&0));
    }

    #[test]
    fn zero_block_zero_fill_gives_zero_shares() {
        let p = CodecParams::new(32, 16, 8, 0).unwrap();
        let poly = build_polynomial(&DataBlock::zeroed(), &p, &ctx(0, 0), &mut StepRng::new(0, 0));
        assert!(poly.coeffs.iter().all(|c| c.0 == 0));
        let shares = evaluate_shares(&poly, p.k, &mut ChaCha8Rng::seed_from_u64(1));
        assert!(shares.iter().all(|s| s.y.0 == 0 && s.x.0 != 0));
    }

    #[test]
    fn rng_returning_zero_and_duplicates_is_retried() {
        // 0, 1, 1, 2, ... : zero and repeats must be skipped
        let mut rng = StepRng::new(0, 1);
        let poly = Polynomial {
            coeffs: vec![Gf64(7)],
        };
        let shares = evaluate_shares(&poly, 3, &mut rng);
        let xs: Vec<u64> = shares.iter().map(|s| s.x.0).collect();
        assert_eq!(xs, vec![1, 2, 3]);
    }

    #[test]
    fn barycentric_two_point_example() {
        let shares = [Share::new(1, 0), Share::new(2, 3)];
        let (p1, a1) = linear_oracle((1, 0), (2, 3));
        let expected = p1 + a1 * Gf64(3);
        assert_eq!(expected, Gf64(2));
        assert_eq!(barycentric_eval(&shares, Gf64(3)), Ok(Gf64(2)));
    }

    #[test]
    fn barycentric_constant_case() {
        let shares = [Share::new(9, 0xabc)];
        for x in [1u64, 2, 1000, u64::MAX] {
            assert_eq!(barycentric_eval(&shares, Gf64(x)), Ok(Gf64(0xabc)));
        }
    }

    #[test]
    fn barycentric_errors() {
        let dup = [Share::new(4, 1), Share::new(4, 2)];
        assert_eq!(barycentric_eval(&dup, Gf64(1)), Err(CodecError::DuplicateX(4)));
        let ok = [Share::new(4, 1), Share::new(5, 2)];
        assert_eq!(barycentric_eval(&ok, Gf64(5)), Err(CodecError::NodeCollision(5)));
    }

    #[test]
    fn barycentric_matches_horner() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for _ in 0..1000 {
            let poly = Polynomial {
                coeffs: (0..16).map(|_| Gf64(rng.gen())).collect(),
            };
            let shares = evaluate_shares(&poly, 16, &mut rng);
            let mut x = Gf64(rng.gen());
            while shares.iter().any(|s| s.x == x) {
                x = Gf64(rng.gen());
            }
            assert_eq!(barycentric_eval(&shares, x).unwrap(), poly.eval(x));
            let interp = interpolate_coefficients(&shares).unwrap();
            assert_eq!(interp.eval(x), poly.eval(x));
        }
    }

    #[test]
    fn interpolation_two_point_example() {
        let poly = interpolate_coefficients(&[Share::new(1, 0), Share::new(2, 3)]).unwrap();
        let (p1, a1) = linear_oracle((1, 0), (2, 3));
        assert_eq!(poly.coeffs, vec![p1, a1]);
        assert_eq!(poly.coeffs, vec![Gf64(1), Gf64(1)]);
    }

    #[test]
    fn interpolation_reproduces_points() {
        let mut rng = ChaCha8Rng::seed_from_u64(22);
        for _ in 0..1000 {
            let n = rng.gen_range(1..=20);
            let mut xs = HashSet::new();
            let mut shares = Vec::new();
            while shares.len() < n {
                let x: u64 = rng.gen();
                if xs.insert(x) {
                    shares.push(Share::new(x, rng.gen()));
                }
            }
            let poly = interpolate_coefficients(&shares).unwrap();
            assert_eq!(poly.coeffs.len(), n);
            for s in &shares {
                assert_eq!(poly.eval(s.x), s.y);
            }
        }
    }

    #[test]
    fn interpolation_recovers_segments() {
        let p = CodecParams::default();
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        let block = random_block(&mut rng);
        let shares = segment_block(&block, &p, &ctx(4, 2), &mut rng);
        let poly = interpolate_coefficients(&shares[5..21]).unwrap();
        let segs = block.segments();
        for (c, seg) in poly.coeffs.iter().zip(segs) {
            assert_eq!(c.0, seg);
        }
    }

    #[test]
    fn reconstruct_roundtrip_random_subsets() {
        let p = CodecParams::default();
        let mut rng = ChaCha8Rng::seed_from_u64(24);
        for i in 0..500 {
            let block = random_block(&mut rng);
            let c = ctx(i, i * 3);
            let shares = segment_block(&block, &p, &c, &mut rng);
            let subset: Vec<Share> = sample(&mut rng, p.k, p.t).into_iter().map(|j| shares[j]).collect();
            let r = reconstruct(&subset, &p, &c).unwrap();
            assert_eq!(r.block, block);
            assert_eq!(r.integrity, Integrity::Pass);
        }
    }

    #[test]
    fn reconstruct_all_subsets_small_params() {
        let p = CodecParams::new(6, 3, 1, 1).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(25);
        let block = DataBlock::from_segments(&[rng.gen()]);
        let c = ctx(0, 1);
        let shares = segment_block(&block, &p, &c, &mut rng);
        let mut count = 0;
        for a in 0..6 {
            for b in a + 1..6 {
                for d in b + 1..6 {
                    let r = reconstruct(&[shares[a], shares[b], shares[d]], &p, &c).unwrap();
                    assert_eq!(r, Reconstruction { block, integrity: Integrity::Pass });
                    count += 1;
                }
            }
        }
        assert_eq!(count, 20);
    }

    #[test]
    fn reconstruct_detects_bit_flip() {
        let p = CodecParams::default();
        let mut rng = ChaCha8Rng::seed_from_u64(26);
        for _ in 0..2000 {
            let block = random_block(&mut rng);
            let c = ctx(rng.gen_range(0..4096), rng.gen_range(0..100));
            let mut shares = segment_block(&block, &p, &c, &mut rng);
            shares.truncate(p.t);
            let victim = rng.gen_range(0..p.t);
            shares[victim].y.0 ^= 1 << rng.gen_range(0..64);
            let r = reconstruct(&shares, &p, &c).unwrap();
            assert_eq!(r.integrity, Integrity::Fail);
        }
    }

    #[test]
    fn reconstruct_detects_stale_counter() {
        let p = CodecParams::default();
        let mut rng = ChaCha8Rng::seed_from_u64(27);
        let block = random_block(&mut rng);
        let old = segment_block(&block, &p, &ctx(9, 4), &mut rng);
        let r = reconstruct(&old[..16], &p, &ctx(9, 5)).unwrap();
        assert_eq!(r.integrity, Integrity::Fail);
        assert_eq!(r.block, block);
    }

    #[test]
    fn reconstruct_errors() {
        let p = CodecParams::new(6, 3, 1, 1).unwrap();
        let c = ctx(0, 0);
        assert_eq!(
            reconstruct(&[Share::new(1, 1)], &p, &c),
            Err(CodecError::ShareCount { expected: 3, got: 1 })
        );
        let dup = [Share::new(1, 1), Share::new(1, 2), Share::new(3, 3)];
        assert_eq!(reconstruct(&dup, &p, &c), Err(CodecError::DuplicateX(1)));
    }
}
