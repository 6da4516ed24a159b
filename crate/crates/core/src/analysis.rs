//! Security arithmetic: share-combination counts, the probability of
//! guessing a block's shares out of memory (P1), the probability of
//! guessing shuffles (P2), and an exhaustive secrecy check over GF(2^8).

use num_bigint::BigUint;
use thiserror::Error;

use crate::field::Gf256;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AnalysisError {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("enumeration refused: {0}")]
    TooLarge(String),
}

/// Memory-wide share population and per-block parameters.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SecurityParams {
    pub total: u64,
    pub k: u64,
    pub t: u64,
    pub d: u64,
    pub s: u64,
    /// Accesses between write-backs.
    pub n: u64,
}

impl Default for SecurityParams {
    fn default() -> Self {
        SecurityParams {
            total: 2_000_000_000,
            k: 32,
            t: 16,
            d: 16,
            s: 4,
            n: 1,
        }
    }
}

/// A probability carried alongside its base-10 logarithm, since the value
/// itself may underflow.
#[derive(Debug, Clone, PartialEq)]
pub struct Probability {
    pub value: f64,
    pub log10: f64,
    pub warnings: Vec<String>,
}

/// Exact binomial coefficient.
pub fn comb(k: u64, t: u64) -> Result<BigUint, AnalysisError> {
    if t > k {
        return Err(AnalysisError::Domain(format!("C({k}, {t}) with t > K")));
    }
    let t = t.min(k - t);
    let mut c = BigUint::from(1u32);
    for i in 0..t {
        c *= k - i;
        c /= i + 1;
    }
    Ok(c)
}

fn ln_comb(n: f64, k: f64) -> f64 {
    libm::lgamma(n + 1.0) - libm::lgamma(k + 1.0) - libm::lgamma(n - k + 1.0)
}

/// `K * C(Total/K, t) / C(Total, t)`, evaluated in log space.
pub fn p1(p: &SecurityParams) -> Result<Probability, AnalysisError> {
    if p.k == 0 || p.total < p.k {
        return Err(AnalysisError::Domain(format!(
            "need Total >= K >= 1, got Total={} K={}",
            p.total, p.k
        )));
    }
    if p.t > p.k {
        return Err(AnalysisError::Domain(format!("t={} exceeds K={}", p.t, p.k)));
    }
    let mut warnings = Vec::new();
    if !p.total.is_multiple_of(p.k) {
        warnings.push(format!(
            "Total={} not divisible by K={}; using floor(Total/K)",
            p.total, p.k
        ));
    }
    let blocks = p.total / p.k;
    if p.t > blocks {
        return Err(AnalysisError::Domain(format!(
            "t={} exceeds Total/K={blocks}",
            p.t
        )));
    }
    if p.t == 0 {
        warnings.push("t=0 is degenerate: P1 reduces to K".into());
    }
    let (m, n, t) = (blocks as f64, p.total as f64, p.t as f64);
    let ln = (p.k as f64).ln() + ln_comb(m, t) - ln_comb(n, t);
    Ok(Probability {
        value: ln.exp(),
        log10: ln / std::f64::consts::LN_10,
        warnings,
    })
}

/// `(1 / ((t + d) * S * n))^n`.
pub fn p2(p: &SecurityParams) -> Result<Probability, AnalysisError> {
    if p.t + p.d == 0 || p.s == 0 || p.n == 0 {
        return Err(AnalysisError::Domain(format!(
            "need t+d >= 1, S >= 1, n >= 1, got t+d={} S={} n={}",
            p.t + p.d,
            p.s,
            p.n
        )));
    }
    let base = ((p.t + p.d) as f64) * (p.s as f64) * (p.n as f64);
    let log10 = -(p.n as f64) * base.log10();
    Ok(Probability {
        value: base.powf(-(p.n as f64)),
        log10,
        warnings: Vec::new(),
    })
}

/// Where share x-coordinates come from in the secrecy check.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum XLayout {
    /// `x = 1..=K`; the secret sits at coefficient 0 and is never a share.
    Nonzero,
    /// `x = 0..K`: share 0 carries `f(0)`, the secret itself.
    IncludeZero,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SecrecyParams {
    pub k: usize,
    pub t: usize,
    pub w: usize,
    pub n_seed: usize,
    pub layout: XLayout,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SecrecyVerdict {
    pub pass: bool,
    /// Number of `(t-1)`-subsets of the K shares examined.
    pub subsets: usize,
    /// Completions counted per candidate secret and subset.
    pub completions_per_secret: u64,
    /// Smallest and largest completion count of any single view.
    pub min_count: u32,
    pub max_count: u32,
    /// First `(subset x-coordinates, secret)` whose view distribution
    /// differs from secret 0.
    pub violation: Option<(Vec<u8>, u8)>,
}

fn mul_table() -> Vec<[u8; 256]> {
    (0..256)
        .map(|a| {
            let mut row = [0u8; 256];
            for (b, r) in row.iter_mut().enumerate() {
                *r = (Gf256(a as u8) * Gf256(b as u8)).0;
            }
            row
        })
        .collect()
}

fn subsets(n: usize, r: usize) -> Vec<Vec<usize>> {
    fn go(start: usize, n: usize, r: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == r {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            go(i + 1, n, r, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    go(0, n, r, &mut Vec::new(), &mut out);
    out
}

/// Enumerates every polynomial over GF(2^8) with the secret at coefficient 0
/// and the other `t - 1` coefficients free (seed coefficients are keyed PRF
/// outputs, unknown to an observer, so they range freely too). For each
/// `(t-1)`-subset of shares, the histogram of observed views must be the
/// same for all 256 secrets.
pub fn secrecy_exhaustive(p: &SecrecyParams) -> Result<SecrecyVerdict, AnalysisError> {
    if p.w != 1 {
        return Err(AnalysisError::TooLarge(format!("W must be 1, got {}", p.w)));
    }
    if !(2..=3).contains(&p.t) || p.k < p.t || p.k > 8 {
        return Err(AnalysisError::TooLarge(format!(
            "need 2 <= t <= 3 and t <= K <= 8, got t={} K={}",
            p.t, p.k
        )));
    }
    if p.w + p.n_seed > p.t {
        return Err(AnalysisError::Domain(format!(
            "W + n_seed exceeds t ({} + {} > {})",
            p.w, p.n_seed, p.t
        )));
    }
    let xs: Vec<u8> = match p.layout {
        XLayout::Nonzero => (1..=p.k as u8).collect(),
        XLayout::IncludeZero => (0..p.k as u8).collect(),
    };
    let mul = mul_table();
    let free = p.t - 1;
    let completions = 256u64.pow(free as u32);
    let views = 256usize.pow(free as u32);
    let subs = subsets(p.k, free);

    let mut reference: Vec<Vec<u32>> = Vec::new();
    let mut verdict = SecrecyVerdict {
        pass: true,
        subsets: subs.len(),
        completions_per_secret: completions,
        min_count: u32::MAX,
        max_count: 0,
        violation: None,
    };
    let mut ys = vec![0u8; p.k];
    for secret in 0..=255u8 {
        let mut hist = vec![vec![0u32; views]; subs.len()];
        for c in 0..completions {
            // coefficients 1..t-1 from the digits of c
            for (y, &x) in ys.iter_mut().zip(&xs) {
                let mut acc = 0u8;
                for j in (1..p.t).rev() {
                    let coeff = (c >> (8 * (j - 1))) as u8;
                    acc = mul[(acc ^ coeff) as usize][x as usize];
                }
                *y = acc ^ secret;
            }
            for (h, sub) in hist.iter_mut().zip(&subs) {
                let view = sub.iter().fold(0usize, |v, &i| v << 8 | ys[i] as usize);
                h[view] += 1;
            }
        }
        for h in &hist {
            for &n in h {
                verdict.min_count = verdict.min_count.min(n);
                verdict.max_count = verdict.max_count.max(n);
            }
        }
        if secret == 0 {
            reference = hist;
        } else if verdict.violation.is_none() {
            if let Some(i) = (0..subs.len()).find(|&i| hist[i] != reference[i]) {
                verdict.pass = false;
                verdict.violation = Some((subs[i].iter().map(|&j| xs[j]).collect(), secret));
            }
        }
    }
    Ok(verdict)
}
