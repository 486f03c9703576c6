//! The Damped Binomial law `Z = X / sqrt(X + Y)` with `X ~ Bin(a, p)` and
//! `Y ~ Bin(b, p)` independent (`Z = 0` when `X = Y = 0`).
//!
//! Exact moments come from pmf summation; leading-order asymptotics use
//! falling factorials. The normalization entries of the observed projection
//! are `sqrt(m) W` with `W ~ DampedBinomial(1, m - 1, B)`.

use rand_distr::{Binomial, Distribution};
use serde::Serialize;

use crate::error::{Result, RlgError};
use crate::rng::{rng_from_seed, Rng};

/// Upper limit on `(a + 1)(b + 1)` for the exhaustive product-pmf sum.
pub const EXHAUSTIVE_LIMIT: u64 = 10_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DampedBinomialDist {
    a: u64,
    b: u64,
    p: f64,
}

impl DampedBinomialDist {
    pub fn new(a: u64, b: u64, p: f64) -> Result<Self> {
        if a + b == 0 {
            return Err(RlgError::InvalidParameter("need a + b >= 1".into()));
        }
        if !(p > 0.0 && p <= 1.0) {
            return Err(RlgError::InvalidParameter(format!("p = {p} outside (0, 1]")));
        }
        Ok(DampedBinomialDist { a, b, p })
    }

    pub fn a(&self) -> u64 {
        self.a
    }
    pub fn b(&self) -> u64 {
        self.b
    }
    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn sample(&self, rng: &mut Rng) -> f64 {
        let x = Binomial::new(self.a, self.p).expect("validated").sample(rng);
        let y = Binomial::new(self.b, self.p).expect("validated").sample(rng);
        if x + y == 0 {
            0.0
        } else {
            x as f64 / ((x + y) as f64).sqrt()
        }
    }
}

/// `count` independent draws from a stream seeded by `seed`.
pub fn sample(d: &DampedBinomialDist, count: usize, seed: u64) -> Vec<f64> {
    let mut rng = rng_from_seed(seed);
    (0..count).map(|_| d.sample(&mut rng)).collect()
}

/// `Binomial(n, p)` pmf, computed in log space.
pub fn binomial_pmf(n: u64, p: f64) -> Vec<f64> {
    let n = n as usize;
    if p <= 0.0 {
        let mut v = vec![0.0; n + 1];
        v[0] = 1.0;
        return v;
    }
    if p >= 1.0 {
        let mut v = vec![0.0; n + 1];
        v[n] = 1.0;
        return v;
    }
    let mut ln_fact = Vec::with_capacity(n + 1);
    ln_fact.push(0.0f64);
    for i in 1..=n {
        ln_fact.push(ln_fact[i - 1] + (i as f64).ln());
    }
    let (lp, lq) = (p.ln(), (-p).ln_1p());
    (0..=n)
        .map(|k| (ln_fact[n] - ln_fact[k] - ln_fact[n - k] + k as f64 * lp + (n - k) as f64 * lq).exp())
        .collect()
}

/// `E[sqrt(T)]` for `T ~ Binomial(n, p)`, by pmf summation.
pub fn binomial_sqrt_mean(n: u64, p: f64) -> f64 {
    binomial_pmf(n, p)
        .iter()
        .enumerate()
        .map(|(t, w)| w * (t as f64).sqrt())
        .sum()
}

/// Raw moments `E[Z^k]`, `k = 1..=4`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Moments {
    pub first: f64,
    pub second: f64,
    pub third: f64,
    pub fourth: f64,
}

impl Moments {
    pub fn variance(&self) -> f64 {
        self.second - self.first * self.first
    }

    /// `Var((Z - EZ)^2) = Var(Z^2) + 4 E[Z]^2 Var(Z) - 4 E[Z] (E[Z^3] - E[Z^2] E[Z])`.
    pub fn centered_square_variance(&self) -> f64 {
        centered_square_variance_identity(self)
    }
}

/// Evaluates the centered-square variance identity on a set of moments.
pub fn centered_square_variance_identity(m: &Moments) -> f64 {
    let var_z2 = m.fourth - m.second * m.second;
    let var_z = m.second - m.first * m.first;
    var_z2 + 4.0 * m.first * m.first * var_z - 4.0 * m.first * (m.third - m.second * m.first)
}

fn check_exhaustive(d: &DampedBinomialDist) -> Result<()> {
    let outcomes = (d.a + 1).saturating_mul(d.b + 1);
    if outcomes > EXHAUSTIVE_LIMIT {
        return Err(RlgError::Intractable(format!(
            "{outcomes} outcomes exceed the exhaustive limit {EXHAUSTIVE_LIMIT}"
        )));
    }
    Ok(())
}

/// All four raw moments by summing over the full `(X, Y)` product pmf.
pub fn exhaustive_moments(d: &DampedBinomialDist) -> Result<Moments> {
    check_exhaustive(d)?;
    let px = binomial_pmf(d.a, d.p);
    let py = binomial_pmf(d.b, d.p);
    let mut acc = [0.0f64; 4];
    for (x, wx) in px.iter().enumerate().skip(1) {
        if *wx == 0.0 {
            continue;
        }
        let mut row = [0.0f64; 4];
        for (y, wy) in py.iter().enumerate() {
            let z = x as f64 / ((x + y) as f64).sqrt();
            let z2 = z * z;
            row[0] += wy * z;
            row[1] += wy * z2;
            row[2] += wy * z2 * z;
            row[3] += wy * z2 * z2;
        }
        for k in 0..4 {
            acc[k] += wx * row[k];
        }
    }
    Ok(Moments {
        first: acc[0],
        second: acc[1],
        third: acc[2],
        fourth: acc[3],
    })
}

/// `E[Z^k]` by exhaustive summation, any `k >= 1`.
pub fn exhaustive_moment(d: &DampedBinomialDist, k: u32) -> Result<f64> {
    check_exhaustive(d)?;
    let px = binomial_pmf(d.a, d.p);
    let py = binomial_pmf(d.b, d.p);
    let mut total = 0.0;
    for (x, wx) in px.iter().enumerate().skip(1) {
        let row: f64 = py
            .iter()
            .enumerate()
            .map(|(y, wy)| wy * (x as f64 / ((x + y) as f64).sqrt()).powi(k as i32))
            .sum();
        total += wx * row;
    }
    Ok(total)
}

/// `E[Z^k]`: `k = 1` via `E[Z] = a/(a+b) E[sqrt T]`, `T ~ Bin(a+b, p)`;
/// `k = 2` via the closed form; other orders by exhaustive summation.
pub fn exact_moment(d: &DampedBinomialDist, k: u32) -> Result<f64> {
    let (a, b, p) = (d.a as f64, d.b as f64, d.p);
    let s = a + b;
    match k {
        0 => Err(RlgError::InvalidParameter("moment order must be >= 1".into())),
        1 => Ok(a / s * binomial_sqrt_mean(d.a + d.b, p)),
        2 if d.a + d.b == 1 => Ok(a * p),
        2 => {
            let s2 = s * (s - 1.0);
            Ok(a * (a - 1.0) / s2 * s * p + a * b / s2 * (1.0 - (1.0 - p).powf(s)))
        }
        _ => exhaustive_moment(d, k),
    }
}

/// Leading-order moments for `a, b >= 1` (intended regime `b ~ a^2`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AsymptoticMoments {
    pub moments: Moments,
    pub variance: f64,
    pub centered_square_variance: f64,
}

fn falling(x: f64, k: u32) -> f64 {
    (0..k).map(|i| x - i as f64).product()
}

/// Numerator over falling factorial, with `0 / 0 := 0` (those terms vanish
/// because `(a)_k = 0` whenever `(a+b)_k = 0`).
fn ratio(num: f64, den: f64) -> f64 {
    if num == 0.0 {
        0.0
    } else {
        num / den
    }
}

pub fn asymptotic_moments(d: &DampedBinomialDist) -> Result<AsymptoticMoments> {
    if d.a == 0 || d.b == 0 {
        return Err(RlgError::InvalidParameter("asymptotic moments need a >= 1 and b >= 1".into()));
    }
    let (a, b, p) = (d.a as f64, d.b as f64, d.p);
    let s = a + b;
    let sp = s * p;
    let first = a / s * sp.sqrt();
    // (a)_k [ (a+b)p + c b / (a-k+1) ] rewritten to avoid dividing by a - k + 1
    let second = ratio(falling(a, 2) * sp + falling(a, 1) * b, falling(s, 2));
    let third = sp.sqrt() * ratio(falling(a, 3) * sp + 3.0 * falling(a, 2) * b, falling(s, 3));
    let fourth = sp * ratio(falling(a, 4) * sp + 6.0 * falling(a, 3) * b, falling(s, 4));
    let moments = Moments {
        first,
        second,
        third,
        fourth,
    };
    Ok(AsymptoticMoments {
        moments,
        variance: a * b * (1.0 - p) / falling(s, 2),
        centered_square_variance: centered_square_variance_identity(&moments),
    })
}

/// `(sqrt(B) - (1-B)/(2 sqrt(B) m), sqrt(B))`, the interval containing the
/// block mean of the observed-projection normalization.
pub fn mu_bounds(prob: f64, m: u64) -> Result<(f64, f64)> {
    if !(prob > 0.0 && prob <= 1.0) {
        return Err(RlgError::InvalidParameter(format!("B = {prob} outside (0, 1]")));
    }
    if m == 0 {
        return Err(RlgError::InvalidParameter("block size must be >= 1".into()));
    }
    let r = prob.sqrt();
    Ok((r - (1.0 - prob) / (2.0 * r * m as f64), r))
}

/// Exact `μ = E[sqrt(m) W]`, `W ~ DampedBinomial(1, m-1, B)`, which reduces
/// to `E[sqrt T] / sqrt(m)` with `T ~ Binomial(m, B)`. Zero when `B = 0`.
pub fn block_mean(prob: f64, m: u64) -> f64 {
    if prob <= 0.0 || m == 0 {
        return 0.0;
    }
    binomial_sqrt_mean(m, prob) / (m as f64).sqrt()
}

/// Bounds on `E[sqrt V]` for `V` with mean `mean` and variance `var`:
/// `mean^{1/2} - var / (2 mean^{3/2}) <= E[sqrt V] <= mean^{1/2}`.
pub fn sqrt_mean_bounds(mean: f64, var: f64) -> (f64, f64) {
    (mean.sqrt() - var / (2.0 * mean.powf(1.5)), mean.sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dist(a: u64, b: u64, p: f64) -> DampedBinomialDist {
        DampedBinomialDist::new(a, b, p).unwrap()
    }

    #[test]
    fn validation() {
        assert!(DampedBinomialDist::new(0, 0, 0.5).is_err());
        assert!(DampedBinomialDist::new(1, 0, 0.0).is_err());
        assert!(DampedBinomialDist::new(1, 0, 1.2).is_err());
        assert!(asymptotic_moments(&dist(3, 0, 0.5)).is_err());
        assert!(exact_moment(&dist(3, 1, 0.5), 0).is_err());
    }

    #[test]
    fn degenerate_samples() {
        let d = dist(4, 5, 1.0);
        assert!(sample(&d, 50, 1).iter().all(|&z| (z - 4.0 / 3.0).abs() < 1e-15));
        let zero = dist(0, 5, 0.4);
        assert!(sample(&zero, 50, 1).iter().all(|&z| z == 0.0));
    }

    #[test]
    fn bernoulli_root() {
        let d = dist(1, 0, 0.37);
        assert!((exact_moment(&d, 1).unwrap() - 0.37).abs() < 1e-15);
        assert!((exhaustive_moment(&d, 1).unwrap() - 0.37).abs() < 1e-15);
        assert!((exact_moment(&d, 2).unwrap() - 0.37).abs() < 1e-15);
    }

    #[test]
    fn one_one_half() {
        // outcomes (x,y): (1,0) -> 1, (1,1) -> 1/sqrt2, each with prob 1/4
        let expected = 0.25 + 0.25 / 2f64.sqrt();
        let d = dist(1, 1, 0.5);
        assert!((exact_moment(&d, 1).unwrap() - expected).abs() < 1e-15);
        assert!((exhaustive_moment(&d, 1).unwrap() - expected).abs() < 1e-15);
        // (1/2) E[sqrt T], T ~ Bin(2, 1/2)
        let via_t = 0.5 * (0.5 * 1.0 + 0.25 * 2f64.sqrt());
        assert!((via_t - expected).abs() < 1e-15);
        assert!((expected - 0.426777).abs() < 1e-6);
    }

    #[test]
    fn second_moment_closed_form() {
        let d = dist(3, 5, 0.4);
        let ex = exhaustive_moment(&d, 2).unwrap();
        assert!((ex - exact_moment(&d, 2).unwrap()).abs() < 1e-14);
    }

    #[test]
    fn variance_leading_term() {
        let a = asymptotic_moments(&dist(10, 90, 0.3)).unwrap();
        assert!((a.variance - 10.0 * 90.0 * 0.7 / (100.0 * 99.0)).abs() < 1e-15);
        assert!((a.variance - 0.063636).abs() < 1e-6);
    }

    #[test]
    fn mu_scale_from_first_moment() {
        for m in [10u64, 100, 1000] {
            let b = 0.3;
            let lead = asymptotic_moments(&dist(1, m - 1, b)).unwrap().moments.first;
            assert!((lead * (m as f64).sqrt() - b.sqrt()).abs() < 1e-12);
        }
    }

    #[test]
    fn second_moment_asymptotic_error() {
        let d = dist(20, 380, 0.5);
        let ex = exhaustive_moments(&d).unwrap().second;
        let asy = asymptotic_moments(&d).unwrap().moments.second;
        assert!((ex - asy).abs() <= 10.0 / 400.0);
    }

    #[test]
    fn mu_bounds_examples() {
        assert_eq!(mu_bounds(1.0, 7).unwrap(), (1.0, 1.0));
        assert!((block_mean(1.0, 7) - 1.0).abs() < 1e-15);
        let (lo, hi) = mu_bounds(0.25, 100).unwrap();
        assert!((lo - 0.4925).abs() < 1e-12 && (hi - 0.5).abs() < 1e-15);
        let (lo, hi) = mu_bounds(0.3, 50).unwrap();
        let mu = block_mean(0.3, 50);
        assert!(lo <= mu && mu <= hi);
        assert!(mu_bounds(0.0, 10).is_err());
        assert_eq!(block_mean(0.0, 10), 0.0);
    }

    #[test]
    fn block_mean_equals_scaled_first_moment() {
        let m = 40;
        let d = dist(1, m - 1, 0.35);
        let via_dist = (m as f64).sqrt() * exhaustive_moment(&d, 1).unwrap();
        assert!((via_dist - block_mean(0.35, m)).abs() < 1e-13);
    }

    #[test]
    fn degenerate_identity_is_zero() {
        let m = exhaustive_moments(&dist(3, 4, 1.0)).unwrap();
        assert!(m.centered_square_variance().abs() < 1e-14);
    }

    #[test]
    fn intractable_guard() {
        let d = dist(100_000, 1_000, 0.5);
        assert!(matches!(exhaustive_moment(&d, 3), Err(RlgError::Intractable(_))));
        assert!(exact_moment(&d, 1).is_ok());
    }
}
