//! Line-graph spectra through the `n × n` signless Laplacian, closed-form
//! complete-graph spectra, eigenvalue concentration bounds and a randomized
//! partial SVD.

use nalgebra::DMatrix;
use rand_distr::{Distribution, StandardNormal};
use serde::Serialize;

use crate::error::{Result, RlgError};
use crate::graph::{pair_count, Graph};
use crate::line_graph::build_line_graph;
use crate::linalg::{fix_signs, orthonormalize, sym_eigenvalues_desc, thin_svd, LinearOperator, Svd};
use crate::rng::rng_from_seed;

/// Largest order for which the `n × n` problem is solved densely.
pub const TRANSFER_MAX_N: usize = 4000;

const FAMILY_TOL: f64 = 1e-8;

/// Eigenvalues sorted nonincreasing, with the sizes of the `-2` and `n - 4`
/// families.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpectrumResult {
    pub eigenvalues: Vec<f64>,
    pub mult_minus_two: usize,
    pub mult_n_minus_four: usize,
}

impl SpectrumResult {
    fn from_values(mut eigenvalues: Vec<f64>, n: usize) -> Self {
        eigenvalues.sort_by(|a, b| b.total_cmp(a));
        let count = |target: f64| {
            eigenvalues
                .iter()
                .filter(|&&x| (x - target).abs() <= FAMILY_TOL)
                .count()
        };
        SpectrumResult {
            mult_minus_two: count(-2.0),
            mult_n_minus_four: count(n as f64 - 4.0),
            eigenvalues,
        }
    }

    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    /// `λ_ℓ` (1-based), with `λ_ℓ = -2` beyond the order of the matrix.
    pub fn lambda(&self, l: usize) -> f64 {
        self.eigenvalues.get(l.wrapping_sub(1)).copied().unwrap_or(-2.0)
    }
}

/// Spectrum of `A(L(G))` from the eigenvalues of `A(G) + D`.
pub fn line_spectrum_via_transfer(g: &Graph) -> Result<SpectrumResult> {
    let n = g.n();
    if n > TRANSFER_MAX_N {
        return Err(RlgError::SizeGuard {
            order: n,
            guard: TRANSFER_MAX_N,
        });
    }
    let m = g.edge_count();
    let mu = sym_eigenvalues_desc(&g.signless_laplacian());
    let mut values: Vec<f64>;
    if m >= n {
        values = mu.iter().map(|x| x - 2.0).collect();
        values.extend(std::iter::repeat_n(-2.0, m - n));
    } else {
        // the n - m smallest eigenvalues of the PSD matrix BB^T are its kernel
        values = mu[..m].iter().map(|x| x - 2.0).collect();
    }
    Ok(SpectrumResult::from_values(values, n))
}

/// Spectrum of `A(L(G))` by dense eigendecomposition of the `m̂ × m̂` matrix.
pub fn line_spectrum_dense(g: &Graph) -> Result<SpectrumResult> {
    let a = build_line_graph(g).dense_adjacency()?;
    Ok(SpectrumResult::from_values(sym_eigenvalues_desc(&a), g.n()))
}

/// `σ(A(L(K_n))) = {2n-4, n-4 (×(n-1)), -2 (×(C(n,2)-n))}`.
pub fn complete_line_spectrum(n: usize) -> Result<SpectrumResult> {
    if n < 3 {
        return Err(RlgError::InvalidParameter(format!("complete line spectrum needs n >= 3, got {n}")));
    }
    let mut values = vec![2.0 * n as f64 - 4.0];
    values.extend(std::iter::repeat_n(n as f64 - 4.0, n - 1));
    values.extend(std::iter::repeat_n(-2.0, pair_count(n) - n));
    Ok(SpectrumResult::from_values(values, n))
}

/// `(λ_1, λ_n)` of `A(L(G))`, with `λ_ℓ = -2` for `ℓ > m̂`.
pub fn extreme_line_eigenvalues(g: &Graph) -> Result<(f64, f64)> {
    let s = line_spectrum_via_transfer(g)?;
    Ok((s.lambda(1), s.lambda(g.n())))
}

/// Expectation and tail bounds on the extreme nontrivial line-graph
/// eigenvalues, optionally with empirical exceedance counts.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConcentrationReport {
    pub n: usize,
    pub p_min: f64,
    pub p_max: f64,
    pub t_low: f64,
    pub t_high: f64,
    /// Lower bound on `E[λ_n]`.
    pub expected_lambda_n_lower: f64,
    /// Upper bound on `E[λ_1]`.
    pub expected_lambda_1_upper: f64,
    /// `λ_n` at or below this value is a lower-tail event.
    pub lower_tail_threshold: f64,
    pub lower_tail_bound: f64,
    /// `λ_1` at or above this value is an upper-tail event.
    pub upper_tail_threshold: f64,
    pub upper_tail_bound: f64,
    pub empirical: Option<EmpiricalConcentration>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EmpiricalConcentration {
    pub replicates: usize,
    pub lower_exceedances: usize,
    pub upper_exceedances: usize,
    pub mean_lambda_n: f64,
    pub mean_lambda_1: f64,
}

impl EmpiricalConcentration {
    pub fn lower_frequency(&self) -> f64 {
        self.lower_exceedances as f64 / self.replicates as f64
    }
    pub fn upper_frequency(&self) -> f64 {
        self.upper_exceedances as f64 / self.replicates as f64
    }
}

fn check_ranges(p_min: f64, p_max: f64, t_low: f64, t_high: f64) -> Result<()> {
    if !(p_min > 0.0 && p_min <= p_max && p_max <= 1.0) {
        return Err(RlgError::InvalidParameter(format!(
            "need 0 < p_min <= p_max <= 1, got p_min = {p_min}, p_max = {p_max}"
        )));
    }
    if !(0.0..1.0).contains(&t_low) {
        return Err(RlgError::InvalidParameter(format!("t_low = {t_low} outside [0, 1)")));
    }
    if !(t_high >= std::f64::consts::E) {
        return Err(RlgError::InvalidParameter(format!("t_high = {t_high} < e")));
    }
    Ok(())
}

/// Bounds for independent edges with probabilities in `[p_min, p_max]`.
///
/// The upper expectation constant is `3.44 = 2 · 1.72` applied to
/// `p_max (n - 1)`.
pub fn concentration_bounds(
    n: usize,
    p_min: f64,
    p_max: f64,
    t_low: f64,
    t_high: f64,
) -> Result<ConcentrationReport> {
    check_ranges(p_min, p_max, t_low, t_high)?;
    if n < 3 {
        return Err(RlgError::InvalidParameter(format!("n = {n} < 3")));
    }
    let nf = n as f64;
    let ln = nf.ln();
    let e = std::f64::consts::E;
    Ok(ConcentrationReport {
        n,
        p_min,
        p_max,
        t_low,
        t_high,
        expected_lambda_n_lower: 0.63 * p_min * (nf - 2.0) - 2.0 * (ln + 1.0),
        expected_lambda_1_upper: 3.44 * p_max * (nf - 1.0) + 2.0 * (ln - 1.0),
        lower_tail_threshold: t_low * p_min * (nf - 2.0) - 2.0,
        lower_tail_bound: clip_prob(nf * (-(1.0 - t_low).powi(2) * p_min * (nf - 2.0) / 4.0).exp()),
        upper_tail_threshold: t_high * p_max * 2.0 * (nf - 1.0) - 2.0,
        upper_tail_bound: clip_prob(nf * (e / t_high).powf(t_high * p_min * (nf - 1.0))),
        empirical: None,
    })
}

/// Tail bounds when edges outside a support graph `support` never appear;
/// `μ_1, μ_n` are the extreme nontrivial eigenvalues of `A(L(K)) + 2I`.
/// Expectation fields are left as NaN since no expectation bound is given in
/// this setting.
pub fn support_concentration_bounds(
    support: &Graph,
    p_min: f64,
    p_max: f64,
    t_low: f64,
    t_high: f64,
) -> Result<ConcentrationReport> {
    check_ranges(p_min, p_max, t_low, t_high)?;
    let n = support.n();
    let spec = line_spectrum_via_transfer(support)?;
    let mu_1 = spec.lambda(1) + 2.0;
    let mu_n = spec.lambda(n) + 2.0;
    let nf = n as f64;
    let e = std::f64::consts::E;
    Ok(ConcentrationReport {
        n,
        p_min,
        p_max,
        t_low,
        t_high,
        expected_lambda_n_lower: f64::NAN,
        expected_lambda_1_upper: f64::NAN,
        lower_tail_threshold: t_low * p_min * mu_n - 2.0,
        lower_tail_bound: clip_prob(nf * (-(1.0 - t_low).powi(2) * p_min * mu_n / 4.0).exp()),
        upper_tail_threshold: t_high * p_max * mu_1 - 2.0,
        upper_tail_bound: clip_prob(nf * (e / t_high).powf(t_high * p_min * mu_1 / 2.0)),
        empirical: None,
    })
}

fn clip_prob(x: f64) -> f64 {
    if x.is_nan() {
        1.0
    } else {
        x.clamp(0.0, 1.0)
    }
}

impl ConcentrationReport {
    /// Counts tail events over a sample of `(λ_1, λ_n)` pairs.
    pub fn with_empirical(mut self, extremes: &[(f64, f64)]) -> Self {
        let r = extremes.len();
        let lower = extremes.iter().filter(|(_, ln)| *ln <= self.lower_tail_threshold).count();
        let upper = extremes.iter().filter(|(l1, _)| *l1 >= self.upper_tail_threshold).count();
        self.empirical = Some(EmpiricalConcentration {
            replicates: r,
            lower_exceedances: lower,
            upper_exceedances: upper,
            mean_lambda_n: extremes.iter().map(|x| x.1).sum::<f64>() / r as f64,
            mean_lambda_1: extremes.iter().map(|x| x.0).sum::<f64>() / r as f64,
        });
        self
    }
}

/// Randomized subspace iteration oversampling.
pub const SVD_OVERSAMPLING: usize = 10;
/// Iteration cap for [`partial_svd`].
pub const SVD_MAX_ITERATIONS: usize = 300;

/// Returned when [`partial_svd`] exhausts its iterations; carries the best
/// iterate.
#[derive(Debug, Clone)]
pub struct PartialSvdFailure {
    pub best: Svd,
    pub iterations: usize,
    pub residual: f64,
}

impl From<PartialSvdFailure> for RlgError {
    fn from(f: PartialSvdFailure) -> Self {
        RlgError::NoConvergence {
            iterations: f.iterations,
            residual: f.residual,
        }
    }
}

/// Top-`k` singular triplets of `op` by randomized subspace iteration.
///
/// Stops once `‖A v_i - σ_i u_i‖ ≤ tol · σ_1` for every retained triplet.
pub fn partial_svd<O: LinearOperator + ?Sized>(
    op: &O,
    k: usize,
    tol: f64,
    seed: u64,
) -> std::result::Result<Svd, PartialSvdFailure> {
    let (rows, cols) = (op.nrows(), op.ncols());
    assert!(k >= 1 && k <= rows.min(cols), "k = {k} outside 1..=min({rows}, {cols})");
    assert!(tol > 0.0);
    let width = (k + SVD_OVERSAMPLING).min(rows.min(cols));
    let mut rng = rng_from_seed(seed);
    let omega = DMatrix::from_fn(cols, width, |_, _| StandardNormal.sample(&mut rng));
    let mut basis = orthonormalize(&op.apply(&omega));

    let mut best: Option<(Svd, f64)> = None;
    for it in 1..=SVD_MAX_ITERATIONS {
        let z = orthonormalize(&op.apply_transpose(&basis));
        basis = orthonormalize(&op.apply(&z));

        // Rayleigh-Ritz on the current range basis
        let small = op.apply_transpose(&basis); // cols × width = (Q^T A)^T
        let inner = thin_svd(&small); // small = V_s S W^T  =>  Q^T A = W S V_s^T
        let mut u = &basis * &inner.v;
        let mut v = inner.u.clone();
        fix_signs(&mut u, &mut v);
        let svd = Svd {
            u,
            singular_values: inner.singular_values.clone(),
            v,
        }
        .truncate(k);

        let av = op.apply(&svd.v);
        let sigma1 = svd.singular_values[0].max(f64::MIN_POSITIVE);
        let residual = (0..k)
            .map(|i| (av.column(i) - svd.u.column(i) * svd.singular_values[i]).norm())
            .fold(0.0, f64::max)
            / sigma1;
        if residual <= tol {
            return Ok(svd);
        }
        if best.as_ref().is_none_or(|(_, r)| residual < *r) {
            best = Some((svd, residual));
        }
        if it == SVD_MAX_ITERATIONS {
            break;
        }
    }
    let (best, residual) = best.expect("at least one iteration");
    Err(PartialSvdFailure {
        best,
        iterations: SVD_MAX_ITERATIONS,
        residual,
    })
}
