//! Full-covariance Gaussian mixtures fitted by EM from k-means++ starts.

use nalgebra::{DMatrix, DVector};
use rand::Rng as _;
use rayon::prelude::*;

use super::Clustering;
use crate::error::{Result, RlgError};
use crate::rng::{derive_seed, rng_from_seed, Purpose, Rng};

const LN_2PI: f64 = 1.837_877_066_409_345_5;
const REINIT_ATTEMPTS: u64 = 3;
const LLOYD_STEPS: usize = 10;

#[derive(Debug, Clone, PartialEq)]
pub struct GmmOptions {
    pub restarts: usize,
    pub max_iterations: usize,
    /// Converged once the mean per-point log-likelihood moves less than this.
    pub tolerance: f64,
    /// Fits whose hard assignment leaves a component smaller than this are
    /// treated like empty components and restarted.
    pub min_component_size: usize,
}

impl Default for GmmOptions {
    fn default() -> Self {
        GmmOptions {
            restarts: 5,
            max_iterations: 300,
            tolerance: 1e-6,
            min_component_size: 1,
        }
    }
}

#[derive(Debug, Clone)]
pub struct GmmFit {
    pub clustering: Clustering,
    pub weights: Vec<f64>,
    pub means: Vec<DVector<f64>>,
    pub covariances: Vec<DMatrix<f64>>,
    pub log_likelihood: f64,
    /// Log-likelihood before each M step of the winning restart.
    pub history: Vec<f64>,
    /// False when no restart met the component-size requirement; the
    /// clustering then has fewer than the requested labels.
    pub complete: bool,
}

impl GmmFit {
    pub fn covariance_traces(&self) -> Vec<f64> {
        self.covariances.iter().map(|c| c.trace()).collect()
    }

    pub fn mean_covariance_trace(&self) -> f64 {
        let t = self.covariance_traces();
        t.iter().sum::<f64>() / t.len() as f64
    }
}

pub fn gmm_fit(x: &DMatrix<f64>, k: usize, seed: u64) -> Result<GmmFit> {
    gmm_fit_with(x, k, seed, &GmmOptions::default())
}

pub fn gmm_fit_with(x: &DMatrix<f64>, k: usize, seed: u64, opts: &GmmOptions) -> Result<GmmFit> {
    let (n, d) = x.shape();
    if k == 0 || n < k {
        return Err(RlgError::InvalidParameter(format!("{n} points cannot form {k} components")));
    }
    if d == 0 {
        return Err(RlgError::InvalidParameter("points have no coordinates".into()));
    }
    if x.iter().any(|v| !v.is_finite()) {
        return Err(RlgError::InvalidParameter("non-finite coordinate".into()));
    }
    if opts.restarts == 0 {
        return Err(RlgError::InvalidParameter("at least one restart required".into()));
    }
    let data = Data::new(x);
    let ridge = 1e-6 * data.total_variance().max(1e-12);
    let fits: Vec<Fit> = (0..opts.restarts)
        .into_par_iter()
        .map(|r| restart(&data, k, derive_seed(seed, r as u64, Purpose::Gmm), ridge, opts))
        .collect();
    let best = fits
        .into_iter()
        .reduce(|a, b| {
            let better = (b.complete && !a.complete)
                || (b.complete == a.complete && b.log_likelihood > a.log_likelihood);
            if better { b } else { a }
        })
        .expect("at least one restart");
    Ok(best.finish(d))
}

struct Data {
    rows: Vec<f64>,
    n: usize,
    d: usize,
}

impl Data {
    fn new(x: &DMatrix<f64>) -> Self {
        let (n, d) = x.shape();
        let mut rows = Vec::with_capacity(n * d);
        for r in 0..n {
            for c in 0..d {
                rows.push(x[(r, c)]);
            }
        }
        Data { rows, n, d }
    }

    fn row(&self, i: usize) -> &[f64] {
        &self.rows[i * self.d..(i + 1) * self.d]
    }

    fn total_variance(&self) -> f64 {
        let mut mean = vec![0.0; self.d];
        for i in 0..self.n {
            for (m, v) in mean.iter_mut().zip(self.row(i)) {
                *m += v;
            }
        }
        mean.iter_mut().for_each(|m| *m /= self.n as f64);
        let mut total = 0.0;
        for i in 0..self.n {
            for (m, v) in mean.iter().zip(self.row(i)) {
                total += (v - m) * (v - m);
            }
        }
        total / self.n as f64
    }
}

struct Fit {
    labels: Vec<usize>,
    weights: Vec<f64>,
    means: Vec<Vec<f64>>,
    covs: Vec<Vec<f64>>,
    log_likelihood: f64,
    history: Vec<f64>,
    complete: bool,
}

impl Fit {
    fn finish(self, d: usize) -> GmmFit {
        let k = self.weights.len();
        let clustering = if self.complete {
            Clustering::new(self.labels, k).expect("every component used")
        } else {
            Clustering::from_ids(&self.labels)
        };
        GmmFit {
            clustering,
            weights: self.weights,
            means: self.means.into_iter().map(DVector::from_vec).collect(),
            covariances: self.covs.into_iter().map(|c| DMatrix::from_row_slice(d, d, &c)).collect(),
            log_likelihood: self.log_likelihood,
            history: self.history,
            complete: self.complete,
        }
    }
}

fn restart(data: &Data, k: usize, seed: u64, ridge: f64, opts: &GmmOptions) -> Fit {
    let mut fallback: Option<Fit> = None;
    for attempt in 0..REINIT_ATTEMPTS {
        let mut rng = rng_from_seed(derive_seed(seed, attempt, Purpose::Other(0)));
        let Some(fit) = em(data, k, &mut rng, ridge, opts) else {
            continue;
        };
        if fit.complete {
            return fit;
        }
        if fallback.as_ref().is_none_or(|f| fit.log_likelihood > f.log_likelihood) {
            fallback = Some(fit);
        }
    }
    fallback.unwrap_or_else(|| single_component(data, k, ridge))
}

/// All points in component 0; used only when every attempt collapsed.
fn single_component(data: &Data, k: usize, ridge: f64) -> Fit {
    let d = data.d;
    let labels = vec![0; data.n];
    let (mean, cov) = weighted_moments(data, &vec![1.0; data.n], ridge);
    let mut means = vec![mean.clone(); k];
    means[0] = mean;
    Fit {
        labels,
        weights: (0..k).map(|j| if j == 0 { 1.0 } else { 0.0 }).collect(),
        means,
        covs: vec![cov; k],
        log_likelihood: f64::NEG_INFINITY,
        history: Vec::new(),
        complete: k == 1 && d > 0,
    }
}

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

fn kmeans_pp(data: &Data, k: usize, rng: &mut Rng) -> Vec<Vec<f64>> {
    let mut centers = vec![data.row(rng.random_range(0..data.n)).to_vec()];
    let mut dist: Vec<f64> = (0..data.n).map(|i| sq_dist(data.row(i), &centers[0])).collect();
    while centers.len() < k {
        let total: f64 = dist.iter().sum();
        let pick = if total > 0.0 {
            let mut target = rng.random::<f64>() * total;
            let mut chosen = data.n - 1;
            for (i, &w) in dist.iter().enumerate() {
                if target < w {
                    chosen = i;
                    break;
                }
                target -= w;
            }
            chosen
        } else {
            rng.random_range(0..data.n)
        };
        let c = data.row(pick).to_vec();
        for (i, dd) in dist.iter_mut().enumerate() {
            *dd = dd.min(sq_dist(data.row(i), &c));
        }
        centers.push(c);
    }
    centers
}

fn nearest(centers: &[Vec<f64>], x: &[f64]) -> usize {
    let mut best = 0;
    let mut best_d = f64::INFINITY;
    for (j, c) in centers.iter().enumerate() {
        let dd = sq_dist(x, c);
        if dd < best_d {
            best_d = dd;
            best = j;
        }
    }
    best
}

fn weighted_moments(data: &Data, w: &[f64], ridge: f64) -> (Vec<f64>, Vec<f64>) {
    let d = data.d;
    let total: f64 = w.iter().sum();
    let mut mean = vec![0.0; d];
    for i in 0..data.n {
        for (m, v) in mean.iter_mut().zip(data.row(i)) {
            *m += w[i] * v;
        }
    }
    mean.iter_mut().for_each(|m| *m /= total);
    let mut cov = vec![0.0; d * d];
    let mut diff = vec![0.0; d];
    for i in 0..data.n {
        if w[i] == 0.0 {
            continue;
        }
        for (t, (v, m)) in diff.iter_mut().zip(data.row(i).iter().zip(&mean)) {
            *t = v - m;
        }
        for a in 0..d {
            for b in 0..=a {
                cov[a * d + b] += w[i] * diff[a] * diff[b];
            }
        }
    }
    for a in 0..d {
        for b in 0..=a {
            let v = cov[a * d + b] / total;
            cov[a * d + b] = v;
            cov[b * d + a] = v;
        }
        cov[a * d + a] += ridge;
    }
    (mean, cov)
}

/// Lower Cholesky factor, row-major; adds ridge until positive definite.
fn cholesky(cov: &[f64], d: usize, ridge: f64) -> (Vec<f64>, f64) {
    let mut extra = 0.0;
    loop {
        let mut l = vec![0.0; d * d];
        let mut ok = true;
        'outer: for i in 0..d {
            for j in 0..=i {
                let mut s = cov[i * d + j] + if i == j { extra } else { 0.0 };
                for p in 0..j {
                    s -= l[i * d + p] * l[j * d + p];
                }
                if i == j {
                    if s <= 0.0 || !s.is_finite() {
                        ok = false;
                        break 'outer;
                    }
                    l[i * d + i] = s.sqrt();
                } else {
                    l[i * d + j] = s / l[j * d + j];
                }
            }
        }
        if ok {
            let log_det = 2.0 * (0..d).map(|i| l[i * d + i].ln()).sum::<f64>();
            return (l, log_det);
        }
        extra = if extra == 0.0 { ridge.max(1e-300) } else { extra * 10.0 };
    }
}

fn mahalanobis(l: &[f64], d: usize, x: &[f64], mean: &[f64], z: &mut [f64]) -> f64 {
    for i in 0..d {
        let mut s = x[i] - mean[i];
        for p in 0..i {
            s -= l[i * d + p] * z[p];
        }
        z[i] = s / l[i * d + i];
    }
    z.iter().map(|v| v * v).sum()
}

fn em(data: &Data, k: usize, rng: &mut Rng, ridge: f64, opts: &GmmOptions) -> Option<Fit> {
    let (n, d) = (data.n, data.d);
    let mut centers = kmeans_pp(data, k, rng);
    let mut assign = vec![0usize; n];
    for _ in 0..LLOYD_STEPS {
        for (i, a) in assign.iter_mut().enumerate() {
            *a = nearest(&centers, data.row(i));
        }
        let mut sums = vec![vec![0.0; d]; k];
        let mut counts = vec![0usize; k];
        for (i, &a) in assign.iter().enumerate() {
            counts[a] += 1;
            for (s, v) in sums[a].iter_mut().zip(data.row(i)) {
                *s += v;
            }
        }
        for j in 0..k {
            if counts[j] > 0 {
                centers[j] = sums[j].iter().map(|s| s / counts[j] as f64).collect();
            }
        }
    }
    let mut resp = vec![0.0; n * k];
    for (i, &a) in assign.iter().enumerate() {
        resp[i * k + a] = 1.0;
    }

    // second moments are accumulated about the global mean to limit cancellation
    let mut center = vec![0.0; d];
    for i in 0..n {
        for (c, v) in center.iter_mut().zip(data.row(i)) {
            *c += v;
        }
    }
    center.iter_mut().for_each(|c| *c /= n as f64);

    let mut weights = vec![0.0; k];
    let mut means = vec![vec![0.0; d]; k];
    let mut covs = vec![vec![0.0; d * d]; k];
    let mut history = Vec::new();
    let mut nk = vec![0.0; k];
    let mut sx = vec![0.0; k * d];
    let mut sxx = vec![0.0; k * d * d];
    let mut x = vec![0.0; d];
    let mut z = vec![0.0; d];
    let mut log_r = vec![0.0; k];
    let mut previous = f64::NEG_INFINITY;
    let mut ll = f64::NEG_INFINITY;
    for it in 0..=opts.max_iterations {
        // M step from current responsibilities
        nk.iter_mut().for_each(|v| *v = 0.0);
        sx.iter_mut().for_each(|v| *v = 0.0);
        sxx.iter_mut().for_each(|v| *v = 0.0);
        for i in 0..n {
            for (t, (v, c)) in x.iter_mut().zip(data.row(i).iter().zip(&center)) {
                *t = v - c;
            }
            for j in 0..k {
                let r = resp[i * k + j];
                if r == 0.0 {
                    continue;
                }
                nk[j] += r;
                let sxj = &mut sx[j * d..(j + 1) * d];
                let sxxj = &mut sxx[j * d * d..(j + 1) * d * d];
                for a in 0..d {
                    let ra = r * x[a];
                    sxj[a] += ra;
                    for b in 0..=a {
                        sxxj[a * d + b] += ra * x[b];
                    }
                }
            }
        }
        for j in 0..k {
            if nk[j] < 1e-10 * n as f64 {
                return None;
            }
            weights[j] = nk[j] / n as f64;
            let m: Vec<f64> = (0..d).map(|a| sx[j * d + a] / nk[j]).collect();
            let cov = &mut covs[j];
            for a in 0..d {
                for b in 0..=a {
                    let v = sxx[j * d * d + a * d + b] / nk[j] - m[a] * m[b];
                    cov[a * d + b] = v;
                    cov[b * d + a] = v;
                }
                cov[a * d + a] += ridge;
            }
            means[j] = m.iter().zip(&center).map(|(a, c)| a + c).collect();
        }
        // E step
        let factors: Vec<(Vec<f64>, f64)> = covs.iter().map(|c| cholesky(c, d, ridge)).collect();
        let consts: Vec<f64> = (0..k)
            .map(|j| weights[j].ln() - 0.5 * (d as f64 * LN_2PI + factors[j].1))
            .collect();
        let mut total = 0.0;
        for i in 0..n {
            let x = data.row(i);
            let mut top = f64::NEG_INFINITY;
            for j in 0..k {
                let q = mahalanobis(&factors[j].0, d, x, &means[j], &mut z);
                log_r[j] = consts[j] - 0.5 * q;
                top = top.max(log_r[j]);
            }
            let row = &mut resp[i * k..(i + 1) * k];
            let mut sum = 0.0;
            for (r, v) in row.iter_mut().zip(&log_r) {
                *r = (v - top).exp();
                sum += *r;
            }
            row.iter_mut().for_each(|r| *r /= sum);
            total += top + sum.ln();
        }
        ll = total;
        history.push(ll);
        if it > 0 && (ll - previous).abs() <= opts.tolerance * n as f64 {
            break;
        }
        previous = ll;
    }

    let mut labels = vec![0usize; n];
    let mut sizes = vec![0usize; k];
    for i in 0..n {
        let row = &resp[i * k..(i + 1) * k];
        let mut best = 0;
        for j in 1..k {
            if row[j] > row[best] {
                best = j;
            }
        }
        labels[i] = best;
        sizes[best] += 1;
    }
    let complete = sizes.iter().all(|&s| s >= opts.min_component_size.max(1));
    Some(Fit {
        labels,
        weights,
        means,
        covs,
        log_likelihood: ll,
        history,
        complete,
    })
}
