//! Zero-mean Gaussian mixture with multilevel Toeplitz covariances.
//!
//! EM with a projected M-step: the responsibility-weighted scatter is
//! projected onto the Hermitian multilevel Toeplitz subspace, eigenvalues are
//! floored for positive definiteness and the projection is applied once more
//! so the stored covariance stays in the subspace. The exact constrained
//! maximizer has no closed form, so this is a generalized-EM style update and
//! the likelihood is not guaranteed to rise at every single iteration.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::Rng;
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::rng::stream;
use crate::toeplitz::{multilevel_toeplitz_project, DomainDims};

use super::mi::Labeling;

#[derive(Debug, Clone)]
pub struct GmmOptions {
    pub max_iter: usize,
    /// Stop when the relative log-likelihood change falls below this.
    pub rel_tol: f64,
    /// Eigenvalue floor, relative: floor = eps * trace / M.
    pub floor: f64,
    pub restarts: usize,
    pub seed: u64,
}

impl Default for GmmOptions {
    fn default() -> Self {
        Self { max_iter: 100, rel_tol: 1e-6, floor: 5e-3, restarts: 3, seed: 0 }
    }
}

/// Fitted mixture: simplex weights and per-component Hermitian PD multilevel
/// Toeplitz covariances; all means are fixed at zero.
#[derive(Debug, Clone)]
pub struct GmmModel {
    pub weights: Vec<f64>,
    pub covariances: Vec<DMatrix<Complex64>>,
    pub dims: DomainDims,
}

/// Cached eigendecomposition for density evaluation: log-determinant and the
/// whitening map W = diag(1/sqrt(lambda)) V^H.
struct ComponentCache {
    log_det: f64,
    whiten: DMatrix<Complex64>,
}

fn component_cache(c: &DMatrix<Complex64>) -> Result<ComponentCache> {
    let eig = c.clone().symmetric_eigen();
    let mut log_det = 0.0;
    let m = c.nrows();
    let mut scaled = eig.eigenvectors.adjoint();
    for (i, &l) in eig.eigenvalues.iter().enumerate() {
        if l <= 0.0 {
            return Err(Error::NotPsd(l));
        }
        log_det += l.ln();
        let s = Complex64::new(1.0 / l.sqrt(), 0.0);
        for jc in 0..m {
            scaled[(i, jc)] *= s;
        }
    }
    Ok(ComponentCache { log_det, whiten: scaled })
}

impl ComponentCache {
    /// ln N_C(h; 0, C) = -M ln pi - ln det C - h^H C^{-1} h.
    fn log_density(&self, h: &DVector<Complex64>) -> f64 {
        let w = &self.whiten * h;
        -(h.len() as f64) * PI.ln() - self.log_det - w.norm_squared()
    }
}

/// Projects a scatter matrix into the model family: Hermitian multilevel
/// Toeplitz with eigenvalues floored at `eps * trace / M`.
fn constrain_covariance(
    scatter: &DMatrix<Complex64>,
    dims: &DomainDims,
    eps: f64,
) -> Result<DMatrix<Complex64>> {
    let m = scatter.nrows();
    let mut c = multilevel_toeplitz_project(scatter, dims, true)?;
    let trace: f64 = (0..m).map(|i| c[(i, i)].re).sum();
    let floor = eps * trace.max(f64::MIN_POSITIVE) / m as f64;
    let eig = c.clone().symmetric_eigen();
    let min = eig.eigenvalues.min();
    if min < floor {
        let mut vals = eig.eigenvalues.clone();
        for v in vals.iter_mut() {
            *v = v.max(floor);
        }
        let scaled = &eig.eigenvectors
            * DMatrix::from_diagonal(&vals.map(|v| Complex64::new(v, 0.0)));
        let floored = scaled * eig.eigenvectors.adjoint();
        c = multilevel_toeplitz_project(&floored, dims, true)?;
        // Re-projection can undo part of the flooring. The identity is itself
        // multilevel Toeplitz, so a diagonal shift restores the floor without
        // leaving the subspace.
        let min = c.clone().symmetric_eigen().eigenvalues.min();
        if min < floor {
            let shift = Complex64::new(floor - min, 0.0);
            for i in 0..m {
                c[(i, i)] += shift;
            }
        }
    }
    Ok(c)
}

fn check_data(data: &[DVector<Complex64>], k: usize, dims: &DomainDims) -> Result<()> {
    if data.is_empty() {
        return Err(Error::EmptyInput("dataset"));
    }
    if k == 0 || k > data.len() {
        return Err(Error::InvalidConfig(format!(
            "need 1 <= k <= dataset size, got k = {k}, n = {}",
            data.len()
        )));
    }
    let m = dims.product();
    if data.iter().any(|h| h.len() != m) {
        return Err(Error::DimensionMismatch("data length does not match dims".into()));
    }
    Ok(())
}

/// Fits the constrained mixture by EM with seeded random-responsibility
/// initialization; the best of `restarts` runs by final log-likelihood is
/// kept. Returns the model and the per-iteration log-likelihood trace of the
/// winning run.
pub fn fit_gmm(
    data: &[DVector<Complex64>],
    k: usize,
    dims: DomainDims,
    opts: &GmmOptions,
) -> Result<(GmmModel, Vec<f64>)> {
    check_data(data, k, &dims)?;
    let restarts = opts.restarts.max(1);
    let mut best: Option<(GmmModel, Vec<f64>)> = None;
    let mut last_err = None;
    for r in 0..restarts {
        // A collapsed component fails only this restart.
        let (model, trace) = match fit_once(data, k, &dims, opts, r as u64) {
            Ok(out) => out,
            Err(e @ Error::SingularComponent(_)) => {
                last_err = Some(e);
                continue;
            }
            Err(e) => return Err(e),
        };
        let keep = match &best {
            None => true,
            Some((_, t)) => trace.last() > t.last(),
        };
        if keep {
            best = Some((model, trace));
        }
    }
    best.ok_or_else(|| last_err.expect("no restart succeeded"))
}

/// Squared normalized correlation, invariant to the global phase of either
/// vector. Zero-mean components differ only by covariance, so this subspace
/// alignment is the natural similarity for seeding them.
fn alignment(a: &DVector<Complex64>, b: &DVector<Complex64>) -> f64 {
    let na = a.norm_squared();
    let nb = b.norm_squared();
    if na == 0.0 || nb == 0.0 {
        return 1.0;
    }
    a.dotc(b).norm_sqr() / (na * nb)
}

/// Seeds EM with a hard partition around k++-style anchors chosen by phase
/// invariant correlation distance, so every component starts from a distinct
/// covariance. A symmetric random start collapses: a couple of components
/// win the peaky high-dimensional likelihoods and starve the rest.
fn init_responsibilities(
    data: &[DVector<Complex64>],
    k: usize,
    rng: &mut impl Rng,
) -> Vec<Vec<f64>> {
    let n = data.len();
    let mut anchors = vec![rng.gen_range(0..n)];
    let mut dist: Vec<f64> = data.iter().map(|h| 1.0 - alignment(h, &data[anchors[0]])).collect();
    while anchors.len() < k {
        let total: f64 = dist.iter().sum();
        let next = if total <= 0.0 {
            rng.gen_range(0..n)
        } else {
            let mut u = rng.gen_range(0.0..total);
            let mut pick = n - 1;
            for (i, &d) in dist.iter().enumerate() {
                u -= d;
                if u <= 0.0 {
                    pick = i;
                    break;
                }
            }
            pick
        };
        anchors.push(next);
        for (d, h) in dist.iter_mut().zip(data) {
            *d = d.min(1.0 - alignment(h, &data[next]));
        }
    }
    let mut resp = vec![vec![0.0f64; k]; n];
    for (row, h) in resp.iter_mut().zip(data) {
        let mut best = 0usize;
        let mut best_val = f64::NEG_INFINITY;
        for (c, &a) in anchors.iter().enumerate() {
            let v = alignment(h, &data[a]);
            if v > best_val {
                best_val = v;
                best = c;
            }
        }
        row[best] = 1.0;
    }
    resp
}

fn fit_once(
    data: &[DVector<Complex64>],
    k: usize,
    dims: &DomainDims,
    opts: &GmmOptions,
    restart: u64,
) -> Result<(GmmModel, Vec<f64>)> {
    let n = data.len();
    let mut rng = stream(opts.seed.wrapping_add(restart), "gmm-init");
    let mut resp = init_responsibilities(data, k, &mut rng);

    let mut weights = vec![0.0f64; k];
    let mut covs: Vec<DMatrix<Complex64>> = Vec::new();
    let mut trace_ll = Vec::new();
    // Collapsed components are reseeded from fresh random responsibilities; a
    // run that keeps collapsing past this budget is abandoned.
    let mut reseeds_left = 2 * k;
    let mut prev_ll = f64::NEG_INFINITY;

    for _ in 0..opts.max_iter.max(1) {
        // M-step.
        covs.clear();
        let m = dims.product();
        let mut global: Option<DMatrix<Complex64>> = None;
        for comp in 0..k {
            let mass: f64 = resp.iter().map(|r| r[comp]).sum();
            if mass <= 1e-10 * n as f64 && reseeds_left > 0 {
                // Reseed the dead component on a random hard subset so it
                // starts from a covariance distinct from the global average.
                reseeds_left -= 1;
                for row in resp.iter_mut() {
                    if rng.gen_range(0.0..1.0) < 1.0 / k as f64 {
                        row[comp] = 3.0;
                        let total: f64 = row.iter().sum();
                        for v in row.iter_mut() {
                            *v /= total;
                        }
                    }
                }
            }
            let mass: f64 = resp.iter().map(|r| r[comp]).sum();
            if mass <= 1e-10 * n as f64 {
                // Reseed budget exhausted: park the component at a negligible
                // weight with the pooled covariance so EM can finish with the
                // surviving components.
                weights[comp] = 1e-12;
                if global.is_none() {
                    let mut scatter = DMatrix::from_element(m, m, Complex64::new(0.0, 0.0));
                    for h in data {
                        scatter.ger(
                            Complex64::new(1.0 / n as f64, 0.0),
                            h,
                            &h.conjugate(),
                            Complex64::new(1.0, 0.0),
                        );
                    }
                    global = Some(constrain_covariance(&scatter, dims, opts.floor)?);
                }
                covs.push(global.clone().unwrap());
                continue;
            }
            weights[comp] = mass / n as f64;
            let mut scatter = DMatrix::from_element(m, m, Complex64::new(0.0, 0.0));
            for (h, r) in data.iter().zip(&resp) {
                scatter.ger(
                    Complex64::new(r[comp] / mass, 0.0),
                    h,
                    &h.conjugate(),
                    Complex64::new(1.0, 0.0),
                );
            }
            covs.push(constrain_covariance(&scatter, dims, opts.floor)?);
        }
        let wsum: f64 = weights.iter().sum();
        for w in weights.iter_mut() {
            *w /= wsum;
        }

        // E-step.
        let caches: Vec<ComponentCache> =
            covs.iter().map(component_cache).collect::<Result<_>>()?;
        let log_w: Vec<f64> = weights.iter().map(|w| w.ln()).collect();
        let mut ll = 0.0;
        for (h, row) in data.iter().zip(resp.iter_mut()) {
            let mut logs = vec![0.0f64; k];
            let mut max = f64::NEG_INFINITY;
            for comp in 0..k {
                logs[comp] = log_w[comp] + caches[comp].log_density(h);
                max = max.max(logs[comp]);
            }
            let mut total = 0.0;
            for comp in 0..k {
                row[comp] = (logs[comp] - max).exp();
                total += row[comp];
            }
            for v in row.iter_mut() {
                *v /= total;
            }
            ll += max + total.ln();
        }
        ll /= n as f64;
        trace_ll.push(ll);
        if prev_ll.is_finite() {
            let rel = (ll - prev_ll).abs() / prev_ll.abs().max(f64::MIN_POSITIVE);
            if rel < opts.rel_tol {
                break;
            }
        }
        prev_ll = ll;
    }

    Ok((GmmModel { weights, covariances: covs, dims: dims.clone() }, trace_ll))
}

/// Maps every sample to the component with maximal posterior responsibility.
pub fn gmm_assign(model: &GmmModel, data: &[DVector<Complex64>]) -> Result<Labeling> {
    if data.is_empty() {
        return Err(Error::EmptyInput("dataset"));
    }
    let m = model.dims.product();
    if data.iter().any(|h| h.len() != m) {
        return Err(Error::DimensionMismatch("data length does not match model dims".into()));
    }
    let caches: Vec<ComponentCache> =
        model.covariances.iter().map(component_cache).collect::<Result<_>>()?;
    let log_w: Vec<f64> = model.weights.iter().map(|w| w.ln()).collect();
    let labels = data
        .iter()
        .map(|h| {
            let mut best = 0usize;
            let mut best_val = f64::NEG_INFINITY;
            for comp in 0..model.weights.len() {
                let v = log_w[comp] + caches[comp].log_density(h);
                if v > best_val {
                    best_val = v;
                    best = comp;
                }
            }
            best
        })
        .collect();
    Ok(Labeling(labels))
}
