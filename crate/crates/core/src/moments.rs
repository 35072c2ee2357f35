//! Closed-form conditional channel moments and their Monte Carlo verification.
//!
//! With path parameters frozen and phases i.i.d. uniform, the conditional
//! mean is zero and the conditional (non-centered) second moment is the sum
//! of per-path Kronecker rank-one terms, which is multilevel Toeplitz. The
//! Monte Carlo side freezes the parameters, resamples phases and compares
//! sample moments against the closed form.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::Rng;
use rand_chacha::ChaCha12Rng;
use serde::Serialize;
use std::f64::consts::PI;

use crate::channel::{full_steering, synthesize_channel, ChannelConfig, PathParams, PathPrior};
use crate::error::{Error, Result};
use crate::rng::ParamStreams;
use crate::toeplitz::structure_nmse;

/// How phases are drawn in the Monte Carlo loop. `Spike` is the negative
/// control that deliberately breaks the zero-mean conclusion.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BetaModel {
    Uniform,
    Spike(f64),
}

impl BetaModel {
    fn sample(&self, rng: &mut ChaCha12Rng) -> f64 {
        match *self {
            BetaModel::Uniform => rng.gen_range(0.0..2.0 * PI),
            BetaModel::Spike(v) => v,
        }
    }
}

/// Sample moments of one fixed-parameter Monte Carlo run, with the closed
/// form for comparison.
#[derive(Debug, Clone)]
pub struct MomentReport {
    pub mean_est: DVector<Complex64>,
    pub cov_est: DMatrix<Complex64>,
    pub cov_closed: DMatrix<Complex64>,
    pub mean_norm: f64,
    /// ||C_est - C_closed||_F / ||C_closed||_F.
    pub cov_nmse: f64,
    pub structure_nmse_est: f64,
    pub structure_nmse_closed: f64,
    pub n: usize,
}

/// JSON-friendly scalar view of a report.
#[derive(Debug, Clone, Serialize)]
pub struct MomentSummary {
    pub mean_norm: f64,
    pub cov_nmse: f64,
    pub structure_nmse_est: f64,
    pub structure_nmse_closed: f64,
    pub n: usize,
}

impl MomentReport {
    pub fn summary(&self) -> MomentSummary {
        MomentSummary {
            mean_norm: self.mean_norm,
            cov_nmse: self.cov_nmse,
            structure_nmse_est: self.structure_nmse_est,
            structure_nmse_closed: self.structure_nmse_closed,
            n: self.n,
        }
    }
}

/// Closed-form conditional moments for fixed path parameters (phases are
/// irrelevant and ignored): zero mean and sum over paths of p times the
/// rank-one outer product of the full steering vector.
pub fn closed_form_moments(
    cfg: &ChannelConfig,
    paths: &[PathParams],
) -> Result<(DVector<Complex64>, DMatrix<Complex64>)> {
    cfg.validate()?;
    if paths.is_empty() {
        return Err(Error::EmptyInput("path list"));
    }
    let m = cfg.total_dim();
    let mut cov = DMatrix::from_element(m, m, Complex64::new(0.0, 0.0));
    for path in paths {
        path.validate()?;
        let a = full_steering(cfg, path)?;
        // cov += p * a a^H
        cov.ger(Complex64::new(path.p, 0.0), &a, &a.conjugate(), Complex64::new(1.0, 0.0));
    }
    Ok((DVector::from_element(m, Complex64::new(0.0, 0.0)), cov))
}

/// Freezes the path parameters, resamples phases `n` times and reports the
/// sample mean and non-centered sample covariance against the closed form.
pub fn mc_conditional_moments(
    cfg: &ChannelConfig,
    paths: &[PathParams],
    n: usize,
    beta_rng: &mut ChaCha12Rng,
    beta_model: BetaModel,
) -> Result<MomentReport> {
    if n < 2 {
        return Err(Error::InvalidConfig("need at least 2 Monte Carlo samples".into()));
    }
    let (_, cov_closed) = closed_form_moments(cfg, paths)?;
    let m = cfg.total_dim();
    let mut mean = DVector::from_element(m, Complex64::new(0.0, 0.0));
    let mut cov = DMatrix::from_element(m, m, Complex64::new(0.0, 0.0));
    let mut resampled = paths.to_vec();
    for _ in 0..n {
        for p in resampled.iter_mut() {
            p.beta = beta_model.sample(beta_rng);
        }
        let h = synthesize_channel(cfg, &resampled)?;
        mean += &h;
        cov.ger(Complex64::new(1.0, 0.0), &h, &h.conjugate(), Complex64::new(1.0, 0.0));
    }
    mean /= Complex64::new(n as f64, 0.0);
    cov /= Complex64::new(n as f64, 0.0);

    let dims = cfg.dims();
    Ok(MomentReport {
        mean_norm: mean.norm(),
        cov_nmse: (&cov - &cov_closed).norm() / cov_closed.norm(),
        structure_nmse_est: structure_nmse(std::slice::from_ref(&cov), &dims)?,
        structure_nmse_closed: structure_nmse(std::slice::from_ref(&cov_closed), &dims)?,
        mean_est: mean,
        cov_est: cov,
        cov_closed,
        n,
    })
}

/// Outcome of a multi-draw verification run.
#[derive(Debug, Clone)]
pub struct VerifyOutcome {
    pub pass: bool,
    pub reports: Vec<MomentReport>,
}

/// Draws `n_xi` parameter configurations from the prior and checks that every
/// Monte Carlo run satisfies the zero-mean and closed-form-covariance bounds.
pub fn verify_theorem1(
    cfg: &ChannelConfig,
    prior: &PathPrior,
    n_xi: usize,
    n_beta: usize,
    streams: &mut ParamStreams,
    tol: f64,
    beta_model: BetaModel,
) -> Result<VerifyOutcome> {
    if !(tol > 0.0) {
        return Err(Error::InvalidConfig("tolerance unsatisfiable: tol must be > 0".into()));
    }
    if n_xi == 0 {
        return Err(Error::EmptyInput("parameter draw count"));
    }
    let mut reports = Vec::with_capacity(n_xi);
    let mut pass = true;
    for _ in 0..n_xi {
        let paths = crate::channel::sample_paths(prior, prior.num_paths, streams)?;
        let report = mc_conditional_moments(cfg, &paths, n_beta, &mut streams.beta, beta_model)?;
        if report.mean_norm > tol || report.cov_nmse > tol {
            pass = false;
        }
        reports.push(report);
    }
    Ok(VerifyOutcome { pass, reports })
}
