//! Clustering of channel trajectories and mutual-information scoring.
//!
//! The Gaussian mixture here is constrained to the statistics implied by
//! phase-independent side information: zero component means and multilevel
//! Toeplitz component covariances. k-means on real-stacked vectors serves as
//! the mean-based baseline.

mod gmm;
mod kmeans;
mod mi;

pub use gmm::{fit_gmm, gmm_assign, GmmModel, GmmOptions};
pub use kmeans::{kmeans, kmeans_assign, kmeans_fit, KmeansOptions};
pub use mi::{entropy, mutual_information, Labeling};

use serde::Serialize;

use crate::channel::{sample_velocity_trajectory, VelocityScenario};
use crate::error::Result;
use crate::rng::ParamStreams;

/// One row of the velocity-clustering experiment table.
#[derive(Debug, Clone, Serialize)]
pub struct VelocityRow {
    pub k: usize,
    pub mi_gmm_bits: f64,
    pub mi_kmeans_bits: f64,
    pub entropy_bits: f64,
}

/// Trains a constrained GMM and a k-means baseline per cluster count on
/// held-in trajectories and scores both against the ground-truth velocity
/// regions of a held-out set by plug-in mutual information.
pub fn run_velocity_experiment(
    sc: &VelocityScenario,
    n_train: usize,
    n_test: usize,
    k_grid: &[usize],
    gmm_opts: &GmmOptions,
    km_opts: &KmeansOptions,
    streams: &mut ParamStreams,
) -> Result<Vec<VelocityRow>> {
    if n_train == 0 || n_test == 0 {
        return Err(crate::error::Error::EmptyInput("trajectory count"));
    }
    sc.validate()?;
    let mut train = Vec::with_capacity(n_train);
    for _ in 0..n_train {
        train.push(sample_velocity_trajectory(sc, streams)?.0);
    }
    let mut test = Vec::with_capacity(n_test);
    let mut truth = Vec::with_capacity(n_test);
    for _ in 0..n_test {
        let (h, label) = sample_velocity_trajectory(sc, streams)?;
        test.push(h);
        truth.push(label as usize);
    }
    let truth = Labeling(truth);
    let entropy_bits = entropy(&truth)?;

    let dims = sc.cfg.dims();
    let mut rows = Vec::with_capacity(k_grid.len());
    for &k in k_grid {
        let mut gopts = gmm_opts.clone();
        gopts.seed = gmm_opts.seed.wrapping_add(k as u64);
        let (model, _trace) = fit_gmm(&train, k, dims.clone(), &gopts)?;
        let gmm_labels = gmm_assign(&model, &test)?;

        let mut kopts = km_opts.clone();
        kopts.seed = km_opts.seed.wrapping_add(k as u64);
        let (centers, _) = kmeans_fit(&train, k, &kopts)?;
        let km_labels = kmeans_assign(&centers, &test)?;

        rows.push(VelocityRow {
            k,
            mi_gmm_bits: mutual_information(&truth, &gmm_labels)?,
            mi_kmeans_bits: mutual_information(&truth, &km_labels)?,
            entropy_bits,
        });
    }
    Ok(rows)
}
