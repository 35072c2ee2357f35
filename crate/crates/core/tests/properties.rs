//! Randomized invariant checks across the library surface.

use std::collections::BTreeSet;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use proptest::prelude::*;
use rand::Rng;

use wslb_core::bn::{classify_side_info, sensing_modeling_graph, BayesNet, SideInfoClass};
use wslb_core::channel::{sample_paths, synthesize_channel, Domain, PathParams};
use wslb_core::clustering::{entropy, mutual_information, Labeling};
use wslb_core::rng::{stream, ParamStreams};
use wslb_core::{multilevel_toeplitz_project, steering_vector, ChannelConfig, DomainDims, PathPrior};

fn cfg_rx(m_r: usize) -> ChannelConfig {
    ChannelConfig::new(1, 1, m_r, 1, 15e3, 5e-4, 2.1e9).unwrap()
}

fn random_complex_matrix(m: usize, seed: u64) -> DMatrix<Complex64> {
    let mut rng = stream(seed, "prop-matrix");
    DMatrix::from_fn(m, m, |_, _| {
        Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn steering_entries_have_unit_modulus(
        m in 1usize..12,
        tau in 0.0..1e-4f64,
        nu in -400.0..400.0f64,
        theta in -1.5..1.5f64,
    ) {
        let cfg = cfg_rx(m.max(1));
        for (domain, param) in [
            (Domain::Frequency, tau),
            (Domain::Time, nu),
            (Domain::Rx, theta),
            (Domain::Tx, theta),
        ] {
            let a = steering_vector(domain, param, m, &cfg).unwrap();
            prop_assert!((a[0] - Complex64::new(1.0, 0.0)).norm() < 1e-12);
            for v in a.iter() {
                prop_assert!((v.norm() - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn synthesis_is_additive_and_scales_with_power(seed in 0u64..1000, m in 2usize..10) {
        let cfg = cfg_rx(m);
        let prior = PathPrior::spatial_three_path();
        let mut streams = ParamStreams::new(seed);
        let a = sample_paths(&prior, 3, &mut streams).unwrap();
        let b = sample_paths(&prior, 3, &mut streams).unwrap();

        let ha = synthesize_channel(&cfg, &a).unwrap();
        let hb = synthesize_channel(&cfg, &b).unwrap();
        let mut joined = a.clone();
        joined.extend(b.clone());
        let hj = synthesize_channel(&cfg, &joined).unwrap();
        prop_assert!((&ha + &hb - &hj).norm() < 1e-12);

        let c = 2.7;
        let scaled: Vec<PathParams> =
            a.iter().map(|p| PathParams { p: c * p.p, ..*p }).collect();
        let hs = synthesize_channel(&cfg, &scaled).unwrap();
        prop_assert!((&hs - ha.map(|v| v * c.sqrt())).norm() < 1e-12);

        // Triangle-inequality norm bound.
        let bound: f64 =
            (m as f64).sqrt() * joined.iter().map(|p| p.p.sqrt()).sum::<f64>();
        prop_assert!(hj.norm() <= bound + 1e-12);
    }

    #[test]
    fn projection_is_idempotent_and_self_adjoint(
        seed in 0u64..1000,
        pick in 0usize..3,
    ) {
        let dims = match pick {
            0 => DomainDims::new(vec![6]).unwrap(),
            1 => DomainDims::new(vec![2, 3]).unwrap(),
            _ => DomainDims::new(vec![2, 2, 2]).unwrap(),
        };
        let m = dims.product();
        let a = random_complex_matrix(m, seed);
        let b = random_complex_matrix(m, seed.wrapping_add(7919));
        let inner = |x: &DMatrix<Complex64>, y: &DMatrix<Complex64>| {
            x.iter().zip(y.iter()).map(|(u, v)| u.conj() * v).sum::<Complex64>()
        };
        for hermitian in [false, true] {
            let pa = multilevel_toeplitz_project(&a, &dims, hermitian).unwrap();
            let pb = multilevel_toeplitz_project(&b, &dims, hermitian).unwrap();
            let ppa = multilevel_toeplitz_project(&pa, &dims, hermitian).unwrap();
            prop_assert!((&ppa - &pa).norm() < 1e-10);
            if hermitian {
                // The symmetrizing variant involves conjugation and is only
                // linear (and self-adjoint) over the reals.
                prop_assert!((inner(&pa, &b).re - inner(&a, &pb).re).abs() < 1e-10);
            } else {
                prop_assert!((inner(&pa, &b) - inner(&a, &pb)).norm() < 1e-10);
            }
        }
    }

    #[test]
    fn merged_dims_project_onto_a_smaller_subspace(seed in 0u64..1000) {
        // Single-level Toeplitz over the merged index set is contained in the
        // multilevel space, so its residual can only be larger.
        let fine = DomainDims::new(vec![2, 3]).unwrap();
        let merged = DomainDims::new(vec![6]).unwrap();
        let a = random_complex_matrix(6, seed);
        let r_fine = (&a - multilevel_toeplitz_project(&a, &fine, false).unwrap()).norm();
        let r_merged = (&a - multilevel_toeplitz_project(&a, &merged, false).unwrap()).norm();
        prop_assert!(r_fine <= r_merged + 1e-12);
        // Projecting the merged result with fine dims is a no-op.
        let pm = multilevel_toeplitz_project(&a, &merged, false).unwrap();
        let pf = multilevel_toeplitz_project(&pm, &fine, false).unwrap();
        prop_assert!((&pf - &pm).norm() < 1e-10);
    }

    #[test]
    fn mutual_information_is_symmetric_and_permutation_invariant(
        labels_a in proptest::collection::vec(0usize..5, 20..200),
        perm_seed in 0u64..1000,
    ) {
        let n = labels_a.len();
        let mut rng = stream(perm_seed, "prop-perm");
        let labels_b: Vec<usize> = (0..n).map(|_| rng.gen_range(0..4)).collect();
        let a = Labeling(labels_a.clone());
        let b = Labeling(labels_b.clone());

        let i_ab = mutual_information(&a, &b).unwrap();
        let i_ba = mutual_information(&b, &a).unwrap();
        prop_assert!((i_ab - i_ba).abs() < 1e-12);
        prop_assert!(i_ab >= 0.0);
        prop_assert!(i_ab <= entropy(&a).unwrap().min(entropy(&b).unwrap()) + 1e-12);

        // Relabeling clusters bijectively changes nothing.
        let relabel: Vec<usize> = labels_a.iter().map(|&v| 4 - v).collect();
        let i_rel = mutual_information(&Labeling(relabel), &b).unwrap();
        prop_assert!((i_ab - i_rel).abs() < 1e-12);

        // Self-information equals entropy.
        prop_assert!((mutual_information(&a, &a).unwrap() - entropy(&a).unwrap()).abs() < 1e-12);
    }

    #[test]
    fn d_separation_is_symmetric(seed in 0u64..500) {
        let mut rng = stream(seed, "prop-dag");
        let n = rng.gen_range(3..=7);
        let mut bn = BayesNet::new();
        for i in 0..n {
            bn.add_node(&format!("v{i}")).unwrap();
        }
        for _ in 0..rng.gen_range(0..=10) {
            let a = rng.gen_range(0..n - 1);
            let b = rng.gen_range(a + 1..n);
            let _ = bn.add_edge(&format!("v{a}"), &format!("v{b}"));
        }
        for _ in 0..20 {
            let x = rng.gen_range(0..n);
            let y = rng.gen_range(0..n);
            if x == y {
                continue;
            }
            let z: BTreeSet<usize> =
                (0..n).filter(|v| *v != x && *v != y && rng.gen_bool(0.3)).collect();
            let xs = BTreeSet::from([x]);
            let ys = BTreeSet::from([y]);
            prop_assert_eq!(
                bn.d_separated(&xs, &ys, &z).unwrap(),
                bn.d_separated(&ys, &xs, &z).unwrap()
            );
        }
    }

    #[test]
    fn structure_preserving_is_robust_to_z_descendants(extra in 1usize..4) {
        // Descendants of z that do not touch H cannot open a trail from beta.
        let (mut bn, roles) = sensing_modeling_graph();
        let mut prev = "z".to_string();
        for i in 0..extra {
            let name = format!("aux{i}");
            bn.add_node(&name).unwrap();
            bn.add_edge(&prev, &name).unwrap();
            prev = name;
        }
        let (class, _) = classify_side_info(&bn, &roles).unwrap();
        prop_assert_eq!(class, SideInfoClass::StructurePreserving);
    }
}

#[test]
fn adding_h_to_z_edge_flips_the_classification() {
    // A structure-preserving instance without a z -> H edge, so the reverse
    // edge can be added without forming a cycle.
    let (template, roles) = sensing_modeling_graph();
    let mut bn = BayesNet::new();
    for i in 0..template.node_count() {
        bn.add_node(template.node_name(i)).unwrap();
    }
    // z starts isolated so it has no directed path into H.
    bn.add_edge("Xi", "H").unwrap();
    bn.add_edge("beta", "H").unwrap();
    let (class, _) = classify_side_info(&bn, &roles).unwrap();
    assert_eq!(class, SideInfoClass::StructurePreserving);

    bn.add_edge("H", "z").unwrap();
    let (class, trails) = classify_side_info(&bn, &roles).unwrap();
    assert_eq!(class, SideInfoClass::DirectInference);
    assert!(!trails.is_empty());
}

#[test]
fn beta_draws_are_uncorrelated_with_parameters() {
    // Assumption-2 check: empirical correlation between the phase and every
    // other path parameter stays below 0.02 over 1e5 draws.
    let prior = PathPrior::spatial_three_path();
    let mut streams = ParamStreams::new(42);
    let n = 100_000;
    let mut cols: Vec<Vec<f64>> = vec![Vec::with_capacity(n); 5];
    for _ in 0..n {
        let p = &sample_paths(&prior, 1, &mut streams).unwrap()[0];
        for (col, v) in cols.iter_mut().zip([p.beta, p.p, p.tau, p.nu, p.theta_r]) {
            col.push(v);
        }
    }
    let corr = |a: &[f64], b: &[f64]| -> f64 {
        let n = a.len() as f64;
        let ma = a.iter().sum::<f64>() / n;
        let mb = b.iter().sum::<f64>() / n;
        let cov = a.iter().zip(b).map(|(&x, &y)| (x - ma) * (y - mb)).sum::<f64>();
        let va = a.iter().map(|&x| (x - ma) * (x - ma)).sum::<f64>();
        let vb = b.iter().map(|&y| (y - mb) * (y - mb)).sum::<f64>();
        if va == 0.0 || vb == 0.0 {
            0.0
        } else {
            cov / (va * vb).sqrt()
        }
    };
    for other in &cols[1..] {
        assert!(corr(&cols[0], other).abs() < 0.02);
    }
    // Unit-modulus mean bound on e^{-j beta}.
    let mean: Complex64 = cols[0]
        .iter()
        .map(|&b| Complex64::from_polar(1.0, -b))
        .sum::<Complex64>()
        / cols[0].len() as f64;
    assert!(mean.norm() < 4e-3);
}

#[test]
fn mc_error_halves_when_samples_quadruple() {
    // O(n^{-1/2}) convergence of the sample mean of synthesized channels.
    let cfg = cfg_rx(8);
    let prior = PathPrior::spatial_three_path();
    let err_at = |n: usize, seed: u64| -> f64 {
        let mut streams = ParamStreams::new(seed);
        let paths = sample_paths(&prior, 3, &mut streams).unwrap();
        let mut mean = DVector::from_element(8, Complex64::new(0.0, 0.0));
        let mut paths = paths;
        for _ in 0..n {
            for p in paths.iter_mut() {
                p.beta = streams.beta.gen_range(0.0..2.0 * std::f64::consts::PI);
            }
            mean += synthesize_channel(&cfg, &paths).unwrap();
        }
        (mean / Complex64::new(n as f64, 0.0)).norm()
    };
    let seeds = 40;
    let mean_err = |n: usize| -> f64 {
        (0..seeds).map(|s| err_at(n, 300 + s)).sum::<f64>() / seeds as f64
    };
    let e1 = mean_err(500);
    let e2 = mean_err(8000);
    let ratio = e1 / e2;
    assert!((2.5..=6.0).contains(&ratio), "ratio {ratio}");
}
