mod common;

use invfree_core::estimation::{
    gaussian_kl, correlation_matrix, identifiability_margin, identifiability_margin_with, kl_bound_check,
    local_maxima_count, spectral_bounds,
};
use invfree_core::kernels::{Anisotropy, AnisotropyForm, KernelFamily, ParamBounds, PhiBounds};
use invfree_core::objective::Objective;
use invfree_core::sampling::{make_perturbed_lattice, simulate_field, FieldSample, SiteSet};
use invfree_core::{estimate, sweep_objective, Error, OptimizerConfig};

fn matern_sample(n_side: usize, delta: f64, theta: f64, seed: u64) -> FieldSample {
    let sites = make_perturbed_lattice(n_side, 2, delta, seed).unwrap();
    simulate_field(&sites, &KernelFamily::matern(0.5).unwrap(), &Anisotropy::isotropic(theta).unwrap(), 1.0, 20_000, seed)
        .unwrap()
}

fn run(sample: &FieldSample, family: &KernelFamily, form: AnisotropyForm) -> invfree_core::EstimationResult {
    estimate(
        sample,
        family,
        form,
        &ParamBounds::default_theta(form.n_params()),
        &PhiBounds::default(),
        &OptimizerConfig::default(),
    )
    .unwrap()
}

#[test]
fn estimate_recovers_isotropic_matern() {
    let sample = matern_sample(48, 0.1, 4.0, 3);
    let fam = KernelFamily::matern(0.5).unwrap();
    let est = run(&sample, &fam, AnisotropyForm::Isotropic);
    assert!(est.outcome.converged);
    assert!(!est.hit_boundary());
    assert!((est.theta_hat[0] - 4.0).abs() < 2.5, "{:?}", est.theta_hat);
    assert!((est.phi_hat - 1.0).abs() < 0.5, "{}", est.phi_hat);
    let json = serde_json::to_value(est.summary()).unwrap();
    for key in ["phi_hat", "theta_hat", "converged", "boundary_hit", "iterations", "objective_value"] {
        assert!(json.get(key).is_some(), "missing {key}");
    }
    assert!(!est.objective_curve.unwrap().is_empty());
}

#[test]
fn scaling_equivariance() {
    let sample = matern_sample(24, 0.1, 4.0, 5);
    let fam = KernelFamily::matern(0.5).unwrap();
    let base = run(&sample, &fam, AnisotropyForm::Isotropic);
    // Powers of two scale every quantity exactly.
    let doubled = run(&sample.scaled(2.0), &fam, AnisotropyForm::Isotropic);
    assert_eq!(doubled.theta_hat, base.theta_hat);
    assert_eq!(doubled.phi_hat, 4.0 * base.phi_hat);
    let tripled = run(&sample.scaled(3.0), &fam, AnisotropyForm::Isotropic);
    assert!((tripled.theta_hat[0] - base.theta_hat[0]).abs() < 1e-6);
    assert!((tripled.phi_hat / base.phi_hat - 9.0).abs() < 1e-6);
}

#[test]
fn permutation_invariance() {
    let sample = matern_sample(20, 0.2, 3.0, 8);
    let fam = KernelFamily::matern(0.5).unwrap();
    let n = sample.len();
    let order: Vec<usize> = (0..n).rev().map(|i| (i * 31) % n).collect();
    let permuted = FieldSample::new(sample.sites.permuted(&order).unwrap(), order.iter().map(|&i| sample.y[i]).collect()).unwrap();
    let a = run(&sample, &fam, AnisotropyForm::Isotropic);
    let b = run(&permuted, &fam, AnisotropyForm::Isotropic);
    assert_eq!(a.theta_hat, b.theta_hat);
    assert_eq!(a.phi_hat.to_bits(), b.phi_hat.to_bits());
}

#[test]
fn rational_quadratic_matches_grid_scan() {
    let sites = make_perturbed_lattice(8, 2, 0.0, 0).unwrap();
    let fam = KernelFamily::rational_quadratic(1.5, 2).unwrap();
    let sample = simulate_field(&sites, &fam, &Anisotropy::isotropic(4.0).unwrap(), 1.0, 20_000, 77).unwrap();
    let est = run(&sample, &fam, AnisotropyForm::Isotropic);
    let obj = Objective::new(&sample.sites, &sample.y, &fam, AnisotropyForm::Isotropic).unwrap();
    let step = (15.0 - 0.1) / 1999.0;
    let (t_best, _) = (0..2000)
        .map(|k| 0.1 + step * k as f64)
        .map(|t| (t, obj.g_n(&[t]).unwrap()))
        .fold((0.0, f64::NEG_INFINITY), |a, b| if b.1 > a.1 { b } else { a });
    assert!((est.theta_hat[0] - t_best).abs() <= step, "{} vs grid {t_best}", est.theta_hat[0]);
}

#[test]
fn zero_field_puts_phi_on_its_bound() {
    let sites = make_perturbed_lattice(6, 2, 0.1, 1).unwrap();
    let sample = FieldSample::new(sites, vec![0.0; 36]).unwrap();
    let est = run(&sample, &KernelFamily::matern(0.5).unwrap(), AnisotropyForm::Isotropic);
    assert_eq!(est.phi_hat, 1e-4);
    assert!(est.phi_clamped && est.hit_boundary());
}

#[test]
fn estimate_rejects_bad_inputs() {
    let sample = matern_sample(4, 0.1, 2.0, 1);
    let fam = KernelFamily::matern(0.5).unwrap();
    let r = estimate(&sample, &fam, AnisotropyForm::DiagonalRanges, &ParamBounds::default_theta(1), &PhiBounds::default(), &OptimizerConfig::default());
    assert!(matches!(r, Err(Error::DimensionMismatch { .. })));
}

#[test]
fn sweep_examples() {
    let sample = matern_sample(10, 0.1, 4.0, 2);
    let fam = KernelFamily::matern(0.5).unwrap();
    let one = sweep_objective(&sample, &fam, AnisotropyForm::Isotropic, &[vec![3.0]]).unwrap();
    let obj = Objective::new(&sample.sites, &sample.y, &fam, AnisotropyForm::Isotropic).unwrap();
    assert_eq!(one.len(), 1);
    assert_eq!(one[0].value, obj.g_n(&[3.0]).unwrap() / 10.0);
    let zero = FieldSample::new(sample.sites.clone(), vec![0.0; 100]).unwrap();
    let grid: Vec<Vec<f64>> = (1..20).map(|k| vec![k as f64 * 0.5]).collect();
    assert!(sweep_objective(&zero, &fam, AnisotropyForm::Isotropic, &grid).unwrap().iter().all(|p| p.value == 0.0));
    assert!(sweep_objective(&sample, &fam, AnisotropyForm::Isotropic, &[]).is_err());
}

#[test]
fn sweep_is_unimodal_on_a_large_sample() {
    let sample = matern_sample(100, 0.3, 4.0, 100);
    let fam = KernelFamily::matern(0.5).unwrap();
    let grid: Vec<Vec<f64>> = (0..200).map(|k| vec![0.1 + (15.0 - 0.1) * k as f64 / 199.0]).collect();
    let curve = sweep_objective(&sample, &fam, AnisotropyForm::Isotropic, &grid).unwrap();
    let values: Vec<f64> = curve.iter().map(|p| p.value).collect();
    assert_eq!(local_maxima_count(&values), 1);
}

#[test]
fn identifiability_positive_for_decreasing_kernels() {
    let grid = vec![vec![2.0], vec![4.0], vec![8.0]];
    let regular = make_perturbed_lattice(10, 2, 0.0, 0).unwrap();
    let r = identifiability_margin(&regular, &KernelFamily::matern(0.5).unwrap(), AnisotropyForm::Isotropic, &grid, 1.5).unwrap();
    assert!(r.margin > 0.0);
    assert_eq!(r.grid_size, 3);
    for fam in [
        KernelFamily::matern(1.5).unwrap(),
        KernelFamily::powered_exponential(1.0).unwrap(),
        KernelFamily::rational_quadratic(1.5, 2).unwrap(),
    ] {
        let sites = make_perturbed_lattice(8, 2, 0.4, 3).unwrap();
        let r = identifiability_margin(&sites, &fam, AnisotropyForm::Isotropic, &grid, 1.5).unwrap();
        assert!(r.margin > 0.0, "{fam:?}");
    }
}

#[test]
fn identifiability_edge_cases() {
    let sites = make_perturbed_lattice(6, 2, 0.2, 4).unwrap();
    // A compactly supported stand-in whose support (0.5) is below the minimum
    // spacing 1 - 2 delta = 0.6: no neighbour ever sees a nonzero correlation.
    let compact = |h: &[f64], theta: &[f64]| {
        let r = (h[0] * h[0] + h[1] * h[1]).sqrt() / theta[0];
        Ok((1.0 - r / 0.5).max(0.0))
    };
    let grid = vec![vec![0.5], vec![0.8], vec![1.0]];
    let r = identifiability_margin_with(&sites, &grid, 1.5, compact).unwrap();
    assert_eq!(r.margin, 0.0);

    let fam = KernelFamily::matern(0.5).unwrap();
    let dup = vec![vec![3.0], vec![3.0], vec![5.0]];
    let r = identifiability_margin(&sites, &fam, AnisotropyForm::Isotropic, &dup, 1.5).unwrap();
    assert!(r.margin > 0.0);
    assert_eq!(r.worst_pair.0, vec![3.0]);
    assert!(identifiability_margin(&sites, &fam, AnisotropyForm::Isotropic, &[vec![3.0], vec![3.0]], 1.5).is_err());
    assert!(identifiability_margin(&sites, &fam, AnisotropyForm::Isotropic, &grid, 1.0).is_err());

    let sparse = SiteSet::from_points(&[vec![0.0, 0.0], vec![10.0, 0.0]]).unwrap();
    let e = identifiability_margin(&sparse, &fam, AnisotropyForm::Isotropic, &grid, 1.5);
    assert!(matches!(e, Err(Error::NoNeighbour { site: 0, .. })));
}

#[test]
fn spectral_bounds_examples() {
    let far = SiteSet::from_points(&(0..5).map(|i| vec![1000.0 * i as f64, 0.0]).collect::<Vec<_>>()).unwrap();
    let fam = KernelFamily::matern(0.5).unwrap();
    let r = spectral_bounds(&far, &fam, AnisotropyForm::Isotropic, &[vec![0.1], vec![0.2]]).unwrap();
    assert!((r.lambda_min_est - 1.0).abs() < 1e-12 && (r.lambda_max_est - 1.0).abs() < 1e-12);
    assert_eq!(r.lipschitz_est, 0.0);

    let grid: Vec<Vec<f64>> = (2..=8).map(|t| vec![t as f64]).collect();
    let s8 = make_perturbed_lattice(8, 2, 0.1, 1).unwrap();
    let s6 = make_perturbed_lattice(6, 2, 0.1, 1).unwrap();
    let b8 = spectral_bounds(&s8, &fam, AnisotropyForm::Isotropic, &grid).unwrap();
    let b6 = spectral_bounds(&s6, &fam, AnisotropyForm::Isotropic, &grid).unwrap();
    assert!(b8.lambda_min_est > 0.0 && b8.lambda_min_est <= b8.lambda_max_est);
    assert!(b8.lambda_min_est > 0.5 * b6.lambda_min_est, "{b6:?} -> {b8:?}");
    assert!(b8.lipschitz_est > 0.0);
}

#[test]
fn kl_bound_examples() {
    let sites = make_perturbed_lattice(6, 2, 0.1, 2).unwrap();
    let fam = KernelFamily::matern(0.5).unwrap();
    let same = kl_bound_check(&sites, &fam, AnisotropyForm::Isotropic, &[4.0], &[4.0]).unwrap();
    assert_eq!((same.kl, same.bound), (0.0, 0.0));
    let near = kl_bound_check(&sites, &fam, AnisotropyForm::Isotropic, &[4.0], &[4.05]).unwrap();
    assert!(near.kl > 0.0 && near.kl <= near.bound, "{near:?}");
}

#[test]
fn kl_is_locally_quadratic() {
    let sites = make_perturbed_lattice(6, 2, 0.1, 2).unwrap();
    let fam = KernelFamily::matern(0.5).unwrap();
    let k1 = correlation_matrix(&sites, &fam, AnisotropyForm::Isotropic, &[4.0]).unwrap();
    let ratios: Vec<f64> = (0..8)
        .map(|k| {
            let d = 0.2 / 2f64.powi(k);
            let k2 = correlation_matrix(&sites, &fam, AnisotropyForm::Isotropic, &[4.0 + d]).unwrap();
            gaussian_kl(&k1, &k2).unwrap() / (d * d)
        })
        .collect();
    for w in ratios.windows(2) {
        assert!(w[1] > 0.0 && (w[1] / w[0] - 1.0).abs() < 0.15, "{ratios:?}");
    }
}

/// Single realization at n = 102400. Long-running; run with `--ignored`.
#[test]
#[ignore]
fn large_single_realization() {
    let sample = matern_sample(320, 0.1, 4.0, 320);
    let est = run(&sample, &KernelFamily::matern(0.5).unwrap(), AnisotropyForm::Isotropic);
    // Reference single run gave (0.993, 4.420) under a different seed.
    assert!((est.phi_hat - 0.993).abs() < 0.15, "{}", est.phi_hat);
    assert!((est.theta_hat[0] - 4.420).abs() < 1.5, "{:?}", est.theta_hat);
}
