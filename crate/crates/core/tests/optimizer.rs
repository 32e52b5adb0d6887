use invfree_core::kernels::{Anisotropy, AnisotropyForm, KernelFamily, ParamBounds};
use invfree_core::objective::Objective;
use invfree_core::optimizer::{maximize_box, maximize_scalar};
use invfree_core::sampling::{make_perturbed_lattice, simulate_field};
use invfree_core::{Error, OptimizerConfig};

#[test]
fn scalar_examples() {
    let cfg = OptimizerConfig::default();
    let q = maximize_scalar(|x| Ok(-(x - 3.0) * (x - 3.0)), 0.0, 10.0, &cfg).unwrap();
    assert!((q.argmax[0] - 3.0).abs() < 1e-4);
    let c = maximize_scalar(|x| Ok(x.cos()), 2.0, 8.0, &cfg).unwrap();
    assert!((c.argmax[0] - std::f64::consts::TAU).abs() < 1e-3);
}

#[test]
fn scalar_battery_is_fast_and_accurate() {
    type Case = (fn(f64) -> f64, f64, f64, f64);
    let battery: [Case; 6] = [
        (|x| -(x - 3.0) * (x - 3.0), 0.0, 10.0, 3.0),
        (|x| x.cos(), 2.0, 8.0, std::f64::consts::TAU),
        (|x| x * (-x).exp(), 0.0, 10.0, 1.0),
        (|x| -(x - 2.0).cosh(), -5.0, 9.0, 2.0),
        (|x| x.ln() - x / 5.0, 0.1, 15.0, 5.0),
        (|x| -(x - 7.3).powi(2) * (1.0 + 0.1 * (x - 7.3).powi(2)), 0.1, 15.0, 7.3),
    ];
    let cfg = OptimizerConfig::default();
    for (i, (f, lo, hi, truth)) in battery.iter().enumerate() {
        let out = maximize_scalar(|x| Ok(f(x)), *lo, *hi, &cfg).unwrap();
        assert!(out.evaluations <= 60, "case {i}: {} evaluations", out.evaluations);
        assert!((out.argmax[0] - truth).abs() <= (hi - lo) * 1e-4, "case {i}: {:?}", out.argmax);
        assert!(out.converged);
    }
}

#[test]
fn scalar_on_profile_objective_matches_grid_scan() {
    let sites = make_perturbed_lattice(32, 2, 0.1, 31).unwrap();
    let fam = KernelFamily::matern(0.5).unwrap();
    let y = simulate_field(&sites, &fam, &Anisotropy::isotropic(4.0).unwrap(), 1.0, 20_000, 31).unwrap().y;
    let obj = Objective::new(&sites, &y, &fam, AnisotropyForm::Isotropic).unwrap();
    let out = maximize_scalar(|t| obj.g_n(&[t]), 0.1, 15.0, &OptimizerConfig::default()).unwrap();
    let step = (15.0 - 0.1) / 1499.0;
    let grid: Vec<(f64, f64)> = (0..1500).map(|k| 0.1 + step * k as f64).map(|t| (t, obj.g_n(&[t]).unwrap())).collect();
    let (t_best, g_best) = grid.iter().cloned().fold((0.0, f64::NEG_INFINITY), |a, b| if b.1 > a.1 { b } else { a });
    assert!(t_best > 0.1 && t_best < 15.0, "grid maximum at the boundary: {t_best}");
    assert!((out.argmax[0] - t_best).abs() <= step, "{} vs {t_best}", out.argmax[0]);
    assert!(out.value >= g_best - 1e-9 * g_best.abs());
    let ups = grid.windows(2).map(|w| w[1].1 > w[0].1).collect::<Vec<_>>();
    let changes = ups.windows(2).filter(|w| w[0] && !w[1]).count();
    assert_eq!(changes, 1, "expected one interior maximum");
}

#[test]
fn box_examples() {
    let b = ParamBounds::default_theta(2);
    let cfg = OptimizerConfig::default();
    let inner = maximize_box(|t| Ok(-((t[0] - 4.0).powi(2) + (t[1] - 6.0).powi(2))), &b, &cfg).unwrap();
    assert!((inner.argmax[0] - 4.0).abs() < 1e-3 && (inner.argmax[1] - 6.0).abs() < 1e-3, "{inner:?}");
    assert_eq!(inner.boundary_hit, vec![false, false]);
    let outer = maximize_box(|t| Ok(-((t[0] - 20.0).powi(2) + (t[1] - 20.0).powi(2))), &b, &cfg).unwrap();
    assert_eq!(outer.argmax, vec![15.0, 15.0]);
    assert_eq!(outer.boundary_hit, vec![true, true]);
}

#[test]
fn box_is_monotone_and_deterministic() {
    let b = ParamBounds::new(vec![-3.0, -3.0, -3.0], vec![3.0, 3.0, 3.0]).unwrap();
    let f = |t: &[f64]| Ok(-(t[0] - 1.0).powi(2) - 5.0 * (t[1] - t[0].powi(2)).powi(2) - (t[2] + 0.5).powi(4) + 0.3 * (t[0] * t[2]).sin());
    let cfg = OptimizerConfig { initial_guess: Some(vec![2.0, -2.0, 2.0]), ..Default::default() };
    let a = maximize_box(f, &b, &cfg).unwrap();
    let c = maximize_box(f, &b, &cfg).unwrap();
    assert_eq!(a, c);
    assert!(a.trace.windows(2).all(|w| w[1] >= w[0]));
    assert!(a.value > f(&[2.0, -2.0, 2.0]).unwrap());
}

#[test]
fn box_on_anisotropic_profile_objective_matches_grid_scan() {
    let sites = make_perturbed_lattice(64, 2, 0.1, 64).unwrap();
    let fam = KernelFamily::matern(0.5).unwrap();
    let truth = Anisotropy::diagonal_ranges(4.0, 6.0).unwrap();
    let y = simulate_field(&sites, &fam, &truth, 1.0, 20_000, 64).unwrap().y;
    let obj = Objective::new(&sites, &y, &fam, AnisotropyForm::DiagonalRanges).unwrap();
    let b = ParamBounds::default_theta(2);
    let out = maximize_box(|t| obj.g_n(t), &b, &OptimizerConfig::default()).unwrap();
    assert!(out.converged);
    assert_eq!(out.boundary_hit, vec![false, false], "{out:?}");
    let step = 1.0;
    let mut best = (vec![0.0, 0.0], f64::NEG_INFINITY);
    for i in 0..15 {
        for j in 0..15 {
            let t = vec![1.0 + step * i as f64, 1.0 + step * j as f64];
            let g = obj.g_n(&t).unwrap();
            if g > best.1 {
                best = (t, g);
            }
        }
    }
    assert!(out.value >= best.1 - 1e-9 * best.1.abs(), "{} < grid {}", out.value, best.1);
    for k in 0..2 {
        assert!((out.argmax[k] - best.0[k]).abs() <= 2.0 * step, "{:?} vs grid {:?}", out.argmax, best.0);
    }
    // Within the consistency band used for the anisotropic reproduction.
    assert!((out.argmax[0] - 4.0).abs() <= 3.0 && (out.argmax[1] - 6.0).abs() <= 4.5, "{:?}", out.argmax);
}

#[test]
fn non_finite_objective_aborts() {
    let b = ParamBounds::default_theta(2);
    let r = maximize_box(|t| Ok(if t[0] > 2.5 { f64::INFINITY } else { t[0] }), &b, &OptimizerConfig::default());
    assert!(matches!(r, Err(Error::NonFinite { .. })));
}

#[test]
fn config_validation() {
    let b = ParamBounds::default_theta(1);
    let bad = OptimizerConfig { max_iter: 0, ..Default::default() };
    assert!(maximize_box(|t| Ok(t[0]), &b, &bad).is_err());
    let bad = OptimizerConfig { rel_tol: Some(0.0), ..Default::default() };
    assert!(maximize_scalar(Ok, 0.0, 1.0, &bad).is_err());
    let wrong_dim = OptimizerConfig { initial_guess: Some(vec![1.0, 2.0]), ..Default::default() };
    assert!(matches!(maximize_box(|t| Ok(t[0]), &b, &wrong_dim), Err(Error::DimensionMismatch { .. })));
}
