use num_complex::Complex64;
use proptest::prelude::*;
use qsl_core::expand::{self, Resolvent};
use qsl_core::lattice::{GridFunction, LatticeSpec};
use qsl_core::spectrum::{self, find_eigenvalues, ScanConfig, TridiagonalOracle};
use qsl_core::PotentialSpec;

fn harmonic_on(n_outer: i64, n_inner: i64) -> GridFunction {
    let l = LatticeSpec::new(0.8, n_outer, n_inner).unwrap();
    PotentialSpec::harmonic().materialize(&l).unwrap()
}

fn harmonic() -> GridFunction {
    harmonic_on(-30, 50)
}

fn shifted(u: &GridFunction, c: f64) -> GridFunction {
    let l = *u.lattice();
    let k = PotentialSpec::Constant(c).materialize(&l).unwrap();
    u.add(&k).unwrap()
}

#[test]
fn shift_covariance() {
    let u = harmonic();
    let base = find_eigenvalues(&ScanConfig::new(0.1, 20.0), &u).unwrap().eigenvalues();
    for c in [-5.0, -1.0, 1.0, 5.0] {
        let moved = find_eigenvalues(&ScanConfig::new(0.1 + c, 20.0 + c), &shifted(&u, c))
            .unwrap()
            .eigenvalues();
        assert_eq!(moved.len(), base.len());
        for (a, b) in base.iter().zip(&moved) {
            assert!((b - a - c).abs() <= 1e-8, "c={c}: {a} -> {b}");
        }
    }
}

#[test]
fn constant_shift_materializes_as_pointwise_sum() {
    let l = LatticeSpec::new(0.8, -30, 50).unwrap();
    let u = PotentialSpec::harmonic().materialize(&l).unwrap();
    let sum = shifted(&u, 3.0);
    let direct = PotentialSpec::Table(
        l.indices().map(|n| (n, u.value(n).unwrap().re + 3.0)).collect(),
    )
    .materialize(&l)
    .unwrap();
    assert_eq!(sum.values(), direct.values());
}

#[test]
fn low_eigenvalues_are_stable_under_window_enlargement() {
    let a = find_eigenvalues(&ScanConfig::new(0.1, 20.0), &harmonic()).unwrap();
    let b = find_eigenvalues(&ScanConfig::new(0.1, 20.0), &harmonic_on(-35, 50)).unwrap();
    for (x, y) in a.eigenvalues().iter().zip(b.eigenvalues()).take(8) {
        assert!((x - y).abs() <= 1e-6, "{x} vs {y}");
    }
}

#[test]
fn shooting_agrees_with_oracle_for_other_angles() {
    let u = harmonic();
    for alpha in [0.4, 1.3, 2.9] {
        let mut cfg = ScanConfig::new(0.1, 20.0);
        cfg.alpha = alpha;
        let found = find_eigenvalues(&cfg, &u).unwrap();
        let oracle = TridiagonalOracle::new(&u, alpha).unwrap().eigenvalues_in(0.1, 20.0);
        assert_eq!(found.len(), oracle.len(), "alpha={alpha}");
        for (a, b) in found.eigenvalues().iter().zip(&oracle) {
            assert!((a - b).abs() <= 1e-8, "alpha={alpha}: {a} vs {b}");
        }
        assert!(found.pairs.iter().all(|p| p.residue > 0.0));
    }
}

#[test]
fn scan_is_deterministic() {
    let u = harmonic();
    let cfg = ScanConfig::new(0.1, 60.0);
    let a = find_eigenvalues(&cfg, &u).unwrap();
    let b = find_eigenvalues(&cfg, &u).unwrap();
    assert_eq!(a.eigenvalues(), b.eigenvalues());
    for (x, y) in a.pairs.iter().zip(&b.pairs) {
        assert_eq!(x.residue, y.residue);
        assert_eq!(x.psi, y.psi);
    }
}

#[test]
fn residues_match_the_m_pole_on_an_enlarged_window() {
    let u = harmonic_on(-40, 60);
    let sp = find_eigenvalues(&ScanConfig::new(0.1, 10.0), &u).unwrap();
    for p in sp.pairs.iter().take(4) {
        let from_m = spectrum::residue_from_m(p.lambda, 0.0, &u).unwrap();
        assert!((from_m - p.residue).abs() <= 1e-3 * p.residue);
    }
}

fn config(cases: u32) -> ProptestConfig {
    ProptestConfig {
        cases,
        failure_persistence: None,
        ..ProptestConfig::default()
    }
}

fn finite_support() -> impl Strategy<Value = (i64, Vec<f64>)> {
    (-20i64..40, prop::collection::vec(-3.0..3.0f64, 1..8))
}

fn lay_out(l: LatticeSpec, start: i64, vals: &[f64]) -> GridFunction {
    GridFunction::from_real_fn(l, |n, _| {
        let i = n - start;
        if (0..vals.len() as i64).contains(&i) {
            vals[i as usize]
        } else {
            0.0
        }
    })
}

proptest! {
    #![proptest_config(config(16))]

    #[test]
    fn bessel_partial_sums_are_monotone_and_bounded((start, vals) in finite_support()) {
        let u = harmonic();
        let sp = find_eigenvalues(&ScanConfig::new(0.1, 60.0), &u).unwrap();
        let f = lay_out(*u.lattice(), start, &vals);
        let rep = expand::parseval_report(&f, &sp, sp.len(), &u, None, None).unwrap();
        prop_assert!(rep.bessel_monotone());
        prop_assert!(rep.bessel_bounded(1e-9));
    }

    #[test]
    fn resolvent_forms_agree((start, vals) in finite_support(), re in -5.0..5.0f64, im in 0.1..3.0f64) {
        let u = harmonic();
        let f = lay_out(*u.lattice(), start, &vals);
        let lam = Complex64::new(re, im);
        let rep = expand::resolvent_suite(&f, lam, 0.0, &u).unwrap();
        prop_assert!(rep.split_vs_kernel <= 1e-9, "{rep:?}");
        prop_assert!(rep.stencil <= 1e-9, "{rep:?}");
        prop_assert!(rep.eq6 <= 1e-8, "{rep:?}");
        prop_assert!(rep.bound_holds());
        let r = Resolvent::new(lam, 0.0, &u).unwrap();
        for (x, y) in [(start, 10), (-29, 49), (start + 1, start)] {
            prop_assert_eq!(r.green(x, y).unwrap(), r.green(y, x).unwrap());
        }
    }
}
