use num_complex::Complex64;
use proptest::prelude::*;
use qsl_core::lattice::{self, GridFunction, LatticeSpec};
use qsl_core::Scaled;

fn values() -> impl Strategy<Value = Vec<(f64, f64)>> {
    prop::collection::vec((-10.0..10.0f64, -10.0..10.0f64), 21)
}

fn grid(q: f64, v: &[(f64, f64)]) -> (LatticeSpec, GridFunction, Vec<Complex64>) {
    let l = LatticeSpec::new(q, -10, 10).unwrap();
    let raw: Vec<Complex64> = v.iter().map(|&(a, b)| Complex64::new(a, b)).collect();
    let f = GridFunction::from_values(l, raw.clone()).unwrap();
    (l, f, raw)
}

fn close(a: Complex64, b: Complex64, scale: f64, tol: f64) -> bool {
    (a - b).norm() <= tol * scale.max(1e-300)
}

// Plain f64 evaluation of the stencils, indexed from n = -10.
fn x(q: f64, n: i64) -> f64 {
    q.powi(n as i32)
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 64, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn wronskian_forms_agree(q in 0.1..0.95f64, fv in values(), gv in values(), n in -9i64..=10) {
        let (_, f, _) = grid(q, &fv);
        let (_, g, _) = grid(q, &gv);
        let a = lattice::wronskian(&f, &g, n).unwrap().value();
        let b = lattice::wronskian_definitional(&f, &g, n).unwrap().value();
        let scale = (1.0 - q) / x(q, n)
            * (f.value(n).unwrap().norm() * g.value(n - 1).unwrap().norm()
                + g.value(n).unwrap().norm() * f.value(n - 1).unwrap().norm());
        prop_assert!(close(a, b, scale, 1e-12), "{a} vs {b}");
    }

    #[test]
    fn integration_by_parts(q in 0.1..0.95f64, fv in values(), gv in values(), lo in -10i64..0, hi in 0i64..9) {
        // Σ w D_q f · g = f_lo g_lo - f_{hi+1} g_{hi+1} - Σ w (Λ_q f) D_q g
        let (l, f, fr) = grid(q, &fv);
        let (_, g, gr) = grid(q, &gv);
        let at = |v: &[Complex64], n: i64| v[(n + 10) as usize];
        let mut lhs = Complex64::new(0.0, 0.0);
        let mut rhs = at(&fr, lo) * at(&gr, lo) - at(&fr, hi + 1) * at(&gr, hi + 1);
        let mut scale = rhs.norm();
        for n in lo..=hi {
            let w = l.weight(n);
            let a = lattice::q_derivative(&f, n).unwrap().value() * at(&gr, n) * w;
            let b = at(&fr, n + 1) * lattice::q_derivative(&g, n).unwrap().value() * w;
            lhs += a;
            rhs -= b;
            scale = scale.max(a.norm()).max(b.norm());
        }
        prop_assert!(close(lhs, rhs, scale, 1e-12), "{lhs} vs {rhs}");
    }

    #[test]
    fn laplacian_factorizes(q in 0.1..0.95f64, fv in values(), n in -9i64..=9) {
        // Δ_q f = ((1-q)/q)^2 Λ_q^{-1} D_q^2 f, with D_q^2 built from plain arrays.
        let (_, f, fr) = grid(q, &fv);
        let at = |m: i64| fr[(m + 10) as usize];
        let dq = |m: i64| (at(m) - at(m + 1)) / ((1.0 - q) * x(q, m));
        let dq2 = |m: i64| (dq(m) - dq(m + 1)) / ((1.0 - q) * x(q, m));
        let expect = dq2(n - 1) * ((1.0 - q) / q).powi(2);
        let got = lattice::delta_q(&f, n).unwrap().value();
        let scale = (at(n - 1).norm() + at(n).norm() * (1.0 + q) / q + at(n + 1).norm() / q)
            / x(q, n).powi(2);
        prop_assert!(close(got, expect, scale, 1e-12), "{got} vs {expect}");
    }

    #[test]
    fn operators_are_linear(q in 0.1..0.95f64, fv in values(), gv in values(),
                            a in -3.0..3.0f64, b in -3.0..3.0f64, n in -9i64..=9) {
        let (_, f, _) = grid(q, &fv);
        let (_, g, _) = grid(q, &gv);
        let h = f.scale(Scaled::from(a)).add(&g.scale(Scaled::from(b))).unwrap();
        type Op = fn(&GridFunction, i64) -> qsl_core::Result<Scaled>;
        let ops: [Op; 3] = [lattice::q_derivative, lattice::lambda_inv_dq, lattice::delta_q];
        for op in ops {
            let lhs = op(&h, n).unwrap().value();
            let fa = op(&f, n).unwrap().value() * a;
            let gb = op(&g, n).unwrap().value() * b;
            let scale = fa.norm() + gb.norm() + 1.0 / x(q, n).powi(2);
            prop_assert!(close(lhs, fa + gb, scale, 1e-12));
        }
        let s = lattice::jackson_integral(&h, -10, 10).unwrap().value();
        let e = lattice::jackson_integral(&f, -10, 10).unwrap().value() * a
            + lattice::jackson_integral(&g, -10, 10).unwrap().value() * b;
        let scale: f64 = (-10..=10)
            .map(|n| (h.value(n).unwrap().norm() + 3.0 * (fv[(n + 10) as usize].0.abs()
                + fv[(n + 10) as usize].1.abs() + gv[(n + 10) as usize].0.abs()
                + gv[(n + 10) as usize].1.abs())) * x(q, n))
            .sum();
        prop_assert!(close(s, e, scale, 1e-12));
    }

    #[test]
    fn jackson_sum_matches_direct_sum(q in 0.1..0.95f64, fv in values(), lo in -10i64..0, hi in 0i64..=10) {
        let (_, f, fr) = grid(q, &fv);
        let direct: Complex64 = (lo..=hi)
            .map(|n| fr[(n + 10) as usize] * (1.0 - q) * x(q, n))
            .sum();
        let got = lattice::jackson_integral(&f, lo, hi).unwrap().value();
        let scale: f64 = (lo..=hi).map(|n| fr[(n + 10) as usize].norm() * x(q, n)).sum();
        prop_assert!(close(got, direct, scale, 1e-13));
    }
}

#[test]
fn reversed_bounds_are_rejected() {
    let l = LatticeSpec::new(0.5, -4, 4).unwrap();
    let f = GridFunction::zeros(l);
    assert!(lattice::jackson_integral(&f, 2, 1).is_err());
    assert!(lattice::delta_q(&f, 4).is_err());
    assert!(lattice::wronskian(&f, &f, -4).is_err());
}
