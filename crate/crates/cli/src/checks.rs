//! Numerical checks shared by `qsl selftest` and the acceptance target.
//! Each check runs on the default configuration (q = 0.8, α = 0, window
//! [-30, 50], u = x²) and reports a pass flag plus the measured numbers.

use std::f64::consts::PI;

use num_complex::Complex64;
use qsl_core::expand;
use qsl_core::lattice::{GridFunction, LatticeSpec};
use qsl_core::solve::{self, solution_pair};
use qsl_core::spectrum::{self, find_eigenvalues, ScanConfig, SpectrumResult, TridiagonalOracle};
use qsl_core::weyl::{self, MMethod};
use qsl_core::{PotentialSpec, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const SEED: u64 = 0x5eed_2026;

#[derive(Clone, Debug)]
pub struct Outcome {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

impl Outcome {
    pub fn line(&self) -> String {
        let tag = if self.passed { "PASS" } else { "FAIL" };
        format!("{tag} {}: {}", self.name, self.detail)
    }
}

fn run(name: &'static str, body: impl FnOnce() -> Result<(bool, String)>) -> Outcome {
    match body() {
        Ok((passed, detail)) => Outcome {
            name,
            passed,
            detail,
        },
        Err(e) => Outcome {
            name,
            passed: false,
            detail: format!("error: {e}"),
        },
    }
}

/// The potential and boundary angle shared by every check.
pub struct Fixture {
    pub u: GridFunction,
    pub alpha: f64,
}

impl Fixture {
    pub fn standard() -> Result<Self> {
        let l = LatticeSpec::new(0.8, -30, 50)?;
        Ok(Self {
            u: PotentialSpec::harmonic().materialize(&l)?,
            alpha: 0.0,
        })
    }

    fn lattice(&self) -> LatticeSpec {
        *self.u.lattice()
    }

    fn scan(&self, lo: f64, hi: f64, grid: usize) -> Result<SpectrumResult> {
        let mut cfg = ScanConfig::new(lo, hi);
        cfg.grid_points = grid;
        cfg.alpha = self.alpha;
        find_eigenvalues(&cfg, &self.u)
    }
}

fn rng(stream: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(SEED ^ stream)
}

fn random_lambda(rng: &mut ChaCha8Rng) -> Complex64 {
    let im = rng.gen_range(0.1..=5.0) * if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
    Complex64::new(rng.gen_range(-10.0..=10.0), im)
}

/// How the Wronskian deviation from one is measured.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Drift {
    /// `|W_x(φ, θ) - 1|` as is.
    Absolute,
    /// Relative to the Casoratian products entering `W_x`.
    Relative,
}

/// `W_x(φ, θ) = 1` at every interior index for 20 random `(λ, α)`.
pub fn wronskian_constancy(fx: &Fixture, drift: Drift) -> Outcome {
    let name = match drift {
        Drift::Absolute => "Wronskian constancy (absolute)",
        Drift::Relative => "Wronskian constancy (relative to Casoratian terms)",
    };
    run(name, || {
        let mut rng = rng(1);
        let l = fx.lattice();
        let (mut worst_abs, mut worst_rel) = (0.0f64, 0.0f64);
        for _ in 0..20 {
            let lambda = random_lambda(&mut rng);
            let alpha = rng.gen_range(0.0..PI);
            let pair = solution_pair(lambda, alpha, &fx.u)?;
            let (abs, rel) = weyl::wronskian_drift(&pair, l.n_outer() + 1, l.n_inner())?;
            worst_abs = worst_abs.max(abs);
            worst_rel = worst_rel.max(rel);
        }
        let worst = if drift == Drift::Absolute { worst_abs } else { worst_rel };
        Ok((
            worst <= 1e-9,
            format!(
                "max deviation {worst:.3e} (limit 1e-9); absolute {worst_abs:.3e}, \
                 relative to Casoratian terms {worst_rel:.3e}"
            ),
        ))
    })
}

/// Discrete Green formula and the imaginary-part identity on random
/// sub-windows for 20 random `(λ, λ')`.
pub fn green_formula(fx: &Fixture) -> Outcome {
    run("discrete Green formula and imaginary-part identity", || {
        let mut rng = rng(2);
        let l = fx.lattice();
        let (lo, hi) = (l.n_outer() + 1, l.n_inner() - 1);
        let mut worst = 0.0f64;
        let mut worst_eq2 = 0.0f64;
        for _ in 0..20 {
            let (l1, l2) = (random_lambda(&mut rng), random_lambda(&mut rng));
            let alpha = rng.gen_range(0.0..PI);
            let a = rng.gen_range(lo..=hi);
            let c = rng.gen_range(a..=hi);
            let f = solution_pair(l1, alpha, &fx.u)?;
            let g = solution_pair(l2, alpha, &fx.u)?;
            for (x, y) in [(&f.phi, &g.phi), (&f.phi, &g.theta), (&f.theta, &g.theta)] {
                worst = worst.max(solve::green_identity(x, y, l1, l2, a, c)?.residual);
            }
            for h in [&f.phi, &f.theta] {
                let r = solve::green_identity(h, &h.conj(), l1, l1.conj(), a, c)?;
                worst_eq2 = worst_eq2.max(r.residual);
            }
        }
        Ok((
            worst <= 1e-9 && worst_eq2 <= 1e-9,
            format!("max residual {worst:.3e}, imaginary-part identity {worst_eq2:.3e} (limit 1e-9)"),
        ))
    })
}

const M_POINTS: [Complex64; 4] = [
    Complex64::new(0.0, 1.0),
    Complex64::new(1.0, 1.0),
    Complex64::new(0.0, 2.0),
    Complex64::new(5.0, 0.5),
];

/// Three radius routes agree on every rung; radii shrink and disks nest.
pub fn radius_chain(fx: &Fixture) -> Outcome {
    run("Weyl radius chain, monotone radii, nested disks", || {
        let mut rng = rng(3);
        let mut cases: Vec<(Complex64, f64)> = M_POINTS.iter().map(|&z| (z, fx.alpha)).collect();
        for _ in 0..2 {
            let z = Complex64::new(rng.gen_range(-5.0..5.0), rng.gen_range(0.1..10.0));
            cases.push((z, rng.gen_range(0.0..PI)));
        }
        let l = fx.lattice();
        let mut spread = 0.0f64;
        let mut monotone = true;
        let mut nested = true;
        for (lambda, alpha) in cases {
            let pair = solution_pair(lambda, alpha, &fx.u)?;
            for b in (l.n_outer() + 1..l.n_inner()).rev() {
                spread = spread.max(weyl::radius_chain(&pair, b)?.spread());
            }
            let ladder = weyl::disk_ladder(&pair)?;
            for w in ladder.windows(2) {
                monotone &= w[1].log_radius <= w[0].log_radius;
                nested &= w[0].contains(&w[1], 1e-9);
            }
        }
        Ok((
            spread <= 1e-8 && monotone && nested,
            format!("max |Δ ln r| {spread:.3e} (limit 1e-8), monotone {monotone}, nested {nested}"),
        ))
    })
}

/// Disk-center and decaying-solution m agree, with `Im m < 0`.
pub fn m_function(fx: &Fixture) -> Outcome {
    run("m-function cross-method agreement and sign", || {
        let mut worst = 0.0f64;
        let mut ok = true;
        for lambda in M_POINTS {
            let disk = weyl::m_function(lambda, fx.alpha, &fx.u, MMethod::DiskCenter)?;
            let decay = weyl::m_function(lambda, fx.alpha, &fx.u, MMethod::DecayingSolution)?;
            let gap = (disk.m - decay.m).norm();
            let bound = (2.0 * disk.uncertainty).max(1e-6);
            worst = worst.max(gap / bound);
            ok &= gap <= bound && disk.m.im < 0.0 && decay.m.im < 0.0;
        }
        Ok((ok, format!("max gap/bound {worst:.3e}, Im m < 0 on all points: {ok}")))
    })
}

/// `∫ψ(λ)ψ(λ') = (m(λ) - m(λ'))/(λ' - λ)` and `∫|ψ|² = -Im m / ν`.
pub fn weyl_identities(fx: &Fixture) -> Outcome {
    run("psi pairing identity and norm identity", || {
        let i = Complex64::new(0.0, 1.0);
        let rep = weyl::weyl_identity_suite(i, 2.0 * i, fx.alpha, &fx.u)?;
        let p = weyl::psi(i, fx.alpha, &fx.u)?;
        let norm = weyl::norm_identity_residual(&p)?;
        Ok((
            rep.eq10_residual <= 1e-5 && norm <= 1e-5,
            format!(
                "(i, 2i) residual {:.3e}, (i, -i) norm residual {norm:.3e} (limit 1e-5)",
                rep.eq10_residual
            ),
        ))
    })
}

/// Shooting matches the tridiagonal oracle; `u + 5` shifts the spectrum by 5.
pub fn oracle_equivalence(fx: &Fixture) -> Outcome {
    run("oracle equivalence and spectral shift", || {
        let found = fx.scan(0.1, 20.0, 512)?.eigenvalues();
        let oracle = TridiagonalOracle::new(&fx.u, fx.alpha)?.eigenvalues_in(0.1, 20.0);
        if found.len() < 8 || oracle.len() < 8 {
            return Ok((false, format!("only {} / {} eigenvalues", found.len(), oracle.len())));
        }
        let gap = found
            .iter()
            .zip(&oracle)
            .take(8)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        let k = PotentialSpec::Constant(5.0).materialize(&fx.lattice())?;
        let shifted = Fixture {
            u: fx.u.add(&k)?,
            alpha: fx.alpha,
        };
        let moved = shifted.scan(5.1, 25.0, 512)?.eigenvalues();
        let shift = found
            .iter()
            .zip(&moved)
            .take(8)
            .map(|(a, b)| (b - a - 5.0).abs())
            .fold(0.0, f64::max);
        Ok((
            gap <= 1e-4 && shift <= 1e-8 && moved.len() >= 8,
            format!("max oracle gap {gap:.3e} (limit 1e-4), shift error {shift:.3e} (limit 1e-8)"),
        ))
    })
}

/// Gram matrix of the first eight eigenfunctions and the m-pole residues.
pub fn orthonormality(fx: &Fixture) -> Outcome {
    run("orthonormality and residue cross-check", || {
        let sp = fx.scan(0.1, 20.0, 512)?;
        if sp.len() < 8 {
            return Ok((false, format!("only {} eigenvalues", sp.len())));
        }
        let dev = spectrum::identity_deviation(&spectrum::gram_matrix(&sp, 8)?);
        let mut worst = 0.0f64;
        for p in &sp.pairs[..8] {
            let from_m = spectrum::residue_from_m(p.lambda, fx.alpha, &fx.u)?;
            worst = worst.max((from_m - p.residue).abs() / p.residue);
        }
        Ok((
            dev <= 1e-6 && worst <= 1e-3,
            format!("Gram deviation {dev:.3e} (limit 1e-6), residue mismatch {worst:.3e} (limit 1e-3)"),
        ))
    })
}

/// `∫ψ(·, λ₀ + i) φ(·, λ₀) = 1/i` at the lowest eigenvalue.
pub fn eigenvalue_pairing(fx: &Fixture) -> Outcome {
    run("pairing of psi with the ground-state phi", || {
        let sp = fx.scan(0.1, 20.0, 512)?;
        let Some(p) = sp.pairs.first() else {
            return Ok((false, "no eigenvalue found".into()));
        };
        let psi = weyl::psi(Complex64::new(p.lambda, 1.0), fx.alpha, &fx.u)?;
        let phi = solution_pair(Complex64::new(p.lambda, 0.0), fx.alpha, &fx.u)?.phi;
        let v = weyl::pairing(&psi.psi, &phi)?.value();
        let dev = (v - Complex64::new(0.0, -1.0)).norm();
        Ok((dev <= 1e-4, format!("|pairing - 1/i| {dev:.3e} (limit 1e-4)")))
    })
}

/// Values 1, 2, 1 at indices 10, 11, 12.
pub fn bump(l: LatticeSpec) -> GridFunction {
    GridFunction::from_real_fn(l, |n, _| match n {
        10 | 12 => 1.0,
        11 => 2.0,
        _ => 0.0,
    })
}

/// Parseval, pointwise reconstruction, Bessel monotonicity and the
/// coefficient shift law for the bump, using every eigenvalue in
/// `[0.1, lambda_max]`.
pub fn parseval(fx: &Fixture, lambda_max: f64, grid: usize) -> Outcome {
    let name = if lambda_max <= 60.0 {
        "Parseval and expansion, eigenvalues in [0.1, 60]"
    } else {
        "Parseval and expansion, full truncated spectrum"
    };
    run(name, || {
        let sp = fx.scan(0.1, lambda_max, grid)?;
        let f = bump(fx.lattice());
        let i = Complex64::new(0.0, 1.0);
        let rep = expand::parseval_report(&f, &sp, sp.len(), &fx.u, None, Some(i))?;
        let rel_gap = rep.gap().abs() / rep.lhs;
        let rel_point = rep.pointwise_max_residual / 2.0;
        let law = rep.shift_law.as_ref().map_or(f64::INFINITY, |s| s.max_deviation);
        let monotone = rep.bessel_monotone();
        Ok((
            rel_gap <= 1e-3 && rel_point <= 1e-2 && monotone && law <= 1e-5,
            format!(
                "K = {}, gap/∫f² {rel_gap:.3e} (limit 1e-3), pointwise/max|f| {rel_point:.3e} \
                 (limit 1e-2), Bessel monotone {monotone}, shift law {law:.3e} (limit 1e-5)",
                rep.k
            ),
        ))
    })
}

/// Resolvent identities for 10 random finite-support functions at `λ = 1 + i`.
pub fn resolvent(fx: &Fixture) -> Outcome {
    run("resolvent suite", || {
        let mut rng = rng(10);
        let l = fx.lattice();
        let lambda = Complex64::new(1.0, 1.0);
        let (mut a, mut b, mut c, mut d) = (0.0f64, 0.0f64, 0.0f64, true);
        for _ in 0..10 {
            let width = rng.gen_range(1..=8);
            let start = rng.gen_range(l.n_outer() + 2..=l.n_inner() - 1 - width);
            let vals: Vec<f64> = (0..width).map(|_| rng.gen_range(-3.0..3.0)).collect();
            let f = GridFunction::from_real_fn(l, |n, _| {
                usize::try_from(n - start).ok().and_then(|i| vals.get(i)).copied().unwrap_or(0.0)
            });
            let rep = expand::resolvent_suite(&f, lambda, fx.alpha, &fx.u)?;
            a = a.max(rep.stencil);
            b = b.max(rep.eq5);
            c = c.max(rep.eq6);
            d &= rep.bound_holds();
        }
        Ok((
            a <= 1e-9 && b <= 1e-8 && c <= 1e-8 && d,
            format!(
                "(a) {a:.3e} (limit 1e-9), (b) {b:.3e} (limit 1e-8), (c) {c:.3e} (limit 1e-8), \
                 (d) strict {d}"
            ),
        ))
    })
}

/// The invariant suite run by `qsl selftest`.
pub fn selftest() -> Vec<Outcome> {
    let fx = match Fixture::standard() {
        Ok(fx) => fx,
        Err(e) => {
            return vec![Outcome {
                name: "fixture",
                passed: false,
                detail: e.to_string(),
            }]
        }
    };
    vec![
        wronskian_constancy(&fx, Drift::Relative),
        green_formula(&fx),
        radius_chain(&fx),
        m_function(&fx),
        weyl_identities(&fx),
        oracle_equivalence(&fx),
        orthonormality(&fx),
        eigenvalue_pairing(&fx),
        parseval(&fx, 1e4, 8192),
        resolvent(&fx),
    ]
}
