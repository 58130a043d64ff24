//! Acceptance suite: one test per criterion, each printing a PASS line
//! with the measured figure. Criteria 6-8 run minutes to hours and are
//! `#[ignore]`d by default:
//!
//! ```text
//! cargo test --release -p qhd --test acceptance -- --include-ignored
//! ```

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use qhd::diagonalization::{mode_report, to_w};
use qhd::dispersion::ModelParams;
use qhd::divisors::{loglog_slope, measure_estimate, scan_fit};
use qhd::energy::{build_e3, default_floor, verify_cancellation};
use qhd::experiments::divisor_campaign::default_measure_triple;
use qhd::experiments::{run_drift, run_lifespan, ExperimentConfig};
use qhd::hamiltonian::{build_k3_w, build_k3_z, k_exact};
use qhd::integrator::{evolve, prepare_initial, EvolveOptions, ModeProfile, Stepper};
use qhd::lattice::{ball, LatticePoint, TorusShape};
use qhd::madelung::{
    gauge_reconstruct, gauge_reduce, madelung_forward, madelung_inverse, random_pair,
};
use qhd::spectral::SpectralField;
use qhd::trilinear::{
    ad_inverse, diagonal_poisson_value, poisson_with_diagonal, QuadraticDiagonal,
};

fn defaults() -> (TorusShape, ModelParams) {
    (
        TorusShape::new(vec![1.32, 1.74]).unwrap(),
        ModelParams::new(1.0, 1.0, vec![1.0]).unwrap(),
    )
}

fn random_field(shape: &TorusShape, j_max: i32, scale: f64, seed: u64) -> SpectralField {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut w = SpectralField::zero(shape.clone());
    for j in ball(j_max, shape) {
        w.insert(
            j,
            scale * Complex64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5),
        );
    }
    w
}

#[test]
fn criterion_1_algebraic_identities() {
    let (shape, p) = defaults();
    let s = 6.0;
    let k3w = build_k3_w(&p, 8, &shape);
    let mut worst_residual = 0.0f64;
    for n_cut in [4.0, 10.0] {
        let me = build_e3(&k3w, s, n_cut, &shape, &p, default_floor(&p)).unwrap();
        worst_residual = worst_residual.max(verify_cancellation(&k3w, &me, &shape, &p));
    }
    assert!(worst_residual <= 1e-10, "cancellation residual {worst_residual:.3e}");

    let omega = QuadraticDiagonal::Omega {
        shape: shape.clone(),
        params: p.clone(),
    };
    let ns = QuadraticDiagonal::Sobolev { s };
    let w = random_field(&shape, 8, 1.0, 1);
    let diag = diagonal_poisson_value(&ns, &omega, &w);
    assert_eq!(diag, 0.0, "{{N_s, K^2}} must vanish identically");

    let inv = ad_inverse(&poisson_with_diagonal(&omega, &k3w), &shape, &p, default_floor(&p))
        .unwrap();
    let roundtrip = k3w
        .iter()
        .map(|(k, c)| (inv.get(k) - c).norm() / (1.0 + c.norm()))
        .fold(0.0f64, f64::max);
    assert!(roundtrip <= 1e-12, "ad round-trip {roundtrip:.3e}");
    println!(
        "[PASS] criterion 1: cancellation {worst_residual:.2e}, {{N_s,K^2}} = {diag}, ad round-trip {roundtrip:.2e}"
    );
}

#[test]
fn criterion_2_structure_suite() {
    let (shape, p) = defaults();
    let mut worst_det = 0.0f64;
    let mut worst_defect = 0.0f64;
    for j in ball(16, &shape) {
        let (sym, defect) = mode_report(&j, &shape, &p).unwrap();
        worst_det = worst_det.max(sym);
        worst_defect = worst_defect.max(defect);
    }
    assert!(worst_det <= 1e-12, "det defect {worst_det:.3e}");
    assert!(worst_defect <= 1e-10, "diagonalization defect {worst_defect:.3e}");

    let bound = 1.0 + p.kappa().sqrt() * p.beta();
    let s = 6.0;
    let mut worst_ratio = 0.0f64;
    for seed in 0..100u64 {
        let z = random_field(&shape, 16, 1.0, 1000 + seed);
        let norm_z = z.h_s_norm(s);
        if norm_z == 0.0 {
            continue;
        }
        let w = to_w(&z, &shape, &p);
        worst_ratio = worst_ratio.max(w.h_s_norm(s) / norm_z);
    }
    assert!(worst_ratio <= bound, "operator norm {worst_ratio:.6} > {bound}");
    println!(
        "[PASS] criterion 2: det defect {worst_det:.2e}, diag defect {worst_defect:.2e}, norm ratio {worst_ratio:.4} <= {bound}"
    );
}

#[test]
fn criterion_3_transform_suite() {
    let (shape, p) = defaults();
    let s = 6.0;
    let n = 16;
    let m = p.mass();
    let mut worst_rt = 0.0f64;
    let mut worst_gauge = 0.0f64;
    let mut lemma_ok = true;
    for seed in 0..100u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut pair = random_pair(&shape, n, 4, s + 1.0, &mut rng);
        let d0 = pair.delta(&p, s);
        pair.scale(1e-3 / d0);
        let psi = madelung_forward(&pair, &p).unwrap();
        // round trip in H^s
        let back = madelung_inverse(&psi, &p).unwrap();
        let psi2 = madelung_forward(&back, &p).unwrap();
        let mean_phase =
            (Complex64::new(0.0, (pair.phi_mean() - back.phi_mean()) / p.hbar())).exp();
        let mut diff = 0.0f64;
        for (a, b) in psi.data.iter().zip(&psi2.data) {
            diff = diff.max((a - b * mean_phase).norm());
        }
        worst_rt = worst_rt.max(diff);
        // gauge reduction reconstructs exactly
        let g = gauge_reduce(&psi).unwrap();
        let rec = gauge_reconstruct(&g, n);
        let mut gerr = 0.0f64;
        for (a, b) in psi.data.iter().zip(&rec.data) {
            gerr = gerr.max((a - b).norm());
        }
        worst_gauge = worst_gauge.max(gerr);
        // smallness inequalities with the stated constants
        let delta = pair.delta(&p, s);
        lemma_ok &= g.z.h_s_norm(s) <= 2.0 * m.sqrt() * delta;
        lemma_ok &= back.delta(&p, s) <= 16.0 * g.z.h_s_norm(s) / m.sqrt();
    }
    assert!(worst_rt <= 1e-10, "Madelung round trip {worst_rt:.3e}");
    assert!(worst_gauge <= 1e-12, "gauge reconstruction {worst_gauge:.3e}");
    assert!(lemma_ok, "smallness inequalities violated");
    println!(
        "[PASS] criterion 3: round trip {worst_rt:.2e}, gauge {worst_gauge:.2e}, smallness bounds hold on 100 samples"
    );
}

#[test]
fn criterion_4_oracle_suite() {
    let shape = TorusShape::new(vec![1.32, 1.74]).unwrap();
    let n = 16;
    let mut worst_fd = 0.0f64;
    for (tag, g_coeffs) in [("linear", vec![1.0]), ("quadratic", vec![1.0, 0.4])] {
        let p = ModelParams::new(1.0, 1.0, g_coeffs).unwrap();
        let k3 = build_k3_z(&p, 3, &shape);
        for seed in 0..6u64 {
            let mut v = random_field(&shape, 3, 1.0, 77 + seed);
            let norm = v.l2_norm_sq().sqrt();
            v.scale(1.0 / norm);
            let f = |t: f64| {
                let mut zt = v.clone();
                zt.scale(t);
                k_exact(&zt, &p, n).unwrap()
            };
            let stencil = |h: f64| {
                (f(2.0 * h) - 2.0 * f(h) + 2.0 * f(-h) - f(-2.0 * h)) / (2.0 * h * h * h)
            };
            let h = 5e-3;
            let fd = ((4.0 * stencil(h / 2.0) - stencil(h)) / 3.0) / 6.0;
            let exact = k3.evaluate(&v);
            let rel = (fd - exact).abs() / exact.abs().max(1e-3);
            assert!(rel <= 1e-7, "{tag} g: fd mismatch {rel:.3e}");
            worst_fd = worst_fd.max(rel);
        }
    }
    // gradient against directional finite differences
    let p = ModelParams::new(1.0, 1.0, vec![1.0]).unwrap();
    let k3 = build_k3_z(&p, 3, &shape);
    let w = random_field(&shape, 3, 0.3, 5);
    let v = random_field(&shape, 3, 1.0, 6);
    let h = 1e-6;
    let mut wp = w.clone();
    let mut wm = w.clone();
    for (j, c) in v.iter() {
        wp.add_assign(j, c * h);
        wm.add_assign(j, -c * h);
    }
    let fd = (k3.evaluate(&wp) - k3.evaluate(&wm)) / (2.0 * h);
    let vf = k3.vector_field(&w);
    let mut exact = 0.0;
    for (j, c) in v.iter() {
        // d/dt G = 2 Re sum_k dG/d(conj w_k) conj(v_k); the field is -i
        // times that gradient
        exact += 2.0 * (Complex64::new(0.0, 1.0) * vf.get(j) * c.conj()).re;
    }
    let rel = (fd - exact).abs() / exact.abs().max(1e-8);
    assert!(rel <= 1e-6, "vector field fd mismatch {rel:.3e}");
    println!("[PASS] criterion 4: cubic table fd {worst_fd:.2e} (rel), gradient fd {rel:.2e} (rel)");
}

#[test]
fn criterion_5_integrator_suite() {
    let (shape, p) = defaults();
    // mass conservation over 1e4 steps
    let psi0 = prepare_initial(1e-2, ModeProfile { exponent: 5.0 }, 1, &shape, &p, 16, 4, 4.0)
        .unwrap();
    let mut stepper = Stepper::new(&shape, &p, 16, 1e-3, 4.0);
    let m0 = psi0.mass();
    let mut psi = psi0.clone();
    stepper.evolve_steps(&mut psi, 10_000);
    let mass_drift = ((psi.mass() - m0) / m0).abs();
    assert!(mass_drift <= 1e-11, "mass drift {mass_drift:.3e}");

    // Richardson factor of the energy error over unit time
    let drift_at = |dt: f64| -> f64 {
        let mut stepper = Stepper::new(&shape, &p, 16, dt, 4.0);
        let opts = EvolveOptions {
            sample_every: ((0.05 / dt).round() as usize).max(1),
            blow_up_guard: 1.0,
            ..EvolveOptions::new(1.0)
        };
        let traj = evolve(&mut stepper, &psi0, &opts).unwrap();
        let h0 = traj.hamiltonian[0];
        traj.hamiltonian
            .iter()
            .fold(0.0f64, |m, &h| m.max((h - h0).abs()))
    };
    let base = 2e-3;
    let factor = drift_at(base) / drift_at(base / 2.0);
    assert!(
        (3.5..=4.5).contains(&factor),
        "Richardson factor {factor:.3}"
    );

    // single-mode free-flow period
    let free = ModelParams::degenerate(1.0, 1.0).unwrap();
    let j = LatticePoint::new(&[2, 1]).unwrap();
    let x = qhd::lattice::anisotropic_norm_sq(&j, &shape);
    let mut z = SpectralField::zero(shape.clone());
    z.insert(j, Complex64::new(0.3, 0.1));
    let start = z.to_grid(16);
    let period = 2.0 * std::f64::consts::PI / (0.5 * free.hbar() * x);
    let steps = 1024;
    let mut stepper = Stepper::new(&shape, &free, 16, period / steps as f64, 4.0);
    let mut psi = start.clone();
    stepper.evolve_steps(&mut psi, steps);
    let period_err = psi
        .data
        .iter()
        .zip(&start.data)
        .fold(0.0f64, |m, (a, b)| m.max((a - b).norm()));
    assert!(period_err <= 1e-12, "period error {period_err:.3e}");
    println!(
        "[PASS] criterion 5: mass drift {mass_drift:.2e}, Richardson {factor:.2}, period error {period_err:.2e}"
    );
}

#[test]
#[ignore = "runs the full d=2 campaign at J = 40 over 20 shapes (minutes)"]
fn criterion_6_divisor_campaign() {
    let p = ModelParams::new(1.0, 1.0, vec![1.0]).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut fitted = 0usize;
    let mut equal_floor = f64::INFINITY;
    for _ in 0..20 {
        let a: Vec<f64> = (0..2).map(|_| 1.0 + 3.0 * rng.gen::<f64>()).collect();
        let shape = TorusShape::new(a).unwrap();
        let summary = scan_fit(40, &shape, &p);
        assert!(
            summary.resonance.is_none(),
            "unexpected resonance: {:?}",
            summary.resonance
        );
        let fit = summary.fit.expect("fit must exist");
        // the fitted gamma is the scan minimum, so by construction there
        // are zero violations at (gamma, M); require it nondegenerate
        assert!(fit.gamma >= 1e-8, "gamma {} too small", fit.gamma);
        fitted += 1;
        equal_floor = equal_floor.min(summary.equal_sign_min);
    }
    assert_eq!(fitted, 20);
    assert!(
        equal_floor >= p.kappa().sqrt(),
        "equal-sign floor {equal_floor}"
    );

    let iso = scan_fit(12, &TorusShape::isotropic(2), &p);
    assert!(iso.resonance.is_some(), "isotropic shape must be resonant");

    let (sigma, triple) = default_measure_triple();
    let grid: Vec<f64> = (0..=12).map(|k| 10f64.powf(-6.0 + 0.5 * k as f64)).collect();
    let table =
        measure_estimate(sigma, [&triple[0], &triple[1], &triple[2]], &grid, 100_000, 1)
            .unwrap();
    let slope = loglog_slope(&table).unwrap();
    assert!(slope >= 1.0 / 6.0, "measure slope {slope:.3}");
    println!(
        "[PASS] criterion 6: 20/20 fits, equal-sign floor {equal_floor:.3} >= sqrt(kappa), isotropic resonant, measure slope {slope:.3} >= 1/6"
    );
}

#[test]
#[ignore = "integrates to t = 3e4 total on a 32^2 grid at a fine step (about an hour)"]
fn criterion_7_drift_experiment() {
    // The step is pinned finer than the integration default: the measured
    // max|dE_s/dt| carries a splitting floor proportional to dt^2 that
    // must sit below the bar (see the drift module notes).
    let cfg = ExperimentConfig {
        epsilons: vec![1e-3, 5e-4],
        dt: 1.25e-4,
        ..ExperimentConfig::default()
    };
    let out = std::env::temp_dir().join("qhd_acceptance_drift");
    let report = run_drift(&cfg, &out).unwrap();
    let r0 = report.arms[0].ratio;
    assert!(r0 <= 0.2, "drift ratio {r0:.4} at eps = 1e-3");
    let improvement = report.improvements[0];
    assert!(
        (1.5..=3.0).contains(&improvement),
        "improvement {improvement:.3}"
    );
    println!(
        "[PASS] criterion 7: ratio {r0:.4} <= 0.2 at eps = 1e-3, halving improves by {improvement:.2}"
    );
}

#[test]
#[ignore = "hours-scale sweep at eps down to 3e-4"]
fn criterion_8_lifespan_scaling() {
    let cfg = ExperimentConfig::default();
    let out = std::env::temp_dir().join("qhd_acceptance_lifespan");
    let result = run_lifespan(&cfg, &out).unwrap();
    for p in &result.points {
        assert!(
            p.exit_time >= 1.0 / p.epsilon,
            "exit {} below the local-theory horizon at eps {}",
            p.exit_time,
            p.epsilon
        );
        assert!(!p.blow_up, "blow-up at eps {}", p.epsilon);
    }
    let slope = result.slope.expect("slope");
    assert!(
        slope <= -1.5 + 1e-6,
        "lifespan slope {slope:.3} shallower than -1.5"
    );
    let censored = result.points.iter().filter(|p| p.censored).count();
    println!(
        "[PASS] criterion 8: slope {slope:.3} <= -1.5, exits above 1/eps, {censored}/{} censored at budget",
        result.points.len()
    );
}
