use curlkit_core::linalg::CMatrix;
use curlkit_core::timeint::{eval_polynomial, stability_polynomial, step, RkMethod};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn integrate(method: RkMethod, omega: f64, steps: usize) -> Complex64 {
    let dt = 1.0 / steps as f64;
    let mut y = Complex64::new(1.0, 0.0);
    for _ in 0..steps {
        y = step(&y, dt, method, |y| Ok(Complex64::new(0.0, omega) * y)).unwrap();
    }
    y
}

#[test]
fn observed_order_on_oscillator() {
    let omega = 3.0;
    let exact = Complex64::from_polar(1.0, omega);
    for method in RkMethod::ALL {
        // least-squares slope of log error against log dt
        let steps = [40usize, 80, 160, 320];
        let pts: Vec<(f64, f64)> = steps
            .iter()
            .map(|&n| ((1.0 / n as f64).ln(), (integrate(method, omega, n) - exact).norm().ln()))
            .collect();
        let mx = pts.iter().map(|p| p.0).sum::<f64>() / 4.0;
        let my = pts.iter().map(|p| p.1).sum::<f64>() / 4.0;
        let slope = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum::<f64>() / pts.iter().map(|p| (p.0 - mx).powi(2)).sum::<f64>();
        assert!((slope - method.order() as f64).abs() < 0.1, "{method}: {slope}");
    }
}

#[test]
fn four_stage_polynomial_error_is_fifth_order() {
    let r = stability_polynomial(RkMethod::Ssprk54);
    let err = |z: Complex64| (eval_polynomial(&r, z) - z.exp()).norm();
    for arg in [0.3, 1.0, 2.0, 3.0] {
        // halving z divides the error by about 2⁵ once |z| is small; below
        // |z| ≈ 0.01 the error drowns in roundoff
        for k in 0..3 {
            let z = Complex64::from_polar(0.2 / 2f64.powi(k), arg);
            let ratio = err(z) / err(z / 2.0);
            assert!((ratio / 32.0 - 1.0).abs() < 0.15, "arg={arg} |z|={}: {ratio}", z.norm());
        }
    }
}

#[test]
fn matrix_step_matches_polynomial_of_matrix() {
    let mut rng = ChaCha8Rng::seed_from_u64(41);
    let a = CMatrix::from_fn(5, 5, |_, _| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
    let dt = 0.3;
    for method in RkMethod::ALL {
        let g = step(&CMatrix::identity(5), dt, method, |u| Ok(a.mul(u))).unwrap();
        let r = stability_polynomial(method);
        // Horner on matrices
        let z = a.scaled(Complex64::new(dt, 0.0));
        let mut p = CMatrix::zeros(5, 5);
        for c in r.iter().rev() {
            p = z.mul(&p).add(&CMatrix::identity(5).scaled(Complex64::new(*c, 0.0)));
        }
        let diff = g.add(&p.scaled(Complex64::new(-1.0, 0.0))).max_abs();
        assert!(diff < 1e-13, "{method}: {diff}");
    }
}

#[test]
fn rhs_evaluations_per_step() {
    for (method, stages) in RkMethod::ALL.into_iter().zip([1, 2, 3, 5]) {
        let mut calls = 0;
        step(&1.0f64, 0.1, method, |y| {
            calls += 1;
            Ok(-y)
        })
        .unwrap();
        assert_eq!(calls, stages, "{method}");
    }
}
