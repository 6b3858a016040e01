//! Explicit SSP Runge–Kutta schemes in Shu–Osher form, and time-step selection.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::CMatrix;
use crate::mesh::EdgeMomentField;
use crate::scalar::Scalar;
use crate::upwind::Velocity;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RkMethod {
    Rk1,
    Ssprk2,
    Ssprk3,
    Ssprk54,
}

/// One term `α·u⁽ᵏ⁾ + β·Δt·L(u⁽ᵏ⁾)` of a stage.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StageTerm {
    pub k: usize,
    pub alpha: f64,
    pub beta: f64,
}

const fn t(k: usize, alpha: f64, beta: f64) -> StageTerm {
    StageTerm { k, alpha, beta }
}

static RK1: [&[StageTerm]; 1] = [&[t(0, 1.0, 1.0)]];
static SSPRK2: [&[StageTerm]; 2] = [&[t(0, 1.0, 1.0)], &[t(0, 0.5, 0.0), t(1, 0.5, 0.5)]];
static SSPRK3: [&[StageTerm]; 3] = [
    &[t(0, 1.0, 1.0)],
    &[t(0, 0.75, 0.0), t(1, 0.25, 0.25)],
    &[t(0, 1.0 / 3.0, 0.0), t(2, 2.0 / 3.0, 2.0 / 3.0)],
];
// Spiteri–Ruuth five-stage, fourth-order
static SSPRK54: [&[StageTerm]; 5] = [
    &[t(0, 1.0, 0.391752226571890)],
    &[t(0, 0.444370493651235, 0.0), t(1, 0.555629506348765, 0.368410593050371)],
    &[t(0, 0.620101851488403, 0.0), t(2, 0.379898148511597, 0.251891774271694)],
    &[t(0, 0.178079954393132, 0.0), t(3, 0.821920045606868, 0.544974750228521)],
    &[
        t(2, 0.517231671970585, 0.0),
        t(3, 0.096059710526147, 0.063692468666290),
        t(4, 0.386708617503269, 0.226007483236906),
    ],
];

impl RkMethod {
    pub const ALL: [RkMethod; 4] = [RkMethod::Rk1, RkMethod::Ssprk2, RkMethod::Ssprk3, RkMethod::Ssprk54];

    pub fn stages(self) -> &'static [&'static [StageTerm]] {
        match self {
            RkMethod::Rk1 => &RK1,
            RkMethod::Ssprk2 => &SSPRK2,
            RkMethod::Ssprk3 => &SSPRK3,
            RkMethod::Ssprk54 => &SSPRK54,
        }
    }

    pub fn order(self) -> usize {
        match self {
            RkMethod::Rk1 => 1,
            RkMethod::Ssprk2 => 2,
            RkMethod::Ssprk3 => 3,
            RkMethod::Ssprk54 => 4,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            RkMethod::Rk1 => "rk1",
            RkMethod::Ssprk2 => "ssprk2",
            RkMethod::Ssprk3 => "ssprk3",
            RkMethod::Ssprk54 => "ssprk54",
        }
    }

    /// The method conventionally paired with a spatial order `degree + 1`.
    pub fn for_degree(degree: usize) -> RkMethod {
        match degree {
            0 => RkMethod::Rk1,
            1 => RkMethod::Ssprk2,
            2 => RkMethod::Ssprk3,
            _ => RkMethod::Ssprk54,
        }
    }
}

impl fmt::Display for RkMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for RkMethod {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "rk1" | "euler" => Ok(RkMethod::Rk1),
            "ssprk2" | "rk2" => Ok(RkMethod::Ssprk2),
            "ssprk3" | "rk3" => Ok(RkMethod::Ssprk3),
            "ssprk54" | "rk4" => Ok(RkMethod::Ssprk54),
            _ => Err(Error::InvalidArgument(format!("unknown Runge-Kutta method '{s}'"))),
        }
    }
}

/// Anything the stage recursion can combine linearly.
pub trait RkState: Clone {
    fn zeroed(&self) -> Self;
    /// `self += a · other`.
    fn add_scaled(&mut self, a: f64, other: &Self);
}

impl<S: Scalar> RkState for EdgeMomentField<S> {
    fn zeroed(&self) -> Self {
        EdgeMomentField::zeros(self.nx(), self.ny(), self.degree())
    }
    fn add_scaled(&mut self, a: f64, other: &Self) {
        self.axpy(a, other)
    }
}

impl RkState for CMatrix {
    fn zeroed(&self) -> Self {
        CMatrix::zeros(self.rows(), self.cols())
    }
    fn add_scaled(&mut self, a: f64, other: &Self) {
        for i in 0..self.rows() {
            for j in 0..self.cols() {
                self[(i, j)] += other[(i, j)] * a;
            }
        }
    }
}

impl RkState for Complex64 {
    fn zeroed(&self) -> Self {
        Complex64::new(0.0, 0.0)
    }
    fn add_scaled(&mut self, a: f64, other: &Self) {
        *self += other * a;
    }
}

impl RkState for f64 {
    fn zeroed(&self) -> Self {
        0.0
    }
    fn add_scaled(&mut self, a: f64, other: &Self) {
        *self += a * other;
    }
}

/// Polynomial in `z` by ascending coefficients; `L(p) = z·p` turns the stage
/// recursion into the stability polynomial.
#[derive(Debug, Clone, PartialEq)]
struct Poly(Vec<f64>);

impl RkState for Poly {
    fn zeroed(&self) -> Self {
        Poly(vec![0.0; self.0.len()])
    }
    fn add_scaled(&mut self, a: f64, other: &Self) {
        if other.0.len() > self.0.len() {
            self.0.resize(other.0.len(), 0.0);
        }
        for (s, o) in self.0.iter_mut().zip(&other.0) {
            *s += a * o;
        }
    }
}

/// One time step `u ↦ u(t + Δt)` by the Shu–Osher stage recursion.
/// `rhs` is evaluated at most once per stage.
pub fn step<T: RkState>(u: &T, dt: f64, method: RkMethod, mut rhs: impl FnMut(&T) -> Result<T>) -> Result<T> {
    let stages = method.stages();
    let mut states: Vec<T> = Vec::with_capacity(stages.len() + 1);
    let mut derivs: Vec<Option<T>> = vec![None; stages.len() + 1];
    states.push(u.clone());
    for row in stages {
        let mut next = u.zeroed();
        for term in row.iter() {
            if term.alpha != 0.0 {
                next.add_scaled(term.alpha, &states[term.k]);
            }
            if term.beta != 0.0 {
                if derivs[term.k].is_none() {
                    derivs[term.k] = Some(rhs(&states[term.k])?);
                }
                next.add_scaled(term.beta * dt, derivs[term.k].as_ref().unwrap());
            }
        }
        states.push(next);
    }
    Ok(states.pop().unwrap())
}

/// Ascending coefficients of the stability polynomial `R(z)`.
pub fn stability_polynomial(method: RkMethod) -> Vec<f64> {
    let shift = |p: &Poly| -> Result<Poly> {
        let mut c = vec![0.0];
        c.extend_from_slice(&p.0);
        Ok(Poly(c))
    };
    let mut r = step(&Poly(vec![1.0]), 1.0, method, shift).expect("polynomial recursion cannot fail").0;
    while r.len() > 1 && *r.last().unwrap() == 0.0 {
        r.pop();
    }
    r
}

/// `R(z)` by Horner's rule.
pub fn eval_polynomial(coeffs: &[f64], z: Complex64) -> Complex64 {
    coeffs
        .iter()
        .rev()
        .fold(Complex64::new(0.0, 0.0), |acc, c| acc * z + c)
}

/// `Δt = f·ν / √((vx/Δx)² + (vy/Δy)²)`.
pub fn compute_dt(nu: f64, v: Velocity, dx: f64, dy: f64, fraction: f64) -> Result<f64> {
    if v.is_zero() {
        return Err(Error::InvalidArgument("velocity must be nonzero to set a time step".into()));
    }
    if !(nu > 0.0 && dx > 0.0 && dy > 0.0 && fraction > 0.0) {
        return Err(Error::InvalidArgument("CFL number, fraction and zone sizes must be positive".into()));
    }
    Ok(fraction * nu / ((v.vx / dx).powi(2) + (v.vy / dy).powi(2)).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn consistency_of_stage_weights() {
        for m in RkMethod::ALL {
            for row in m.stages() {
                let s: f64 = row.iter().map(|t| t.alpha).sum();
                assert!((s - 1.0).abs() < 1e-14, "{m}");
            }
        }
    }

    #[test]
    fn polynomials_for_low_orders() {
        assert_eq!(stability_polynomial(RkMethod::Rk1), vec![1.0, 1.0]);
        let r2 = stability_polynomial(RkMethod::Ssprk2);
        for (a, b) in r2.iter().zip([1.0, 1.0, 0.5]) {
            assert!((a - b).abs() < 1e-15);
        }
        let r3 = stability_polynomial(RkMethod::Ssprk3);
        for (a, b) in r3.iter().zip([1.0, 1.0, 0.5, 1.0 / 6.0]) {
            assert!((a - b).abs() < 1e-15);
        }
        let r4 = stability_polynomial(RkMethod::Ssprk54);
        assert_eq!(r4.len(), 6);
        for (k, a) in r4.iter().take(5).enumerate() {
            let fact: f64 = (1..=k).map(|i| i as f64).product();
            assert!((a - 1.0 / fact).abs() < 1e-13, "k={k} {a}");
        }
    }

    #[test]
    fn zero_rhs_is_identity() {
        for m in RkMethod::ALL {
            let y = step(&Complex64::new(0.3, -0.2), 0.7, m, |_| Ok(Complex64::new(0.0, 0.0))).unwrap();
            assert!((y - Complex64::new(0.3, -0.2)).norm() < 1e-15);
        }
    }

    #[test]
    fn compute_dt_examples() {
        let dt = compute_dt(0.3162, Velocity::new(1.0, 1.0), 0.1, 0.1, 1.0).unwrap();
        assert!((dt - 0.3162 * 0.1 / 2f64.sqrt()).abs() < 1e-15);
        let dt = compute_dt(0.5, Velocity::new(1.0, 0.0), 0.2, 0.2, 1.0).unwrap();
        assert!((dt - 0.1).abs() < 1e-15);
        let a = compute_dt(0.5, Velocity::new(0.3, 0.7), 0.2, 0.1, 0.95).unwrap();
        let b = compute_dt(0.5, Velocity::new(0.3, 0.7), 0.4, 0.2, 0.95).unwrap();
        assert!((b - 2.0 * a).abs() < 1e-15);
        assert!(compute_dt(0.5, Velocity::new(0.0, 0.0), 1.0, 1.0, 1.0).is_err());
    }
}
