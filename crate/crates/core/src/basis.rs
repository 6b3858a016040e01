//! Edge-modal basis and Gauss–Legendre quadrature on the unit edge `[-1/2, 1/2]`.
//!
//! The modal basis is the scaled Legendre family
//! `b0 = 1`, `b1 = ξ`, `b2 = ξ² − 1/12`, `b3 = ξ³ − (3/20)ξ`,
//! with `∫ b_i b_j dξ = μ_i δ_ij` and `μ = (1, 1/12, 1/180, 1/2800)`.

use crate::scalar::Scalar;

/// Highest supported edge degree.
pub const MAX_DEGREE: usize = 3;

/// Mass coefficients `∫ b_m² dξ`.
pub const MASS: [f64; 4] = [1.0, 1.0 / 12.0, 1.0 / 180.0, 1.0 / 2800.0];

/// Value of basis function `m` at `xi`.
#[inline]
pub fn basis_value(m: usize, xi: f64) -> f64 {
    match m {
        0 => 1.0,
        1 => xi,
        2 => xi * xi - 1.0 / 12.0,
        3 => xi * xi * xi - 0.15 * xi,
        _ => panic!("edge basis degree {m} not supported"),
    }
}

/// Derivative `b_m'(xi)`; these are the test-function weights of the body terms.
#[inline]
pub fn basis_derivative(m: usize, xi: f64) -> f64 {
    match m {
        0 => 0.0,
        1 => 1.0,
        2 => 2.0 * xi,
        3 => 3.0 * (xi * xi - 0.05),
        _ => panic!("edge basis degree {m} not supported"),
    }
}

/// `∫_{-1/2}^{1/2} ξ^n dξ`.
pub fn monomial_integral(n: usize) -> f64 {
    if n % 2 == 1 {
        0.0
    } else {
        0.5f64.powi(n as i32) / (n as f64 + 1.0)
    }
}

/// Coefficient of `b_m` in the L2 projection of `ξ^n`, i.e. `(1/μ_m) ∫ ξ^n b_m dξ`.
pub fn monomial_moment(n: usize, m: usize) -> f64 {
    // b_m expanded in monomials
    let bm: &[f64] = match m {
        0 => &[1.0],
        1 => &[0.0, 1.0],
        2 => &[-1.0 / 12.0, 0.0, 1.0],
        3 => &[0.0, -0.15, 0.0, 1.0],
        _ => panic!("edge basis degree {m} not supported"),
    };
    let integral: f64 = bm
        .iter()
        .enumerate()
        .map(|(k, c)| c * monomial_integral(n + k))
        .sum();
    integral / MASS[m]
}

/// Gauss–Legendre rule mapped to `[-1/2, 1/2]`; weights sum to one, so a
/// weighted sum is a line average.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussRule {
    /// `n`-point rule, exact for polynomials of degree `2n − 1`.
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "a quadrature rule needs at least one node");
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let nf = n as f64;
        for i in 0..n.div_ceil(2) {
            // Tricomi initial guess, then Newton on P_n.
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
            let mut dp = 1.0;
            for _ in 0..100 {
                let (p, d) = legendre_with_derivative(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre_with_derivative(n, x);
            if d != 0.0 {
                dp = d;
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            // map [-1, 1] -> [-1/2, 1/2]; weights scaled to sum to one
            nodes[i] = -0.5 * x;
            nodes[n - 1 - i] = 0.5 * x;
            weights[i] = 0.5 * w;
            weights[n - 1 - i] = 0.5 * w;
        }
        if n % 2 == 1 {
            nodes[n / 2] = 0.0;
        }
        Self { nodes, weights }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Line average of `f` over `[-1/2, 1/2]`.
    pub fn average<S: Scalar>(&self, f: impl Fn(f64) -> S) -> S {
        let mut acc = S::zero();
        for (x, w) in self.nodes.iter().zip(&self.weights) {
            acc += f(*x).scale(*w);
        }
        acc
    }
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let nf = n as f64;
    let d = nf * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Modal basis of degree `p` on one edge together with its `p + 2` point rule.
#[derive(Debug, Clone, PartialEq)]
pub struct EdgeBasis {
    degree: usize,
    rule: GaussRule,
}

impl EdgeBasis {
    pub fn new(degree: usize) -> Self {
        assert!(degree <= MAX_DEGREE, "edge degree {degree} exceeds {MAX_DEGREE}");
        Self {
            degree,
            rule: GaussRule::new(degree + 2),
        }
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn len(&self) -> usize {
        self.degree + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn rule(&self) -> &GaussRule {
        &self.rule
    }

    pub fn mass(&self) -> &'static [f64] {
        &MASS[..=self.degree]
    }
}

/// `Σ_m coeffs[m] b_m(ξ)`.
#[inline]
pub fn eval_edge_poly<S: Scalar>(coeffs: &[S], xi: f64) -> S {
    let mut acc = S::zero();
    for (m, c) in coeffs.iter().enumerate() {
        acc += c.scale(basis_value(m, xi));
    }
    acc
}

/// L2 projection of `f` onto the basis using the basis' own `p + 2` point rule.
pub fn project_edge<S: Scalar>(f: impl Fn(f64) -> S, basis: &EdgeBasis) -> Vec<S> {
    project_edge_with(f, basis.degree(), basis.rule())
}

/// L2 projection of `f` onto degrees `0..=degree` with an explicit quadrature rule.
pub fn project_edge_with<S: Scalar>(f: impl Fn(f64) -> S, degree: usize, rule: &GaussRule) -> Vec<S> {
    let values: Vec<S> = rule.nodes.iter().map(|&x| f(x)).collect();
    (0..=degree)
        .map(|m| {
            let mut acc = S::zero();
            for ((x, w), v) in rule.nodes.iter().zip(&rule.weights).zip(&values) {
                acc += v.scale(w * basis_value(m, *x));
            }
            acc.scale(1.0 / MASS[m])
        })
        .collect()
}
