#![allow(dead_code)]

use curlkit_core::mesh::EdgeMomentField;
use rand::Rng;

/// Random curl-free edge field: means from a random vertex potential plus a
/// uniform part, higher moments free.
pub fn random_curl_free(nx: usize, ny: usize, degree: usize, dx: f64, dy: f64, rng: &mut impl Rng) -> EdgeMomentField<f64> {
    let pot: Vec<f64> = (0..nx * ny).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let p = |i: usize, j: usize| pot[(j % ny) * nx + (i % nx)];
    let (a, b) = (rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
    let mut f = EdgeMomentField::zeros(nx, ny, degree);
    for j in 0..ny {
        for i in 0..nx {
            // vertex (i, j) is the top-right corner of zone (i, j)
            f.jx_mut(i, j)[0] = a + (p(i, j) - p(i + nx - 1, j)) / dx;
            f.jy_mut(i, j)[0] = b + (p(i, j) - p(i, j + ny - 1)) / dy;
            for m in 1..=degree {
                f.jx_mut(i, j)[m] = rng.gen_range(-1.0..1.0);
                f.jy_mut(i, j)[m] = rng.gen_range(-1.0..1.0);
            }
        }
    }
    f
}

pub fn max_diff(a: &EdgeMomentField<f64>, b: &EdgeMomentField<f64>) -> f64 {
    a.jx_data()
        .iter()
        .zip(b.jx_data())
        .chain(a.jy_data().iter().zip(b.jy_data()))
        .fold(0.0, |m, (x, y)| m.max((x - y).abs()))
}
