use std::f64::consts::PI;

use curlkit_core::basis::basis_value;
use curlkit_core::experiments::Problem;
use curlkit_core::mesh::{discrete_circulation, init_from_gradient, Mesh};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[test]
fn plane_wave_edge_moments_match_fine_quadrature() {
    let mesh = Mesh::square(8, -0.5, 0.5).unwrap();
    let p = Problem::PlaneWave;
    let f = init_from_gradient(|x, y| p.potential(x, y), |x, y| p.gradient(x, y), &mesh, 3);
    let h = mesh.dx();
    // composite midpoint rule with 4000 panels per edge
    let panels = 4000;
    let fine = |g: &dyn Fn(f64) -> f64, m: usize| -> f64 {
        let mass = [1.0, 1.0 / 12.0, 1.0 / 180.0, 1.0 / 2800.0][m];
        (0..panels)
            .map(|k| {
                let xi = -0.5 + (k as f64 + 0.5) / panels as f64;
                g(xi) * basis_value(m, xi)
            })
            .sum::<f64>()
            / panels as f64
            / mass
    };
    for j in 0..8 {
        for i in 0..8 {
            let (xc, yc) = mesh.zone_center(i, j);
            for m in 0..=3 {
                let jy = fine(&|xi| -2.0 * PI * (2.0 * PI * (xc + 0.5 * h + yc + xi * h)).sin(), m);
                let jx = fine(&|xi| -2.0 * PI * (2.0 * PI * (xc + xi * h + yc + 0.5 * h)).sin(), m);
                // midpoint error ~ (1/panels)² relative to the moment scale
                let tol = 2e-5 * [1.0, 12.0, 180.0, 2800.0][m];
                assert!((f.jy(i, j)[m] - jy).abs() < tol, "jy ({i},{j}) m={m}: {} vs {jy}", f.jy(i, j)[m]);
                assert!((f.jx(i, j)[m] - jx).abs() < tol, "jx ({i},{j}) m={m}: {} vs {jx}", f.jx(i, j)[m]);
            }
        }
    }
}

#[test]
fn circulation_telescopes() {
    let mut rng = ChaCha8Rng::seed_from_u64(51);
    let mesh = Mesh::new(9, 7, 0.4, 0.3, 0.0, 0.0).unwrap();
    let lat = mesh.lattice::<f64>();
    let mut f = curlkit_core::mesh::EdgeMomentField::for_mesh(&mesh, 1);
    for v in f.jx_data_mut().iter_mut() {
        *v = rng.gen_range(-1.0..1.0);
    }
    for v in f.jy_data_mut() {
        *v = rng.gen_range(-1.0..1.0);
    }
    // over a block, area-weighted circulation equals the boundary line integral
    let (i0, i1, j0, j1) = (2isize, 6isize, 1isize, 5isize);
    let mut inside = 0.0;
    for j in j0..j1 {
        for i in i0..i1 {
            inside += discrete_circulation(&f, &lat, mesh.dx(), mesh.dy(), i, j) * mesh.dx() * mesh.dy();
        }
    }
    let mut boundary = 0.0;
    for j in j0..j1 {
        boundary += (f.jy((i1 - 1) as usize, j as usize)[0] - f.jy((i0 - 1) as usize, j as usize)[0]) * mesh.dy();
    }
    for i in i0..i1 {
        boundary -= (f.jx(i as usize, (j1 - 1) as usize)[0] - f.jx(i as usize, (j0 - 1) as usize)[0]) * mesh.dx();
    }
    assert!((inside - boundary).abs() < 1e-13);
    // and the whole periodic mesh sums to zero
    let mut total = 0.0;
    for j in 0..7 {
        for i in 0..9 {
            total += discrete_circulation(&f, &lat, mesh.dx(), mesh.dy(), i, j);
        }
    }
    assert!(total.abs() < 1e-12);
}

#[test]
fn problem_gradients_match_potentials() {
    let mut rng = ChaCha8Rng::seed_from_u64(52);
    for p in [Problem::PlaneWave, Problem::Vortex] {
        let (lo, hi) = p.domain();
        for _ in 0..200 {
            let (x, y) = (rng.gen_range(lo..hi), rng.gen_range(lo..hi));
            let h = 1e-5;
            let fx = (p.potential(x + h, y) - p.potential(x - h, y)) / (2.0 * h);
            let fy = (p.potential(x, y + h) - p.potential(x, y - h)) / (2.0 * h);
            let (gx, gy) = p.gradient(x, y);
            assert!((fx - gx).abs() < 1e-6 * (1.0 + gx.abs()) && (fy - gy).abs() < 1e-6 * (1.0 + gy.abs()), "{p} at ({x}, {y})");
        }
    }
}

#[test]
fn initial_fields_are_curl_free() {
    for p in [Problem::PlaneWave, Problem::Vortex] {
        let (lo, hi) = p.domain();
        let mesh = Mesh::square(24, lo, hi).unwrap();
        let f = init_from_gradient(|x, y| p.potential(x, y), |x, y| p.gradient(x, y), &mesh, 2);
        assert!(curlkit_core::mesh::max_circulation(&f, &mesh) < 1e-12 * f.max_abs().max(1.0));
    }
}
