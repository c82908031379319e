// SPDX-License-Identifier: MIT OR Apache-2.0

use dielectric_cluster::cluster::{fibonacci_sphere, Cluster};
use dielectric_cluster::foldylax::*;
use dielectric_cluster::greens::{dyadic_green, PlaneWave};
use dielectric_cluster::linalg::{ccross, cmat_mul, cnorm, to_cmat, CMat3, C64};
use dielectric_cluster::spectral::{eigen_div_free, eigen_grad_harmonic, polarization_p0, subspace_projectors, voxelize, ReferenceShape};
use dielectric_cluster::tuning::{PhysicalParams, Sign};
use ndarray::{Array1, Array2};
use ndarray_linalg::Norm;

const LAMBDA: f64 = 0.024544890633225;

fn ball() -> ReferenceShape {
    ReferenceShape::ball(0.5).unwrap()
}

fn wave() -> PlaneWave {
    PlaneWave::new([0.0, 0.0, 1.0], [1.0, 0.0, 0.0], 1.0).unwrap()
}

fn tuned(a: f64, c0: f64) -> PhysicalParams {
    PhysicalParams::tuned(a, 0.9, 0.7, C64::from(0.5), C64::from(c0), Sign::Minus, LAMBDA).unwrap()
}

fn p0() -> [[f64; 3]; 3] {
    [[0.012, 0.001, 0.0], [0.001, 0.011, 0.0], [0.0, 0.0, 0.013]]
}

fn pair(a: f64, gap: f64) -> Cluster {
    Cluster::new(vec![[0.0; 3], [a + gap, 0.0, 0.0]], a, ball()).unwrap()
}

fn entry_close(x: C64, y: C64, tol: f64) -> bool {
    (x - y).norm() <= tol * x.norm().max(y.norm()).max(1e-300)
}

#[test]
fn coupling_blocks_match_the_dyadic_kernel() {
    let p = tuned(0.1, 1.0);
    let cl = Cluster::new(vec![[0.0; 3], [0.3, 0.1, 0.0], [-0.1, 0.25, 0.2]], p.a, ball()).unwrap();
    let sys = assemble_magnetic(&cl, &p, &p0(), &wave()).unwrap();
    let w = -p.eta * sys.block_scale;
    assert!(entry_close(sys.block_scale, magnetic_scale(&p) * (p.k * p.k), 1e-15));
    for m in 0..3 {
        for j in 0..3 {
            let b = sys.block(m, j);
            if m == j {
                assert_eq!(b, to_cmat(&[[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]]));
                continue;
            }
            let expect = cmat_mul(&to_cmat(&p0()), &dyadic_green(p.k, cl.centers[m], cl.centers[j]).unwrap());
            for r in 0..3 {
                for c in 0..3 {
                    assert!(entry_close(b[r][c], w * expect[r][c], 1e-14));
                }
            }
        }
    }
}

#[test]
fn electric_blocks_are_symmetric_under_swap() {
    let p = tuned(0.1, 1.0);
    let p1: CMat3 = to_cmat(&[[0.001, 0.0, 0.0002], [0.0, 0.001, 0.0], [0.0002, 0.0, 0.0012]]);
    let cl = pair(0.1, 0.2);
    let sys = assemble_electric(&cl, &p, &p1, &wave()).unwrap();
    let pu = cmat_mul(&p1, &dyadic_green(p.k, cl.centers[0], cl.centers[1]).unwrap());
    let (b01, b10) = (sys.block(0, 1), sys.block(1, 0));
    for r in 0..3 {
        for c in 0..3 {
            assert!(entry_close(b01[r][c], b10[r][c], 1e-15));
            assert!(entry_close(b01[r][c], -p.eta * pu[r][c], 1e-14));
        }
    }
}

#[test]
fn zero_contrast_electric_system_is_the_identity() {
    let p = tuned(0.1, 1.0).with_eta(C64::default());
    let p1 = to_cmat(&[[0.001, 0.0, 0.0], [0.0, 0.001, 0.0], [0.0, 0.0, 0.001]]);
    let sys = assemble_electric(&pair(0.1, 0.2), &p, &p1, &wave()).unwrap();
    assert_eq!(sys.matrix, Array2::from_diag(&Array1::from_elem(6, C64::from(1.0))));
    assert_eq!(sys.margin, 0.0);
    let sol = solve(&sys).unwrap();
    for m in 0..2 {
        for r in 0..3 {
            assert_eq!(sol.q[m][r], sys.rhs[3 * m + r]);
        }
    }
}

#[test]
fn single_electric_particle_returns_the_polarized_incident_field() {
    let p = tuned(0.1, 1.0);
    let p1 = to_cmat(&[[0.001, 0.0, 0.0], [0.0, 0.002, 0.0], [0.0, 0.0, 0.003]]);
    let z = [0.1, -0.2, 0.3];
    let cl = Cluster::new(vec![z], p.a, ball()).unwrap();
    let sol = solve(&assemble_electric(&cl, &p, &p1, &wave()).unwrap()).unwrap();
    let inc = wave().with_k(p.k).unwrap();
    for r in 0..3 {
        let e = inc.phase(z) * inc.theta_perp()[r];
        assert!(entry_close(sol.q[0][r], p1[r][r] * e, 1e-12));
    }
}

#[test]
fn rhs_is_linear_in_the_polarization() {
    let p = tuned(0.1, 1.0);
    let cl = pair(0.1, 0.3);
    let s1 = assemble_magnetic(&cl, &p, &p0(), &wave()).unwrap();
    let s2 = assemble_magnetic(&cl, &p, &p0().map(|r| r.map(|x| 2.0 * x)), &wave()).unwrap();
    assert!((s2.rhs.norm_l2() / s1.rhs.norm_l2() - 2.0).abs() < 1e-14);
}

#[test]
fn two_term_neumann_series_is_accurate_for_weak_coupling() {
    let p = tuned(0.1, 1.0);
    let mut gap = 0.1;
    let cl = loop {
        let cl = pair(0.1, gap);
        let sys = assemble_magnetic(&cl, &p, &p0(), &wave()).unwrap();
        if sys.margin <= 0.1 {
            break cl;
        }
        gap *= 1.1;
    };
    let sys = assemble_magnetic(&cl, &p, &p0(), &wave()).unwrap();
    let sol = solve(&sys).unwrap();
    let n = sys.matrix.nrows();
    let coupling = Array2::from_diag(&Array1::from_elem(n, C64::from(1.0))) - &sys.matrix;
    let approx = &sys.rhs + &coupling.dot(&sys.rhs);
    let exact = Array1::from_iter(sol.q.iter().flatten().cloned());
    let rel = (&approx - &exact).norm_l2() / exact.norm_l2();
    let c = coupling.norm_l2();
    let bound = c * c / (1.0 - c);
    assert!(c < 1.0);
    assert!(rel <= bound, "two-term error {rel:.3e} above {bound:.3e} (margin {:.3})", sys.margin);
    assert!(rel <= sys.margin.max(c).powi(2) * 1.5);
}

#[test]
fn margin_follows_its_scaling_laws() {
    let p = tuned(0.1, 1.0);
    let p0c = to_cmat(&p0());
    let m1 = invertibility_margin(&pair(0.1, 0.1), &p, &p0c, SystemKind::Magnetic);
    let m2 = invertibility_margin(&pair(0.1, 0.2), &p, &p0c, SystemKind::Magnetic);
    assert!((m1 / m2 - 8.0).abs() < 1e-12);
    let m3 = invertibility_margin(&pair(0.1, 0.1), &p, &p0c.map(|r| r.map(|x| x * 3.0)), SystemKind::Magnetic);
    assert!((m3 / m1 - 3.0).abs() < 1e-12);
    let e1 = invertibility_margin(&pair(0.1, 0.1), &p, &p0c, SystemKind::Electric);
    let e2 = invertibility_margin(&pair(0.1, 0.1), &p.with_eta(p.eta * 2.0), &p0c, SystemKind::Electric);
    assert!((e2 / e1 - 2.0).abs() < 1e-12);
    assert_eq!(invertibility_margin(&pair(0.1, 0.1), &p.with_eta(C64::default()), &p0c, SystemKind::Electric), 0.0);
    // Substituting |1 − k²ηa²λ| = c₀a^h
    let cl = pair(0.1, 0.1);
    let expect =
        p.k * p.k * p.eta.norm() * p.a.powf(5.0 - p.h) * dielectric_cluster::linalg::cmat_norm2(&p0c) / (p.c0.norm() * cl.d_min.powi(3));
    assert!((m1 / expect - 1.0).abs() < 1e-10);
}

#[test]
fn far_field_vanishes_for_moments_along_the_direction() {
    let cl = Cluster::new(vec![[0.0; 3], [0.0, 0.4, 0.0]], 0.1, ball()).unwrap();
    let x = [0.0, 0.6, 0.8];
    let q = [C64::new(0.0, 0.0), C64::new(0.6, 0.3), C64::new(0.8, 0.4)];
    let sol = FoldyLaxSolution { kind: SystemKind::Magnetic, q: vec![q, q.map(|v| v * 2.0)], residual: 0.0, margin: 0.0 };
    let ff = far_field(&cl, &sol, C64::from(5.0), 3.0, &[x]).unwrap();
    assert!(cnorm(&ff.values[0]) < 1e-15);
}

#[test]
fn single_particle_far_field_magnitude() {
    let cl = Cluster::new(vec![[0.0; 3]], 0.1, ball()).unwrap();
    let q = [C64::new(0.1, 0.2), C64::new(-0.3, 0.0), C64::new(0.05, 0.1)];
    let sol = FoldyLaxSolution { kind: SystemKind::Magnetic, q: vec![q], residual: 0.0, margin: 0.0 };
    let (eta, k) = (C64::new(4.0, 1.0), 2.5);
    let ff = far_field(&cl, &sol, eta, k, &fibonacci_sphere(40)).unwrap();
    for (x, v) in ff.directions.iter().zip(&ff.values) {
        let expect = k * eta.norm() * cnorm(&ccross(*x, q));
        assert!((cnorm(v) - expect).abs() <= 1e-13 * expect);
    }
    assert!(ff.transversality() <= 1e-10);
}

#[test]
fn identical_particles_interfere_constructively_broadside() {
    let q = [C64::new(0.1, 0.2), C64::new(-0.3, 0.0), C64::new(0.05, 0.1)];
    let one = Cluster::new(vec![[0.0; 3]], 0.1, ball()).unwrap();
    let two = Cluster::new(vec![[0.0; 3], [0.5, 0.0, 0.0]], 0.1, ball()).unwrap();
    let s1 = FoldyLaxSolution { kind: SystemKind::Magnetic, q: vec![q], residual: 0.0, margin: 0.0 };
    let s2 = FoldyLaxSolution { kind: SystemKind::Magnetic, q: vec![q, q], residual: 0.0, margin: 0.0 };
    let dirs = vec![[0.0, 1.0, 0.0], [0.0, 0.6, -0.8], [0.0, 0.0, 1.0]];
    let f1 = far_field(&one, &s1, C64::from(3.0), 4.0, &dirs).unwrap();
    let f2 = far_field(&two, &s2, C64::from(3.0), 4.0, &dirs).unwrap();
    for (a, b) in f1.values.iter().zip(&f2.values) {
        assert!((cnorm(b) - 2.0 * cnorm(a)).abs() <= 1e-14 * cnorm(b));
    }
}

#[test]
fn non_unit_directions_are_normalized() {
    let cl = Cluster::new(vec![[0.0; 3]], 0.1, ball()).unwrap();
    let q = [C64::new(1.0, 0.0), C64::default(), C64::default()];
    let sol = FoldyLaxSolution { kind: SystemKind::Magnetic, q: vec![q], residual: 0.0, margin: 0.0 };
    let ff = far_field(&cl, &sol, C64::from(1.0), 1.0, &[[0.0, 2.0, 0.0], [0.0, 0.0, 1.0]]).unwrap();
    assert_eq!(ff.renormalized, 1);
    assert_eq!(ff.directions[0], [0.0, 1.0, 0.0]);
}

#[test]
fn solver_residual_is_recorded() {
    let p = tuned(0.05, 1.0);
    let cl = Cluster::new(vec![[0.0; 3], [0.2, 0.0, 0.0], [0.0, 0.2, 0.1], [0.15, 0.2, -0.1]], p.a, ball()).unwrap();
    let sol = solve(&assemble_magnetic(&cl, &p, &p0(), &wave()).unwrap()).unwrap();
    assert!(sol.residual <= SOLVE_RESIDUAL_CAP);
    assert_eq!(sol.q.len(), 4);
}

#[test]
fn gradient_correction_shrinks_with_the_particle_scale() {
    let g = voxelize(&ball(), 8).unwrap();
    let dec = subspace_projectors(&g).unwrap();
    let f1 = eigen_div_free(&g, &dec, 6).unwrap();
    let f3 = eigen_grad_harmonic(&g, &dec, None).unwrap();
    let n0 = f1.n0.unwrap();
    let p0 = polarization_p0(&f1, n0).unwrap();
    let dirs = fibonacci_sphere(200);
    let mut ratios = Vec::new();
    for a in [0.1, 0.05] {
        let p = PhysicalParams::tuned(a, 0.9, 0.7, C64::from(0.5), C64::from(1.0), Sign::Minus, f1.modes[n0].lambda).unwrap();
        let cl = Cluster::new(vec![[0.0; 3], [a.powf(p.t), 0.0, 0.0]], a, ball()).unwrap();
        let main = far_field(&cl, &solve(&assemble_magnetic(&cl, &p, &p0, &wave()).unwrap()).unwrap(), p.eta, p.k, &dirs).unwrap();
        let p1 = electric_polarization(&f3, p.eta, a).unwrap();
        let sol3 = solve(&assemble_electric(&cl, &p, &p1, &wave()).unwrap()).unwrap();
        let corr = far_field_p3_correction(&cl, &sol3, p.eta, p.k, &dirs).unwrap();
        assert!(corr.transversality() <= 1e-12);
        ratios.push(corr.rms() / main.rms());
    }
    assert!(ratios[1] < ratios[0], "{ratios:?}");
}

#[test]
fn zero_contrast_correction_is_zero() {
    let cl = pair(0.1, 0.2);
    let sol = FoldyLaxSolution { kind: SystemKind::Electric, q: vec![[C64::from(1.0); 3]; 2], residual: 0.0, margin: 0.0 };
    let ff = far_field_p3_correction(&cl, &sol, C64::default(), 2.0, &fibonacci_sphere(10)).unwrap();
    assert_eq!(ff.rms(), 0.0);
}
