// SPDX-License-Identifier: MIT OR Apache-2.0

//! Randomized invariants shared by the property suite and the acceptance run.

#![allow(dead_code)]

use dielectric_cluster::cluster::Cluster;
use dielectric_cluster::foldylax::{
    assemble_magnetic, far_field, invertibility_margin, solve, FoldyLaxSolution, SystemKind, SOLVE_RESIDUAL_CAP,
};
use dielectric_cluster::greens::{dyadic_green, scalar_green, PlaneWave};
use dielectric_cluster::linalg::{cond2, lu_solve, C64};
use dielectric_cluster::oracle::operator_blocks;
use dielectric_cluster::spectral::{voxelize, ReferenceShape, VoxelGrid};
use dielectric_cluster::tuning::{PhysicalParams, Sign};
use ndarray::{Array1, Array2};
use proptest::prelude::*;
use proptest::test_runner::{Config, TestRunner};

pub type Vec3 = [f64; 3];

pub fn vec3(r: f64) -> impl Strategy<Value = Vec3> {
    [-r..r, -r..r, -r..r]
}

pub fn cplx(r: f64) -> impl Strategy<Value = C64> {
    (-r..r, -r..r).prop_map(|(a, b)| C64::new(a, b))
}

fn cvec(n: usize, r: f64) -> impl Strategy<Value = Vec<C64>> {
    proptest::collection::vec(cplx(r), n)
}

fn unit(v: Vec3) -> Option<Vec3> {
    let n = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
    (n > 1e-3).then(|| v.map(|x| x / n))
}

fn ball() -> ReferenceShape {
    ReferenceShape::ball(0.5).unwrap()
}

fn runner(cases: u32) -> TestRunner {
    TestRunner::new(Config { cases, failure_persistence: None, ..Config::default() })
}

fn report<T: std::fmt::Debug>(r: Result<(), proptest::test_runner::TestError<T>>) -> Result<(), String> {
    r.map_err(|e| e.to_string())
}

/// `Υ(x, y) = Υ(y, x) = Υ(x, y)ᵀ` and `Φ(x, y) = Φ(y, x)`.
pub fn greens_reciprocity(cases: u32) -> Result<(), String> {
    report(runner(cases).run(&(0.0..10.0f64, vec3(2.0), vec3(2.0)), |(k, x, y)| {
        let r = ((x[0] - y[0]).powi(2) + (x[1] - y[1]).powi(2) + (x[2] - y[2]).powi(2)).sqrt();
        prop_assume!(r > 1e-2);
        let g = dyadic_green(k, x, y).unwrap();
        let gt = dyadic_green(k, y, x).unwrap();
        let scale = g.iter().flatten().map(|z| z.norm()).fold(0.0, f64::max);
        for i in 0..3 {
            for j in 0..3 {
                prop_assert!((g[i][j] - gt[i][j]).norm() <= 1e-12 * scale);
                prop_assert!((g[i][j] - g[j][i]).norm() <= 1e-12 * scale);
            }
        }
        let s = scalar_green(k, x, y).unwrap();
        prop_assert!((s - scalar_green(k, y, x).unwrap()).norm() <= 1e-14 * s.norm());
        Ok(())
    }))
}

/// `x̂·E∞(x̂) = 0` for arbitrary dipole moments.
pub fn far_field_transversality(cases: u32) -> Result<(), String> {
    let strat = (1usize..5, cvec(12, 1.0), 0.1..20.0f64, cplx(50.0), proptest::collection::vec(vec3(1.0), 8));
    report(runner(cases).run(&strat, |(n, qs, k, eta, dirs)| {
        let centers: Vec<Vec3> = (0..n).map(|m| [0.3 * m as f64, 0.1 * (m % 2) as f64, 0.0]).collect();
        let cl = Cluster::new(centers, 0.01, ball()).unwrap();
        let q = (0..n).map(|m| [qs[3 * m], qs[3 * m + 1], qs[3 * m + 2]]).collect();
        let sol = FoldyLaxSolution { kind: SystemKind::Magnetic, q, residual: 0.0, margin: 0.0 };
        let dirs: Vec<Vec3> = dirs.into_iter().filter_map(unit).collect();
        prop_assume!(!dirs.is_empty());
        let pat = far_field(&cl, &sol, eta, k, &dirs).unwrap();
        prop_assert!(pat.transversality() <= 1e-12, "{}", pat.transversality());
        Ok(())
    }))
}

fn params(a: f64, sigma: f64, c0: f64, lambda: f64) -> PhysicalParams {
    PhysicalParams::tuned(a, 0.9, 0.7, C64::from(sigma), C64::from(c0), Sign::Minus, lambda).unwrap()
}

fn pair(a: f64, gap: f64) -> Cluster {
    Cluster::new(vec![[0.0; 3], [gap + a, 0.0, 0.0]], a, ball()).unwrap()
}

/// The invertibility margin scales as `d⁻³` in the particle gap.
pub fn margin_scaling(cases: u32) -> Result<(), String> {
    let strat = (0.01..0.2f64, 0.05..1.0f64, 0.1..0.9f64, 0.1..2.0f64, cplx(1.0));
    report(runner(cases).run(&strat, |(a, gap, sigma, c0, p)| {
        let pr = params(a, sigma, c0, 0.0245);
        let pm = [[p, C64::from(0.1), C64::default()], [C64::from(0.1), p, C64::default()], [C64::default(); 3]];
        for kind in [SystemKind::Magnetic, SystemKind::Electric] {
            let m1 = invertibility_margin(&pair(a, gap), &pr, &pm, kind);
            let m2 = invertibility_margin(&pair(a, 2.0 * gap), &pr, &pm, kind);
            prop_assert!((m1 / m2 - 8.0).abs() <= 1e-9, "{kind:?}: {m1} / {m2}");
        }
        Ok(())
    }))
}

/// LU solves of assembled systems meet the residual cap, and the forward error
/// of a manufactured solution respects `cond₂ · residual`.
pub fn solver_residuals(cases: u32) -> Result<(), String> {
    let strat = (2usize..6, 0.02..0.1f64, proptest::collection::vec(vec3(1.0), 6), vec3(1.0), cvec(18, 1.0));
    report(runner(cases).run(&strat, |(n, a, pos, dir, xs)| {
        let centers: Vec<Vec3> = (0..n).map(|m| [pos[m][0] + 3.0 * m as f64, pos[m][1], pos[m][2]]).collect();
        let cl = Cluster::new(centers, a, ball()).unwrap();
        let theta = unit(dir).unwrap_or([0.0, 0.0, 1.0]);
        let perp = unit(if theta[0].abs() < 0.9 { [0.0, -theta[2], theta[1]] } else { [-theta[2], 0.0, theta[0]] }).unwrap();
        let pr = params(a, 0.5, 1.0, 0.0245);
        let wave = PlaneWave::new(theta, perp, pr.k).unwrap();
        let p0 = [[0.02, 0.0, 0.001], [0.0, 0.02, 0.0], [0.001, 0.0, 0.03]];
        let sys = assemble_magnetic(&cl, &pr, &p0, &wave).unwrap();
        let sol = solve(&sys).unwrap();
        prop_assert!(sol.residual <= SOLVE_RESIDUAL_CAP);
        let xt = Array1::from(xs[..3 * n].to_vec());
        let b = sys.matrix.dot(&xt);
        let (x, res) = lu_solve(&sys.matrix, &b).unwrap();
        let err = (&x - &xt).iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt() / xt.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        let bound = 10.0 * cond2(&sys.matrix).unwrap() * res.max(f64::EPSILON);
        prop_assert!(err <= bound, "forward error {err:.3e} above {bound:.3e}");
        Ok(())
    }))
}

fn small_grid() -> VoxelGrid {
    voxelize(&ball(), 4).unwrap()
}

/// `⟨K_k f, g⟩ = ⟨f, K_{−k} g⟩` for both Helmholtz volume operators.
pub fn adjoint_pairing(cases: u32) -> Result<(), String> {
    let reference = small_grid();
    let dim = 3 * reference.num_cells();
    let strat = (0.05..1.0f64, vec3(1.0), 0.0..20.0f64, cvec(dim, 1.0), cvec(dim, 1.0));
    report(runner(cases).run(&strat, |(a, z, k, f, g)| {
        let grid = reference.scaled(a, z);
        let (mp, np) = operator_blocks(&[&grid], k).unwrap();
        let (mm, nm) = operator_blocks(&[&grid], -k).unwrap();
        for (plus, minus) in [(&mp, &mm), (&np, &nm)] {
            let f = Array1::from(f[..plus.ncols()].to_vec());
            let g = Array1::from(g[..plus.ncols()].to_vec());
            let lhs = pairing(plus, &f, &g);
            let rhs: C64 = f.iter().zip(&minus.dot(&g)).map(|(x, y)| x * y.conj()).sum();
            let scale = op_scale(plus) * norm(&f) * norm(&g);
            prop_assert!((lhs - rhs).norm() <= 1e-12 * scale, "{lhs} vs {rhs}");
        }
        Ok(())
    }))
}

fn pairing(m: &Array2<C64>, f: &Array1<C64>, g: &Array1<C64>) -> C64 {
    m.dot(f).iter().zip(g).map(|(x, y)| x * y.conj()).sum()
}

fn op_scale(m: &Array2<C64>) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max) * (m.nrows() as f64)
}

fn norm(v: &Array1<C64>) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

pub const INVARIANTS: [(&str, fn(u32) -> Result<(), String>); 5] = [
    ("greens reciprocity", greens_reciprocity),
    ("far-field transversality", far_field_transversality),
    ("margin d^-3 scaling", margin_scaling),
    ("solver residuals", solver_residuals),
    ("adjoint pairing", adjoint_pairing),
];
