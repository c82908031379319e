// SPDX-License-Identifier: MIT OR Apache-2.0

//! Point-interaction systems for a cluster of resonant particles.
//!
//! Each particle is replaced by a 3-vector `Q_m`. The magnetic system couples
//! the dipole moments of the resonant divergence-free mode,
//!
//! ```text
//! Q_m − η k² s P₀ Σ_{j≠m} Υ_k(z_m, z_j) Q_j = s P₀ curl E^Inc(z_m),   s = a⁵ / (1 − k²ηa²λ),
//! ```
//!
//! and the electric system couples the harmonic-gradient moments through
//! `P₁ = a³ Σ (1 + ηλ⁽³⁾)⁻¹ ∫e⁽³⁾ ⊗ ∫e⁽³⁾`.
//!
//! Far fields use the `e^{ik x̂·y}` phase convention throughout, and the
//! exact volume quadrature in [`crate::oracle`] does the same.

use crate::cluster::Cluster;
use crate::error::{Error, Result};
use crate::greens::{dyadic_green, PlaneWave};
use crate::linalg::{ccross, cmat_mul, cmat_norm2, cnorm, cond2, dot, lu_solve, norm, to_cmat, CMat3, CVec3, Mat3, Vec3, C64, I};
use crate::spectral::{polarization_p1, EigenFamily};
use crate::tuning::PhysicalParams;
use ndarray::{Array1, Array2};
use std::fmt::Write as _;
use std::path::Path;

/// Largest Assumption-IV residual accepted by the magnetic assembly.
pub const TUNING_RESIDUAL_CAP: f64 = 1e-8;
pub const SOLVE_RESIDUAL_CAP: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SystemKind {
    Magnetic,
    Electric,
}

#[derive(Clone, Debug)]
pub struct InteractionSystem {
    pub kind: SystemKind,
    pub matrix: Array2<C64>,
    pub rhs: Array1<C64>,
    pub a: f64,
    pub h: f64,
    pub eta: C64,
    pub k: f64,
    /// Weight multiplying `P` in the coupling blocks: `k²s` (magnetic) or 1 (electric).
    pub block_scale: C64,
    pub polarization: CMat3,
    pub margin: f64,
}

impl InteractionSystem {
    pub fn len(&self) -> usize {
        self.rhs.len() / 3
    }

    pub fn is_empty(&self) -> bool {
        self.rhs.is_empty()
    }

    pub fn block(&self, m: usize, j: usize) -> CMat3 {
        let mut b = [[C64::default(); 3]; 3];
        for r in 0..3 {
            for c in 0..3 {
                b[r][c] = self.matrix[[3 * m + r, 3 * j + c]];
            }
        }
        b
    }
}

#[derive(Clone, Debug)]
pub struct FoldyLaxSolution {
    pub kind: SystemKind,
    pub q: Vec<CVec3>,
    pub residual: f64,
    pub margin: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct FarFieldPattern {
    pub directions: Vec<Vec3>,
    pub values: Vec<CVec3>,
    /// Number of input directions that were not unit vectors and got normalized.
    pub renormalized: usize,
}

impl FarFieldPattern {
    pub fn zeros(directions: Vec<Vec3>) -> Self {
        let values = vec![[C64::default(); 3]; directions.len()];
        Self { directions, values, renormalized: 0 }
    }

    pub fn add(&self, other: &FarFieldPattern) -> Result<FarFieldPattern> {
        if self.directions.len() != other.directions.len() {
            return Err(Error::Domain("patterns sampled on different direction sets".into()));
        }
        let values = self.values.iter().zip(&other.values).map(|(a, b)| [a[0] + b[0], a[1] + b[1], a[2] + b[2]]).collect();
        Ok(Self { directions: self.directions.clone(), values, renormalized: self.renormalized })
    }

    /// Root mean square of `|E∞|` over the sampled directions.
    pub fn rms(&self) -> f64 {
        if self.values.is_empty() {
            return 0.0;
        }
        (self.values.iter().map(|v| cnorm(v).powi(2)).sum::<f64>() / self.values.len() as f64).sqrt()
    }

    /// Direction-averaged relative L² distance to `reference`.
    pub fn relative_discrepancy(&self, reference: &FarFieldPattern) -> Result<f64> {
        if self.values.len() != reference.values.len() {
            return Err(Error::Domain("patterns sampled on different direction sets".into()));
        }
        let mut num = 0.0;
        let mut den = 0.0;
        for (a, b) in self.values.iter().zip(&reference.values) {
            num += (0..3).map(|i| (a[i] - b[i]).norm_sqr()).sum::<f64>();
            den += cnorm(b).powi(2);
        }
        if den == 0.0 {
            return Ok(if num == 0.0 { 0.0 } else { f64::INFINITY });
        }
        Ok((num / den).sqrt())
    }

    /// Largest `|x̂·E∞| / |E∞|` over the samples.
    pub fn transversality(&self) -> f64 {
        self.directions
            .iter()
            .zip(&self.values)
            .map(|(x, v)| {
                let n = cnorm(v);
                if n == 0.0 {
                    0.0
                } else {
                    (v[0] * x[0] + v[1] * x[1] + v[2] * x[2]).norm() / n
                }
            })
            .fold(0.0, f64::max)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("dir_x,dir_y,dir_z,re_Ex,im_Ex,re_Ey,im_Ey,re_Ez,im_Ez\n");
        for (x, v) in self.directions.iter().zip(&self.values) {
            let _ = writeln!(
                out,
                "{:.17e},{:.17e},{:.17e},{:.17e},{:.17e},{:.17e},{:.17e},{:.17e},{:.17e}",
                x[0], x[1], x[2], v[0].re, v[0].im, v[1].re, v[1].im, v[2].re, v[2].im
            );
        }
        out
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_csv())?;
        Ok(())
    }
}

fn check_geometry(cluster: &Cluster) -> Result<()> {
    if cluster.len() > 1 && !cluster.is_disjoint() {
        return Err(Error::Geometry(format!("particles overlap (boundary gap {:.3e})", cluster.d_min)));
    }
    Ok(())
}

fn assemble(
    cluster: &Cluster,
    eta: C64,
    k: f64,
    block_scale: C64,
    p: &CMat3,
    rhs_at: impl Fn(Vec3) -> CVec3,
) -> Result<(Array2<C64>, Array1<C64>)> {
    let n = cluster.len();
    let mut matrix = Array2::from_elem((3 * n, 3 * n), C64::default());
    let mut rhs = Array1::from_elem(3 * n, C64::default());
    let weight = -eta * block_scale;
    for m in 0..n {
        for r in 0..3 {
            matrix[[3 * m + r, 3 * m + r]] = C64::from(1.0);
        }
        let b = rhs_at(cluster.centers[m]);
        for r in 0..3 {
            rhs[3 * m + r] = b[r];
        }
        for j in 0..n {
            if j == m {
                continue;
            }
            let pu = cmat_mul(p, &dyadic_green(k, cluster.centers[m], cluster.centers[j])?);
            for r in 0..3 {
                for c in 0..3 {
                    matrix[[3 * m + r, 3 * j + c]] = weight * pu[r][c];
                }
            }
        }
    }
    Ok((matrix, rhs))
}

/// `a⁵ / (1 − k²ηa²λ)`, the amplitude of the resonant dipole moment.
pub fn magnetic_scale(params: &PhysicalParams) -> C64 {
    params.detuning().inv() * params.a.powi(5)
}

pub fn assemble_magnetic(cluster: &Cluster, params: &PhysicalParams, p0: &Mat3, incident: &PlaneWave) -> Result<InteractionSystem> {
    let res = params.residual();
    if !(res <= TUNING_RESIDUAL_CAP) {
        return Err(Error::Precondition(format!("parameters are not tuned to resonance (residual {res:.3e})")));
    }
    check_geometry(cluster)?;
    let incident = incident.with_k(params.k)?;
    let s = magnetic_scale(params);
    let k = params.k;
    let p = to_cmat(p0);
    let sp = p.map(|row| row.map(|x| x * s));
    let (matrix, rhs) = assemble(cluster, params.eta, k, s * (k * k), &p, |z| {
        let ce = incident.curl_e_over_ik(z).map(|x| x * (I * k));
        crate::linalg::cmat_vec(&sp, &ce)
    })?;
    let margin = invertibility_margin(cluster, params, &p, SystemKind::Magnetic);
    Ok(InteractionSystem {
        kind: SystemKind::Magnetic,
        matrix,
        rhs,
        a: params.a,
        h: params.h,
        eta: params.eta,
        k,
        block_scale: s * (k * k),
        polarization: p,
        margin,
    })
}

/// `a³ Σ (1 + ηλ⁽³⁾)⁻¹ ∫e ⊗ ∫e`, the scaled electric polarization.
pub fn electric_polarization(family3: &EigenFamily, eta: C64, a: f64) -> Result<CMat3> {
    Ok(polarization_p1(family3, eta)?.map(|row| row.map(|x| x * a.powi(3))))
}

/// `p1` carries its `a³` factor (see [`electric_polarization`]).
pub fn assemble_electric(cluster: &Cluster, params: &PhysicalParams, p1: &CMat3, incident: &PlaneWave) -> Result<InteractionSystem> {
    check_geometry(cluster)?;
    let incident = incident.with_k(params.k)?;
    let (matrix, rhs) = assemble(cluster, params.eta, params.k, C64::from(1.0), p1, |z| {
        let e = incident.theta_perp().map(|x| incident.phase(z) * x);
        crate::linalg::cmat_vec(p1, &e)
    })?;
    let margin = invertibility_margin(cluster, params, p1, SystemKind::Electric);
    Ok(InteractionSystem {
        kind: SystemKind::Electric,
        matrix,
        rhs,
        a: params.a,
        h: params.h,
        eta: params.eta,
        k: params.k,
        block_scale: C64::from(1.0),
        polarization: *p1,
        margin,
    })
}

/// Left-hand side of the sufficient invertibility condition; `< 1` guarantees a solution.
///
/// Magnetic: `k²|η|a⁵‖P₀‖ / (d³|1 − k²ηa²λ|)`. Electric: `|η|‖P₁‖ / d³` with `P₁`
/// already carrying `a³`. A single particle has no coupling and margin 0.
pub fn invertibility_margin(cluster: &Cluster, params: &PhysicalParams, p: &CMat3, kind: SystemKind) -> f64 {
    if cluster.len() < 2 {
        return 0.0;
    }
    let d3 = cluster.d_min.powi(3);
    let pn = cmat_norm2(p);
    match kind {
        SystemKind::Magnetic => {
            let det = params.detuning().norm();
            params.k * params.k * params.eta.norm() * params.a.powi(5) * pn / (d3 * det)
        }
        SystemKind::Electric => params.eta.norm() * pn / d3,
    }
}

pub fn solve(sys: &InteractionSystem) -> Result<FoldyLaxSolution> {
    let n = sys.len();
    let (x, residual) = match lu_solve(&sys.matrix, &sys.rhs) {
        Ok(v) => v,
        Err(Error::Singular { detail, .. }) => {
            return Err(Error::Singular { detail, cond: cond2(&sys.matrix).unwrap_or(f64::INFINITY) });
        }
        Err(e) => return Err(e),
    };
    if residual > SOLVE_RESIDUAL_CAP {
        return Err(Error::Singular {
            detail: format!("relative residual {residual:.3e} after LU"),
            cond: cond2(&sys.matrix).unwrap_or(f64::INFINITY),
        });
    }
    let q = (0..n).map(|m| [x[3 * m], x[3 * m + 1], x[3 * m + 2]]).collect();
    Ok(FoldyLaxSolution { kind: sys.kind, q, residual, margin: sys.margin })
}

fn unit_directions(directions: &[Vec3]) -> Result<(Vec<Vec3>, usize)> {
    let mut fixed = 0;
    let mut out = Vec::with_capacity(directions.len());
    for d in directions {
        let n = norm(*d);
        if !(n > 0.0 && n.is_finite()) {
            return Err(Error::Domain(format!("direction {d:?} cannot be normalized")));
        }
        if (n - 1.0).abs() > 1e-12 {
            fixed += 1;
            out.push(d.map(|x| x / n));
        } else {
            out.push(*d);
        }
    }
    Ok((out, fixed))
}

/// `E∞(x̂) = −ikη Σ_m e^{ikx̂·z_m} x̂ × Q_m` from a magnetic solution.
pub fn far_field(cluster: &Cluster, sol: &FoldyLaxSolution, eta: C64, k: f64, directions: &[Vec3]) -> Result<FarFieldPattern> {
    let (dirs, renormalized) = unit_directions(directions)?;
    let pref = -I * k * eta;
    let values = dirs
        .iter()
        .map(|x| {
            let mut v = [C64::default(); 3];
            for (z, q) in cluster.centers.iter().zip(&sol.q) {
                let ph = (I * (k * dot(*x, *z))).exp() * pref;
                let c = ccross(*x, *q);
                for i in 0..3 {
                    v[i] += ph * c[i];
                }
            }
            v
        })
        .collect();
    Ok(FarFieldPattern { directions: dirs, values, renormalized })
}

/// `η(I − x̂⊗x̂) Σ_m e^{ikx̂·z_m} Q_m` from an electric solution (`Q_m ≈ ∫P³E_m`).
pub fn far_field_p3_correction(
    cluster: &Cluster,
    sol3: &FoldyLaxSolution,
    eta: C64,
    k: f64,
    directions: &[Vec3],
) -> Result<FarFieldPattern> {
    let (dirs, renormalized) = unit_directions(directions)?;
    let values = dirs
        .iter()
        .map(|x| {
            let mut s = [C64::default(); 3];
            for (z, q) in cluster.centers.iter().zip(&sol3.q) {
                let ph = (I * (k * dot(*x, *z))).exp() * eta;
                for i in 0..3 {
                    s[i] += ph * q[i];
                }
            }
            let xs = s[0] * x[0] + s[1] * x[1] + s[2] * x[2];
            [s[0] - xs * x[0], s[1] - xs * x[1], s[2] - xs * x[2]]
        })
        .collect();
    Ok(FarFieldPattern { directions: dirs, values, renormalized })
}
