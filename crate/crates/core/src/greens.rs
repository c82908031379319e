// SPDX-License-Identifier: MIT OR Apache-2.0

//! Free-space Helmholtz kernels.
//!
//! The scalar kernel is `Φ_k(x,y) = e^{ik|x−y|} / (4π|x−y|)` and the dyadic kernel is
//!
//! ```text
//! Υ_k(x,y) = Hess_x Φ_k(x,y) + k² Φ_k(x,y) I
//!          = Φ_k [ (k² + (ikr − 1)/r²) I + (3 − 3ikr − k²r²)/r² · r̂ r̂ᵀ ]
//! ```
//!
//! with `r = |x − y|`, `r̂ = (x − y)/r`.

use crate::error::{Error, Result};
use crate::linalg::{cross, dot, norm, sub, CMat3, CVec3, Vec3, C64, I};
use std::f64::consts::PI;

const ZERO: C64 = C64 { re: 0.0, im: 0.0 };

/// Default number of tail terms in [`dyadic_green_split`].
pub const DEFAULT_SPLIT_TERMS: usize = 12;
const SPLIT_STOP: f64 = 1e-16;

fn check_k(k: f64) -> Result<()> {
    if !(k.is_finite() && k >= 0.0) {
        return Err(Error::Domain(format!("wavenumber must be finite and nonnegative, got {k}")));
    }
    Ok(())
}

fn separation(x: Vec3, y: Vec3) -> Result<(f64, Vec3)> {
    let d = sub(x, y);
    let r = norm(d);
    if r == 0.0 || !r.is_finite() {
        return Err(Error::Coincident { x, y });
    }
    Ok((r, [d[0] / r, d[1] / r, d[2] / r]))
}

fn outer_combo(a: C64, b: C64, u: Vec3) -> CMat3 {
    let mut m = [[ZERO; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            m[i][j] = b * (u[i] * u[j]);
            if i == j {
                m[i][j] += a;
            }
        }
    }
    m
}

pub fn scalar_green(k: f64, x: Vec3, y: Vec3) -> Result<C64> {
    check_k(k)?;
    let (r, _) = separation(x, y)?;
    Ok((I * (k * r)).exp() / (4.0 * PI * r))
}

pub fn dyadic_green(k: f64, x: Vec3, y: Vec3) -> Result<CMat3> {
    check_k(k)?;
    let (r, u) = separation(x, y)?;
    let phi = (I * (k * r)).exp() / (4.0 * PI * r);
    let ikr = I * (k * r);
    let kr2 = (k * r) * (k * r);
    let a = phi * (k * k + (ikr - 1.0) / (r * r));
    let b = phi * ((3.0 - 3.0 * ikr - kr2) / (r * r));
    Ok(outer_combo(a, b, u))
}

/// Splits `Hess Φ_k` into the static Hessian `Hess Φ₀` and the smooth correction
/// `Hess(Φ_k − Φ₀)`, the latter summed as a power series in `k r`.
///
/// The two leading orders are kept in closed form,
/// `−(k²/2)Φ₀(I − r̂r̂ᵀ) − ik³/(12π) I`, and `n_terms` further terms of
/// `(1/4π) Σ_{n≥4} (ik)ⁿ/n! · Hess(r^{n−1})` are added, stopping early once a term
/// falls below `1e-16` of the running sum.
pub fn dyadic_green_split(k: f64, x: Vec3, y: Vec3, n_terms: usize) -> Result<(CMat3, CMat3)> {
    check_k(k)?;
    let (r, u) = separation(x, y)?;
    let phi0 = 1.0 / (4.0 * PI * r);
    let stat = outer_combo(C64::from(-phi0 / (r * r)), C64::from(3.0 * phi0 / (r * r)), u);

    let k2 = k * k;
    let mut a = C64::from(-0.5 * k2 * phi0) - I * (k2 * k / (12.0 * PI));
    let mut b = C64::from(0.5 * k2 * phi0);
    // (ik)^n / n! * r^{n-3}, advanced one order at a time.
    let mut coef = (I * k).powu(3) / 6.0;
    for n in 4..(4 + n_terms) {
        coef = coef * (I * k) * r / n as f64;
        let m = (n - 1) as f64;
        let ta = coef * m / (4.0 * PI);
        let tb = coef * m * (n as f64 - 3.0) / (4.0 * PI);
        a += ta;
        b += tb;
        let scale = a.norm().max(b.norm());
        if ta.norm().max(tb.norm()) <= SPLIT_STOP * scale {
            break;
        }
    }
    Ok((stat, outer_combo(a, b, u)))
}

/// Incident plane wave with direction `θ` and polarization `θ⊥`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PlaneWave {
    theta: Vec3,
    theta_perp: Vec3,
    k: f64,
}

impl PlaneWave {
    pub fn new(theta: Vec3, theta_perp: Vec3, k: f64) -> Result<Self> {
        check_k(k)?;
        if (norm(theta) - 1.0).abs() > 1e-12 || (norm(theta_perp) - 1.0).abs() > 1e-12 {
            return Err(Error::Domain("plane-wave direction and polarization must be unit vectors".into()));
        }
        if dot(theta, theta_perp).abs() > 1e-12 {
            return Err(Error::Domain("polarization must be orthogonal to the direction".into()));
        }
        Ok(Self { theta, theta_perp, k })
    }

    pub fn theta(&self) -> Vec3 {
        self.theta
    }

    pub fn theta_perp(&self) -> Vec3 {
        self.theta_perp
    }

    pub fn k(&self) -> f64 {
        self.k
    }

    pub fn with_k(&self, k: f64) -> Result<Self> {
        Self::new(self.theta, self.theta_perp, k)
    }

    pub fn phase(&self, x: Vec3) -> C64 {
        (I * (self.k * dot(self.theta, x))).exp()
    }

    /// `curl E^Inc(x) / (ik) = (θ × θ⊥) e^{ikθ·x}`.
    pub fn curl_e_over_ik(&self, x: Vec3) -> CVec3 {
        let p = self.phase(x);
        let v = cross(self.theta, self.theta_perp);
        [p * v[0], p * v[1], p * v[2]]
    }
}

/// `E = θ⊥ e^{ikθ·x}`, `H = (θ⊥ × θ) e^{ikθ·x}`.
pub fn plane_wave_fields(pw: &PlaneWave, x: Vec3) -> (CVec3, CVec3) {
    let p = pw.phase(x);
    let h = cross(pw.theta_perp, pw.theta);
    let e = pw.theta_perp;
    ([p * e[0], p * e[1], p * e[2]], [p * h[0], p * h[1], p * h[2]])
}
