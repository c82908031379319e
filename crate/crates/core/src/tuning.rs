// SPDX-License-Identifier: MIT OR Apache-2.0

//! Contrast scaling, resonant wavenumber selection and Lorentz dispersion.
//!
//! The resonance condition reads `1 − k²ηa²λ = s·c₀·aʰ` with `s = ±1`
//! (`Sign::Plus` / `Sign::Minus`).

use crate::error::{Error, Result};
use crate::linalg::C64;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Sign {
    Plus,
    Minus,
    /// Pick the sign that makes the Lorentz damping nonnegative.
    Auto,
}

impl Sign {
    pub fn value(self) -> f64 {
        match self {
            Sign::Minus => -1.0,
            _ => 1.0,
        }
    }

    pub fn parse(s: &str) -> Option<Sign> {
        match s.trim() {
            "plus" | "+" => Some(Sign::Plus),
            "minus" | "-" => Some(Sign::Minus),
            "auto" => Some(Sign::Auto),
            _ => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PhysicalParams {
    pub a: f64,
    pub h: f64,
    pub t: f64,
    pub sigma: C64,
    pub c0: C64,
    pub sign: Sign,
    pub eta: C64,
    pub k: f64,
    pub lambda_n0: f64,
}

impl PhysicalParams {
    /// Contrast from the scale law and `k` from the resonance condition.
    pub fn tuned(a: f64, h: f64, t: f64, sigma: C64, c0: C64, sign: Sign, lambda_n0: f64) -> Result<Self> {
        let eta = contrast(sigma, a)?;
        let k = resonance_k(eta, a, lambda_n0, c0, h, sign)?;
        Ok(Self { a, h, t, sigma, c0, sign, eta, k, lambda_n0 })
    }

    /// `1 − k²ηa²λ`.
    pub fn detuning(&self) -> C64 {
        1.0 - self.eta * (self.k * self.k * self.a * self.a * self.lambda_n0)
    }

    pub fn residual(&self) -> f64 {
        (self.detuning() - self.c0 * (self.sign.value() * self.a.powf(self.h))).norm()
    }

    pub fn with_eta(&self, eta: C64) -> Self {
        Self { eta, ..self.clone() }
    }
}

pub fn contrast(sigma: C64, a: f64) -> Result<C64> {
    if !(a > 0.0 && a < 1.0) {
        return Err(Error::Domain(format!("scale a must lie in (0,1), got {a}")));
    }
    Ok(sigma / (a * a))
}

/// Warning text when the imaginary part of ς is not small.
pub fn contrast_warning(sigma: C64) -> Option<String> {
    (sigma.im.abs() > 0.1 * sigma.re.abs())
        .then(|| format!("|Im(ς)| = {:.3e} exceeds 10% of |Re(ς)| = {:.3e}", sigma.im.abs(), sigma.re.abs()))
}

/// Real wavenumber solving `k² = (1 − s·c₀·aʰ)/(ηa²λ)`.
pub fn resonance_k(eta: C64, a: f64, lambda_n0: f64, c0: C64, h: f64, sign: Sign) -> Result<f64> {
    let denom = eta * (a * a * lambda_n0);
    if denom.norm() == 0.0 {
        return Err(Error::Domain("η·a²·λ vanishes".into()));
    }
    let k2 = (1.0 - c0 * (sign.value() * a.powf(h))) / denom;
    if k2.im.abs() > 1e-8 * k2.re.abs() || k2.re <= 0.0 {
        return Err(Error::ComplexWavenumber { re: k2.re, im: k2.im });
    }
    Ok(k2.re.sqrt())
}

#[derive(Clone, Debug, PartialEq)]
pub struct LorentzTuning {
    pub k: f64,
    pub gamma: f64,
    pub eps_r: C64,
    pub eta: C64,
    pub sign: Sign,
    /// `1 − k²ηa²λ − s·c₀·aʰ`.
    pub residual: C64,
    /// Leading-order `k² − k₀² ≈ k_p²a²λk₀²`.
    pub leading_shift: f64,
    /// Leading-order `γk ≈ ±Im(c₀)a⁴λk₀²k_p²`.
    pub leading_gamma_k: f64,
}

/// Lorentz parameters `(k, γ)` realizing the resonance condition exactly.
///
/// With `w = 1 − s·c₀·aʰ` and `β = a²λk_p²`:
/// `k² − k₀² = k₀²β / (|w|²/Re(w) − β)` and `γk = β k² s·Im(c₀)aʰ / |w|²`.
pub fn lorentz_params(kp: f64, k0: f64, lambda_n0: f64, a: f64, h: f64, c0: C64, sign: Sign) -> Result<LorentzTuning> {
    if !(kp > 0.0 && k0 > 0.0) {
        return Err(Error::Domain("plasma and resonance frequencies must be positive".into()));
    }
    let attempt = |s: Sign| -> Result<LorentzTuning> {
        let sv = s.value();
        let w = 1.0 - c0 * (sv * a.powf(h));
        let beta = a * a * lambda_n0 * kp * kp;
        let denom = w.norm_sqr() / w.re - beta;
        if !(w.re > 0.0 && denom > 0.0) {
            return Err(Error::Domain(format!("no real frequency realizes the detuning for sign {sv:+}")));
        }
        let shift = k0 * k0 * beta / denom;
        let k2 = k0 * k0 + shift;
        let k = k2.sqrt();
        let gamma = beta * k2 * sv * c0.im * a.powf(h) / w.norm_sqr() / k;
        let eps_r = 1.0 - kp * kp / C64::new(-shift, -k * gamma);
        let eta = eps_r - 1.0;
        let residual = 1.0 - eta * (k2 * a * a * lambda_n0) - c0 * (sv * a.powf(h));
        Ok(LorentzTuning {
            k,
            gamma,
            eps_r,
            eta,
            sign: s,
            residual,
            leading_shift: beta * k0 * k0,
            leading_gamma_k: sv * c0.im * a.powi(4) * lambda_n0 * k0 * k0 * kp * kp,
        })
    };
    match sign {
        Sign::Auto => {
            let plus = attempt(Sign::Plus);
            let minus = attempt(Sign::Minus);
            let gp = plus.as_ref().map(|t| t.gamma).unwrap_or(f64::NEG_INFINITY);
            let gm = minus.as_ref().map(|t| t.gamma).unwrap_or(f64::NEG_INFINITY);
            if gp >= 0.0 {
                plus
            } else if gm >= 0.0 {
                minus
            } else {
                Err(Error::UnphysicalDamping { plus: gp, minus: gm })
            }
        }
        s => {
            let t = attempt(s)?;
            if t.gamma < 0.0 {
                let other = attempt(if s == Sign::Plus { Sign::Minus } else { Sign::Plus }).map(|o| o.gamma).unwrap_or(f64::NEG_INFINITY);
                let (plus, minus) = if s == Sign::Plus { (t.gamma, other) } else { (other, t.gamma) };
                return Err(Error::UnphysicalDamping { plus, minus });
            }
            Ok(t)
        }
    }
}

#[derive(Clone, Debug)]
pub struct RegimeCheck {
    pub name: &'static str,
    pub pass: bool,
    pub detail: String,
}

#[derive(Clone, Debug)]
pub struct RegimeReport {
    pub checks: Vec<RegimeCheck>,
    /// `ℵ·d³`, the constant in `ℵ ≤ C·d⁻³`.
    pub aleph_d3: f64,
    pub warnings: Vec<String>,
}

impl RegimeReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn failures(&self) -> Vec<String> {
        self.checks.iter().filter(|c| !c.pass).map(|c| format!("{}: {}", c.name, c.detail)).collect()
    }
}

/// Report on the exponent, contrast and spacing conditions.
pub fn regime_check(h: f64, t: f64, sigma: C64, a: f64, aleph: usize, d: f64) -> RegimeReport {
    let mut checks = Vec::new();
    let lower = 9.0 / 11.0;
    checks.push(RegimeCheck { name: "h-range", pass: h > lower && h < 1.0, detail: format!("9/11 < h < 1 with h = {h}") });
    let slack = 3.0 - 3.0 * t - h;
    checks.push(RegimeCheck { name: "t-h", pass: slack >= -1e-12, detail: format!("3 - 3t - h = {slack:.6}") });
    checks.push(RegimeCheck { name: "contrast", pass: sigma.re < 1.0, detail: format!("Re(ς) = {} < 1", sigma.re) });
    if aleph > 1 {
        let at = a.powf(t);
        checks.push(RegimeCheck {
            name: "spacing",
            pass: d >= 0.5 * at && d <= 2.0 * at,
            detail: format!("d = {d:.6} against a^t = {at:.6}"),
        });
    }
    let aleph_d3 = if aleph > 1 { aleph as f64 * d.powi(3) } else { 0.0 };
    RegimeReport { checks, aleph_d3, warnings: contrast_warning(sigma).into_iter().collect() }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn contrast_examples() {
        assert!((contrast(C64::from(0.5), 0.1).unwrap() - C64::from(50.0)).norm() < 1e-12);
        let e = contrast(C64::new(0.5, 0.01), 0.1).unwrap();
        assert!((e - C64::new(50.0, 1.0)).norm() < 1e-12);
        let e = contrast(C64::from(0.5), 1.0 - 1e-9).unwrap();
        assert!((e.re - 0.5).abs() < 1e-8);
        assert!(contrast(C64::from(0.5), 0.0).is_err());
        assert!(contrast(C64::from(0.5), 1.0).is_err());
        let eta = |a: f64| contrast(C64::from(0.37), a).unwrap();
        assert!((eta(0.05) / eta(0.1) - C64::from(4.0)).norm() < 1e-14);
    }

    #[test]
    fn resonance_examples() {
        // η a² λ = 1
        let k = resonance_k(C64::from(1.0), 1.0, 1.0, C64::from(0.0), 0.9, Sign::Plus).unwrap();
        assert!((k - 1.0).abs() < 1e-15);
        let k = resonance_k(C64::from(100.0), 0.1, 1.0, C64::from(1.0), 0.9, Sign::Minus).unwrap();
        assert!((k * k - (1.0 + 10f64.powf(-0.9))).abs() < 1e-14);
        assert!(matches!(resonance_k(C64::new(1.0, 0.5), 0.1, 1.0, C64::from(1.0), 0.9, Sign::Plus), Err(Error::ComplexWavenumber { .. })));
    }

    #[test]
    fn drude_limit_has_no_damping() {
        let t = lorentz_params(1.0, 8.0, 0.0245, 0.05, 0.9, C64::from(1.0), Sign::Plus).unwrap();
        assert_eq!(t.gamma, 0.0);
        assert!(t.residual.norm() < 1e-12);
        assert!(t.eps_r.im.abs() < 1e-12);
    }

    #[test]
    fn auto_sign_keeps_damping_nonnegative() {
        for c0 in [C64::new(1.0, 0.5), C64::new(1.0, -0.5)] {
            let t = lorentz_params(1.0, 8.0, 0.0245, 0.05, 0.9, c0, Sign::Auto).unwrap();
            assert!(t.gamma >= 0.0);
            // the dispersion law 1 − k_p²/(k₀² − k² − ikγ) puts Im(ε_r) opposite to γ
            let want = -t.k * t.gamma / C64::new(64.0 - t.k * t.k, -t.k * t.gamma).norm_sqr();
            assert!((t.eps_r.im - want).abs() < 1e-9 * want.abs());
            assert!(t.eps_r.im < 0.0);
            assert!(t.residual.norm() < 1e-12);
        }
        assert!(matches!(
            lorentz_params(1.0, 8.0, 0.0245, 0.05, 0.9, C64::new(1.0, 0.5), Sign::Minus),
            Err(Error::UnphysicalDamping { .. })
        ));
    }

    #[test]
    fn real_part_of_contrast_tracks_scale_law() {
        // Re(η)·a²·λk₀² − 1 is the relative deviation from the scale law; it is
        // driven by the detuning c₀aʰ.
        for &a in &[0.1, 0.05, 0.025] {
            let t = lorentz_params(1.0, 8.0, 0.0245, a, 0.9, C64::from(1.0), Sign::Plus).unwrap();
            let e = t.eta.re * a * a * 0.0245 * 64.0 - 1.0;
            assert!(e.abs() <= 2.0 * a.powf(0.9), "a={a} e={e}");
        }
    }

    #[test]
    fn regime_examples() {
        let r = regime_check(0.9, 0.7, C64::from(0.5), 0.1, 1, 0.0);
        assert!(r.passed());
        assert!(!regime_check(0.8, 0.7, C64::from(0.5), 0.1, 1, 0.0).passed());
        let r = regime_check(0.9, 0.71, C64::from(0.5), 0.1, 1, 0.0);
        assert!(!r.checks.iter().find(|c| c.name == "t-h").unwrap().pass);
        assert!(!regime_check(0.9, 0.7, C64::from(1.5), 0.1, 1, 0.0).passed());
        assert!(!regime_check(0.9, 0.7, C64::new(0.5, 0.2), 0.1, 1, 0.0).warnings.is_empty());
    }
}
