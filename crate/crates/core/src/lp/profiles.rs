//! Radial cutoff profiles of the dyadic partition of unity.
//!
//! With `b(x) = exp(-1/x)` for `x > 0` (and 0 otherwise), the mollified step
//!
//! ```text
//! psi(x) = b(1 - x) / (b(1 - x) + b(x - 3/4))
//! ```
//!
//! is 1 on `[0, 3/4]`, 0 on `[1, inf)` and smooth in between. Then
//!
//! ```text
//! chi(r) = psi(3 r / 4)        1 on [0, 1],   0 on [4/3, inf)
//! phi(r) = chi(r / 2) - chi(r) supported in [1, 8/3]
//! ```
//!
//! so `chi(r) + sum_{j >= 0} phi(2^-j r)` telescopes to 1 and
//! `sum_{j in Z} phi(2^-j r) = 1` for `r > 0` with at most two nonzero terms.

#[inline]
fn bump(x: f64) -> f64 {
    if x > 0.0 {
        (-1.0 / x).exp()
    } else {
        0.0
    }
}

/// Smooth step: 1 on `[0, 3/4]`, 0 on `[1, inf)`.
#[inline]
pub fn smooth_step(x: f64) -> f64 {
    if x <= 0.75 {
        return 1.0;
    }
    if x >= 1.0 {
        return 0.0;
    }
    let a = bump(1.0 - x);
    let b = bump(x - 0.75);
    a / (a + b)
}

/// The pair `(chi, phi)` as functions of `|xi|`.
#[derive(Debug, Clone, Copy, Default)]
pub struct CutoffProfiles;

impl CutoffProfiles {
    pub const CHI_SUPPORT: f64 = 4.0 / 3.0;
    pub const PHI_INNER: f64 = 3.0 / 4.0;
    pub const PHI_OUTER: f64 = 8.0 / 3.0;

    #[inline]
    pub fn chi(&self, r: f64) -> f64 {
        smooth_step(0.75 * r)
    }

    #[inline]
    pub fn phi(&self, r: f64) -> f64 {
        self.chi(0.5 * r) - self.chi(r)
    }

    /// `phi(2^-j r)`.
    #[inline]
    pub fn phi_j(&self, j: i32, r: f64) -> f64 {
        self.phi(r * (-j as f64).exp2())
    }

    /// `chi(2^-j r)`.
    #[inline]
    pub fn chi_j(&self, j: i32, r: f64) -> f64 {
        self.chi(r * (-j as f64).exp2())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn supports() {
        let p = CutoffProfiles;
        for i in 0..=4000 {
            let r = i as f64 * 1e-3;
            let c = p.chi(r);
            let f = p.phi(r);
            assert!((0.0..=1.0).contains(&c));
            assert!((0.0..=1.0).contains(&f));
            if r >= CutoffProfiles::CHI_SUPPORT {
                assert_eq!(c, 0.0);
            }
            if r <= CutoffProfiles::PHI_INNER || r >= CutoffProfiles::PHI_OUTER {
                assert_eq!(f, 0.0, "phi({r})");
            }
        }
    }

    #[test]
    fn partitions_of_unity() {
        let p = CutoffProfiles;
        for i in 1..20000 {
            let r = i as f64 * 1.37e-2;
            let inh: f64 = p.chi(r) + (0..40).map(|j| p.phi_j(j, r)).sum::<f64>();
            assert!((inh - 1.0).abs() < 1e-10);
            let hom: f64 = (-40..40).map(|j| p.phi_j(j, r)).sum();
            assert!((hom - 1.0).abs() < 1e-10);
            let nonzero = (-40..40).filter(|&j| p.phi_j(j, r) != 0.0).count();
            assert!(nonzero <= 2);
        }
        assert_eq!(p.chi(0.0), 1.0);
    }

    #[test]
    fn step_is_monotone() {
        let mut prev = 1.0;
        for i in 0..=1000 {
            let v = smooth_step(0.7 + i as f64 * 4e-4);
            assert!(v <= prev + 1e-15);
            prev = v;
        }
    }
}
