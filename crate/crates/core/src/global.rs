//! Closed-form brackets of the global privacy-distortion function.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{Prior, PrivacyNotion, ProductSpace, SourceClass, SourceSet};
use crate::privacy::log_sum_exp;

/// Lower and upper values of a privacy-distortion function.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundPair {
    pub lower: f64,
    pub upper: f64,
    pub exact: bool,
    /// The lower display was non-positive while the upper one was not.
    pub vacuous: bool,
}

impl BoundPair {
    pub fn exact(value: f64) -> Self {
        BoundPair { lower: value, upper: value, exact: true, vacuous: false }
    }

    pub fn zero() -> Self {
        Self::exact(0.0)
    }

    /// Clamps both ends at zero; exact only when they coincide.
    pub fn bracket(lower: f64, upper: f64) -> Self {
        let (l, u) = (lower.max(0.0), upper.max(0.0));
        BoundPair { lower: l, upper: u, exact: (u - l).abs() <= 1e-12, vacuous: l == 0.0 && u > 0.0 }
    }

    pub fn scale(self, k: f64) -> Self {
        BoundPair { lower: self.lower * k, upper: self.upper * k, ..self }
    }

    pub fn contains(&self, v: f64, tol: f64) -> bool {
        v >= self.lower - tol && v <= self.upper + tol
    }
}

/// `log` of a quantity that must be positive for the display to apply;
/// non-positive arguments map to `-∞`, which clamps to zero.
pub(crate) fn ln_pos(x: f64) -> f64 {
    if x > 0.0 {
        x.ln()
    } else {
        f64::NEG_INFINITY
    }
}

/// Brackets for `notion` on `space` given the source set `s`, for `0 < D ≤ n`.
pub fn global_bounds(notion: PrivacyNotion, s: &SourceSet, space: ProductSpace, d: f64) -> Result<BoundPair> {
    notion.validate()?;
    if s.space() != space {
        return Err(Error::Dimension("source set does not live on the requested space".into()));
    }
    let (m, n) = (space.m() as f64, space.n() as f64);
    if !(d > 0.0 && d <= n) {
        return Err(Error::DistortionRange { d, range: format!("(0, {n}]") });
    }
    if d >= n * (m - 1.0) / m {
        return Ok(BoundPair::zero());
    }
    let class1 = s.classify() == SourceClass::ClassI;
    let (theta, eta) = if class1 {
        (1.0, 1.0 / space.size() as f64)
    } else {
        let t = s.theta_star();
        (t.theta, t.eta)
    };
    let members = s.members();
    let pair = theta_bounds(notion, space, d, theta, eta, &members);
    if !class1 {
        return Ok(pair);
    }
    Ok(match notion {
        PrivacyNotion::Dp | PrivacyNotion::MutualInfo => BoundPair::exact(pair.upper),
        PrivacyNotion::Sibson { .. } => {
            let mi = theta_bounds(PrivacyNotion::MutualInfo, space, d, 1.0, eta, &members).upper;
            BoundPair::bracket(pair.lower.max(mi), pair.upper)
        }
        _ => pair,
    })
}

/// The θ*-parameterized displays, valid for any full-support source set.
pub fn theta_bounds(
    notion: PrivacyNotion,
    space: ProductSpace,
    d: f64,
    theta: f64,
    eta: f64,
    members: &[Prior],
) -> BoundPair {
    let (m, n) = (space.m() as f64, space.n() as f64);
    let a = (m - 1.0) * (n - d) / d;
    match notion {
        PrivacyNotion::Dp => BoundPair::bracket(ln_pos((m - 1.0) * (theta * n - d) / d), a.ln()),
        PrivacyNotion::ApproxDp { delta } => {
            let lower = ln_pos((m - 1.0) * (theta * n * (1.0 - delta * m.powf(n - 1.0)) - d) / d);
            let upper = ln_pos(a * (1.0 - delta * (1.0 - d / n).powf(-n)));
            BoundPair::bracket(lower, upper)
        }
        PrivacyNotion::MaxInfo => {
            let lower = ln_pos(m * (1.0 - d / (theta * n)));
            let worst = members.iter().map(|p| min_shell_mass(p, a)).fold(f64::INFINITY, f64::min);
            BoundPair::bracket(lower, -worst.ln())
        }
        PrivacyNotion::MaxLeakage => {
            BoundPair::bracket(ln_pos(m * (1.0 - d / (theta * n))), n * (m * (1.0 - d / n)).ln())
        }
        PrivacyNotion::RenyiDp { alpha } => {
            let reach = n - d / theta;
            let lower = if reach > 0.0 {
                ((m - 1.0) / (d / theta)).ln() + alpha / (alpha - 1.0) * reach.ln()
                    - (n * m.powf(n - 1.0)).ln() / (alpha - 1.0)
            } else {
                f64::NEG_INFINITY
            };
            BoundPair::bracket(lower, renyi_wang(m, n, d, alpha))
        }
        PrivacyNotion::Sibson { alpha } => {
            let spread = 0.5 * (1.0 - theta) * (n + 1.0) * m + theta;
            let lower = (alpha - n) / (alpha - 1.0) * m.ln() + alpha / (alpha - 1.0) * ((1.0 - d / n) / spread).ln();
            BoundPair::bracket(lower, sibson_wang(m, n, d, alpha))
        }
        PrivacyNotion::MutualInfo => {
            let reach = n * theta - d;
            let lower = if reach > 0.0 {
                theta * n * (eta.powf(-1.0 / n) * (1.0 - d / (n * theta))).ln()
                    + theta * d * (d / ((m - 1.0) * reach)).ln()
            } else {
                f64::NEG_INFINITY
            };
            let upper = n * (m * (1.0 - d / n)).ln() + d * (d / ((m - 1.0) * (n - d))).ln();
            BoundPair::bracket(lower, upper)
        }
    }
}

/// Rényi loss of the distance-exponential mechanism, in log space.
pub(crate) fn renyi_wang(m: f64, n: f64, d: f64, alpha: f64) -> f64 {
    let ln_a = ((n - d) * (m - 1.0) / d).ln();
    let mut terms = vec![alpha * ln_a, (1.0 - alpha) * ln_a];
    if m > 2.0 {
        terms.push((m - 2.0).ln());
    }
    ((d / (n * (m - 1.0))).ln() + log_sum_exp(&terms)) / (alpha - 1.0)
}

/// Sibson upper display `n log m((n-D)^α + D^α(m-1)^{1-α})^{1/(α-1)} - α/(α-1) n log n`.
pub(crate) fn sibson_wang(m: f64, n: f64, d: f64, alpha: f64) -> f64 {
    let inner = log_sum_exp(&[alpha * (n - d).ln(), alpha * d.ln() + (1.0 - alpha) * (m - 1.0).ln()]);
    n * m.ln() + n * inner / (alpha - 1.0) - alpha / (alpha - 1.0) * n * n.ln()
}

/// `min_y Σ_l A^{-l} P(N_l(y))`.
fn min_shell_mass(p: &Prior, a: f64) -> f64 {
    let space = p.space();
    if p.is_uniform() {
        let (m, n) = (space.m() as f64, space.n() as f64);
        return ((1.0 + (m - 1.0) / a) / m).powf(n);
    }
    let probs = p.probs();
    let powers: Vec<f64> = (0..=space.n()).map(|l| a.powi(-(l as i32))).collect();
    (0..space.size())
        .map(|y| probs.iter().enumerate().map(|(x, px)| px * powers[space.distance(x, y)]).sum::<f64>())
        .fold(f64::INFINITY, f64::min)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn simplex(m: usize, n: usize) -> (SourceSet, ProductSpace) {
        let s = ProductSpace::new(m, n).unwrap();
        (SourceSet::FullSimplex(s), s)
    }

    #[test]
    fn class_one_examples() {
        let (s, sp) = simplex(2, 3);
        let dp = global_bounds(PrivacyNotion::Dp, &s, sp, 1.0).unwrap();
        assert!(dp.exact && (dp.lower - 2f64.ln()).abs() < 1e-12);
        let mi = global_bounds(PrivacyNotion::MutualInfo, &s, sp, 1.0).unwrap();
        assert!(mi.exact && (mi.lower - 0.169899).abs() < 1e-6);
        let ml = global_bounds(PrivacyNotion::MaxLeakage, &s, sp, 1.0).unwrap();
        assert!((ml.lower - (4.0f64 / 3.0).ln()).abs() < 1e-12);
        assert!((ml.upper - 3.0 * (4.0f64 / 3.0).ln()).abs() < 1e-12);
        let (s, sp) = simplex(2, 1);
        for notion in PrivacyNotion::all(0.1, 2.0) {
            assert_eq!(global_bounds(notion, &s, sp, 0.5).unwrap(), BoundPair::zero());
        }
    }

    #[test]
    fn theta_lower_display() {
        let p = Prior::local(&[0.3, 0.25, 0.25, 0.2]).unwrap();
        let s = SourceSet::Singleton(p.clone());
        let b = global_bounds(PrivacyNotion::Dp, &s, p.space(), 0.1).unwrap();
        assert!((b.lower - 21f64.ln()).abs() < 1e-12);
        assert!(!b.exact);
    }

    #[test]
    fn range_errors() {
        let (s, sp) = simplex(2, 2);
        assert!(global_bounds(PrivacyNotion::Dp, &s, sp, 0.0).is_err());
        assert!(global_bounds(PrivacyNotion::Dp, &s, sp, 2.5).is_err());
        assert!(global_bounds(PrivacyNotion::RenyiDp { alpha: 0.5 }, &s, sp, 0.5).is_err());
    }
}
