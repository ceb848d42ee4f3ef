//! Parallel composition of one local mechanism over `n` i.i.d. coordinates.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::global::{ln_pos, theta_bounds, BoundPair};
use crate::local::{adp_known_prior, class1_pd, dp_known_prior, ml_known_prior};
use crate::model::{Mechanism, Prior, PrivacyNotion, ProductSpace, SourceClass, SourceSet};
use crate::privacy::{approx_dp_loss, eval_loss};

/// `Q(y|x) = Π_j Q(y_j|x_j)`, realized explicitly when `m^n` fits the cap.
#[derive(Debug, Clone)]
pub struct ProductMechanism {
    pub base: Mechanism,
    pub n: usize,
    pub realized: Option<Mechanism>,
}

/// Builds the n-fold product. Realization is skipped (not an error) when the
/// product space exceeds the cap.
pub fn compose(base: &Mechanism, n: usize) -> Result<ProductMechanism> {
    let bs = base.space();
    if bs.n() != 1 || base.size_out() != bs.m() {
        return Err(Error::Dimension("base mechanism must map {1..m} to {1..m}".into()));
    }
    if n < 1 {
        return Err(Error::Parameter("n must be at least 1".into()));
    }
    let realized = match ProductSpace::new(bs.m(), n) {
        Ok(space) => Some(realize(base, space)?),
        Err(Error::CapExceeded { .. }) => None,
        Err(e) => return Err(e),
    };
    Ok(ProductMechanism { base: base.clone(), n, realized })
}

fn realize(base: &Mechanism, space: ProductSpace) -> Result<Mechanism> {
    let size = space.size();
    let data: Vec<f64> = (0..size)
        .into_par_iter()
        .flat_map_iter(|x| {
            let xs = space.coords(x);
            (0..size).map(move |y| space.coords(y).iter().zip(&xs).map(|(&yc, &xc)| base.get(xc, yc)).product::<f64>())
        })
        .collect();
    Mechanism::from_flat(space, size, data)
}

/// The loss predicted for the product, and the loss measured on the
/// realization when there is one.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComposedLoss {
    pub law: f64,
    pub realized: Option<f64>,
}

impl ComposedLoss {
    pub fn agrees(&self, tol: f64) -> bool {
        match self.realized {
            None => true,
            Some(r) if r.is_infinite() || self.law.is_infinite() => r == self.law,
            Some(r) => (r - self.law).abs() <= tol,
        }
    }
}

/// Invariance for DP and Rényi DP, additivity for the information-type
/// notions. Approximate DP composes through the slack `δ / Q*^{n-1}`, with
/// `Q*` the largest entry of the base mechanism.
pub fn composed_loss_law(notion: PrivacyNotion, base: &Mechanism, p: Option<&Prior>, n: usize) -> Result<ComposedLoss> {
    let product = compose(base, n)?;
    let single = eval_loss(notion, base, p)?;
    let law = match notion {
        PrivacyNotion::Dp | PrivacyNotion::RenyiDp { .. } => single,
        PrivacyNotion::ApproxDp { delta } => approx_dp_loss(base, delta * base.max_entry().powi(1 - n as i32)),
        _ => n as f64 * single,
    };
    let realized = match &product.realized {
        None => None,
        Some(q) => {
            let joint = p.map(|p| Prior::iid(p, n)).transpose()?;
            Some(eval_loss(notion, q, joint.as_ref())?)
        }
    };
    Ok(ComposedLoss { law, realized })
}

/// `(ε_{δ m^{n-1}}(Q), ε_δ(Q))`, the bracket the product's approximate-DP
/// loss must fall in.
pub fn adp_sandwich(base: &Mechanism, delta: f64, n: usize) -> (f64, f64) {
    let m = base.space().m() as f64;
    (approx_dp_loss(base, delta * m.powi(n as i32 - 1)), approx_dp_loss(base, delta))
}

/// Privacy-distortion function of the `n`-fold product, with `d` the total
/// distortion over all coordinates.
///
/// `s` is a single-coordinate source set. Class I sets use the Class I
/// composition theorem; a sorted singleton uses the known-prior closed forms
/// at `d/n`; any other set falls back to the local θ*-brackets scaled per
/// notion.
pub fn composed_pd(notion: PrivacyNotion, n: usize, d: f64, s: &SourceSet) -> Result<BoundPair> {
    notion.validate()?;
    let space = s.space();
    if space.n() != 1 {
        return Err(Error::Dimension("composed_pd takes a single-coordinate source set".into()));
    }
    if n < 1 {
        return Err(Error::Parameter("n must be at least 1".into()));
    }
    let nf = n as f64;
    if !(d > 0.0 && d <= nf) {
        return Err(Error::DistortionRange { d, range: format!("(0, {n}]") });
    }
    let per = d / nf;
    let additive = |b: BoundPair| match notion {
        PrivacyNotion::Dp | PrivacyNotion::RenyiDp { .. } | PrivacyNotion::ApproxDp { .. } => b,
        _ => b.scale(nf),
    };

    if s.classify() == SourceClass::ClassI {
        if let PrivacyNotion::ApproxDp { delta } = notion {
            let m = space.m() as f64;
            let spread = delta * m.powi(n as i32 - 1);
            let lower =
                if spread < 1.0 { class1_pd(PrivacyNotion::ApproxDp { delta: spread }, per, s)?.lower } else { 0.0 };
            let upper = if per >= (m - 1.0) / m {
                0.0
            } else {
                ln_pos((m - 1.0) * (nf - d) / d * (1.0 - delta * (1.0 - per).powf(-nf)))
            };
            return Ok(BoundPair::bracket(lower, upper));
        }
        return Ok(additive(class1_pd(notion, per, s)?));
    }

    if let SourceSet::Singleton(p) = s {
        if p.is_sorted_desc() {
            match notion {
                PrivacyNotion::Dp => return Ok(BoundPair::exact(dp_known_prior(p, per)?)),
                PrivacyNotion::ApproxDp { delta } => return Ok(BoundPair::exact(adp_known_prior(p, per, delta)?)),
                PrivacyNotion::MaxLeakage => return Ok(BoundPair::exact(nf * ml_known_prior(p, per)?)),
                _ => {}
            }
        }
    }
    let m = space.m() as f64;
    if per >= (m - 1.0) / m {
        return Ok(BoundPair::zero());
    }
    let t = s.theta_star();
    Ok(additive(theta_bounds(notion, space, per, t.theta, t.eta, &s.members())))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::uniform_mechanism;
    use crate::model::expected_distortion;

    fn rr(p: f64) -> Mechanism {
        Mechanism::new(ProductSpace::new(2, 1).unwrap(), vec![vec![p, 1.0 - p], vec![1.0 - p, p]]).unwrap()
    }

    #[test]
    fn products() {
        let q = compose(&rr(0.75), 2).unwrap().realized.unwrap();
        let mut vals: Vec<f64> = q.rows().into_iter().flatten().collect();
        vals.sort_by(f64::total_cmp);
        vals.dedup_by(|a, b| (*a - *b).abs() < 1e-15);
        assert_eq!(vals, vec![0.0625, 0.1875, 0.5625]);
        let u = Prior::uniform(q.space());
        assert!((expected_distortion(&q, &u).unwrap() - 0.5).abs() < 1e-15);
        let qu = compose(&uniform_mechanism(ProductSpace::new(2, 1).unwrap()), 3).unwrap();
        assert!(qu.realized.unwrap().rows().iter().flatten().all(|v| (v - 0.125).abs() < 1e-15));
    }

    #[test]
    fn loss_laws() {
        let q = rr(0.75);
        let u = Prior::uniform(q.space());
        let ml = composed_loss_law(PrivacyNotion::MaxLeakage, &q, None, 2).unwrap();
        assert!((ml.law - 2.0 * 1.5f64.ln()).abs() < 1e-12 && ml.agrees(1e-9));
        let dp = composed_loss_law(PrivacyNotion::Dp, &q, None, 3).unwrap();
        assert!((dp.law - 3f64.ln()).abs() < 1e-12 && dp.agrees(1e-9));
        let sib = composed_loss_law(PrivacyNotion::Sibson { alpha: 2.0 }, &q, Some(&u), 2).unwrap();
        assert!((sib.law - 0.446287).abs() < 1e-6 && sib.agrees(1e-9));
    }

    #[test]
    fn composed_functions() {
        let s = SourceSet::FullSimplex(ProductSpace::new(2, 1).unwrap());
        let ml = composed_pd(PrivacyNotion::MaxLeakage, 3, 1.0, &s).unwrap();
        assert!(ml.exact && (ml.lower - 3.0 * (4.0f64 / 3.0).ln()).abs() < 1e-12);
        let dp = composed_pd(PrivacyNotion::Dp, 3, 1.0, &s).unwrap();
        assert!(dp.exact && (dp.lower - 2f64.ln()).abs() < 1e-12);
        let p = SourceSet::Singleton(Prior::local(&[0.4, 0.3, 0.2, 0.1]).unwrap());
        let ml = composed_pd(PrivacyNotion::MaxLeakage, 2, 0.4, &p).unwrap();
        assert!((ml.lower - 2.0 * 2.5f64.ln()).abs() < 1e-9);
    }
}
