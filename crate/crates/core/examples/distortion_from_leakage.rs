//! Inverting the maximal-leakage curve: the least distortion compatible with
//! a leakage budget, for one prior and for a family.

use putlab::local::{ml_distortion_from_leakage, ml_known_prior};
use putlab::model::{Prior, SourceSet};

fn main() -> putlab::error::Result<()> {
    let p = Prior::local(&[0.4, 0.3, 0.2, 0.1])?;
    let single = SourceSet::Singleton(p.clone());
    let family = SourceSet::family(vec![p.clone(), Prior::local(&[0.3, 0.3, 0.2, 0.2])?])?;
    for eps in [0.0, 0.25, 0.5, 1.0, 1.3] {
        let d = ml_distortion_from_leakage(&single, eps)?;
        let back = if d > 0.0 { ml_known_prior(&p, d)? } else { f64::NAN };
        println!(
            "eps {eps:.2}: D {d:.6} (leakage back {back:.6}); family D {:.6}",
            ml_distortion_from_leakage(&family, eps)?
        );
    }
    Ok(())
}
