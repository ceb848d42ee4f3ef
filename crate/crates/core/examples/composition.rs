//! Composing randomized response over three coordinates: the composition
//! laws against the realized 8x8 product, and the composed curves.

use putlab::catalog::wang_mechanism;
use putlab::composition::{adp_sandwich, composed_loss_law, composed_pd};
use putlab::model::{Prior, PrivacyNotion, ProductSpace, SourceSet};

fn main() -> putlab::error::Result<()> {
    let base = wang_mechanism(ProductSpace::new(2, 1)?, 0.2)?;
    let p = Prior::local(&[0.7, 0.3])?;
    for k in PrivacyNotion::all(0.1, 2.0) {
        let c = composed_loss_law(k, &base, Some(&p), 3)?;
        println!("{:<10} law {:.9} realized {:.9}", k.label(), c.law, c.realized.unwrap_or(f64::NAN));
    }
    let (lo, hi) = adp_sandwich(&base, 0.1, 3);
    println!("adp(0.1) sandwich [{lo:.6}, {hi:.6}]");

    let set = SourceSet::Singleton(p);
    for d in [0.3, 0.6, 0.9] {
        let b = composed_pd(PrivacyNotion::MaxLeakage, 3, d, &set)?;
        println!("ml, n=3, D={d}: [{:.6}, {:.6}]", b.lower, b.upper);
    }
    Ok(())
}
