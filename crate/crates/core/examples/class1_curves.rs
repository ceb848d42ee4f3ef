//! Binary alphabet, no knowledge of the prior: exact curves for DP,
//! approximate DP, maximal leakage and mutual information, and brackets for
//! Rényi DP and Sibson's information.

use putlab::local::class1_pd;
use putlab::model::{PrivacyNotion, ProductSpace, SourceSet};

fn main() -> putlab::error::Result<()> {
    let set = SourceSet::FullSimplex(ProductSpace::new(2, 1)?);
    let notions = [
        PrivacyNotion::Dp,
        PrivacyNotion::approx_dp(0.1)?,
        PrivacyNotion::MaxLeakage,
        PrivacyNotion::MutualInfo,
        PrivacyNotion::renyi(2.0)?,
        PrivacyNotion::sibson(2.0)?,
    ];
    for d in [0.05, 0.1, 0.25, 0.4, 0.5] {
        print!("D={d:<5}");
        for k in notions {
            let b = class1_pd(k, d, &set)?;
            if b.exact {
                print!(" {}={:.4}", k.label(), b.upper);
            } else {
                print!(" {}∈[{:.4},{:.4}]", k.label(), b.lower, b.upper);
            }
        }
        println!();
    }
    Ok(())
}
