//! Brackets on the privacy-distortion function over {1..m}^n, for the full
//! simplex and for an i.i.d. prior.

use putlab::global::global_bounds;
use putlab::model::{Prior, PrivacyNotion, ProductSpace, SourceSet};

fn main() -> putlab::error::Result<()> {
    let space = ProductSpace::new(3, 2)?;
    let iid = Prior::iid(&Prior::local(&[0.5, 0.3, 0.2])?, 2)?;
    let sets = [("full simplex", SourceSet::FullSimplex(space)), ("iid (0.5,0.3,0.2)", SourceSet::Singleton(iid))];
    for (name, set) in &sets {
        println!("{name}");
        for d in [0.2, 0.6, 1.0] {
            for notion in PrivacyNotion::all(0.1, 2.0) {
                let b = global_bounds(notion, set, space, d)?;
                println!(
                    "  D={d:.1} {:<10} [{:.6}, {:.6}]{}",
                    notion.label(),
                    b.lower,
                    b.upper,
                    if b.exact { " exact" } else { "" }
                );
            }
        }
    }
    Ok(())
}
