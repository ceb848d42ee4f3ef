//! Every privacy loss of binary randomized response, and the ordering
//! relations between them.

use putlab::catalog::wang_mechanism;
use putlab::model::{Prior, PrivacyNotion, ProductSpace};
use putlab::privacy::{check_relations, eval_loss};

fn main() -> putlab::error::Result<()> {
    let space = ProductSpace::new(2, 1)?;
    let rr = wang_mechanism(space, 0.25)?;
    let prior = Prior::uniform(space);
    for notion in PrivacyNotion::all(0.1, 2.0) {
        println!("{:<10} {:.9}", notion.label(), eval_loss(notion, &rr, Some(&prior))?);
    }
    let report = check_relations(&rr, &prior, &[1.5, 2.0, 4.0, 8.0, 64.0])?;
    for c in &report.checks {
        println!("{:<5} {}", if c.passed { "ok" } else { "FAIL" }, c.relation);
    }
    Ok(())
}
