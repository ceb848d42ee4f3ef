//! Brute-force oracles next to the closed forms, then a small randomized
//! cross-check of every closed form.

use putlab::local::{dp_known_prior, ml_known_prior};
use putlab::model::{Prior, PrivacyNotion};
use putlab::oracle::{oracle_pd_convex, oracle_pd_lp, verify_closed_forms, VerifyOptions};

fn main() -> putlab::error::Result<()> {
    let p = Prior::local(&[0.5, 0.3, 0.2])?;
    for d in [0.1, 0.3] {
        let o = oracle_pd_lp(PrivacyNotion::Dp, &p, d, 1e-8)?;
        println!("dp D={d}: oracle {:.9} closed {:.9}", o.value, dp_known_prior(&p, d)?);
        let o = oracle_pd_lp(PrivacyNotion::MaxLeakage, &p, d, 1e-8)?;
        println!("ml D={d}: oracle {:.9} closed {:.9}", o.value, ml_known_prior(&p, d)?);
        let o = oracle_pd_convex(PrivacyNotion::MutualInfo, &p, d, 1e-8)?;
        println!("mi D={d}: oracle {:.9}", o.value);
    }
    let report = verify_closed_forms(&VerifyOptions { seed: 3, trials: 4, only: Vec::new() })?;
    for e in &report.entries {
        println!("{:<4} {:<10} {:<26} {:.2e}", if e.passed { "ok" } else { "FAIL" }, e.notion, e.theorem, e.max_dev);
    }
    Ok(())
}
