//! DP, approximate DP and maximal leakage for the prior (0.4, 0.3, 0.2, 0.1):
//! the DP curves drop to zero at D = 0.6 and D = 0.54.

use putlab::local::{adp_known_prior, dp_known_prior, ml_known_prior};
use putlab::model::Prior;

fn main() -> putlab::error::Result<()> {
    let p = Prior::local(&[0.4, 0.3, 0.2, 0.1])?;
    println!("{:>5} {:>10} {:>10} {:>10}", "D", "dp", "adp(0.1)", "ml");
    for i in 1..=35 {
        let d = 0.02 * i as f64;
        println!(
            "{d:>5.2} {:>10.6} {:>10.6} {:>10.6}",
            dp_known_prior(&p, d)?,
            adp_known_prior(&p, d, 0.1)?,
            ml_known_prior(&p, d)?
        );
    }
    Ok(())
}
