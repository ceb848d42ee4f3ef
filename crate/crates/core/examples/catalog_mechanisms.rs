//! The named mechanisms and the optimal constructions for a known prior.

use putlab::catalog::{optimal_adp_mechanism, optimal_ml_mechanism, q_delta_mechanism, wang_mechanism};
use putlab::model::{expected_distortion, Mechanism, Prior, PrivacyNotion, ProductSpace};
use putlab::privacy::eval_loss;

fn show(name: &str, q: &Mechanism) {
    println!("{name}");
    for row in q.rows() {
        let cells: Vec<String> = row.iter().map(|v| format!("{v:.4}")).collect();
        println!("  [{}]", cells.join(", "));
    }
}

fn main() -> putlab::error::Result<()> {
    let wang = wang_mechanism(ProductSpace::new(2, 2)?, 0.5)?;
    show("Q_D on {1,2}^2 at D = 0.5", &wang);
    show("Q_delta, m = 3, delta = 0.1", &q_delta_mechanism(3, 0.1)?);

    let p = Prior::local(&[0.4, 0.3, 0.2, 0.1])?;
    let ml = optimal_ml_mechanism(&p, 0.2)?;
    show("maximal-leakage optimal at D = 0.2", &ml);
    println!(
        "  leakage {:.9} (log 2.5 = {:.9}), distortion {:.9}",
        eval_loss(PrivacyNotion::MaxLeakage, &ml, None)?,
        2.5f64.ln(),
        expected_distortion(&ml, &p)?
    );

    let adp = optimal_adp_mechanism(&p, 0.2, 0.1)?;
    show("approximate-DP optimal at D = 0.2, delta = 0.1", &adp);
    println!(
        "  loss {:.9} (log 10.5 = {:.9}), distortion {:.9}",
        eval_loss(PrivacyNotion::approx_dp(0.1)?, &adp, None)?,
        10.5f64.ln(),
        expected_distortion(&adp, &p)?
    );
    Ok(())
}
