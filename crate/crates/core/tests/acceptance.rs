//! One PASS/FAIL line per acceptance criterion. Run with
//! `cargo test --test acceptance`.

use std::process::Command;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use putlab::catalog::{optimal_adp_mechanism, optimal_ml_mechanism, wang_mechanism};
use putlab::composition::{adp_sandwich, composed_loss_law};
use putlab::global::global_bounds;
use putlab::local::{
    adp_known_prior, class1_pd, dp_known_prior, ml_distortion_from_leakage, ml_known_prior, CumulativeTail,
};
use putlab::model::{expected_distortion, Mechanism, Prior, PrivacyNotion, ProductSpace, SourceSet};
use putlab::oracle::{oracle_pd_convex, oracle_pd_lp, random_sorted_prior};
use putlab::privacy::eval_loss;

const ORACLE_TOL: f64 = 1e-8;
const ORACLE_MATCH: f64 = 1e-5;
const BA_MATCH: f64 = 1e-4;
const FORMULA_MATCH: f64 = 1e-9;
const SANDWICH_SLACK: f64 = 1e-9;
const LIMIT_MATCH: f64 = 1e-3;
const MONOTONE_SLACK: f64 = 1e-12;
const LAW_MATCH: f64 = 1e-9;
const ROUND_TRIP: f64 = 1e-9;
const VALIDITY_SLACK: f64 = 1e-9;
const OPTIMUM_MATCH: f64 = 1e-6;
const BUDGET: Duration = Duration::from_secs(300);

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn rng(stream: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(0xACCE_57ED ^ stream)
}

fn worst(devs: impl IntoIterator<Item = f64>) -> f64 {
    devs.into_iter().fold(0.0, f64::max)
}

fn known_prior_vs_oracle() -> Outcome {
    let start = Instant::now();
    let mut r = rng(1);
    let priors: Vec<Prior> = (0..50).map(|i| random_sorted_prior(&mut r, 2 + i % 4)).collect();
    let grid: Vec<f64> = (1..=20).map(|i| i as f64 / 21.0).collect();
    let devs = priors
        .par_iter()
        .map(|p| -> Result<f64, String> {
            let mut dev: f64 = 0.0;
            for &d in &grid {
                let lp = |k| oracle_pd_lp(k, p, d, ORACLE_TOL).map(|o| o.value).map_err(|e| e.to_string());
                dev = dev.max((lp(PrivacyNotion::Dp)? - dp_known_prior(p, d).unwrap()).abs());
                dev = dev.max((lp(PrivacyNotion::MaxLeakage)? - ml_known_prior(p, d).unwrap()).abs());
                for delta in [0.05, 0.1, 0.3] {
                    let closed = adp_known_prior(p, d, delta).unwrap();
                    dev = dev.max((lp(PrivacyNotion::ApproxDp { delta })? - closed).abs());
                }
            }
            Ok(dev)
        })
        .collect::<Result<Vec<_>, _>>()?;
    let dev = worst(devs);
    let elapsed = start.elapsed();
    let detail = format!("max |closed - oracle| = {dev:.2e} over 5000 points in {:.1}s", elapsed.as_secs_f64());
    if dev <= ORACLE_MATCH && elapsed < BUDGET {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn anchor_points() -> Outcome {
    let p = Prior::local(&[0.4, 0.3, 0.2, 0.1]).unwrap();
    let adp = |d| adp_known_prior(&p, d, 0.1).unwrap();
    let dp = |d| dp_known_prior(&p, d).unwrap();
    // both left limits are log(4/3)
    let left = (4.0f64 / 3.0).ln();
    let jumps = dp(0.6) == 0.0
        && adp(0.54) == 0.0
        && (dp(0.6 - 1e-9) - left).abs() < 1e-6
        && (adp(0.54 - 1e-9) - left).abs() < 1e-6;
    if !jumps {
        return Err(format!("jumps: dp(0.6)={} adp(0.54)={}", dp(0.6), adp(0.54)));
    }
    let anchors = [
        (PrivacyNotion::MaxLeakage, ml_known_prior(&p, 0.2).unwrap(), 2.5f64.ln()),
        (PrivacyNotion::Dp, dp(0.2), 12f64.ln()),
        (PrivacyNotion::ApproxDp { delta: 0.1 }, adp(0.2), 10.5f64.ln()),
    ];
    let mut formula: f64 = 0.0;
    let mut oracle: f64 = 0.0;
    for (k, closed, target) in anchors {
        formula = formula.max((closed - target).abs());
        let o = oracle_pd_lp(k, &p, 0.2, ORACLE_TOL).map_err(|e| e.to_string())?;
        oracle = oracle.max((o.value - target).abs());
    }
    let detail = format!("jumps at 0.6 and 0.54; formula dev {formula:.1e}, oracle dev {oracle:.1e}");
    if formula <= FORMULA_MATCH && oracle <= ORACLE_MATCH {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn class_one_exactness() -> Outcome {
    let mut lp_dev: f64 = 0.0;
    let mut mi_dev: f64 = 0.0;
    let mut zeros = true;
    for m in 2..=4usize {
        let space = ProductSpace::new(m, 1).unwrap();
        let simplex = SourceSet::FullSimplex(space);
        let uniform = Prior::uniform(space);
        let edge = (m - 1) as f64 / m as f64;
        let rows = (1..=99)
            .into_par_iter()
            .map(|i| -> Result<(f64, f64, bool), String> {
                let d = i as f64 / 100.0;
                let closed = |k| class1_pd(k, d, &simplex).map(|b| b.upper).map_err(|e| e.to_string());
                let lp = |k| oracle_pd_lp(k, &uniform, d, ORACLE_TOL).map(|o| o.value).map_err(|e| e.to_string());
                let lp_dev = (closed(PrivacyNotion::Dp)? - lp(PrivacyNotion::Dp)?)
                    .abs()
                    .max((closed(PrivacyNotion::MaxLeakage)? - lp(PrivacyNotion::MaxLeakage)?).abs());
                let ba = oracle_pd_convex(PrivacyNotion::MutualInfo, &uniform, d, ORACLE_TOL)
                    .map_err(|e| e.to_string())?
                    .value;
                let mi_dev = (closed(PrivacyNotion::MutualInfo)? - ba).abs();
                let zero = d < edge
                    || [PrivacyNotion::Dp, PrivacyNotion::MaxLeakage, PrivacyNotion::MutualInfo]
                        .into_iter()
                        .all(|k| class1_pd(k, d, &simplex).map(|b| b.upper == 0.0).unwrap_or(false));
                Ok((lp_dev, mi_dev, zero))
            })
            .collect::<Result<Vec<_>, _>>()?;
        for (a, b, z) in rows {
            lp_dev = lp_dev.max(a);
            mi_dev = mi_dev.max(b);
            zeros &= z;
        }
    }
    let detail = format!("dp/ml dev {lp_dev:.2e}, mi dev {mi_dev:.2e}, zero past (m-1)/m: {zeros}");
    if lp_dev <= ORACLE_MATCH && mi_dev <= BA_MATCH && zeros {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn sandwich() -> Outcome {
    let mut r = rng(4);
    let mut checked = 0;
    for _ in 0..200 {
        let m = r.gen_range(2..=4usize);
        let n = r.gen_range(1..=3usize);
        let space = ProductSpace::new(m, n).unwrap();
        let d = r.gen_range(0.01..0.99) * n as f64 * (m - 1) as f64 / m as f64;
        let delta = [0.01, 0.1, 0.3][r.gen_range(0..3)];
        let alpha = [1.5, 2.0, 4.0][r.gen_range(0..3)];
        let q = wang_mechanism(space, d).map_err(|e| e.to_string())?;
        let uniform = Prior::uniform(space);
        let set = SourceSet::FullSimplex(space);
        for k in PrivacyNotion::all(delta, alpha) {
            let b = global_bounds(k, &set, space, d).map_err(|e| e.to_string())?;
            let loss = eval_loss(k, &q, Some(&uniform)).map_err(|e| e.to_string())?;
            let tight = !matches!(k, PrivacyNotion::MaxLeakage | PrivacyNotion::Sibson { .. });
            let upper_ok =
                if tight { (b.upper - loss).abs() <= SANDWICH_SLACK } else { b.upper >= loss - SANDWICH_SLACK };
            if b.lower > loss + SANDWICH_SLACK || !upper_ok {
                return Err(format!("{k} on m={m} n={n} D={d}: [{}, {}] vs {loss}", b.lower, b.upper));
            }
            checked += 1;
        }
    }
    Ok(format!("{checked} (tuple, notion) pairs bracketed"))
}

fn limits() -> Outcome {
    let space = ProductSpace::new(2, 1).unwrap();
    let uniform = Prior::uniform(space);
    let alphas = [1.5, 2.0, 4.0, 8.0, 64.0];
    let mut dp_gap: f64 = 0.0;
    let mut mi_gap: f64 = 0.0;
    for p in [0.6, 0.75, 0.9] {
        let q = Mechanism::new(space, vec![vec![p, 1.0 - p], vec![1.0 - p, p]]).unwrap();
        let loss = |k| eval_loss(k, &q, Some(&uniform)).unwrap();
        dp_gap = dp_gap.max((loss(PrivacyNotion::RenyiDp { alpha: 1e4 }) - loss(PrivacyNotion::Dp)).abs());
        mi_gap =
            mi_gap.max((loss(PrivacyNotion::Sibson { alpha: 1.0 + 1e-6 }) - loss(PrivacyNotion::MutualInfo)).abs());
        for family in [PrivacyNotion::renyi, PrivacyNotion::sibson] {
            let v: Vec<f64> = alphas.iter().map(|&a| loss(family(a).unwrap())).collect();
            if v.windows(2).any(|w| w[1] < w[0] - MONOTONE_SLACK) {
                return Err(format!("not monotone in alpha at p={p}: {v:?}"));
            }
        }
    }
    let detail = format!("|rdp(1e4)-dp| {dp_gap:.1e}, |sibson(1+1e-6)-mi| {mi_gap:.1e}, monotone in alpha");
    if dp_gap < LIMIT_MATCH && mi_gap < LIMIT_MATCH {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn composition() -> Outcome {
    let mut r = rng(6);
    let mut dev: f64 = 0.0;
    for _ in 0..20 {
        let m = r.gen_range(2..=3usize);
        let space = ProductSpace::new(m, 1).unwrap();
        let rows: Vec<Vec<f64>> = (0..m)
            .map(|_| {
                let raw: Vec<f64> = (0..m).map(|_| r.gen_range(0.02..1.0)).collect();
                let s: f64 = raw.iter().sum();
                raw.iter().map(|v| v / s).collect()
            })
            .collect();
        let q = Mechanism::new(space, rows).unwrap();
        let p = random_sorted_prior(&mut r, m);
        for n in [2, 3] {
            for k in PrivacyNotion::all(0.1, 2.0) {
                let c = composed_loss_law(k, &q, Some(&p), n).map_err(|e| e.to_string())?;
                let realized = c.realized.ok_or("product not realized")?;
                if !matches!(k, PrivacyNotion::ApproxDp { .. }) {
                    dev = dev.max((realized - c.law).abs());
                    continue;
                }
                let (lo, hi) = adp_sandwich(&q, 0.1, n);
                if realized < lo - LAW_MATCH || realized > hi + LAW_MATCH {
                    return Err(format!("adp outside [{lo}, {hi}]: {realized}"));
                }
            }
        }
    }
    let detail = format!("six laws within {dev:.1e} on 40 products; adp inside its sandwich");
    if dev <= LAW_MATCH {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn round_trip() -> Outcome {
    let mut r = rng(7);
    let mut dev: f64 = 0.0;
    for i in 0..20 {
        let m = 2 + i % 4;
        let p = random_sorted_prior(&mut r, m);
        let set = SourceSet::Singleton(p.clone());
        let top = (m as f64).ln() - 0.01;
        let mut eps: Vec<f64> = (0..).map(|j| 0.2 * j as f64).take_while(|&e| e < top).collect();
        eps.push(top);
        for e in eps {
            let d = ml_distortion_from_leakage(&set, e).map_err(|e| e.to_string())?;
            dev = dev.max((ml_known_prior(&p, d).map_err(|e| e.to_string())? - e).abs());
        }
    }
    let detail = format!("max |ml(D(eps)) - eps| = {dev:.1e}");
    if dev <= ROUND_TRIP {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn optimal_mechanisms() -> Outcome {
    let mut r = rng(8);
    let (mut validity, mut value, mut identity): (f64, f64, f64) = (0.0, 0.0, 0.0);
    let mut built = 0;
    for i in 0..20 {
        let m = 2 + i % 4;
        let p = random_sorted_prior(&mut r, m);
        let tail = CumulativeTail::new(&p).unwrap();
        for t in [0.1, 0.3, 0.5, 0.7, 0.9] {
            let d = t * tail.get(m - 1);
            let q = optimal_ml_mechanism(&p, d).map_err(|e| e.to_string())?;
            validity = validity.max(expected_distortion(&q, &p).unwrap() - d);
            value = value
                .max((eval_loss(PrivacyNotion::MaxLeakage, &q, None).unwrap() - ml_known_prior(&p, d).unwrap()).abs());
            built += 1;
            for delta in [0.05, 0.1, 0.3] {
                let d = t * (1.0 - delta) * tail.get(m - 1);
                let q = optimal_adp_mechanism(&p, d, delta).map_err(|e| e.to_string())?;
                validity = validity.max(expected_distortion(&q, &p).unwrap() - d);
                let eps = eval_loss(PrivacyNotion::ApproxDp { delta }, &q, None).unwrap();
                value = value.max((eps - adp_known_prior(&p, d, delta).unwrap()).abs());
                for j in 1..m {
                    identity = identity.max((q.get(j, j) - (eps.exp() * q.get(0, j) + delta)).abs());
                }
                built += 1;
            }
        }
    }
    let detail = format!(
        "{built} mechanisms: distortion excess {validity:.1e}, value dev {value:.1e}, diagonal identity dev {identity:.1e}"
    );
    if validity <= VALIDITY_SLACK && value <= OPTIMUM_MATCH && identity <= OPTIMUM_MATCH {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn cli_determinism() -> Outcome {
    let bin = env!("CARGO_BIN_EXE_putlab");
    let class1 = [
        "curve",
        "--setting",
        "local",
        "--m",
        "2",
        "--class1",
        "--dp",
        "--adp",
        "0.1",
        "--ml",
        "--mi",
        "--rdp",
        "2",
        "--sibson",
        "2",
        "--start",
        "0.01",
        "--stop",
        "0.99",
        "--points",
        "99",
    ];
    let known = [
        "curve",
        "--prior",
        "0.4,0.3,0.2,0.1",
        "--dp",
        "--adp",
        "0.1",
        "--ml",
        "--start",
        "0.01",
        "--stop",
        "0.99",
        "--points",
        "99",
    ];
    for spec in [&class1[..], &known[..]] {
        let runs: Vec<_> = (0..2)
            .map(|_| Command::new(bin).args(spec).output())
            .collect::<Result<_, _>>()
            .map_err(|e| e.to_string())?;
        if runs.iter().any(|o| !o.status.success()) || runs[0].stdout != runs[1].stdout || runs[0].stdout.is_empty() {
            return Err(format!("curve {} not reproducible", spec[1..].join(" ")));
        }
    }
    let start = Instant::now();
    let o = Command::new(bin).args(["verify", "--seed", "1", "--trials", "50"]).output().map_err(|e| e.to_string())?;
    let elapsed = start.elapsed();
    let detail = format!("curves byte-identical; verify exit {:?} in {:.1}s", o.status.code(), elapsed.as_secs_f64());
    if o.status.code() == Some(0) && elapsed < BUDGET {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn main() {
    let criteria: [Criterion; 9] = [
        ("known-prior closed forms vs LP oracle", known_prior_vs_oracle),
        ("four-symbol prior anchor points", anchor_points),
        ("class I exactness", class_one_exactness),
        ("global bracket around Q_D", sandwich),
        ("alpha limits and monotonicity", limits),
        ("composition laws", composition),
        ("leakage round trip", round_trip),
        ("optimal mechanisms", optimal_mechanisms),
        ("CLI determinism and verify", cli_determinism),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let outcome = std::panic::catch_unwind(check).unwrap_or_else(|_| Err("panicked".into()));
        match outcome {
            Ok(detail) => println!("criterion {}: PASS {name}: {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("criterion {}: FAIL {name}: {detail}", i + 1);
            }
        }
    }
    if failed > 0 {
        std::process::exit(1);
    }
}
