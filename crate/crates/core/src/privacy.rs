//! The seven privacy-loss functionals on explicit mechanisms.
//!
//! Losses are in nats and may be `f64::INFINITY` when a neighbouring row puts
//! zero mass where the other does not.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{Mechanism, Prior, PrivacyNotion, PROB_TOL};

/// Sibson evaluation is refused for `α` closer to one than this.
pub const SIBSON_MIN_ALPHA_GAP: f64 = 1e-9;

/// Evaluates `notion` on `q`. The prior is mandatory for prior-dependent
/// notions and ignored otherwise.
pub fn eval_loss(notion: PrivacyNotion, q: &Mechanism, p: Option<&Prior>) -> Result<f64> {
    notion.validate()?;
    if let Some(p) = p {
        if p.space() != q.space() {
            return Err(Error::Dimension(format!("prior over {} but mechanism over {}", p.space(), q.space())));
        }
    }
    let need = || p.ok_or_else(|| Error::MissingPrior(notion.label()));
    Ok(match notion {
        PrivacyNotion::Dp => approx_dp_loss(q, 0.0),
        PrivacyNotion::ApproxDp { delta } => approx_dp_loss(q, delta),
        PrivacyNotion::MaxInfo => max_info(q, need()?),
        PrivacyNotion::MaxLeakage => max_leakage(q),
        PrivacyNotion::RenyiDp { alpha } => renyi(q, alpha),
        PrivacyNotion::Sibson { alpha } => {
            if alpha < 1.0 + SIBSON_MIN_ALPHA_GAP {
                return Err(Error::Parameter(format!("sibson alpha={alpha} too close to 1; use mutual information")));
            }
            sibson(q, need()?, alpha)
        }
        PrivacyNotion::MutualInfo => mutual_info(q, need()?),
    })
}

/// `max{0, max log((Q(y|x) - δ)/Q(y|x'))}` over neighbours; `δ = 0` is pure DP.
/// Any `δ ≥ 0` is accepted here so that composed effective slacks can be
/// evaluated.
pub fn approx_dp_loss(q: &Mechanism, delta: f64) -> f64 {
    let space = q.space();
    let mut best = 0.0f64;
    for x in 0..q.size_in() {
        let row = q.row(x);
        for xn in space.neighbors(x) {
            let other = q.row(xn);
            for (a, b) in row.iter().zip(other) {
                let num = a - delta;
                if num <= PROB_TOL {
                    continue;
                }
                if *b == 0.0 {
                    return f64::INFINITY;
                }
                best = best.max((num / b).ln());
            }
        }
    }
    best
}

fn marginal(q: &Mechanism, p: &Prior) -> Vec<f64> {
    let mut r = vec![0.0; q.size_out()];
    for (x, px) in p.probs().iter().enumerate() {
        for (ry, v) in r.iter_mut().zip(q.row(x)) {
            *ry += px * v;
        }
    }
    r
}

fn max_info(q: &Mechanism, p: &Prior) -> f64 {
    let r = marginal(q, p);
    let mut best = 0.0f64;
    for x in 0..q.size_in() {
        for (v, ry) in q.row(x).iter().zip(&r) {
            if *v > 0.0 {
                best = best.max((v / ry).ln());
            }
        }
    }
    best
}

fn max_leakage(q: &Mechanism) -> f64 {
    let s: f64 = (0..q.size_out()).map(|y| (0..q.size_in()).map(|x| q.get(x, y)).fold(0.0, f64::max)).sum();
    s.ln().max(0.0)
}

pub(crate) fn log_sum_exp(terms: &[f64]) -> f64 {
    let m = terms.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if m.is_infinite() {
        return m;
    }
    m + terms.iter().map(|t| (t - m).exp()).sum::<f64>().ln()
}

/// `log Σ_y Q(y|x)^α Q(y|x')^{1-α}` for one ordered pair.
pub(crate) fn renyi_pair_log(a: &[f64], b: &[f64], alpha: f64) -> f64 {
    let mut terms = Vec::with_capacity(a.len());
    for (u, v) in a.iter().zip(b) {
        if *u == 0.0 {
            continue;
        }
        if *v == 0.0 {
            return f64::INFINITY;
        }
        terms.push(alpha * u.ln() + (1.0 - alpha) * v.ln());
    }
    log_sum_exp(&terms)
}

fn renyi(q: &Mechanism, alpha: f64) -> f64 {
    let space = q.space();
    let mut best = 0.0f64;
    for x in 0..q.size_in() {
        for xn in space.neighbors(x) {
            let l = renyi_pair_log(q.row(x), q.row(xn), alpha);
            if l == f64::INFINITY {
                return l;
            }
            best = best.max(l / (alpha - 1.0));
        }
    }
    best
}

fn sibson(q: &Mechanism, p: &Prior, alpha: f64) -> f64 {
    let mut outer = Vec::with_capacity(q.size_out());
    let mut inner = Vec::with_capacity(q.size_in());
    for y in 0..q.size_out() {
        inner.clear();
        for (x, px) in p.probs().iter().enumerate() {
            let v = q.get(x, y);
            if v > 0.0 {
                inner.push(px.ln() + alpha * v.ln());
            }
        }
        if !inner.is_empty() {
            outer.push(log_sum_exp(&inner) / alpha);
        }
    }
    (alpha / (alpha - 1.0) * log_sum_exp(&outer)).max(0.0)
}

fn mutual_info(q: &Mechanism, p: &Prior) -> f64 {
    let r = marginal(q, p);
    let mut total = 0.0;
    for (x, px) in p.probs().iter().enumerate() {
        for (v, ry) in q.row(x).iter().zip(&r) {
            if *v > 0.0 {
                total += px * v * (v / ry).ln();
            }
        }
    }
    total.max(0.0)
}

#[derive(Debug, Clone, Serialize)]
pub struct RelationCheck {
    pub relation: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct RelationReport {
    pub checks: Vec<RelationCheck>,
}

impl RelationReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &RelationCheck> {
        self.checks.iter().filter(|c| !c.passed)
    }
}

const SLACK: f64 = 1e-9;
const LIMIT_TOL: f64 = 1e-3;
const DELTA_GRID: [f64; 6] = [0.01, 0.05, 0.1, 0.2, 0.4, 0.8];

/// Checks the ordering and limit relations between the losses of one mechanism.
pub fn check_relations(q: &Mechanism, p: &Prior, alpha_grid: &[f64]) -> Result<RelationReport> {
    if alpha_grid.iter().any(|&a| !(a > 1.0)) || alpha_grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::Parameter("alpha grid must be strictly increasing and > 1".into()));
    }
    let n = q.space().n() as f64;
    let dp = eval_loss(PrivacyNotion::Dp, q, None)?;
    let ml = eval_loss(PrivacyNotion::MaxLeakage, q, None)?;
    let mi = eval_loss(PrivacyNotion::MutualInfo, q, Some(p))?;
    let mut checks = Vec::new();
    let mut push = |relation: &str, passed: bool, detail: String| {
        checks.push(RelationCheck { relation: relation.into(), passed, detail })
    };

    let adp: Vec<f64> = DELTA_GRID.iter().map(|&d| approx_dp_loss(q, d)).collect();
    let ok = adp.windows(2).all(|w| w[1] <= w[0] + SLACK) && adp[0] <= dp + SLACK;
    push("adp non-increasing in delta", ok, format!("{adp:?}"));

    let rdp = alpha_grid
        .iter()
        .map(|&a| eval_loss(PrivacyNotion::RenyiDp { alpha: a }, q, None))
        .collect::<Result<Vec<_>>>()?;
    push("rdp non-decreasing in alpha", non_decreasing(&rdp), format!("{rdp:?}"));
    push("rdp <= dp", rdp.iter().all(|&v| v <= dp + SLACK), format!("dp={dp}"));

    let sib = alpha_grid
        .iter()
        .map(|&a| eval_loss(PrivacyNotion::Sibson { alpha: a }, q, Some(p)))
        .collect::<Result<Vec<_>>>()?;
    push("sibson non-decreasing in alpha", non_decreasing(&sib), format!("{sib:?}"));
    push("sibson >= mi", sib.iter().all(|&v| v >= mi - SLACK), format!("mi={mi}"));
    push("sibson <= ml", sib.iter().all(|&v| v <= ml + SLACK), format!("ml={ml}"));
    push("ml <= n*dp", ml <= n * dp + SLACK, format!("ml={ml} dp={dp}"));

    if dp.is_finite() {
        let far = eval_loss(PrivacyNotion::RenyiDp { alpha: 1e4 }, q, None)?;
        push("rdp(1e4) ~ dp", (far - dp).abs() < LIMIT_TOL, format!("{far} vs {dp}"));
        let near = eval_loss(PrivacyNotion::Sibson { alpha: 1.0 + 1e-6 }, q, Some(p))?;
        push("sibson(1+1e-6) ~ mi", (near - mi).abs() < LIMIT_TOL, format!("{near} vs {mi}"));
    }
    Ok(RelationReport { checks })
}

fn non_decreasing(v: &[f64]) -> bool {
    v.windows(2).all(|w| w[1] >= w[0] - SLACK)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::ProductSpace;

    fn rr(p: f64) -> Mechanism {
        Mechanism::new(ProductSpace::new(2, 1).unwrap(), vec![vec![p, 1.0 - p], vec![1.0 - p, p]]).unwrap()
    }

    fn close(a: f64, b: f64) -> bool {
        (a - b).abs() < 1e-6
    }

    #[test]
    fn randomized_response_values() {
        let q = rr(0.75);
        let u = Prior::uniform(q.space());
        let ev = |n| eval_loss(n, &q, Some(&u)).unwrap();
        assert!(close(ev(PrivacyNotion::Dp), 3f64.ln()));
        assert!(close(ev(PrivacyNotion::ApproxDp { delta: 0.1 }), 2.6f64.ln()));
        assert!(close(ev(PrivacyNotion::MaxLeakage), 1.5f64.ln()));
        assert!(close(ev(PrivacyNotion::RenyiDp { alpha: 2.0 }), (7.0f64 / 3.0).ln()));
        assert!(close(ev(PrivacyNotion::Sibson { alpha: 2.0 }), 0.223144));
        assert!(close(ev(PrivacyNotion::MutualInfo), 0.130812));
        assert!(close(ev(PrivacyNotion::MaxInfo), 1.5f64.ln()));
    }

    #[test]
    fn degenerate_mechanisms() {
        let id = rr(1.0);
        assert_eq!(eval_loss(PrivacyNotion::Dp, &id, None).unwrap(), f64::INFINITY);
        assert_eq!(eval_loss(PrivacyNotion::RenyiDp { alpha: 2.0 }, &id, None).unwrap(), f64::INFINITY);
        let uq = rr(0.5);
        let u = Prior::uniform(uq.space());
        for notion in PrivacyNotion::all(0.1, 2.0) {
            assert!(eval_loss(notion, &uq, Some(&u)).unwrap().abs() < 1e-12, "{notion}");
        }
    }

    #[test]
    fn prior_handling() {
        let q = rr(0.75);
        let err = eval_loss(PrivacyNotion::MutualInfo, &q, None).unwrap_err();
        assert_eq!(err, Error::MissingPrior("mi".into()));
        let a = Prior::local(&[0.2, 0.8]).unwrap();
        let b = Prior::local(&[0.6, 0.4]).unwrap();
        assert_eq!(
            eval_loss(PrivacyNotion::MaxLeakage, &q, Some(&a)).unwrap(),
            eval_loss(PrivacyNotion::MaxLeakage, &q, Some(&b)).unwrap()
        );
        assert!(eval_loss(PrivacyNotion::Sibson { alpha: 1.0 + 1e-10 }, &q, Some(&a)).is_err());
    }

    #[test]
    fn relations_on_randomized_response() {
        let q = rr(0.75);
        let report = check_relations(&q, &Prior::uniform(q.space()), &[1.5, 2.0, 8.0, 1e4]).unwrap();
        assert!(report.passed(), "{:?}", report.failures().collect::<Vec<_>>());
        let uq = rr(0.5);
        assert!(check_relations(&uq, &Prior::uniform(uq.space()), &[2.0]).unwrap().passed());
    }
}
