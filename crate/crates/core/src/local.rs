//! Single-coordinate privacy-distortion functions: Class I closed forms,
//! known-prior closed forms for DP, approximate DP and maximal leakage, the
//! Class II program, and the inverse distortion-from-leakage map.

use crate::error::{Error, Result};
use crate::global::{ln_pos, renyi_wang, sibson_wang, BoundPair};
use crate::lp::{LinearProgram, Relation};
use crate::model::{Prior, PrivacyNotion, SourceClass, SourceSet};

/// Slack used when `D` sits on a breakpoint `D^(k)`; the tails are sums of
/// floats and `0.1 + 0.2 + 0.3` is not `0.6`.
pub const BREAKPOINT_TOL: f64 = 1e-12;

/// Grid resolution and final bracket width of the `α₁` sweep.
pub const ALPHA_GRID: usize = 1024;
pub const ALPHA_TOL: f64 = 1e-9;

/// `d[k]` = sum of the `k` smallest probabilities, `k = 0..=m`.
#[derive(Debug, Clone, PartialEq)]
pub struct CumulativeTail {
    d: Vec<f64>,
}

impl CumulativeTail {
    pub fn new(p: &Prior) -> Result<Self> {
        let probs = local_sorted(p)?;
        let mut d = Vec::with_capacity(probs.len() + 1);
        d.push(0.0);
        let mut acc = 0.0;
        for v in probs.iter().rev() {
            acc += v;
            d.push(acc);
        }
        Ok(CumulativeTail { d })
    }

    pub fn get(&self, k: usize) -> f64 {
        self.d[k]
    }

    pub fn m(&self) -> usize {
        self.d.len() - 1
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.d
    }
}

fn local_sorted(p: &Prior) -> Result<&[f64]> {
    if p.space().n() != 1 {
        return Err(Error::Dimension("local closed forms need n = 1".into()));
    }
    if !p.is_sorted_desc() {
        return Err(Error::Unsorted);
    }
    Ok(p.probs())
}

/// Sorts a probability vector in non-increasing order and returns the
/// permutation: `sorted[i] = probs[perm[i]]`.
pub fn sort_with_permutation(probs: &[f64]) -> (Vec<f64>, Vec<usize>) {
    let mut perm: Vec<usize> = (0..probs.len()).collect();
    perm.sort_by(|&a, &b| probs[b].total_cmp(&probs[a]));
    (perm.iter().map(|&i| probs[i]).collect(), perm)
}

fn check_d(d: f64, hi: f64) -> Result<()> {
    if d > 0.0 && d <= hi {
        Ok(())
    } else {
        Err(Error::DistortionRange { d, range: format!("(0, {hi}]") })
    }
}

/// Exact values or brackets for a single coordinate when the source set is
/// in Class I.
pub fn class1_pd(notion: PrivacyNotion, d: f64, s: &SourceSet) -> Result<BoundPair> {
    notion.validate()?;
    let space = s.space();
    if space.n() != 1 {
        return Err(Error::Dimension("class1_pd needs n = 1".into()));
    }
    if s.classify() != SourceClass::ClassI {
        return Err(Error::SourceSet("class1_pd needs a Class I source set".into()));
    }
    check_d(d, 1.0)?;
    let m = space.m() as f64;
    if d >= (m - 1.0) / m {
        return Ok(BoundPair::zero());
    }
    let mi = (m * (1.0 - d)).ln() + d * (d / ((m - 1.0) * (1.0 - d))).ln();
    Ok(match notion {
        PrivacyNotion::Dp => BoundPair::exact(((m - 1.0) * (1.0 - d) / d).ln()),
        PrivacyNotion::ApproxDp { delta } => BoundPair::exact(ln_pos((m - 1.0) * (1.0 - d - delta) / d).max(0.0)),
        PrivacyNotion::MaxInfo => {
            let ps = s.p_star();
            let off = d / (m - 1.0);
            BoundPair::bracket((m * (1.0 - d)).ln(), ((1.0 - d) / (ps * (1.0 - d - off) + off)).ln())
        }
        PrivacyNotion::MaxLeakage => BoundPair::exact((m * (1.0 - d)).ln()),
        PrivacyNotion::RenyiDp { alpha } => {
            let lower = ((m - 1.0) / d).ln() + alpha / (alpha - 1.0) * (1.0 - d).ln();
            BoundPair::bracket(lower, renyi_wang(m, 1.0, d, alpha))
        }
        PrivacyNotion::Sibson { alpha } => {
            let lower = mi.max(m.ln() + alpha / (alpha - 1.0) * (1.0 - d).ln());
            BoundPair::bracket(lower, sibson_wang(m, 1.0, d, alpha))
        }
        PrivacyNotion::MutualInfo => BoundPair::exact(mi.max(0.0)),
    })
}

fn adp_closed_form(p: &Prior, d: f64, delta: f64) -> Result<f64> {
    let tail = CumulativeTail::new(p)?;
    check_d(d, 1.0)?;
    let m = tail.m();
    if d >= (1.0 - delta) * tail.get(m - 1) - BREAKPOINT_TOL {
        return Ok(0.0);
    }
    let mut best = f64::INFINITY;
    for k in 1..=m {
        let threshold = (1.0 - delta) * tail.get(k - 1);
        if d > threshold {
            let v = ln_pos((m - k) as f64 * (1.0 - d - delta) / (d - threshold));
            best = best.min(v);
        }
    }
    Ok(best.max(0.0))
}

/// Approximate-DP privacy-distortion value for a known sorted prior.
pub fn adp_known_prior(p: &Prior, d: f64, delta: f64) -> Result<f64> {
    if !(0.0..1.0).contains(&delta) {
        return Err(Error::Parameter(format!("delta={delta} must lie in [0,1)")));
    }
    adp_closed_form(p, d, delta)
}

/// DP privacy-distortion value for a known sorted prior.
pub fn dp_known_prior(p: &Prior, d: f64) -> Result<f64> {
    adp_closed_form(p, d, 0.0)
}

/// Maximal-leakage privacy-distortion value for a known sorted prior.
pub fn ml_known_prior(p: &Prior, d: f64) -> Result<f64> {
    let tail = CumulativeTail::new(p)?;
    check_d(d, 1.0)?;
    let m = tail.m();
    if d >= tail.get(m - 1) - BREAKPOINT_TOL {
        return Ok(0.0);
    }
    let k = (1..=m).find(|&k| d <= tail.get(k) + BREAKPOINT_TOL).unwrap_or(m);
    let width = tail.get(k) - tail.get(k - 1);
    let v = (m - k) as f64 - (d - tail.get(k)) / width;
    Ok(ln_pos(v).max(0.0))
}

/// Smallest distortion reachable with maximal leakage at most `eps`, worst
/// case over the members of `s`.
pub fn ml_distortion_from_leakage(s: &SourceSet, eps: f64) -> Result<f64> {
    if !(eps >= 0.0) {
        return Err(Error::Parameter(format!("leakage {eps} must be non-negative")));
    }
    if matches!(s, SourceSet::FullSimplex(_)) {
        return Err(Error::SourceSet("needs explicit sorted priors".into()));
    }
    let e = eps.exp();
    let mut worst: f64 = 0.0;
    for p in s.members() {
        let tail = CumulativeTail::new(&p)?;
        let m = tail.m();
        let k = (e.floor() as usize).max(1);
        if k >= m {
            continue;
        }
        worst = worst.max(tail.get(m - k) + p.probs()[k] * (k as f64 - e));
    }
    Ok(worst)
}

/// Approximate-DP privacy-distortion value for a finite family of priors that
/// share the sorted ordering.
pub fn adp_source_set_class2(s: &SourceSet, d: f64, delta: f64) -> Result<f64> {
    if !(0.0..1.0).contains(&delta) {
        return Err(Error::Parameter(format!("delta={delta} must lie in [0,1)")));
    }
    let members = match s {
        SourceSet::Singleton(p) => vec![p.clone()],
        SourceSet::FiniteFamily(ps) => ps.clone(),
        SourceSet::FullSimplex(_) => return Err(Error::SourceSet("needs a finite family of sorted priors".into())),
    };
    let tails = members.iter().map(CumulativeTail::new).collect::<Result<Vec<_>>>()?;
    check_d(d, 1.0)?;
    let m = tails[0].m();
    if tails.iter().all(|t| d >= (1.0 - delta) * t.get(m - 1) - BREAKPOINT_TOL) {
        return Ok(0.0);
    }
    let objective = |a1: f64| class2_objective(&tails, d, delta, a1);
    let (_, value) = sweep_alpha1(d, objective);
    Ok(value.max(0.0))
}

/// `log(((m-1)(α₁-δ) - LP)/(1-α₁))` with the dual program over `γ_P, γ₂, γ₃`.
fn class2_objective(tails: &[CumulativeTail], d: f64, delta: f64, a1: f64) -> f64 {
    let m = tails[0].m();
    let k = tails.len();
    let mut cost = vec![a1 - 1.0 + d; k];
    cost.push(m as f64 * (a1 - delta) - 1.0 + delta);
    cost.push(a1 - delta);
    let mut lp = LinearProgram::minimize(cost);
    for j in 1..m {
        let mut row: Vec<f64> = tails.iter().map(|t| t.get(j)).collect();
        row.push(j as f64);
        row.push(1.0);
        lp.constrain(row, Relation::Ge, j as f64);
    }
    match lp.solve() {
        Ok(sol) => ln_pos(((m - 1) as f64 * (a1 - delta) - sol.value) / (1.0 - a1)),
        Err(_) => f64::INFINITY,
    }
}

/// Minimizes `f` over `α₁ ∈ [1-D, 1)`: coarse grid, then golden-section
/// refinement around the best grid point. Returns `(α₁, f(α₁))`.
pub(crate) fn sweep_alpha1(d: f64, f: impl Fn(f64) -> f64) -> (f64, f64) {
    let lo = 1.0 - d;
    let step = d / ALPHA_GRID as f64;
    let mut best = (lo, f(lo));
    let mut best_i = 0;
    for i in 1..ALPHA_GRID {
        let a = lo + step * i as f64;
        let v = f(a);
        if v < best.1 {
            best = (a, v);
            best_i = i;
        }
    }
    let mut a = lo + step * best_i.saturating_sub(1) as f64;
    let mut b = (lo + step * (best_i + 1) as f64).min(1.0 - 1e-15);
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - g * (b - a);
    let mut e = a + g * (b - a);
    let (mut fc, mut fe) = (f(c), f(e));
    while b - a > ALPHA_TOL {
        if fc <= fe {
            b = e;
            e = c;
            fe = fc;
            c = b - g * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = e;
            fc = fe;
            e = a + g * (b - a);
            fe = f(e);
        }
    }
    for (x, v) in [(c, fc), (e, fe)] {
        if v < best.1 {
            best = (x, v);
        }
    }
    best
}
