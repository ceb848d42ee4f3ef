//! Product spaces, priors, source sets, mechanisms and the distortion predicates.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lp::{LinearProgram, Relation};

/// Default bound on `m^n` for anything that enumerates the product space.
pub const DEFAULT_CAP: usize = 65_536;

/// Row-sum and prior-sum tolerance.
pub const PROB_TOL: f64 = 1e-12;

/// Slack accepted before renormalization; anything further off is rejected.
const INPUT_SLACK: f64 = 1e-9;

/// The enumeration cap, overridable through `PUTLAB_CAP`.
pub fn enumeration_cap() -> usize {
    std::env::var("PUTLAB_CAP")
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
        .filter(|&c| c > 0)
        .unwrap_or(DEFAULT_CAP)
}

/// `{1..m}^n` under the Hamming distance. Points are encoded base `m`,
/// coordinate `c` carrying weight `m^c`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ProductSpace {
    m: usize,
    n: usize,
    size: usize,
}

impl ProductSpace {
    pub fn new(m: usize, n: usize) -> Result<Self> {
        Self::with_cap(m, n, enumeration_cap())
    }

    pub fn with_cap(m: usize, n: usize, cap: usize) -> Result<Self> {
        if m < 2 {
            return Err(Error::Parameter(format!("alphabet size m={m} must be at least 2")));
        }
        if n < 1 {
            return Err(Error::Parameter("n must be at least 1".into()));
        }
        let size = u32::try_from(n)
            .ok()
            .and_then(|e| m.checked_pow(e))
            .filter(|&s| s <= cap)
            .ok_or(Error::CapExceeded { m, n, cap })?;
        Ok(ProductSpace { m, n, size })
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn coords(&self, mut x: usize) -> Vec<usize> {
        let mut out = Vec::with_capacity(self.n);
        for _ in 0..self.n {
            out.push(x % self.m);
            x /= self.m;
        }
        out
    }

    pub fn distance(&self, mut x: usize, mut y: usize) -> usize {
        let mut d = 0;
        for _ in 0..self.n {
            if x % self.m != y % self.m {
                d += 1;
            }
            x /= self.m;
            y /= self.m;
        }
        d
    }

    /// `|{y : d(x,y) = l}| = C(n,l)(m-1)^l`.
    pub fn neighbor_count(&self, l: usize) -> u128 {
        if l > self.n {
            return 0;
        }
        binomial(self.n, l) * (self.m as u128 - 1).pow(l as u32)
    }

    /// The `n(m-1)` points at Hamming distance one from `x`.
    pub fn neighbors(&self, x: usize) -> impl Iterator<Item = usize> + '_ {
        let m = self.m;
        (0..self.n).flat_map(move |c| {
            let w = m.pow(c as u32);
            let digit = (x / w) % m;
            (0..m).filter(move |&v| v != digit).map(move |v| x - digit * w + v * w)
        })
    }
}

impl fmt::Display for ProductSpace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{1..{}}}^{}", self.m, self.n)
    }
}

pub fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut r: u128 = 1;
    for i in 0..k {
        r = r * (n - i) as u128 / (i + 1) as u128;
    }
    r
}

/// A full-support distribution over a product space.
#[derive(Debug, Clone, PartialEq)]
pub struct Prior {
    space: ProductSpace,
    probs: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct PriorDoc {
    m: usize,
    n: usize,
    probs: Vec<f64>,
}

impl Prior {
    /// Validates full support; sums off by more than [`PROB_TOL`] are
    /// renormalized once.
    pub fn new(space: ProductSpace, probs: Vec<f64>) -> Result<Self> {
        if probs.len() != space.size() {
            return Err(Error::Dimension(format!(
                "prior has {} entries, space {} has {}",
                probs.len(),
                space,
                space.size()
            )));
        }
        if let Some(p) = probs.iter().find(|p| !p.is_finite() || **p <= 0.0) {
            return Err(Error::Probability(format!("entry {p} is not strictly positive")));
        }
        let sum: f64 = probs.iter().sum();
        if (sum - 1.0).abs() > INPUT_SLACK {
            return Err(Error::Probability(format!("entries sum to {sum}")));
        }
        let probs = if (sum - 1.0).abs() > PROB_TOL { probs.into_iter().map(|p| p / sum).collect() } else { probs };
        Ok(Prior { space, probs })
    }

    /// Convenience for `n = 1`.
    pub fn local(probs: &[f64]) -> Result<Self> {
        Self::new(ProductSpace::new(probs.len(), 1)?, probs.to_vec())
    }

    pub fn uniform(space: ProductSpace) -> Self {
        let p = 1.0 / space.size() as f64;
        Prior { space, probs: vec![p; space.size()] }
    }

    /// The i.i.d. product of a single-coordinate prior.
    pub fn iid(base: &Prior, n: usize) -> Result<Self> {
        if base.space.n() != 1 {
            return Err(Error::Dimension("iid base prior must be over n=1".into()));
        }
        let space = ProductSpace::new(base.space.m(), n)?;
        let probs = (0..space.size()).map(|x| space.coords(x).iter().map(|&c| base.probs[c]).product()).collect();
        Ok(Prior { space, probs })
    }

    pub fn space(&self) -> ProductSpace {
        self.space
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn min(&self) -> f64 {
        self.probs.iter().cloned().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.probs.iter().cloned().fold(0.0, f64::max)
    }

    pub fn is_uniform(&self) -> bool {
        let u = 1.0 / self.probs.len() as f64;
        self.probs.iter().all(|p| (p - u).abs() <= PROB_TOL)
    }

    /// Non-strict `P_1 ≥ … ≥ P_m`.
    pub fn is_sorted_desc(&self) -> bool {
        self.probs.windows(2).all(|w| w[0] >= w[1])
    }

    pub fn to_json(&self) -> String {
        let doc = PriorDoc { m: self.space.m(), n: self.space.n(), probs: self.probs.clone() };
        serde_json::to_string(&doc).expect("prior serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: PriorDoc = serde_json::from_str(text)?;
        Prior::new(ProductSpace::new(doc.m, doc.n)?, doc.probs)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SourceClass {
    ClassI,
    ClassII,
    ClassIII,
}

/// What the mechanism designer knows about the prior.
#[derive(Debug, Clone, PartialEq)]
pub enum SourceSet {
    Singleton(Prior),
    FullSimplex(ProductSpace),
    FiniteFamily(Vec<Prior>),
}

/// θ* together with η and the maximizing member.
#[derive(Debug, Clone, PartialEq)]
pub struct ThetaStar {
    pub theta: f64,
    pub eta: f64,
    pub member: Prior,
}

impl SourceSet {
    pub fn family(members: Vec<Prior>) -> Result<Self> {
        let first = members.first().ok_or_else(|| Error::SourceSet("empty family".into()))?.space();
        if members.iter().any(|p| p.space() != first) {
            return Err(Error::SourceSet("family members live on different spaces".into()));
        }
        Ok(SourceSet::FiniteFamily(members))
    }

    pub fn space(&self) -> ProductSpace {
        match self {
            SourceSet::Singleton(p) => p.space(),
            SourceSet::FullSimplex(s) => *s,
            SourceSet::FiniteFamily(ps) => ps[0].space(),
        }
    }

    /// Explicit priors; the full simplex is represented by its uniform member.
    pub fn members(&self) -> Vec<Prior> {
        match self {
            SourceSet::Singleton(p) => vec![p.clone()],
            SourceSet::FullSimplex(s) => vec![Prior::uniform(*s)],
            SourceSet::FiniteFamily(ps) => ps.clone(),
        }
    }

    pub fn classify(&self) -> SourceClass {
        let uniform_inside = match self {
            SourceSet::FullSimplex(_) => true,
            SourceSet::Singleton(p) => p.is_uniform(),
            SourceSet::FiniteFamily(ps) => uniform_in_hull(ps),
        };
        if uniform_inside {
            SourceClass::ClassI
        } else if self.common_ordering().is_some() {
            SourceClass::ClassII
        } else {
            SourceClass::ClassIII
        }
    }

    /// A permutation along which every member is non-increasing, if one exists.
    pub fn common_ordering(&self) -> Option<Vec<usize>> {
        let members = self.members();
        let size = self.space().size();
        let totals: Vec<f64> = (0..size).map(|x| members.iter().map(|p| p.probs[x]).sum()).collect();
        let mut order: Vec<usize> = (0..size).collect();
        order.sort_by(|&a, &b| totals[b].total_cmp(&totals[a]));
        let ok = members.iter().all(|p| order.windows(2).all(|w| p.probs[w[0]] >= p.probs[w[1]]));
        ok.then_some(order)
    }

    pub fn theta_star(&self) -> ThetaStar {
        let space = self.space();
        let best = match self {
            SourceSet::FullSimplex(s) => Prior::uniform(*s),
            _ => self.members().into_iter().max_by(|a, b| a.min().total_cmp(&b.min())).expect("non-empty source set"),
        };
        ThetaStar { theta: (space.size() as f64 * best.min()).min(1.0), eta: best.max(), member: best }
    }

    /// `P*` = smallest coordinate over all members.
    pub fn p_star(&self) -> f64 {
        self.members().iter().map(Prior::min).fold(f64::INFINITY, f64::min)
    }
}

fn uniform_in_hull(members: &[Prior]) -> bool {
    if members.iter().any(Prior::is_uniform) {
        return true;
    }
    let size = members[0].space().size();
    let k = members.len();
    let mut lp = LinearProgram::feasibility(k);
    lp.constrain(vec![1.0; k], Relation::Eq, 1.0);
    for x in 0..size {
        let coeffs = members.iter().map(|p| p.probs[x]).collect();
        lp.constrain(coeffs, Relation::Eq, 1.0 / size as f64);
    }
    lp.solve().is_ok()
}

/// A row-stochastic matrix `Q(y|x)` with inputs from a product space.
#[derive(Debug, Clone, PartialEq)]
pub struct Mechanism {
    space: ProductSpace,
    size_out: usize,
    data: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct MechanismDoc {
    m: usize,
    n: usize,
    rows: Vec<Vec<f64>>,
}

impl Mechanism {
    pub fn new(space: ProductSpace, rows: Vec<Vec<f64>>) -> Result<Self> {
        if rows.len() != space.size() {
            return Err(Error::Dimension(format!("{} rows for a space of size {}", rows.len(), space.size())));
        }
        let size_out = rows.first().map_or(0, Vec::len);
        if size_out == 0 || rows.iter().any(|r| r.len() != size_out) {
            return Err(Error::Dimension("rows must be non-empty and equally long".into()));
        }
        Self::from_flat(space, size_out, rows.into_iter().flatten().collect())
    }

    /// Row-major constructor; tiny negative round-off is clamped and rows are
    /// renormalized once when they are off by more than [`PROB_TOL`].
    pub fn from_flat(space: ProductSpace, size_out: usize, mut data: Vec<f64>) -> Result<Self> {
        if size_out == 0 || data.len() != space.size() * size_out {
            return Err(Error::Dimension("flat data does not match the shape".into()));
        }
        for row in data.chunks_mut(size_out) {
            for v in row.iter_mut() {
                if !v.is_finite() || *v < -INPUT_SLACK {
                    return Err(Error::Probability(format!("entry {v} is not a probability")));
                }
                *v = v.max(0.0);
            }
            let s: f64 = row.iter().sum();
            if (s - 1.0).abs() > INPUT_SLACK {
                return Err(Error::Probability(format!("row sums to {s}")));
            }
            if (s - 1.0).abs() > PROB_TOL {
                row.iter_mut().for_each(|v| *v /= s);
            }
        }
        Ok(Mechanism { space, size_out, data })
    }

    pub fn space(&self) -> ProductSpace {
        self.space
    }

    pub fn size_in(&self) -> usize {
        self.space.size()
    }

    pub fn size_out(&self) -> usize {
        self.size_out
    }

    pub fn row(&self, x: usize) -> &[f64] {
        &self.data[x * self.size_out..(x + 1) * self.size_out]
    }

    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.data[x * self.size_out + y]
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        self.data.chunks(self.size_out).map(<[f64]>::to_vec).collect()
    }

    pub fn max_entry(&self) -> f64 {
        self.data.iter().cloned().fold(0.0, f64::max)
    }

    /// `λ·a + (1-λ)·b`.
    pub fn mix(lambda: f64, a: &Mechanism, b: &Mechanism) -> Result<Self> {
        if a.space != b.space || a.size_out != b.size_out {
            return Err(Error::Dimension("mixing mechanisms of different shape".into()));
        }
        if !(0.0..=1.0).contains(&lambda) {
            return Err(Error::Parameter(format!("mixing weight {lambda}")));
        }
        let data = a.data.iter().zip(&b.data).map(|(x, y)| lambda * x + (1.0 - lambda) * y).collect();
        Mechanism::from_flat(a.space, a.size_out, data)
    }

    /// Relabels output `from` as `into`, dropping column `from`.
    pub fn merge_outputs(&self, into: usize, from: usize) -> Result<Self> {
        if into == from || into >= self.size_out || from >= self.size_out {
            return Err(Error::Parameter("bad column pair".into()));
        }
        let mut data = Vec::with_capacity(self.size_in() * (self.size_out - 1));
        for x in 0..self.size_in() {
            let row = self.row(x);
            for (y, &v) in row.iter().enumerate() {
                if y == from {
                    continue;
                }
                data.push(if y == into { v + row[from] } else { v });
            }
        }
        Mechanism::from_flat(self.space, self.size_out - 1, data)
    }

    pub fn to_json(&self) -> String {
        let doc = MechanismDoc { m: self.space.m(), n: self.space.n(), rows: self.rows() };
        serde_json::to_string(&doc).expect("mechanism serializes")
    }

    pub fn to_json_pretty(&self) -> String {
        let doc = MechanismDoc { m: self.space.m(), n: self.space.n(), rows: self.rows() };
        serde_json::to_string_pretty(&doc).expect("mechanism serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: MechanismDoc = serde_json::from_str(text)?;
        Mechanism::new(ProductSpace::new(doc.m, doc.n)?, doc.rows)
    }
}

/// Expected Hamming distortion of row `x`.
pub fn row_distortion(q: &Mechanism, x: usize) -> Result<f64> {
    if q.size_out != q.size_in() {
        return Err(Error::Dimension("distortion needs outputs in the input universe".into()));
    }
    let space = q.space;
    Ok(q.row(x).iter().enumerate().map(|(y, v)| v * space.distance(x, y) as f64).sum())
}

/// `Σ_x Σ_y P(x) Q(y|x) d(x,y)`.
pub fn expected_distortion(q: &Mechanism, p: &Prior) -> Result<f64> {
    if p.space != q.space {
        return Err(Error::Dimension(format!("prior over {} but mechanism over {}", p.space, q.space)));
    }
    let mut total = 0.0;
    for (x, px) in p.probs.iter().enumerate() {
        total += px * row_distortion(q, x)?;
    }
    Ok(total)
}

/// Validity against every member; the full simplex is checked at its vertices.
pub fn is_valid(q: &Mechanism, s: &SourceSet, d: f64) -> Result<bool> {
    if d < 0.0 || d.is_nan() {
        return Err(Error::DistortionRange { d, range: "[0, n]".into() });
    }
    if s.space() != q.space {
        return Err(Error::Dimension("source set and mechanism spaces differ".into()));
    }
    match s {
        SourceSet::FullSimplex(_) => {
            for x in 0..q.size_in() {
                if row_distortion(q, x)? > d + PROB_TOL {
                    return Ok(false);
                }
            }
            Ok(true)
        }
        _ => {
            for p in s.members() {
                if expected_distortion(q, &p)? > d + PROB_TOL {
                    return Ok(false);
                }
            }
            Ok(true)
        }
    }
}

/// The seven privacy notions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PrivacyNotion {
    Dp,
    ApproxDp { delta: f64 },
    MaxInfo,
    MaxLeakage,
    RenyiDp { alpha: f64 },
    Sibson { alpha: f64 },
    MutualInfo,
}

impl PrivacyNotion {
    pub fn approx_dp(delta: f64) -> Result<Self> {
        if !(delta > 0.0 && delta < 1.0) {
            return Err(Error::Parameter(format!("delta={delta} must lie in (0,1)")));
        }
        Ok(PrivacyNotion::ApproxDp { delta })
    }

    pub fn renyi(alpha: f64) -> Result<Self> {
        check_alpha(alpha)?;
        Ok(PrivacyNotion::RenyiDp { alpha })
    }

    pub fn sibson(alpha: f64) -> Result<Self> {
        check_alpha(alpha)?;
        Ok(PrivacyNotion::Sibson { alpha })
    }

    /// Re-checks parameters of a value built through the enum directly.
    pub fn validate(&self) -> Result<()> {
        match *self {
            PrivacyNotion::ApproxDp { delta } => PrivacyNotion::approx_dp(delta).map(drop),
            PrivacyNotion::RenyiDp { alpha } | PrivacyNotion::Sibson { alpha } => check_alpha(alpha),
            _ => Ok(()),
        }
    }

    pub fn prior_required(&self) -> bool {
        matches!(self, PrivacyNotion::MaxInfo | PrivacyNotion::Sibson { .. } | PrivacyNotion::MutualInfo)
    }

    pub fn all(delta: f64, alpha: f64) -> Vec<PrivacyNotion> {
        vec![
            PrivacyNotion::Dp,
            PrivacyNotion::ApproxDp { delta },
            PrivacyNotion::MaxInfo,
            PrivacyNotion::MaxLeakage,
            PrivacyNotion::RenyiDp { alpha },
            PrivacyNotion::Sibson { alpha },
            PrivacyNotion::MutualInfo,
        ]
    }

    /// Position in the canonical listing, used for stable ordering.
    pub fn rank(&self) -> usize {
        match self {
            PrivacyNotion::Dp => 0,
            PrivacyNotion::ApproxDp { .. } => 1,
            PrivacyNotion::MaxInfo => 2,
            PrivacyNotion::MaxLeakage => 3,
            PrivacyNotion::RenyiDp { .. } => 4,
            PrivacyNotion::Sibson { .. } => 5,
            PrivacyNotion::MutualInfo => 6,
        }
    }

    pub fn parameter(&self) -> Option<f64> {
        match *self {
            PrivacyNotion::ApproxDp { delta } => Some(delta),
            PrivacyNotion::RenyiDp { alpha } | PrivacyNotion::Sibson { alpha } => Some(alpha),
            _ => None,
        }
    }

    /// Short label: `dp`, `adp(0.1)`, `maxinfo`, `ml`, `rdp(2)`, `sibson(2)`, `mi`.
    pub fn label(&self) -> String {
        match *self {
            PrivacyNotion::Dp => "dp".into(),
            PrivacyNotion::ApproxDp { delta } => format!("adp({delta})"),
            PrivacyNotion::MaxInfo => "maxinfo".into(),
            PrivacyNotion::MaxLeakage => "ml".into(),
            PrivacyNotion::RenyiDp { alpha } => format!("rdp({alpha})"),
            PrivacyNotion::Sibson { alpha } => format!("sibson({alpha})"),
            PrivacyNotion::MutualInfo => "mi".into(),
        }
    }
}

impl fmt::Display for PrivacyNotion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label())
    }
}

fn check_alpha(alpha: f64) -> Result<()> {
    if !(alpha > 1.0) || !alpha.is_finite() {
        return Err(Error::Parameter(format!("alpha={alpha} must be finite and > 1")));
    }
    Ok(())
}
