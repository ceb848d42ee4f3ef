//! Brute-force privacy-distortion solvers for small single-coordinate
//! instances, and the randomized cross-check of every closed form.
//!
//! Nothing here reuses the closed-form algebra: the LP oracle optimizes over
//! all `m × m` mechanisms directly, mutual information goes through
//! Blahut–Arimoto, and Rényi/Sibson through projected gradient descent.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::catalog::{optimal_adp_mechanism, optimal_ml_mechanism};
use crate::error::{Error, Result};
use crate::global::{global_bounds, BoundPair};
use crate::local::{adp_known_prior, adp_source_set_class2, class1_pd, dp_known_prior, ml_known_prior, CumulativeTail};
use crate::lp::{LinearProgram, Relation};
use crate::model::{expected_distortion, Mechanism, Prior, PrivacyNotion, ProductSpace, SourceSet};
use crate::privacy::{eval_loss, log_sum_exp, renyi_pair_log};

/// Weight of the uniform mechanism blended into LP certificates so that
/// round-off zeros cannot produce spurious infinite ratios.
const CERT_BLEND: f64 = 1e-10;
const RESTARTS: usize = 16;

#[derive(Debug, Clone)]
pub struct OracleResult {
    pub value: f64,
    pub certificate: Mechanism,
    pub iterations: usize,
    pub tolerance_achieved: f64,
    /// Largest minus smallest value across restarts (zero for LP and
    /// Blahut–Arimoto).
    pub restart_spread: f64,
    /// False when restarts disagree by more than ten times the tolerance.
    pub certified: bool,
}

fn local_space(members: &[Prior]) -> Result<ProductSpace> {
    let space = members.first().ok_or_else(|| Error::SourceSet("no prior".into()))?.space();
    if space.n() != 1 || members.iter().any(|p| p.space() != space) {
        return Err(Error::Dimension("oracles work on a single coordinate".into()));
    }
    Ok(space)
}

fn check_range(d: f64, tol: f64) -> Result<()> {
    if !(d > 0.0 && d <= 1.0) {
        return Err(Error::DistortionRange { d, range: "(0, 1]".into() });
    }
    if !(tol >= 1e-8) {
        return Err(Error::Parameter(format!("tolerance {tol} below 1e-8")));
    }
    Ok(())
}

/// Row-stochasticity and validity rows shared by every LP oracle.
fn base_program(m: usize, extra: usize, members: &[Prior], d: f64, objective: Option<Vec<f64>>) -> LinearProgram {
    let nv = m * m + extra;
    let mut lp = match objective {
        Some(c) => LinearProgram::minimize(c),
        None => LinearProgram::feasibility(nv),
    };
    for x in 0..m {
        let terms: Vec<(usize, f64)> = (0..m).map(|y| (x * m + y, 1.0)).collect();
        lp.constrain_sparse(&terms, Relation::Eq, 1.0);
    }
    for p in members {
        let terms: Vec<(usize, f64)> = (0..m).map(|x| (x * m + x, p.probs()[x])).collect();
        lp.constrain_sparse(&terms, Relation::Ge, 1.0 - d);
    }
    lp
}

/// Largest worst-case accuracy `t = min_P Σ_x P(x)Q(x|x)` reachable at loss
/// level `eps`, with a maximizer. Uniform rows are always feasible, so phase
/// one closes exactly and the decision `t ≥ 1 - D` is made on a clean optimum.
fn best_accuracy(notion: PrivacyNotion, m: usize, members: &[Prior], eps: f64) -> Result<(f64, Vec<f64>)> {
    let t = m * m;
    let mut cost = vec![0.0; t + 1];
    cost[t] = -1.0;
    let mut lp = LinearProgram::minimize(cost);
    for x in 0..m {
        let terms: Vec<(usize, f64)> = (0..m).map(|y| (x * m + y, 1.0)).collect();
        lp.constrain_sparse(&terms, Relation::Eq, 1.0);
    }
    for p in members {
        let mut terms: Vec<(usize, f64)> = (0..m).map(|x| (x * m + x, -p.probs()[x])).collect();
        terms.push((t, 1.0));
        lp.constrain_sparse(&terms, Relation::Le, 0.0);
    }
    let e = eps.exp();
    match notion {
        PrivacyNotion::Dp | PrivacyNotion::ApproxDp { .. } => {
            let delta = notion.parameter().unwrap_or(0.0);
            for y in 0..m {
                for x in 0..m {
                    for xn in (0..m).filter(|&v| v != x) {
                        lp.constrain_sparse(&[(x * m + y, 1.0), (xn * m + y, -e)], Relation::Le, delta);
                    }
                }
            }
        }
        PrivacyNotion::MaxInfo => {
            for p in members {
                for y in 0..m {
                    for x in 0..m {
                        let mut terms: Vec<(usize, f64)> = (0..m).map(|xp| (xp * m + y, -e * p.probs()[xp])).collect();
                        terms.push((x * m + y, 1.0));
                        lp.constrain_sparse(&terms, Relation::Le, 0.0);
                    }
                }
            }
        }
        _ => unreachable!("only ratio-type notions are bisected"),
    }
    let sol = lp.solve()?;
    Ok((-sol.value, sol.x))
}

fn feasible_at(notion: PrivacyNotion, m: usize, members: &[Prior], d: f64, eps: f64) -> Result<Option<Vec<f64>>> {
    let (acc, x) = best_accuracy(notion, m, members, eps)?;
    Ok((acc >= 1.0 - d - 1e-12).then_some(x))
}

fn blended(space: ProductSpace, x: &[f64]) -> Result<Mechanism> {
    let m = space.m();
    let u = 1.0 / m as f64;
    let data = x[..m * m].iter().map(|v| (1.0 - CERT_BLEND) * v + CERT_BLEND * u).collect();
    Mechanism::from_flat(space, m, data)
}

/// LP-based oracle for DP, approximate DP, maximal information and maximal
/// leakage at a known prior.
pub fn oracle_pd_lp(notion: PrivacyNotion, p: &Prior, d: f64, tol: f64) -> Result<OracleResult> {
    oracle_pd_lp_family(notion, std::slice::from_ref(p), d, tol)
}

/// As [`oracle_pd_lp`], with the distortion constraint imposed for every
/// member of a finite family.
pub fn oracle_pd_lp_family(notion: PrivacyNotion, members: &[Prior], d: f64, tol: f64) -> Result<OracleResult> {
    notion.validate()?;
    let space = local_space(members)?;
    check_range(d, tol)?;
    let m = space.m();
    if m > 6 {
        return Err(Error::Parameter("LP oracle supports m ≤ 6".into()));
    }
    match notion {
        PrivacyNotion::MaxLeakage => return leakage_lp(space, members, d),
        PrivacyNotion::Dp | PrivacyNotion::ApproxDp { .. } | PrivacyNotion::MaxInfo => {}
        other => return Err(Error::Parameter(format!("{other} is not handled by the LP oracle"))),
    }
    let mut iterations = 1;
    if let Some(x) = feasible_at(notion, m, members, d, 0.0)? {
        let cert = blended(space, &x)?;
        return Ok(OracleResult {
            value: 0.0,
            tolerance_achieved: certificate_excess(notion, &cert, members, 0.0)?,
            certificate: cert,
            iterations,
            restart_spread: 0.0,
            certified: true,
        });
    }
    let (mut lo, mut hi) = (0.0, (((m - 1) as f64) * (1.0 - d) / d).ln().max(0.0) + 1.0);
    let mut cert = feasible_at(notion, m, members, d, hi)?.ok_or(Error::NoConvergence { lo, hi })?;
    while hi - lo >= tol {
        iterations += 1;
        let mid = 0.5 * (lo + hi);
        match feasible_at(notion, m, members, d, mid)? {
            Some(x) => {
                hi = mid;
                cert = x;
            }
            None => lo = mid,
        }
        if iterations > 200 {
            return Err(Error::NoConvergence { lo, hi });
        }
    }
    let certificate = blended(space, &cert)?;
    let excess = certificate_excess(notion, &certificate, members, hi)?;
    Ok(OracleResult {
        value: hi,
        certificate,
        iterations,
        tolerance_achieved: (hi - lo).max(excess),
        restart_spread: 0.0,
        certified: true,
    })
}

fn certificate_excess(notion: PrivacyNotion, q: &Mechanism, members: &[Prior], value: f64) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for p in members {
        worst = worst.max(eval_loss(notion, q, Some(p))? - value);
    }
    Ok(worst)
}

/// Column-max LP for maximal leakage, followed by a second stage that keeps
/// the optimal leakage and maximizes accuracy.
fn leakage_lp(space: ProductSpace, members: &[Prior], d: f64) -> Result<OracleResult> {
    let m = space.m();
    let nv = m * m + m;
    let mut cost = vec![0.0; nv];
    cost[m * m..].iter_mut().for_each(|c| *c = 1.0);
    let mut lp = base_program(m, m, members, d, Some(cost));
    for y in 0..m {
        for x in 0..m {
            lp.constrain_sparse(&[(x * m + y, 1.0), (m * m + y, -1.0)], Relation::Le, 0.0);
        }
    }
    let first = lp.solve()?;
    let weights: Vec<f64> = (0..m).map(|x| members.iter().map(|p| p.probs()[x]).sum()).collect();
    let mut accuracy = vec![0.0; nv];
    for x in 0..m {
        accuracy[x * m + x] = -weights[x];
    }
    let mut stage = base_program(m, m, members, d, Some(accuracy));
    for y in 0..m {
        for x in 0..m {
            stage.constrain_sparse(&[(x * m + y, 1.0), (m * m + y, -1.0)], Relation::Le, 0.0);
        }
    }
    let t_terms: Vec<(usize, f64)> = (0..m).map(|y| (m * m + y, 1.0)).collect();
    stage.constrain_sparse(&t_terms, Relation::Le, first.value * (1.0 + 1e-12));
    let x = stage.solve().map(|s| s.x).unwrap_or(first.x);
    let certificate = Mechanism::from_flat(space, m, x[..m * m].to_vec())?;
    let value = first.value.ln();
    let excess = eval_loss(PrivacyNotion::MaxLeakage, &certificate, None)? - value;
    Ok(OracleResult {
        value,
        certificate,
        iterations: 2,
        tolerance_achieved: excess.max(0.0),
        restart_spread: 0.0,
        certified: true,
    })
}

/// Constant rows putting all mass on the most likely symbol: zero leakage
/// under every notion, distortion `1 - max P`.
fn constant_guess(p: &Prior) -> Result<(Mechanism, f64)> {
    let m = p.space().m();
    let best = (0..m).max_by(|&a, &b| p.probs()[a].total_cmp(&p.probs()[b])).unwrap_or(0);
    let rows = (0..m).map(|_| (0..m).map(|y| if y == best { 1.0 } else { 0.0 }).collect()).collect();
    Ok((Mechanism::new(p.space(), rows)?, 1.0 - p.probs()[best]))
}

/// Blahut–Arimoto at slope `s` for Hamming distortion.
fn blahut_arimoto(probs: &[f64], s: f64, iters: &mut usize) -> Vec<f64> {
    let m = probs.len();
    let w = (-s).exp();
    let mut r = vec![1.0 / m as f64; m];
    let mut q = vec![0.0; m * m];
    for _ in 0..200_000 {
        *iters += 1;
        for x in 0..m {
            let z: f64 = (0..m).map(|y| r[y] * if x == y { 1.0 } else { w }).sum();
            for y in 0..m {
                q[x * m + y] = r[y] * if x == y { 1.0 } else { w } / z;
            }
        }
        let next: Vec<f64> = (0..m).map(|y| (0..m).map(|x| probs[x] * q[x * m + y]).sum()).collect();
        let change = next.iter().zip(&r).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        r = next;
        if change < 1e-15 {
            break;
        }
    }
    q
}

fn mutual_info_oracle(p: &Prior, d: f64, tol: f64) -> Result<OracleResult> {
    let space = p.space();
    let (guess, floor) = constant_guess(p)?;
    if d >= floor {
        return Ok(OracleResult {
            value: 0.0,
            certificate: guess,
            iterations: 0,
            tolerance_achieved: 0.0,
            restart_spread: 0.0,
            certified: true,
        });
    }
    let probs = p.probs();
    let m = space.m();
    let mut iterations = 0;
    let distortion = |q: &[f64]| 1.0 - (0..m).map(|x| probs[x] * q[x * m + x]).sum::<f64>();
    let (mut lo, mut hi) = (0.0, 1.0);
    let mut q_hi = blahut_arimoto(probs, hi, &mut iterations);
    while distortion(&q_hi) > d {
        lo = hi;
        hi *= 2.0;
        q_hi = blahut_arimoto(probs, hi, &mut iterations);
        if hi > 1e6 {
            return Err(Error::NoConvergence { lo, hi });
        }
    }
    for _ in 0..200 {
        if hi - lo <= 1e-13 * hi {
            break;
        }
        let mid = 0.5 * (lo + hi);
        let q = blahut_arimoto(probs, mid, &mut iterations);
        if distortion(&q) > d {
            lo = mid;
        } else {
            hi = mid;
            q_hi = q;
        }
    }
    let certificate = Mechanism::from_flat(space, m, q_hi)?;
    let value = eval_loss(PrivacyNotion::MutualInfo, &certificate, Some(p))?;
    let slack = hi * (d - expected_distortion(&certificate, p)?).max(0.0);
    Ok(OracleResult {
        value,
        certificate,
        iterations,
        tolerance_achieved: slack.max(tol.min(1e-9)),
        restart_spread: 0.0,
        certified: true,
    })
}

/// Euclidean projection onto `{v ≥ floor, Σ v = 1}`.
fn project_row(z: &[f64], floor: f64, out: &mut [f64]) {
    let mass = 1.0 - floor * z.len() as f64;
    let mut sorted: Vec<f64> = z.iter().map(|v| v - floor).collect();
    sorted.sort_by(|a, b| b.total_cmp(a));
    let mut acc = 0.0;
    let mut shift = 0.0;
    for (i, v) in sorted.iter().enumerate() {
        acc += v;
        let t = (acc - mass) / (i + 1) as f64;
        if v - t > 0.0 {
            shift = t;
        }
    }
    for (o, v) in out.iter_mut().zip(z) {
        *o = floor + (v - floor - shift).max(0.0);
    }
}

/// Projection onto row-stochastic matrices (entries ≥ floor) meeting
/// `Σ P_x Q(x|x) ≥ 1 - D`: the validity multiplier is found by bisection.
fn project_feasible(z: &[f64], probs: &[f64], d: f64, floor: f64) -> Vec<f64> {
    let m = probs.len();
    let mut out = vec![0.0; m * m];
    let shifted = |mu: f64, out: &mut Vec<f64>| {
        let mut row = vec![0.0; m];
        for x in 0..m {
            row.copy_from_slice(&z[x * m..(x + 1) * m]);
            row[x] += mu * probs[x];
            project_row(&row, floor, &mut out[x * m..(x + 1) * m]);
        }
        (0..m).map(|x| probs[x] * out[x * m + x]).sum::<f64>()
    };
    if shifted(0.0, &mut out) >= 1.0 - d {
        return out;
    }
    let mut hi = 1.0;
    while shifted(hi, &mut out) < 1.0 - d {
        hi *= 2.0;
    }
    let mut lo = 0.0;
    for _ in 0..100 {
        let mid = 0.5 * (lo + hi);
        if shifted(mid, &mut out) >= 1.0 - d {
            hi = mid;
        } else {
            lo = mid;
        }
        if hi - lo < 1e-15 * hi.max(1.0) {
            break;
        }
    }
    shifted(hi, &mut out);
    out
}

/// Smooth convex surrogate and its gradient.
trait Surrogate: Sync {
    fn value(&self, q: &[f64]) -> f64;
    fn grad(&self, q: &[f64]) -> Vec<f64>;
}

struct SibsonSurrogate<'a> {
    probs: &'a [f64],
    alpha: f64,
}

impl Surrogate for SibsonSurrogate<'_> {
    fn value(&self, q: &[f64]) -> f64 {
        let m = self.probs.len();
        (0..m)
            .map(|y| {
                let s: f64 = (0..m).map(|x| self.probs[x] * q[x * m + y].powf(self.alpha)).sum();
                s.powf(1.0 / self.alpha)
            })
            .sum()
    }

    fn grad(&self, q: &[f64]) -> Vec<f64> {
        let m = self.probs.len();
        let mut g = vec![0.0; m * m];
        for y in 0..m {
            let s: f64 = (0..m).map(|x| self.probs[x] * q[x * m + y].powf(self.alpha)).sum();
            if s <= 0.0 {
                continue;
            }
            let c = s.powf(1.0 / self.alpha - 1.0);
            for x in 0..m {
                g[x * m + y] = c * self.probs[x] * q[x * m + y].powf(self.alpha - 1.0);
            }
        }
        g
    }
}

struct RenyiSurrogate {
    m: usize,
    alpha: f64,
    tau: f64,
}

impl RenyiSurrogate {
    fn pair_logs(&self, q: &[f64]) -> Vec<(usize, usize, f64)> {
        let m = self.m;
        let mut out = Vec::with_capacity(m * (m - 1));
        for x in 0..m {
            for xn in (0..m).filter(|&v| v != x) {
                let l = renyi_pair_log(&q[x * m..(x + 1) * m], &q[xn * m..(xn + 1) * m], self.alpha);
                out.push((x, xn, l / (self.alpha - 1.0)));
            }
        }
        out
    }
}

impl Surrogate for RenyiSurrogate {
    fn value(&self, q: &[f64]) -> f64 {
        let logs: Vec<f64> = self.pair_logs(q).iter().map(|t| t.2 / self.tau).collect();
        self.tau * log_sum_exp(&logs)
    }

    fn grad(&self, q: &[f64]) -> Vec<f64> {
        let (m, a) = (self.m, self.alpha);
        let pairs = self.pair_logs(q);
        let scaled: Vec<f64> = pairs.iter().map(|t| t.2 / self.tau).collect();
        let norm = log_sum_exp(&scaled);
        let mut g = vec![0.0; m * m];
        for ((x, xn, l), s) in pairs.iter().zip(&scaled) {
            let w = (s - norm).exp();
            if w < 1e-300 {
                continue;
            }
            let total = (l * (a - 1.0)).exp();
            for y in 0..m {
                let (u, v) = (q[x * m + y], q[xn * m + y]);
                let ratio = (u / v).powf(a - 1.0);
                g[x * m + y] += w * a * ratio / total / (a - 1.0);
                g[xn * m + y] += w * (1.0 - a) * ratio * u / v / total / (a - 1.0);
            }
        }
        g
    }
}

fn descend(
    f: &dyn Surrogate,
    mut q: Vec<f64>,
    probs: &[f64],
    d: f64,
    floor: f64,
    max_iter: usize,
) -> (Vec<f64>, usize) {
    let mut step = 1.0;
    let mut fq = f.value(&q);
    let mut iters = 0;
    let mut stalls = 0;
    while iters < max_iter && step > 1e-16 {
        iters += 1;
        let g = f.grad(&q);
        let trial: Vec<f64> = q.iter().zip(&g).map(|(v, gv)| v - step * gv).collect();
        let next = project_feasible(&trial, probs, d, floor);
        let decrease: f64 = g.iter().zip(q.iter().zip(&next)).map(|(gv, (a, b))| gv * (a - b)).sum();
        let fn_ = f.value(&next);
        if fn_.is_finite() && fn_ <= fq - 1e-4 * decrease {
            stalls = if fq - fn_ < 1e-15 * fq.abs().max(1.0) { stalls + 1 } else { 0 };
            q = next;
            fq = fn_;
            step = (step * 2.0).min(1e6);
            if stalls > 20 {
                break;
            }
        } else {
            step *= 0.5;
        }
    }
    (q, iters)
}

/// Mutual information by Blahut–Arimoto; Sibson and Rényi by projected
/// gradient descent from 16 starts, the first of which is randomized response
/// at distortion `D`.
pub fn oracle_pd_convex(notion: PrivacyNotion, p: &Prior, d: f64, tol: f64) -> Result<OracleResult> {
    notion.validate()?;
    let space = local_space(std::slice::from_ref(p))?;
    check_range(d, tol)?;
    let m = space.m();
    if m > 4 {
        return Err(Error::Parameter("convex oracle supports m ≤ 4".into()));
    }
    let alpha = match notion {
        PrivacyNotion::MutualInfo => return mutual_info_oracle(p, d, tol),
        PrivacyNotion::Sibson { alpha } | PrivacyNotion::RenyiDp { alpha } => alpha,
        other => return Err(Error::Parameter(format!("{other} is not handled by the convex oracle"))),
    };
    let (guess, floor_d) = constant_guess(p)?;
    if d >= floor_d {
        return Ok(OracleResult {
            value: 0.0,
            certificate: guess,
            iterations: 0,
            tolerance_achieved: 0.0,
            restart_spread: 0.0,
            certified: true,
        });
    }
    let probs = p.probs();
    let floor = if matches!(notion, PrivacyNotion::RenyiDp { .. }) { 1e-12 } else { 0.0 };
    let runs: Vec<(f64, Vec<f64>, usize)> = (0..RESTARTS)
        .into_par_iter()
        .map(|r| {
            let start = if r == 0 {
                (0..m * m).map(|i| if i / m == i % m { 1.0 - d } else { d / (m - 1) as f64 }).collect()
            } else {
                let mut rng = ChaCha8Rng::seed_from_u64(0x5EED ^ (r as u64) ^ d.to_bits());
                let raw: Vec<f64> = (0..m * m).map(|_| rng.gen::<f64>()).collect();
                let mut rows = raw;
                for x in 0..m {
                    let s: f64 = rows[x * m..(x + 1) * m].iter().sum();
                    rows[x * m..(x + 1) * m].iter_mut().for_each(|v| *v /= s);
                }
                rows
            };
            let start = project_feasible(&start, probs, d, floor);
            let loss = |q: &[f64]| {
                Mechanism::from_flat(space, m, q.to_vec())
                    .and_then(|c| eval_loss(notion, &c, Some(p)))
                    .unwrap_or(f64::INFINITY)
            };
            let mut best = (loss(&start), start.clone());
            let mut iters = 0;
            match notion {
                PrivacyNotion::Sibson { .. } => {
                    let (q, it) = descend(&SibsonSurrogate { probs, alpha }, start, probs, d, floor, 3000);
                    iters += it;
                    let v = loss(&q);
                    if v < best.0 {
                        best = (v, q);
                    }
                }
                _ => {
                    let mut q = start;
                    for tau in [1e-2, 1e-3, 1e-4, 1e-5, 1e-6] {
                        let (next, it) = descend(&RenyiSurrogate { m, alpha, tau }, q, probs, d, floor, 600);
                        iters += it;
                        let v = loss(&next);
                        if v < best.0 {
                            best = (v, next.clone());
                        }
                        q = next;
                    }
                }
            }
            let (value, q) = best;
            (value, q, iters)
        })
        .collect();
    let best = runs
        .iter()
        .enumerate()
        .min_by(|a, b| a.1 .0.total_cmp(&b.1 .0).then(a.0.cmp(&b.0)))
        .map(|(i, _)| i)
        .unwrap_or(0);
    let finite: Vec<f64> = runs.iter().map(|r| r.0).filter(|v| v.is_finite()).collect();
    let spread =
        finite.iter().cloned().fold(f64::NEG_INFINITY, f64::max) - finite.iter().cloned().fold(f64::INFINITY, f64::min);
    let certificate = Mechanism::from_flat(space, m, runs[best].1.clone())?;
    Ok(OracleResult {
        value: runs[best].0,
        certificate,
        iterations: runs.iter().map(|r| r.2).sum(),
        tolerance_achieved: tol,
        restart_spread: spread,
        certified: spread <= 10.0 * tol,
    })
}

/// Which notion families a verification run covers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum NotionKind {
    Dp,
    Adp,
    MaxInfo,
    Ml,
    Rdp,
    Sibson,
    Mi,
}

impl NotionKind {
    pub fn parse(s: &str) -> Option<Self> {
        Some(match s.to_ascii_lowercase().as_str() {
            "dp" => NotionKind::Dp,
            "adp" => NotionKind::Adp,
            "maxinfo" => NotionKind::MaxInfo,
            "ml" => NotionKind::Ml,
            "rdp" => NotionKind::Rdp,
            "sibson" => NotionKind::Sibson,
            "mi" => NotionKind::Mi,
            _ => return None,
        })
    }
}

#[derive(Debug, Clone)]
pub struct VerifyOptions {
    pub seed: u64,
    pub trials: usize,
    /// Restrict to these notion families; empty means all.
    pub only: Vec<NotionKind>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum CheckKind {
    Equality,
    Bracket,
}

#[derive(Debug, Clone, Serialize)]
pub struct WorstCase {
    pub prior: Vec<f64>,
    #[serde(rename = "D")]
    pub d: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct VerifyEntry {
    pub notion: String,
    pub theorem: String,
    pub kind: CheckKind,
    pub max_dev: f64,
    pub tolerance: f64,
    pub checks: usize,
    pub passed: bool,
    pub worst_case: Option<WorstCase>,
}

#[derive(Debug, Clone, Serialize)]
pub struct VerifyReport {
    pub seed: u64,
    pub trials: usize,
    pub passed: bool,
    pub entries: Vec<VerifyEntry>,
}

struct Spec {
    kind: NotionKind,
    notion: &'static str,
    theorem: &'static str,
    check: CheckKind,
    tolerance: f64,
}

const fn spec(kind: NotionKind, notion: &'static str, theorem: &'static str, check: CheckKind, tolerance: f64) -> Spec {
    Spec { kind, notion, theorem, check, tolerance }
}

const SPECS: [Spec; 13] = [
    spec(NotionKind::Dp, "dp", "known-prior closed form", CheckKind::Equality, 1e-5),
    spec(NotionKind::Adp, "adp(0.1)", "known-prior closed form", CheckKind::Equality, 1e-5),
    spec(NotionKind::Ml, "ml", "known-prior closed form", CheckKind::Equality, 1e-5),
    spec(NotionKind::Dp, "dp", "class I closed form", CheckKind::Equality, 1e-5),
    spec(NotionKind::Ml, "ml", "class I closed form", CheckKind::Equality, 1e-5),
    spec(NotionKind::Mi, "mi", "class I closed form", CheckKind::Equality, 1e-4),
    spec(NotionKind::Adp, "adp(0.1)", "class II program", CheckKind::Equality, 1e-5),
    spec(NotionKind::Adp, "adp(0.1)", "optimal mechanism", CheckKind::Equality, 1e-6),
    spec(NotionKind::Ml, "ml", "optimal mechanism", CheckKind::Equality, 1e-6),
    spec(NotionKind::MaxInfo, "maxinfo", "theta-star bracket (n=1)", CheckKind::Bracket, 1e-6),
    spec(NotionKind::Mi, "mi", "theta-star bracket (n=1)", CheckKind::Bracket, 1e-6),
    spec(NotionKind::Rdp, "rdp(2)", "theta-star bracket (n=1)", CheckKind::Bracket, 1e-6),
    spec(NotionKind::Sibson, "sibson(2)", "theta-star bracket (n=1)", CheckKind::Bracket, 1e-6),
];

const ORACLE_TOL: f64 = 1e-8;
const GRID_POINTS: usize = 6;
const CONVEX_POINTS: usize = 2;

struct Observation {
    spec: usize,
    dev: f64,
    prior: Vec<f64>,
    d: f64,
}

fn trial_rng(seed: u64, trial: usize) -> ChaCha8Rng {
    let mut z = seed ^ (trial as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    ChaCha8Rng::seed_from_u64(z ^ (z >> 31))
}

/// A sorted full-support prior with entries bounded away from zero.
pub fn random_sorted_prior(rng: &mut impl Rng, m: usize) -> Prior {
    let mut v: Vec<f64> = (0..m).map(|_| rng.gen_range(0.05..1.0)).collect();
    let s: f64 = v.iter().sum();
    v.iter_mut().for_each(|x| *x /= s);
    v.sort_by(|a, b| b.total_cmp(a));
    Prior::local(&v).expect("random prior")
}

fn bracket_dev(b: &BoundPair, v: f64) -> f64 {
    (b.lower - v).max(v - b.upper).max(0.0)
}

fn run_trial(seed: u64, trial: usize, only: &[NotionKind]) -> Result<Vec<Observation>> {
    let mut rng = trial_rng(seed, trial);
    let m = rng.gen_range(2..=5usize);
    let p = random_sorted_prior(&mut rng, m);
    let mate = random_sorted_prior(&mut rng, m);
    let mut grid: Vec<f64> = (0..GRID_POINTS).map(|_| rng.gen_range(0.01..0.99)).collect();
    grid.sort_by(f64::total_cmp);
    let uniform = Prior::uniform(p.space());
    let singleton = SourceSet::Singleton(p.clone());
    let simplex = SourceSet::FullSimplex(p.space());
    let family = SourceSet::family(vec![p.clone(), mate.clone()])?;
    let tail = CumulativeTail::new(&p)?;
    let adp = PrivacyNotion::ApproxDp { delta: 0.1 };
    let wanted = |i: usize| only.is_empty() || only.contains(&SPECS[i].kind);
    let mut out = Vec::new();
    let mut push = |spec: usize, dev: f64, prior: &Prior, d: f64| {
        out.push(Observation { spec, dev, prior: prior.probs().to_vec(), d })
    };

    for (gi, &d) in grid.iter().enumerate() {
        if wanted(0) {
            let o = oracle_pd_lp(PrivacyNotion::Dp, &p, d, ORACLE_TOL)?;
            push(0, (o.value - dp_known_prior(&p, d)?).abs(), &p, d);
        }
        if wanted(1) {
            let o = oracle_pd_lp(adp, &p, d, ORACLE_TOL)?;
            push(1, (o.value - adp_known_prior(&p, d, 0.1)?).abs(), &p, d);
        }
        if wanted(2) {
            let o = oracle_pd_lp(PrivacyNotion::MaxLeakage, &p, d, ORACLE_TOL)?;
            push(2, (o.value - ml_known_prior(&p, d)?).abs(), &p, d);
        }
        if wanted(3) {
            let o = oracle_pd_lp(PrivacyNotion::Dp, &uniform, d, ORACLE_TOL)?;
            push(3, (o.value - class1_pd(PrivacyNotion::Dp, d, &simplex)?.upper).abs(), &uniform, d);
        }
        if wanted(4) {
            let o = oracle_pd_lp(PrivacyNotion::MaxLeakage, &uniform, d, ORACLE_TOL)?;
            let closed = class1_pd(PrivacyNotion::MaxLeakage, d, &simplex)?.upper;
            push(4, (o.value - closed).abs(), &uniform, d);
        }
        if wanted(5) && m <= 4 {
            let o = oracle_pd_convex(PrivacyNotion::MutualInfo, &uniform, d, ORACLE_TOL)?;
            let closed = class1_pd(PrivacyNotion::MutualInfo, d, &simplex)?.upper;
            push(5, (o.value - closed).abs(), &uniform, d);
        }
        if wanted(6) && m <= 4 && gi % 3 == 0 && family.common_ordering().is_some() {
            let o = oracle_pd_lp_family(adp, &[p.clone(), mate.clone()], d, ORACLE_TOL)?;
            push(6, (o.value - adp_source_set_class2(&family, d, 0.1)?).abs(), &p, d);
        }
        if wanted(7) && d < 0.9 * tail.get(m - 1) - 1e-9 {
            let q = optimal_adp_mechanism(&p, d, 0.1)?;
            let gap = (eval_loss(adp, &q, None)? - adp_known_prior(&p, d, 0.1)?).abs();
            let over = expected_distortion(&q, &p)? - d;
            push(7, if over > 1e-9 { f64::INFINITY } else { gap }, &p, d);
        }
        if wanted(8) && d < tail.get(m - 1) - 1e-9 {
            let q = optimal_ml_mechanism(&p, d)?;
            let gap = (eval_loss(PrivacyNotion::MaxLeakage, &q, None)? - ml_known_prior(&p, d)?).abs();
            let over = expected_distortion(&q, &p)? - d;
            push(8, if over > 1e-9 { f64::INFINITY } else { gap }, &p, d);
        }
        if wanted(9) {
            let o = oracle_pd_lp(PrivacyNotion::MaxInfo, &p, d, ORACLE_TOL)?;
            let b = global_bounds(PrivacyNotion::MaxInfo, &singleton, p.space(), d)?;
            push(9, bracket_dev(&b, o.value), &p, d);
        }
        if wanted(10) && m <= 4 {
            let o = oracle_pd_convex(PrivacyNotion::MutualInfo, &p, d, ORACLE_TOL)?;
            let b = global_bounds(PrivacyNotion::MutualInfo, &singleton, p.space(), d)?;
            push(10, bracket_dev(&b, o.value), &p, d);
        }
        if m <= 4 && gi < CONVEX_POINTS {
            let convex = [(11, PrivacyNotion::RenyiDp { alpha: 2.0 }), (12, PrivacyNotion::Sibson { alpha: 2.0 })];
            for (spec, notion) in convex {
                if wanted(spec) {
                    let o = oracle_pd_convex(notion, &p, d, 1e-6)?;
                    let b = global_bounds(notion, &singleton, p.space(), d)?;
                    push(spec, bracket_dev(&b, o.value), &p, d);
                }
            }
        }
    }
    Ok(out)
}

/// Cross-checks closed forms against the oracles on random sorted priors.
/// Trials run in parallel; the report only depends on the options.
pub fn verify_closed_forms(opts: &VerifyOptions) -> Result<VerifyReport> {
    if opts.trials < 1 {
        return Err(Error::Parameter("trials must be at least 1".into()));
    }
    let per_trial: Vec<Result<Vec<Observation>>> =
        (0..opts.trials).into_par_iter().map(|t| run_trial(opts.seed, t, &opts.only)).collect();
    let mut entries: Vec<VerifyEntry> = SPECS
        .iter()
        .map(|s| VerifyEntry {
            notion: s.notion.into(),
            theorem: s.theorem.into(),
            kind: s.check,
            max_dev: 0.0,
            tolerance: s.tolerance,
            checks: 0,
            passed: true,
            worst_case: None,
        })
        .collect();
    for obs in per_trial {
        for o in obs? {
            let e = &mut entries[o.spec];
            e.checks += 1;
            if e.worst_case.is_none() || o.dev > e.max_dev {
                e.max_dev = e.max_dev.max(o.dev);
                e.worst_case = Some(WorstCase { prior: o.prior, d: o.d });
            }
        }
    }
    entries.retain(|e| e.checks > 0);
    for e in &mut entries {
        e.passed = e.max_dev <= e.tolerance;
    }
    let passed = entries.iter().all(|e| e.passed);
    Ok(VerifyReport { seed: opts.seed, trials: opts.trials, passed, entries })
}
