//! Named mechanisms and the optimal single-coordinate constructions.

use crate::error::{Error, Result};
use crate::local::{sweep_alpha1, CumulativeTail, BREAKPOINT_TOL};
use crate::lp::{LinearProgram, Relation};
use crate::model::{Mechanism, Prior, ProductSpace};

/// Every entry `1/m^n`.
pub fn uniform_mechanism(space: ProductSpace) -> Mechanism {
    let size = space.size();
    Mechanism::from_flat(space, size, vec![1.0 / size as f64; size * size]).expect("uniform rows")
}

pub fn identity_mechanism(space: ProductSpace) -> Mechanism {
    let size = space.size();
    let mut data = vec![0.0; size * size];
    for x in 0..size {
        data[x * size + x] = 1.0;
    }
    Mechanism::from_flat(space, size, data).expect("identity rows")
}

/// The distance-exponential mechanism with distortion `D`:
/// `Q(y|x) = (1-D/n)^{n-d} (D/(n(m-1)))^d`, i.e. randomized response with
/// keep-probability `1-D/n` applied to every coordinate.
///
/// Beyond `D = n(m-1)/m` the uniform mechanism is better; construction is
/// still allowed up to `D = n`.
pub fn wang_mechanism(space: ProductSpace, d: f64) -> Result<Mechanism> {
    let (m, n) = (space.m(), space.n());
    if !(d > 0.0 && d <= n as f64) {
        return Err(Error::DistortionRange { d, range: format!("(0, {n}]") });
    }
    let keep = 1.0 - d / n as f64;
    let flip = d / n as f64 / (m - 1) as f64;
    let by_distance: Vec<f64> = (0..=n).map(|l| keep.powi((n - l) as i32) * flip.powi(l as i32)).collect();
    let size = space.size();
    let mut data = Vec::with_capacity(size * size);
    for x in 0..size {
        for y in 0..size {
            data.push(by_distance[space.distance(x, y)]);
        }
    }
    Mechanism::from_flat(space, size, data)
}

/// Row 1 is `e_1`; row `i > 1` keeps `δ` on the diagonal and moves `1-δ` to
/// the first symbol.
pub fn q_delta_mechanism(m: usize, delta: f64) -> Result<Mechanism> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::Parameter(format!("delta={delta} must lie in (0,1)")));
    }
    let space = ProductSpace::new(m, 1)?;
    let rows = (0..m)
        .map(|i| {
            let mut r = vec![0.0; m];
            if i == 0 {
                r[0] = 1.0;
            } else {
                r[0] = 1.0 - delta;
                r[i] = delta;
            }
            r
        })
        .collect();
    Mechanism::new(space, rows)
}

/// Row-stochastic matrix with diagonal `α` whose off-diagonal mass in row `i`
/// is spread proportionally to `α_j - shift`.
fn assemble(alpha: &[f64], shift: f64) -> Result<Mechanism> {
    let m = alpha.len();
    let mut rows = vec![vec![0.0; m]; m];
    for i in 0..m {
        let rest = 1.0 - alpha[i];
        let weight: f64 = (0..m).filter(|&j| j != i).map(|j| alpha[j] - shift).sum();
        for j in 0..m {
            rows[i][j] = if i == j {
                alpha[i]
            } else if rest <= 0.0 {
                0.0
            } else if weight > 0.0 {
                (alpha[j] - shift) * rest / weight
            } else {
                return Err(Error::Infeasible);
            };
        }
    }
    Mechanism::new(ProductSpace::new(m, 1)?, rows)
}

/// Diagonals `α_2..α_m` minimizing `Σ α_j` at fixed `α_1`, or `None` if the
/// program is infeasible there.
fn adp_diagonal(p: &[f64], d: f64, delta: f64, a1: f64) -> Option<(Vec<f64>, f64)> {
    let m = p.len();
    // variables β_j = α_j − δ for j = 2..m
    let k = m - 1;
    let mut lp = LinearProgram::minimize(vec![1.0; k]);
    let shifted = 1.0 - d - p[0] * a1 - delta * p[1..].iter().sum::<f64>();
    lp.constrain(p[1..].to_vec(), Relation::Ge, shifted);
    lp.constrain(vec![1.0; k], Relation::Ge, 1.0 - a1);
    lp.constrain_sparse(&[(0, 1.0)], Relation::Le, a1 - delta);
    for j in 1..k {
        lp.constrain_sparse(&[(j, 1.0), (j - 1, -1.0)], Relation::Le, 0.0);
    }
    let sol = lp.solve().ok()?;
    let mut alpha = vec![a1];
    alpha.extend(sol.x.iter().map(|b| b + delta));
    Some((alpha, sol.value))
}

/// Mechanism attaining the known-prior approximate-DP closed form.
pub fn optimal_adp_mechanism(p: &Prior, d: f64, delta: f64) -> Result<Mechanism> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::Parameter(format!("delta={delta} must lie in (0,1)")));
    }
    let tail = CumulativeTail::new(p)?;
    let m = tail.m();
    let hi = (1.0 - delta) * tail.get(m - 1) - BREAKPOINT_TOL;
    if !(d > 0.0 && d < hi) {
        return Err(Error::DistortionRange { d, range: format!("(0, {hi})") });
    }
    let probs = p.probs();
    let objective = |a1: f64| match adp_diagonal(probs, d, delta, a1) {
        Some((_, excess)) if excess > 0.0 => (excess / (1.0 - a1)).ln(),
        _ => f64::INFINITY,
    };
    let (a1, _) = sweep_alpha1(d, objective);
    let (alpha, _) = adp_diagonal(probs, d, delta, a1).ok_or(Error::Infeasible)?;
    assemble(&alpha, delta)
}

/// Mechanism attaining the known-prior maximal-leakage closed form: column
/// maxima sit on the diagonal.
pub fn optimal_ml_mechanism(p: &Prior, d: f64) -> Result<Mechanism> {
    let tail = CumulativeTail::new(p)?;
    let m = tail.m();
    let hi = tail.get(m - 1) - BREAKPOINT_TOL;
    if !(d > 0.0 && d < hi) {
        return Err(Error::DistortionRange { d, range: format!("(0, {hi})") });
    }
    let mut lp = LinearProgram::minimize(vec![1.0; m]);
    lp.constrain(p.probs().to_vec(), Relation::Ge, 1.0 - d);
    lp.constrain(vec![1.0; m], Relation::Ge, 1.0);
    lp.constrain_sparse(&[(0, 1.0)], Relation::Le, 1.0);
    for j in 1..m {
        lp.constrain_sparse(&[(j, 1.0), (j - 1, -1.0)], Relation::Le, 0.0);
    }
    let sol = lp.solve()?;
    assemble(&sol.x, 0.0)
}
