//! Dense two-phase simplex with Bland's rule.
//!
//! Every variable is implicitly bounded below by zero. Sizes in this crate stay
//! in the low hundreds of columns, so a full tableau is the simplest thing that
//! is deterministic and cycle-free.

use crate::error::{Error, Result};

const PIVOT_EPS: f64 = 1e-9;
const HARRIS_TOL: f64 = 1e-11;
const REFACTOR_EVERY: usize = 64;
const COST_EPS: f64 = 1e-11;
const FEAS_EPS: f64 = 1e-9;
const MAX_PIVOTS: usize = 200_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Relation {
    Le,
    Ge,
    Eq,
}

#[derive(Debug, Clone)]
struct Row {
    coeffs: Vec<f64>,
    rel: Relation,
    rhs: f64,
}

/// `minimize c·x` subject to linear rows and `x ≥ 0`.
#[derive(Debug, Clone)]
pub struct LinearProgram {
    num_vars: usize,
    objective: Vec<f64>,
    rows: Vec<Row>,
}

#[derive(Debug, Clone)]
pub struct Solution {
    pub x: Vec<f64>,
    pub value: f64,
}

impl LinearProgram {
    pub fn minimize(objective: Vec<f64>) -> Self {
        LinearProgram { num_vars: objective.len(), objective, rows: Vec::new() }
    }

    /// A program with a zero objective; solving it only runs phase one.
    pub fn feasibility(num_vars: usize) -> Self {
        Self::minimize(vec![0.0; num_vars])
    }

    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    pub fn constrain(&mut self, coeffs: Vec<f64>, rel: Relation, rhs: f64) {
        assert_eq!(coeffs.len(), self.num_vars, "constraint width");
        self.rows.push(Row { coeffs, rel, rhs });
    }

    /// Sparse helper: `Σ coeff·x[idx] rel rhs`.
    pub fn constrain_sparse(&mut self, terms: &[(usize, f64)], rel: Relation, rhs: f64) {
        let mut coeffs = vec![0.0; self.num_vars];
        for &(i, c) in terms {
            coeffs[i] += c;
        }
        self.constrain(coeffs, rel, rhs);
    }

    pub fn solve(&self) -> Result<Solution> {
        Tableau::build(self).run(&self.objective)
    }
}

struct Tableau {
    /// The normalized constraint rows as built, kept for refactorization.
    original: Vec<Vec<f64>>,
    rows: Vec<Vec<f64>>,
    basis: Vec<usize>,
    num_vars: usize,
    first_artificial: usize,
    width: usize,
}

impl Tableau {
    fn build(lp: &LinearProgram) -> Self {
        let n = lp.num_vars;
        let normalized: Vec<Row> = lp
            .rows
            .iter()
            .map(|r| {
                if r.rhs < 0.0 {
                    let rel = match r.rel {
                        Relation::Le => Relation::Ge,
                        Relation::Ge => Relation::Le,
                        Relation::Eq => Relation::Eq,
                    };
                    Row { coeffs: r.coeffs.iter().map(|c| -c).collect(), rel, rhs: -r.rhs }
                } else {
                    r.clone()
                }
            })
            .collect();
        let slacks = normalized.iter().filter(|r| r.rel != Relation::Eq).count();
        let artificials = normalized.iter().filter(|r| r.rel != Relation::Le).count();
        let first_artificial = n + slacks;
        let width = first_artificial + artificials;

        let mut rows = Vec::with_capacity(normalized.len());
        let mut basis = Vec::with_capacity(normalized.len());
        let (mut s, mut a) = (n, first_artificial);
        for r in &normalized {
            let mut t = vec![0.0; width + 1];
            t[..n].copy_from_slice(&r.coeffs);
            t[width] = r.rhs;
            match r.rel {
                Relation::Le => {
                    t[s] = 1.0;
                    basis.push(s);
                    s += 1;
                }
                Relation::Ge => {
                    t[s] = -1.0;
                    s += 1;
                    t[a] = 1.0;
                    basis.push(a);
                    a += 1;
                }
                Relation::Eq => {
                    t[a] = 1.0;
                    basis.push(a);
                    a += 1;
                }
            }
            rows.push(t);
        }
        Tableau { original: rows.clone(), rows, basis, num_vars: n, first_artificial, width }
    }

    fn reduced_costs(&self, cost: &[f64]) -> Vec<f64> {
        let mut z = vec![0.0; self.width + 1];
        z[..cost.len()].copy_from_slice(cost);
        for (row, &b) in self.rows.iter().zip(&self.basis) {
            let cb = if b < cost.len() { cost[b] } else { 0.0 };
            if cb != 0.0 {
                for (zj, rj) in z.iter_mut().zip(row) {
                    *zj -= cb * rj;
                }
            }
        }
        z
    }

    fn pivot(&mut self, z: &mut [f64], r: usize, c: usize) {
        let p = self.rows[r][c];
        for v in self.rows[r].iter_mut() {
            *v /= p;
        }
        let pivot_row = self.rows[r].clone();
        for (i, row) in self.rows.iter_mut().enumerate() {
            if i != r {
                let f = row[c];
                if f != 0.0 {
                    for (v, pv) in row.iter_mut().zip(&pivot_row) {
                        *v -= f * pv;
                    }
                    row[c] = 0.0;
                }
            }
        }
        let f = z[c];
        if f != 0.0 {
            for (v, pv) in z.iter_mut().zip(&pivot_row) {
                *v -= f * pv;
            }
            z[c] = 0.0;
        }
        self.basis[r] = c;
    }

    /// Recomputes `B⁻¹[A|b]` from the original rows to shed accumulated
    /// round-off. Leaves the tableau untouched if the basis looks singular.
    fn refactor(&mut self) {
        let r = self.rows.len();
        let mut b: Vec<Vec<f64>> = (0..r)
            .map(|i| {
                let mut row: Vec<f64> = self.basis.iter().map(|&c| self.original[i][c]).collect();
                row.extend((0..r).map(|j| if i == j { 1.0 } else { 0.0 }));
                row
            })
            .collect();
        for col in 0..r {
            let piv = (col..r).max_by(|&a, &c| b[a][col].abs().total_cmp(&b[c][col].abs()));
            let Some(piv) = piv.filter(|&p| b[p][col].abs() > 1e-12) else {
                return;
            };
            b.swap(col, piv);
            let p = b[col][col];
            b[col].iter_mut().for_each(|v| *v /= p);
            let pivot_row = b[col].clone();
            for (i, row) in b.iter_mut().enumerate() {
                if i != col && row[col] != 0.0 {
                    let f = row[col];
                    row.iter_mut().zip(&pivot_row).for_each(|(v, pv)| *v -= f * pv);
                }
            }
        }
        let width = self.width + 1;
        for (i, factor) in b.iter().enumerate() {
            let inv = &factor[r..];
            let mut out = vec![0.0; width];
            for (k, &w) in inv.iter().enumerate() {
                if w != 0.0 {
                    out.iter_mut().zip(&self.original[k]).for_each(|(o, a)| *o += w * a);
                }
            }
            let basic = self.basis[i];
            out.iter_mut().enumerate().for_each(|(j, v)| {
                if j != basic && v.abs() < 1e-14 {
                    *v = 0.0;
                }
            });
            out[basic] = 1.0;
            self.rows[i] = out;
        }
    }

    /// Bland iterations over columns `< limit`.
    fn optimize(&mut self, z: &mut Vec<f64>, cost: &[f64], limit: usize) -> Result<()> {
        for it in 0..MAX_PIVOTS {
            if it > 0 && it % REFACTOR_EVERY == 0 {
                self.refactor();
                *z = self.reduced_costs(cost);
            }
            let Some(c) = (0..limit).find(|&j| z[j] < -COST_EPS) else {
                self.refactor();
                *z = self.reduced_costs(cost);
                if (0..limit).any(|j| z[j] < -COST_EPS) {
                    continue;
                }
                return Ok(());
            };
            let rhs = |row: &Vec<f64>| row[self.width].max(0.0);
            let bound = self
                .rows
                .iter()
                .filter(|row| row[c] > PIVOT_EPS)
                .map(|row| (rhs(row) + HARRIS_TOL) / row[c])
                .fold(f64::INFINITY, f64::min);
            let mut best: Option<(usize, f64)> = None;
            for (i, row) in self.rows.iter().enumerate() {
                let a = row[c];
                if a > PIVOT_EPS && rhs(row) / a <= bound {
                    let better = match best {
                        None => true,
                        Some((bi, ba)) => a > ba || (a == ba && self.basis[i] < self.basis[bi]),
                    };
                    if better {
                        best = Some((i, a));
                    }
                }
            }
            let Some((r, _)) = best else {
                return Err(Error::Unbounded);
            };
            self.pivot(z, r, c);
        }
        Err(Error::IterationLimit)
    }

    fn run(mut self, objective: &[f64]) -> Result<Solution> {
        if self.first_artificial < self.width {
            let mut cost = vec![0.0; self.width];
            for c in cost.iter_mut().skip(self.first_artificial) {
                *c = 1.0;
            }
            let mut z = self.reduced_costs(&cost);
            self.optimize(&mut z, &cost, self.width)?;
            if -z[self.width] > FEAS_EPS {
                return Err(Error::Infeasible);
            }
            self.expel_artificials();
        }
        let mut z = self.reduced_costs(objective);
        if objective.iter().any(|&c| c != 0.0) {
            self.optimize(&mut z, objective, self.first_artificial)?;
        }
        let mut x = vec![0.0; self.num_vars];
        for (row, &b) in self.rows.iter().zip(&self.basis) {
            if b < self.num_vars {
                x[b] = row[self.width].max(0.0);
            }
        }
        let value = objective.iter().zip(&x).map(|(c, v)| c * v).sum();
        Ok(Solution { x, value })
    }

    fn expel_artificials(&mut self) {
        let mut dummy = vec![0.0; self.width + 1];
        let mut r = 0;
        while r < self.rows.len() {
            if self.basis[r] >= self.first_artificial {
                let row = &self.rows[r];
                let col = (0..self.first_artificial)
                    .filter(|&j| row[j].abs() > 1e-7)
                    .max_by(|&a, &b| row[a].abs().total_cmp(&row[b].abs()));
                match col {
                    Some(c) => {
                        self.pivot(&mut dummy, r, c);
                        r += 1;
                    }
                    None => {
                        self.rows.remove(r);
                        self.original.remove(r);
                        self.basis.remove(r);
                    }
                }
            } else {
                r += 1;
            }
        }
    }
}
