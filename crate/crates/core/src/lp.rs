//! Dense two-phase simplex for `max c·x  s.t.  A x <= b,  0 <= x <= u`.
//!
//! Upper bounds are handled implicitly (bounded-variable simplex): a variable
//! sitting at its upper bound is substituted by `u - x'`, so every nonbasic
//! variable is at zero in the tableau. Pricing is Dantzig's largest reduced
//! cost until a run of degenerate pivots is seen, after which the phase
//! switches to Bland's rule, which cannot cycle.

use crate::error::{Error, LpStatus, Result};

const PIVOT_TOL: f64 = 1e-9;
const FEAS_TOL: f64 = 1e-7;
const DEGENERATE_RUN: usize = 50;

#[derive(Debug, Clone, PartialEq)]
pub struct Constraint {
    /// Sparse `(variable, coefficient)` pairs.
    pub coeffs: Vec<(usize, f64)>,
    pub rhs: f64,
}

/// A maximisation problem over nonnegative variables with `<=` rows.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct LpProblem {
    pub objective: Vec<f64>,
    pub constraints: Vec<Constraint>,
    /// `None` means unbounded above.
    pub upper_bounds: Vec<Option<f64>>,
}

impl LpProblem {
    pub fn new(objective: Vec<f64>) -> Self {
        let n = objective.len();
        LpProblem {
            objective,
            constraints: Vec::new(),
            upper_bounds: vec![None; n],
        }
    }

    pub fn num_vars(&self) -> usize {
        self.objective.len()
    }

    pub fn add_constraint(&mut self, coeffs: Vec<(usize, f64)>, rhs: f64) {
        self.constraints.push(Constraint { coeffs, rhs });
    }

    pub fn set_upper_bound(&mut self, var: usize, ub: f64) {
        self.upper_bounds[var] = Some(ub);
    }

    fn validate(&self) -> Result<()> {
        let n = self.num_vars();
        let bad = |m: String| Err(Error::InvalidConfig(format!("lp: {m}")));
        if self.upper_bounds.len() != n {
            return bad("upper bound count differs from variable count".into());
        }
        if self.objective.iter().any(|c| !c.is_finite()) {
            return bad("non-finite objective coefficient".into());
        }
        for (i, row) in self.constraints.iter().enumerate() {
            if !row.rhs.is_finite() {
                return bad(format!("row {i}: non-finite rhs"));
            }
            for &(j, a) in &row.coeffs {
                if j >= n || !a.is_finite() {
                    return bad(format!("row {i}: bad coefficient for variable {j}"));
                }
            }
        }
        for (j, u) in self.upper_bounds.iter().enumerate() {
            if let Some(u) = u {
                if !(u.is_finite() && *u >= 0.0) {
                    return bad(format!(
                        "variable {j}: upper bound {u} must be finite and >= 0"
                    ));
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpSolution {
    pub objective: f64,
    pub x: Vec<f64>,
    pub iterations: usize,
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Pricing {
    Dantzig,
    Bland,
}

struct Tableau {
    m: usize,
    ncols: usize,
    /// Row-major `m x ncols`.
    t: Vec<f64>,
    rhs: Vec<f64>,
    basis: Vec<usize>,
    is_basic: Vec<bool>,
    ub: Vec<f64>,
    flipped: Vec<bool>,
    /// Reduced costs for the current phase.
    d: Vec<f64>,
    /// Columns that may never enter.
    blocked: Vec<bool>,
    iterations: usize,
}

impl Tableau {
    #[inline]
    fn at(&self, r: usize, c: usize) -> f64 {
        self.t[r * self.ncols + c]
    }

    /// Sets the reduced-cost row from a cost vector over original variables.
    fn price(&mut self, cost: &[f64]) {
        let signed = |j: usize| if self.flipped[j] { -cost[j] } else { cost[j] };
        self.d = (0..self.ncols).map(signed).collect();
        for r in 0..self.m {
            let cb = signed(self.basis[r]);
            if cb == 0.0 {
                continue;
            }
            let row = &self.t[r * self.ncols..(r + 1) * self.ncols];
            for (dj, &a) in self.d.iter_mut().zip(row) {
                *dj -= cb * a;
            }
        }
        for r in 0..self.m {
            self.d[self.basis[r]] = 0.0;
        }
    }

    fn pivot(&mut self, r: usize, j: usize) {
        let nc = self.ncols;
        let p = self.at(r, j);
        {
            let row = &mut self.t[r * nc..(r + 1) * nc];
            for a in row.iter_mut() {
                *a /= p;
            }
            row[j] = 1.0;
        }
        self.rhs[r] /= p;
        let (pivot_row, pivot_rhs) = (self.t[r * nc..(r + 1) * nc].to_vec(), self.rhs[r]);
        for i in 0..self.m {
            if i == r {
                continue;
            }
            let f = self.t[i * nc + j];
            if f == 0.0 {
                continue;
            }
            let row = &mut self.t[i * nc..(i + 1) * nc];
            for (a, &pr) in row.iter_mut().zip(&pivot_row) {
                *a -= f * pr;
            }
            row[j] = 0.0;
            self.rhs[i] -= f * pivot_rhs;
        }
        let f = self.d[j];
        if f != 0.0 {
            for (dk, &pr) in self.d.iter_mut().zip(&pivot_row) {
                *dk -= f * pr;
            }
            self.d[j] = 0.0;
        }
        let leaving = self.basis[r];
        self.is_basic[leaving] = false;
        self.is_basic[j] = true;
        self.basis[r] = j;
    }

    /// Substitutes nonbasic `x_j = u_j - x'_j`.
    fn flip_nonbasic(&mut self, j: usize) {
        let u = self.ub[j];
        for r in 0..self.m {
            let a = &mut self.t[r * self.ncols + j];
            if *a != 0.0 {
                self.rhs[r] -= *a * u;
                *a = -*a;
            }
        }
        self.d[j] = -self.d[j];
        self.flipped[j] = !self.flipped[j];
    }

    /// Substitutes the basic variable of row `r` by its complement.
    fn flip_basic(&mut self, r: usize) {
        let k = self.basis[r];
        let nc = self.ncols;
        for (c, a) in self.t[r * nc..(r + 1) * nc].iter_mut().enumerate() {
            if c != k {
                *a = -*a;
            }
        }
        self.rhs[r] = self.ub[k] - self.rhs[r];
        self.flipped[k] = !self.flipped[k];
    }

    fn entering(&self, pricing: Pricing, tol: f64) -> Option<usize> {
        let candidates =
            (0..self.ncols).filter(|&j| !self.is_basic[j] && !self.blocked[j] && self.d[j] > tol);
        match pricing {
            Pricing::Bland => candidates.into_iter().next(),
            Pricing::Dantzig => {
                candidates.max_by(|&a, &b| self.d[a].total_cmp(&self.d[b]).then_with(|| b.cmp(&a)))
            }
        }
    }

    fn run(&mut self, tol: f64) -> std::result::Result<(), LpStatus> {
        let mut pricing = Pricing::Dantzig;
        let mut degenerate = 0usize;
        while let Some(j) = self.entering(pricing, tol) {
            self.iterations += 1;
            // Ratio test. `None` row means the entering variable hits its own bound.
            let mut best: Option<(f64, Option<(usize, bool)>)> =
                self.ub[j].is_finite().then_some((self.ub[j], None));
            for r in 0..self.m {
                let a = self.at(r, j);
                let b = self.rhs[r].max(0.0);
                let (theta, at_upper) = if a > PIVOT_TOL {
                    (b / a, false)
                } else if a < -PIVOT_TOL && self.ub[self.basis[r]].is_finite() {
                    (((self.ub[self.basis[r]] - b) / -a).max(0.0), true)
                } else {
                    continue;
                };
                let better = match best {
                    None => true,
                    Some((bt, prev)) => {
                        theta < bt - 1e-12
                            || (theta <= bt + 1e-12
                                && matches!(prev, Some((pr, _)) if self.basis[r] < self.basis[pr]))
                    }
                };
                if better {
                    best = Some((theta, Some((r, at_upper))));
                }
            }
            let Some((theta, leave)) = best else {
                return Err(LpStatus::Unbounded);
            };
            match leave {
                None => self.flip_nonbasic(j),
                Some((r, at_upper)) => {
                    if at_upper {
                        self.flip_basic(r);
                    }
                    self.pivot(r, j);
                }
            }
            if theta <= 1e-12 {
                degenerate += 1;
                if degenerate >= DEGENERATE_RUN {
                    pricing = Pricing::Bland;
                }
            } else {
                degenerate = 0;
            }
        }
        Ok(())
    }

    fn value(&self, j: usize) -> f64 {
        let raw = if self.is_basic[j] {
            let r = self
                .basis
                .iter()
                .position(|&b| b == j)
                .expect("basic column");
            self.rhs[r]
        } else {
            0.0
        };
        if self.flipped[j] {
            self.ub[j] - raw
        } else {
            raw
        }
    }
}

/// Solves `problem`, returning an optimal vertex.
pub fn solve_lp(problem: &LpProblem) -> Result<LpSolution> {
    problem.validate()?;
    let n = problem.num_vars();
    let m = problem.constraints.len();
    if n == 0 {
        if problem.constraints.iter().any(|c| c.rhs < -FEAS_TOL) {
            return Err(Error::Lp(LpStatus::Infeasible));
        }
        return Ok(LpSolution {
            objective: 0.0,
            x: Vec::new(),
            iterations: 0,
        });
    }

    let needs_art: Vec<usize> = (0..m)
        .filter(|&i| problem.constraints[i].rhs < 0.0)
        .collect();
    let n_art = needs_art.len();
    let ncols = n + m + n_art;
    let mut tab = Tableau {
        m,
        ncols,
        t: vec![0.0; m * ncols],
        rhs: vec![0.0; m],
        basis: vec![0; m],
        is_basic: vec![false; ncols],
        ub: vec![f64::INFINITY; ncols],
        flipped: vec![false; ncols],
        d: vec![0.0; ncols],
        blocked: vec![false; ncols],
        iterations: 0,
    };
    for (j, u) in problem.upper_bounds.iter().enumerate() {
        if let Some(u) = u {
            tab.ub[j] = *u;
        }
    }
    let mut art = 0;
    for (i, row) in problem.constraints.iter().enumerate() {
        let sign = if row.rhs < 0.0 { -1.0 } else { 1.0 };
        for &(j, a) in &row.coeffs {
            tab.t[i * ncols + j] += sign * a;
        }
        tab.t[i * ncols + n + i] = sign;
        tab.rhs[i] = sign * row.rhs;
        if row.rhs < 0.0 {
            let col = n + m + art;
            tab.t[i * ncols + col] = 1.0;
            tab.basis[i] = col;
            art += 1;
        } else {
            tab.basis[i] = n + i;
        }
        tab.is_basic[tab.basis[i]] = true;
    }

    if n_art > 0 {
        let mut cost = vec![0.0; ncols];
        for c in cost.iter_mut().skip(n + m) {
            *c = -1.0;
        }
        tab.price(&cost);
        tab.run(PIVOT_TOL).map_err(Error::Lp)?;
        let infeasibility: f64 = (n + m..ncols).map(|j| tab.value(j)).sum();
        if infeasibility > FEAS_TOL * (1.0 + m as f64) {
            return Err(Error::Lp(LpStatus::Infeasible));
        }
        // Drive remaining artificials out of the basis where possible, then fix them at 0.
        for r in 0..m {
            if tab.basis[r] < n + m {
                continue;
            }
            if let Some(j) =
                (0..n + m).find(|&j| !tab.is_basic[j] && tab.at(r, j).abs() > PIVOT_TOL)
            {
                tab.pivot(r, j);
            }
        }
        for j in n + m..ncols {
            tab.ub[j] = 0.0;
            tab.blocked[j] = true;
        }
    }

    let mut cost = vec![0.0; ncols];
    cost[..n].copy_from_slice(&problem.objective);
    let scale = problem
        .objective
        .iter()
        .fold(1.0f64, |acc, c| acc.max(c.abs()));
    tab.price(&cost);
    tab.run(PIVOT_TOL * scale).map_err(Error::Lp)?;

    let x: Vec<f64> = (0..n)
        .map(|j| {
            let v = tab.value(j).max(0.0);
            if tab.ub[j].is_finite() {
                v.min(tab.ub[j])
            } else {
                v
            }
        })
        .collect();
    let objective = x.iter().zip(&problem.objective).map(|(a, c)| a * c).sum();
    Ok(LpSolution {
        objective,
        x,
        iterations: tab.iterations,
    })
}
