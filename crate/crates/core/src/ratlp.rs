//! Exact rational linear programming.
//!
//! The kernel is a two-phase bounded-variable revised simplex with Bland's
//! pivot rule, run on an explicit dense basis inverse. Programs with more
//! rows than free columns are solved through their dual, which keeps the
//! basis small for the tall systems that dominate this crate (one row per
//! region, a handful of outcome variables).
//!
//! Every status comes with something checkable: an optimal basic solution
//! with shadow prices, a Farkas multiplier vector, or an improving ray.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::rat::Rat;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Direction {
    Maximize,
    Minimize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum RowSense {
    Le,
    Ge,
    Eq,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Row {
    pub coeffs: Vec<(usize, Rat)>,
    pub sense: RowSense,
    pub rhs: Rat,
}

/// `optimize objectiveᵀx` subject to the rows and `lower ≤ x ≤ upper`.
///
/// Variables default to `x ≥ 0`; use [`LinearProgram::set_free`] or
/// [`LinearProgram::set_bounds`] to change that.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearProgram {
    pub direction: Direction,
    pub objective: Vec<Rat>,
    pub rows: Vec<Row>,
    pub lower: Vec<Option<Rat>>,
    pub upper: Vec<Option<Rat>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

/// Outcome of [`solve_lp`].
///
/// * `Optimal`: `x` is a basic optimal solution, `value = objectiveᵀx`, and
///   `duals[i]` is the shadow price of row `i` (rate of change of the optimal
///   value as `rhs[i]` grows).
/// * `Infeasible`: `certificate` holds row multipliers `λ` with `λ ≥ 0` on
///   `≤` rows, `λ ≤ 0` on `≥` rows, such that `min over the bounds of
///   (Aᵀλ)ᵀx > λᵀb`. With free variables this is `λᵀA = 0, λᵀb < 0`.
/// * `Unbounded`: `certificate` is a recession direction that strictly
///   improves the objective.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LpResult {
    pub status: LpStatus,
    pub x: Vec<Rat>,
    pub value: Rat,
    pub duals: Vec<Rat>,
    pub certificate: Vec<Rat>,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LpError {
    #[error("objective has {got} coefficients but the program has {expected} variables")]
    ObjectiveLength { expected: usize, got: usize },
    #[error("bound vectors have lengths {lower}/{upper} but the program has {expected} variables")]
    BoundsLength {
        expected: usize,
        lower: usize,
        upper: usize,
    },
    #[error("row {row} references variable {col} but the program has {n} variables")]
    ColumnOutOfRange { row: usize, col: usize, n: usize },
    #[error("column {col} references row {row} but the program has {m} rows")]
    RowOutOfRange { col: usize, row: usize, m: usize },
    #[error("right-hand side has {got} entries but the program has {expected} rows")]
    RhsLength { expected: usize, got: usize },
    #[error("variable {0} has its lower bound above its upper bound")]
    InvertedBounds(usize),
    #[error("binary variable {0} is not a column of the program")]
    BadBinary(usize),
}

/// Which formulation the simplex runs on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Route {
    /// Pick the formulation with the smaller basis.
    Auto,
    Primal,
    Dual,
}

impl LinearProgram {
    pub fn new(n_vars: usize, direction: Direction) -> LinearProgram {
        LinearProgram {
            direction,
            objective: vec![Rat::zero(); n_vars],
            rows: Vec::new(),
            lower: vec![Some(Rat::zero()); n_vars],
            upper: vec![None; n_vars],
        }
    }

    pub fn num_vars(&self) -> usize {
        self.objective.len()
    }

    pub fn num_rows(&self) -> usize {
        self.rows.len()
    }

    /// Adds a sparse row; zero coefficients are dropped.
    pub fn add_row(&mut self, coeffs: Vec<(usize, Rat)>, sense: RowSense, rhs: Rat) {
        let coeffs = coeffs.into_iter().filter(|(_, a)| !a.is_zero()).collect();
        self.rows.push(Row { coeffs, sense, rhs });
    }

    pub fn add_dense_row(&mut self, coeffs: &[Rat], sense: RowSense, rhs: Rat) {
        let sparse = coeffs
            .iter()
            .enumerate()
            .filter(|(_, a)| !a.is_zero())
            .map(|(j, a)| (j, a.clone()))
            .collect();
        self.rows.push(Row {
            coeffs: sparse,
            sense,
            rhs,
        });
    }

    pub fn set_bounds(&mut self, j: usize, lower: Option<Rat>, upper: Option<Rat>) {
        self.lower[j] = lower;
        self.upper[j] = upper;
    }

    pub fn set_free(&mut self, j: usize) {
        self.set_bounds(j, None, None);
    }

    pub fn validate(&self) -> Result<(), LpError> {
        let n = self.num_vars();
        if self.lower.len() != n || self.upper.len() != n {
            return Err(LpError::BoundsLength {
                expected: n,
                lower: self.lower.len(),
                upper: self.upper.len(),
            });
        }
        for (i, row) in self.rows.iter().enumerate() {
            if let Some((col, _)) = row.coeffs.iter().find(|(j, _)| *j >= n) {
                return Err(LpError::ColumnOutOfRange { row: i, col: *col, n });
            }
        }
        for j in 0..n {
            if let (Some(l), Some(u)) = (&self.lower[j], &self.upper[j]) {
                if l > u {
                    return Err(LpError::InvertedBounds(j));
                }
            }
        }
        Ok(())
    }

    pub fn objective_value(&self, x: &[Rat]) -> Rat {
        crate::rat::dot(&self.objective, x)
    }

    pub fn row_activity(&self, i: usize, x: &[Rat]) -> Rat {
        self.rows[i].coeffs.iter().map(|(j, a)| a * &x[*j]).sum()
    }

    /// Exact membership test for the feasible region.
    pub fn is_feasible_point(&self, x: &[Rat]) -> bool {
        if x.len() != self.num_vars() {
            return false;
        }
        let rows_ok = (0..self.rows.len()).all(|i| {
            let lhs = self.row_activity(i, x);
            let rhs = &self.rows[i].rhs;
            match self.rows[i].sense {
                RowSense::Le => &lhs <= rhs,
                RowSense::Ge => &lhs >= rhs,
                RowSense::Eq => &lhs == rhs,
            }
        });
        rows_ok
            && (0..x.len()).all(|j| {
                self.lower[j].as_ref().is_none_or(|l| &x[j] >= l)
                    && self.upper[j].as_ref().is_none_or(|u| &x[j] <= u)
            })
    }
}

/// Solves `lp` exactly, choosing the primal or dual formulation automatically.
pub fn solve_lp(lp: &LinearProgram) -> Result<LpResult, LpError> {
    solve_lp_routed(lp, Route::Auto)
}

pub fn solve_lp_routed(lp: &LinearProgram, route: Route) -> Result<LpResult, LpError> {
    if lp.objective.len() != lp.lower.len() {
        return Err(LpError::ObjectiveLength {
            expected: lp.lower.len(),
            got: lp.objective.len(),
        });
    }
    lp.validate()?;
    let use_dual = match route {
        Route::Primal => false,
        Route::Dual => true,
        Route::Auto => {
            let movable = (0..lp.num_vars()).filter(|&j| !is_fixed(lp, j)).count();
            lp.num_rows() > movable
        }
    };
    Ok(if use_dual {
        solve_via_dual(lp)
    } else {
        solve_primal(lp)
    })
}

fn is_fixed(lp: &LinearProgram, j: usize) -> bool {
    matches!((&lp.lower[j], &lp.upper[j]), (Some(l), Some(u)) if l == u)
}

/// Checks a Farkas certificate in the convention documented on [`LpResult`].
pub fn verify_infeasibility(lp: &LinearProgram, lambda: &[Rat]) -> bool {
    if lambda.len() != lp.num_rows() {
        return false;
    }
    for (row, l) in lp.rows.iter().zip(lambda) {
        let ok = match row.sense {
            RowSense::Le => !l.is_negative(),
            RowSense::Ge => !l.is_positive(),
            RowSense::Eq => true,
        };
        if !ok {
            return false;
        }
    }
    let mut g = vec![Rat::zero(); lp.num_vars()];
    let mut lb = Rat::zero();
    for (row, l) in lp.rows.iter().zip(lambda) {
        if l.is_zero() {
            continue;
        }
        for (j, a) in &row.coeffs {
            g[*j] += a * l;
        }
        lb += &row.rhs * l;
    }
    let mut min = Rat::zero();
    for (j, gj) in g.iter().enumerate() {
        if gj.is_zero() {
            continue;
        }
        let bound = if gj.is_positive() {
            &lp.lower[j]
        } else {
            &lp.upper[j]
        };
        match bound {
            Some(b) => min += gj * b,
            None => return false,
        }
    }
    min > lb
}

/// Checks that `ray` is a recession direction improving the objective.
pub fn verify_unbounded_ray(lp: &LinearProgram, ray: &[Rat]) -> bool {
    if ray.len() != lp.num_vars() {
        return false;
    }
    for row in &lp.rows {
        let lhs: Rat = row.coeffs.iter().map(|(j, a)| a * &ray[*j]).sum();
        let ok = match row.sense {
            RowSense::Le => !lhs.is_positive(),
            RowSense::Ge => !lhs.is_negative(),
            RowSense::Eq => lhs.is_zero(),
        };
        if !ok {
            return false;
        }
    }
    for (j, r) in ray.iter().enumerate() {
        if r.is_negative() && lp.lower[j].is_some() {
            return false;
        }
        if r.is_positive() && lp.upper[j].is_some() {
            return false;
        }
    }
    let gain = lp.objective_value(ray);
    match lp.direction {
        Direction::Maximize => gain.is_positive(),
        Direction::Minimize => gain.is_negative(),
    }
}

// ---------------------------------------------------------------------------
// Bounded revised simplex on `min cᵀx, Ax = b, lo ≤ x ≤ hi`.

struct Core {
    m: usize,
    cols: Vec<Vec<(usize, Rat)>>,
    b: Vec<Rat>,
    lo: Vec<Option<Rat>>,
    hi: Vec<Option<Rat>>,
    cost: Vec<Rat>,
}

enum CoreOutcome {
    Optimal { x: Vec<Rat>, pi: Vec<Rat> },
    Infeasible { pi: Vec<Rat> },
    Unbounded { ray: Vec<Rat> },
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Place {
    Basic,
    Lower,
    Upper,
    Zero,
}

struct Simplex {
    core: Core,
    n: usize,
    sigma: Vec<Rat>,
    lo: Vec<Option<Rat>>,
    hi: Vec<Option<Rat>>,
    x: Vec<Rat>,
    place: Vec<Place>,
    basis: Vec<usize>,
    binv: Vec<Vec<Rat>>,
    /// Structural columns as machine integers, when they all are.
    int_cols: Option<Vec<Vec<(usize, i64)>>>,
}

/// Simplex multipliers scaled by a common denominator, so that the sign of
/// a reduced cost can be read off in integer arithmetic.
struct ScaledMultipliers {
    scale: i128,
    values: Vec<i128>,
}

impl ScaledMultipliers {
    fn new(pi: &[Rat]) -> Option<ScaledMultipliers> {
        const LIMIT: i128 = 1 << 62;
        let mut scale: i128 = 1;
        for p in pi {
            let (_, d) = p.as_small()?;
            let d = d as i128;
            scale = scale / num_integer::gcd(scale, d) * d;
            if scale > LIMIT {
                return None;
            }
        }
        let values = pi
            .iter()
            .map(|p| {
                let (n, d) = p.as_small()?;
                (n as i128).checked_mul(scale / d as i128)
            })
            .collect::<Option<Vec<i128>>>()?;
        Some(ScaledMultipliers { scale, values })
    }
}

enum Step {
    Flip,
    Leave { row: usize, to_upper: bool },
}

impl Simplex {
    fn new(core: Core) -> Simplex {
        let n = core.cols.len();
        let m = core.m;
        let mut x = Vec::with_capacity(n + m);
        let mut place = Vec::with_capacity(n + m);
        for j in 0..n {
            match (&core.lo[j], &core.hi[j]) {
                (Some(l), _) => {
                    x.push(l.clone());
                    place.push(Place::Lower);
                }
                (None, Some(u)) => {
                    x.push(u.clone());
                    place.push(Place::Upper);
                }
                (None, None) => {
                    x.push(Rat::zero());
                    place.push(Place::Zero);
                }
            }
        }
        let mut residual = core.b.clone();
        for (j, col) in core.cols.iter().enumerate() {
            if x[j].is_zero() {
                continue;
            }
            for (i, a) in col {
                residual[*i] -= a * &x[j];
            }
        }
        let mut sigma = Vec::with_capacity(m);
        let mut binv = vec![vec![Rat::zero(); m]; m];
        for (i, r) in residual.iter().enumerate() {
            let s = if r.is_negative() { -Rat::one() } else { Rat::one() };
            x.push(r.abs());
            place.push(Place::Basic);
            binv[i][i] = s.clone();
            sigma.push(s);
        }
        let int_cols = core
            .cols
            .iter()
            .map(|col| {
                col.iter()
                    .map(|(i, a)| match a.as_small() {
                        Some((v, 1)) => Some((*i, v)),
                        _ => None,
                    })
                    .collect::<Option<Vec<_>>>()
            })
            .collect::<Option<Vec<_>>>();
        let mut lo = core.lo.clone();
        let mut hi = core.hi.clone();
        lo.extend((0..m).map(|_| Some(Rat::zero())));
        hi.extend((0..m).map(|_| None));
        Simplex {
            core,
            n,
            sigma,
            lo,
            hi,
            x,
            place,
            basis: (n..n + m).collect(),
            binv,
            int_cols,
        }
    }

    fn column(&self, j: usize) -> Vec<(usize, Rat)> {
        if j < self.n {
            self.core.cols[j].clone()
        } else {
            vec![(j - self.n, self.sigma[j - self.n].clone())]
        }
    }

    fn alpha(&self, col: &[(usize, Rat)]) -> Vec<Rat> {
        let m = self.core.m;
        let mut out = vec![Rat::zero(); m];
        for (k, a) in col {
            for (i, o) in out.iter_mut().enumerate() {
                let e = &self.binv[i][*k];
                if !e.is_zero() {
                    *o += e * a;
                }
            }
        }
        out
    }

    fn multipliers(&self, cost: &[Rat]) -> Vec<Rat> {
        let m = self.core.m;
        let mut pi = vec![Rat::zero(); m];
        for (i, &bj) in self.basis.iter().enumerate() {
            let cb = &cost[bj];
            if cb.is_zero() {
                continue;
            }
            for (k, p) in pi.iter_mut().enumerate() {
                let e = &self.binv[i][k];
                if !e.is_zero() {
                    *p += cb * e;
                }
            }
        }
        pi
    }

    fn reduced_cost(&self, j: usize, cost: &[Rat], pi: &[Rat]) -> Rat {
        let mut d = cost[j].clone();
        if j < self.n {
            for (k, a) in &self.core.cols[j] {
                if !pi[*k].is_zero() {
                    d -= &pi[*k] * a;
                }
            }
        } else {
            let i = j - self.n;
            d -= &pi[i] * &self.sigma[i];
        }
        d
    }

    /// Sign of the reduced cost of `j` computed in integers, or `None` on
    /// overflow or non-integral data.
    fn scaled_reduced_cost(&self, j: usize, cost: &[i128], pi: &ScaledMultipliers) -> Option<i32> {
        let mut d = cost[j].checked_mul(pi.scale)?;
        if j < self.n {
            for (k, a) in &self.int_cols.as_ref()?[j] {
                d = d.checked_sub(pi.values[*k].checked_mul(*a as i128)?)?;
            }
        } else {
            let i = j - self.n;
            let s = if self.sigma[i].is_negative() { -1 } else { 1 };
            d = d.checked_sub(pi.values[i] * s)?;
        }
        Some(d.signum() as i32)
    }

    fn is_fixed(&self, j: usize) -> bool {
        matches!((&self.lo[j], &self.hi[j]), (Some(l), Some(u)) if l == u)
    }

    fn pivot(&mut self, row: usize, alpha: &[Rat]) {
        let inv = alpha[row].recip();
        for e in self.binv[row].iter_mut() {
            if !e.is_zero() {
                *e *= &inv;
            }
        }
        let pivot_row: Vec<(usize, Rat)> = self.binv[row]
            .iter()
            .enumerate()
            .filter(|(_, e)| !e.is_zero())
            .map(|(k, e)| (k, e.clone()))
            .collect();
        for (i, a) in alpha.iter().enumerate() {
            if i == row || a.is_zero() {
                continue;
            }
            let target = &mut self.binv[i];
            for (k, e) in &pivot_row {
                target[*k] -= a * e;
            }
        }
    }

    /// Runs simplex iterations for `cost`; returns a ray on unboundedness.
    fn run(&mut self, cost: &[Rat]) -> Option<Vec<Rat>> {
        let total = self.x.len();
        let int_cost: Option<Vec<i128>> = cost
            .iter()
            .map(|c| match c.as_small() {
                Some((v, 1)) => Some(v as i128),
                _ => None,
            })
            .collect();
        loop {
            let pi = self.multipliers(cost);
            let scaled = int_cost
                .as_ref().zip(ScaledMultipliers::new(&pi));
            let mut entering = None;
            for j in 0..total {
                let p = self.place[j];
                if p == Place::Basic || self.is_fixed(j) {
                    continue;
                }
                let sign = scaled
                    .as_ref()
                    .and_then(|(c, s)| self.scaled_reduced_cost(j, c, s))
                    .unwrap_or_else(|| self.reduced_cost(j, cost, &pi).signum());
                let up = match p {
                    Place::Lower if sign < 0 => Some(true),
                    Place::Upper if sign > 0 => Some(false),
                    Place::Zero if sign != 0 => Some(sign < 0),
                    _ => None,
                };
                if let Some(up) = up {
                    entering = Some((j, up));
                    break;
                }
            }
            let Some((j, up)) = entering else {
                return None;
            };
            let col = self.column(j);
            let alpha = self.alpha(&col);
            let mut best: Option<(Rat, usize, Step)> = None;
            let mut consider = |theta: Rat, index: usize, step: Step| {
                let better = match &best {
                    None => true,
                    Some((t, idx, _)) => theta < *t || (theta == *t && index < *idx),
                };
                if better {
                    best = Some((theta, index, step));
                }
            };
            if let (Some(l), Some(u)) = (&self.lo[j], &self.hi[j]) {
                consider(u - l, j, Step::Flip);
            }
            for (i, a) in alpha.iter().enumerate() {
                if a.is_zero() {
                    continue;
                }
                let b = self.basis[i];
                let rate = if up { -a } else { a.clone() };
                if rate.is_negative() {
                    if let Some(l) = &self.lo[b] {
                        consider((&self.x[b] - l) / -&rate, b, Step::Leave { row: i, to_upper: false });
                    }
                } else if let Some(u) = &self.hi[b] {
                    consider((u - &self.x[b]) / &rate, b, Step::Leave { row: i, to_upper: true });
                }
            }
            let Some((theta, _, step)) = best else {
                let mut ray = vec![Rat::zero(); total];
                let dir = if up { Rat::one() } else { -Rat::one() };
                for (i, a) in alpha.iter().enumerate() {
                    if !a.is_zero() {
                        ray[self.basis[i]] = -(a * &dir);
                    }
                }
                ray[j] = dir;
                return Some(ray);
            };
            if !theta.is_zero() {
                let delta = if up { theta.clone() } else { -theta.clone() };
                self.x[j] += &delta;
                for (i, a) in alpha.iter().enumerate() {
                    if !a.is_zero() {
                        let b = self.basis[i];
                        self.x[b] -= a * &delta;
                    }
                }
            }
            match step {
                Step::Flip => {
                    self.place[j] = if up { Place::Upper } else { Place::Lower };
                }
                Step::Leave { row, to_upper } => {
                    let b = self.basis[row];
                    if to_upper {
                        self.x[b] = self.hi[b].clone().expect("finite upper bound");
                        self.place[b] = Place::Upper;
                    } else {
                        self.x[b] = self.lo[b].clone().expect("finite lower bound");
                        self.place[b] = Place::Lower;
                    }
                    self.pivot(row, &alpha);
                    self.basis[row] = j;
                    self.place[j] = Place::Basic;
                }
            }
        }
    }

    /// Swaps zero-level artificials out of the basis where some structural
    /// column can replace them; rows with no replacement are redundant.
    fn purge_artificials(&mut self) {
        for row in 0..self.core.m {
            if self.basis[row] < self.n {
                continue;
            }
            for j in 0..self.n {
                if self.place[j] == Place::Basic {
                    continue;
                }
                let hit = self.core.cols[j]
                    .iter()
                    .any(|(k, _)| !self.binv[row][*k].is_zero());
                if !hit {
                    continue;
                }
                let alpha = self.alpha(&self.core.cols[j]);
                if alpha[row].is_zero() {
                    continue;
                }
                let art = self.basis[row];
                self.pivot(row, &alpha);
                self.basis[row] = j;
                self.place[j] = Place::Basic;
                self.place[art] = Place::Lower;
                break;
            }
        }
    }

    fn solve(mut self) -> CoreOutcome {
        self.solve_in_place()
    }

    fn full_cost(&self) -> Vec<Rat> {
        let mut cost = self.core.cost.clone();
        cost.extend((0..self.core.m).map(|_| Rat::zero()));
        cost
    }

    fn solve_in_place(&mut self) -> CoreOutcome {
        let m = self.core.m;
        let total = self.n + m;
        let mut phase1 = vec![Rat::zero(); total];
        for c in phase1.iter_mut().skip(self.n) {
            *c = Rat::one();
        }
        self.run(&phase1);
        let infeasibility: Rat = self.x[self.n..].iter().sum();
        if infeasibility.is_positive() {
            return CoreOutcome::Infeasible {
                pi: self.multipliers(&phase1),
            };
        }
        self.purge_artificials();
        for i in 0..m {
            self.hi[self.n + i] = Some(Rat::zero());
        }
        self.phase_two()
    }

    fn phase_two(&mut self) -> CoreOutcome {
        let cost = self.full_cost();
        if let Some(mut ray) = self.run(&cost) {
            ray.truncate(self.n);
            return CoreOutcome::Unbounded { ray };
        }
        CoreOutcome::Optimal {
            x: self.x[..self.n].to_vec(),
            pi: self.multipliers(&cost),
        }
    }

    /// Recomputes basic values from the nonbasic ones and the right-hand side.
    fn refresh_basics(&mut self) {
        let mut residual = self.core.b.clone();
        for j in 0..self.x.len() {
            if self.place[j] == Place::Basic || self.x[j].is_zero() {
                continue;
            }
            for (i, a) in self.column(j) {
                residual[i] -= &a * &self.x[j];
            }
        }
        let m = self.core.m;
        for row in 0..m {
            let mut v = Rat::zero();
            for (k, r) in residual.iter().enumerate() {
                let e = &self.binv[row][k];
                if !e.is_zero() && !r.is_zero() {
                    v += e * r;
                }
            }
            let b = self.basis[row];
            self.x[b] = v;
        }
    }

    /// Dual simplex from a dual feasible basis. Returns false when the
    /// primal problem is infeasible.
    ///
    /// The leaving row is the most infeasible one until the objective stalls
    /// for `STALL_LIMIT` pivots, after which Bland's rule takes over for the
    /// rest of the run.
    fn dual_run(&mut self) -> bool {
        const STALL_LIMIT: usize = 50;
        let cost = self.full_cost();
        let m = self.core.m;
        let mut bland = false;
        let mut stall = 0;
        let mut last: Option<Rat> = None;
        loop {
            self.refresh_basics();
            if !bland {
                let obj: Rat = self
                    .basis
                    .iter()
                    .map(|&b| &cost[b] * &self.x[b])
                    .sum();
                if last.as_ref().is_none_or(|l| obj > *l) {
                    stall = 0;
                    last = Some(obj);
                } else {
                    stall += 1;
                    bland = stall >= STALL_LIMIT;
                }
            }
            let mut leaving: Option<(usize, bool, Rat)> = None;
            for row in 0..m {
                let b = self.basis[row];
                let gap = if let Some(l) = self.lo[b].as_ref().filter(|l| &self.x[b] < *l) {
                    (l - &self.x[b], true)
                } else if let Some(u) = self.hi[b].as_ref().filter(|u| &self.x[b] > *u) {
                    (&self.x[b] - u, false)
                } else {
                    continue;
                };
                let better = match &leaving {
                    None => true,
                    Some((r, _, g)) => {
                        let rb = self.basis[*r];
                        if bland {
                            b < rb
                        } else {
                            gap.0 > *g || (gap.0 == *g && b < rb)
                        }
                    }
                };
                if better {
                    leaving = Some((row, gap.1, gap.0));
                }
            }
            let Some((r, below, _)) = leaving else {
                return true;
            };
            let pi = self.multipliers(&cost);
            let rho = &self.binv[r];
            let mut best: Option<(Rat, Rat, usize)> = None;
            for j in 0..self.x.len() {
                let p = self.place[j];
                if p == Place::Basic || self.is_fixed(j) {
                    continue;
                }
                let mut arj = Rat::zero();
                let mut d = cost[j].clone();
                if j < self.n {
                    for (k, a) in &self.core.cols[j] {
                        if !rho[*k].is_zero() {
                            arj += &rho[*k] * a;
                        }
                        if !pi[*k].is_zero() {
                            d -= &pi[*k] * a;
                        }
                    }
                } else {
                    let k = j - self.n;
                    arj = &rho[k] * &self.sigma[k];
                    d -= &pi[k] * &self.sigma[k];
                }
                if arj.is_zero() {
                    continue;
                }
                // moving x_j by +t changes x_r by -arj * t
                let can_up = matches!(p, Place::Lower | Place::Zero);
                let can_down = matches!(p, Place::Upper | Place::Zero);
                let want_up = if below { arj.is_negative() } else { arj.is_positive() };
                let size = arj.abs();
                let ratio = if want_up && can_up {
                    &d / &size
                } else if !want_up && can_down {
                    -&d / &size
                } else {
                    continue;
                };
                let better = match &best {
                    None => true,
                    Some((t, s, _)) => ratio < *t || (!bland && ratio == *t && size > *s),
                };
                if better {
                    best = Some((ratio, size, j));
                }
            }
            let Some((_, _, j)) = best else {
                return false;
            };
            let alpha = self.alpha(&self.column(j));
            let b = self.basis[r];
            if below {
                self.x[b] = self.lo[b].clone().expect("finite lower bound");
                self.place[b] = Place::Lower;
            } else {
                self.x[b] = self.hi[b].clone().expect("finite upper bound");
                self.place[b] = Place::Upper;
            }
            self.pivot(r, &alpha);
            self.basis[r] = j;
            self.place[j] = Place::Basic;
        }
    }
}

fn solve_primal(lp: &LinearProgram) -> LpResult {
    let n = lp.num_vars();
    let m = lp.num_rows();
    let mut cols: Vec<Vec<(usize, Rat)>> = vec![Vec::new(); n];
    for (i, row) in lp.rows.iter().enumerate() {
        for (j, a) in &row.coeffs {
            cols[*j].push((i, a.clone()));
        }
    }
    let mut lo = lp.lower.clone();
    let mut hi = lp.upper.clone();
    let mut cost: Vec<Rat> = match lp.direction {
        Direction::Minimize => lp.objective.clone(),
        Direction::Maximize => lp.objective.iter().map(|c| -c).collect(),
    };
    for (i, row) in lp.rows.iter().enumerate() {
        let coef = match row.sense {
            RowSense::Le => Rat::one(),
            RowSense::Ge => -Rat::one(),
            RowSense::Eq => continue,
        };
        cols.push(vec![(i, coef)]);
        lo.push(Some(Rat::zero()));
        hi.push(None);
        cost.push(Rat::zero());
    }
    let core = Core {
        m,
        cols,
        b: lp.rows.iter().map(|r| r.rhs.clone()).collect(),
        lo,
        hi,
        cost,
    };
    match Simplex::new(core).solve() {
        CoreOutcome::Optimal { mut x, pi } => {
            x.truncate(n);
            let duals = match lp.direction {
                Direction::Minimize => pi,
                Direction::Maximize => pi.into_iter().map(|p| -p).collect(),
            };
            LpResult {
                status: LpStatus::Optimal,
                value: lp.objective_value(&x),
                x,
                duals,
                certificate: Vec::new(),
            }
        }
        CoreOutcome::Infeasible { pi } => LpResult {
            status: LpStatus::Infeasible,
            x: Vec::new(),
            value: Rat::zero(),
            duals: Vec::new(),
            certificate: pi.into_iter().map(|p| -p).collect(),
        },
        CoreOutcome::Unbounded { mut ray } => {
            ray.truncate(n);
            LpResult {
                status: LpStatus::Unbounded,
                x: Vec::new(),
                value: Rat::zero(),
                duals: Vec::new(),
                certificate: ray,
            }
        }
    }
}

/// A standard-form program `min cᵀx` subject to `Ax = b`, `lower ≤ x ≤ upper`
/// that keeps its basis between solves. After a cost change the next solve
/// continues with primal simplex from the previous basis; after a right-hand
/// side change it continues with dual simplex.
pub struct WarmProgram {
    simplex: Option<Simplex>,
    primal_ok: bool,
    dual_ok: bool,
    solved: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WarmSolution {
    pub status: LpStatus,
    pub x: Vec<Rat>,
    pub value: Rat,
    /// Row multipliers `∂value/∂b` (empty unless optimal).
    pub duals: Vec<Rat>,
}

impl WarmProgram {
    pub fn new(
        n_rows: usize,
        cols: Vec<Vec<(usize, Rat)>>,
        rhs: Vec<Rat>,
        lower: Vec<Option<Rat>>,
        upper: Vec<Option<Rat>>,
        cost: Vec<Rat>,
    ) -> Result<WarmProgram, LpError> {
        let n = cols.len();
        if cost.len() != n {
            return Err(LpError::ObjectiveLength {
                expected: n,
                got: cost.len(),
            });
        }
        if lower.len() != n || upper.len() != n {
            return Err(LpError::BoundsLength {
                expected: n,
                lower: lower.len(),
                upper: upper.len(),
            });
        }
        if rhs.len() != n_rows {
            return Err(LpError::RhsLength {
                expected: n_rows,
                got: rhs.len(),
            });
        }
        for (j, col) in cols.iter().enumerate() {
            if let Some((i, _)) = col.iter().find(|(i, _)| *i >= n_rows) {
                return Err(LpError::RowOutOfRange {
                    col: j,
                    row: *i,
                    m: n_rows,
                });
            }
            if let (Some(l), Some(u)) = (&lower[j], &upper[j]) {
                if l > u {
                    return Err(LpError::InvertedBounds(j));
                }
            }
        }
        let core = Core {
            m: n_rows,
            cols,
            b: rhs,
            lo: lower,
            hi: upper,
            cost,
        };
        Ok(WarmProgram {
            simplex: Some(Simplex::new(core)),
            primal_ok: false,
            dual_ok: false,
            solved: false,
        })
    }

    pub fn num_cols(&self) -> usize {
        self.simplex.as_ref().map_or(0, |s| s.n)
    }

    pub fn set_cost(&mut self, cost: Vec<Rat>) {
        let s = self.simplex.as_mut().expect("program state");
        assert_eq!(cost.len(), s.n, "cost length");
        s.core.cost = cost;
        self.dual_ok = false;
    }

    pub fn set_rhs(&mut self, rhs: Vec<Rat>) {
        let s = self.simplex.as_mut().expect("program state");
        assert_eq!(rhs.len(), s.core.m, "rhs length");
        s.core.b = rhs;
        self.primal_ok = false;
    }

    /// Forgets the current basis; the next solve starts from scratch.
    pub fn reset(&mut self) {
        self.solved = false;
    }

    fn restart(&mut self) {
        let old = self.simplex.take().expect("program state");
        self.simplex = Some(Simplex::new(old.core));
    }

    pub fn solve(&mut self) -> WarmSolution {
        let outcome = if self.solved && self.primal_ok {
            self.simplex.as_mut().unwrap().phase_two()
        } else if self.solved && self.dual_ok {
            let s = self.simplex.as_mut().unwrap();
            if s.dual_run() {
                s.phase_two()
            } else {
                CoreOutcome::Infeasible { pi: Vec::new() }
            }
        } else {
            self.restart();
            self.simplex.as_mut().unwrap().solve_in_place()
        };
        self.solved = true;
        let s = self.simplex.as_ref().unwrap();
        match outcome {
            CoreOutcome::Optimal { x, pi } => {
                self.primal_ok = true;
                self.dual_ok = true;
                let value = s.core.cost.iter().zip(&x).map(|(c, v)| c * v).sum();
                WarmSolution {
                    status: LpStatus::Optimal,
                    x,
                    value,
                    duals: pi,
                }
            }
            CoreOutcome::Unbounded { .. } => {
                self.primal_ok = true;
                self.dual_ok = false;
                WarmSolution {
                    status: LpStatus::Unbounded,
                    x: Vec::new(),
                    value: Rat::zero(),
                    duals: Vec::new(),
                }
            }
            CoreOutcome::Infeasible { .. } => {
                self.primal_ok = false;
                self.solved = self.dual_ok;
                WarmSolution {
                    status: LpStatus::Infeasible,
                    x: Vec::new(),
                    value: Rat::zero(),
                    duals: Vec::new(),
                }
            }
        }
    }
}

// ---------------------------------------------------------------------------
// Dual route.

#[derive(Clone, Copy, PartialEq, Eq)]
enum Shape {
    Fixed,
    Lower,
    Upper,
    Boxed,
    Free,
}

struct Dualized {
    shape: Vec<Shape>,
    shift: Vec<Rat>,
    /// Column of the shifted program for each movable original variable.
    position: Vec<Option<usize>>,
    dual: LinearProgram,
}

/// Shifts every variable to `x = shift + sign·x'` with `x' ≥ 0` (or free),
/// turns finite two-sided bounds into extra `≤` rows, and writes the LP dual
/// of the resulting minimization problem.
fn dualize(lp: &LinearProgram) -> Dualized {
    let n = lp.num_vars();
    let m = lp.num_rows();
    let mut shape = Vec::with_capacity(n);
    let mut shift = Vec::with_capacity(n);
    for j in 0..n {
        let (s, t) = match (&lp.lower[j], &lp.upper[j]) {
            (Some(l), Some(u)) if l == u => (Shape::Fixed, l.clone()),
            (Some(l), Some(_)) => (Shape::Boxed, l.clone()),
            (Some(l), None) => (Shape::Lower, l.clone()),
            (None, Some(u)) => (Shape::Upper, u.clone()),
            (None, None) => (Shape::Free, Rat::zero()),
        };
        shape.push(s);
        shift.push(t);
    }
    let sign = |j: usize| {
        if shape[j] == Shape::Upper {
            -Rat::one()
        } else {
            Rat::one()
        }
    };
    let mut position = vec![None; n];
    let mut movable = Vec::new();
    for j in 0..n {
        if shape[j] != Shape::Fixed {
            position[j] = Some(movable.len());
            movable.push(j);
        }
    }
    let boxed: Vec<usize> = movable
        .iter()
        .copied()
        .filter(|&j| shape[j] == Shape::Boxed)
        .collect();
    let n_dual = m + boxed.len();
    let mut dual = LinearProgram::new(n_dual, Direction::Maximize);
    let mut dual_cols: Vec<Vec<(usize, Rat)>> = vec![Vec::new(); movable.len()];
    for (i, row) in lp.rows.iter().enumerate() {
        let mut h = row.rhs.clone();
        for (j, a) in &row.coeffs {
            if !shift[*j].is_zero() {
                h -= a * &shift[*j];
            }
            if let Some(p) = position[*j] {
                dual_cols[p].push((i, a * &sign(*j)));
            }
        }
        dual.objective[i] = h;
        let (l, u) = match row.sense {
            RowSense::Ge => (Some(Rat::zero()), None),
            RowSense::Le => (None, Some(Rat::zero())),
            RowSense::Eq => (None, None),
        };
        dual.set_bounds(i, l, u);
    }
    for (k, &j) in boxed.iter().enumerate() {
        let var = m + k;
        let width = lp.upper[j].as_ref().unwrap() - lp.lower[j].as_ref().unwrap();
        dual.objective[var] = width;
        dual.set_bounds(var, None, Some(Rat::zero()));
        dual_cols[position[j].unwrap()].push((var, Rat::one()));
    }
    for (p, &j) in movable.iter().enumerate() {
        let c = match lp.direction {
            Direction::Minimize => lp.objective[j].clone(),
            Direction::Maximize => -&lp.objective[j],
        };
        let sense = if shape[j] == Shape::Free {
            RowSense::Eq
        } else {
            RowSense::Le
        };
        dual.add_row(std::mem::take(&mut dual_cols[p]), sense, c * sign(j));
    }
    Dualized {
        shape,
        shift,
        position,
        dual,
    }
}

fn solve_via_dual(lp: &LinearProgram) -> LpResult {
    let m = lp.num_rows();
    let n = lp.num_vars();
    let d = dualize(lp);
    let sign = |j: usize| {
        if d.shape[j] == Shape::Upper {
            -Rat::one()
        } else {
            Rat::one()
        }
    };
    let infeasible = |ray: &[Rat]| LpResult {
        status: LpStatus::Infeasible,
        x: Vec::new(),
        value: Rat::zero(),
        duals: Vec::new(),
        certificate: ray[..m].iter().map(|r| -r).collect(),
    };
    let res = solve_primal(&d.dual);
    match res.status {
        LpStatus::Optimal => {
            let mut x = Vec::with_capacity(n);
            for j in 0..n {
                let v = match d.position[j] {
                    None => d.shift[j].clone(),
                    Some(p) => &d.shift[j] + &(&res.duals[p] * &sign(j)),
                };
                x.push(v);
            }
            let duals: Vec<Rat> = match lp.direction {
                Direction::Minimize => res.x[..m].to_vec(),
                Direction::Maximize => res.x[..m].iter().map(|v| -v).collect(),
            };
            LpResult {
                status: LpStatus::Optimal,
                value: lp.objective_value(&x),
                x,
                duals,
                certificate: Vec::new(),
            }
        }
        LpStatus::Unbounded => infeasible(&res.certificate),
        LpStatus::Infeasible => {
            let mut homogeneous = d.dual.clone();
            for row in homogeneous.rows.iter_mut() {
                row.rhs = Rat::zero();
            }
            let probe = solve_primal(&homogeneous);
            if probe.status == LpStatus::Unbounded {
                return infeasible(&probe.certificate);
            }
            let mut ray = vec![Rat::zero(); n];
            for j in 0..n {
                if let Some(p) = d.position[j] {
                    ray[j] = &res.certificate[p] * &sign(j);
                }
            }
            LpResult {
                status: LpStatus::Unbounded,
                x: Vec::new(),
                value: Rat::zero(),
                duals: Vec::new(),
                certificate: ray,
            }
        }
    }
}

// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq)]
pub struct StrictFeasibility {
    pub strictly_feasible: bool,
    pub witness: Vec<Rat>,
    /// Optimal common slack `s` (capped at 1).
    pub slack: Rat,
}

/// Decides whether `{x : Ax < b}` is nonempty by maximizing a common slack
/// `s ≤ 1` in `Ax + s·𝟙 ≤ b`. The system is open, so no tolerance is needed.
pub fn strict_feasibility(a: &[Vec<Rat>], b: &[Rat]) -> Result<StrictFeasibility, LpError> {
    let n = a.first().map_or(0, |r| r.len());
    if a.len() != b.len() {
        return Err(LpError::ObjectiveLength {
            expected: a.len(),
            got: b.len(),
        });
    }
    if let Some(bad) = a.iter().position(|r| r.len() != n) {
        return Err(LpError::ColumnOutOfRange {
            row: bad,
            col: a[bad].len(),
            n,
        });
    }
    let mut lp = LinearProgram::new(n + 1, Direction::Maximize);
    for j in 0..n {
        lp.set_free(j);
    }
    lp.set_bounds(n, None, Some(Rat::one()));
    lp.objective[n] = Rat::one();
    for (row, rhs) in a.iter().zip(b) {
        let mut coeffs: Vec<(usize, Rat)> = row
            .iter()
            .enumerate()
            .filter(|(_, v)| !v.is_zero())
            .map(|(j, v)| (j, v.clone()))
            .collect();
        coeffs.push((n, Rat::one()));
        lp.add_row(coeffs, RowSense::Le, rhs.clone());
    }
    let res = solve_lp(&lp)?;
    debug_assert_eq!(res.status, LpStatus::Optimal);
    let slack = res.x[n].clone();
    Ok(StrictFeasibility {
        strictly_feasible: slack.is_positive(),
        witness: res.x[..n].to_vec(),
        slack,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct MilpResult {
    pub feasible: bool,
    pub point: Vec<Rat>,
    /// LP relaxations solved.
    pub nodes: usize,
}

/// Depth-first branch and bound for a point of `lp` that is 0/1 on `binary`.
///
/// The objective is ignored. Branching picks the most fractional binary
/// variable (lowest index on ties) and explores the 1-branch first.
pub fn solve_milp_feasibility(
    lp: &LinearProgram,
    binary: &[usize],
) -> Result<MilpResult, LpError> {
    lp.validate()?;
    if let Some(&bad) = binary.iter().find(|&&j| j >= lp.num_vars()) {
        return Err(LpError::BadBinary(bad));
    }
    let mut root = lp.clone();
    root.objective = vec![Rat::zero(); lp.num_vars()];
    for &j in binary {
        let l = root.lower[j].clone().map_or(Rat::zero(), |l| l.max(Rat::zero()));
        let u = root.upper[j].clone().map_or(Rat::one(), |u| u.min(Rat::one()));
        if l > u {
            return Ok(MilpResult {
                feasible: false,
                point: Vec::new(),
                nodes: 0,
            });
        }
        root.set_bounds(j, Some(l), Some(u));
    }
    let half = Rat::new(1, 2);
    let mut stack: Vec<Vec<(usize, Rat)>> = vec![Vec::new()];
    let mut nodes = 0;
    while let Some(fixes) = stack.pop() {
        let mut node = root.clone();
        for (j, v) in &fixes {
            node.set_bounds(*j, Some(v.clone()), Some(v.clone()));
        }
        nodes += 1;
        let res = solve_lp(&node)?;
        if res.status != LpStatus::Optimal {
            continue;
        }
        let mut branch: Option<(Rat, usize)> = None;
        for &j in binary {
            let v = &res.x[j];
            if v.is_integer() {
                continue;
            }
            let dist = (v - &half).abs();
            if branch.as_ref().is_none_or(|(d, _)| dist < *d) {
                branch = Some((dist, j));
            }
        }
        match branch {
            None => {
                return Ok(MilpResult {
                    feasible: true,
                    point: res.x,
                    nodes,
                })
            }
            Some((_, j)) => {
                let mut zero = fixes.clone();
                zero.push((j, Rat::zero()));
                let mut one = fixes;
                one.push((j, Rat::one()));
                stack.push(zero);
                stack.push(one);
            }
        }
    }
    Ok(MilpResult {
        feasible: false,
        point: Vec::new(),
        nodes,
    })
}
