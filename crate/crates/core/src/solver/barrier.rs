//! Log-barrier interior-point method for [`ConvexProgram`]s.
//!
//! The program is first presolved: variables that every feasible point must
//! hold at zero (dead links, empty energy budgets, mode restrictions) are
//! fixed, so the remaining set has a strict interior. Linear equalities are
//! then eliminated by Gauss-Jordan reduction in scaled coordinates, leaving
//! an inequality-constrained problem in the free variables `u` with
//! `x = base + M u`. A phase-one barrier finds a strictly feasible point and
//! the phase-two barrier follows the central path until the duality gap
//! bound `m / t` falls below the relative tolerance.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::LN_2;

use crate::linalg::{regularized_solve, Dense};
use crate::math;
use crate::transform::{ConstraintKind, ConvexProgram, Relation, Var, NUM_VARS};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BarrierSettings {
    /// Relative duality gap at which phase two stops.
    pub gap_tol: f64,
    /// Total Newton step budget over both phases.
    pub max_newton: usize,
    /// Barrier parameter growth factor.
    pub mu: f64,
}

impl Default for BarrierSettings {
    fn default() -> Self {
        Self { gap_tol: 1e-8, max_newton: 3000, mu: 12.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BarrierStatus {
    Optimal,
    /// Newton budget exhausted; the point is strictly feasible.
    IterationLimit,
    /// No strictly feasible point was found; the point is the idle witness.
    NoInterior,
}

#[derive(Debug, Clone)]
pub struct BarrierOutcome {
    pub x: [f64; NUM_VARS],
    pub status: BarrierStatus,
    /// Duality gap bound in objective units.
    pub gap: f64,
    pub newton_steps: usize,
    pub fixed: [bool; NUM_VARS],
    pub message: String,
}

/// Finds variables forced to zero on the whole feasible set.
pub(crate) fn presolve(prog: &ConvexProgram) -> [bool; NUM_VARS] {
    let mut fixed = [false; NUM_VARS];
    let live = |fixed: &[bool; NUM_VARS], terms: &[(Var, f64)]| -> Vec<(Var, f64)> {
        terms.iter().copied().filter(|&(v, a)| a != 0.0 && !fixed[v.index()]).collect()
    };
    loop {
        let mut changed = false;
        let mut fix = |fixed: &mut [bool; NUM_VARS], v: Var| {
            if !fixed[v.index()] {
                fixed[v.index()] = true;
                changed = true;
            }
        };
        for c in &prog.constraints {
            match &c.kind {
                ConstraintKind::Linear { terms, relation, rhs } => {
                    let rest = live(&fixed, terms);
                    if *rhs != 0.0 || rest.is_empty() {
                        continue;
                    }
                    let all_pos = rest.iter().all(|t| t.1 > 0.0);
                    let all_neg = rest.iter().all(|t| t.1 < 0.0);
                    let forces = match relation {
                        Relation::Equal => rest.len() == 1 || all_pos || all_neg,
                        Relation::LessEq => all_pos,
                    };
                    if forces {
                        for (v, _) in rest {
                            fix(&mut fixed, v);
                        }
                    }
                }
                ConstraintKind::CubicBound { linear, cubic } => {
                    let lin = live(&fixed, linear);
                    if lin.iter().any(|t| t.1 < 0.0) {
                        continue;
                    }
                    for (v, _) in lin.into_iter().chain(live(&fixed, cubic)) {
                        fix(&mut fixed, v);
                    }
                }
                ConstraintKind::PerspectiveLog { terms, time, energy, rho, .. } => {
                    let dead = *rho <= 0.0 || fixed[time.index()] || fixed[energy.index()];
                    let lhs = live(&fixed, terms);
                    if dead {
                        for &(v, a) in &lhs {
                            if a > 0.0 {
                                fix(&mut fixed, v);
                            }
                        }
                    }
                    // time and energy of a slot nobody can use are pure cost
                    if dead || lhs.iter().all(|t| t.1 <= 0.0) {
                        fix(&mut fixed, *time);
                        fix(&mut fixed, *energy);
                    }
                }
                ConstraintKind::Box { var, upper, .. } => {
                    if *upper <= 0.0 {
                        fix(&mut fixed, *var);
                    }
                }
            }
        }
        // unused variables with no objective weight
        for v in Var::ALL {
            if fixed[v.index()] || prog.objective[v.index()] != 0.0 {
                continue;
            }
            let used = prog.constraints.iter().any(|c| match &c.kind {
                ConstraintKind::Box { .. } => false,
                ConstraintKind::Linear { terms, .. } => live(&fixed, terms).iter().any(|t| t.0 == v),
                ConstraintKind::CubicBound { linear, cubic } => {
                    live(&fixed, linear).iter().chain(live(&fixed, cubic).iter()).any(|t| t.0 == v)
                }
                ConstraintKind::PerspectiveLog { terms, time, energy, .. } => {
                    *time == v || *energy == v || live(&fixed, terms).iter().any(|t| t.0 == v)
                }
            });
            if !used {
                fix(&mut fixed, v);
            }
        }
        if !changed {
            return fixed;
        }
    }
}

/// Inequality `g(x) <= 0`, coefficients already divided by a normalizer.
#[derive(Debug, Clone)]
enum Ineq {
    Linear { terms: Vec<(usize, f64)>, rhs: f64 },
    Perspective { terms: Vec<(usize, f64)>, time: usize, energy: usize, rho: f64, coef: f64 },
    Cubic { linear: Vec<(usize, f64)>, cubic: Vec<(usize, f64)> },
}

struct XEval {
    value: f64,
    grad: [(usize, f64); 8],
    n_grad: usize,
    hess: [(usize, usize, f64); 4],
    n_hess: usize,
}

impl XEval {
    fn new(value: f64) -> Self {
        Self { value, grad: [(0, 0.0); 8], n_grad: 0, hess: [(0, 0, 0.0); 4], n_hess: 0 }
    }
    fn g(&mut self, i: usize, v: f64) {
        self.grad[self.n_grad] = (i, v);
        self.n_grad += 1;
    }
    fn h(&mut self, i: usize, j: usize, v: f64) {
        self.hess[self.n_hess] = (i, j, v);
        self.n_hess += 1;
    }
}

fn lin(terms: &[(usize, f64)], x: &[f64; NUM_VARS]) -> f64 {
    terms.iter().map(|&(i, a)| a * x[i]).sum()
}

impl Ineq {
    fn value(&self, x: &[f64; NUM_VARS]) -> f64 {
        match self {
            Ineq::Linear { terms, rhs } => lin(terms, x) - rhs,
            Ineq::Perspective { terms, time, energy, rho, coef } => {
                let t = x[*time];
                let u = rho * x[*energy] / t;
                if !(t > 0.0) || !(u > -1.0) {
                    return f64::INFINITY;
                }
                lin(terms, x) - coef * t * math::ln_1p(u)
            }
            Ineq::Cubic { linear, cubic } => {
                lin(linear, x) + cubic.iter().map(|&(i, c)| c * x[i] * x[i] * x[i]).sum::<f64>()
            }
        }
    }

    fn eval(&self, x: &[f64; NUM_VARS]) -> XEval {
        match self {
            Ineq::Linear { terms, .. } => {
                let mut e = XEval::new(self.value(x));
                for &(i, a) in terms {
                    e.g(i, a);
                }
                e
            }
            Ineq::Perspective { terms, time, energy, rho, coef } => {
                let mut e = XEval::new(self.value(x));
                for &(i, a) in terms {
                    e.g(i, a);
                }
                let t = x[*time];
                let u = rho * x[*energy] / t;
                let l = math::ln_1p(u);
                let inv = 1.0 / (1.0 + u);
                // capacity C = coef t ln(1+u); g contains -C
                e.g(*time, -coef * (l - u * inv));
                e.g(*energy, -coef * rho * inv);
                let k = coef * inv * inv / t;
                e.h(*time, *time, k * u * u);
                e.h(*energy, *energy, k * rho * rho);
                e.h(*time, *energy, -k * rho * u);
                e.h(*energy, *time, -k * rho * u);
                e
            }
            Ineq::Cubic { linear, cubic } => {
                let mut e = XEval::new(self.value(x));
                for &(i, a) in linear {
                    e.g(i, a);
                }
                for &(i, c) in cubic {
                    e.g(i, 3.0 * c * x[i] * x[i]);
                    e.h(i, i, 6.0 * c * x[i]);
                }
                e
            }
        }
    }
}

/// Inequality problem in the free variables.
struct Reduced {
    n: usize,
    base: [f64; NUM_VARS],
    /// `cols[j][i] = dx_i / du_j`.
    cols: Vec<[f64; NUM_VARS]>,
    /// Rows of `M`: nonzero `(j, dx_i/du_j)` per original variable.
    rows: Vec<Vec<(usize, f64)>>,
    ineqs: Vec<Ineq>,
    /// Maximization weights on `u` and the constant part.
    c: Vec<f64>,
    c0: f64,
}

impl Reduced {
    fn x_of(&self, u: &[f64]) -> [f64; NUM_VARS] {
        let mut x = self.base;
        for (j, col) in self.cols.iter().enumerate() {
            if u[j] != 0.0 {
                for i in 0..NUM_VARS {
                    x[i] += col[i] * u[j];
                }
            }
        }
        x
    }

    fn objective(&self, u: &[f64]) -> f64 {
        self.c0 + self.c.iter().zip(u).map(|(c, v)| c * v).sum::<f64>()
    }
}

fn build(prog: &ConvexProgram, fixed: &[bool; NUM_VARS]) -> Result<Reduced, String> {
    let s = &prog.scales;
    let live = |terms: &[(Var, f64)]| -> Vec<(usize, f64)> {
        terms.iter().filter(|&&(v, a)| a != 0.0 && !fixed[v.index()]).map(|&(v, a)| (v.index(), a)).collect()
    };
    // equality rows in scaled columns
    let mut eq_rows: Vec<([f64; NUM_VARS], f64)> = Vec::new();
    let mut ineqs = Vec::new();
    for c in &prog.constraints {
        match &c.kind {
            ConstraintKind::Linear { terms, relation, rhs } => {
                let t = live(terms);
                if t.is_empty() {
                    let ok = match relation {
                        Relation::Equal => *rhs == 0.0,
                        Relation::LessEq => *rhs >= 0.0,
                    };
                    if !ok {
                        return Err(alloc::format!("{:?} infeasible after presolve", c.role));
                    }
                    continue;
                }
                let norm = t.iter().map(|&(i, a)| (a * s[i]).abs()).fold(0.0, f64::max);
                match relation {
                    Relation::Equal => {
                        let mut row = [0.0; NUM_VARS];
                        for &(i, a) in &t {
                            row[i] = a * s[i] / norm;
                        }
                        eq_rows.push((row, rhs / norm));
                    }
                    Relation::LessEq => {
                        let terms = t.iter().map(|&(i, a)| (i, a / norm)).collect();
                        ineqs.push(Ineq::Linear { terms, rhs: rhs / norm });
                    }
                }
            }
            ConstraintKind::PerspectiveLog { terms, time, energy, rho, bandwidth } => {
                let (ti, ei) = (time.index(), energy.index());
                let t = live(terms);
                if fixed[ti] || fixed[ei] {
                    if !t.is_empty() {
                        return Err(alloc::format!("{:?}: live bits on a fixed slot", c.role));
                    }
                    continue;
                }
                let coef = bandwidth / LN_2;
                let cap = coef * s[ti] * math::ln_1p(rho * s[ei] / s[ti]);
                let norm = t.iter().map(|&(i, a)| (a * s[i]).abs()).fold(cap, f64::max);
                let norm = if norm > 0.0 { norm } else { 1.0 };
                ineqs.push(Ineq::Perspective {
                    terms: t.iter().map(|&(i, a)| (i, a / norm)).collect(),
                    time: ti,
                    energy: ei,
                    rho: *rho,
                    coef: coef / norm,
                });
            }
            ConstraintKind::CubicBound { linear, cubic } => {
                let l = live(linear);
                let q = live(cubic);
                if l.is_empty() && q.is_empty() {
                    continue;
                }
                let norm = l
                    .iter()
                    .map(|&(i, a)| (a * s[i]).abs())
                    .chain(q.iter().map(|&(i, c)| (c * s[i] * s[i] * s[i]).abs()))
                    .fold(0.0, f64::max);
                ineqs.push(Ineq::Cubic {
                    linear: l.iter().map(|&(i, a)| (i, a / norm)).collect(),
                    cubic: q.iter().map(|&(i, a)| (i, a / norm)).collect(),
                });
            }
            ConstraintKind::Box { var, lower, upper } => {
                let i = var.index();
                if fixed[i] {
                    if *lower > 0.0 || *upper < 0.0 {
                        return Err(alloc::format!("{:?} excludes zero", c.role));
                    }
                    continue;
                }
                if upper.is_finite() {
                    ineqs.push(Ineq::Linear { terms: vec![(i, 1.0 / s[i])], rhs: upper / s[i] });
                }
                if *lower > 0.0 {
                    ineqs.push(Ineq::Linear { terms: vec![(i, -1.0 / s[i])], rhs: -lower / s[i] });
                }
            }
        }
    }

    // Gauss-Jordan on the scaled equality rows
    let mut pivots: Vec<(usize, usize)> = Vec::new(); // (row, column)
    let mut is_pivot = [false; NUM_VARS];
    let mut r = 0;
    while r < eq_rows.len() {
        let (col, val) = (0..NUM_VARS)
            .filter(|&j| !fixed[j] && !is_pivot[j])
            .map(|j| (j, eq_rows[r].0[j]))
            .fold((usize::MAX, 0.0f64), |best, cur| if cur.1.abs() > best.1.abs() { cur } else { best });
        if col == usize::MAX || val.abs() < 1e-12 {
            if eq_rows[r].1.abs() > 1e-12 {
                return Err(String::from("inconsistent equalities"));
            }
            eq_rows.remove(r);
            continue;
        }
        let inv = 1.0 / val;
        for a in eq_rows[r].0.iter_mut() {
            *a *= inv;
        }
        eq_rows[r].1 *= inv;
        let (prow, prhs) = eq_rows[r];
        for (k, row) in eq_rows.iter_mut().enumerate() {
            if k != r && row.0[col] != 0.0 {
                let f = row.0[col];
                for (a, b) in row.0.iter_mut().zip(&prow) {
                    *a -= f * b;
                }
                row.1 -= f * prhs;
            }
        }
        for &(pr, pc) in &pivots {
            debug_assert!(eq_rows[pr].0[col].abs() < 1e-300 || pc != col);
        }
        pivots.push((r, col));
        is_pivot[col] = true;
        r += 1;
    }

    let free: Vec<usize> = (0..NUM_VARS).filter(|&j| !fixed[j] && !is_pivot[j]).collect();
    let n = free.len();
    let mut base = [0.0; NUM_VARS];
    let mut cols = vec![[0.0; NUM_VARS]; n];
    for (j, &v) in free.iter().enumerate() {
        cols[j][v] = s[v];
    }
    for &(row, pc) in &pivots {
        // u_pc = rhs - sum_free a_j u_j in scaled units
        base[pc] = s[pc] * eq_rows[row].1;
        for (j, &v) in free.iter().enumerate() {
            cols[j][pc] = -s[pc] * eq_rows[row].0[v];
        }
    }
    // nonnegativity on every live variable
    for v in 0..NUM_VARS {
        if !fixed[v] {
            ineqs.push(Ineq::Linear { terms: vec![(v, -1.0 / s[v])], rhs: 0.0 });
        }
    }
    let mut rows = vec![Vec::new(); NUM_VARS];
    for (j, col) in cols.iter().enumerate() {
        for i in 0..NUM_VARS {
            if col[i] != 0.0 {
                rows[i].push((j, col[i]));
            }
        }
    }
    let c: Vec<f64> = cols.iter().map(|col| (0..NUM_VARS).map(|i| prog.objective[i] * col[i]).sum()).collect();
    let c0 = (0..NUM_VARS).map(|i| prog.objective[i] * base[i]).sum();
    Ok(Reduced { n, base, cols, rows, ineqs, c, c0 })
}

/// Barrier function over `y = (u[, s])`. In phase one every inequality
/// except nonnegativity bounds is relaxed by the slack `s`.
struct Barrier<'a> {
    red: &'a Reduced,
    phase_one: bool,
    /// Index of the first nonnegativity bound in `red.ineqs`.
    hard_from: usize,
    /// Minimization direction: `obj . y`.
    obj: Vec<f64>,
}

impl Barrier<'_> {
    fn dim(&self) -> usize {
        self.red.n + usize::from(self.phase_one)
    }

    fn g_values(&self, y: &[f64], out: &mut Vec<f64>) -> bool {
        out.clear();
        let x = self.red.x_of(&y[..self.red.n]);
        for (k, q) in self.red.ineqs.iter().enumerate() {
            let mut g = q.value(&x);
            if self.phase_one && k < self.hard_from {
                g -= y[self.red.n];
            }
            if !(g < 0.0) {
                return false;
            }
            out.push(g);
        }
        true
    }

    /// Gradient and Hessian of `t * obj.y + phi(y)`.
    fn derivatives(&self, y: &[f64], t: f64, grad: &mut [f64], hess: &mut Dense) {
        let n = self.red.n;
        let dim = self.dim();
        for (g, o) in grad.iter_mut().zip(&self.obj) {
            *g = t * o;
        }
        hess.data.iter_mut().for_each(|v| *v = 0.0);
        let x = self.red.x_of(&y[..n]);
        let mut gu = vec![0.0; dim];
        for (k, q) in self.red.ineqs.iter().enumerate() {
            let e = q.eval(&x);
            let relaxed = self.phase_one && k < self.hard_from;
            let g = if relaxed { e.value - y[n] } else { e.value };
            let inv = -1.0 / g;
            gu.iter_mut().for_each(|v| *v = 0.0);
            for &(i, d) in &e.grad[..e.n_grad] {
                for &(j, m) in &self.red.rows[i] {
                    gu[j] += m * d;
                }
            }
            if relaxed {
                gu[n] = -1.0;
            }
            for a in 0..dim {
                if gu[a] == 0.0 {
                    continue;
                }
                grad[a] += gu[a] * inv;
                for b in 0..dim {
                    hess.add(a, b, gu[a] * gu[b] * inv * inv);
                }
            }
            for &(i, j, h) in &e.hess[..e.n_hess] {
                for &(a, ma) in &self.red.rows[i] {
                    for &(b, mb) in &self.red.rows[j] {
                        hess.add(a, b, ma * h * mb * inv);
                    }
                }
            }
        }
    }

    /// Runs centering steps at barrier weight `t` until the Newton decrement
    /// is small, `stop` returns true, or the budget runs out.
    fn center(&self, y: &mut [f64], t: f64, steps: &mut usize, budget: usize, stop: &dyn Fn(&[f64]) -> bool) -> bool {
        let dim = self.dim();
        let mut grad = vec![0.0; dim];
        let mut hess = Dense::zeros(dim);
        let mut g_old = Vec::new();
        let mut g_new = Vec::new();
        for _ in 0..100 {
            if *steps >= budget {
                return false;
            }
            *steps += 1;
            self.derivatives(y, t, &mut grad, &mut hess);
            let neg: Vec<f64> = grad.iter().map(|g| -g).collect();
            let Some(dy) = regularized_solve(&hess, &neg) else {
                return false;
            };
            let slope: f64 = grad.iter().zip(&dy).map(|(g, d)| g * d).sum();
            let decrement = -slope;
            if decrement <= 1e-11 {
                return true;
            }
            if !self.g_values(y, &mut g_old) {
                return false;
            }
            let lin_obj: f64 = self.obj.iter().zip(&dy).map(|(o, d)| o * d).sum();
            let mut alpha = 1.0;
            let mut trial = y.to_vec();
            let mut accepted = false;
            for _ in 0..60 {
                for i in 0..dim {
                    trial[i] = y[i] + alpha * dy[i];
                }
                if self.g_values(&trial, &mut g_new) {
                    // change of the barrier objective, free of cancellation
                    let df = t * alpha * lin_obj - g_new.iter().zip(&g_old).map(|(n, o)| math::ln(n / o)).sum::<f64>();
                    if df <= 0.01 * alpha * slope {
                        accepted = true;
                        break;
                    }
                }
                alpha *= 0.5;
            }
            if !accepted {
                // no progress possible at working precision
                return decrement < 1e-6;
            }
            y.copy_from_slice(&trial);
            if stop(y) {
                return true;
            }
            if decrement < 1e-9 && alpha == 1.0 {
                return true;
            }
        }
        true
    }
}

pub(crate) fn solve(prog: &ConvexProgram, settings: &BarrierSettings) -> BarrierOutcome {
    let fixed = presolve(prog);
    let witness = prog.idle_witness();
    let fail = |status, msg: String, steps| BarrierOutcome {
        x: witness,
        status,
        gap: f64::INFINITY,
        newton_steps: steps,
        fixed,
        message: msg,
    };
    let red = match build(prog, &fixed) {
        Ok(r) => r,
        Err(msg) => return fail(BarrierStatus::NoInterior, msg, 0),
    };
    let objective_scale: f64 = red.c.iter().map(|c| c.abs()).sum();
    if red.n == 0 || objective_scale == 0.0 {
        // nothing to optimize: the idle witness is optimal
        return BarrierOutcome {
            x: witness,
            status: BarrierStatus::Optimal,
            gap: 0.0,
            newton_steps: 0,
            fixed,
            message: String::new(),
        };
    }
    let n = red.n;
    let m = red.ineqs.len();
    let hard_from = m - (0..NUM_VARS).filter(|&v| !fixed[v]).count();
    let mut steps = 0usize;

    // phase one
    let mut y: Vec<f64> = vec![0.05; n + 1];
    let u0 = &y[..n];
    let x0 = red.x_of(u0);
    let mut worst = f64::NEG_INFINITY;
    for (k, q) in red.ineqs.iter().enumerate() {
        let g = q.value(&x0);
        if k >= hard_from {
            if !(g < 0.0) {
                return fail(BarrierStatus::NoInterior, String::from("start violates a bound"), 0);
            }
        } else {
            worst = worst.max(g);
        }
    }
    let mut u: Vec<f64>;
    if worst < 0.0 {
        u = y[..n].to_vec();
    } else {
        y[n] = worst + 1.0;
        let mut obj = vec![0.0; n + 1];
        obj[n] = 1.0;
        let phase1 = Barrier { red: &red, phase_one: true, hard_from, obj };
        let mut t = 1.0;
        let strictly_feasible = |y: &[f64]| y[n] < 0.0;
        let mut found = false;
        for _ in 0..200 {
            phase1.center(&mut y, t, &mut steps, settings.max_newton, &strictly_feasible);
            if y[n] < 0.0 {
                found = true;
                break;
            }
            // s - m/t bounds the smallest slack from below
            if y[n] - (m as f64) / t > 0.0 || steps >= settings.max_newton {
                break;
            }
            t *= settings.mu;
        }
        if !found {
            return fail(BarrierStatus::NoInterior, alloc::format!("phase one stalled at s = {:e}", y[n]), steps);
        }
        u = y[..n].to_vec();
    }

    // phase two
    let obj: Vec<f64> = red.c.iter().map(|c| -c).collect();
    let phase2 = Barrier { red: &red, phase_one: false, hard_from: m, obj };
    let never = |_: &[f64]| false;
    let mut t = (m as f64) / objective_scale;
    let mut status = BarrierStatus::IterationLimit;
    loop {
        let centered = phase2.center(&mut u, t, &mut steps, settings.max_newton, &never);
        let value = red.objective(&u);
        let gap = (m as f64) / t;
        if centered && gap <= settings.gap_tol * value.abs().max(1e-9 * objective_scale) {
            status = BarrierStatus::Optimal;
            break;
        }
        if steps >= settings.max_newton {
            break;
        }
        t *= settings.mu;
    }
    BarrierOutcome { x: red.x_of(&u), status, gap: (m as f64) / t, newton_steps: steps, fixed, message: String::new() }
}
