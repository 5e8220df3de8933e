//! Independent oracle for circle distances.

use microlp::{ComparisonOp, OptimizationDirection, Problem};
use qcb::metrics::circle_basis_at;
use std::f64::consts::TAU;

/// `max f(a) − f(b)` over trigonometric polynomials of degree ≤ `deg` with
/// `|f'| ≤ 1` at `16·deg` equally spaced nodes: a linear program, and an upper
/// bound for the true Lipschitz-ball optimum. More nodes make the simplex
/// solver unstable (heavily redundant constraints) without tightening much.
pub fn circle_lp(deg: usize, a: f64, b: f64) -> f64 {
    let pts = 16 * deg;
    let mut p = Problem::new(OptimizationDirection::Maximize);
    let (ea, eb) = (circle_basis_at(deg, a), circle_basis_at(deg, b));
    let vars: Vec<_> = (1..=2 * deg).map(|k| p.add_var(ea[k] - eb[k], (f64::NEG_INFINITY, f64::INFINITY))).collect();
    for j in 0..pts {
        let t = TAU * j as f64 / pts as f64;
        let mut row = Vec::with_capacity(2 * deg);
        for k in 1..=deg {
            let kf = k as f64;
            row.push((vars[2 * k - 2], -kf * (kf * t).sin()));
            row.push((vars[2 * k - 1], kf * (kf * t).cos()));
        }
        p.add_constraint(&row, ComparisonOp::Le, 1.0);
        p.add_constraint(&row, ComparisonOp::Ge, -1.0);
    }
    p.solve().expect("bounded LP").objective()
}
