//! Monge–Kantorovich distances `d_L(μ, ν) = sup{|μ(x) − ν(x)| : L(x) ≤ 1}`
//! and total-boundedness diagnostics, for finite spans carrying a slip-norm.
//!
//! Only lower bounds are certified: the optimizer returns a witness `x` with
//! `L(x) ≤ 1` and the bound is `|μ(x) − ν(x)|`, recomputed.

use argmin::core::{CostFunction, Error as ArgminError, Executor, Gradient, State};
use argmin::solver::linesearch::MoreThuenteLineSearch;
use argmin::solver::quasinewton::LBFGS;
use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::linalg::top_singular;
use crate::ncalg::Element;
use crate::repnorms::{sigma_max, Fourier, Legs, RepError, SeminormKind, Seminorms, C64};
use crate::scalars::Scalar;
use crate::suites::sample_rng;

type CMat = DMatrix<C64>;
type CVec = DVector<C64>;

const ONE: C64 = C64::new(1.0, 0.0);

#[derive(Debug, Error)]
pub enum MetricError {
    #[error("expected {expected} coefficients, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("not a state: {0}")]
    NotAState(String),
    #[error("bad span: {0}")]
    BadSpan(String),
    #[error("unknown state `{0}`")]
    UnknownState(String),
    #[error(transparent)]
    Rep(#[from] RepError),
}

/// A seminorm on real coefficient vectors of a self-adjoint span.
pub trait SlipNorm: Sync {
    fn dim(&self) -> usize;
    /// `L(c)` together with a subgradient at `c`.
    fn eval(&self, c: &[f64]) -> (f64, Vec<f64>);
    /// Certified upper bound on `L(c)`, used for the final rescaling.
    fn upper(&self, c: &[f64]) -> f64 {
        self.eval(c).0
    }
    /// A real linear map with the same kernel as `L` (one column per coefficient).
    fn linear_part(&self) -> DMatrix<f64>;
    /// Smooth majorant `L_τ ≥ L` with `L_τ − L = O(τ)`, and its gradient.
    fn smoothed(&self, _c: &[f64], _tau: f64) -> Option<(f64, Vec<f64>)> {
        None
    }
}

/// A span of self-adjoint elements whose first basis element is the unit.
pub trait Span: Sync {
    fn dim(&self) -> usize;
    fn labels(&self) -> Vec<String>;
    /// Operator norm of `Σ c_k b_k`.
    fn norm(&self, c: &[f64]) -> f64;
    /// Normalized trace of `Σ c_k b_k`.
    fn scalar_part(&self, c: &[f64]) -> f64;
}

fn combine(mats: &[CMat], c: &[f64]) -> CMat {
    let mut m = CMat::zeros(mats[0].nrows(), mats[0].ncols());
    for (x, &ck) in mats.iter().zip(c) {
        if ck != 0.0 {
            m += x * C64::new(ck, 0.0);
        }
    }
    m
}

fn stack_complex(cols: Vec<Vec<C64>>) -> DMatrix<f64> {
    let rows = cols.first().map_or(0, |c| c.len());
    DMatrix::from_fn(2 * rows, cols.len(), |i, j| if i < rows { cols[j][i].re } else { cols[j][i - rows].im })
}

/// Vector or density-matrix state on the ambient space, or its values on the
/// span basis directly.
#[derive(Clone, Debug)]
pub enum StateSpec {
    Vector(CVec),
    Density(CMat),
    Values(Vec<f64>),
}

fn check_values(v: Vec<f64>, dim: usize) -> Result<Vec<f64>, MetricError> {
    if v.len() != dim {
        return Err(MetricError::DimensionMismatch { expected: dim, got: v.len() });
    }
    if (v[0] - 1.0).abs() > 1e-9 {
        return Err(MetricError::NotAState(format!("μ(1) = {}", v[0])));
    }
    Ok(v)
}

/// Span of self-adjoint matrices.
#[derive(Clone, Debug)]
pub struct MatrixSpan {
    pub labels: Vec<String>,
    pub basis: Vec<CMat>,
}

impl MatrixSpan {
    pub fn new(labels: Vec<String>, basis: Vec<CMat>) -> Result<Self, MetricError> {
        let n = basis.first().ok_or_else(|| MetricError::BadSpan("empty basis".into()))?.nrows();
        if labels.len() != basis.len() {
            return Err(MetricError::BadSpan("one label per basis element".into()));
        }
        if (&basis[0] - CMat::identity(n, n)).norm() > 1e-12 {
            return Err(MetricError::BadSpan("first basis element must be the identity".into()));
        }
        for (b, name) in basis.iter().zip(&labels) {
            if b.shape() != (n, n) || (b - b.adjoint()).norm() > 1e-12 * (1.0 + b.norm()) {
                return Err(MetricError::BadSpan(format!("{name} is not a self-adjoint {n}×{n} matrix")));
            }
        }
        Ok(MatrixSpan { labels, basis })
    }

    pub fn ambient(&self) -> usize {
        self.basis[0].nrows()
    }

    /// Values `μ(b_k)` of a state, after checking positivity and normalization.
    pub fn state_values(&self, s: &StateSpec) -> Result<Vec<f64>, MetricError> {
        let n = self.ambient();
        let rho = match s {
            StateSpec::Values(v) => return check_values(v.clone(), self.dim()),
            StateSpec::Vector(v) => {
                if v.len() != n {
                    return Err(MetricError::DimensionMismatch { expected: n, got: v.len() });
                }
                if (v.norm() - 1.0).abs() > 1e-9 {
                    return Err(MetricError::NotAState(format!("‖ξ‖ = {}", v.norm())));
                }
                v * v.adjoint()
            }
            StateSpec::Density(rho) => {
                if rho.shape() != (n, n) {
                    return Err(MetricError::DimensionMismatch { expected: n, got: rho.nrows() });
                }
                if (rho - rho.adjoint()).norm() > 1e-9 || (rho.trace() - ONE).norm() > 1e-9 {
                    return Err(MetricError::NotAState("density matrix must be self-adjoint with unit trace".into()));
                }
                let low = rho.clone().symmetric_eigenvalues().iter().cloned().fold(f64::INFINITY, f64::min);
                if low < -1e-9 {
                    return Err(MetricError::NotAState(format!("negative eigenvalue {low}")));
                }
                rho.clone()
            }
        };
        Ok(self.basis.iter().map(|b| (&rho * b).trace().re).collect())
    }
}

impl Span for MatrixSpan {
    fn dim(&self) -> usize {
        self.basis.len()
    }
    fn labels(&self) -> Vec<String> {
        self.labels.clone()
    }
    fn norm(&self, c: &[f64]) -> f64 {
        sigma_max(&combine(&self.basis, c))
    }
    fn scalar_part(&self, c: &[f64]) -> f64 {
        combine(&self.basis, c).trace().re / self.ambient() as f64
    }
}

/// Real functions sampled on a finite point set (a commutative span).
#[derive(Clone, Debug)]
pub struct FunctionSpan {
    pub labels: Vec<String>,
    pub basis: Vec<Vec<f64>>,
}

impl FunctionSpan {
    fn values(&self, c: &[f64]) -> Vec<f64> {
        let mut f = vec![0.0; self.basis[0].len()];
        for (b, &ck) in self.basis.iter().zip(c) {
            for (x, y) in f.iter_mut().zip(b) {
                *x += ck * y;
            }
        }
        f
    }
}

impl Span for FunctionSpan {
    fn dim(&self) -> usize {
        self.basis.len()
    }
    fn labels(&self) -> Vec<String> {
        self.labels.clone()
    }
    fn norm(&self, c: &[f64]) -> f64 {
        self.values(c).iter().fold(0.0, |a, x| a.max(x.abs()))
    }
    fn scalar_part(&self, c: &[f64]) -> f64 {
        let f = self.values(c);
        f.iter().sum::<f64>() / f.len() as f64
    }
}

/// `L(x) = ‖δ(x)‖` for a linear map `δ` given on the basis.
#[derive(Clone, Debug)]
pub struct DerivationNorm {
    pub images: Vec<CMat>,
}

impl SlipNorm for DerivationNorm {
    fn dim(&self) -> usize {
        self.images.len()
    }
    fn eval(&self, c: &[f64]) -> (f64, Vec<f64>) {
        let m = combine(&self.images, c);
        let (s, u, v) = top_singular(&m);
        (s, self.images.iter().map(|d| u.dotc(&(d * &v)).re).collect())
    }
    fn linear_part(&self) -> DMatrix<f64> {
        stack_complex(self.images.iter().map(|m| m.iter().cloned().collect()).collect())
    }
}

/// Trigonometric polynomials of degree ≤ `degree` on the circle, basis
/// `1, cos θ, sin θ, …, cos nθ, sin nθ`.
pub fn circle_basis_at(degree: usize, theta: f64) -> Vec<f64> {
    let mut v = vec![1.0];
    for k in 1..=degree {
        let t = k as f64 * theta;
        v.push(t.cos());
        v.push(t.sin());
    }
    v
}

pub fn circle_span(degree: usize, points: usize) -> FunctionSpan {
    let mut labels = vec!["1".to_string()];
    for k in 1..=degree {
        labels.push(format!("cos {k}θ"));
        labels.push(format!("sin {k}θ"));
    }
    let rows: Vec<Vec<f64>> = (0..points).map(|j| circle_basis_at(degree, std::f64::consts::TAU * j as f64 / points as f64)).collect();
    FunctionSpan { labels, basis: (0..2 * degree + 1).map(|k| rows.iter().map(|r| r[k]).collect()).collect() }
}

/// The Lipschitz seminorm `sup |f'|` on trigonometric polynomials.
///
/// `|f'|` is maximized over `points` equally spaced nodes and inflated by
/// `1/(1 − π n/M)`: the true maximum lies within `π/M` of a node and
/// `‖f''‖ ≤ n‖f'‖`, so the result bounds `sup |f'|` from above.
#[derive(Clone, Debug)]
pub struct CircleLipschitz {
    pub degree: usize,
    pub points: usize,
    /// Node count used by `upper`.
    pub fine_points: usize,
    derivs: Vec<Vec<f64>>,
}

impl CircleLipschitz {
    pub fn new(degree: usize, points: usize, fine_points: usize) -> Self {
        assert!(std::f64::consts::PI * (degree as f64) / (points as f64) < 0.5, "too few nodes for degree {degree}");
        let derivs = (0..points).map(|j| Self::deriv_row(degree, std::f64::consts::TAU * j as f64 / points as f64)).collect();
        CircleLipschitz { degree, points, fine_points, derivs }
    }

    fn deriv_row(degree: usize, theta: f64) -> Vec<f64> {
        let mut v = vec![0.0];
        for k in 1..=degree {
            let (kf, t) = (k as f64, k as f64 * theta);
            v.push(-kf * t.sin());
            v.push(kf * t.cos());
        }
        v
    }

    fn inflation(&self, points: usize) -> f64 {
        1.0 / (1.0 - std::f64::consts::PI * self.degree as f64 / points as f64)
    }
}

impl SlipNorm for CircleLipschitz {
    fn dim(&self) -> usize {
        2 * self.degree + 1
    }
    fn eval(&self, c: &[f64]) -> (f64, Vec<f64>) {
        let (mut best, mut arg) = (-1.0, 0);
        for (j, row) in self.derivs.iter().enumerate() {
            let d: f64 = row.iter().zip(c).map(|(a, b)| a * b).sum();
            if d.abs() > best {
                best = d.abs();
                arg = j;
            }
        }
        let k = self.inflation(self.points);
        let d: f64 = self.derivs[arg].iter().zip(c).map(|(a, b)| a * b).sum();
        let sign = if d < 0.0 { -1.0 } else { 1.0 };
        (k * best, self.derivs[arg].iter().map(|x| k * sign * x).collect())
    }
    fn upper(&self, c: &[f64]) -> f64 {
        let m = self.fine_points;
        let best = (0..m)
            .map(|j| Self::deriv_row(self.degree, std::f64::consts::TAU * j as f64 / m as f64).iter().zip(c).map(|(a, b)| a * b).sum::<f64>().abs())
            .fold(0.0, f64::max);
        best * self.inflation(m)
    }
    fn smoothed(&self, c: &[f64], tau: f64) -> Option<(f64, Vec<f64>)> {
        // log-sum-exp of ±f'(θ_j)
        let d: Vec<f64> = self.derivs.iter().map(|row| dot(row, c)).collect();
        let top = d.iter().fold(0.0, |a: f64, x| a.max(x.abs()));
        let (mut z, mut w) = (0.0, vec![0.0; c.len()]);
        for (row, &x) in self.derivs.iter().zip(&d) {
            let (ep, em) = (((x - top) / tau).exp(), ((-x - top) / tau).exp());
            z += ep + em;
            for (wk, rk) in w.iter_mut().zip(row) {
                *wk += (ep - em) * rk;
            }
        }
        let k = self.inflation(self.points);
        Some((k * (top + tau * z.ln()), w.into_iter().map(|x| k * x / z).collect()))
    }
    fn linear_part(&self) -> DMatrix<f64> {
        let m = 4 * self.degree + 2;
        DMatrix::from_fn(m, self.dim(), |i, k| Self::deriv_row(self.degree, std::f64::consts::TAU * i as f64 / m as f64)[k])
    }
}

/// `L(c) = max_b sup_θ ‖Σ_k c_k M_{b,k}(θ)‖` over blocks `b` of trigonometric
/// matrix polynomials.
#[derive(Clone, Debug)]
pub struct FourierNorm {
    /// `blocks[b][k]`: block `b` of basis element `k`.
    pub blocks: Vec<Vec<Fourier>>,
}

fn combine_fourier(parts: &[Fourier], c: &[f64]) -> Fourier {
    let mut out = Fourier::zero(parts[0].rows, parts[0].cols);
    for (f, &ck) in parts.iter().zip(c) {
        if ck == 0.0 {
            continue;
        }
        for (&j, m) in &f.coeffs {
            *out.coeffs.entry(j).or_insert_with(|| CMat::zeros(f.rows, f.cols)) += m * C64::new(ck, 0.0);
        }
    }
    out
}

impl SlipNorm for FourierNorm {
    fn dim(&self) -> usize {
        self.blocks[0].len()
    }
    fn eval(&self, c: &[f64]) -> (f64, Vec<f64>) {
        let (mut best, mut at) = (-1.0, (0, 0.0));
        for (b, parts) in self.blocks.iter().enumerate() {
            let (v, t) = combine_fourier(parts, c).sup_norm_at();
            if v > best {
                best = v;
                at = (b, t);
            }
        }
        let parts = &self.blocks[at.0];
        let m = combine_fourier(parts, c).eval(at.1);
        let (_, u, v) = top_singular(&m);
        (best, parts.iter().map(|f| u.dotc(&(f.eval(at.1) * &v)).re).collect())
    }
    fn linear_part(&self) -> DMatrix<f64> {
        let k = self.dim();
        let mut cols = vec![Vec::new(); k];
        for parts in &self.blocks {
            let keys: std::collections::BTreeSet<i32> = parts.iter().flat_map(|f| f.coeffs.keys().cloned()).collect();
            for (col, f) in cols.iter_mut().zip(parts) {
                for j in &keys {
                    match f.coeffs.get(j) {
                        Some(m) => col.extend(m.iter().cloned()),
                        None => col.extend(std::iter::repeat(C64::new(0.0, 0.0)).take(f.rows * f.cols)),
                    }
                }
            }
        }
        stack_complex(cols)
    }
}

/// Optimizer budget: ascent steps per start, number of starts.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct Budget {
    pub iterations: usize,
    pub restarts: usize,
}

impl Default for Budget {
    fn default() -> Self {
        Budget { iterations: 2000, restarts: 6 }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct MkResult {
    /// Certified lower bound on `d_L(μ, ν)`; `+∞` when `infinite`.
    pub bound: f64,
    /// Coefficients of `x` with `L(x) ≤ 1` and `|μ(x) − ν(x)| = bound`.
    pub witness: Vec<f64>,
    /// Certified upper bound on `L(witness)`.
    pub witness_lipschitz: f64,
    /// `L` vanishes on an element that separates the states.
    pub infinite: bool,
    /// Best minus worst restart value: a rough optimizer gap.
    pub spread: f64,
    pub iterations: usize,
    pub restarts: usize,
    pub seed: u64,
}

struct Reduced {
    /// Orthonormal basis of the complement of `ker L` (columns).
    range: DMatrix<f64>,
    kernel: DMatrix<f64>,
}

fn reduce<L: SlipNorm + ?Sized>(l: &L) -> Reduced {
    let a = l.linear_part();
    let k = l.dim();
    // right singular vectors via the k×k Gram matrix
    let g = a.transpose() * &a;
    let eig = g.symmetric_eigen();
    let top = eig.eigenvalues.iter().cloned().fold(0.0, f64::max);
    let (mut range, mut kernel) = (Vec::new(), Vec::new());
    for i in 0..k {
        let v = eig.eigenvectors.column(i).into_owned();
        if eig.eigenvalues[i] > 1e-20 * top.max(1e-300) && top > 0.0 {
            range.push(v);
        } else {
            kernel.push(v);
        }
    }
    let mat = |vs: Vec<DVector<f64>>| if vs.is_empty() { DMatrix::zeros(k, 0) } else { DMatrix::from_columns(&vs) };
    Reduced { range: mat(range), kernel: mat(kernel) }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// `−l·y / L_τ(By)`, minimized by L-BFGS.
struct SmoothRatio<'a, L: SlipNorm + ?Sized> {
    l: &'a L,
    range: &'a DMatrix<f64>,
    lt: &'a DVector<f64>,
    tau: f64,
    /// Cost normalization, so the iterates do not depend on the scale of `L`.
    unit: f64,
}

impl<L: SlipNorm + ?Sized> SmoothRatio<'_, L> {
    fn parts(&self, p: &[f64]) -> (f64, f64, Vec<f64>) {
        let y = DVector::from_column_slice(p);
        let c: Vec<f64> = (self.range * &y).iter().cloned().collect();
        let (v, g) = self.l.smoothed(&c, self.tau).expect("smoothing available");
        (self.lt.dot(&y), v, g)
    }
}

impl<L: SlipNorm + ?Sized> CostFunction for SmoothRatio<'_, L> {
    type Param = Vec<f64>;
    type Output = f64;
    fn cost(&self, p: &Vec<f64>) -> Result<f64, ArgminError> {
        let (num, v, _) = self.parts(p);
        Ok(-num / v / self.unit)
    }
}

impl<L: SlipNorm + ?Sized> Gradient for SmoothRatio<'_, L> {
    type Param = Vec<f64>;
    type Gradient = Vec<f64>;
    fn gradient(&self, p: &Vec<f64>) -> Result<Vec<f64>, ArgminError> {
        let (num, v, g) = self.parts(p);
        let gy = self.range.transpose() * DVector::from_vec(g);
        Ok(self.lt.iter().zip(gy.iter()).map(|(a, b)| -(a - num / v * b) / v / self.unit).collect())
    }
}

/// Ascent of `l·c / L(c)` keeping `L(c) = 1` by rescaling. When `L` has a
/// smooth majorant, gradient stages at decreasing temperature come first;
/// projected-subgradient steps finish. Returns the best value of the true
/// ratio with its normalized point, in reduced coordinates.
fn ascend<L: SlipNorm + ?Sized>(l: &L, red: &Reduced, lt: &DVector<f64>, y0: DVector<f64>, iters: usize) -> (f64, DVector<f64>) {
    let lift = |y: &DVector<f64>| -> Vec<f64> { (&red.range * y).iter().cloned().collect() };
    let down = |g: Vec<f64>| red.range.transpose() * DVector::from_vec(g);
    let mut best = (f64::NEG_INFINITY, y0.clone());
    let track = |y: &DVector<f64>, best: &mut (f64, DVector<f64>)| {
        let v = l.eval(&lift(y)).0;
        if v > 0.0 {
            let phi = lt.dot(y).abs() / v;
            if phi > best.0 {
                *best = (phi, y * (lt.dot(y).signum() / v));
            }
        }
    };
    track(&y0, &mut best);
    let mut y = y0;
    let mut left = iters;
    if l.smoothed(&lift(&y), 1.0).is_some() {
        let stage = iters / 16;
        for s in 0..8 {
            let tau = 0.1 * 0.3f64.powi(s);
            let y1 = &y / y.norm();
            let l1 = l.eval(&lift(&y1)).0;
            let problem = SmoothRatio { l, range: &red.range, lt, tau: tau * l1, unit: lt.norm() / l1 };
            let init: Vec<f64> = y1.iter().cloned().collect();
            let solver = LBFGS::new(MoreThuenteLineSearch::new(), 8);
            if let Ok(res) = Executor::new(problem, solver).configure(|st| st.param(init).max_iters(stage as u64)).run() {
                if let Some(p) = res.state().get_best_param() {
                    y = DVector::from_vec(p.clone());
                }
            }
            track(&y, &mut best);
            left -= stage;
        }
        y = best.1.clone();
    }
    let mut t0 = 0.3;
    let mut since = 0;
    for k in 0..left {
        let (v, mut s) = l.eval(&lift(&y));
        if !(v > 0.0) {
            break;
        }
        y /= v;
        if lt.dot(&y) < 0.0 {
            // L(−y) = L(y), with subgradient −s
            y = -y;
            s.iter_mut().for_each(|x| *x = -*x);
        }
        let phi = lt.dot(&y);
        if phi > best.0 * (1.0 + 1e-12) {
            best = (phi, y.clone());
            since = 0;
        } else {
            since += 1;
            if since >= 100 {
                t0 *= 0.5;
                since = 0;
                y = best.1.clone();
                if t0 < 1e-9 {
                    break;
                }
                continue;
            }
        }
        let g = lt - down(s) * phi;
        let gn = g.norm();
        if gn < 1e-14 * lt.norm() {
            break;
        }
        y += g * (t0 / ((k + 1) as f64).sqrt() * y.norm() / gn);
    }
    best
}

/// Lower bound on `d_L(μ, ν)` from state values on the span basis.
pub fn mk_distance<L: SlipNorm + ?Sized>(mu: &[f64], nu: &[f64], l: &L, budget: Budget, seed: u64) -> Result<MkResult, MetricError> {
    let k = l.dim();
    for v in [mu, nu] {
        if v.len() != k {
            return Err(MetricError::DimensionMismatch { expected: k, got: v.len() });
        }
    }
    let diff: Vec<f64> = mu.iter().zip(nu).map(|(a, b)| a - b).collect();
    let mut out = MkResult {
        bound: 0.0,
        witness: vec![0.0; k],
        witness_lipschitz: 0.0,
        infinite: false,
        spread: 0.0,
        iterations: budget.iterations,
        restarts: budget.restarts,
        seed,
    };
    let lv = DVector::from_vec(diff.clone());
    if lv.norm() == 0.0 {
        return Ok(out);
    }
    let red = reduce(l);
    let pk = red.kernel.transpose() * &lv;
    if pk.norm() > 1e-9 * lv.norm() {
        // L vanishes on a separating element
        let x = &red.kernel * &pk / pk.norm();
        out.witness = x.iter().cloned().collect();
        out.bound = f64::INFINITY;
        out.infinite = true;
        return Ok(out);
    }
    let lt = red.range.transpose() * &lv;
    let m = lt.len();
    let runs: Vec<(f64, DVector<f64>)> = (0..budget.restarts.max(1))
        .into_par_iter()
        .map(|r| {
            let y0 = if r == 0 {
                lt.clone()
            } else {
                let mut rng = sample_rng(seed, r);
                DVector::from_fn(m, |_, _| rng.sample::<f64, _>(StandardNormal))
            };
            ascend(l, &red, &lt, y0, budget.iterations)
        })
        .collect();
    let mut best = 0;
    for (i, r) in runs.iter().enumerate() {
        if r.0 > runs[best].0 {
            best = i;
        }
    }
    let worst = runs.iter().map(|r| r.0).fold(f64::INFINITY, f64::min);
    let c: Vec<f64> = (&red.range * &runs[best].1).iter().cloned().collect();
    let u = l.upper(&c);
    let witness: Vec<f64> = c.iter().map(|x| x / u).collect();
    out.bound = dot(&diff, &witness).abs();
    out.witness_lipschitz = l.upper(&witness);
    out.witness = witness;
    out.spread = runs[best].0 - worst;
    Ok(out)
}

/// `c · L`.
pub struct Scaled<'a, L: SlipNorm + ?Sized>(pub f64, pub &'a L);

impl<L: SlipNorm + ?Sized> SlipNorm for Scaled<'_, L> {
    fn dim(&self) -> usize {
        self.1.dim()
    }
    fn eval(&self, c: &[f64]) -> (f64, Vec<f64>) {
        let (v, g) = self.1.eval(c);
        (self.0 * v, g.into_iter().map(|x| self.0 * x).collect())
    }
    fn upper(&self, c: &[f64]) -> f64 {
        self.0 * self.1.upper(c)
    }
    fn linear_part(&self) -> DMatrix<f64> {
        self.1.linear_part() * self.0
    }
    fn smoothed(&self, c: &[f64], tau: f64) -> Option<(f64, Vec<f64>)> {
        let (v, g) = self.1.smoothed(c, tau / self.0)?;
        Some((self.0 * v, g.into_iter().map(|x| self.0 * x).collect()))
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct NetReport {
    pub eps: f64,
    pub samples: usize,
    pub net_size: usize,
    /// Largest distance from a fresh sample of the ball to the net.
    pub max_uncovered: f64,
    /// The ball modulo scalars is unbounded (`L` vanishes on a non-scalar).
    pub unbounded: bool,
    pub note: String,
}

/// Greedy ε-net, in operator norm modulo scalars, of samples from
/// `{x : L(x) ≤ 1}`.
pub fn ball_total_boundedness<S: Span + ?Sized, L: SlipNorm + ?Sized>(span: &S, l: &L, eps: f64, samples: usize, seed: u64) -> NetReport {
    assert!(eps > 0.0, "ε must be positive");
    let note = "diagnostic at finite dimension, not a proof of total boundedness".to_string();
    let k = span.dim();
    let red = reduce(l);
    let quotient = |c: &[f64]| {
        let mut c = c.to_vec();
        c[0] -= span.scalar_part(&c);
        c
    };
    for j in 0..red.kernel.ncols() {
        let v: Vec<f64> = red.kernel.column(j).iter().cloned().collect();
        if span.norm(&quotient(&v)) > 1e-9 {
            return NetReport { eps, samples, net_size: 0, max_uncovered: f64::INFINITY, unbounded: true, note };
        }
    }
    let m = red.range.ncols();
    let draw = |i: usize| -> Vec<f64> {
        if m == 0 {
            return vec![0.0; k];
        }
        let mut rng = sample_rng(seed, i);
        let y = DVector::from_fn(m, |_, _| rng.sample::<f64, _>(StandardNormal));
        let c: Vec<f64> = (&red.range * y).iter().cloned().collect();
        let radius = rng.gen::<f64>().powf(1.0 / m as f64) / l.upper(&c);
        quotient(&c.iter().map(|x| x * radius).collect::<Vec<_>>())
    };
    let dist = |a: &[f64], b: &[f64]| span.norm(&a.iter().zip(b).map(|(x, y)| x - y).collect::<Vec<_>>());
    let mut net: Vec<Vec<f64>> = Vec::new();
    for i in 0..samples {
        let x = draw(i);
        if net.iter().all(|p| dist(p, &x) > eps) {
            net.push(x);
        }
    }
    let max_uncovered = (samples..2 * samples)
        .into_par_iter()
        .map(|i| {
            let x = draw(i);
            net.iter().map(|p| dist(p, &x)).fold(f64::INFINITY, f64::min)
        })
        .reduce(|| 0.0, f64::max);
    NetReport { eps, samples, net_size: net.len(), max_uncovered, unbounded: false, note }
}

#[derive(Clone, Debug, Serialize)]
pub struct LiReport {
    pub kind: SeminormKind,
    pub full: f64,
    /// `(n, L(P_n(a)))` for `n` in the support.
    pub pieces: Vec<(i32, f64)>,
    /// `max_n L(P_n(a)) − L(a)`.
    pub worst_excess: f64,
    pub tol: f64,
    pub passed: bool,
}

/// `L(P_n(a)) ≤ L(a) + tol` for every spectral component of `a`.
pub fn li_estimate_check(sn: &Seminorms, kind: SeminormKind, a: &Element, tol: f64) -> Result<LiReport, MetricError> {
    let rep = sn.rep();
    let legs = if kind == SeminormKind::Ver { Legs::vertical(&sn.sphere, a) } else { sn.legs(a)? };
    let full = legs.norm(rep, kind, &|_| ONE)?;
    let mut pieces = Vec::new();
    for p in &legs.parts {
        let v = legs.norm(rep, kind, &|n| if n == p.degree { ONE } else { C64::new(0.0, 0.0) })?;
        pieces.push((p.degree, v));
    }
    let worst_excess = pieces.iter().map(|&(_, v)| v - full).fold(f64::NEG_INFINITY, f64::max);
    Ok(LiReport { kind, full, pieces, worst_excess, tol, passed: !(worst_excess > tol) })
}

/// Self-adjoint span of the sphere from words with at most `degree` unstarred
/// and `degree` starred letters, realized in the truncated representation.
pub struct SphereSpan {
    pub labels: Vec<String>,
    pub elements: Vec<(Element, C64)>,
    /// `ops[b][k]`: family/adjoint block `b` of basis element `k`.
    ops: Vec<Vec<Fourier>>,
    /// Diagonal of the θ-averaged top-family matrix, per interior vector.
    diag: Vec<Vec<f64>>,
    /// Circle degree `Σk` per interior vector of the top family.
    labels_top: Vec<i32>,
}

impl SphereSpan {
    /// The span with `L_tot` (r = 1).
    pub fn new(sn: &Seminorms, degree: usize) -> Result<(Self, FourierNorm), MetricError> {
        Self::with_kind(sn, degree, SeminormKind::Tot)
    }

    pub fn with_kind(sn: &Seminorms, degree: usize, kind: SeminormKind) -> Result<(Self, FourierNorm), MetricError> {
        let s = &sn.sphere;
        let rep = sn.rep();
        let n = s.n();
        let mut elements = vec![(Element::one(), ONE)];
        let mut labels = vec!["1".to_string()];
        for w in s.normal_words(2 * degree) {
            let unstarred = w.0.iter().filter(|&&l| (l as usize) < n).count();
            if w.len() == 0 || unstarred > degree || w.len() - unstarred > degree {
                continue;
            }
            let x = Element::term(w.clone(), Scalar::one());
            let xs = s.star(&x);
            if xs == x {
                labels.push(s.display(&x));
                elements.push((x, ONE));
                continue;
            }
            // one representative per {w, w*} when w* is a single word
            let mut ts = xs.terms();
            if let (Some((w2, _)), None) = (ts.next(), ts.next()) {
                if w2.0 < w.0 {
                    continue;
                }
            }
            let name = s.display(&x);
            labels.push(format!("re({name})"));
            elements.push((&x + &xs, ONE));
            labels.push(format!("im({name})"));
            elements.push((&x - &xs, C64::new(0.0, -1.0)));
        }
        let mut ops = Vec::new();
        let mut lip = Vec::new();
        let all_legs: Vec<Legs> = if kind == SeminormKind::Ver {
            elements.iter().map(|(e, _)| Legs::vertical(s, e)).collect()
        } else {
            elements.iter().map(|(e, _)| sn.legs(e)).collect::<Result<_, _>>()?
        };
        for fam in &rep.families {
            for adj in [false, true] {
                let mut o = Vec::new();
                let mut d = Vec::new();
                for ((e, c), legs) in elements.iter().zip(&all_legs) {
                    let raw = rep.raw(e);
                    let raw = if adj { rep.adjoint(&raw) } else { raw };
                    o.push(rep.fourier(fam, &raw)?.scaled(if adj { c.conj() } else { *c }));
                    d.push(legs.fourier(rep, fam, kind, &|_| ONE, adj)?.scaled(if adj { c.conj() } else { *c }));
                }
                ops.push(o);
                lip.push(d);
            }
        }
        let top = rep.top();
        let diag = ops[0]
            .iter()
            .map(|f| {
                let z = CMat::zeros(f.rows, f.cols);
                let m0 = f.coeffs.get(&0).unwrap_or(&z);
                top.interior.iter().enumerate().map(|(col, &row)| m0[(row, col)].re).collect()
            })
            .collect();
        let labels_top = top.interior.iter().map(|&i| top.label[i]).collect();
        Ok((SphereSpan { labels, elements, ops, diag, labels_top }, FourierNorm { blocks: lip }))
    }

    /// Vector state on the top family: `vac` (all quantum numbers zero) or
    /// `shiftM` (first interior basis vector with `Σk = M`).
    pub fn state(&self, name: &str) -> Result<Vec<f64>, MetricError> {
        let m: i32 = match name {
            "vac" => 0,
            _ => name.strip_prefix("shift").and_then(|t| t.parse().ok()).ok_or_else(|| MetricError::UnknownState(name.into()))?,
        };
        let col = self.labels_top.iter().position(|&l| l == m).ok_or_else(|| MetricError::UnknownState(name.into()))?;
        Ok(self.diag.iter().map(|d| d[col]).collect())
    }
}

impl Span for SphereSpan {
    fn dim(&self) -> usize {
        self.elements.len()
    }
    fn labels(&self) -> Vec<String> {
        self.labels.clone()
    }
    fn norm(&self, c: &[f64]) -> f64 {
        self.ops.iter().map(|b| combine_fourier(b, c).sup_norm()).fold(0.0, f64::max)
    }
    fn scalar_part(&self, c: &[f64]) -> f64 {
        let n = self.diag[0].len() as f64;
        self.diag.iter().zip(c).map(|(d, ck)| ck * d.iter().sum::<f64>() / n).sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_PI_2;

    fn two_point(c: f64) -> (MatrixSpan, DerivationNorm) {
        let diag = |a: f64, b: f64| CMat::from_diagonal(&CVec::from_vec(vec![C64::new(a, 0.0), C64::new(b, 0.0)]));
        let span = MatrixSpan::new(vec!["1".into(), "e1".into()], vec![diag(1.0, 1.0), diag(1.0, 0.0)]).unwrap();
        let l = DerivationNorm { images: vec![CMat::zeros(1, 1), CMat::from_element(1, 1, C64::new(c, 0.0))] };
        (span, l)
    }

    fn delta(i: usize) -> StateSpec {
        let mut v = CVec::zeros(2);
        v[i] = ONE;
        StateSpec::Vector(v)
    }

    #[test]
    fn two_point_distance_is_inverse_constant() {
        for c in [0.5, 1.0, 3.0] {
            let (span, l) = two_point(c);
            let (mu, nu) = (span.state_values(&delta(0)).unwrap(), span.state_values(&delta(1)).unwrap());
            let r = mk_distance(&mu, &nu, &l, Budget { iterations: 50, restarts: 2 }, 1).unwrap();
            assert!((r.bound - 1.0 / c).abs() < 1e-9, "{c}: {}", r.bound);
            assert!(r.witness_lipschitz <= 1.0 + 1e-9);
            assert_eq!(mk_distance(&mu, &mu, &l, Budget::default(), 1).unwrap().bound, 0.0);
        }
    }

    #[test]
    fn vanishing_seminorm_gives_infinite_distance() {
        let (span, _) = two_point(1.0);
        let l = DerivationNorm { images: vec![CMat::zeros(1, 1); 2] };
        let (mu, nu) = (span.state_values(&delta(0)).unwrap(), span.state_values(&delta(1)).unwrap());
        let r = mk_distance(&mu, &nu, &l, Budget::default(), 1).unwrap();
        assert!(r.infinite && r.bound.is_infinite());
    }

    #[test]
    fn states_are_validated() {
        let (span, _) = two_point(1.0);
        let bad = StateSpec::Vector(CVec::from_vec(vec![ONE, ONE]));
        assert!(matches!(span.state_values(&bad), Err(MetricError::NotAState(_))));
        let rho = CMat::from_diagonal(&CVec::from_vec(vec![C64::new(1.5, 0.0), C64::new(-0.5, 0.0)]));
        assert!(span.state_values(&StateSpec::Density(rho)).is_err());
        assert!(span.state_values(&StateSpec::Values(vec![0.5, 0.0])).is_err());
    }

    #[test]
    fn scaling_divides_distance() {
        let l = CircleLipschitz::new(4, 256, 4096);
        let (mu, nu) = (circle_basis_at(4, 0.0), circle_basis_at(4, 1.0));
        let diff: Vec<f64> = mu.iter().zip(&nu).map(|(a, b)| a - b).collect();
        let b = Budget { iterations: 2000, restarts: 2 };
        let d1 = mk_distance(&mu, &nu, &l, b, 3).unwrap();
        // the rescaled witness is admissible for 3L and attains d/3 exactly
        let w3: Vec<f64> = d1.witness.iter().map(|x| x / 3.0).collect();
        assert!(Scaled(3.0, &l).upper(&w3) <= 1.0 + 1e-12);
        assert!((dot(&diff, &w3).abs() - d1.bound / 3.0).abs() <= 1e-15 * d1.bound);
        let d3 = mk_distance(&mu, &nu, &Scaled(3.0, &l), b, 3).unwrap();
        assert!((3.0 * d3.bound - d1.bound).abs() < 1e-5 * d1.bound, "{} {}", d1.bound, 3.0 * d3.bound);
        // never beyond arc length
        assert!(d1.bound <= 1.0 + 1e-9 && d1.bound > 0.9);
    }

    #[test]
    fn circle_quarter_turn_is_near_arc_length() {
        let l = CircleLipschitz::new(20, 2048, 1 << 16);
        let (mu, nu) = (circle_basis_at(20, 0.0), circle_basis_at(20, FRAC_PI_2));
        let r = mk_distance(&mu, &nu, &l, Budget::default(), 7).unwrap();
        assert!(r.witness_lipschitz <= 1.0 + 1e-9);
        assert!(r.bound <= FRAC_PI_2 && r.bound >= 0.98 * FRAC_PI_2, "{}", r.bound);
    }

    #[test]
    fn net_of_scalars_is_a_point() {
        let span = MatrixSpan::new(vec!["1".into()], vec![CMat::identity(2, 2)]).unwrap();
        let l = DerivationNorm { images: vec![CMat::zeros(1, 1)] };
        let r = ball_total_boundedness(&span, &l, 0.1, 20, 1);
        assert_eq!((r.net_size, r.max_uncovered, r.unbounded), (1, 0.0, false));
    }

    #[test]
    fn net_of_interval_has_covering_size() {
        // quotient ball is {(t, −t)/2 : |t| ≤ 1/c}, an interval of length 1/c
        let c = 2.0;
        let (span, l) = two_point(c);
        let eps = 0.02;
        let r = ball_total_boundedness(&span, &l, eps, 2000, 5);
        let len = 1.0 / c;
        assert!(r.net_size >= (len / (2.0 * eps)).ceil() as usize && r.net_size <= (len / eps).ceil() as usize + 1, "{}", r.net_size);
        assert!(r.max_uncovered <= 2.0 * eps);
    }

    #[test]
    fn unbounded_ball_is_flagged() {
        let (span, _) = two_point(1.0);
        let l = DerivationNorm { images: vec![CMat::zeros(1, 1); 2] };
        assert!(ball_total_boundedness(&span, &l, 0.1, 10, 1).unbounded);
    }

    #[test]
    fn li_estimate_on_homogeneous_and_mixed() {
        let sn = Seminorms::new(1, 0.5, 12).unwrap();
        let s = &sn.sphere;
        let z1 = s.z(1);
        let r = li_estimate_check(&sn, SeminormKind::Ver, &z1, 1e-10).unwrap();
        assert!(r.passed && r.worst_excess.abs() < 1e-12);
        let a = &z1 + &s.zs(1);
        for kind in [SeminormKind::Ver, SeminormKind::Tot] {
            let r = li_estimate_check(&sn, kind, &a, 1e-8).unwrap();
            assert!(r.passed && r.pieces.len() == 2, "{r:?}");
        }
    }

    #[test]
    fn sphere_metric_runs_and_is_certified() {
        let sn = Seminorms::new(1, 0.5, 12).unwrap();
        let (span, l) = SphereSpan::new(&sn, 1).unwrap();
        assert_eq!(span.labels[0], "1");
        let (mu, nu) = (span.state("vac").unwrap(), span.state("shift1").unwrap());
        assert!((mu[0] - 1.0).abs() < 1e-12 && (nu[0] - 1.0).abs() < 1e-12);
        let r = mk_distance(&mu, &nu, &l, Budget { iterations: 60, restarts: 2 }, 1).unwrap();
        assert!(!r.infinite && r.bound > 0.0 && r.witness_lipschitz <= 1.0 + 1e-9, "{r:?}");
        let net = ball_total_boundedness(&span, &l, 0.25, 60, 2);
        assert!(!net.unbounded && net.net_size >= 1);
    }
}
