//! Circle bundles over finite-dimensional base triples.
//!
//! The total space is `G = ⊕_{|n|≤B} H_n` with `H_0` the base. A degree-n
//! element is a block family `H_m → H_{m+n}`. A degree-n frame is a family
//! `ζ_{n,j}: H_0 → H_n` with `Σ_j ζ_{n,j} ζ_{n,j}* = 1`; the module `X_n` is
//! all maps `H_0 → H_n` (even ones in the graded case) and `X_n ⊗ H_0 ≅ H_n`
//! through `x ⊗ ξ ↦ xξ`, so every module tensor product is a plain matrix.
//!
//! The ambient operator `D_H = ⊕_m μ^m Σ_j ζ_{m,j} D_0 ζ_{m,j}*` is the only
//! block-diagonal choice for which the twisted derivation
//! `δ(a) = D_H a − μ^n a D_H` makes every frame satisfy `Σ_j ζ_j δ(ζ_j*) = 0`
//! on `H_n`. It is assembled from the closed formula; the lifts are
//! assembled from the Grassmann connection, so comparing the two is a real
//! check.

use nalgebra::RealField;
use num_complex::Complex;
use rand::Rng;
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::linalg::{
    cx, hermitian_residual, randn_c, randn_vec, random_hermitian, random_isometry, re, spectral_norm, to_f64,
    to_t, unitary_flow, vec_norm, vec_to_t, CMat, CVec,
};
use crate::report::Check;
use crate::suites::sample_rng;

#[derive(Debug, thiserror::Error)]
pub enum FdError {
    #[error("frame identity violated in degree {degree}: residual {residual:e}")]
    InvalidFrame { degree: i32, residual: f64 },
    #[error("structure error: {0}")]
    Structure(String),
}

/// Tolerance for the frame identity in double precision.
pub const FRAME_TOL: f64 = 1e-12;

/// Frame tolerance for scalar type `T`: `FRAME_TOL`, or a few hundred ulps
/// for coarser types.
pub fn frame_tol<T: RealField + Copy>() -> T {
    let e = T::default_epsilon() * re::<T>(512.0);
    let t = re::<T>(FRAME_TOL);
    if e > t { e } else { t }
}

#[derive(Clone, Debug)]
pub struct BundleDatum<T: RealField + Copy> {
    pub mu: T,
    /// Twist used by the degree formula `β_i(a) = μ^{-n/2} a`. Equal to
    /// `mu` for honest data; a different value models a mis-specified twist.
    pub beta_mu: T,
    /// Blocks run over `-bound..=bound`.
    pub bound: i32,
    pub dims: Vec<usize>,
    /// Graded data: number of even basis vectors per block (listed first).
    pub even: Option<Vec<usize>>,
    pub d0: CMat<T>,
    /// `frames[n + bound]` = degree-n frame, maps `H_0 → H_n`.
    pub frames: Vec<Vec<CMat<T>>>,
}

pub type BundleDatumF64 = BundleDatum<f64>;

#[derive(Clone, Copy, Debug)]
pub struct DatumSpec {
    pub bound: i32,
    /// Dimension of `H_0` (even when graded).
    pub base_dim: usize,
    /// Largest dimension of a block `H_n`, `n ≠ 0`.
    pub max_block: usize,
    pub graded: bool,
    pub mu: f64,
}

impl Default for DatumSpec {
    fn default() -> Self {
        DatumSpec { bound: 8, base_dim: 4, max_block: 6, graded: true, mu: 1.25 }
    }
}

/// Stacks `k` frame elements `H_0 → H_n` out of an isometry `W: H_n → H_0^k`.
fn frame_from_isometry(w: &CMat<f64>, d0: usize, k: usize) -> Vec<CMat<f64>> {
    (0..k).map(|j| w.rows(j * d0, d0).adjoint()).collect()
}

/// Places the even/odd parts of a map side by side (block diagonal).
fn block_diag(a: &CMat<f64>, b: &CMat<f64>) -> CMat<f64> {
    let mut m = CMat::zeros(a.nrows() + b.nrows(), a.ncols() + b.ncols());
    m.view_mut((0, 0), a.shape()).copy_from(a);
    m.view_mut(a.shape(), b.shape()).copy_from(b);
    m
}

impl<T: RealField + Copy> BundleDatum<T> {
    pub fn random<R: Rng>(rng: &mut R, spec: &DatumSpec) -> Self {
        let b = spec.bound;
        let d0 = spec.base_dim;
        let mut dims = Vec::new();
        let mut even = Vec::new();
        let mut frames = Vec::new();
        for n in -b..=b {
            if n == 0 {
                dims.push(d0);
                even.push(d0 / 2);
                frames.push(vec![CMat::<f64>::identity(d0, d0)]);
                continue;
            }
            if spec.graded {
                let (h0p, h0m) = (d0 / 2, d0 - d0 / 2);
                let half = (spec.max_block / 2).max(1);
                let (p, m) = (rng.gen_range(1..=half), rng.gen_range(1..=half));
                let k = p.div_ceil(h0p).max(m.div_ceil(h0m)) + rng.gen_range(0..=1);
                let wp = random_isometry(rng, k * h0p, p);
                let wm = random_isometry(rng, k * h0m, m);
                let fp = frame_from_isometry(&wp, h0p, k);
                let fm = frame_from_isometry(&wm, h0m, k);
                frames.push(fp.iter().zip(&fm).map(|(a, c)| block_diag(a, c)).collect());
                dims.push(p + m);
                even.push(p);
            } else {
                let dn = rng.gen_range(1..=spec.max_block);
                let k = dn.div_ceil(d0) + rng.gen_range(0..=1);
                frames.push(frame_from_isometry(&random_isometry(rng, k * d0, dn), d0, k));
                dims.push(dn);
                even.push(0);
            }
        }
        let d0m = if spec.graded {
            let t = randn_c(rng, d0 / 2, d0 - d0 / 2);
            let z = CMat::zeros(d0 / 2, d0 / 2);
            let z2 = CMat::zeros(d0 - d0 / 2, d0 - d0 / 2);
            let mut m = block_diag(&z, &z2);
            m.view_mut((0, d0 / 2), t.shape()).copy_from(&t);
            m.view_mut((d0 / 2, 0), (t.ncols(), t.nrows())).copy_from(&t.adjoint());
            m
        } else {
            random_hermitian(rng, d0)
        };
        BundleDatum {
            mu: re(spec.mu),
            beta_mu: re(spec.mu),
            bound: b,
            dims,
            even: spec.graded.then_some(even),
            d0: to_t(&d0m),
            frames: frames.iter().map(|f| f.iter().map(to_t).collect()).collect(),
        }
    }

    /// The trivial datum: a single block `H_0` with frame {1}.
    pub fn trivial(d0: CMat<T>, mu: T) -> Self {
        let d = d0.nrows();
        BundleDatum { mu, beta_mu: mu, bound: 0, dims: vec![d], even: None, d0, frames: vec![vec![CMat::identity(d, d)]] }
    }

    pub fn graded(&self) -> bool {
        self.even.is_some()
    }

    pub fn idx(&self, n: i32) -> usize {
        (n + self.bound) as usize
    }

    pub fn frame(&self, n: i32) -> &[CMat<T>] {
        &self.frames[self.idx(n)]
    }

    pub fn total_dim(&self) -> usize {
        self.dims.iter().sum()
    }

    pub fn validate(&self) -> Result<(), FdError> {
        let tol = frame_tol::<T>();
        if hermitian_residual(&self.d0) > tol {
            return Err(FdError::Structure("D_0 is not self-adjoint".into()));
        }
        for n in -self.bound..=self.bound {
            let dn = self.dims[self.idx(n)];
            let mut s = CMat::<T>::zeros(dn, dn);
            for z in self.frame(n) {
                if z.shape() != (dn, self.d0.nrows()) {
                    return Err(FdError::Structure(format!("frame element of degree {n} has wrong shape")));
                }
                s += z * z.adjoint();
            }
            let res = spectral_norm(&(s - CMat::identity(dn, dn)));
            if !(res <= tol) {
                return Err(FdError::InvalidFrame { degree: n, residual: to_f64(res) });
            }
        }
        if let Some(ev) = &self.even {
            let g0 = self.grading_block(0, ev);
            if spectral_norm(&(&g0 * &self.d0 + &self.d0 * &g0)) > tol {
                return Err(FdError::Structure("D_0 does not anticommute with γ_0".into()));
            }
            for n in -self.bound..=self.bound {
                let gn = self.grading_block(n, ev);
                for z in self.frame(n) {
                    if spectral_norm(&(&gn * z - z * &g0)) > tol {
                        return Err(FdError::Structure(format!("frame element of degree {n} is not even")));
                    }
                }
            }
        }
        Ok(())
    }

    fn grading_block(&self, n: i32, ev: &[usize]) -> CMat<T> {
        let (d, p) = (self.dims[self.idx(n)], ev[self.idx(n)]);
        CMat::from_fn(d, d, |i, j| if i != j { cx(T::zero()) } else if i < p { cx(T::one()) } else { cx(-T::one()) })
    }

    pub fn with_beta_mu(mut self, beta_mu: T) -> Self {
        self.beta_mu = beta_mu;
        self
    }
}

impl BundleDatum<f64> {
    /// JSON form; matrices are nested arrays of `[re, im]` pairs.
    pub fn to_json(&self) -> Value {
        let mat = |m: &CMat<f64>| -> Value {
            Value::Array((0..m.nrows()).map(|i| Value::Array((0..m.ncols()).map(|j| json!([m[(i, j)].re, m[(i, j)].im])).collect())).collect())
        };
        json!({
            "mu": self.mu,
            "beta_mu": self.beta_mu,
            "bound": self.bound,
            "dims": self.dims,
            "even": self.even,
            "d0": mat(&self.d0),
            "frames": self.frames.iter().map(|f| f.iter().map(mat).collect::<Vec<_>>()).collect::<Vec<_>>(),
        })
    }

    pub fn from_json(v: &Value) -> Result<Self, FdError> {
        let bad = |what: &str| FdError::Structure(format!("malformed datum JSON: {what}"));
        let mat = |v: &Value| -> Result<CMat<f64>, FdError> {
            let rows = v.as_array().ok_or_else(|| bad("matrix"))?;
            let nr = rows.len();
            let nc = rows.first().and_then(|r| r.as_array()).map_or(0, |r| r.len());
            let mut m = CMat::zeros(nr, nc);
            for (i, r) in rows.iter().enumerate() {
                let r = r.as_array().filter(|r| r.len() == nc).ok_or_else(|| bad("row"))?;
                for (j, z) in r.iter().enumerate() {
                    let p = z.as_array().filter(|p| p.len() == 2).ok_or_else(|| bad("entry"))?;
                    m[(i, j)] = Complex::new(p[0].as_f64().ok_or_else(|| bad("re"))?, p[1].as_f64().ok_or_else(|| bad("im"))?);
                }
            }
            Ok(m)
        };
        let mu = v["mu"].as_f64().ok_or_else(|| bad("mu"))?;
        let d = BundleDatum {
            mu,
            beta_mu: v["beta_mu"].as_f64().unwrap_or(mu),
            bound: v["bound"].as_i64().ok_or_else(|| bad("bound"))? as i32,
            dims: serde_json::from_value(v["dims"].clone()).map_err(|_| bad("dims"))?,
            even: serde_json::from_value(v["even"].clone()).map_err(|_| bad("even"))?,
            d0: mat(&v["d0"])?,
            frames: v["frames"]
                .as_array()
                .ok_or_else(|| bad("frames"))?
                .iter()
                .map(|f| f.as_array().ok_or_else(|| bad("frame"))?.iter().map(mat).collect())
                .collect::<Result<_, _>>()?,
        };
        if d.dims.len() != (2 * d.bound + 1) as usize || d.frames.len() != d.dims.len() {
            return Err(bad("block count"));
        }
        Ok(d)
    }
}

/// `δ_0(a) = [D_0, a]`.
pub fn delta0<T: RealField + Copy>(d0: &CMat<T>, a: &CMat<T>) -> CMat<T> {
    d0 * a - a * d0
}

/// Grassmann connection `∇(x) = Σ_j ζ_j ⊗ δ_0(ζ_j* x)` of one frame.
#[derive(Clone, Copy, Debug)]
pub struct Connection<'a, T: RealField + Copy> {
    pub frame: &'a [CMat<T>],
    pub d0: &'a CMat<T>,
}

pub fn grassmann_connection<'a, T: RealField + Copy>(frame: &'a [CMat<T>], d0: &'a CMat<T>) -> Result<Connection<'a, T>, FdError> {
    let dn = frame.first().map_or(0, |z| z.nrows());
    let mut s = CMat::<T>::zeros(dn, dn);
    for z in frame {
        s += z * z.adjoint();
    }
    let res = spectral_norm(&(s - CMat::identity(dn, dn)));
    if !(res <= frame_tol::<T>()) {
        return Err(FdError::InvalidFrame { degree: 0, residual: to_f64(res) });
    }
    Ok(Connection { frame, d0 })
}

impl<T: RealField + Copy> Connection<'_, T> {
    /// Coefficients `δ_0(ζ_j* x)` of `∇(x)` against the frame.
    pub fn apply(&self, x: &CMat<T>) -> Vec<CMat<T>> {
        self.frame.iter().map(|z| delta0(self.d0, &(z.adjoint() * x))).collect()
    }

    /// `Σ_j y_j ω_j` for a tensor `Σ_j y_j ⊗ ω_j`: the operator `ξ ↦ ev_ξ`.
    pub fn phi(&self, coeffs: &[CMat<T>]) -> CMat<T> {
        self.frame.iter().zip(coeffs).fold(CMat::zeros(self.frame[0].nrows(), self.d0.ncols()), |acc, (z, w)| acc + z * w)
    }

    pub fn eval(&self, x: &CMat<T>) -> CMat<T> {
        self.phi(&self.apply(x))
    }

    /// Residual of `∇(xa) = ∇(x)a + x ⊗ δ_0(a)`.
    pub fn leibniz_residual(&self, x: &CMat<T>, a: &CMat<T>) -> T {
        let lhs = self.eval(&(x * a));
        let rhs = self.eval(x) * a + x * delta0(self.d0, a);
        spectral_norm(&(lhs - rhs))
    }

    /// Residual of `δ_0(⟨x1,x2⟩) = θ*_{x1}∇(x2) − (θ*_{x2}∇(x1))*`.
    pub fn hermitian_residual(&self, x1: &CMat<T>, x2: &CMat<T>) -> T {
        let lhs = delta0(self.d0, &(x1.adjoint() * x2));
        let t12 = x1.adjoint() * self.eval(x2);
        let t21 = x2.adjoint() * self.eval(x1);
        spectral_norm(&(lhs - t12 + t21.adjoint()))
    }

    /// Residual of oddness `γ_n ev_ξ∇(x) = −ev_{γ_0 ξ}∇(x)`.
    pub fn odd_residual(&self, x: &CMat<T>, gn: &CMat<T>, g0: &CMat<T>) -> T {
        let e = self.eval(x);
        spectral_norm(&(gn * &e + e * g0))
    }
}

/// Horizontal lift on `H_n`, from the connection: on `x ⊗ ξ` it is
/// `ev_ξ ∇(x) + x ⊗ D_0 ξ`, applied to the frame decomposition
/// `η = Σ_i ζ_i ⊗ ζ_i* η` of every vector.
pub fn horizontal_lift<T: RealField + Copy>(frame: &[CMat<T>], d0: &CMat<T>) -> Result<CMat<T>, FdError> {
    let c = grassmann_connection(frame, d0)?;
    let dn = frame[0].nrows();
    let mut l = CMat::zeros(dn, dn);
    for z in frame {
        l += (c.eval(z) + z * d0) * z.adjoint();
    }
    Ok(l)
}

/// The closed formula `Σ_j ζ_j D_0 ζ_j*`.
pub fn horizontal_lift_formula<T: RealField + Copy>(frame: &[CMat<T>], d0: &CMat<T>) -> CMat<T> {
    let dn = frame[0].nrows();
    frame.iter().fold(CMat::zeros(dn, dn), |acc, z| acc + z * d0 * z.adjoint())
}

/// Homogeneous element: a `d × d` matrix of pure degree.
#[derive(Clone, Debug)]
pub struct Homogeneous<T: RealField + Copy> {
    pub degree: i32,
    pub m: CMat<T>,
}

/// A datum with its lifts assembled on `G`.
#[derive(Clone, Debug)]
pub struct Bundle<T: RealField + Copy> {
    pub datum: BundleDatum<T>,
    pub offsets: Vec<usize>,
    pub dim: usize,
    /// `⊕_n 1 ⊗_∇ D_0` (connection route).
    pub lift: CMat<T>,
    /// `D_Γ = Γ² (1 ⊗_∇ D_0)`.
    pub d_gamma: CMat<T>,
    /// Ambient `D_H` from the closed formula.
    pub d_amb: CMat<T>,
    /// Per-basis-vector block label, `Γ` weight and grading sign.
    pub label: Vec<i32>,
    pub gamma_w: Vec<T>,
    pub sign: Option<Vec<T>>,
}

impl<T: RealField + Copy> Bundle<T> {
    pub fn new(datum: BundleDatum<T>) -> Result<Self, FdError> {
        datum.validate()?;
        let b = datum.bound;
        let mut offsets = vec![0];
        for d in &datum.dims {
            offsets.push(offsets.last().unwrap() + d);
        }
        let dim = *offsets.last().unwrap();
        let mut lift = CMat::zeros(dim, dim);
        let mut d_amb = CMat::zeros(dim, dim);
        let mut label = Vec::with_capacity(dim);
        let mut gamma_w = Vec::with_capacity(dim);
        let mut sign = Vec::with_capacity(dim);
        for n in -b..=b {
            let i = datum.idx(n);
            let (o, dn) = (offsets[i], datum.dims[i]);
            let f = datum.frame(n);
            lift.view_mut((o, o), (dn, dn)).copy_from(&horizontal_lift(f, &datum.d0)?);
            let scale = cx(datum.mu.powi(n));
            d_amb.view_mut((o, o), (dn, dn)).copy_from(&(horizontal_lift_formula(f, &datum.d0) * scale));
            let w = datum.mu.powf(re::<T>(n as f64 / 2.0));
            for k in 0..dn {
                label.push(n);
                gamma_w.push(w);
                if let Some(ev) = &datum.even {
                    sign.push(if k < ev[i] { T::one() } else { -T::one() });
                }
            }
        }
        let d_gamma = CMat::from_fn(dim, dim, |r, c| lift[(r, c)] * cx(gamma_w[r] * gamma_w[c]));
        let sign = datum.even.is_some().then_some(sign);
        Ok(Bundle { datum, offsets, dim, lift, d_gamma, d_amb, label, gamma_w, sign })
    }

    pub fn mu(&self) -> T {
        self.datum.mu
    }

    pub fn graded(&self) -> bool {
        self.sign.is_some()
    }

    pub fn range(&self, n: i32) -> std::ops::Range<usize> {
        let i = self.datum.idx(n);
        self.offsets[i]..self.offsets[i + 1]
    }

    fn dim_of(&self, n: i32) -> usize {
        self.datum.dims[self.datum.idx(n)]
    }

    pub fn in_range(&self, n: i32) -> bool {
        n.abs() <= self.datum.bound
    }

    /// `(block of a)` from `H_m` to `H_{m+n}`.
    pub fn block(&self, a: &CMat<T>, to: i32, from: i32) -> CMat<T> {
        let (r, c) = (self.range(to), self.range(from));
        a.view((r.start, c.start), (r.len(), c.len())).into_owned()
    }

    fn set_block(&self, a: &mut CMat<T>, to: i32, from: i32, v: &CMat<T>) {
        let (r, c) = (self.range(to), self.range(from));
        a.view_mut((r.start, c.start), (r.len(), c.len())).copy_from(v);
    }

    pub fn grading(&self) -> Option<CMat<T>> {
        self.sign.as_ref().map(|s| crate::linalg::diag(s))
    }

    pub fn n_op(&self) -> CMat<T> {
        crate::linalg::diag(&self.label.iter().map(|&n| re::<T>(n as f64)).collect::<Vec<_>>())
    }

    /// Random map `H_from → H_to` (even if graded), entries of size ~1/√dim.
    fn random_map<R: Rng>(&self, rng: &mut R, to: i32, from: i32) -> CMat<T> {
        let (dt, df) = (self.dim_of(to), self.dim_of(from));
        let mut m = randn_c(rng, dt, df) * Complex::new(1.0 / ((dt + df) as f64).sqrt(), 0.0);
        if let Some(ev) = &self.datum.even {
            let (pt, pf) = (ev[self.datum.idx(to)], ev[self.datum.idx(from)]);
            for i in 0..dt {
                for j in 0..df {
                    if (i < pt) != (j < pf) {
                        m[(i, j)] = Complex::new(0.0, 0.0);
                    }
                }
            }
        }
        to_t(&m)
    }

    /// Random element of `X_n` (a map `H_0 → H_n`).
    pub fn random_module_vector<R: Rng>(&self, rng: &mut R, n: i32) -> CMat<T> {
        self.random_map(rng, n, 0)
    }

    /// Random degree-n element with every admissible block filled.
    pub fn random_homogeneous<R: Rng>(&self, rng: &mut R, n: i32) -> Homogeneous<T> {
        let mut a = CMat::zeros(self.dim, self.dim);
        let b = self.datum.bound;
        for m in -b..=b {
            if self.in_range(m + n) {
                let blk = self.random_map(rng, m + n, m);
                self.set_block(&mut a, m + n, m, &blk);
            }
        }
        Homogeneous { degree: n, m: a }
    }

    /// Random element with components in degrees `-max_deg..=max_deg`.
    pub fn random_element<R: Rng>(&self, rng: &mut R, max_deg: i32) -> CMat<T> {
        (-max_deg..=max_deg).fold(CMat::zeros(self.dim, self.dim), |acc, n| acc + self.random_homogeneous(rng, n).m)
    }

    /// Spectral projection `P_n(a)`.
    pub fn project(&self, a: &CMat<T>, n: i32) -> CMat<T> {
        CMat::from_fn(self.dim, self.dim, |r, c| if self.label[r] - self.label[c] == n { a[(r, c)] } else { cx(T::zero()) })
    }

    /// `W a W^{-1}` for a diagonal `W = diag(left)`, `diag(right)` on the right.
    fn scale(&self, a: &CMat<T>, f: impl Fn(usize, usize) -> Complex<T>) -> CMat<T> {
        CMat::from_fn(a.nrows(), a.ncols(), |r, c| a[(r, c)] * f(r, c))
    }

    /// `β_i(a) = Γ^{-1} a Γ`.
    pub fn beta_i(&self, a: &CMat<T>) -> CMat<T> {
        self.scale(a, |r, c| cx(self.gamma_w[c] / self.gamma_w[r]))
    }

    /// `β_{-i}(a) = Γ a Γ^{-1}`.
    pub fn beta_minus_i(&self, a: &CMat<T>) -> CMat<T> {
        self.scale(a, |r, c| cx(self.gamma_w[r] / self.gamma_w[c]))
    }

    /// `σ_λ(a)`, conjugation by `diag(λ^n)`.
    pub fn sigma(&self, lambda: Complex<T>, a: &CMat<T>) -> CMat<T> {
        self.scale(a, |r, c| lambda.powi(self.label[r] - self.label[c]))
    }

    pub fn delta_ver(&self, a: &CMat<T>) -> CMat<T> {
        self.scale(a, |r, c| cx(re::<T>((self.label[r] - self.label[c]) as f64)))
    }

    /// `δ_hor(a) = D_Γ β_i(a) − β_{-i}(a) D_Γ`.
    pub fn delta_hor(&self, a: &CMat<T>) -> CMat<T> {
        &self.d_gamma * self.beta_i(a) - self.beta_minus_i(a) * &self.d_gamma
    }

    /// Ambient twisted derivation `δ(a) = D_H a − μ^n a D_H` on a degree-n element.
    pub fn delta_amb(&self, a: &Homogeneous<T>) -> CMat<T> {
        &self.d_amb * &a.m - &a.m * &self.d_amb * cx(self.mu().powi(a.degree))
    }

    pub fn l_ver(&self, a: &CMat<T>) -> T {
        spectral_norm(&self.delta_ver(a))
    }

    pub fn l_hor(&self, a: &CMat<T>) -> T {
        spectral_norm(&self.delta_hor(a))
    }

    /// Graded: `‖γ δ_ver(a) + δ_hor(a)‖`; ungraded: `max ‖δ_ver(a) ± i δ_hor(a)‖`.
    pub fn l_tot(&self, a: &CMat<T>) -> T {
        let v = self.delta_ver(a);
        let h = self.delta_hor(a);
        match self.grading() {
            Some(g) => spectral_norm(&(g * v + h)),
            None => {
                let i = Complex::new(T::zero(), T::one());
                let p = spectral_norm(&(&v + &h * i));
                let m = spectral_norm(&(&v - &h * i));
                if p > m { p } else { m }
            }
        }
    }

    /// Graded: `Nγ + D_Γ`; ungraded: `[[0, N + iD_Γ], [N − iD_Γ, 0]]` on `G ⊕ G`.
    pub fn product_operator(&self) -> CMat<T> {
        let n = self.n_op();
        match self.grading() {
            Some(g) => n * g + &self.d_gamma,
            None => {
                let i = Complex::new(T::zero(), T::one());
                let d = self.dim;
                let mut p = CMat::zeros(2 * d, 2 * d);
                p.view_mut((0, d), (d, d)).copy_from(&(&n + &self.d_gamma * i));
                p.view_mut((d, 0), (d, d)).copy_from(&(&n - &self.d_gamma * i));
                p
            }
        }
    }

    /// The vertical leg of the product operator (`Nγ`, or `[[0,N],[N,0]]`).
    pub fn vertical_leg(&self) -> CMat<T> {
        let n = self.n_op();
        match self.grading() {
            Some(g) => n * g,
            None => {
                let d = self.dim;
                let mut p = CMat::zeros(2 * d, 2 * d);
                p.view_mut((0, d), (d, d)).copy_from(&n);
                p.view_mut((d, 0), (d, d)).copy_from(&n);
                p
            }
        }
    }

    /// Per block `n`: `(n, ‖(i + nγ_n + (D_Γ)_n)^{-1}‖, (1+n²)^{-1/2})`.
    /// Ungraded blocks use the off-diagonal form of the product operator.
    pub fn resolvent_norms(&self) -> Vec<(i32, T, T)> {
        let b = self.datum.bound;
        (-b..=b)
            .map(|n| {
                let r = self.range(n);
                let dg = self.d_gamma.view((r.start, r.start), (r.len(), r.len())).into_owned();
                let nn = re::<T>(n as f64);
                let i = Complex::new(T::zero(), T::one());
                let blk = match &self.sign {
                    Some(s) => dg + crate::linalg::diag(&s[r.clone()].iter().map(|&x| x * nn).collect::<Vec<_>>()),
                    None => {
                        let d = r.len();
                        let id = CMat::<T>::identity(d, d) * cx(nn);
                        let mut p = CMat::zeros(2 * d, 2 * d);
                        p.view_mut((0, d), (d, d)).copy_from(&(&id + &dg * i));
                        p.view_mut((d, 0), (d, d)).copy_from(&(&id - &dg * i));
                        p
                    }
                };
                let k = blk.nrows();
                let m = CMat::identity(k, k) * i + blk;
                // ‖M^{-1}‖ = 1/σ_min(M)
                let smin = m.singular_values().iter().fold(T::max_value().unwrap(), |a, &b| if b < a { b } else { a });
                (n, T::one() / smin, T::one() / (T::one() + nn * nn).sqrt())
            })
            .collect()
    }
}

/// Christensen-type comparison for a bounded `t` grid: returns
/// `(‖[D,T]‖, max_t ‖e^{itD} T e^{-itD} − T‖/|t|, value at the smallest |t|)`.
pub fn christensen<T: RealField + Copy>(t_op: &CMat<T>, d: &CMat<T>, grid: &[T]) -> (T, T, T) {
    let comm = spectral_norm(&(d * t_op - t_op * d));
    let mut best = T::zero();
    let mut at_small = (T::max_value().unwrap(), T::zero());
    for &t in grid {
        let u = unitary_flow(d, t);
        let q = spectral_norm(&(&u * t_op * u.adjoint() - t_op)) / t.abs();
        if q > best {
            best = q;
        }
        if t.abs() < at_small.0 {
            at_small = (t.abs(), q);
        }
    }
    (comm, best, at_small.1)
}

/// Default grid: `±10^{-k/2}`, k = 0..=8 (smallest |t| is 1e-4), plus ±1e-3.
pub fn default_grid<T: RealField + Copy>() -> Vec<T> {
    let mut g: Vec<f64> = (0..=8).map(|k| 10f64.powf(-(k as f64) / 2.0)).collect();
    g.push(1e-3);
    g.iter().flat_map(|&t| [t, -t]).map(re::<T>).collect()
}

/// Christensen comparison on `count` random pairs (`T` Gaussian, `D`
/// Hermitian) of size `dim`: `sup_t ‖e^{itD}Te^{-itD} − T‖/|t| ≤ ‖[D, T]‖`,
/// with relative gap at `t = 10^{-3}` below `gap_tol`.
pub fn christensen_suite(count: usize, dim: usize, seed: u64, gap_tol: f64) -> Check {
    let grid: Vec<f64> = vec![1e-3, -1e-3, 1e-1, 1.0];
    let rows: Vec<(f64, f64)> = (0..count)
        .into_par_iter()
        .map(|i| {
            let mut rng = sample_rng(seed ^ 0xc4, i);
            let t = randn_c(&mut rng, dim, dim);
            let d = random_hermitian(&mut rng, dim);
            let (comm, sup, _) = christensen(&t, &d, &grid);
            let (_, _, small) = christensen(&t, &d, &[1e-3]);
            ((sup - comm) / comm, (comm - small) / comm)
        })
        .collect();
    let mut acc = (f64::NEG_INFINITY, None);
    for (i, &(over, gap)) in rows.iter().enumerate() {
        if over > 1e-12 {
            acc = (f64::INFINITY, Some(format!("pair #{i}: quotient exceeds ‖[D,T]‖ by {over:e}")));
            break;
        }
        worst(&mut acc, gap, || format!("pair #{i}: relative gap {gap:e} at t = 1e-3"));
    }
    let mut c = Check::bound("christensen", "sup_t ‖e^{itD}Te^{-itD} − T‖/|t| = ‖[D,T]‖, attained as t → 0", Some(seed), count, acc.0, gap_tol, acc.1);
    c.note = Some(format!("{dim}×{dim} pairs; value = worst relative gap at t = 1e-3"));
    c
}

// ---------------------------------------------------------------------------
// Checks. Residuals are measured relative to max(1, size of the terms).

fn rel<T: RealField + Copy>(res: T, scale: T) -> f64 {
    to_f64(res / if scale > T::one() { scale } else { T::one() })
}

fn worst(acc: &mut (f64, Option<String>), v: f64, what: impl FnOnce() -> String) {
    if v > acc.0 || v.is_nan() {
        *acc = (v, Some(what()));
    }
}

pub struct SuiteParams {
    pub seed: u64,
    pub samples: usize,
}

/// Hermitian-connection conditions for every degree's Grassmann connection.
pub fn check_connection<T: RealField + Copy>(bu: &Bundle<T>, p: &SuiteParams) -> Check {
    let mut acc = (0.0, None);
    let b = bu.datum.bound;
    let g0 = bu.grading().map(|g| bu.block(&g, 0, 0));
    for s in 0..p.samples {
        let mut rng = sample_rng(p.seed, s);
        for n in -b..=b {
            let c = grassmann_connection(bu.datum.frame(n), &bu.datum.d0).expect("validated");
            let x1 = bu.random_module_vector(&mut rng, n);
            let x2 = bu.random_module_vector(&mut rng, n);
            let a = bu.random_map(&mut rng, 0, 0);
            let l = c.leibniz_residual(&x1, &a);
            worst(&mut acc, rel(l, spectral_norm(&c.eval(&(&x1 * &a)))), || format!("Leibniz, degree {n}, sample {s}"));
            let h = c.hermitian_residual(&x1, &x2);
            worst(&mut acc, rel(h, spectral_norm(&delta0(&bu.datum.d0, &(x1.adjoint() * &x2)))), || format!("Hermiticity, degree {n}, sample {s}"));
            if let (Some(g), Some(g0)) = (bu.grading(), &g0) {
                let gn = bu.block(&g, n, n);
                worst(&mut acc, to_f64(c.odd_residual(&x1, &gn, g0)), || format!("oddness, degree {n}, sample {s}"));
            }
        }
    }
    Check::bound(
        "hermitian-connection",
        "∇(xa) = ∇(x)a + x⊗δ_0(a); δ_0(⟨x1,x2⟩) = θ*_{x1}∇(x2) − (θ*_{x2}∇(x1))*; ∇ odd when graded",
        Some(p.seed),
        p.samples,
        acc.0,
        1e-12,
        acc.1,
    )
}

/// Connection route vs `Σ ζ D_0 ζ*`, and self-adjointness of the lift and `D_Γ`.
pub fn check_lifts<T: RealField + Copy>(bu: &Bundle<T>) -> Check {
    let mut acc = (0.0, None);
    let b = bu.datum.bound;
    for n in -b..=b {
        let f = bu.datum.frame(n);
        let l = horizontal_lift(f, &bu.datum.d0).expect("validated");
        let lf = horizontal_lift_formula(f, &bu.datum.d0);
        worst(&mut acc, rel(spectral_norm(&(&l - &lf)), spectral_norm(&lf)), || format!("closed formula, degree {n}"));
    }
    worst(&mut acc, rel(hermitian_residual(&bu.lift), spectral_norm(&bu.lift)), || "lift not self-adjoint".into());
    worst(&mut acc, rel(hermitian_residual(&bu.d_gamma), spectral_norm(&bu.d_gamma)), || "D_Γ not self-adjoint".into());
    Check::bound(
        "horizontal-lift",
        "(1⊗_∇D_0)(x⊗ξ) = Σ_j ζ_j⊗D_0(⟨ζ_j,x⟩ξ), self-adjoint; D_Γ self-adjoint",
        None,
        1,
        acc.0,
        1e-12,
        acc.1,
    )
}

/// `γ D_Γ + D_Γ γ = 0` (graded data only).
pub fn check_anticommutation<T: RealField + Copy>(bu: &Bundle<T>) -> Check {
    let v = match bu.grading() {
        Some(g) => rel(spectral_norm(&(&g * &bu.d_gamma + &bu.d_gamma * &g)), spectral_norm(&bu.d_gamma)),
        None => 0.0,
    };
    let c = Check::bound("gamma-anticommutation", "(1⊗γ_0) D_Γ = −D_Γ (1⊗γ_0)", None, 1, v, 1e-13, None);
    if bu.graded() { c } else { c.with_note("ungraded datum: vacuous") }
}

/// `D_Γ(aξ) = δ(a)ξ + μ^n a D_0 ξ` for `a` of degree n, `ξ ∈ H_0`.
pub fn check_modular_formula<T: RealField + Copy>(bu: &Bundle<T>, p: &SuiteParams) -> Check {
    let mut acc = (0.0, None);
    let b = bu.datum.bound;
    let h0 = bu.range(0);
    for s in 0..p.samples {
        let mut rng = sample_rng(p.seed, s);
        for n in -b..=b {
            let a = bu.random_homogeneous(&mut rng, n);
            let xi0: CVec<T> = vec_to_t(&randn_vec(&mut rng, h0.len()));
            let mut xi = CVec::zeros(bu.dim);
            xi.rows_mut(h0.start, h0.len()).copy_from(&xi0);
            let lhs = &bu.d_gamma * (&a.m * &xi);
            let d0xi = &bu.datum.d0 * &xi0;
            let mut d0xi_full = CVec::zeros(bu.dim);
            d0xi_full.rows_mut(h0.start, h0.len()).copy_from(&d0xi);
            let rhs = bu.delta_amb(&a) * &xi + &a.m * d0xi_full * cx(bu.mu().powi(n));
            worst(&mut acc, rel(vec_norm(&(&lhs - &rhs)), vec_norm(&lhs)), || format!("degree {n}, sample {s}"));
        }
    }
    Check::bound("modular-lift-formula", "D_Γ(aξ) = δ(a)ξ + μ^n a D_0ξ for a of degree n, ξ ∈ H_0", Some(p.seed), p.samples, acc.0, 1e-12, acc.1)
}

/// `δ_Γ(a)|_{H_m} = μ^{-n/2} δ(a)|_{H_m}` for every block.
pub fn check_twisted_delta<T: RealField + Copy>(bu: &Bundle<T>, p: &SuiteParams) -> Check {
    let mut acc = (0.0, None);
    let b = bu.datum.bound;
    for s in 0..p.samples {
        let mut rng = sample_rng(p.seed, s);
        for n in -b..=b {
            let a = bu.random_homogeneous(&mut rng, n);
            let lhs = bu.delta_hor(&a.m);
            let rhs = bu.delta_amb(&a) * cx(bu.mu().powf(re::<T>(-n as f64 / 2.0)));
            for m in -b..=b {
                if !bu.in_range(m + n) {
                    continue;
                }
                let (l, r) = (bu.block(&lhs, m + n, m), bu.block(&rhs, m + n, m));
                worst(&mut acc, rel(spectral_norm(&(&l - &r)), spectral_norm(&l)), || format!("degree {n}, block {m}, sample {s}"));
            }
        }
    }
    Check::bound("twisted-delta-blockwise", "δ_Γ(a)η = μ^{-n/2} δ(a)η for a of degree n, η ∈ H_m", Some(p.seed), p.samples, acc.0, 1e-12, acc.1)
}

/// `[1⊗_∇D_0, a]` on `H_m`, computed through the connection, equals
/// `μ^{-n-m} δ(a)` there.
pub fn check_commutator_blocks<T: RealField + Copy>(bu: &Bundle<T>, p: &SuiteParams) -> Check {
    let mut acc = (0.0, None);
    let b = bu.datum.bound;
    let d0 = &bu.datum.d0;
    for s in 0..p.samples {
        let mut rng = sample_rng(p.seed, s);
        for n in -b..=b {
            let a = bu.random_homogeneous(&mut rng, n);
            let da = bu.delta_amb(&a);
            for m in -b..=b {
                if !bu.in_range(m + n) {
                    continue;
                }
                let am = bu.block(&a.m, m + n, m);
                let c_to = grassmann_connection(bu.datum.frame(m + n), d0).expect("validated");
                let c_from = grassmann_connection(bu.datum.frame(m), d0).expect("validated");
                // Σ_i [∇(aζ_i) − a∇(ζ_i)] evaluated, then composed with ζ_i*.
                let dm = bu.datum.frame(m).iter().fold(CMat::zeros(am.nrows(), am.ncols()), |acc, z| {
                    acc + (c_to.eval(&(&am * z)) - &am * c_from.eval(z)) * z.adjoint()
                });
                let want = bu.block(&da, m + n, m) * cx(bu.mu().powi(-n - m));
                worst(&mut acc, rel(spectral_norm(&(&dm - &want)), spectral_norm(&want)), || format!("degree {n}, block {m}, sample {s}"));
            }
        }
    }
    Check::bound("lift-commutator-blocks", "[1⊗_∇D_0, a]η = μ^{-n-m} δ(a)η for a of degree n, η ∈ H_m", Some(p.seed), p.samples, acc.0, 1e-12, acc.1)
}

/// `‖(i + nγ_n + (D_Γ)_n)^{-1}‖ ≤ (1+n²)^{-1/2}` on every block.
pub fn check_resolvent<T: RealField + Copy>(bu: &Bundle<T>) -> Check {
    let mut acc = (f64::NEG_INFINITY, None);
    for (n, v, bound) in bu.resolvent_norms() {
        let excess = to_f64(v - bound);
        worst(&mut acc, excess, || format!("block {n}: {:.6e} vs bound {:.6e}", to_f64(v), to_f64(bound)));
    }
    Check::bound(
        "resolvent-bound",
        "‖(i + nγ_n + (D_Γ)_n)^{-1}‖ ≤ (1+n²)^{-1/2} per block",
        None,
        bu.resolvent_norms().len(),
        acc.0.max(0.0),
        1e-12,
        acc.1,
    )
}

/// `⟨Pξ, Vξ⟩ + ⟨Vξ, Pξ⟩` for the product operator `P` and its vertical leg
/// `V`; it equals `2‖Vξ‖²` because the horizontal leg anticommutes with `V`.
/// Returns `(min value over samples, worst relative deviation from 2‖Vξ‖²)`.
pub fn kucerovsky<T: RealField + Copy>(bu: &Bundle<T>, seed: u64, samples: usize) -> (f64, f64) {
    let p = bu.product_operator();
    let v = bu.vertical_leg();
    let mut min_v = f64::INFINITY;
    let mut dev: f64 = 0.0;
    for s in 0..samples {
        let mut rng = sample_rng(seed, s);
        let xi: CVec<T> = vec_to_t(&randn_vec(&mut rng, p.nrows()));
        let (px, vx) = (&p * &xi, &v * &xi);
        let val = to_f64(px.dotc(&vx).re + vx.dotc(&px).re);
        let want = 2.0 * to_f64(vx.norm_squared());
        min_v = min_v.min(val);
        dev = dev.max((val - want).abs() / want.max(1.0));
    }
    (min_v, dev)
}

pub fn check_kucerovsky<T: RealField + Copy>(bu: &Bundle<T>, p: &SuiteParams) -> Check {
    let (min_v, dev) = kucerovsky(bu, p.seed, p.samples);
    let mut c = Check::bound(
        "kucerovsky-positivity",
        "⟨Pξ, Nγξ⟩ + ⟨Nγξ, Pξ⟩ = 2‖Nγξ‖² ≥ 0 for P = Nγ + D_Γ",
        Some(p.seed),
        p.samples,
        (-min_v).max(0.0),
        1e-12,
        None,
    );
    if dev > 1e-10 {
        c.passed = false;
        c.counterexample = Some(format!("deviation from 2‖Nγξ‖²: {dev:e}"));
    }
    c.with_note(&format!("min value {min_v:.6e}"))
}

/// For degree-0 `a`: `‖[D_0, a|_{H_0}]‖ ≤ ‖δ_hor(a)‖`.
pub fn check_base_domination<T: RealField + Copy>(bu: &Bundle<T>, p: &SuiteParams) -> Check {
    let mut acc = (f64::NEG_INFINITY, None);
    for s in 0..p.samples {
        let mut rng = sample_rng(p.seed, s);
        let a = bu.random_homogeneous(&mut rng, 0);
        let base = spectral_norm(&delta0(&bu.datum.d0, &bu.block(&a.m, 0, 0)));
        let hor = bu.l_hor(&a.m);
        worst(&mut acc, to_f64(base - hor), || format!("sample {s}: {:.6e} > {:.6e}", to_f64(base), to_f64(hor)));
    }
    Check::bound("base-domination", "‖[D_0, a]‖ ≤ L_hor(a) for a of degree 0", Some(p.seed), p.samples, acc.0.max(0.0), 1e-10, acc.1)
}

/// `L_hor(σ_λ(a)) = L_hor(a)` on sampled λ.
pub fn check_sigma_invariance<T: RealField + Copy>(bu: &Bundle<T>, p: &SuiteParams) -> Check {
    let mut acc = (0.0, None);
    for s in 0..p.samples {
        let mut rng = sample_rng(p.seed, s);
        let a = bu.random_element(&mut rng, 2);
        let base = bu.l_hor(&a);
        for k in 0..8 {
            let th = re::<T>(rng.gen_range(0.0..std::f64::consts::TAU));
            let lam = Complex::new(th.cos(), th.sin());
            let v = bu.l_hor(&bu.sigma(lam, &a));
            worst(&mut acc, rel((v - base).abs(), base), || format!("sample {s}, λ #{k}"));
        }
    }
    Check::bound("sigma-invariance", "L_hor(σ_λ(a)) = L_hor(a)", Some(p.seed), p.samples, acc.0, 1e-10, acc.1)
}

/// `δ_hor(P_0(a)) Q_n = Q_n δ_hor(a) Q_n` for the block projections `Q_n`.
pub fn check_block_projection<T: RealField + Copy>(bu: &Bundle<T>, p: &SuiteParams) -> Check {
    let mut acc = (0.0, None);
    let b = bu.datum.bound;
    for s in 0..p.samples {
        let mut rng = sample_rng(p.seed, s);
        let a = bu.random_element(&mut rng, 2);
        let lhs = bu.delta_hor(&bu.project(&a, 0));
        let rhs = bu.delta_hor(&a);
        for n in -b..=b {
            let (l, r) = (bu.block(&lhs, n, n), bu.block(&rhs, n, n));
            worst(&mut acc, rel(spectral_norm(&(&l - &r)), spectral_norm(&r)), || format!("block {n}, sample {s}"));
        }
    }
    Check::bound("degree-zero-compression", "δ_hor(P_0(a)) Q_n = Q_n δ_hor(a) Q_n", Some(p.seed), p.samples, acc.0, 1e-12, acc.1)
}

/// `‖[N,a]‖ = sup_t ‖σ_{e^{it}}(a) − a‖/|t|`: the grid sup never exceeds the
/// commutator norm, is nondecreasing under refinement and gets within 2%.
pub fn check_vertical_quotient<T: RealField + Copy>(bu: &Bundle<T>, p: &SuiteParams) -> Check {
    let mut acc = (0.0, None);
    let grid: Vec<f64> = (0..=12).map(|k| std::f64::consts::PI * 0.5f64.powi(k)).collect();
    for s in 0..p.samples {
        let mut rng = sample_rng(p.seed, s);
        let a = bu.random_element(&mut rng, 2);
        let comm = to_f64(bu.l_ver(&a));
        let mut sup: f64 = 0.0;
        let mut monotone = true;
        for &t in &grid {
            let lam = Complex::new(re::<T>(t.cos()), re::<T>(t.sin()));
            let q = to_f64(spectral_norm(&(bu.sigma(lam, &a) - &a))) / t;
            let new_sup = sup.max(q);
            monotone &= new_sup >= sup;
            sup = new_sup;
            if q > comm * (1.0 + 1e-10) {
                worst(&mut acc, f64::INFINITY, || format!("sample {s}: quotient {q} exceeds ‖[N,a]‖ = {comm}"));
            }
        }
        let gap = if comm > 0.0 { (comm - sup) / comm } else { 0.0 };
        worst(&mut acc, gap, || format!("sample {s}: gap {gap:.3e}"));
        if !monotone {
            worst(&mut acc, f64::INFINITY, || format!("sample {s}: refinement not monotone"));
        }
    }
    Check::bound("vertical-quotient", "‖[N,a]‖ = sup_t ‖σ_{e^{it}}(a) − a‖/|t| (relative gap on the grid)", Some(p.seed), p.samples, acc.0, 0.02, acc.1)
}

/// The quantum-metric hypotheses on a datum, with `L = L_ver + L_hor` and
/// `L_β = L_hor`. Compactness of the base is only a finite-dimensional
/// diagnostic.
pub fn li_hypotheses_check<T: RealField + Copy>(bu: &Bundle<T>, p: &SuiteParams) -> Vec<Check> {
    let mut out = Vec::new();
    let b = bu.datum.bound;
    out.push(
        Check::new("bundle-circle-invariance", "σ_λ(𝒜) ⊆ 𝒜 and 𝒜 ⊆ Lip(S¹)", 0, None, 1, None)
            .with_note("block families are closed under diag(λ^n) conjugation and have bounded [N,·]"),
    );
    let frame_fail = (-b..=b).find_map(|n| match grassmann_connection(bu.datum.frame(n), &bu.datum.d0) {
        Ok(_) => None,
        Err(e) => Some(format!("degree {n}: {e}")),
    });
    out.push(Check::new("bundle-frames", "Σ_j ζ_{n,j} ζ_{n,j}* = 1 in each degree", 0, None, (2 * b + 1) as usize, frame_fail));

    let mut dom: f64 = 0.0;
    let mut leib = (0.0, None);
    let mut leib_ineq = (f64::NEG_INFINITY, None);
    let mut inv = (0.0, None);
    let mut contr = (f64::NEG_INFINITY, None);
    let bm = bu.datum.beta_mu;
    for s in 0..p.samples {
        let mut rng = sample_rng(p.seed, s);
        let a = bu.random_element(&mut rng, 2);
        let (lv, lh) = (to_f64(bu.l_ver(&a)), to_f64(bu.l_hor(&a)));
        if lv + lh > 0.0 {
            dom = dom.max(lv.max(lh) / (lv + lh));
        }
        // twisted Leibniz with β from the degree formula β_i(x) = μ_β^{-n/2} x
        let (nx, ny) = (rng.gen_range(-2..=2), rng.gen_range(-2..=2));
        let x = bu.random_homogeneous(&mut rng, nx);
        let y = bu.random_homogeneous(&mut rng, ny);
        let bi = |h: &Homogeneous<T>| h.m.clone() * cx(bm.powf(re::<T>(-h.degree as f64 / 2.0)));
        let bmi = |h: &Homogeneous<T>| h.m.clone() * cx(bm.powf(re::<T>(h.degree as f64 / 2.0)));
        let lhs = bu.delta_hor(&(&x.m * &y.m));
        let rhs = bu.delta_hor(&x.m) * bi(&y) + bmi(&x) * bu.delta_hor(&y.m);
        worst(&mut leib, rel(spectral_norm(&(&lhs - &rhs)), spectral_norm(&lhs)), || {
            format!("pair #{s}: degrees ({}, {})", x.degree, y.degree)
        });
        let ineq = spectral_norm(&lhs)
            - (bu.l_hor(&x.m) * spectral_norm(&bi(&y)) + spectral_norm(&bmi(&x)) * bu.l_hor(&y.m));
        worst(&mut leib_ineq, to_f64(ineq), || format!("pair #{s}"));
        let th = re::<T>(rng.gen_range(0.0..std::f64::consts::TAU));
        let lh2 = bu.l_hor(&bu.sigma(Complex::new(th.cos(), th.sin()), &a));
        worst(&mut inv, rel((lh2 - re::<T>(lh)).abs(), re::<T>(lh)), || format!("sample {s}"));
        let l_all = lv + lh;
        for n in -2..=2 {
            let pn = bu.project(&a, n);
            let v = to_f64(bu.l_ver(&pn) + bu.l_hor(&pn)) - l_all;
            worst(&mut contr, v, || format!("sample {s}, component {n}"));
        }
    }
    out.push(
        Check::bound("bundle-domination", "L_ver, L_hor ≤ C·L with L = L_ver + L_hor", Some(p.seed), p.samples, dom, 1.0 + 1e-12, None)
            .with_note(&format!("C = {dom:.6}")),
    );
    let mut c4 = Check::bound(
        "bundle-twisted-leibniz",
        "δ_hor(ab) = δ_hor(a)β_i(b) + β_{-i}(a)δ_hor(b), β_i(a) = μ^{-n/2}a",
        Some(p.seed),
        p.samples,
        leib.0,
        1e-12,
        leib.1,
    );
    if leib_ineq.0 > 1e-10 {
        c4.passed = false;
        c4.counterexample = Some(format!("inequality violated by {:.3e} ({})", leib_ineq.0, leib_ineq.1.unwrap_or_default()));
    }
    out.push(c4);
    out.push(Check::bound("bundle-invariance", "L_hor(σ_λ(a)) = L_hor(a)", Some(p.seed), p.samples, inv.0, 1e-10, inv.1));
    out.push(
        Check::new("bundle-base-compactness", "(𝒜_0, L_hor) is a compact quantum metric space", 0, None, 0, None)
            .with_note("diagnostic, not proof: finite-dimensional base, see the metrics total-boundedness report"),
    );
    out.push(Check::bound("spectral-contraction", "L(P_n(a)) ≤ L(a)", Some(p.seed), p.samples, contr.0.max(0.0), 1e-10, contr.1));
    out
}

/// Every structural check on one datum.
pub fn structural_suite<T: RealField + Copy>(bu: &Bundle<T>, p: &SuiteParams) -> Vec<Check> {
    let mut v = vec![
        check_connection(bu, p),
        check_lifts(bu),
        check_anticommutation(bu),
        check_modular_formula(bu, p),
        check_twisted_delta(bu, p),
        check_commutator_blocks(bu, p),
        check_resolvent(bu),
        check_kucerovsky(bu, p),
        check_base_domination(bu, p),
        check_sigma_invariance(bu, p),
        check_block_projection(bu, p),
        check_vertical_quotient(bu, p),
    ];
    v.extend(li_hypotheses_check(bu, p));
    v
}

/// Runs [`structural_suite`] on `count` random data (alternating graded and
/// ungraded) and merges each check by worst value.
pub fn random_data_suite(count: usize, seed: u64, samples: usize, spec: &DatumSpec) -> Vec<Check> {
    let per: Vec<Vec<Check>> = (0..count)
        .into_par_iter()
        .map(|i| {
            let mut rng = sample_rng(seed ^ 0xfdb, i);
            let mus = [1.0, 1.25, 0.8, 1.5, 2.0];
            let spec = DatumSpec { graded: i % 2 == 0, mu: if i < mus.len() { mus[i] } else { rng.gen_range(0.6..1.6) }, ..*spec };
            let bu = Bundle::<f64>::new(BundleDatum::random(&mut rng, &spec)).expect("random data are valid");
            let mut checks = structural_suite(&bu, &SuiteParams { seed: seed.wrapping_add(i as u64), samples });
            for c in &mut checks {
                if let Some(w) = &mut c.counterexample {
                    *w = format!("datum #{i} (graded = {}, μ = {}): {w}", spec.graded, spec.mu);
                }
            }
            checks
        })
        .collect();
    let mut merged = per[0].clone();
    for checks in &per[1..] {
        for (m, c) in merged.iter_mut().zip(checks) {
            m.samples += c.samples;
            if let (Some(a), Some(b)) = (m.value, c.value) {
                if b > a {
                    m.value = Some(b);
                }
            }
            if m.passed && !c.passed {
                m.passed = false;
                m.counterexample = c.counterexample.clone();
            }
        }
    }
    for m in &mut merged {
        m.seed = Some(seed);
        if m.note.as_deref().is_some_and(|n| n.starts_with("min value") || n.starts_with("C = ")) {
            m.note = None;
        }
    }
    merged
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn c(x: f64) -> Complex<f64> {
        Complex::new(x, 0.0)
    }

    fn small(graded: bool, mu: f64, seed: u64) -> Bundle<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let spec = DatumSpec { bound: 3, base_dim: 4, max_block: 6, graded, mu };
        Bundle::new(BundleDatum::random(&mut rng, &spec)).unwrap()
    }

    #[test]
    fn trivial_frame_connection_is_delta0() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let d0 = random_hermitian(&mut rng, 3);
        let one = [CMat::<f64>::identity(3, 3)];
        let con = grassmann_connection(&one, &d0).unwrap();
        let x = randn_c(&mut rng, 3, 3);
        assert!(spectral_norm(&(con.eval(&x) - delta0(&d0, &x))) < 1e-14);
        assert!(spectral_norm(&(horizontal_lift(&one, &d0).unwrap() - &d0)) < 1e-14);
    }

    #[test]
    fn unitary_frame_kills_its_element() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let d0 = random_hermitian(&mut rng, 3);
        let u = random_isometry(&mut rng, 3, 3);
        let f = [u.clone()];
        let con = grassmann_connection(&f, &d0).unwrap();
        assert!(spectral_norm(&con.eval(&u)) < 1e-13);
    }

    #[test]
    fn invalid_frame_is_rejected() {
        let d0 = CMat::<f64>::identity(2, 2);
        let f = [CMat::<f64>::identity(2, 2) * c(0.5)];
        assert!(matches!(grassmann_connection(&f, &d0), Err(FdError::InvalidFrame { .. })));
    }

    #[test]
    fn two_element_frame_in_six_dims() {
        // H_0 = ℂ³, H_1 = ℂ³, frame of two elements: total dimension 6.
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let d0 = random_hermitian(&mut rng, 3);
        let w = random_isometry(&mut rng, 6, 3);
        let f = frame_from_isometry(&w, 3, 2);
        let con = grassmann_connection(&f, &d0).unwrap();
        let x1 = randn_c(&mut rng, 3, 3);
        let x2 = randn_c(&mut rng, 3, 3);
        assert!(con.hermitian_residual(&x1, &x2) < 1e-12);
        assert!(con.leibniz_residual(&x1, &randn_c(&mut rng, 3, 3)) < 1e-12);
    }

    #[test]
    fn lift_is_mu_independent_and_modular_scales() {
        let a = small(false, 1.0, 6);
        let mut d = a.datum.clone();
        d.mu = 0.5;
        d.beta_mu = 0.5;
        let b = Bundle::new(d).unwrap();
        assert!(spectral_norm(&(&a.lift - &b.lift)) < 1e-14);
        assert!(spectral_norm(&(&a.d_gamma - &a.lift)) < 1e-14);
        for n in -3..=3 {
            let blk = b.block(&b.d_gamma, n, n) - b.block(&b.lift, n, n) * c(0.5f64.powi(n));
            assert!(spectral_norm(&blk) < 1e-12);
        }
    }

    #[test]
    fn vertical_and_horizontal_basics() {
        let bu = small(true, 1.5, 7);
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let a0 = bu.random_homogeneous(&mut rng, 0);
        assert!(spectral_norm(&bu.delta_ver(&a0.m)) < 1e-15);
        let a2 = bu.random_homogeneous(&mut rng, 2);
        assert!((bu.l_ver(&a2.m) - 2.0 * spectral_norm(&a2.m)).abs() < 1e-12);
        let one = CMat::<f64>::identity(bu.dim, bu.dim);
        assert!(bu.l_tot(&one) < 1e-12);
        let x = bu.random_element(&mut rng, 2);
        assert!((bu.l_tot(&x) - bu.l_tot(&x.adjoint())).abs() < 1e-10);
        // sign-flip: ‖γδ_ver + δ_hor‖ = ‖γδ_ver − δ_hor‖
        let g = bu.grading().unwrap();
        let v = &g * bu.delta_ver(&x);
        let h = bu.delta_hor(&x);
        assert!((spectral_norm(&(&v + &h)) - spectral_norm(&(&v - &h))).abs() < 1e-10);
    }

    #[test]
    fn mu_one_gives_plain_commutator() {
        let bu = small(false, 1.0, 9);
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        let x = bu.random_element(&mut rng, 2);
        let comm = &bu.lift * &x - &x * &bu.lift;
        assert!(spectral_norm(&(bu.delta_hor(&x) - comm)) < 1e-12);
    }

    #[test]
    fn resolvent_values() {
        let bu = small(true, 1.25, 11);
        for (n, v, b) in bu.resolvent_norms() {
            assert!(v <= b + 1e-12, "block {n}");
            if n == 0 {
                assert!((b - 1.0).abs() < 1e-15);
            }
            if n == 3 {
                assert!((b - 10f64.powf(-0.5)).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn christensen_closed_form_two_by_two() {
        let d = crate::linalg::diag(&[0.0, 1.0]);
        let mut t = CMat::<f64>::zeros(2, 2);
        t[(0, 1)] = c(1.0);
        let (comm, sup, small) = christensen(&t, &d, &default_grid());
        assert!((comm - 1.0).abs() < 1e-14);
        assert!(sup <= 1.0 + 1e-12 && small > 1.0 - 1e-8);
        let dd = crate::linalg::diag(&[0.3, -1.0, 2.0]);
        let td = crate::linalg::diag(&[1.0, 5.0, -2.0]);
        let (c0, s0, _) = christensen(&td, &dd, &default_grid());
        assert!(c0 < 1e-15 && s0 < 1e-10);
    }

    #[test]
    fn christensen_gap_is_small() {
        let c = christensen_suite(10, 8, 3, 0.02);
        assert!(c.passed, "{c:?}");
    }

    #[test]
    fn structural_suite_passes_on_small_data() {
        for (graded, mu, seed) in [(true, 1.25, 12), (false, 0.8, 13), (true, 2.0, 14)] {
            let bu = small(graded, mu, seed);
            for ch in structural_suite(&bu, &SuiteParams { seed, samples: 3 }) {
                assert!(ch.passed, "{}: {:?} {:?}", ch.id, ch.value, ch.counterexample);
            }
        }
    }

    #[test]
    fn wrong_twist_breaks_leibniz() {
        let bu = small(true, 1.5, 15);
        let mut d = bu.datum.clone();
        d.beta_mu = 1.2;
        let bad = Bundle::new(d).unwrap();
        let checks = li_hypotheses_check(&bad, &SuiteParams { seed: 1, samples: 4 });
        let c4 = checks.iter().find(|c| c.id == "bundle-twisted-leibniz").unwrap();
        assert!(!c4.passed && c4.counterexample.is_some());
    }

    #[test]
    fn trivial_datum_passes() {
        let mut rng = ChaCha8Rng::seed_from_u64(16);
        let d0 = to_t::<f64>(&random_hermitian(&mut rng, 3));
        let bu = Bundle::new(BundleDatum::trivial(d0, 1.0)).unwrap();
        for ch in li_hypotheses_check(&bu, &SuiteParams { seed: 2, samples: 3 }) {
            assert!(ch.passed, "{}", ch.id);
        }
    }

    #[test]
    fn json_round_trip() {
        let bu = small(true, 1.25, 17);
        let v = bu.datum.to_json();
        let back = BundleDatum::from_json(&v).unwrap();
        assert_eq!(back.to_json(), v);
    }

    #[test]
    fn generic_over_f32() {
        let mut rng = ChaCha8Rng::seed_from_u64(18);
        let spec = DatumSpec { bound: 2, base_dim: 2, max_block: 2, graded: true, mu: 1.25 };
        let d = BundleDatum::<f32>::random(&mut rng, &spec);
        let bu = Bundle::new(d).unwrap();
        let lf = horizontal_lift_formula(bu.datum.frame(1), &bu.datum.d0);
        assert!(hermitian_residual(&lf) < 1e-5);
    }
}
