//! Truncated weighted-shift representations of the sphere and numeric
//! operator norms of represented elements.
//!
//! The representation space is `ℓ²(ℕ)^{⊗r} ⊗ ℓ²(ℤ)` with basis `|k_1,…,k_r; m⟩`:
//!
//! - `z_1 = q^{k_1+…+k_r} ⊗ U` with `U` the bilateral shift;
//! - `z_i = q^{k_i+…+k_r} S_{i-1}` for `i ≥ 2`, where `S_j` raises `k_j` with
//!   weight `w(k_j)`.
//!
//! The weights are solved from the commutator relation on one factor and then
//! checked against every sphere relation. Nothing depends on `m`, so the
//! bilateral factor is diagonalized by Fourier transform: `U` becomes `e^{iθ}`
//! and `π(a) = ∫⊕ π_θ(a) dθ`, hence `‖π(a)‖ = sup_θ ‖π_θ(a)‖`.
//!
//! Each `k_j` is cut off at `F`, and matrices are taken on the interior
//! `k_j < F/2`, where words of length ≤ `F/2` act exactly. Compressing a
//! Toeplitz-like operator converges slowly near its essential norm; that part
//! of the norm is carried by the quotient spheres (`z_1 = … = z_l = 0`), which
//! are represented the same way with rank `r − l`. The norm is the maximum over
//! these families. Both `‖XQ‖` and `‖X*Q‖` are lower bounds for `‖X‖`;
//! reported norms are the larger of the two, which is symmetric under `X ↔ X*`.

use std::collections::BTreeMap;

use nalgebra::DMatrix;
use num_complex::Complex;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::ncalg::{Element, Letter, Word};
use crate::qhopf::suq::u_index;
use crate::qhopf::{Dolbeault, SuQ};
use crate::report::Check;
use crate::sample;
use crate::scalars::Scalar;
use crate::sphere::{z_letter, zs_letter, Sphere};

pub type C64 = Complex<f64>;
type CMat = DMatrix<C64>;

const ZERO: C64 = C64 { re: 0.0, im: 0.0 };
const ONE: C64 = C64 { re: 1.0, im: 0.0 };

#[derive(Debug, thiserror::Error)]
pub enum RepError {
    #[error("q must lie in (0,1), got {0}")]
    BadQ(f64),
    #[error("cutoff must be at least 4, got {0}")]
    SmallCutoff(usize),
    #[error("weighted-shift ansatz fails relation '{relation}': residual {residual:e}")]
    AnsatzFailure { relation: String, residual: f64 },
    #[error("numeric horizontal seminorm is only available for r = 1 (got r = {0})")]
    UnsupportedRank(usize),
    #[error("word of length {len} reaches the truncation boundary (interior depth {depth}); raise the cutoff")]
    TooLong { len: usize, depth: usize },
}

/// Largest singular value of a dense matrix.
pub fn sigma_max(m: &CMat) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    let g = if m.nrows() >= m.ncols() { m.adjoint() * m } else { m * m.adjoint() };
    g.symmetric_eigenvalues().iter().fold(0.0f64, |a, &b| a.max(b)).sqrt()
}

/// Trigonometric matrix polynomial `M(θ) = Σ_j e^{ijθ} M_j`.
#[derive(Clone, Debug)]
pub struct Fourier {
    pub rows: usize,
    pub cols: usize,
    pub coeffs: BTreeMap<i32, CMat>,
}

impl Fourier {
    pub fn zero(rows: usize, cols: usize) -> Self {
        Fourier { rows, cols, coeffs: BTreeMap::new() }
    }

    pub fn eval(&self, theta: f64) -> CMat {
        let mut m = CMat::zeros(self.rows, self.cols);
        for (&j, c) in &self.coeffs {
            let t = j as f64 * theta;
            m += c * C64::new(t.cos(), t.sin());
        }
        m
    }

    pub fn add(&mut self, j: i32, r: usize, c: usize, v: C64) {
        let (rows, cols) = (self.rows, self.cols);
        self.coeffs.entry(j).or_insert_with(|| CMat::zeros(rows, cols))[(r, c)] += v;
    }

    pub fn max_coeff_norm(&self) -> f64 {
        self.coeffs.values().map(|m| m.norm()).fold(0.0, f64::max)
    }

    pub fn scaled(&self, c: C64) -> Fourier {
        Fourier { rows: self.rows, cols: self.cols, coeffs: self.coeffs.iter().map(|(&j, m)| (j, m * c)).collect() }
    }

    pub fn sub(&self, o: &Fourier) -> Fourier {
        let mut out = self.clone();
        for (&j, m) in &o.coeffs {
            *out.coeffs.entry(j).or_insert_with(|| CMat::zeros(self.rows, self.cols)) -= m;
        }
        out
    }

    /// Block matrix `[[a, b], [c, d]]` of equally shaped blocks (`None` = 0).
    pub fn blocks(parts: [[Option<&Fourier>; 2]; 2], rows: usize, cols: usize) -> Fourier {
        let mut out = Fourier::zero(2 * rows, 2 * cols);
        for (bi, row) in parts.iter().enumerate() {
            for (bj, blk) in row.iter().enumerate() {
                if let Some(b) = blk {
                    for (&j, m) in &b.coeffs {
                        out.coeffs.entry(j).or_insert_with(|| CMat::zeros(2 * rows, 2 * cols)).view_mut((bi * rows, bj * cols), (rows, cols)).copy_from(m);
                    }
                }
            }
        }
        out
    }

    /// `sup_θ σ_max(M(θ))`: grid search refined by golden sections around the
    /// best grid peaks.
    pub fn sup_norm(&self) -> f64 {
        self.sup_norm_at().0
    }

    /// `sup_norm` together with a maximizing θ.
    pub fn sup_norm_at(&self) -> (f64, f64) {
        let (lo, hi) = match (self.coeffs.keys().next(), self.coeffs.keys().next_back()) {
            (Some(&a), Some(&b)) => (a, b),
            _ => return (0.0, 0.0),
        };
        if lo == hi {
            return (sigma_max(&self.coeffs[&lo]), 0.0);
        }
        let grid = (8 * (hi - lo) as usize).max(32);
        let h = std::f64::consts::TAU / grid as f64;
        let vals: Vec<f64> = (0..grid).map(|i| sigma_max(&self.eval(i as f64 * h))).collect();
        let mut peaks: Vec<usize> = (0..grid).filter(|&i| vals[i] >= vals[(i + grid - 1) % grid] && vals[i] >= vals[(i + 1) % grid]).collect();
        peaks.sort_by(|&a, &b| vals[b].total_cmp(&vals[a]));
        let mut best = (f64::NEG_INFINITY, 0.0);
        for (i, &v) in vals.iter().enumerate() {
            if v > best.0 {
                best = (v, i as f64 * h);
            }
        }
        for &p in peaks.iter().take(2) {
            let g = golden_max(|t| sigma_max(&self.eval(t)), (p as f64 - 1.0) * h, (p as f64 + 1.0) * h);
            if g.0 > best.0 {
                best = g;
            }
        }
        best
    }
}

fn golden_max(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> (f64, f64) {
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let (mut c, mut d) = (b - g * (b - a), a + g * (b - a));
    let (mut fc, mut fd) = (f(c), f(d));
    // peaks are quadratic, so a 1e-7 bracket fixes the value to ~1e-14
    while b - a > 1e-7 {
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = f(d);
        }
    }
    if fc > fd {
        (fc, c)
    } else {
        (fd, d)
    }
}

/// A raw (unreduced) word sum with numeric coefficients, in sphere letters.
pub type RawOp = Vec<(C64, Vec<Letter>)>;

/// The representation of the quotient sphere `z_1 = … = z_offset = 0`,
/// of rank `r − offset`, on `ℓ²(ℕ)^{⊗(r−offset)}` fibred over θ.
#[derive(Clone, Debug)]
pub struct Family {
    pub offset: usize,
    pub rank: usize,
    pub dim: usize,
    pub interior: Vec<usize>,
    /// `Σ_j k_j` per basis vector.
    pub label: Vec<i32>,
}

#[derive(Clone, Debug, Serialize)]
pub struct RelationResidual {
    pub relation: String,
    pub residual: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct RepValidation {
    pub relations: Vec<RelationResidual>,
    pub max_residual: f64,
    /// Every generator raises the circle degree (Fourier power + `Σk`) by one.
    pub circle_action_exact: bool,
}

#[derive(Clone, Debug)]
pub struct TruncatedRep {
    pub r: usize,
    pub q: f64,
    pub cutoff: usize,
    weights: Vec<f64>,
    pub families: Vec<Family>,
    pub validation: RepValidation,
}

impl TruncatedRep {
    pub fn new(r: usize, q: f64, cutoff: usize) -> Result<Self, RepError> {
        if !(q > 0.0 && q < 1.0) {
            return Err(RepError::BadQ(q));
        }
        if cutoff < 4 {
            return Err(RepError::SmallCutoff(cutoff));
        }
        // [z*, z] = (1 - q²) q^{2k} on one factor, with w(-1) = 0
        let mut weights = Vec::with_capacity(cutoff);
        let mut acc = 0.0;
        for k in 0..cutoff {
            acc += (1.0 - q * q) * q.powi(2 * k as i32);
            weights.push(acc.sqrt());
        }
        let families = (0..=r)
            .map(|offset| {
                let rank = r - offset;
                let dim = cutoff.pow(rank as u32);
                let mut fam = Family { offset, rank, dim, interior: vec![], label: vec![] };
                for idx in 0..dim {
                    let k = decode(cutoff, rank, idx);
                    fam.label.push(k.iter().sum::<usize>() as i32);
                    if k.iter().all(|&kj| kj < cutoff / 2) {
                        fam.interior.push(idx);
                    }
                }
                fam
            })
            .collect();
        let mut rep = TruncatedRep {
            r,
            q,
            cutoff,
            weights,
            families,
            validation: RepValidation { relations: vec![], max_residual: 0.0, circle_action_exact: true },
        };
        rep.validation = rep.validate();
        if let Some(bad) = rep.validation.relations.iter().find(|x| !(x.residual < 1e-10)) {
            return Err(RepError::AnsatzFailure { relation: bad.relation.clone(), residual: bad.residual });
        }
        Ok(rep)
    }

    pub fn n(&self) -> usize {
        self.r + 1
    }

    /// Words up to this length started on the interior act exactly.
    pub fn depth(&self) -> usize {
        self.cutoff - self.cutoff / 2
    }

    pub fn top(&self) -> &Family {
        &self.families[0]
    }

    /// Action of one sphere letter on a basis vector of a family:
    /// `(weight, target, Fourier power)`.
    fn letter(&self, fam: &Family, l: Letter, idx: usize) -> Option<(f64, usize, i32)> {
        let n = self.n();
        let li = l as usize;
        let (i, star) = if li < n { (li + 1, false) } else { (2 * n - li, true) };
        if i <= fam.offset {
            return None;
        }
        let i = i - fam.offset;
        let mut k = decode(self.cutoff, fam.rank, idx);
        let tail = |k: &[usize], from: usize| k[from..].iter().sum::<usize>() as i32;
        if i == 1 {
            return Some((self.q.powi(tail(&k, 0)), idx, if star { -1 } else { 1 }));
        }
        let j = i - 2;
        let qw = self.q.powi(tail(&k, i - 1));
        if star {
            if k[j] == 0 {
                return None;
            }
            k[j] -= 1;
            Some((qw * self.weights[k[j]], encode(self.cutoff, &k), 0))
        } else {
            let w = self.weights[k[j]];
            k[j] += 1;
            if k[j] >= self.cutoff {
                return None;
            }
            Some((qw * w, encode(self.cutoff, &k), 0))
        }
    }

    fn word(&self, fam: &Family, w: &[Letter], mut idx: usize) -> Option<(f64, usize, i32)> {
        let (mut c, mut p) = (1.0, 0);
        for &l in w.iter().rev() {
            let (x, j, dp) = self.letter(fam, l, idx)?;
            c *= x;
            p += dp;
            idx = j;
        }
        Some((c, idx, p))
    }

    fn check_len(&self, op: &RawOp) -> Result<(), RepError> {
        match op.iter().map(|(_, w)| w.len()).max() {
            Some(len) if len > self.depth() => Err(RepError::TooLong { len, depth: self.depth() }),
            _ => Ok(()),
        }
    }

    /// `π_θ(op) Q` on one family.
    pub fn fourier(&self, fam: &Family, op: &RawOp) -> Result<Fourier, RepError> {
        self.check_len(op)?;
        let mut f = Fourier::zero(fam.dim, fam.interior.len());
        for (col, &j) in fam.interior.iter().enumerate() {
            for (c, w) in op {
                if let Some((x, i, p)) = self.word(fam, w, j) {
                    f.add(p, i, col, c * x);
                }
            }
        }
        Ok(f)
    }

    /// `Q π_θ(op) Q` on one family.
    pub fn fourier_compressed(&self, fam: &Family, op: &RawOp) -> Result<Fourier, RepError> {
        let f = self.fourier(fam, op)?;
        let rows = &fam.interior;
        Ok(Fourier { rows: rows.len(), cols: f.cols, coeffs: f.coeffs.into_iter().map(|(j, m)| (j, m.select_rows(rows.iter()))).collect() })
    }

    /// `max_families sup_θ ‖M_fam(θ)‖`.
    pub fn sup_over(&self, build: impl Fn(&Family) -> Result<Fourier, RepError>) -> Result<f64, RepError> {
        let mut best: f64 = 0.0;
        for fam in &self.families {
            best = best.max(build(fam)?.sup_norm());
        }
        Ok(best)
    }

    /// `max(‖XQ‖, ‖X*Q‖)` where `build(fam, adjoint)` gives `XQ` or `X*Q`.
    pub fn sup_sym(&self, build: impl Fn(&Family, bool) -> Result<Fourier, RepError>) -> Result<f64, RepError> {
        Ok(self.sup_over(|f| build(f, false))?.max(self.sup_over(|f| build(f, true))?))
    }

    /// `‖π(op)Q‖` alone.
    pub fn one_sided_norm(&self, op: &RawOp) -> Result<f64, RepError> {
        self.sup_over(|fam| self.fourier(fam, op))
    }

    pub fn norm_raw(&self, op: &RawOp) -> Result<f64, RepError> {
        let adj = self.adjoint(op);
        self.sup_sym(|fam, star| self.fourier(fam, if star { &adj } else { op }))
    }

    pub fn op_norm(&self, a: &Element) -> Result<f64, RepError> {
        self.norm_raw(&self.raw(a))
    }

    /// Formal adjoint: reversed words of starred letters, conjugated coefficients.
    pub fn adjoint(&self, op: &RawOp) -> RawOp {
        let top = (2 * self.n() - 1) as Letter;
        op.iter().map(|(c, w)| (c.conj(), w.iter().rev().map(|&l| top - l).collect())).collect()
    }

    pub fn compressed_norm(&self, op: &RawOp) -> Result<f64, RepError> {
        self.sup_over(|fam| self.fourier_compressed(fam, op))
    }

    /// Numeric form of an exact sphere element.
    pub fn raw(&self, a: &Element) -> RawOp {
        a.terms().map(|(w, c)| (C64::new(c.eval_f64(self.q), 0.0), w.0.clone())).collect()
    }

    /// Numeric form of an O(SU_q(2)) element through
    /// `u11 = z2*, u12 = -q z1*, u21 = z1, u22 = z2` (r = 1 only).
    pub fn raw_suq(&self, a: &Element) -> Result<RawOp, RepError> {
        if self.r != 1 {
            return Err(RepError::UnsupportedRank(self.r));
        }
        let (z1, z2, z1s, z2s) = (z_letter(2, 1), z_letter(2, 2), zs_letter(2, 1), zs_letter(2, 2));
        let sub = |l: Letter| -> (f64, Letter) {
            match l {
                x if x == u_index(2, 1, 1) => (1.0, z2s),
                x if x == u_index(2, 1, 2) => (-self.q, z1s),
                x if x == u_index(2, 2, 1) => (1.0, z1),
                _ => (1.0, z2),
            }
        };
        Ok(a.terms()
            .map(|(w, c)| {
                let mut coef = c.eval_f64(self.q);
                let word = w
                    .0
                    .iter()
                    .map(|&l| {
                        let (x, y) = sub(l);
                        coef *= x;
                        y
                    })
                    .collect();
                (C64::new(coef, 0.0), word)
            })
            .collect())
    }

    /// Circle action on a family matrix: `σ_{e^{it}}` acts as the θ-shift by
    /// `t` conjugated with `diag(e^{it Σk})`.
    pub fn rotate(&self, fam: &Family, m: &Fourier, t: f64) -> Fourier {
        let mut out = m.clone();
        for (&j, c) in out.coeffs.iter_mut() {
            for col in 0..c.ncols() {
                for row in 0..c.nrows() {
                    let s = t * (j + fam.label[row] - fam.label[fam.interior[col]]) as f64;
                    c[(row, col)] *= C64::new(s.cos(), s.sin());
                }
            }
        }
        out
    }

    fn validate(&self) -> RepValidation {
        let n = self.n();
        let q = self.q;
        let one = |x: f64| C64::new(x, 0.0);
        let z = |i| z_letter(n, i);
        let zs = |i| zs_letter(n, i);
        let mut rels: Vec<(String, RawOp)> = Vec::new();
        for i in 1..=n {
            for j in i + 1..=n {
                rels.push((format!("z{i} z{j} = q z{j} z{i}"), vec![(one(1.0), vec![z(i), z(j)]), (one(-q), vec![z(j), z(i)])]));
            }
            for j in 1..=n {
                if i != j {
                    rels.push((format!("z{i}* z{j} = q z{j} z{i}*"), vec![(one(1.0), vec![zs(i), z(j)]), (one(-q), vec![z(j), zs(i)])]));
                }
            }
            let mut c: RawOp = vec![(one(1.0), vec![zs(i), z(i)]), (one(-1.0), vec![z(i), zs(i)])];
            for j in 1..i {
                c.push((one(-(1.0 - q * q)), vec![z(j), zs(j)]));
            }
            rels.push((format!("[z{i}*, z{i}] = (1-q²) Σ_{{j<{i}}} z_j z_j*"), c));
        }
        let mut unit: RawOp = (1..=n).map(|j| (one(1.0), vec![z(j), zs(j)])).collect();
        unit.push((one(-1.0), vec![]));
        rels.push(("Σ z_j z_j* = 1".into(), unit));
        let relations: Vec<RelationResidual> = rels
            .into_iter()
            .map(|(name, op)| {
                let residual = self.families.iter().map(|f| self.fourier(f, &op).map(|m| m.max_coeff_norm()).unwrap_or(f64::INFINITY)).fold(0.0, f64::max);
                RelationResidual { relation: name, residual }
            })
            .collect();
        let max_residual = relations.iter().map(|x| x.residual).fold(0.0, f64::max);
        let circle_action_exact = self.families.iter().all(|fam| {
            (1..=n).all(|i| fam.interior.iter().all(|&j| self.letter(fam, z(i), j).is_none_or(|(_, t, p)| p + fam.label[t] == fam.label[j] + 1)))
        });
        RepValidation { relations, max_residual, circle_action_exact }
    }

    /// Residuals of the O(SU_q(2)) relations (FRT rules and `det_q = 1`) in the
    /// induced representation (r = 1).
    pub fn validate_suq(&self, suq: &SuQ) -> Result<Vec<RelationResidual>, RepError> {
        let residual = |e: &Element| -> Result<f64, RepError> {
            let op = self.raw_suq(e)?;
            let mut worst: f64 = 0.0;
            for f in &self.families {
                worst = worst.max(self.fourier(f, &op)?.max_coeff_norm());
            }
            Ok(worst)
        };
        let mut out = Vec::new();
        for rule in &suq.algebra().presentation().rules {
            let mut e = rule.rhs.clone();
            e.add_term(rule.lhs.clone(), &-Scalar::one());
            out.push(RelationResidual { relation: format!("{} = {}", suq.display(&Element::word(&rule.lhs.0)), suq.display(&rule.rhs)), residual: residual(&e)? });
        }
        let mut d = suq.det().clone();
        d.add_term(Word(vec![]), &-Scalar::one());
        out.push(RelationResidual { relation: "det_q = 1".into(), residual: residual(&d)? });
        Ok(out)
    }
}

fn decode(f: usize, rank: usize, mut idx: usize) -> Vec<usize> {
    let mut k = vec![0; rank];
    for j in (0..rank).rev() {
        k[j] = idx % f;
        idx /= f;
    }
    k
}

fn encode(f: usize, k: &[usize]) -> usize {
    k.iter().fold(0, |acc, &kj| acc * f + kj)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SeminormKind {
    Ver,
    Hor,
    Tot,
}

#[derive(Clone, Debug, Serialize)]
pub struct SeminormValue {
    pub value: f64,
    pub kind: SeminormKind,
    pub cutoff: usize,
    /// Value at the cutoff scaled by 3/2.
    pub refined: f64,
    pub refined_cutoff: usize,
    /// `|value − refined| ≤ 1% · max`.
    pub converged: bool,
    /// Horizontal and total values are upper-bound surrogates.
    pub surrogate: bool,
}

/// One graded piece `a_n` with its horizontal legs.
#[derive(Clone, Debug)]
pub struct Piece {
    pub degree: i32,
    pub a: Element,
    pub h: Element,
    pub h_dagger: Element,
}

#[derive(Clone, Debug)]
pub struct Legs {
    pub parts: Vec<Piece>,
}

impl Legs {
    /// Graded pieces without horizontal legs (any rank; vertical seminorm only).
    pub fn vertical(s: &Sphere, a: &Element) -> Self {
        let parts = s.decompose(a).into_iter().map(|(n, x)| Piece { degree: n, a: x, h: Element::zero(), h_dagger: Element::zero() }).collect();
        Legs { parts }
    }

    /// Family matrix of the seminorm operator for `Σ_n w(n) a_n`:
    /// `V = Σ n w(n) a_n` alone, `[[0, H†], [H, 0]]`, or `[[V, H†], [H, −V]]`.
    /// With `adjoint`, the matrix of the adjoint operator instead.
    pub fn fourier(&self, rep: &TruncatedRep, fam: &Family, kind: SeminormKind, w: &dyn Fn(i32) -> C64, adjoint: bool) -> Result<Fourier, RepError> {
        let (mut v, mut h, mut hd) = (RawOp::new(), RawOp::new(), RawOp::new());
        for p in &self.parts {
            let c = w(p.degree);
            let cv = c * p.degree as f64;
            v.extend(rep.raw(&p.a).into_iter().map(|(x, word)| (x * cv, word)));
            if kind != SeminormKind::Ver {
                h.extend(rep.raw_suq(&p.h)?.into_iter().map(|(x, word)| (x * c, word)));
                hd.extend(rep.raw_suq(&p.h_dagger)?.into_iter().map(|(x, word)| (x * c, word)));
            }
        }
        if adjoint {
            // [[V, H†], [H, −V]]* = [[V*, H*], [H†*, −V*]]
            (v, h, hd) = (rep.adjoint(&v), rep.adjoint(&hd), rep.adjoint(&h));
        }
        let mv = rep.fourier(fam, &v)?;
        if kind == SeminormKind::Ver {
            return Ok(mv);
        }
        let (mh, mhd) = (rep.fourier(fam, &h)?, rep.fourier(fam, &hd)?);
        let (rows, cols) = (mv.rows, mv.cols);
        Ok(match kind {
            SeminormKind::Hor => Fourier::blocks([[None, Some(&mhd)], [Some(&mh), None]], rows, cols),
            _ => {
                let mneg = mv.scaled(-ONE);
                Fourier::blocks([[Some(&mv), Some(&mhd)], [Some(&mh), Some(&mneg)]], rows, cols)
            }
        })
    }

    pub fn norm(&self, rep: &TruncatedRep, kind: SeminormKind, w: &dyn Fn(i32) -> C64) -> Result<f64, RepError> {
        rep.sup_sym(|fam, adj| self.fourier(rep, fam, kind, w, adj))
    }
}

/// Relative cutoff-stability threshold.
pub const STABILITY: f64 = 0.01;

/// Numeric seminorms for one rank and q, at a cutoff and its 3/2 refinement.
pub struct Seminorms {
    pub sphere: Sphere,
    pub dol: Option<Dolbeault>,
    pub reps: [TruncatedRep; 2],
}

impl Seminorms {
    pub fn new(r: usize, q: f64, cutoff: usize) -> Result<Self, RepError> {
        let reps = [TruncatedRep::new(r, q, cutoff)?, TruncatedRep::new(r, q, cutoff * 3 / 2)?];
        let dol = (r == 1).then(|| Dolbeault::new(1));
        Ok(Seminorms { sphere: Sphere::new(r), dol, reps })
    }

    pub fn rep(&self) -> &TruncatedRep {
        &self.reps[0]
    }

    fn value(&self, kind: SeminormKind, f: impl Fn(&TruncatedRep) -> Result<f64, RepError>) -> Result<SeminormValue, RepError> {
        let v0 = f(&self.reps[0])?;
        let v1 = f(&self.reps[1])?;
        let scale = v0.abs().max(v1.abs());
        Ok(SeminormValue {
            value: v0,
            kind,
            cutoff: self.reps[0].cutoff,
            refined: v1,
            refined_cutoff: self.reps[1].cutoff,
            converged: (v0 - v1).abs() <= STABILITY * scale || scale < 1e-12,
            surrogate: kind != SeminormKind::Ver,
        })
    }

    /// `Σ_n n P_n(a)`, computed exactly.
    pub fn delta_ver_element(&self, a: &Element) -> Element {
        let mut out = Element::zero();
        for (n, x) in self.sphere.decompose(a) {
            out.add_scaled(&x, &Scalar::int(n as i64));
        }
        out
    }

    /// Graded pieces of `a` with their horizontal legs
    /// `h_n = q^{n/2} d_1(a_n)`, `h†_n = q^{n/2} d_1†(a_n)` in O(SU_q(2)).
    pub fn legs(&self, a: &Element) -> Result<Legs, RepError> {
        let dol = self.dol.as_ref().ok_or(RepError::UnsupportedRank(self.sphere.r()))?;
        let mut parts = Vec::new();
        for (n, x) in self.sphere.decompose(a) {
            let y = dol.embed(&x);
            let c = Scalar::v_pow(n);
            parts.push(Piece { degree: n, h: dol.dj(1, &y).scale(&c), h_dagger: dol.dj_dagger(1, &y).scale(&c), a: x });
        }
        Ok(Legs { parts })
    }

    /// `(Σ_n q^{n/2} d_1(a_n), Σ_n q^{n/2} d_1†(a_n))`.
    pub fn delta_hor_legs(&self, a: &Element) -> Result<(Element, Element), RepError> {
        let legs = self.legs(a)?;
        let (mut d, mut dd) = (Element::zero(), Element::zero());
        for p in &legs.parts {
            d = &d + &p.h;
            dd = &dd + &p.h_dagger;
        }
        Ok((d, dd))
    }

    pub fn op_norm(&self, a: &Element) -> Result<SeminormValue, RepError> {
        let mut v = self.value(SeminormKind::Ver, |rep| rep.op_norm(a))?;
        v.surrogate = false;
        Ok(v)
    }

    pub fn seminorm_ver(&self, a: &Element) -> Result<SeminormValue, RepError> {
        let e = self.delta_ver_element(a);
        self.value(SeminormKind::Ver, |rep| rep.op_norm(&e))
    }

    pub fn seminorm_hor(&self, a: &Element) -> Result<SeminormValue, RepError> {
        let legs = self.legs(a)?;
        self.value(SeminormKind::Hor, |rep| legs.norm(rep, SeminormKind::Hor, &|_| ONE))
    }

    /// `‖[[π(v), π(h†)], [π(h), −π(v)]]‖` with `v = δ_ver(a)`.
    pub fn seminorm_tot(&self, a: &Element) -> Result<SeminormValue, RepError> {
        let legs = self.legs(a)?;
        self.value(SeminormKind::Tot, |rep| legs.norm(rep, SeminormKind::Tot, &|_| ONE))
    }

    pub fn seminorm(&self, kind: SeminormKind, a: &Element) -> Result<SeminormValue, RepError> {
        match kind {
            SeminormKind::Ver => self.seminorm_ver(a),
            SeminormKind::Hor => self.seminorm_hor(a),
            SeminormKind::Tot => self.seminorm_tot(a),
        }
    }

    /// `sup_t ‖σ_{e^{it}}(a) − a‖/|t|` over a grid of `t`, with the circle
    /// action taken from the representation rather than from the grading.
    pub fn circle_quotient(&self, a: &Element, grid: &[f64]) -> Result<f64, RepError> {
        let rep = self.rep();
        let op = rep.raw(a);
        let mut best: f64 = 0.0;
        for o in [op.clone(), rep.adjoint(&op)] {
            for fam in &rep.families {
                let m = rep.fourier(fam, &o)?;
                for &t in grid {
                    best = best.max(rep.rotate(fam, &m, t).sub(&m).sup_norm() / t.abs());
                }
            }
        }
        Ok(best)
    }
}

/// Result of the C*-identity check on one element.
#[derive(Clone, Debug, Serialize)]
pub struct CStarSample {
    pub norm_sq: f64,
    pub compressed: f64,
    pub rel_err: f64,
}

/// `‖π(a)Q‖² = ‖Q π(a*a) Q‖`, which holds exactly fibrewise when `π` is a
/// *-representation on the words involved.
pub fn cstar_check(rep: &TruncatedRep, sphere: &Sphere, a: &Element) -> Result<CStarSample, RepError> {
    let n = rep.one_sided_norm(&rep.raw(a))?;
    let aa = sphere.mul(&sphere.star(a), a);
    let c = rep.compressed_norm(&rep.raw(&aa))?;
    let norm_sq = n * n;
    Ok(CStarSample { norm_sq, compressed: c, rel_err: (norm_sq - c).abs() / norm_sq.max(1e-300) })
}

// ---- numeric suites ----

fn rng_for(seed: u64, i: usize) -> ChaCha8Rng {
    crate::suites::sample_rng(seed, i)
}

/// Relation residuals of the truncated representation.
pub fn relations_check(rep: &TruncatedRep) -> Check {
    let worst = rep.validation.relations.iter().max_by(|x, y| x.residual.total_cmp(&y.residual));
    let fams: Vec<String> = rep.families.iter().map(|f| format!("{}/{}", f.dim, f.interior.len())).collect();
    Check::bound(
        "rep-relations",
        "sphere relations hold on interior vectors of the weighted-shift representation",
        None,
        rep.validation.relations.len(),
        rep.validation.max_residual,
        1e-10,
        worst.map(|w| format!("{}: {:e}", w.relation, w.residual)),
    )
    .with_r(rep.r)
    .with_note(&format!("q = {}, cutoff {}, family dim/interior {}", rep.q, rep.cutoff, fams.join(", ")))
}

fn keep_if_failed(w: (f64, Option<String>), tol: f64) -> Option<String> {
    if w.0 <= tol {
        None
    } else {
        w.1
    }
}

/// `‖a‖² = ‖a*a‖` on random elements of length ≤ 2.
pub fn cstar_suite(rep: &TruncatedRep, sphere: &Sphere, count: usize, seed: u64) -> Result<Check, RepError> {
    let mut worst = (0.0f64, None);
    for i in 0..count {
        let a = sample::nonzero_element(&mut rng_for(seed, i), sphere.algebra(), 2, 3);
        let s = cstar_check(rep, sphere, &a)?;
        if s.rel_err >= worst.0 {
            worst = (s.rel_err, Some(format!("a = {}: ‖a‖² = {}, ‖a*a‖ = {}", sphere.display(&a), s.norm_sq, s.compressed)));
        }
    }
    Ok(Check::bound("cstar-identity", "‖π(a)‖² = ‖π(a*a)‖ (relative)", Some(seed), count, worst.0, 1e-8, keep_if_failed(worst, 1e-8))
        .with_r(rep.r)
        .with_note(&format!("q = {}, cutoff {}", rep.q, rep.cutoff)))
}

/// Random homogeneous element of degree in `-2..=2` with words of length ≤ 3.
fn random_homogeneous(rng: &mut ChaCha8Rng, s: &Sphere) -> Element {
    loop {
        let n = rng.gen_range(-2..=2);
        let a = sample::homogeneous(rng, s, n, 3, 3);
        if !a.is_zero() {
            return a;
        }
    }
}

/// Vertical seminorm on homogeneous elements: `L_ver(a) = |n|·‖a‖`, and the
/// circle-action difference quotient agrees within 2%.
pub fn vertical_suite(sn: &Seminorms, count: usize, seed: u64) -> Result<Vec<Check>, RepError> {
    let s = &sn.sphere;
    let grid = [1.0, 0.1, 1e-2, 1e-3];
    let (mut exact, mut quot) = ((0.0f64, None), (0.0f64, None));
    for i in 0..count {
        let a = random_homogeneous(&mut rng_for(seed, i), s);
        let n = s.homogeneous_degree(&a).unwrap_or(0);
        let norm = sn.rep().op_norm(&a)?;
        let ver = sn.rep().op_norm(&sn.delta_ver_element(&a))?;
        let d = (ver - n.abs() as f64 * norm).abs();
        if d >= exact.0 {
            exact = (d, Some(format!("a = {} (n = {n}): L_ver = {ver}, |n|‖a‖ = {}", s.display(&a), n.abs() as f64 * norm)));
        }
        let cq = sn.circle_quotient(&a, &grid)?;
        let rel = if ver > 0.0 { (cq - ver).abs() / ver } else { cq };
        if rel >= quot.0 {
            quot = (rel, Some(format!("a = {}: quotient {cq}, L_ver {ver}", s.display(&a))));
        }
    }
    let r = s.r();
    Ok(vec![
        Check::bound("ver-homogeneous", "L_ver(a) = |n|·‖a‖ for a of degree n", Some(seed), count, exact.0, 1e-10, keep_if_failed(exact, 1e-10)).with_r(r),
        Check::bound("ver-circle-quotient", "sup_t ‖σ_{e^{it}}(a) − a‖/|t| = L_ver(a) (relative)", Some(seed), count, quot.0, 0.02, keep_if_failed(quot, 0.02)).with_r(r),
    ])
}

/// `L(P_n(a)) ≤ L(a)` for every `n` in the support, `L ∈ {L_ver, L_tot}`
/// (`L_ver` only when r > 1).
pub fn contraction_suite(sn: &Seminorms, count: usize, seed: u64) -> Result<Check, RepError> {
    let s = &sn.sphere;
    let rep = sn.rep();
    let mut kinds = vec![SeminormKind::Ver];
    if sn.dol.is_some() {
        kinds.push(SeminormKind::Tot);
    }
    let mut worst = (f64::NEG_INFINITY, None);
    for i in 0..count {
        let a = sample::nonzero_element(&mut rng_for(seed, i), s.algebra(), 2, 4);
        let legs = if sn.dol.is_some() { sn.legs(&a)? } else { Legs::vertical(s, &a) };
        for &kind in &kinds {
            let full = legs.norm(rep, kind, &|_| ONE)?;
            for p in &legs.parts {
                let pn = legs.norm(rep, kind, &|n| if n == p.degree { ONE } else { ZERO })?;
                if pn - full >= worst.0 {
                    worst = (pn - full, Some(format!("a = {}, n = {}, {kind:?}: {pn} > {full}", s.display(&a), p.degree)));
                }
            }
        }
    }
    let id = if kinds.len() == 2 { "L(P_n(a)) ≤ L(a) for L = L_ver, L_tot" } else { "L_ver(P_n(a)) ≤ L_ver(a)" };
    let v = worst.0.max(0.0);
    Ok(Check::bound("projection-contraction", id, Some(seed), count, v, 1e-8, keep_if_failed((v, worst.1), 1e-8)).with_r(s.r()))
}

/// Number of elements the σ_λ-invariance check is run on.
pub const LAMBDA_ELEMENTS: usize = 4;

/// Horizontal-surrogate properties for r = 1: twisted Leibniz inequality,
/// σ_λ-invariance of L_tot, `L_tot(a*) = L_tot(a)`, and cutoff stability.
pub fn horizontal_suite(sn: &Seminorms, count: usize, lambdas: usize, seed: u64) -> Result<Vec<Check>, RepError> {
    let s = &sn.sphere;
    let [rep, fine] = &sn.reps;
    let hor = |r: &TruncatedRep, l: &Legs| l.norm(r, SeminormKind::Hor, &|_| ONE);
    let tot = |l: &Legs| l.norm(rep, SeminormKind::Tot, &|_| ONE);

    let (mut leib, mut inv, mut star, mut stab) = ((f64::NEG_INFINITY, None), (0.0f64, None), (0.0f64, None), (0.0f64, None));
    for i in 0..count {
        let mut rng = rng_for(seed, i);
        let a = sample::nonzero_element(&mut rng, s.algebra(), 2, 3);
        let b = sample::nonzero_element(&mut rng, s.algebra(), 2, 3);
        let (la, lb, lab) = (sn.legs(&a)?, sn.legs(&b)?, sn.legs(&s.mul(&a, &b))?);
        // right-hand side on the refined cutoff, whose interior contains the
        // range of the compressed factors on the left
        let rhs = hor(fine, &la)? * fine.op_norm(&s.beta(&b, 1))? + fine.op_norm(&s.beta(&a, -1))? * hor(fine, &lb)?;
        let lhs = hor(rep, &lab)?;
        if lhs - rhs >= leib.0 {
            leib = (lhs - rhs, Some(format!("a = {}, b = {}: {lhs} > {rhs}", s.display(&a), s.display(&b))));
        }
        let t = tot(&la)?;
        for k in 0..if i < LAMBDA_ELEMENTS { lambdas } else { 0 } {
            let th: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
            let lam = C64::new(th.cos(), th.sin());
            let v = la.norm(rep, SeminormKind::Tot, &|n| lam.powi(n))?;
            if (v - t).abs() >= inv.0 {
                inv = ((v - t).abs(), Some(format!("a = {}, λ = e^{{{th:.4}i}} (#{k}): {v} vs {t}", s.display(&a))));
            }
        }
        let ts = tot(&sn.legs(&s.star(&a))?)?;
        if (ts - t).abs() >= star.0 {
            star = ((ts - t).abs(), Some(format!("a = {}: L_tot(a*) = {ts}, L_tot(a) = {t}", s.display(&a))));
        }
        for kind in [SeminormKind::Ver, SeminormKind::Hor, SeminormKind::Tot] {
            let v = sn.seminorm(kind, &a)?;
            let rel = (v.value - v.refined).abs() / v.value.abs().max(v.refined.abs()).max(1e-12);
            if rel >= stab.0 {
                stab = (rel, Some(format!("a = {}, {kind:?}: {} at cutoff {} vs {} at {}", s.display(&a), v.value, v.cutoff, v.refined, v.refined_cutoff)));
            }
        }
    }
    let note = "horizontal values are upper-bound surrogates computed on the full truncated form space";
    let lv = leib.0.max(0.0);
    Ok(vec![
        Check::bound("hor-twisted-leibniz", "L_hor(ab) ≤ L_hor(a)‖β_i(b)‖ + ‖β_{−i}(a)‖L_hor(b)", Some(seed), count, lv, 1e-8, keep_if_failed((lv, leib.1), 1e-8))
            .with_r(1)
            .with_note(note),
        Check::bound("tot-sigma-invariance", "L_tot(σ_λ(a)) = L_tot(a)", Some(seed), count.min(LAMBDA_ELEMENTS) * lambdas, inv.0, 1e-8, keep_if_failed(inv, 1e-8)).with_r(1).with_note(note),
        Check::bound("tot-star", "L_tot(a*) = L_tot(a)", Some(seed), count, star.0, 1e-8, keep_if_failed(star, 1e-8)).with_r(1).with_note(note),
        Check::bound("cutoff-stability", "seminorms change by < 1% when the cutoff grows by 50%", Some(seed), count, stab.0, STABILITY, keep_if_failed(stab, STABILITY)).with_r(1),
    ])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::spectral_norm;

    #[test]
    fn relations_hold_on_interior() {
        for (r, q, c) in [(1, 0.5, 20), (2, 0.3, 8), (1, 0.8, 12), (3, 0.5, 6)] {
            let rep = TruncatedRep::new(r, q, c).unwrap();
            assert!(rep.validation.max_residual < 1e-12, "{:?}", rep.validation);
            assert!(rep.validation.circle_action_exact);
            assert_eq!(rep.families.len(), r + 1);
        }
    }

    #[test]
    fn bad_parameters() {
        assert!(matches!(TruncatedRep::new(1, 1.2, 8), Err(RepError::BadQ(_))));
        assert!(matches!(TruncatedRep::new(1, 0.5, 2), Err(RepError::SmallCutoff(2))));
        let rep = TruncatedRep::new(1, 0.5, 8).unwrap();
        let s = Sphere::new(1);
        assert!(matches!(rep.op_norm(&s.algebra().pow(&s.z(2), 5)), Err(RepError::TooLong { len: 5, depth: 4 })));
    }

    #[test]
    fn sigma_max_matches_svd() {
        let m = CMat::from_fn(5, 3, |i, j| C64::new(i as f64 - j as f64, (i * j) as f64 * 0.5));
        assert!((sigma_max(&m) - spectral_norm(&m)).abs() < 1e-12);
        assert!((sigma_max(&m.transpose()) - spectral_norm(&m)).abs() < 1e-12);
    }

    #[test]
    fn sup_over_theta() {
        // |1 + i e^{iθ}| peaks at 2; |e^{3iθ} + 0.3 e^{-3iθ}| at 1.3
        let mut f = Fourier::zero(1, 1);
        f.add(0, 0, 0, ONE);
        f.add(1, 0, 0, C64::new(0.0, 1.0));
        assert!((f.sup_norm() - 2.0).abs() < 1e-12);
        let mut g = Fourier::zero(1, 1);
        g.add(3, 0, 0, ONE);
        g.add(-3, 0, 0, C64::new(0.3, 0.0));
        assert!((g.sup_norm() - 1.3).abs() < 1e-12);
    }

    #[test]
    fn basic_norms() {
        let rep = TruncatedRep::new(1, 0.5, 40).unwrap();
        let s = Sphere::new(1);
        assert!((rep.op_norm(&Element::one()).unwrap() - 1.0).abs() < 1e-12);
        assert!((rep.op_norm(&s.z(1)).unwrap() - 1.0).abs() < 1e-12);
        assert!((rep.op_norm(&s.z(2)).unwrap() - 1.0).abs() < 1e-12);
        // z1 + z1*: 2|cos θ| q^k, sup 2
        assert!((rep.op_norm(&(&s.z(1) + &s.zs(1))).unwrap() - 2.0).abs() < 1e-12);
        // z2 + z2*: the essential norm 2 comes from the quotient circle
        assert!((rep.op_norm(&(&s.z(2) + &s.zs(2))).unwrap() - 2.0).abs() < 1e-12);
        assert_eq!((rep.top().interior.len(), rep.top().dim), (20, 40));
    }

    #[test]
    fn unit_relation_on_interior() {
        let rep = TruncatedRep::new(2, 0.5, 10).unwrap();
        let s = Sphere::new(2);
        let mut e = Element::zero();
        for j in 1..=3 {
            e.add_term(Word(vec![z_letter(3, j), zs_letter(3, j)]), &Scalar::one());
        }
        let m = rep.fourier(rep.top(), &rep.raw(&e)).unwrap();
        let id = rep.fourier(rep.top(), &rep.raw(&Element::one())).unwrap();
        assert!(m.sub(&id).max_coeff_norm() < 1e-14);
        assert!((rep.op_norm(&s.reduce(&e)).unwrap() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn suq_relations_hold() {
        let rep = TruncatedRep::new(1, 0.5, 16).unwrap();
        let suq = SuQ::new(2);
        for x in rep.validate_suq(&suq).unwrap() {
            assert!(x.residual < 1e-12, "{x:?}");
        }
    }

    #[test]
    fn horizontal_legs_satisfy_twisted_leibniz() {
        let sn = Seminorms::new(1, 0.5, 8).unwrap();
        let s = &sn.sphere;
        let dol = sn.dol.as_ref().unwrap();
        let suq = dol.suq();
        for i in 0..6 {
            let mut rng = rng_for(11, i);
            let a = sample::nonzero_element(&mut rng, s.algebra(), 2, 2);
            let b = sample::nonzero_element(&mut rng, s.algebra(), 2, 2);
            let (ha, hda) = sn.delta_hor_legs(&a).unwrap();
            let (hb, hdb) = sn.delta_hor_legs(&b).unwrap();
            let (hab, hdab) = sn.delta_hor_legs(&s.mul(&a, &b)).unwrap();
            let (bb, ba) = (dol.embed(&s.beta(&b, 1)), dol.embed(&s.beta(&a, -1)));
            for (x, xa, xb) in [(&hab, &ha, &hb), (&hdab, &hda, &hdb)] {
                let rhs = &suq.mul(xa, &bb) + &suq.mul(&ba, xb);
                assert!(suq.equal(x, &rhs), "a = {}, b = {}", s.display(&a), s.display(&b));
            }
        }
    }

    #[test]
    fn seminorm_examples() {
        let sn = Seminorms::new(1, 0.5, 16).unwrap();
        let s = &sn.sphere;
        assert!(sn.seminorm_ver(&Element::scalar(Scalar::int(3))).unwrap().value < 1e-14);
        assert!(sn.seminorm_tot(&Element::scalar(Scalar::int(3))).unwrap().value < 1e-14);
        let z2 = s.z(2);
        let v = sn.seminorm_ver(&z2).unwrap().value;
        assert!((v - sn.op_norm(&z2).unwrap().value).abs() < 1e-12);
        let z2sq = s.mul(&z2, &z2);
        let v2 = sn.seminorm_ver(&z2sq).unwrap().value;
        assert!((v2 - 2.0 * sn.op_norm(&z2sq).unwrap().value).abs() < 1e-12);
        assert!(sn.seminorm_hor(&Element::one()).unwrap().value < 1e-14);
        // d_1(z_k) = 0: only the ε*-leg survives
        for k in 1..=2 {
            let (d, dd) = sn.delta_hor_legs(&s.z(k)).unwrap();
            assert!(sn.dol.as_ref().unwrap().suq().is_zero(&d));
            assert!(!dd.is_zero());
        }
        let a0 = s.mul(&s.z(1), &s.zs(2));
        let t = sn.seminorm_tot(&a0).unwrap().value;
        let h = sn.seminorm_hor(&a0).unwrap().value;
        assert!((t - h).abs() < 1e-12 * t.max(1.0));
    }

    #[test]
    fn unsupported_rank() {
        let sn = Seminorms::new(2, 0.5, 6).unwrap();
        assert!(matches!(sn.seminorm_hor(&sn.sphere.z(1)), Err(RepError::UnsupportedRank(2))));
        assert!(sn.seminorm_ver(&sn.sphere.z(1)).unwrap().value > 0.99);
    }
}
