//! q-exterior algebra Λ(ℂ^r), forms in O(SU_q(r+1)) ⊗ Λ(ℂ^r), the
//! Dolbeault-type operators and the twisted derivation δ.

use std::collections::BTreeMap;
use std::sync::Arc;

use crate::ncalg::Element;
use crate::scalars::Scalar;
use crate::sphere::Sphere;

use super::action::UqAction;

/// Subset of {1,…,r} as a bitmask (bit j-1 ⇔ j ∈ I).
pub type Mask = u32;

#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct ExteriorVector {
    pub coeffs: BTreeMap<Mask, Scalar>,
}

impl ExteriorVector {
    pub fn basis(i: Mask) -> Self {
        let mut coeffs = BTreeMap::new();
        coeffs.insert(i, Scalar::one());
        ExteriorVector { coeffs }
    }
    fn add_term(&mut self, m: Mask, c: Scalar) {
        if c.is_zero() {
            return;
        }
        let e = self.coeffs.entry(m).or_default();
        *e = &*e + &c;
        if e.is_zero() {
            self.coeffs.remove(&m);
        }
    }
    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }
}

fn below(i: Mask, j: usize) -> i32 {
    // |I ∩ {1,…,j}|
    (i & ((1u32 << j) - 1)).count_ones() as i32
}

/// Coefficient and target of `ε_j^q e_I`, or `None` when `j ∈ I`.
pub fn eps_q_basis(j: usize, i: Mask) -> Option<(Scalar, Mask)> {
    let bit = 1u32 << (j - 1);
    if i & bit != 0 {
        return None;
    }
    let k = below(i, j);
    Some((&Scalar::int(-1).pow(k) * &Scalar::q_pow(-k), i | bit))
}

/// Adjoint of [`eps_q_basis`] in the orthonormal basis `{e_I}`.
pub fn eps_q_star_basis(j: usize, i: Mask) -> Option<(Scalar, Mask)> {
    let bit = 1u32 << (j - 1);
    if i & bit == 0 {
        return None;
    }
    let k = below(i & !bit, j);
    Some((&Scalar::int(-1).pow(k) * &Scalar::q_pow(-k), i & !bit))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ExtOp {
    Eps(usize),
    EpsStar(usize),
}

impl ExtOp {
    pub fn apply_basis(&self, i: Mask) -> Option<(Scalar, Mask)> {
        match *self {
            ExtOp::Eps(j) => eps_q_basis(j, i),
            ExtOp::EpsStar(j) => eps_q_star_basis(j, i),
        }
    }
    pub fn apply(&self, v: &ExteriorVector) -> ExteriorVector {
        let mut out = ExteriorVector::default();
        for (&m, c) in &v.coeffs {
            if let Some((d, t)) = self.apply_basis(m) {
                out.add_term(t, c * &d);
            }
        }
        out
    }
}

pub fn eps_q(j: usize, w: &ExteriorVector) -> ExteriorVector {
    ExtOp::Eps(j).apply(w)
}

pub fn eps_q_star(j: usize, w: &ExteriorVector) -> ExteriorVector {
    ExtOp::EpsStar(j).apply(w)
}

/// Element of O(SU_q(r+1)) ⊗ Λ(ℂ^r): exterior basis index ↦ algebra leg.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct FormElement {
    pub comps: BTreeMap<Mask, Element>,
}

impl FormElement {
    pub fn pure(x: Element, i: Mask) -> Self {
        let mut f = FormElement::default();
        f.add(i, &x, &Scalar::one());
        f
    }
    pub fn add(&mut self, i: Mask, x: &Element, c: &Scalar) {
        let e = self.comps.entry(i).or_default();
        e.add_scaled(x, c);
        if e.is_zero() {
            self.comps.remove(&i);
        }
    }
}

/// δ(x) as the family {(algebra leg, exterior operator)} acting by
/// `y ⊗ ω ↦ Σ leg·y ⊗ op(ω)`.
#[derive(Clone, Debug, Default)]
pub struct FormOperator {
    pub legs: BTreeMap<ExtOp, Element>,
}

impl FormOperator {
    fn push(&mut self, op: ExtOp, x: Element) {
        if !x.is_zero() {
            self.legs.insert(op, x);
        }
    }
}

/// Dolbeault data for a fixed rank r.
#[derive(Clone)]
pub struct Dolbeault {
    pub act: UqAction,
    pub sphere: Arc<Sphere>,
    /// `L_j M_j^*` and `M_j L_j` for j = 1..r.
    d_eta: Vec<Element>,
    dd_eta: Vec<Element>,
}

impl Dolbeault {
    pub fn new(r: usize) -> Self {
        Self::from_parts(UqAction::new(r), Arc::new(Sphere::new(r)))
    }

    pub fn from_parts(act: UqAction, sphere: Arc<Sphere>) -> Self {
        let uq = &act.uq;
        let r = uq.r();
        assert_eq!(sphere.r(), r);
        let mut d_eta = Vec::new();
        let mut dd_eta = Vec::new();
        for j in 1..=r {
            let l = uq.l_element(j).unwrap();
            let m = uq.m_element(j).unwrap();
            d_eta.push(uq.mul(&l, &uq.star(&m)));
            dd_eta.push(uq.mul(&m, &l));
        }
        Dolbeault { act, sphere, d_eta, dd_eta }
    }

    pub fn r(&self) -> usize {
        self.act.uq.r()
    }

    pub fn suq(&self) -> &crate::qhopf::SuQ {
        &self.act.suq
    }

    /// Image of a sphere element in O(SU_q(r+1)) under `z_i ↦ u_{r+1,i}`.
    pub fn embed(&self, x: &Element) -> Element {
        self.sphere.to_suq(x, self.suq())
    }

    pub fn dj(&self, j: usize, x: &Element) -> Element {
        self.act.act(&self.d_eta[j - 1], x)
    }

    pub fn dj_dagger(&self, j: usize, x: &Element) -> Element {
        self.act.act(&self.dd_eta[j - 1], x)
    }

    pub fn dolbeault(&self, w: &FormElement) -> FormElement {
        let mut out = FormElement::default();
        for (&i, x) in &w.comps {
            for j in 1..=self.r() {
                if let Some((c, t)) = eps_q_basis(j, i) {
                    out.add(t, &self.dj(j, x), &c);
                }
            }
        }
        out
    }

    pub fn dolbeault_dagger(&self, w: &FormElement) -> FormElement {
        let mut out = FormElement::default();
        for (&i, x) in &w.comps {
            for j in 1..=self.r() {
                if let Some((c, t)) = eps_q_star_basis(j, i) {
                    out.add(t, &self.dj_dagger(j, x), &c);
                }
            }
        }
        out
    }

    /// δ(x) = Σ_j d_j(x) ⊗ ε_j^q + d_j†(x) ⊗ (ε_j^q)* for x already in O(SU_q).
    pub fn delta_twisted(&self, x: &Element) -> FormOperator {
        let mut op = FormOperator::default();
        for j in 1..=self.r() {
            op.push(ExtOp::Eps(j), self.dj(j, x));
            op.push(ExtOp::EpsStar(j), self.dj_dagger(j, x));
        }
        op
    }

    /// `φ(a) T` and `T φ(b)` for form operators.
    pub fn left_mul(&self, a: &Element, t: &FormOperator) -> FormOperator {
        let mut out = FormOperator::default();
        for (op, x) in &t.legs {
            out.push(*op, self.suq().mul(a, x));
        }
        out
    }

    pub fn right_mul(&self, t: &FormOperator, b: &Element) -> FormOperator {
        let mut out = FormOperator::default();
        for (op, x) in &t.legs {
            out.push(*op, self.suq().mul(x, b));
        }
        out
    }

    pub fn op_sum(&self, ts: &[(&FormOperator, Scalar)]) -> FormOperator {
        let mut legs: BTreeMap<ExtOp, Element> = BTreeMap::new();
        for (t, c) in ts {
            for (op, x) in &t.legs {
                legs.entry(*op).or_default().add_scaled(x, c);
            }
        }
        FormOperator { legs: legs.into_iter().filter(|(_, x)| !x.is_zero()).collect() }
    }

    /// Equality modulo `D_q - 1`, leg by leg. Distinct `ExtOp`s are linearly
    /// independent operators on Λ(ℂ^r), so this is operator equality.
    pub fn op_is_zero(&self, t: &FormOperator) -> bool {
        t.legs.values().all(|x| self.suq().is_zero(x))
    }

    pub fn form_is_zero(&self, w: &FormElement) -> bool {
        w.comps.values().all(|x| self.suq().is_zero(x))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn eps_examples() {
        assert_eq!(eps_q(1, &ExteriorVector::basis(0)), ExteriorVector::basis(1));
        let mut want = ExteriorVector::default();
        want.add_term(0b11, Scalar::int(-1) * Scalar::q_pow(-1));
        assert_eq!(eps_q(2, &ExteriorVector::basis(0b01)), want);
        assert!(eps_q(1, &ExteriorVector::basis(0b01)).is_zero());
    }

    #[test]
    fn q_anticommutation_on_full_basis() {
        let r = 4;
        for i in 1..=r {
            for j in i + 1..=r {
                for m in 0..(1u32 << r) {
                    let v = ExteriorVector::basis(m);
                    let lhs = eps_q(i, &eps_q(j, &v));
                    let rhs = eps_q(j, &eps_q(i, &v));
                    let mut diff = lhs.clone();
                    for (&k, c) in &rhs.coeffs {
                        diff.add_term(k, c * &Scalar::q());
                    }
                    assert!(diff.is_zero(), "i={i} j={j} I={m:b}");
                }
            }
        }
    }

    #[test]
    fn eps_star_is_adjoint() {
        let r = 3;
        for j in 1..=r {
            for a in 0..(1u32 << r) {
                for b in 0..(1u32 << r) {
                    let x = eps_q(j, &ExteriorVector::basis(a)).coeffs.get(&b).cloned().unwrap_or_default();
                    let y = eps_q_star(j, &ExteriorVector::basis(b)).coeffs.get(&a).cloned().unwrap_or_default();
                    assert_eq!(x, y);
                }
            }
        }
    }
}
