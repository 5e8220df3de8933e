//! The quantum sphere O(S_q^{2r+1}) with its circle grading, frames,
//! the β automorphisms and the canonical map of the circle bundle.
//!
//! Letters are ordered `z1 < … < zN < zN' < … < z1'` (N = r+1), so normal
//! words are an ascending z-block followed by a descending z*-block.

use std::collections::BTreeMap;
use std::sync::RwLock;

use crate::ncalg::{Algebra, AlgError, Certification, Element, Letter, Presentation, Rule, Word};
use crate::qhopf::suq::{u_index, SuQ};
use crate::scalars::Scalar;

pub fn z_letter(_n: usize, i: usize) -> Letter {
    (i - 1) as Letter
}

pub fn zs_letter(n: usize, i: usize) -> Letter {
    (2 * n - i) as Letter
}

/// Rewriting rules for the sphere relations with `N = r + 1` generators.
/// `mutate` drops the `q` in `z_2 z_1 = q^{-1} z_1 z_2`; used for negative tests.
pub fn sphere_presentation_with(r: usize, mutate: bool) -> Presentation {
    let n = r + 1;
    let z = |i| z_letter(n, i);
    let zs = |i| zs_letter(n, i);
    let mut letters = Vec::new();
    for i in 1..=n {
        letters.push(format!("z{i}"));
    }
    for i in (1..=n).rev() {
        letters.push(format!("z{i}'"));
    }
    let q = Scalar::q();
    let qi = Scalar::q_pow(-1);
    let one_minus_q2 = &Scalar::one() - &Scalar::q_pow(2);
    let mut rules = Vec::new();
    for i in 1..=n {
        for j in i + 1..=n {
            let c = if mutate && i == 1 && j == 2 { Scalar::one() } else { qi.clone() };
            rules.push(Rule { lhs: Word(vec![z(j), z(i)]), rhs: Element::term(Word(vec![z(i), z(j)]), c) });
            rules.push(Rule { lhs: Word(vec![zs(i), zs(j)]), rhs: Element::term(Word(vec![zs(j), zs(i)]), qi.clone()) });
        }
    }
    for i in 1..=n {
        for j in 1..=n {
            if i != j {
                rules.push(Rule { lhs: Word(vec![zs(i), z(j)]), rhs: Element::term(Word(vec![z(j), zs(i)]), q.clone()) });
            }
        }
    }
    // z_i* z_i = z_i z_i* + (1 - q^2) Σ_{j<i} z_j z_j*; for i = N the right side
    // is already reduced against the unit relation: 1 - q^2 Σ_{j<N} z_j z_j*.
    for i in 1..n {
        let mut rhs = Element::word(&[z(i), zs(i)]);
        for j in 1..i {
            rhs.add_term(Word(vec![z(j), zs(j)]), &one_minus_q2);
        }
        rules.push(Rule { lhs: Word(vec![zs(i), z(i)]), rhs });
    }
    let mut rhs = Element::one();
    for j in 1..n {
        rhs.add_term(Word(vec![z(j), zs(j)]), &-Scalar::q_pow(2));
    }
    rules.push(Rule { lhs: Word(vec![zs(n), z(n)]), rhs });
    let mut rhs = Element::one();
    for j in 1..n {
        rhs.add_term(Word(vec![z(j), zs(j)]), &Scalar::int(-1));
    }
    rules.push(Rule { lhs: Word(vec![z(n), zs(n)]), rhs });

    let mut star = vec![0; 2 * n];
    let mut grading = vec![0; 2 * n];
    for i in 1..=n {
        star[z(i) as usize] = zs(i);
        star[zs(i) as usize] = z(i);
        grading[z(i) as usize] = 1;
        grading[zs(i) as usize] = -1;
    }
    Presentation {
        name: format!("O(S_q^{})", 2 * r + 1),
        letters,
        star,
        inverse: vec![None; 2 * n],
        grading,
        rules,
    }
}

pub fn sphere_presentation(r: usize) -> Presentation {
    sphere_presentation_with(r, false)
}

/// Element split by circle degree.
pub type GradedElement = BTreeMap<i32, Element>;

#[derive(Clone, Debug)]
pub struct Frame {
    pub degree: i32,
    pub elements: Vec<Element>,
}

pub struct Sphere {
    r: usize,
    alg: Algebra,
    embed_cache: RwLock<Option<(usize, Vec<Element>)>>,
}

impl std::fmt::Debug for Sphere {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "Sphere(r={})", self.r)
    }
}

impl Sphere {
    pub fn new(r: usize) -> Self {
        Self::try_new(r).expect("sphere rewriting system is confluent")
    }

    pub fn try_new(r: usize) -> Result<Self, AlgError> {
        assert!(r >= 1);
        let alg = Algebra::new(sphere_presentation(r))?
            .certify(6)
            .map_err(|rep| AlgError::CompletionFailure(format!("{} unresolved critical pairs", rep.unresolved.len())))?;
        debug_assert_eq!(alg.certification(), Certification::All);
        Ok(Sphere { r, alg, embed_cache: RwLock::new(None) })
    }

    pub fn r(&self) -> usize {
        self.r
    }

    pub fn n(&self) -> usize {
        self.r + 1
    }

    pub fn algebra(&self) -> &Algebra {
        &self.alg
    }

    pub fn z(&self, i: usize) -> Element {
        Element::letter(z_letter(self.n(), i))
    }

    pub fn zs(&self, i: usize) -> Element {
        Element::letter(zs_letter(self.n(), i))
    }

    pub fn mul(&self, a: &Element, b: &Element) -> Element {
        self.alg.mul(a, b)
    }

    pub fn star(&self, a: &Element) -> Element {
        self.alg.star(a)
    }

    pub fn reduce(&self, a: &Element) -> Element {
        self.alg.reduce(a)
    }

    pub fn display(&self, a: &Element) -> String {
        self.alg.display(a)
    }

    pub fn word_degree(&self, w: &Word) -> i32 {
        self.alg.degree_of(w)
    }

    /// Degree-n part; exact Fourier coefficient of the circle action.
    pub fn spectral_projection(&self, a: &Element, n: i32) -> Element {
        a.filter(|w| self.word_degree(w) == n)
    }

    pub fn decompose(&self, a: &Element) -> GradedElement {
        let mut out = GradedElement::new();
        for (w, c) in a.terms() {
            out.entry(self.word_degree(w)).or_default().add_term(w.clone(), c);
        }
        out
    }

    /// All components, for the contraction estimate `L(P_n(a)) ≤ L(a)`.
    pub fn li_projection_contraction_data(&self, a: &Element) -> GradedElement {
        self.decompose(a)
    }

    pub fn homogeneous_degree(&self, a: &Element) -> Option<i32> {
        let g = self.decompose(a);
        match g.len() {
            0 => Some(0),
            1 => g.keys().next().copied(),
            _ => None,
        }
    }

    /// `β_{ik}`: multiplies the degree-n part by `q^{kn/2}`.
    pub fn beta(&self, a: &Element, k: i32) -> Element {
        a.map_terms(|w, c| Some((w.clone(), c * &Scalar::v_pow(k * self.word_degree(w)))))
    }

    /// Frame of `A_n`: products of `z_j` for n > 0 and of `q^{r+1-j} z_j*` for
    /// n < 0, index tuples in lexicographic order.
    pub fn frame_for_degree(&self, n: i32) -> Frame {
        let nn = self.n();
        let m = n.unsigned_abs() as usize;
        let mut elements = Vec::with_capacity(nn.pow(m as u32));
        let mut idx = vec![1usize; m];
        loop {
            let mut w = Vec::with_capacity(m);
            let mut c = Scalar::one();
            for &i in &idx {
                if n > 0 {
                    w.push(z_letter(nn, i));
                } else {
                    w.push(zs_letter(nn, i));
                    c = &c * &Scalar::q_pow((nn - i) as i32);
                }
            }
            elements.push(self.alg.nf_word(&w).scale(&c));
            // next tuple
            let mut k = m;
            loop {
                if k == 0 {
                    return Frame { degree: n, elements };
                }
                k -= 1;
                if idx[k] < nn {
                    idx[k] += 1;
                    for t in idx.iter_mut().skip(k + 1) {
                        *t = 1;
                    }
                    break;
                }
            }
        }
    }

    /// `Σ ζ ζ* = 1` and homogeneity of every element.
    pub fn verify_frame(&self, f: &Frame) -> bool {
        let mut sum = Element::zero();
        for z in &f.elements {
            if self.homogeneous_degree(z) != Some(f.degree) && !z.is_zero() {
                return false;
            }
            sum = &sum + &self.mul(z, &self.star(z));
        }
        sum == Element::one()
    }

    /// Images of the letters in O(SU_q(N)) under `z_i ↦ u_{N,i}`.
    fn letter_images(&self, suq: &SuQ) -> Vec<Element> {
        if let Some((n, imgs)) = &*self.embed_cache.read().unwrap() {
            if *n == suq.n() {
                return imgs.clone();
            }
        }
        let nn = self.n();
        assert_eq!(suq.n(), nn);
        let mut imgs = vec![Element::zero(); 2 * nn];
        for i in 1..=nn {
            let u = u_index(nn, nn, i);
            imgs[z_letter(nn, i) as usize] = Element::letter(u);
            imgs[zs_letter(nn, i) as usize] = suq.star_gen(u).clone();
        }
        *self.embed_cache.write().unwrap() = Some((nn, imgs.clone()));
        imgs
    }

    pub fn to_suq(&self, a: &Element, suq: &SuQ) -> Element {
        let imgs = self.letter_images(suq);
        let mut out = Element::zero();
        for (w, c) in a.terms() {
            let mut acc = Element::one();
            for &l in &w.0 {
                acc = suq.mul(&acc, &imgs[l as usize]);
            }
            out.add_scaled(&acc, c);
        }
        out
    }

    /// `can(Σ x ζ_j ⊗ ζ_j*)` for the frame of degree `-m`, as a map
    /// `z`-exponent ↦ left leg. The expected value is `{m: x}`.
    pub fn canonical_image(&self, x: &Element, m: i32) -> GradedElement {
        let frame = self.frame_for_degree(-m);
        let mut out = GradedElement::new();
        for zeta in &frame.elements {
            let left = self.mul(x, zeta);
            for (k, part) in self.decompose(&self.star(zeta)) {
                let e = out.entry(k).or_default();
                *e = &*e + &self.mul(&left, &part);
            }
        }
        out.retain(|_, v| !v.is_zero());
        out
    }

    pub fn canonical_map_check(&self, x: &Element, m: i32) -> bool {
        let img = self.canonical_image(x, m);
        let x = self.reduce(x);
        if x.is_zero() {
            return img.is_empty();
        }
        img.len() == 1 && img.get(&m) == Some(&x)
    }

    /// Normal words of length ≤ `max_len`.
    pub fn normal_words(&self, max_len: usize) -> Vec<Word> {
        let g = self.alg.ngens() as Letter;
        let mut out = vec![Word::empty()];
        let mut layer = vec![Word::empty()];
        for _ in 0..max_len {
            let mut next = Vec::new();
            for w in &layer {
                for l in 0..g {
                    let mut nw = w.0.clone();
                    nw.push(l);
                    let nw = Word(nw);
                    if self.alg.is_normal(&nw) {
                        next.push(nw);
                    }
                }
            }
            out.extend(next.iter().cloned());
            layer = next;
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ncalg::check_local_confluence;

    #[test]
    fn reorientation_examples() {
        let s = Sphere::new(2);
        assert_eq!(s.mul(&s.z(2), &s.z(1)), s.mul(&s.z(1), &s.z(2)).scale(&Scalar::q_pow(-1)));
        let mut want = s.mul(&s.z(2), &s.zs(2));
        want.add_scaled(&s.mul(&s.z(1), &s.zs(1)), &(&Scalar::one() - &Scalar::q_pow(2)));
        assert_eq!(s.mul(&s.zs(2), &s.z(2)), want);
        assert_eq!(s.mul(&s.zs(1), &s.z(1)), s.mul(&s.z(1), &s.zs(1)));
        assert_eq!(s.mul(&s.zs(1), &s.z(2)), s.mul(&s.z(2), &s.zs(1)).scale(&Scalar::q()));
        let mut unit = Element::zero();
        for j in 1..=3 {
            unit = &unit + &s.mul(&s.z(j), &s.zs(j));
        }
        assert_eq!(unit, Element::one());
    }

    #[test]
    fn star_of_product() {
        let s = Sphere::new(1);
        let zz = s.mul(&s.z(1), &s.z(2));
        // (z1 z2)* = z2* z1* = q z1* z2*
        assert_eq!(s.star(&zz), s.mul(&s.zs(1), &s.zs(2)).scale(&Scalar::q()));
        assert_eq!(s.star(&s.star(&zz)), zz);
    }

    #[test]
    fn confluent_and_mutation_detected() {
        for r in 1..=3 {
            let rep = check_local_confluence(&sphere_presentation(r), 6).unwrap();
            assert!(rep.unresolved.is_empty() && rep.exhaustive, "r={r}");
        }
        let rep = check_local_confluence(&sphere_presentation_with(2, true), 6).unwrap();
        assert!(!rep.unresolved.is_empty());
    }

    #[test]
    fn frames_small() {
        let s = Sphere::new(1);
        assert_eq!(s.frame_for_degree(0).elements, vec![Element::one()]);
        assert_eq!(s.frame_for_degree(1).elements, vec![s.z(1), s.z(2)]);
        for n in -3..=3 {
            let f = s.frame_for_degree(n);
            assert_eq!(f.elements.len(), 2usize.pow(n.unsigned_abs()));
            assert!(s.verify_frame(&f), "n={n}");
        }
    }

    #[test]
    fn beta_examples() {
        let s = Sphere::new(1);
        assert_eq!(s.beta(&s.z(1), 1), s.z(1).scale(&Scalar::v()));
        assert_eq!(s.beta(&s.zs(1), -1), s.zs(1).scale(&Scalar::v()));
        let a = s.mul(&s.z(1), &s.zs(2));
        assert_eq!(s.beta(&a, 1), a);
    }

    #[test]
    fn projections() {
        let s = Sphere::new(1);
        let a = &s.z(1) + &s.mul(&s.z(1), &s.zs(2));
        assert_eq!(s.spectral_projection(&a, 1), s.z(1));
        assert_eq!(s.spectral_projection(&Element::one(), 0), Element::one());
        let g = s.decompose(&(&s.z(1) + &s.zs(1)));
        assert_eq!(g.keys().copied().collect::<Vec<_>>(), vec![-1, 1]);
    }

    #[test]
    fn canonical_map_small() {
        let s = Sphere::new(1);
        assert!(s.canonical_map_check(&Element::one(), 0));
        assert!(s.canonical_map_check(&Element::one(), -1));
        assert!(s.canonical_map_check(&s.z(1), -2));
        assert!(s.canonical_map_check(&s.zs(2), 3));
    }

    #[test]
    fn embedding_respects_relations() {
        for r in [1, 2] {
            let s = Sphere::new(r);
            let u = SuQ::new(r + 1);
            for rule in &s.algebra().presentation().rules {
                let lhs = s.to_suq(&Element::term(rule.lhs.clone(), Scalar::one()), &u);
                let rhs = s.to_suq(&rule.rhs, &u);
                assert!(u.equal(&lhs, &rhs), "r={r} rule {:?}", rule.lhs);
            }
        }
    }
}
