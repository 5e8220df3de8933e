//! U_q(su(r+1)): presentation, PBW-style normal form and Hopf structure.
//!
//! Letter order is `F_1 < … < F_r < K_1 < K_1^{-1} < … < K_r^{-1} < E_1 < … < E_r`,
//! so normal words read F-block, then sorted K-letters, then E-block.
//! The Cartan part is normalized so that `K_i E_j K_i^{-1} = q^{c_ij} E_j` with
//! `c_ii = 1`, `c_{i,i±1} = -1/2`, and `[E_i, F_i] = (K_i^2 - K_i^{-2})/(q - q^{-1})`.

use std::collections::BTreeMap;

use crate::ncalg::{complete, Algebra, ConfluenceReport, Element, Letter, Presentation, Rule, Word};
use crate::scalars::Scalar;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Gen {
    F(usize),
    K(usize),
    Kinv(usize),
    E(usize),
}

/// Multi-leg tensor: each basis element is a tuple of normal words.
#[derive(Clone, PartialEq, Eq, Default, Debug)]
pub struct Tensor {
    terms: BTreeMap<Vec<Word>, Scalar>,
}

impl Tensor {
    pub fn zero() -> Self {
        Tensor { terms: BTreeMap::new() }
    }
    pub fn pure(legs: Vec<Word>, c: Scalar) -> Self {
        let mut t = Tensor::zero();
        t.add_term(legs, &c);
        t
    }
    pub fn add_term(&mut self, legs: Vec<Word>, c: &Scalar) {
        if c.is_zero() {
            return;
        }
        let e = self.terms.entry(legs).or_default();
        *e = &*e + c;
        if e.is_zero() {
            self.terms.retain(|_, v| !v.is_zero());
        }
    }
    pub fn add(&mut self, other: &Tensor, c: &Scalar) {
        for (k, v) in &other.terms {
            self.add_term(k.clone(), &(v * c));
        }
    }
    pub fn terms(&self) -> impl Iterator<Item = (&Vec<Word>, &Scalar)> {
        self.terms.iter()
    }
    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }
    pub fn len(&self) -> usize {
        self.terms.len()
    }
    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }
    /// Tensor product of elements.
    pub fn from_elements(legs: &[&Element]) -> Tensor {
        let mut acc = Tensor::pure(Vec::new(), Scalar::one());
        for e in legs {
            let mut next = Tensor::zero();
            for (k, c) in &acc.terms {
                for (w, d) in e.terms() {
                    let mut k2 = k.clone();
                    k2.push(w.clone());
                    next.add_term(k2, &(c * d));
                }
            }
            acc = next;
        }
        acc
    }
}

pub struct Uq {
    r: usize,
    alg: Algebra,
    completion: ConfluenceReport,
}

impl std::fmt::Debug for Uq {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "Uq(su({}))", self.r + 1)
    }
}

/// `2 c_ij` as an integer (exponent of `v` in `q^{c_ij}`).
fn two_c(i: usize, j: usize) -> i32 {
    if i == j {
        2
    } else if i + 1 == j || j + 1 == i {
        -1
    } else {
        0
    }
}

pub fn letter_of(r: usize, g: Gen) -> Letter {
    (match g {
        Gen::F(i) => i - 1,
        Gen::K(i) => r + 2 * (i - 1),
        Gen::Kinv(i) => r + 2 * (i - 1) + 1,
        Gen::E(i) => 3 * r + i - 1,
    }) as Letter
}

pub fn gen_of(r: usize, l: Letter) -> Gen {
    let l = l as usize;
    if l < r {
        Gen::F(l + 1)
    } else if l < 3 * r {
        let k = l - r;
        if k % 2 == 0 {
            Gen::K(k / 2 + 1)
        } else {
            Gen::Kinv(k / 2 + 1)
        }
    } else {
        Gen::E(l - 3 * r + 1)
    }
}

pub fn uq_presentation(r: usize) -> Presentation {
    let l = |g| letter_of(r, g);
    let n = 4 * r;
    let mut letters = vec![String::new(); n];
    let mut star = vec![0; n];
    let mut inverse = vec![None; n];
    for i in 1..=r {
        letters[l(Gen::F(i)) as usize] = format!("F{i}");
        letters[l(Gen::K(i)) as usize] = format!("K{i}");
        letters[l(Gen::Kinv(i)) as usize] = format!("K{i}^-1");
        letters[l(Gen::E(i)) as usize] = format!("E{i}");
        star[l(Gen::F(i)) as usize] = l(Gen::E(i));
        star[l(Gen::E(i)) as usize] = l(Gen::F(i));
        star[l(Gen::K(i)) as usize] = l(Gen::K(i));
        star[l(Gen::Kinv(i)) as usize] = l(Gen::Kinv(i));
        inverse[l(Gen::K(i)) as usize] = Some(l(Gen::Kinv(i)));
        inverse[l(Gen::Kinv(i)) as usize] = Some(l(Gen::K(i)));
    }
    let mut rules = Vec::new();
    let mut rule = |lhs: Vec<Letter>, rhs: Element| rules.push(Rule { lhs: Word(lhs), rhs });
    let qq = Scalar::q() - Scalar::q_pow(-1);
    let two = Scalar::qint(2);
    // Cartan part
    let kl: Vec<(usize, bool)> = (1..=r).flat_map(|i| [(i, false), (i, true)]).collect();
    let kle = |(i, inv): (usize, bool)| if inv { l(Gen::Kinv(i)) } else { l(Gen::K(i)) };
    for &a in &kl {
        for &b in &kl {
            let (la, lb) = (kle(a), kle(b));
            if la <= lb && !(a.0 == b.0 && a.1 != b.1) {
                continue;
            }
            if a.0 == b.0 && a.1 != b.1 {
                rule(vec![la, lb], Element::one());
            } else {
                rule(vec![la, lb], Element::word(&[lb, la]));
            }
        }
    }
    for i in 1..=r {
        for j in 1..=r {
            let c = two_c(i, j);
            // E_j K_i^{±1} = q^{∓c_ij} K_i^{±1} E_j,   K_i^{±1} F_j = q^{∓c_ij} F_j K_i^{±1}
            rule(vec![l(Gen::E(j)), l(Gen::K(i))], Element::term(Word(vec![l(Gen::K(i)), l(Gen::E(j))]), Scalar::v_pow(-c)));
            rule(vec![l(Gen::E(j)), l(Gen::Kinv(i))], Element::term(Word(vec![l(Gen::Kinv(i)), l(Gen::E(j))]), Scalar::v_pow(c)));
            rule(vec![l(Gen::K(i)), l(Gen::F(j))], Element::term(Word(vec![l(Gen::F(j)), l(Gen::K(i))]), Scalar::v_pow(-c)));
            rule(vec![l(Gen::Kinv(i)), l(Gen::F(j))], Element::term(Word(vec![l(Gen::F(j)), l(Gen::Kinv(i))]), Scalar::v_pow(c)));
            // E_i F_j = F_j E_i + δ_ij (K_i^2 - K_i^{-2})/(q - q^{-1})
            let mut rhs = Element::word(&[l(Gen::F(j)), l(Gen::E(i))]);
            if i == j {
                let inv = qq.inv().unwrap();
                rhs.add_term(Word(vec![l(Gen::K(i)), l(Gen::K(i))]), &inv);
                rhs.add_term(Word(vec![l(Gen::Kinv(i)), l(Gen::Kinv(i))]), &-&inv);
            }
            rule(vec![l(Gen::E(i)), l(Gen::F(j))], rhs);
        }
    }
    for i in 1..=r {
        for j in i + 1..=r {
            if j > i + 1 {
                rule(vec![l(Gen::E(j)), l(Gen::E(i))], Element::word(&[l(Gen::E(i)), l(Gen::E(j))]));
                rule(vec![l(Gen::F(j)), l(Gen::F(i))], Element::word(&[l(Gen::F(i)), l(Gen::F(j))]));
            } else {
                for g in [Gen::E as fn(usize) -> Gen, Gen::F as fn(usize) -> Gen] {
                    let (a, b) = (l(g(i)), l(g(j)));
                    // b a a = [2] a b a - a a b ;  b b a = [2] b a b - a b b
                    let mut r1 = Element::term(Word(vec![a, b, a]), two.clone());
                    r1.add_term(Word(vec![a, a, b]), &Scalar::int(-1));
                    rule(vec![b, a, a], r1);
                    let mut r2 = Element::term(Word(vec![b, a, b]), two.clone());
                    r2.add_term(Word(vec![a, b, b]), &Scalar::int(-1));
                    rule(vec![b, b, a], r2);
                }
            }
        }
    }
    Presentation { name: format!("U_q(su({}))", r + 1), letters, star, inverse, grading: vec![0; n], rules }
}

impl Uq {
    /// Builds the algebra, completing the rewriting system up to `bound`.
    pub fn with_bound(r: usize, bound: usize) -> Self {
        assert!(r >= 1);
        let (alg, completion) = complete(&uq_presentation(r), bound, 500).expect("U_q completion");
        Uq { r, alg, completion }
    }

    pub fn new(r: usize) -> Self {
        Self::with_bound(r, 6)
    }

    pub fn r(&self) -> usize {
        self.r
    }

    pub fn algebra(&self) -> &Algebra {
        &self.alg
    }

    pub fn completion_report(&self) -> &ConfluenceReport {
        &self.completion
    }

    pub fn letter(&self, g: Gen) -> Letter {
        letter_of(self.r, g)
    }

    pub fn gen(&self, g: Gen) -> Element {
        Element::letter(self.letter(g))
    }

    pub fn classify(&self, l: Letter) -> Gen {
        gen_of(self.r, l)
    }

    pub fn e(&self, i: usize) -> Element {
        self.gen(Gen::E(i))
    }
    pub fn f(&self, i: usize) -> Element {
        self.gen(Gen::F(i))
    }
    pub fn k(&self, i: usize) -> Element {
        self.gen(Gen::K(i))
    }
    pub fn kinv(&self, i: usize) -> Element {
        self.gen(Gen::Kinv(i))
    }

    pub fn mul(&self, a: &Element, b: &Element) -> Element {
        self.alg.mul(a, b)
    }

    pub fn star(&self, a: &Element) -> Element {
        self.alg.star(a)
    }

    /// `M_r = E_r`, `M_j = E_j M_{j+1} - q^{-1} M_{j+1} E_j`.
    pub fn m_element(&self, j: usize) -> Result<Element, String> {
        if j == 0 || j > self.r {
            return Err(format!("index {j} out of range 1..={}", self.r));
        }
        let mut m = self.e(self.r);
        for k in (j..self.r).rev() {
            let ek = self.e(k);
            m = &self.mul(&ek, &m) - &self.mul(&m, &ek).scale(&Scalar::q_pow(-1));
        }
        Ok(m)
    }

    /// `L_j = K_j ⋯ K_r`.
    pub fn l_element(&self, j: usize) -> Result<Element, String> {
        if j == 0 || j > self.r {
            return Err(format!("index {j} out of range 1..={}", self.r));
        }
        Ok((j..=self.r).fold(Element::one(), |acc, k| self.mul(&acc, &self.k(k))))
    }

    // ---- Hopf structure ----

    fn letter_coproduct(&self, l: Letter) -> Vec<(Letter, Letter)> {
        match self.classify(l) {
            Gen::K(_) | Gen::Kinv(_) => vec![(l, l)],
            Gen::E(i) | Gen::F(i) => vec![(l, self.letter(Gen::K(i))), (self.letter(Gen::Kinv(i)), l)],
        }
    }

    /// Legwise product of two tensors with the same number of legs.
    pub fn tensor_mul(&self, a: &Tensor, b: &Tensor) -> Tensor {
        let mut out = Tensor::zero();
        for (ka, ca) in a.terms() {
            for (kb, cb) in b.terms() {
                let legs: Vec<Element> =
                    ka.iter().zip(kb).map(|(x, y)| self.alg.nf_word(&x.concat(y).0)).collect();
                let refs: Vec<&Element> = legs.iter().collect();
                out.add(&Tensor::from_elements(&refs), &(ca * cb));
            }
        }
        out
    }

    pub fn coproduct_word(&self, w: &Word) -> Tensor {
        let mut acc = Tensor::pure(vec![Word::empty(), Word::empty()], Scalar::one());
        for &l in &w.0 {
            let mut d = Tensor::zero();
            for (a, b) in self.letter_coproduct(l) {
                d.add_term(vec![Word(vec![a]), Word(vec![b])], &Scalar::one());
            }
            acc = self.tensor_mul(&acc, &d);
        }
        acc
    }

    pub fn coproduct(&self, x: &Element) -> Tensor {
        let mut out = Tensor::zero();
        for (w, c) in x.terms() {
            out.add(&self.coproduct_word(w), c);
        }
        out
    }

    pub fn counit(&self, x: &Element) -> Scalar {
        let mut out = Scalar::zero();
        for (w, c) in x.terms() {
            if w.0.iter().all(|&l| matches!(self.classify(l), Gen::K(_) | Gen::Kinv(_))) {
                out = &out + c;
            }
        }
        out
    }

    fn letter_antipode(&self, l: Letter) -> Element {
        match self.classify(l) {
            Gen::K(i) => self.kinv(i),
            Gen::Kinv(i) => self.k(i),
            Gen::E(_) => Element::term(Word(vec![l]), -Scalar::q()),
            Gen::F(_) => Element::term(Word(vec![l]), -Scalar::q_pow(-1)),
        }
    }

    pub fn antipode(&self, x: &Element) -> Element {
        let mut out = Element::zero();
        for (w, c) in x.terms() {
            let mut acc = Element::one();
            for &l in w.0.iter().rev() {
                acc = self.mul(&acc, &self.letter_antipode(l));
            }
            out.add_scaled(&acc, c);
        }
        out
    }

    /// Applies `f` to leg `leg` of every basis tensor.
    pub fn map_leg(&self, t: &Tensor, leg: usize, f: impl Fn(&Word) -> Tensor) -> Tensor {
        let mut out = Tensor::zero();
        for (k, c) in t.terms() {
            let img = f(&k[leg]);
            for (ik, ic) in img.terms() {
                let mut legs: Vec<Word> = k[..leg].to_vec();
                legs.extend(ik.iter().cloned());
                legs.extend(k[leg + 1..].iter().cloned());
                out.add_term(legs, &(c * ic));
            }
        }
        out
    }

    /// Multiplies all legs together.
    pub fn multiply(&self, t: &Tensor) -> Element {
        let mut out = Element::zero();
        for (k, c) in t.terms() {
            let w = k.iter().fold(Word::empty(), |acc, x| acc.concat(x));
            out.add_scaled(&self.alg.nf_word(&w.0), c);
        }
        out
    }

    pub fn display_tensor(&self, t: &Tensor) -> String {
        if t.is_zero() {
            return "0".into();
        }
        t.terms()
            .map(|(k, c)| {
                let legs: Vec<String> = k.iter().map(|w| self.alg.display(&Element::word(&w.0))).collect();
                format!("({c}) {}", legs.join(" ⊗ "))
            })
            .collect::<Vec<_>>()
            .join(" + ")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn coproduct_of_e1() {
        let u = Uq::new(1);
        let d = u.coproduct(&u.e(1));
        let mut want = Tensor::from_elements(&[&u.e(1), &u.k(1)]);
        want.add(&Tensor::from_elements(&[&u.kinv(1), &u.e(1)]), &Scalar::one());
        assert_eq!(d, want);
    }

    #[test]
    fn grouplike_products() {
        let u = Uq::new(2);
        let kk = u.mul(&u.k(1), &u.k(2));
        assert_eq!(u.coproduct(&kk), Tensor::from_elements(&[&kk, &kk]));
        assert_eq!(u.counit(&u.k(1)), Scalar::one());
        assert!(u.counit(&u.e(2)).is_zero());
    }

    #[test]
    fn antipode_values() {
        let u = Uq::new(2);
        assert_eq!(u.antipode(&u.f(1)), u.f(1).scale(&-Scalar::q_pow(-1)));
        let e12 = u.mul(&u.e(1), &u.e(2));
        let want = u.mul(&u.e(2), &u.e(1)).scale(&Scalar::q_pow(2));
        assert_eq!(u.antipode(&e12), want);
    }

    #[test]
    fn m_and_l_elements() {
        let u = Uq::new(2);
        assert_eq!(u.m_element(2).unwrap(), u.e(2));
        let want = &u.mul(&u.e(1), &u.e(2)) - &u.mul(&u.e(2), &u.e(1)).scale(&Scalar::q_pow(-1));
        assert_eq!(u.m_element(1).unwrap(), want);
        assert_eq!(u.l_element(2).unwrap(), u.k(2));
        assert!(u.m_element(3).is_err());
    }

    #[test]
    fn hopf_maps_respect_relations() {
        for r in [1, 2] {
            let u = Uq::new(r);
            for rule in &u.algebra().presentation().rules {
                let lhs = Element::term(rule.lhs.clone(), Scalar::one());
                let (dl, dr) = (u.coproduct(&lhs), u.coproduct(&rule.rhs));
                assert_eq!(dl, dr, "Δ breaks {:?}", rule.lhs);
                assert_eq!(u.counit(&lhs), u.counit(&rule.rhs));
                assert_eq!(u.antipode(&lhs), u.antipode(&rule.rhs), "S breaks {:?}", rule.lhs);
                assert_eq!(u.star(&lhs), u.star(&rule.rhs));
            }
        }
    }

    #[test]
    fn confluent_after_completion() {
        for r in [1, 2, 3] {
            let u = Uq::new(r);
            assert!(u.completion_report().unresolved.is_empty());
        }
    }
}
