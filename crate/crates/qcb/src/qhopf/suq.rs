//! Coordinate algebra of SU_q(N).
//!
//! Elements live in the FRT bialgebra O(M_q(N)), whose quadratic relations
//! form a confluent rewriting system (every ambiguity has length 3). The
//! quotient by `D_q - 1` is handled without rewriting: `D_q` is central and
//! homogeneous of degree `N` in a graded domain, so `f ≡ 0 (mod D_q - 1)` iff
//! for every residue class `c mod N` the homogenized sum
//! `Σ_{k ≡ c} f_k D_q^{(K_c - k)/N}` vanishes in O(M_q(N)).

use std::collections::BTreeMap;

use crate::ncalg::{Algebra, Certification, Element, Letter, Presentation, Rule, Word};
use crate::scalars::Scalar;

/// Letter index of `u_{ij}` (1-based indices, row-major order).
pub fn u_index(n: usize, i: usize, j: usize) -> Letter {
    ((i - 1) * n + (j - 1)) as Letter
}

/// FRT presentation of O(M_q(N)) oriented along the row-major letter order.
pub fn frt_presentation(n: usize) -> Presentation {
    let q = Scalar::q();
    let qi = Scalar::q_pow(-1);
    let diff = &q - &qi;
    let mut letters = Vec::new();
    for i in 1..=n {
        for j in 1..=n {
            letters.push(format!("u{i}{j}"));
        }
    }
    let m = n * n;
    let mut rules = Vec::new();
    let u = |i, j| u_index(n, i, j);
    for a in 1..=n {
        for b in 1..=n {
            for c in 1..=n {
                for d in 1..=n {
                    let (x, y) = (u(a, b), u(c, d));
                    if x <= y {
                        continue;
                    }
                    let lhs = Word(vec![x, y]);
                    let rhs = if a == c {
                        Element::term(Word(vec![y, x]), qi.clone())
                    } else if b == d {
                        Element::term(Word(vec![y, x]), qi.clone())
                    } else if b < d {
                        Element::word(&[y, x])
                    } else {
                        let mut e = Element::word(&[y, x]);
                        e.add_term(Word(vec![u(c, b), u(a, d)]), &(-&diff));
                        e
                    };
                    rules.push(Rule { lhs, rhs });
                }
            }
        }
    }
    Presentation {
        name: format!("O(M_q({n}))"),
        letters,
        star: (0..m as Letter).collect(),
        inverse: vec![None; m],
        grading: vec![0; m],
        rules,
    }
}

fn permutations(n: usize) -> Vec<(Vec<usize>, usize)> {
    // (permutation, inversion count)
    let mut out = Vec::new();
    let mut p: Vec<usize> = (0..n).collect();
    fn rec(k: usize, p: &mut Vec<usize>, out: &mut Vec<(Vec<usize>, usize)>) {
        if k == p.len() {
            let mut inv = 0;
            for i in 0..p.len() {
                for j in i + 1..p.len() {
                    if p[i] > p[j] {
                        inv += 1;
                    }
                }
            }
            out.push((p.clone(), inv));
            return;
        }
        for i in k..p.len() {
            p.swap(k, i);
            rec(k + 1, p, out);
            p.swap(k, i);
        }
    }
    rec(0, &mut p, &mut out);
    out
}

pub struct SuQ {
    n: usize,
    alg: Algebra,
    det: Element,
    star_gen: Vec<Element>,
}

impl std::fmt::Debug for SuQ {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "SuQ({})", self.n)
    }
}

impl SuQ {
    pub fn new(n: usize) -> Self {
        assert!(n >= 2, "SU_q(N) needs N >= 2");
        let alg = Algebra::new(frt_presentation(n)).expect("FRT rules decrease").certify(3).expect("FRT system is confluent");
        assert_eq!(alg.certification(), Certification::All);
        let mut s = SuQ { n, alg, det: Element::zero(), star_gen: Vec::new() };
        let all: Vec<usize> = (1..=n).collect();
        s.det = s.minor(&all, &all);
        let mut star_gen = Vec::new();
        for i in 1..=n {
            for j in 1..=n {
                let rows: Vec<usize> = all.iter().copied().filter(|&x| x != i).collect();
                let cols: Vec<usize> = all.iter().copied().filter(|&x| x != j).collect();
                let sign = Scalar::int(-1).pow(j as i32 - i as i32);
                let c = &sign * &Scalar::q_pow(j as i32 - i as i32);
                star_gen.push(s.minor(&rows, &cols).scale(&c));
            }
        }
        s.star_gen = star_gen;
        s
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn algebra(&self) -> &Algebra {
        &self.alg
    }

    pub fn u(&self, i: usize, j: usize) -> Element {
        Element::letter(u_index(self.n, i, j))
    }

    pub fn det(&self) -> &Element {
        &self.det
    }

    /// Quantum minor on sorted row and column sets.
    pub fn minor(&self, rows: &[usize], cols: &[usize]) -> Element {
        assert_eq!(rows.len(), cols.len());
        if rows.is_empty() {
            return Element::one();
        }
        let mut out = Element::zero();
        for (p, inv) in permutations(rows.len()) {
            let w: Vec<Letter> = rows.iter().zip(&p).map(|(&r, &k)| u_index(self.n, r, cols[k])).collect();
            let c = &Scalar::int(-1).pow(inv as i32) * &Scalar::q_pow(inv as i32);
            out.add_scaled(&self.alg.nf_word(&w), &c);
        }
        out
    }

    pub fn mul(&self, a: &Element, b: &Element) -> Element {
        self.alg.mul(a, b)
    }

    pub fn reduce(&self, a: &Element) -> Element {
        self.alg.reduce(a)
    }

    /// Image of `u_{ij}` under the involution of O(SU_q(N)).
    pub fn star_gen(&self, l: Letter) -> &Element {
        &self.star_gen[l as usize]
    }

    /// Anti-multiplicative involution; the result is a representative modulo `D_q - 1`.
    pub fn star(&self, a: &Element) -> Element {
        let mut out = Element::zero();
        for (w, c) in a.terms() {
            let mut acc = Element::one();
            for &l in w.0.iter().rev() {
                acc = self.alg.mul(&acc, &self.star_gen[l as usize]);
            }
            out.add_scaled(&acc, c);
        }
        out
    }

    /// Membership in the ideal generated by `D_q - 1`.
    pub fn is_zero(&self, f: &Element) -> bool {
        let f = self.alg.reduce(f);
        if f.is_zero() {
            return true;
        }
        let mut classes: BTreeMap<usize, BTreeMap<usize, Element>> = BTreeMap::new();
        for (w, c) in f.terms() {
            classes.entry(w.len() % self.n).or_default().entry(w.len()).or_default().add_term(w.clone(), c);
        }
        for comps in classes.values() {
            let top = *comps.keys().next_back().unwrap();
            let mut acc = Element::zero();
            for (&k, fk) in comps {
                let e = ((top - k) / self.n) as u32;
                acc = &acc + &self.alg.mul(&self.alg.pow(&self.det, e), fk);
            }
            if !acc.is_zero() {
                return false;
            }
        }
        true
    }

    pub fn equal(&self, a: &Element, b: &Element) -> bool {
        self.is_zero(&(a - b))
    }

    pub fn display(&self, a: &Element) -> String {
        self.alg.display(a)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn su2_star_matches_classical_pattern() {
        let s = SuQ::new(2);
        let (a, b, c, d) = (s.u(1, 1), s.u(1, 2), s.u(2, 1), s.u(2, 2));
        assert_eq!(s.star(&a), d);
        assert_eq!(s.star(&b), c.scale(&-Scalar::q()));
        assert_eq!(s.star(&c), b.scale(&-Scalar::q_pow(-1)));
        // D_q = ad - q bc
        let mut det = s.mul(&a, &d);
        det.add_scaled(&s.mul(&b, &c), &-Scalar::q());
        assert_eq!(s.det(), &det);
    }

    #[test]
    fn star_is_involutive_and_respects_relations() {
        for n in [2, 3] {
            let s = SuQ::new(n);
            for l in 0..(n * n) as Letter {
                let x = Element::letter(l);
                assert!(s.equal(&s.star(&s.star(&x)), &x), "star star u at n={n}");
            }
            for r in &s.algebra().presentation().rules {
                let lhs = s.star(&Element::term(r.lhs.clone(), Scalar::one()));
                let rhs = s.star(&r.rhs);
                assert!(s.equal(&lhs, &rhs), "star breaks {:?}", r.lhs);
            }
        }
    }

    #[test]
    fn unitarity_of_fundamental_corepresentation() {
        // Σ_k u_ik u_jk* = δ_ij and Σ_k u_ki* u_kj = δ_ij
        for n in [2, 3] {
            let s = SuQ::new(n);
            for i in 1..=n {
                for j in 1..=n {
                    let mut a = Element::zero();
                    let mut b = Element::zero();
                    for k in 1..=n {
                        a = &a + &s.mul(&s.u(i, k), &s.star(&s.u(j, k)));
                        b = &b + &s.mul(&s.star(&s.u(k, i)), &s.u(k, j));
                    }
                    let want = if i == j { Element::one() } else { Element::zero() };
                    assert!(s.equal(&a, &want) && s.equal(&b, &want), "n={n} i={i} j={j}");
                }
            }
        }
    }

    #[test]
    fn quotient_detects_nonzero() {
        let s = SuQ::new(2);
        assert!(s.is_zero(&(s.det() - &Element::one())));
        assert!(!s.is_zero(&s.u(1, 1)));
        assert!(!s.is_zero(&(s.det() - &Element::scalar(Scalar::int(2)))));
    }
}
