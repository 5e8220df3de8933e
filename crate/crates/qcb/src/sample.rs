//! Seeded random elements for the identity suites.

use rand::seq::SliceRandom;
use rand::Rng;

use crate::ncalg::{Algebra, Element, Letter, Word};
use crate::qhopf::forms::{FormElement, Mask};
use crate::scalars::Scalar;
use crate::sphere::Sphere;

/// Small nonzero coefficient: `±k·q^e` with `k ∈ 1..=3`, `e ∈ -1..=1`.
pub fn coeff<R: Rng>(rng: &mut R) -> Scalar {
    let k = rng.gen_range(1..=3) * if rng.gen_bool(0.5) { 1 } else { -1 };
    &Scalar::int(k) * &Scalar::q_pow(rng.gen_range(-1..=1))
}

/// Random word of length `len` in the given letters.
pub fn word<R: Rng>(rng: &mut R, letters: &[Letter], len: usize) -> Word {
    Word((0..len).map(|_| *letters.choose(rng).unwrap()).collect())
}

/// Reduced sum of `terms` random words of length ≤ `max_len`.
pub fn element<R: Rng>(rng: &mut R, alg: &Algebra, max_len: usize, terms: usize) -> Element {
    let letters: Vec<Letter> = (0..alg.ngens() as Letter).collect();
    let mut raw = Element::zero();
    for _ in 0..terms {
        let len = rng.gen_range(0..=max_len);
        raw.add_term(word(rng, &letters, len), &coeff(rng));
    }
    alg.reduce(&raw)
}

/// Nonzero random element (retries on cancellation).
pub fn nonzero_element<R: Rng>(rng: &mut R, alg: &Algebra, max_len: usize, terms: usize) -> Element {
    loop {
        let e = element(rng, alg, max_len, terms);
        if !e.is_zero() {
            return e;
        }
    }
}

/// Random homogeneous sphere element of circle degree `n` built from normal
/// words of length ≤ `max_len`; zero if there are none.
pub fn homogeneous<R: Rng>(rng: &mut R, s: &Sphere, n: i32, max_len: usize, terms: usize) -> Element {
    let words: Vec<Word> = s.normal_words(max_len).into_iter().filter(|w| s.word_degree(w) == n).collect();
    let mut out = Element::zero();
    if words.is_empty() {
        return out;
    }
    for _ in 0..terms {
        out.add_term(words.choose(rng).unwrap().clone(), &coeff(rng));
    }
    out
}

/// Random monomial (normal word with coefficient 1) of length exactly `len`.
pub fn monomial<R: Rng>(rng: &mut R, alg: &Algebra, len: usize) -> Element {
    let letters: Vec<Letter> = (0..alg.ngens() as Letter).collect();
    loop {
        let w = word(rng, &letters, len);
        if alg.is_normal(&w) {
            return Element::term(w, Scalar::one());
        }
    }
}

/// Random form in `O(SU_q) ⊗ Λ(ℂ^r)` with legs of length ≤ `max_len`.
pub fn form<R: Rng>(rng: &mut R, alg: &Algebra, r: usize, max_len: usize, terms: usize) -> FormElement {
    let mut f = FormElement::default();
    for _ in 0..terms {
        let m: Mask = rng.gen_range(0..(1u32 << r));
        let x = element(rng, alg, max_len, 1);
        f.add(m, &x, &Scalar::one());
    }
    f
}
