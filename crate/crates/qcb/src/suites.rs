//! Exact identity suites over the sphere, U_q and O(SU_q) layers.
//!
//! Each suite returns a [`Check`]; randomized suites derive one ChaCha stream
//! per sample from the run seed, so results do not depend on thread count.

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

pub use crate::report::Check;
use crate::ncalg::{check_local_confluence, Element, Letter, Word};
use crate::qhopf::{Dolbeault, Gen, Tensor, UqAction};
use crate::sample;
use crate::scalars::Scalar;
use crate::sphere::{sphere_presentation, Sphere};

pub fn sample_rng(seed: u64, i: usize) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed ^ (i as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15))
}

/// Runs `f` on `count` independent samples in parallel; returns the first
/// failure in sample order.
pub fn run_samples<F>(count: usize, seed: u64, f: F) -> Option<String>
where
    F: Fn(&mut ChaCha8Rng, usize) -> Result<(), String> + Sync,
{
    let res: Vec<Result<(), String>> = (0..count).into_par_iter().map(|i| f(&mut sample_rng(seed, i), i)).collect();
    res.into_iter().find_map(|r| r.err())
}

/// Shared exact context for rank r.
#[derive(Clone)]
pub struct Exact {
    pub r: usize,
    pub sphere: Arc<Sphere>,
    pub dol: Dolbeault,
}

impl Exact {
    pub fn new(r: usize) -> Self {
        let sphere = Arc::new(Sphere::new(r));
        let dol = Dolbeault::from_parts(UqAction::new(r), sphere.clone());
        Exact { r, sphere, dol }
    }

    fn act(&self) -> &UqAction {
        &self.dol.act
    }

    fn show_s(&self, x: &Element) -> String {
        self.sphere.display(x)
    }
}

// ---- sphere layer ----

pub fn sphere_confluence(r: usize, bound: usize) -> Check {
    let rep = check_local_confluence(&sphere_presentation(r), bound).expect("valid presentation");
    let fail = (!rep.unresolved.is_empty()).then(|| format!("{:?}", rep.unresolved[0]));
    Check::new("sphere-confluence", "all critical pairs of the sphere rules resolve", r, None, rep.pairs_checked, fail)
}

pub fn normal_form_agreement(ex: &Exact, count: usize, seed: u64) -> Check {
    let alg = ex.sphere.algebra();
    let letters: Vec<Letter> = (0..alg.ngens() as Letter).collect();
    let fail = run_samples(count, seed, |rng, _| {
        let mut raw = Element::zero();
        for _ in 0..rng.gen_range(1..=4) {
            let len = rng.gen_range(0..=4);
            raw.add_term(sample::word(rng, &letters, len), &sample::coeff(rng));
        }
        let a = alg.reduce(&raw);
        let b = alg.reduce_random(&raw, rng);
        (a == b).then_some(()).ok_or_else(|| format!("{raw:?}: {} vs {}", alg.display(&a), alg.display(&b)))
    });
    Check::new("normal-form-agreement", "leftmost and random-redex reductions agree", ex.r, Some(seed), count, fail)
}

pub fn associativity_and_star(ex: &Exact, count: usize, seed: u64) -> Check {
    let s = &ex.sphere;
    let alg = s.algebra();
    let fail = run_samples(count, seed, |rng, _| {
        let a = sample::element(rng, alg, 2, 2);
        let b = sample::element(rng, alg, 2, 2);
        let c = sample::element(rng, alg, 2, 2);
        if s.mul(&s.mul(&a, &b), &c) != s.mul(&a, &s.mul(&b, &c)) {
            return Err(format!("(ab)c != a(bc) for a={}, b={}, c={}", ex.show_s(&a), ex.show_s(&b), ex.show_s(&c)));
        }
        if s.star(&s.mul(&a, &b)) != s.mul(&s.star(&b), &s.star(&a)) {
            return Err(format!("(ab)* != b*a* for a={}, b={}", ex.show_s(&a), ex.show_s(&b)));
        }
        if s.star(&s.star(&a)) != a {
            return Err(format!("a** != a for a={}", ex.show_s(&a)));
        }
        let pa = s.decompose(&a);
        let pb = s.decompose(&b);
        let ab = s.decompose(&s.mul(&a, &b));
        for (n, part) in &ab {
            let mut conv = Element::zero();
            for (k, x) in &pa {
                if let Some(y) = pb.get(&(n - k)) {
                    conv = &conv + &s.mul(x, y);
                }
            }
            if &conv != part {
                return Err(format!("grading not multiplicative at n={n}"));
            }
        }
        Ok(())
    });
    Check::new("associativity-star-grading", "(ab)c = a(bc), (ab)* = b*a*, P_n(ab) = Σ_k P_k(a)P_{n-k}(b)", ex.r, Some(seed), count, fail)
}

pub fn frames(ex: &Exact, max_n: i32) -> Check {
    let s = &ex.sphere;
    let mut fail = None;
    let mut checked = 0;
    for n in -max_n..=max_n {
        let f = s.frame_for_degree(n);
        checked += 1;
        if f.elements.len() != s.n().pow(n.unsigned_abs()) {
            fail = Some(format!("frame of degree {n} has {} elements", f.elements.len()));
            break;
        }
        if !s.verify_frame(&f) {
            fail = Some(format!("Σ ζζ* != 1 in degree {n}"));
            break;
        }
    }
    Check::new("frames", "Σ_j ζ_j ζ_j* = 1 with (r+1)^|n| homogeneous elements", ex.r, None, checked, fail)
}

pub fn canonical_map(ex: &Exact, count: usize, max_n: i32, seed: u64) -> Check {
    let s = &ex.sphere;
    let fail = run_samples(count, seed, |rng, _| {
        let x = sample::element(rng, s.algebra(), 2, 2);
        let m = rng.gen_range(-max_n..=max_n);
        s.canonical_map_check(&x, m)
            .then_some(())
            .ok_or_else(|| format!("can(Σ xζ⊗ζ*) != x⊗z^{m} for x={}", ex.show_s(&x)))
    });
    Check::new("canonical-map", "can(Σ_j x ζ_j ⊗ ζ_j*) = x ⊗ z^m", ex.r, Some(seed), count, fail)
}

// ---- U_q layer ----

pub fn hopf_axioms(ex: &Exact, count: usize, seed: u64) -> Check {
    let uq = &*ex.act().uq;
    let alg = uq.algebra();
    let check_one = |x: &Element| -> Result<(), String> {
        let d = uq.coproduct(x);
        let dw = |w: &Word| uq.coproduct_word(w);
        if uq.map_leg(&d, 0, dw) != uq.map_leg(&d, 1, dw) {
            return Err(format!("coassociativity fails on {}", alg.display(x)));
        }
        let eps = |w: &Word| Tensor::pure(vec![], uq.counit(&Element::word(&w.0)));
        let want = Tensor::from_elements(&[x]);
        if uq.map_leg(&d, 0, eps) != want || uq.map_leg(&d, 1, eps) != want {
            return Err(format!("counit law fails on {}", alg.display(x)));
        }
        let s = |w: &Word| Tensor::from_elements(&[&uq.antipode(&Element::word(&w.0))]);
        let unit = Element::scalar(uq.counit(x));
        if uq.multiply(&uq.map_leg(&d, 0, s)) != unit || uq.multiply(&uq.map_leg(&d, 1, s)) != unit {
            return Err(format!("antipode law fails on {}", alg.display(x)));
        }
        Ok(())
    };
    let mut fail = (0..alg.ngens() as Letter).find_map(|l| check_one(&Element::letter(l)).err());
    if fail.is_none() {
        fail = run_samples(count, seed, |rng, _| {
            let x = sample::element(rng, alg, 3, 2);
            let y = sample::element(rng, alg, 2, 2);
            check_one(&x)?;
            let xy = uq.mul(&x, &y);
            if uq.antipode(&xy) != uq.mul(&uq.antipode(&y), &uq.antipode(&x)) {
                return Err(format!("S not anti-multiplicative on {}, {}", alg.display(&x), alg.display(&y)));
            }
            if uq.counit(&xy) != &uq.counit(&x) * &uq.counit(&y) {
                return Err("counit not multiplicative".into());
            }
            if uq.coproduct(&xy) != uq.tensor_mul(&uq.coproduct(&x), &uq.coproduct(&y)) {
                return Err("coproduct not multiplicative".into());
            }
            Ok(())
        });
    }
    Check::new(
        "hopf-axioms",
        "(Δ⊗id)Δ = (id⊗Δ)Δ, (ε⊗id)Δ = id = (id⊗ε)Δ, m(S⊗id)Δ = ε1 = m(id⊗S)Δ",
        ex.r,
        Some(seed),
        count + alg.ngens(),
        fail,
    )
}

// ---- action and forms ----

pub fn generator_vanishing(ex: &Exact) -> Check {
    let s = &ex.sphere;
    let act = ex.act();
    let dol = &ex.dol;
    let suq = dol.suq();
    let mut fail = None;
    'outer: for j in 1..=s.n() {
        let z = dol.embed(&s.z(j));
        let zs = dol.embed(&s.zs(j));
        for i in 1..=ex.r {
            if !suq.is_zero(&act.act(&act.uq.f(i), &z)) || !suq.is_zero(&act.act(&act.uq.e(i), &zs)) {
                fail = Some(format!("d_F{i}(z{j}) or d_E{i}(z{j}*) nonzero"));
                break 'outer;
            }
            if !suq.is_zero(&dol.dj(i, &z)) || !suq.is_zero(&dol.dj_dagger(i, &zs)) {
                fail = Some(format!("d_{i}(z{j}) or d_{i}†(z{j}*) nonzero"));
                break 'outer;
            }
        }
    }
    Check::new("generator-vanishing", "d_{F_i}(z_j) = 0 = d_{E_i}(z_j*), d_i(z_j) = 0 = d_i†(z_j*)", ex.r, None, s.n() * ex.r, fail)
}

pub fn k_eigenvalue(ex: &Exact, max_len: usize) -> Check {
    let s = &ex.sphere;
    let act = ex.act();
    let dol = &ex.dol;
    let suq = dol.suq();
    let r = ex.r;
    let words = s.normal_words(max_len);
    let fail = words.par_iter().find_map_first(|w| {
        let a = Element::word(&w.0);
        let x = dol.embed(&a);
        let n = s.word_degree(w);
        if !suq.equal(&act.act(&act.uq.k(r), &x), &x.scale(&Scalar::v_pow(-n))) {
            return Some(format!("d_K{r}({}) != q^{{-{n}/2}}·a", s.display(&a)));
        }
        for t in 1..r {
            if !suq.equal(&act.act(&act.uq.k(t), &x), &x)
                || !suq.is_zero(&act.act(&act.uq.e(t), &x))
                || !suq.is_zero(&act.act(&act.uq.f(t), &x))
            {
                return Some(format!("K{t}/E{t}/F{t} do not act trivially on {}", s.display(&a)));
            }
        }
        None
    });
    Check::new("k-eigenvalue", "d_{K_r}(a) = q^{-n/2} a on degree-n monomials", r, None, words.len(), fail)
}

pub fn twisted_leibniz(ex: &Exact, count: usize, seed: u64) -> Check {
    let s = &ex.sphere;
    let dol = &ex.dol;
    let suq = dol.suq();
    let fail = run_samples(count, seed, |rng, _| {
        let x = sample::element(rng, s.algebra(), 3, 2);
        let y = sample::element(rng, suq.algebra(), 2, 2);
        let xe = dol.embed(&x);
        let bx = dol.embed(&s.beta(&x, -2));
        let xy = suq.mul(&xe, &y);
        for j in 1..=ex.r {
            for dagger in [false, true] {
                let d = |e: &Element| if dagger { dol.dj_dagger(j, e) } else { dol.dj(j, e) };
                let rhs = &suq.mul(&bx, &d(&y)) + &suq.mul(&d(&xe), &y);
                if !suq.equal(&d(&xy), &rhs) {
                    return Err(format!(
                        "j={j} dagger={dagger}: x={}, y={}",
                        s.display(&x),
                        suq.display(&y)
                    ));
                }
            }
        }
        Ok(())
    });
    Check::new(
        "twisted-leibniz",
        "d_j(xy) = β^{-2}(x) d_j(y) + d_j(x) y and the same for d_j†",
        ex.r,
        Some(seed),
        count,
        fail,
    )
}

/// `δ(ab) = δ(a)φ(b) + q^{-n} φ(a)δ(b)` for homogeneous `a` of degree `n`.
pub fn delta_leibniz(ex: &Exact, count: usize, seed: u64) -> Check {
    let s = &ex.sphere;
    let dol = &ex.dol;
    let fail = run_samples(count, seed, |rng, _| {
        let (n, a) = loop {
            let n = rng.gen_range(-3..=3);
            let a = sample::homogeneous(rng, s, n, 3, 2);
            if !a.is_zero() {
                break (n, a);
            }
        };
        let b = sample::element(rng, s.algebra(), 2, 2);
        let (ae, be) = (dol.embed(&a), dol.embed(&b));
        let lhs = dol.delta_twisted(&dol.embed(&s.mul(&a, &b)));
        let t1 = dol.right_mul(&dol.delta_twisted(&ae), &be);
        let t2 = dol.left_mul(&ae, &dol.delta_twisted(&be));
        let diff = dol.op_sum(&[(&lhs, Scalar::one()), (&t1, Scalar::int(-1)), (&t2, -Scalar::q_pow(-n))]);
        dol.op_is_zero(&diff).then_some(()).ok_or_else(|| format!("a={} (n={n}), b={}", s.display(&a), s.display(&b)))
    });
    Check::new("delta-leibniz", "δ(ab) = δ(a)φ(b) + q^{-n}φ(a)δ(b), a ∈ A_n", ex.r, Some(seed), count, fail)
}

pub fn frame_vanishing(ex: &Exact, max_n: i32) -> Check {
    let s = &ex.sphere;
    let dol = &ex.dol;
    let degrees: Vec<i32> = (-max_n..=max_n).collect();
    let fail = degrees.par_iter().find_map_first(|&n| {
        let f = s.frame_for_degree(n);
        let terms: Vec<_> = f
            .elements
            .par_iter()
            .map(|z| dol.left_mul(&dol.embed(z), &dol.delta_twisted(&dol.embed(&s.star(z)))))
            .collect();
        let refs: Vec<_> = terms.iter().map(|t| (t, Scalar::one())).collect();
        let sum = dol.op_sum(&refs);
        (!dol.op_is_zero(&sum)).then(|| format!("Σ φ(ζ)δ(ζ*) != 0 in degree {n}"))
    });
    Check::new("frame-vanishing", "Σ_j φ(ζ_j) δ(ζ_j*) = 0", ex.r, None, degrees.len(), fail)
}

pub fn dolbeault_squares(ex: &Exact, count: usize, seed: u64) -> Check {
    let dol = &ex.dol;
    let suq = dol.suq();
    let fail = run_samples(count, seed, |rng, _| {
        let w = sample::form(rng, suq.algebra(), ex.r, 3, 2);
        if !dol.form_is_zero(&dol.dolbeault(&dol.dolbeault(&w))) {
            return Err(format!("∂̄² ≠ 0 on {w:?}"));
        }
        if !dol.form_is_zero(&dol.dolbeault_dagger(&dol.dolbeault_dagger(&w))) {
            return Err(format!("(∂̄†)² ≠ 0 on {w:?}"));
        }
        Ok(())
    });
    Check::new("dolbeault-squares", "∂̄² = 0 = (∂̄†)²", ex.r, Some(seed), count, fail)
}

/// `d_{E_s}`, `d_{F_s}`, `d_{K_s}` agree with their generator formulas; the
/// first entries of every suite run.
pub fn action_examples(ex: &Exact) -> Check {
    let act = ex.act();
    let suq = &act.suq;
    let r = ex.r;
    let n = r + 1;
    let mut fail = None;
    for j in 1..=n {
        let z = suq.u(n, j);
        if act.act(&act.uq.k(r), &z) != z.scale(&Scalar::v_pow(-1)) {
            fail = Some(format!("d_K{r}(z{j})"));
        }
        if act.act(&act.uq.e(r), &z) != suq.u(r, j).scale(&-Scalar::q_pow(-1)) {
            fail = Some(format!("d_E{r}(z{j})"));
        }
        if !act.act(&act.uq.gen(Gen::F(r)), &z).is_zero() {
            fail = Some(format!("d_F{r}(z{j})"));
        }
    }
    Check::new("action-examples", "d_K(z_j) = q^{-1/2}z_j, d_E(z_j) = -q^{-1}u_{rj}, d_F(z_j) = 0", r, None, 3 * n, fail)
}

/// All exact suites at their default sizes.
pub fn all_exact(ex: &Exact, seed: u64, count: usize, max_n: i32) -> Vec<Check> {
    vec![
        sphere_confluence(ex.r, 6),
        normal_form_agreement(ex, 5 * count, seed),
        associativity_and_star(ex, count, seed),
        frames(ex, max_n + 1),
        canonical_map(ex, count, max_n, seed),
        hopf_axioms(ex, count, seed),
        action_examples(ex),
        generator_vanishing(ex),
        k_eigenvalue(ex, 3),
        twisted_leibniz(ex, count, seed),
        delta_leibniz(ex, count, seed),
        frame_vanishing(ex, max_n),
        dolbeault_squares(ex, count, seed),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_suites_pass() {
        for r in [1, 2] {
            let ex = Exact::new(r);
            for c in all_exact(&ex, 11, 6, 2) {
                assert!(c.passed, "{} r={r}: {:?}", c.id, c.counterexample);
            }
        }
    }
}
