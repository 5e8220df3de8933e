//! Presented *-algebras over [`Scalar`] with normal forms from an oriented
//! rewriting system, plus critical-pair (overlap) diagnostics and a bounded
//! Knuth–Bendix style completion.
//!
//! Words are compared degree-lexicographically using the letter index as
//! precedence, so the letter numbering of a presentation *is* its order.

use std::cmp::Ordering;
use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::sync::{Arc, RwLock};

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::scalars::Scalar;

pub type Letter = u16;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AlgError {
    #[error("presentation mismatch: letter {0} not in presentation `{1}`")]
    PresentationMismatch(Letter, String),
    #[error("rule {0} does not decrease the word order")]
    NotDecreasing(String),
    #[error("completion failed on critical pair {0}")]
    CompletionFailure(String),
    #[error("inconclusive: degree {degree} exceeds certified bound {bound}")]
    Inconclusive { degree: usize, bound: usize },
    #[error("unknown generator `{0}`")]
    UnknownGenerator(String),
    #[error("bad presentation file: {0}")]
    BadFile(String),
}

/// A word in the free monoid; ordered degree-lexicographically.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct Word(pub Vec<Letter>);

impl Word {
    pub fn empty() -> Self {
        Word(Vec::new())
    }
    pub fn len(&self) -> usize {
        self.0.len()
    }
    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
    pub fn concat(&self, other: &Word) -> Word {
        let mut v = Vec::with_capacity(self.0.len() + other.0.len());
        v.extend_from_slice(&self.0);
        v.extend_from_slice(&other.0);
        Word(v)
    }
}

impl Ord for Word {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.len().cmp(&other.0.len()).then_with(|| self.0.cmp(&other.0))
    }
}

impl PartialOrd for Word {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Debug for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.0)
    }
}

/// Finite linear combination of words. Zero coefficients are never stored.
#[derive(Clone, PartialEq, Eq, Default)]
pub struct Element {
    terms: BTreeMap<Word, Scalar>,
}

impl Element {
    pub fn zero() -> Self {
        Element { terms: BTreeMap::new() }
    }
    pub fn one() -> Self {
        Self::scalar(Scalar::one())
    }
    pub fn scalar(c: Scalar) -> Self {
        Self::term(Word::empty(), c)
    }
    pub fn letter(l: Letter) -> Self {
        Self::term(Word(vec![l]), Scalar::one())
    }
    pub fn word(w: &[Letter]) -> Self {
        Self::term(Word(w.to_vec()), Scalar::one())
    }
    pub fn term(w: Word, c: Scalar) -> Self {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(w, c);
        }
        Element { terms }
    }
    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }
    pub fn terms(&self) -> impl DoubleEndedIterator<Item = (&Word, &Scalar)> {
        self.terms.iter()
    }
    pub fn len(&self) -> usize {
        self.terms.len()
    }
    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }
    pub fn coeff(&self, w: &Word) -> Scalar {
        self.terms.get(w).cloned().unwrap_or_default()
    }
    /// Largest word and its coefficient.
    pub fn leading(&self) -> Option<(&Word, &Scalar)> {
        self.terms.iter().next_back()
    }
    /// Maximal word length.
    pub fn degree(&self) -> usize {
        self.terms.keys().map(|w| w.len()).max().unwrap_or(0)
    }

    pub fn add_term(&mut self, w: Word, c: &Scalar) {
        if c.is_zero() {
            return;
        }
        match self.terms.get_mut(&w) {
            Some(x) => {
                let s = &*x + c;
                if s.is_zero() {
                    self.terms.remove(&w);
                } else {
                    *x = s;
                }
            }
            None => {
                self.terms.insert(w, c.clone());
            }
        }
    }

    /// `self += c * other`.
    pub fn add_scaled(&mut self, other: &Element, c: &Scalar) {
        if c.is_zero() {
            return;
        }
        let unit = c.is_one();
        for (w, x) in &other.terms {
            if unit {
                self.add_term(w.clone(), x);
            } else {
                self.add_term(w.clone(), &(x * c));
            }
        }
    }

    pub fn scale(&self, c: &Scalar) -> Element {
        let mut out = Element::zero();
        out.add_scaled(self, c);
        out
    }

    pub fn map_terms(&self, f: impl Fn(&Word, &Scalar) -> Option<(Word, Scalar)>) -> Element {
        let mut out = Element::zero();
        for (w, c) in &self.terms {
            if let Some((w2, c2)) = f(w, c) {
                out.add_term(w2, &c2);
            }
        }
        out
    }

    pub fn filter(&self, keep: impl Fn(&Word) -> bool) -> Element {
        Element {
            terms: self.terms.iter().filter(|(w, _)| keep(w)).map(|(w, c)| (w.clone(), c.clone())).collect(),
        }
    }

    pub fn pop_leading(&mut self) -> Option<(Word, Scalar)> {
        self.terms.pop_last()
    }
}

impl std::ops::Add for &Element {
    type Output = Element;
    fn add(self, rhs: &Element) -> Element {
        let mut out = self.clone();
        out.add_scaled(rhs, &Scalar::one());
        out
    }
}

impl std::ops::Sub for &Element {
    type Output = Element;
    fn sub(self, rhs: &Element) -> Element {
        let mut out = self.clone();
        out.add_scaled(rhs, &Scalar::int(-1));
        out
    }
}

impl std::ops::Neg for &Element {
    type Output = Element;
    fn neg(self) -> Element {
        self.scale(&Scalar::int(-1))
    }
}

impl fmt::Debug for Element {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.terms.iter().map(|(w, c)| format!("({c}){w:?}")).collect();
        write!(f, "{}", if parts.is_empty() { "0".into() } else { parts.join(" + ") })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Rule {
    pub lhs: Word,
    pub rhs: Element,
}

/// Generators, involution and relations of a presented *-algebra.
#[derive(Clone, Debug)]
pub struct Presentation {
    pub name: String,
    pub letters: Vec<String>,
    pub star: Vec<Letter>,
    /// Two-sided inverse letter, when the generator is declared invertible.
    pub inverse: Vec<Option<Letter>>,
    /// ℤ-degree of each letter (the circle grading where relevant; zeros otherwise).
    pub grading: Vec<i32>,
    pub rules: Vec<Rule>,
}

impl Presentation {
    pub fn letter(&self, name: &str) -> Option<Letter> {
        self.letters.iter().position(|n| n == name).map(|i| i as Letter)
    }

    pub fn word_degree(&self, w: &Word) -> i32 {
        w.0.iter().map(|&l| self.grading[l as usize]).sum()
    }
}

/// Which degrees the normal form is known to be unique in.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Certification {
    Unchecked,
    UpTo(usize),
    All,
}

/// Immutable presented algebra with a memoized normal-form map.
pub struct Algebra {
    pres: Presentation,
    index: HashMap<Vec<Letter>, usize>,
    lhs_lens: Vec<usize>,
    certified: Certification,
    cache: RwLock<HashMap<Vec<Letter>, Element>>,
}

const CACHE_LIMIT: usize = 4_000_000;

impl fmt::Debug for Algebra {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Algebra({}, {} rules, {:?})", self.pres.name, self.pres.rules.len(), self.certified)
    }
}

impl Algebra {
    /// Builds the algebra after checking that every rule strictly decreases the order.
    pub fn new(pres: Presentation) -> Result<Self, AlgError> {
        let n = pres.letters.len();
        for r in &pres.rules {
            for (w, _) in r.rhs.terms() {
                if *w >= r.lhs {
                    return Err(AlgError::NotDecreasing(format!("{:?} -> {:?}", r.lhs, r.rhs)));
                }
            }
            for &l in r.lhs.0.iter().chain(r.rhs.terms().flat_map(|(w, _)| w.0.iter())) {
                if l as usize >= n {
                    return Err(AlgError::PresentationMismatch(l, pres.name.clone()));
                }
            }
        }
        let index = pres.rules.iter().enumerate().map(|(i, r)| (r.lhs.0.clone(), i)).collect();
        let mut lhs_lens: Vec<usize> = pres.rules.iter().map(|r| r.lhs.len()).collect();
        lhs_lens.sort_unstable();
        lhs_lens.dedup();
        Ok(Algebra { pres, index, lhs_lens, certified: Certification::Unchecked, cache: RwLock::new(HashMap::new()) })
    }

    /// Runs the overlap check up to `bound` and records the certification.
    pub fn certify(mut self, bound: usize) -> Result<Self, ConfluenceReport> {
        let rep = critical_pairs(&self, bound);
        if !rep.unresolved.is_empty() {
            return Err(rep);
        }
        self.certified = if rep.exhaustive { Certification::All } else { Certification::UpTo(bound) };
        Ok(self)
    }

    /// Marks the system as confluent in all degrees; for systems whose
    /// confluence is established by [`Algebra::certify`] elsewhere.
    pub fn with_certification(mut self, c: Certification) -> Self {
        self.certified = c;
        self
    }

    pub fn certification(&self) -> Certification {
        self.certified
    }

    pub fn presentation(&self) -> &Presentation {
        &self.pres
    }

    pub fn ngens(&self) -> usize {
        self.pres.letters.len()
    }

    pub fn letter(&self, name: &str) -> Result<Letter, AlgError> {
        self.pres.letter(name).ok_or_else(|| AlgError::UnknownGenerator(name.to_string()))
    }

    pub fn gen(&self, name: &str) -> Element {
        Element::letter(self.letter(name).unwrap_or_else(|e| panic!("{e}")))
    }

    fn find_match(&self, w: &[Letter]) -> Option<(usize, usize)> {
        for start in 0..w.len() {
            for &len in &self.lhs_lens {
                if start + len > w.len() {
                    break;
                }
                if let Some(&ri) = self.index.get(&w[start..start + len]) {
                    return Some((start, ri));
                }
            }
        }
        None
    }

    fn all_matches(&self, w: &[Letter]) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for start in 0..w.len() {
            for &len in &self.lhs_lens {
                if start + len <= w.len() {
                    if let Some(&ri) = self.index.get(&w[start..start + len]) {
                        out.push((start, ri));
                    }
                }
            }
        }
        out
    }

    pub fn is_normal(&self, w: &Word) -> bool {
        self.find_match(&w.0).is_none()
    }

    fn check_letters(&self, w: &Word) -> Result<(), AlgError> {
        let n = self.ngens();
        match w.0.iter().find(|&&l| l as usize >= n) {
            Some(&l) => Err(AlgError::PresentationMismatch(l, self.pres.name.clone())),
            None => Ok(()),
        }
    }

    /// Normal form of a single word (memoized; leftmost-match strategy).
    pub fn nf_word(&self, w: &[Letter]) -> Element {
        if let Some(e) = self.cache.read().unwrap().get(w) {
            return e.clone();
        }
        let res = match self.find_match(w) {
            None => Element::word(w),
            Some((pos, ri)) => {
                let rule = &self.pres.rules[ri];
                let tail = &w[pos + rule.lhs.len()..];
                let mut acc = Element::zero();
                for (t, c) in rule.rhs.terms() {
                    let mut nw = Vec::with_capacity(pos + t.len() + tail.len());
                    nw.extend_from_slice(&w[..pos]);
                    nw.extend_from_slice(&t.0);
                    nw.extend_from_slice(tail);
                    acc.add_scaled(&self.nf_word(&nw), c);
                }
                acc
            }
        };
        let mut cache = self.cache.write().unwrap();
        if cache.len() > CACHE_LIMIT {
            cache.clear();
        }
        cache.insert(w.to_vec(), res.clone());
        res
    }

    pub fn try_reduce(&self, x: &Element) -> Result<Element, AlgError> {
        let mut out = Element::zero();
        for (w, c) in x.terms() {
            self.check_letters(w)?;
            out.add_scaled(&self.nf_word(&w.0), c);
        }
        Ok(out)
    }

    pub fn reduce(&self, x: &Element) -> Element {
        self.try_reduce(x).unwrap_or_else(|e| panic!("{e}"))
    }

    /// Independent reduction strategy: random redex choice, no memoization.
    pub fn reduce_random<R: Rng>(&self, x: &Element, rng: &mut R) -> Element {
        let mut cur = x.clone();
        loop {
            let redexes: Vec<(Word, Vec<(usize, usize)>)> = cur
                .terms()
                .filter_map(|(w, _)| {
                    let m = self.all_matches(&w.0);
                    (!m.is_empty()).then(|| (w.clone(), m))
                })
                .collect();
            if redexes.is_empty() {
                return cur;
            }
            let (w, ms) = &redexes[rng.gen_range(0..redexes.len())];
            let (pos, ri) = ms[rng.gen_range(0..ms.len())];
            let c = cur.coeff(w);
            cur.add_term(w.clone(), &(-&c));
            let rule = &self.pres.rules[ri];
            for (t, d) in rule.rhs.terms() {
                let mut nw = w.0[..pos].to_vec();
                nw.extend_from_slice(&t.0);
                nw.extend_from_slice(&w.0[pos + rule.lhs.len()..]);
                cur.add_term(Word(nw), &(&c * d));
            }
        }
    }

    pub fn mul(&self, a: &Element, b: &Element) -> Element {
        let mut out = Element::zero();
        for (wa, ca) in a.terms() {
            for (wb, cb) in b.terms() {
                let mut w = wa.0.clone();
                w.extend_from_slice(&wb.0);
                out.add_scaled(&self.nf_word(&w), &(ca * cb));
            }
        }
        out
    }

    pub fn mul_all<'a>(&self, xs: impl IntoIterator<Item = &'a Element>) -> Element {
        xs.into_iter().fold(Element::one(), |acc, x| self.mul(&acc, x))
    }

    pub fn pow(&self, a: &Element, k: u32) -> Element {
        (0..k).fold(Element::one(), |acc, _| self.mul(&acc, a))
    }

    pub fn commutator(&self, a: &Element, b: &Element) -> Element {
        &self.mul(a, b) - &self.mul(b, a)
    }

    /// Conjugate-linear anti-multiplicative involution. Coefficients are real
    /// rational functions of `v`, hence fixed by conjugation.
    pub fn star(&self, a: &Element) -> Element {
        let mut out = Element::zero();
        for (w, c) in a.terms() {
            let sw: Vec<Letter> = w.0.iter().rev().map(|&l| self.pres.star[l as usize]).collect();
            out.add_scaled(&self.nf_word(&sw), c);
        }
        out
    }

    /// Inverse of a monomial built from invertible letters.
    pub fn word_inverse(&self, w: &Word) -> Option<Word> {
        w.0.iter().rev().map(|&l| self.pres.inverse[l as usize]).collect::<Option<Vec<_>>>().map(Word)
    }

    pub fn equal(&self, a: &Element, b: &Element) -> Result<bool, AlgError> {
        let d = a.degree().max(b.degree());
        match self.certified {
            Certification::All => {}
            Certification::UpTo(bound) if d <= bound => {}
            Certification::UpTo(bound) => return Err(AlgError::Inconclusive { degree: d, bound }),
            Certification::Unchecked => return Err(AlgError::Inconclusive { degree: d, bound: 0 }),
        }
        Ok(self.reduce(a) == self.reduce(b))
    }

    pub fn degree_of(&self, w: &Word) -> i32 {
        self.pres.word_degree(w)
    }

    /// Human-readable form, re-parseable by the expression parser.
    pub fn display(&self, a: &Element) -> String {
        if a.is_zero() {
            return "0".into();
        }
        let mut s = String::new();
        for (k, (w, c)) in a.terms().enumerate() {
            let mut cs = c.to_string();
            let simple = c.is_laurent() && c.v_range().is_some_and(|(lo, hi)| lo == hi);
            let neg = simple && cs.starts_with('-');
            if neg {
                cs = (-c).to_string();
            }
            if k == 0 {
                if neg {
                    s.push('-');
                }
            } else {
                s.push_str(if neg { " - " } else { " + " });
            }
            let wstr: Vec<String> = w.0.iter().map(|&l| self.pres.letters[l as usize].clone()).collect();
            let wstr = wstr.join(" ");
            let coef = if cs == "1" {
                String::new()
            } else if simple {
                cs
            } else {
                format!("({cs})")
            };
            match (coef.is_empty(), wstr.is_empty()) {
                (true, true) => s.push('1'),
                (true, false) => s.push_str(&wstr),
                (false, true) => s.push_str(&coef),
                (false, false) => {
                    s.push_str(&coef);
                    s.push(' ');
                    s.push_str(&wstr);
                }
            }
        }
        s
    }
}

// ---- confluence ----

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CriticalPair {
    pub word: Vec<Letter>,
    pub rules: (usize, usize),
    pub difference: String,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ConfluenceReport {
    pub presentation: String,
    pub degree_bound: usize,
    pub pairs_checked: usize,
    pub unresolved: Vec<CriticalPair>,
    /// True when every ambiguity of the rule set fits under the bound, so the
    /// diamond lemma certifies all degrees.
    pub exhaustive: bool,
    pub rules_added: usize,
}

struct Ambiguity {
    word: Vec<Letter>,
    left: Element,
    right: Element,
    rules: (usize, usize),
}

fn splice(prefix: &[Letter], mid: &Element, suffix: &[Letter]) -> Element {
    mid.map_terms(|w, c| {
        let mut nw = prefix.to_vec();
        nw.extend_from_slice(&w.0);
        nw.extend_from_slice(suffix);
        Some((Word(nw), c.clone()))
    })
}

fn ambiguities(rules: &[Rule], bound: usize) -> (Vec<Ambiguity>, bool) {
    let mut out = Vec::new();
    let mut exhaustive = true;
    for (i, ri) in rules.iter().enumerate() {
        let li = &ri.lhs.0;
        for (j, rj) in rules.iter().enumerate() {
            let lj = &rj.lhs.0;
            // overlaps: suffix of li equals prefix of lj
            for k in 1..li.len().min(lj.len()) {
                if li[li.len() - k..] != lj[..k] {
                    continue;
                }
                let total = li.len() + lj.len() - k;
                if total > bound {
                    exhaustive = false;
                    continue;
                }
                let mut word = li.clone();
                word.extend_from_slice(&lj[k..]);
                out.push(Ambiguity {
                    left: splice(&[], &ri.rhs, &lj[k..]),
                    right: splice(&li[..li.len() - k], &rj.rhs, &[]),
                    word,
                    rules: (i, j),
                });
            }
            // inclusions: lj inside li
            if i != j && lj.len() <= li.len() {
                for p in 0..=li.len() - lj.len() {
                    if li[p..p + lj.len()] == lj[..] {
                        if li.len() > bound {
                            exhaustive = false;
                            continue;
                        }
                        out.push(Ambiguity {
                            left: ri.rhs.clone(),
                            right: splice(&li[..p], &rj.rhs, &li[p + lj.len()..]),
                            word: li.clone(),
                            rules: (i, j),
                        });
                    }
                }
            }
        }
    }
    (out, exhaustive)
}

fn critical_pairs(alg: &Algebra, bound: usize) -> ConfluenceReport {
    let (amb, exhaustive) = ambiguities(&alg.pres.rules, bound);
    let mut unresolved = Vec::new();
    for a in &amb {
        let d = &alg.reduce(&a.left) - &alg.reduce(&a.right);
        if !d.is_zero() {
            unresolved.push(CriticalPair { word: a.word.clone(), rules: a.rules, difference: alg.display(&d) });
        }
    }
    ConfluenceReport {
        presentation: alg.pres.name.clone(),
        degree_bound: bound,
        pairs_checked: amb.len(),
        unresolved,
        exhaustive,
        rules_added: 0,
    }
}

/// Enumerates all overlap ambiguities up to `degree_bound` and reports those
/// whose two reductions disagree.
pub fn check_local_confluence(pres: &Presentation, degree_bound: usize) -> Result<ConfluenceReport, AlgError> {
    let alg = Algebra::new(pres.clone())?;
    Ok(critical_pairs(&alg, degree_bound))
}

/// Bounded completion: unresolved critical pairs are oriented by their leading
/// word and appended as rules until closure (up to the bound) or until
/// `max_rules` is exceeded.
pub fn complete(pres: &Presentation, degree_bound: usize, max_rules: usize) -> Result<(Algebra, ConfluenceReport), AlgError> {
    let mut pres = pres.clone();
    let mut added = 0;
    loop {
        let alg = Algebra::new(pres.clone())?;
        let (amb, exhaustive) = ambiguities(&pres.rules, degree_bound);
        let mut new_rule = None;
        for a in &amb {
            let d = &alg.reduce(&a.left) - &alg.reduce(&a.right);
            if d.is_zero() {
                continue;
            }
            let (lw, lc) = d.leading().map(|(w, c)| (w.clone(), c.clone())).unwrap();
            if lw.is_empty() {
                return Err(AlgError::CompletionFailure(format!("{:?} collapses to a nonzero scalar", a.word)));
            }
            let mut rest = d.clone();
            rest.add_term(lw.clone(), &(-&lc));
            let rhs = rest.scale(&(-&lc.inv().unwrap()));
            new_rule = Some(Rule { lhs: lw, rhs });
            break;
        }
        match new_rule {
            None => {
                let report = ConfluenceReport {
                    presentation: pres.name.clone(),
                    degree_bound,
                    pairs_checked: amb.len(),
                    unresolved: Vec::new(),
                    exhaustive,
                    rules_added: added,
                };
                let cert = if exhaustive { Certification::All } else { Certification::UpTo(degree_bound) };
                return Ok((alg.with_certification(cert), report));
            }
            Some(rule) => {
                if pres.rules.iter().any(|r| r.lhs == rule.lhs) {
                    return Err(AlgError::CompletionFailure(format!("orientation cycle at {:?}", rule.lhs)));
                }
                // keep existing rules reduced with respect to the new one
                pres.rules.push(rule);
                added += 1;
                if pres.rules.len() > max_rules {
                    return Err(AlgError::CompletionFailure(format!("rule budget {max_rules} exhausted")));
                }
                let tmp = Algebra::new(pres.clone())?;
                let last = pres.rules.len() - 1;
                for k in 0..last {
                    let r = pres.rules[k].clone();
                    pres.rules[k].rhs = tmp.reduce(&r.rhs);
                }
            }
        }
    }
}

// ---- presentation files ----

#[derive(Serialize, Deserialize)]
struct TermFile {
    coeff: String,
    word: Vec<String>,
}

#[derive(Serialize, Deserialize)]
struct RuleFile {
    lhs: Vec<String>,
    rhs: Vec<TermFile>,
}

#[derive(Serialize, Deserialize)]
struct PresentationFile {
    name: String,
    generators: Vec<String>,
    star: Vec<(String, String)>,
    #[serde(default)]
    inverse: Vec<(String, String)>,
    #[serde(default)]
    grading: Vec<i32>,
    rules: Vec<RuleFile>,
}

impl Presentation {
    pub fn to_json(&self) -> String {
        let names = |w: &Word| w.0.iter().map(|&l| self.letters[l as usize].clone()).collect::<Vec<_>>();
        let mut star = Vec::new();
        for (i, &s) in self.star.iter().enumerate() {
            if i <= s as usize {
                star.push((self.letters[i].clone(), self.letters[s as usize].clone()));
            }
        }
        let inverse = self
            .inverse
            .iter()
            .enumerate()
            .filter_map(|(i, x)| x.filter(|&j| i <= j as usize).map(|j| (self.letters[i].clone(), self.letters[j as usize].clone())))
            .collect();
        let f = PresentationFile {
            name: self.name.clone(),
            generators: self.letters.clone(),
            star,
            inverse,
            grading: self.grading.clone(),
            rules: self
                .rules
                .iter()
                .map(|r| RuleFile {
                    lhs: names(&r.lhs),
                    rhs: r.rhs.terms().map(|(w, c)| TermFile { coeff: c.to_string(), word: names(w) }).collect(),
                })
                .collect(),
        };
        serde_json::to_string_pretty(&f).expect("serializable")
    }

    pub fn from_json(text: &str) -> Result<Self, AlgError> {
        let f: PresentationFile = serde_json::from_str(text).map_err(|e| AlgError::BadFile(e.to_string()))?;
        let n = f.generators.len();
        let idx = |s: &str| -> Result<Letter, AlgError> {
            f.generators.iter().position(|g| g == s).map(|i| i as Letter).ok_or_else(|| AlgError::UnknownGenerator(s.into()))
        };
        let mut star: Vec<Letter> = (0..n as Letter).collect();
        for (a, b) in &f.star {
            let (a, b) = (idx(a)?, idx(b)?);
            star[a as usize] = b;
            star[b as usize] = a;
        }
        let mut inverse = vec![None; n];
        for (a, b) in &f.inverse {
            let (a, b) = (idx(a)?, idx(b)?);
            inverse[a as usize] = Some(b);
            inverse[b as usize] = Some(a);
        }
        let word = |ws: &[String]| -> Result<Word, AlgError> { Ok(Word(ws.iter().map(|s| idx(s)).collect::<Result<_, _>>()?)) };
        let mut rules = Vec::new();
        for r in &f.rules {
            let mut rhs = Element::zero();
            for t in &r.rhs {
                let c: Scalar = t.coeff.parse().map_err(|e: crate::scalars::ScalarError| AlgError::BadFile(e.to_string()))?;
                rhs.add_term(word(&t.word)?, &c);
            }
            rules.push(Rule { lhs: word(&r.lhs)?, rhs });
        }
        let grading = if f.grading.is_empty() { vec![0; n] } else { f.grading };
        if grading.len() != n {
            return Err(AlgError::BadFile("grading length differs from generator count".into()));
        }
        Ok(Presentation { name: f.name, letters: f.generators, star, inverse, grading, rules })
    }
}

pub type SharedAlgebra = Arc<Algebra>;

#[cfg(test)]
mod tests {
    use super::*;

    /// Commutative polynomial ring in x < y: y x -> x y.
    fn comm() -> Presentation {
        Presentation {
            name: "comm".into(),
            letters: vec!["x".into(), "y".into()],
            star: vec![0, 1],
            inverse: vec![None, None],
            grading: vec![1, 1],
            rules: vec![Rule { lhs: Word(vec![1, 0]), rhs: Element::word(&[0, 1]) }],
        }
    }

    #[test]
    fn word_order_is_deglex() {
        assert!(Word(vec![1]) < Word(vec![0, 0]));
        assert!(Word(vec![0, 1]) < Word(vec![1, 0]));
    }

    #[test]
    fn reduces_to_sorted_words() {
        let alg = Algebra::new(comm()).unwrap().certify(4).unwrap();
        let e = alg.reduce(&Element::word(&[1, 1, 0, 1, 0]));
        assert_eq!(e, Element::word(&[0, 0, 1, 1, 1]));
        assert_eq!(alg.certification(), Certification::All);
    }

    #[test]
    fn rejects_increasing_rule() {
        let mut p = comm();
        p.rules[0] = Rule { lhs: Word(vec![0, 1]), rhs: Element::word(&[1, 0]) };
        assert!(matches!(Algebra::new(p), Err(AlgError::NotDecreasing(_))));
    }

    #[test]
    fn unknown_letter_is_presentation_mismatch() {
        let alg = Algebra::new(comm()).unwrap();
        assert!(matches!(alg.try_reduce(&Element::word(&[7])), Err(AlgError::PresentationMismatch(7, _))));
    }

    #[test]
    fn completion_adds_missing_rule() {
        // over x < y: y x -> 2 x y, y y -> x.  The overlap y y x forces x x = 4 x x.
        let p = Presentation {
            name: "kb".into(),
            letters: vec!["x".into(), "y".into()],
            star: vec![0, 1],
            inverse: vec![None, None],
            grading: vec![0, 0],
            rules: vec![
                Rule { lhs: Word(vec![1, 0]), rhs: Element::word(&[0, 1]).scale(&Scalar::int(2)) },
                Rule { lhs: Word(vec![1, 1]), rhs: Element::word(&[0]) },
            ],
        };
        let rep = check_local_confluence(&p, 6).unwrap();
        assert!(!rep.unresolved.is_empty());
        let (alg, rep) = complete(&p, 6, 50).unwrap();
        assert!(rep.rules_added > 0);
        assert!(alg.certify(6).is_ok());
    }

    #[test]
    fn json_round_trip() {
        let p = comm();
        let q = Presentation::from_json(&p.to_json()).unwrap();
        assert_eq!(q.letters, p.letters);
        assert_eq!(q.rules, p.rules);
    }
}
