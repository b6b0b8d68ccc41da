//! Equality of group elements in three overgroups: the faithful tree action,
//! the free group on the generators, and free products of finite groups.

mod free_product;
mod order;
pub mod tree;

use std::hash::{Hash, Hasher};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

pub use free_product::{CayleyTable, FiniteFactor, FreeProductGroup, Syllable};
pub use order::{order, Order, OrderOptions};
pub use tree::{Key, MinimalAutomaton, SectionClosure, TreeKeyer};

use crate::error::{Error, Result, ValidationError};
use crate::recursion::{GeneratorDef, GroupWord, Permutation, RecursionSystem};

/// Default safety cap on section-closure states.
pub const DEFAULT_CLOSURE_CAP: usize = 1_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum BackendKind {
    Tree,
    Free,
    FreeProduct,
}

/// One free factor of a free-product overgroup. A single generator with an
/// explicit `order` is the cyclic group of that order; otherwise the factor is
/// the (finite) subgroup its generators generate in the faithful quotient.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FactorSpec {
    pub generators: Vec<String>,
    pub order: Option<u32>,
}

impl FactorSpec {
    pub fn cyclic(name: impl Into<String>, order: u32) -> Self {
        Self { generators: vec![name.into()], order: Some(order) }
    }

    pub fn cluster<S: Into<String>>(names: impl IntoIterator<Item = S>) -> Self {
        Self { generators: names.into_iter().map(Into::into).collect(), order: None }
    }
}

/// Which overgroup evaluates word equality.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum BackendDescriptor {
    #[default]
    Tree,
    Free,
    FreeProduct(Vec<FactorSpec>),
}

impl BackendDescriptor {
    pub fn kind(&self) -> BackendKind {
        match self {
            Self::Tree => BackendKind::Tree,
            Self::Free => BackendKind::Free,
            Self::FreeProduct(_) => BackendKind::FreeProduct,
        }
    }

    /// Factors must partition the generators.
    pub(crate) fn validate(&self, gens: &[GeneratorDef]) -> Result<(), ValidationError> {
        let Self::FreeProduct(factors) = self else {
            return Ok(());
        };
        let bad = |m: String| Err(ValidationError::Backend(m));
        let mut seen = vec![false; gens.len()];
        for f in factors {
            if f.generators.is_empty() {
                return bad("empty factor".into());
            }
            if let Some(n) = f.order {
                if f.generators.len() != 1 {
                    return bad("an explicit order needs a single-generator factor".into());
                }
                if n == 0 || n > u16::MAX as u32 {
                    return bad(format!("factor order {n} out of range"));
                }
            }
            for name in &f.generators {
                let Some(i) = gens.iter().position(|g| &g.name == name) else {
                    return bad(format!("unknown generator `{name}` in factor"));
                };
                if seen[i] {
                    return bad(format!("generator `{name}` in two factors"));
                }
                seen[i] = true;
            }
        }
        if let Some(i) = seen.iter().position(|s| !s) {
            return bad(format!("generator `{}` is in no factor", gens[i].name));
        }
        Ok(())
    }
}

/// A group element: a representative word and the backend's canonical key.
/// Equality and hashing use the key only.
#[derive(Debug, Clone)]
pub struct Element {
    word: GroupWord,
    key: Key,
}

impl Element {
    pub fn word(&self) -> &GroupWord {
        &self.word
    }

    pub fn key(&self) -> &Key {
        &self.key
    }
}

impl PartialEq for Element {
    fn eq(&self, other: &Self) -> bool {
        self.key == other.key
    }
}

impl Eq for Element {}

impl Hash for Element {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.key.hash(state);
    }
}

fn word_code(w: &GroupWord) -> Key {
    w.syms().iter().map(|s| s.gen * 2 + s.inv as u32).collect()
}

/// A recursion system together with its equality backend and caches.
///
/// Caches only memoize decided facts, so results do not depend on the order
/// in which concurrent callers fill them.
#[derive(Debug)]
pub struct Group {
    sys: Arc<RecursionSystem>,
    fp: Option<FreeProductGroup>,
    keyer: TreeKeyer,
}

impl Group {
    pub fn new(sys: RecursionSystem) -> Result<Self> {
        Self::with_closure_cap(sys, DEFAULT_CLOSURE_CAP)
    }

    pub fn with_closure_cap(sys: RecursionSystem, cap: usize) -> Result<Self> {
        let sys = Arc::new(sys);
        let keyer = TreeKeyer::new(sys.clone(), cap);
        let fp = match sys.backend() {
            BackendDescriptor::FreeProduct(specs) => Some(FreeProductGroup::build(&sys, specs, &keyer)?),
            _ => None,
        };
        Ok(Self { sys, fp, keyer })
    }

    /// Same recursion, different overgroup.
    pub fn with_backend(sys: &RecursionSystem, backend: BackendDescriptor) -> Result<Self> {
        Self::new(sys.with_backend(backend)?)
    }

    /// Fresh caches, same system.
    pub fn fresh(&self) -> Result<Self> {
        Self::with_closure_cap((*self.sys).clone(), self.keyer.cap())
    }

    pub fn system(&self) -> &RecursionSystem {
        &self.sys
    }

    pub fn kind(&self) -> BackendKind {
        self.sys.backend().kind()
    }

    pub fn keyer(&self) -> &TreeKeyer {
        &self.keyer
    }

    pub fn free_product(&self) -> Option<&FreeProductGroup> {
        self.fp.as_ref()
    }

    /// Word-level normal form: free reduction, or syllable normal form for free products.
    pub fn normal_word(&self, w: &GroupWord) -> GroupWord {
        match &self.fp {
            Some(fp) => fp.normal_word(w),
            None => w.clone(),
        }
    }

    pub fn normalize(&self, w: &GroupWord) -> Result<Element> {
        match self.kind() {
            BackendKind::Free => Ok(Element { key: word_code(w), word: w.clone() }),
            BackendKind::FreeProduct => {
                let fp = self.fp.as_ref().expect("free-product backend resolved");
                let syl = fp.syllables(w);
                let key: Key = syl.iter().map(|&(f, e)| ((f as u32) << 16) | e as u32).collect();
                Ok(Element { word: fp.word_of(&syl), key })
            }
            BackendKind::Tree => self.tree_element(w),
        }
    }

    /// Element of the faithful quotient, whatever the backend. Keys of these
    /// elements must not be compared with keys from [`Group::normalize`] on
    /// other backends.
    pub fn tree_element(&self, w: &GroupWord) -> Result<Element> {
        let key = self.keyer.key(w)?;
        let word = match self.keyer.representative(&key) {
            Some(r) if r.shortlex_cmp(w).is_lt() => r,
            _ => w.clone(),
        };
        Ok(Element { word, key })
    }

    /// Best known representative word.
    pub fn canonical_word(&self, e: &Element) -> GroupWord {
        if self.kind() == BackendKind::Tree {
            if let Some(r) = self.keyer.representative(&e.key) {
                return r;
            }
        }
        e.word.clone()
    }

    pub fn format(&self, e: &Element) -> String {
        self.sys.format_word(&self.canonical_word(e))
    }

    pub fn identity(&self) -> Element {
        self.normalize(&GroupWord::empty()).expect("identity normalizes")
    }

    /// Declared generators followed by their inverses, deduplicated.
    pub fn generating_set(&self) -> Result<Vec<Element>> {
        let n = self.sys.generators().len();
        let mut out: Vec<Element> = Vec::new();
        for w in (0..n).map(GroupWord::gen).chain((0..n).map(GroupWord::gen_inv)) {
            let e = self.normalize(&w)?;
            if !out.contains(&e) {
                out.push(e);
            }
        }
        Ok(out)
    }

    pub fn mul(&self, a: &Element, b: &Element) -> Result<Element> {
        self.normalize(&a.word.mul(&b.word))
    }

    pub fn inverse(&self, a: &Element) -> Result<Element> {
        self.normalize(&a.word.inverse())
    }

    pub fn perm(&self, a: &Element) -> Permutation {
        self.sys.perm_of(&a.word)
    }

    pub fn section(&self, a: &Element, x: usize) -> Result<Element> {
        self.normalize(&self.sys.section_letter_raw(&a.word, x))
    }

    pub fn sections(&self, a: &Element) -> Result<Vec<Element>> {
        (0..self.sys.degree()).map(|x| self.section(a, x)).collect()
    }

    pub fn section_at(&self, a: &Element, v: &[usize]) -> Result<Element> {
        self.normalize(&self.sys.section_word(&a.word, v)?)
    }

    /// Image of a tree vertex.
    pub fn act(&self, a: &Element, v: &[usize]) -> Vec<usize> {
        self.sys.act_word(&a.word, v).expect("element words are valid")
    }

    /// Section automaton of `w`, states keyed by backend word normal forms.
    pub fn closure(&self, w: &GroupWord, budget: usize) -> Result<SectionClosure> {
        if budget == 0 {
            return Err(Error::Malformed("closure budget must be at least 1".into()));
        }
        SectionClosure::build(&self.sys, w, budget, |x| self.normal_word(&x))
    }

    /// Tree backend: every state of the section closure acts trivially on the
    /// first level. Other backends: the normal form is empty.
    pub fn is_trivial(&self, w: &GroupWord) -> Result<bool> {
        match self.kind() {
            BackendKind::Tree => Ok(self.keyer.closure(w)?.acts_trivially()),
            _ => Ok(self.normalize(w)?.word.is_empty()),
        }
    }

    pub fn equal(&self, w1: &GroupWord, w2: &GroupWord) -> Result<bool> {
        self.is_trivial(&w1.mul(&w2.inverse()))
    }

    /// Word normal form in the free group or free product.
    pub fn normal_form(&self, w: &GroupWord) -> Result<Element> {
        match self.kind() {
            BackendKind::Tree => Err(Error::WrongBackend("free or free-product")),
            _ => self.normalize(w),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dsl::parse_str;

    const BASILICA: &str = "alphabet: 0 1\na = (0 1)(1, b)\nb = (1, a)";

    fn tree(text: &str) -> Group {
        Group::new(parse_str(text).unwrap()).unwrap()
    }

    #[test]
    fn basilica_commutator_in_each_backend() {
        let g = tree(BASILICA);
        let comm = g.system().parse_word("b (a^-1 b a) b^-1 (a^-1 b^-1 a)").unwrap();
        assert!(g.is_trivial(&comm).unwrap());
        let free = Group::with_backend(g.system(), BackendDescriptor::Free).unwrap();
        assert!(!free.is_trivial(&comm).unwrap());

        let lhs = g.system().parse_word("b a^-1 b a").unwrap();
        let rhs = g.system().parse_word("a^-1 b a b").unwrap();
        assert!(g.equal(&lhs, &rhs).unwrap());
        assert!(!free.equal(&lhs, &rhs).unwrap());
    }

    #[test]
    fn triviality_examples() {
        let g = tree(BASILICA);
        let sys = g.system();
        assert!(g.is_trivial(&sys.parse_word("a a^-1").unwrap()).unwrap());
        assert!(!g.is_trivial(&sys.parse_word("a b^-1").unwrap()).unwrap());
        let w = sys.parse_word("a b a").unwrap();
        assert!(g.equal(&w, &w).unwrap());
    }

    #[test]
    fn closure_examples() {
        let hanoi = tree("alphabet: 0 1 2\na = (0 1)(1, 1, a)\nb = (0 2)(1, b, 1)\nc = (1 2)(c, 1, 1)");
        let c = hanoi.closure(&GroupWord::gen(0), 10).unwrap();
        let names: Vec<String> = c.states.iter().map(|w| hanoi.system().format_word(w)).collect();
        assert_eq!(names, vec!["a", "1"]);
        assert!(hanoi.closure(&GroupWord::gen(0), 0).is_err());
    }

    #[test]
    fn free_product_normal_forms() {
        let g = tree("alphabet: 0 1 2\nbackend: free-product(orders: 3 3)\na = (0 1 2)\nb = (a, a^-1, b)");
        let sys = g.system();
        let w = sys.parse_word("a^4 b^3 a^-1").unwrap();
        assert!(g.normal_form(&w).unwrap().word().is_empty());
        assert!(g.normal_form(&GroupWord::empty()).unwrap().word().is_empty());
        let a2 = g.normal_form(&sys.parse_word("a a").unwrap()).unwrap();
        assert_eq!(sys.format_word(a2.word()), "a^-1");
        let free = Group::with_backend(sys, BackendDescriptor::Free).unwrap();
        let w = sys.parse_word("a b b^-1 a").unwrap();
        assert_eq!(sys.format_word(free.normal_form(&w).unwrap().word()), "aa");
        assert!(tree(BASILICA).normal_form(&w).is_err());
    }

    #[test]
    fn free_product_rejects_undefined_recursion() {
        // a has order 2 on the tree but is declared with order 3
        let sys = parse_str("alphabet: 0 1\nbackend: free-product(orders: 3 2)\na = (0 1)\nb = (a, b)").unwrap();
        assert!(Group::new(sys).is_err());
    }

    #[test]
    fn derived_klein_factor() {
        let g = tree(crate::corpus::UNIVERSAL_GRIGORCHUK);
        let fp = g.free_product().unwrap();
        let orders: Vec<usize> = fp.factors().iter().map(|f| f.table.order()).collect();
        assert_eq!(orders, vec![2, 4]);
        let sys = g.system();
        let bc = g.normalize(&sys.parse_word("b c").unwrap()).unwrap();
        assert_eq!(g.format(&bc), "d");
    }

    #[test]
    fn descriptor_validation() {
        let text = "alphabet: 0 1\nbackend: free-product(orders: 2)\na = (0 1)\nb = (a, b)";
        assert!(parse_str(text).is_err());
    }
}
