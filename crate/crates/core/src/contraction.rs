//! Nucleus computation, stability checks and the zero-dimension test.
//!
//! A finite set `N ∋ 1` contains the nucleus iff for some `n` every section
//! `(gs)|_v` with `g ∈ N`, `s ∈ S`, `|v| = n` lies in `N`. The engine grows a
//! section-closed candidate until that holds and then keeps the states that
//! lie on cycles of the candidate's section graph, plus everything they reach.

use std::collections::HashMap;

use indexmap::IndexSet;
use petgraph::algo::tarjan_scc;
use petgraph::graph::DiGraph;
use serde::Serialize;

use crate::backend::{order, Element, Group, Order, OrderOptions};
use crate::error::{Error, Result};
use crate::par;
use crate::recursion::{Alphabet, GeneratorDef, GroupWord, Permutation, RecursionSystem};
use crate::BackendDescriptor;

/// Which side the generator multiplies on in the stability check.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Stability {
    /// `(g s)|_v`
    #[default]
    Right,
    /// `(s g)|_v`
    Left,
}

#[derive(Debug, Clone, Copy)]
pub struct NucleusOptions {
    pub max_elements: usize,
    pub max_rounds: usize,
    pub n_max: usize,
    pub stability: Stability,
}

impl Default for NucleusOptions {
    fn default() -> Self {
        Self { max_elements: 10_000, max_rounds: 50, n_max: 12, stability: Stability::Right }
    }
}

/// A finite, symmetric, section-closed set with its transition tables.
#[derive(Debug, Clone)]
pub struct Nucleus {
    elements: Vec<Element>,
    words: Vec<GroupWord>,
    perm: Vec<Permutation>,
    sect: Vec<Vec<usize>>,
    depth_witness: usize,
}

impl Nucleus {
    /// Orders the set (identity first, then shortlex) and builds the tables.
    /// Fails if the set is not closed under sections.
    pub fn from_elements(
        group: &Group,
        elements: impl IntoIterator<Item = Element>,
        depth_witness: usize,
    ) -> Result<Self> {
        let mut set: IndexSet<Element> = elements.into_iter().collect();
        set.insert(group.identity());
        let mut items: Vec<(GroupWord, Element)> = set.into_iter().map(|e| (group.canonical_word(&e), e)).collect();
        items.sort_by(|a, b| a.0.shortlex_cmp(&b.0));
        let index: HashMap<Element, usize> = items.iter().enumerate().map(|(i, (_, e))| (e.clone(), i)).collect();
        let mut perm = Vec::with_capacity(items.len());
        let mut sect = Vec::with_capacity(items.len());
        for (_, e) in &items {
            perm.push(group.perm(e));
            let row = group
                .sections(e)?
                .iter()
                .map(|s| {
                    index.get(s).copied().ok_or_else(|| {
                        Error::Malformed(format!(
                            "set is not section-closed: {} has section {}",
                            group.format(e),
                            group.format(s)
                        ))
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            sect.push(row);
        }
        let (words, elements) = items.into_iter().unzip();
        Ok(Self { elements, words, perm, sect, depth_witness })
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn elements(&self) -> &[Element] {
        &self.elements
    }

    pub fn words(&self) -> &[GroupWord] {
        &self.words
    }

    pub fn perm(&self, i: usize) -> &Permutation {
        &self.perm[i]
    }

    pub fn section(&self, i: usize, x: usize) -> usize {
        self.sect[i][x]
    }

    pub fn depth_witness(&self) -> usize {
        self.depth_witness
    }

    pub fn contains(&self, e: &Element) -> bool {
        self.elements.contains(e)
    }

    pub fn index_of(&self, e: &Element) -> Option<usize> {
        self.elements.iter().position(|x| x == e)
    }

    pub fn format(&self, sys: &RecursionSystem) -> Vec<String> {
        self.words.iter().map(|w| sys.format_word(w)).collect()
    }

    /// The nucleus as a recursion system of its own: one generator `n{i}`
    /// per non-identity element, on the tree backend.
    pub fn to_system(&self, alphabet: &Alphabet) -> Result<RecursionSystem> {
        let trivial = |i: usize| self.words[i].is_empty();
        let mut gen_of = vec![usize::MAX; self.len()];
        let mut k = 0;
        for (i, slot) in gen_of.iter_mut().enumerate() {
            if !trivial(i) {
                *slot = k;
                k += 1;
            }
        }
        let generators = (0..self.len())
            .filter(|&i| !trivial(i))
            .map(|i| GeneratorDef {
                name: format!("n{}", gen_of[i] + 1),
                perm: self.perm[i].clone(),
                sections: self.sect[i]
                    .iter()
                    .map(|&j| if trivial(j) { GroupWord::empty() } else { GroupWord::gen(gen_of[j]) })
                    .collect(),
            })
            .collect();
        Ok(RecursionSystem::new(alphabet.clone(), generators, BackendDescriptor::Tree)?)
    }
}

/// Constructive evidence that a group is not contracting.
#[derive(Debug, Clone, Serialize)]
pub struct NotContractingWitness {
    /// An element `g` and a vertex `v` with `g|_v = g`, `g(v) = v`, and `g`
    /// of infinite order: the arrows `(v, v, g^k)` are pairwise distinct.
    pub element: String,
    pub vertex: String,
    pub detail: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct UnknownReport {
    pub reason: String,
    pub elements: usize,
    pub rounds: usize,
}

#[derive(Debug, Clone)]
pub enum ContractionStatus {
    Contracting(Nucleus),
    NotContracting(NotContractingWitness),
    Unknown(UnknownReport),
}

impl ContractionStatus {
    pub fn nucleus(&self) -> Option<&Nucleus> {
        match self {
            Self::Contracting(n) => Some(n),
            _ => None,
        }
    }
}

enum Scan {
    Stable,
    Unstable(Vec<Element>),
    TooLarge(usize),
}

fn products(group: &Group, m: &[Element], s: &[Element], side: Stability) -> Result<Vec<Element>> {
    let pairs: Vec<(usize, usize)> = (0..m.len()).flat_map(|i| (0..s.len()).map(move |j| (i, j))).collect();
    par::map(&pairs, |&(i, j)| match side {
        Stability::Right => group.mul(&m[i], &s[j]),
        Stability::Left => group.mul(&s[j], &m[i]),
    })
    .into_iter()
    .collect()
}

fn all_sections(group: &Group, level: &[Element]) -> Result<Vec<Element>> {
    let rows = par::map(level, |e| group.sections(e));
    let mut out = Vec::with_capacity(level.len() * group.system().degree());
    for r in rows {
        out.extend(r?);
    }
    Ok(out)
}

fn dedupe_outside(items: Vec<Element>, m: &IndexSet<Element>) -> Vec<Element> {
    let mut seen: IndexSet<Element> = IndexSet::new();
    for e in items {
        if !m.contains(&e) {
            seen.insert(e);
        }
    }
    seen.into_iter().collect()
}

/// Stability scan for a section-closed `m`. A depth-`k` section outside `m`
/// can only come from a path that avoids `m`, so members are dropped early.
fn scan(group: &Group, m: &IndexSet<Element>, s: &[Element], opts: &NucleusOptions) -> Result<Scan> {
    let members: Vec<Element> = m.iter().cloned().collect();
    let mut level = dedupe_outside(products(group, &members, s, opts.stability)?, m);
    for k in 0..=opts.n_max {
        if level.is_empty() {
            return Ok(Scan::Stable);
        }
        if k == opts.n_max {
            break;
        }
        level = dedupe_outside(all_sections(group, &level)?, m);
        if level.len() > opts.max_elements {
            return Ok(Scan::TooLarge(level.len()));
        }
    }
    Ok(Scan::Unstable(level))
}

/// Section closure of `seeds` outside `m`, or `None` past `cap` elements.
fn closure_outside(
    group: &Group,
    seeds: Vec<Element>,
    m: &IndexSet<Element>,
    cap: usize,
) -> Result<Option<IndexSet<Element>>> {
    let mut out: IndexSet<Element> = seeds.into_iter().filter(|e| !m.contains(e)).collect();
    let mut i = 0;
    while i < out.len() {
        let batch: Vec<Element> = out.iter().skip(i).cloned().collect();
        i = out.len();
        for e in all_sections(group, &batch)? {
            if !m.contains(&e) {
                out.insert(e);
            }
        }
        if out.len() + m.len() > cap {
            return Ok(None);
        }
    }
    Ok(Some(out))
}

/// States on a cycle of the section graph of `set`, plus all states they reach.
fn persistent(group: &Group, set: &IndexSet<Element>) -> Result<IndexSet<Element>> {
    let rows = par::map(&set.iter().cloned().collect::<Vec<_>>(), |e| group.sections(e));
    let mut graph: DiGraph<(), ()> = DiGraph::new();
    let nodes: Vec<_> = (0..set.len()).map(|_| graph.add_node(())).collect();
    let mut succ: Vec<Vec<usize>> = Vec::with_capacity(set.len());
    for (i, r) in rows.into_iter().enumerate() {
        let mut row = Vec::new();
        for t in r? {
            if let Some(j) = set.get_index_of(&t) {
                graph.update_edge(nodes[i], nodes[j], ());
                row.push(j);
            }
        }
        succ.push(row);
    }
    let mut keep = vec![false; set.len()];
    let mut stack = Vec::new();
    for scc in tarjan_scc(&graph) {
        let cyclic = scc.len() > 1 || succ[scc[0].index()].contains(&scc[0].index());
        if cyclic {
            for n in scc {
                stack.push(n.index());
            }
        }
    }
    while let Some(i) = stack.pop() {
        if keep[i] {
            continue;
        }
        keep[i] = true;
        stack.extend(succ[i].iter().copied().filter(|&j| !keep[j]));
    }
    Ok(set.iter().zip(keep).filter(|(_, k)| *k).map(|(e, _)| e.clone()).collect())
}

fn unknown(reason: impl Into<String>, elements: usize, rounds: usize) -> ContractionStatus {
    ContractionStatus::Unknown(UnknownReport { reason: reason.into(), elements, rounds })
}

/// Never answers `NotContracting`; see [`crate::activity::pold_contraction_test`].
pub fn compute_nucleus(group: &Group, opts: &NucleusOptions) -> Result<ContractionStatus> {
    match nucleus_inner(group, opts) {
        Err(Error::BudgetExceeded { what, states }) => {
            Ok(unknown(format!("{what} exceeded its budget at {states} states"), 0, 0))
        }
        other => other,
    }
}

fn nucleus_inner(group: &Group, opts: &NucleusOptions) -> Result<ContractionStatus> {
    let base: IndexSet<Element> = IndexSet::new();
    let mut seeds = vec![group.identity()];
    seeds.extend(group.generating_set()?);
    let Some(mut m) = closure_outside(group, seeds, &base, opts.max_elements)? else {
        return Ok(unknown("sections of the generators exceed the element budget", opts.max_elements, 0));
    };
    // the stability criterion needs a generating set closed under sections
    let id = group.identity();
    let s: Vec<Element> = m.iter().filter(|e| **e != id).cloned().collect();
    for round in 0..opts.max_rounds {
        match scan(group, &m, &s, opts)? {
            Scan::Stable => {
                let mut core = persistent(group, &m)?;
                core.insert(group.identity());
                let inverses = core.iter().map(|e| group.inverse(e)).collect::<Result<Vec<_>>>()?;
                core.extend(inverses);
                let set: Vec<Element> = core.into_iter().collect();
                let check = verify_nucleus_with(group, &set, &s, opts.n_max.max(1) * 4, opts.stability)?;
                let Some(depth) = check.depth else {
                    return Ok(unknown("minimized candidate failed the stability check", set.len(), round + 1));
                };
                return Ok(ContractionStatus::Contracting(Nucleus::from_elements(group, set, depth)?));
            }
            Scan::TooLarge(n) => {
                return Ok(unknown("section levels exceed the element budget", m.len() + n, round + 1));
            }
            Scan::Unstable(offenders) => {
                let Some(c) = closure_outside(group, offenders, &m, opts.max_elements)? else {
                    return Ok(unknown("candidate exceeds the element budget", opts.max_elements, round + 1));
                };
                let p = persistent(group, &c)?;
                let grow = if p.is_empty() { c } else { p };
                m.extend(grow);
            }
        }
    }
    Ok(unknown("round budget exhausted", m.len(), opts.max_rounds))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct NucleusCheck {
    /// Least `n` at which every `(gs)|_v`, `|v| = n`, is in the set.
    pub depth: Option<usize>,
    pub symmetric: bool,
    pub section_closed: bool,
    pub contains_identity: bool,
}

impl NucleusCheck {
    /// The set contains the nucleus.
    pub fn holds(&self) -> bool {
        self.depth.is_some() && self.contains_identity
    }
}

pub fn verify_nucleus(group: &Group, set: &[Element], n_max: usize) -> Result<NucleusCheck> {
    let s = self_similar_generators(group, NucleusOptions::default().max_elements)?;
    verify_nucleus_with(group, set, &s, n_max, Stability::Right)
}

/// Generators, inverses and all their sections, without the identity.
pub fn self_similar_generators(group: &Group, cap: usize) -> Result<Vec<Element>> {
    let Some(m) = closure_outside(group, group.generating_set()?, &IndexSet::new(), cap)? else {
        return Err(Error::BudgetExceeded { what: "generator section closure", states: cap });
    };
    let id = group.identity();
    Ok(m.into_iter().filter(|e| *e != id).collect())
}

/// Level cap for sets that are not section-closed.
const VERIFY_LEVEL_CAP: usize = 200_000;

/// `s` must be closed under sections for the depth to be meaningful.
pub fn verify_nucleus_with(
    group: &Group,
    set: &[Element],
    s: &[Element],
    n_max: usize,
    side: Stability,
) -> Result<NucleusCheck> {
    let n: IndexSet<Element> = set.iter().cloned().collect();
    let contains_identity = n.contains(&group.identity());
    let mut section_closed = true;
    let mut symmetric = true;
    for e in &n {
        symmetric &= n.contains(&group.inverse(e)?);
        section_closed &= group.sections(e)?.iter().all(|x| n.contains(x));
    }
    let mut depth = None;
    let mut level: Vec<Element> = {
        let members: Vec<Element> = n.iter().cloned().collect();
        let p: IndexSet<Element> = products(group, &members, s, side)?.into_iter().collect();
        p.into_iter().collect()
    };
    for k in 0..=n_max {
        let outside: Vec<Element> = level.iter().filter(|e| !n.contains(*e)).cloned().collect();
        if outside.is_empty() {
            depth = Some(k);
            break;
        }
        // members of a section-closed set have all deeper sections inside it
        let next_from = if section_closed { outside } else { level };
        let next: IndexSet<Element> = all_sections(group, &next_from)?.into_iter().collect();
        if next.len() > VERIFY_LEVEL_CAP {
            break;
        }
        level = next.into_iter().collect();
    }
    Ok(NucleusCheck { depth, symmetric, section_closed, contains_identity })
}

#[derive(Debug, Clone)]
pub enum SubgroupResult {
    Finite(Vec<Element>),
    ExceedsCap(usize),
}

/// Breadth-first enumeration of `<gens>` in the faithful quotient.
pub fn enumerate_subgroup(group: &Group, gens: &[GroupWord], cap: usize) -> Result<SubgroupResult> {
    let mut steps: Vec<GroupWord> = Vec::new();
    for g in gens {
        for w in [g.clone(), g.inverse()] {
            if !w.is_empty() && !steps.contains(&w) {
                steps.push(w);
            }
        }
    }
    let mut seen: IndexSet<Element> = IndexSet::new();
    seen.insert(group.tree_element(&GroupWord::empty())?);
    let mut frontier: Vec<GroupWord> = vec![GroupWord::empty()];
    while !frontier.is_empty() {
        let cand: Vec<GroupWord> = frontier.iter().flat_map(|b| steps.iter().map(move |s| b.mul(s))).collect();
        let elems = par::map(&cand, |w| group.tree_element(w));
        let mut next = Vec::new();
        for e in elems {
            let e = e?;
            if !seen.contains(&e) {
                if seen.len() >= cap {
                    return Ok(SubgroupResult::ExceedsCap(cap));
                }
                next.push(e.word().clone());
                seen.insert(e);
            }
        }
        frontier = next;
    }
    Ok(SubgroupResult::Finite(seen.into_iter().collect()))
}

/// The subgroup generated by the nucleus, in the faithful quotient.
pub fn nucleus_subgroup(group: &Group, nucleus: &Nucleus, cap: usize) -> Result<SubgroupResult> {
    enumerate_subgroup(group, nucleus.words(), cap)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub enum DimZero {
    /// The nucleus generates a finite group of this order.
    Yes {
        order: usize,
    },
    /// The nucleus generates an element of infinite order.
    No {
        witness: String,
    },
    Unknown,
}

/// Infinite-order nucleus elements and pairwise products are tried first,
/// then the subgroup is enumerated up to `cap`.
pub fn dim_zero_test(group: &Group, nucleus: &Nucleus, cap: usize) -> Result<DimZero> {
    let words = nucleus.words();
    let mut cands: Vec<GroupWord> = words.to_vec();
    for a in words {
        for b in words {
            cands.push(a.mul(b));
        }
    }
    let opts = OrderOptions::default();
    let orders = par::map(&cands, |w| order(group, w, opts));
    for (w, o) in cands.iter().zip(orders) {
        if o? == Order::Infinite {
            return Ok(DimZero::No { witness: group.system().format_word(w) });
        }
    }
    match nucleus_subgroup(group, nucleus, cap)? {
        SubgroupResult::Finite(elems) => Ok(DimZero::Yes { order: elems.len() }),
        SubgroupResult::ExceedsCap(_) => Ok(DimZero::Unknown),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dsl::parse_str;

    fn group(text: &str) -> Group {
        Group::new(parse_str(text).unwrap()).unwrap()
    }

    fn nucleus_of(g: &Group) -> Nucleus {
        match compute_nucleus(g, &NucleusOptions::default()).unwrap() {
            ContractionStatus::Contracting(n) => n,
            other => panic!("expected a nucleus, got {other:?}"),
        }
    }

    #[test]
    fn adding_machine_nucleus() {
        let g = group("alphabet: 0 1\na = (0 1)(1, a)");
        let n = nucleus_of(&g);
        assert_eq!(n.format(g.system()), vec!["1", "a", "a^-1"]);
        assert_eq!(n.section(1, 1), 1);
        assert_eq!(n.section(1, 0), 0);
    }

    #[test]
    fn hanoi_generators_form_the_nucleus() {
        let g = group(crate::corpus::HANOI);
        let n = nucleus_of(&g);
        assert_eq!(n.format(g.system()), vec!["1", "a", "b", "c"]);
        let set: Vec<Element> = n.elements().to_vec();
        let check = verify_nucleus(&g, &set, 3).unwrap();
        assert_eq!(check.depth, Some(1));
    }

    #[test]
    fn identity_alone_is_not_a_nucleus() {
        let g = group(crate::corpus::HANOI);
        let check = verify_nucleus(&g, &[g.identity()], 6).unwrap();
        assert!(!check.holds());
    }

    #[test]
    fn finitary_involution() {
        let g = group("alphabet: 0 1\na = (0 1)");
        let n = nucleus_of(&g);
        assert_eq!(n.format(g.system()), vec!["1"]);
        assert_eq!(dim_zero_test(&g, &n, 100).unwrap(), DimZero::Yes { order: 1 });
    }

    #[test]
    fn left_variant_agrees() {
        let g = group(crate::corpus::BASILICA);
        let right = nucleus_of(&g);
        let opts = NucleusOptions { stability: Stability::Left, ..Default::default() };
        let ContractionStatus::Contracting(left) = compute_nucleus(&g, &opts).unwrap() else { panic!() };
        assert_eq!(left.format(g.system()), right.format(g.system()));
    }

    #[test]
    fn not_section_closed_is_rejected() {
        let g = group(crate::corpus::BASILICA);
        let a = g.normalize(&GroupWord::gen(0)).unwrap();
        assert!(Nucleus::from_elements(&g, [a], 0).is_err());
    }

    #[test]
    fn subgroup_enumeration() {
        let g = group(crate::corpus::ADDING_MACHINE);
        assert!(matches!(enumerate_subgroup(&g, &[GroupWord::gen(0)], 50).unwrap(), SubgroupResult::ExceedsCap(50)));
        let SubgroupResult::Finite(one) = enumerate_subgroup(&g, &[], 5).unwrap() else { panic!() };
        assert_eq!(one.len(), 1);
    }
}
