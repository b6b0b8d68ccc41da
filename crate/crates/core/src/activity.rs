//! Activity growth of finite-state elements and the cycle-based contraction
//! test for groups of polynomial activity.
//!
//! A non-trivial cycle of `g` is a cycle of its Moore diagram through
//! non-trivial states. `g` has polynomial activity of degree `d` when these
//! cycles are pairwise disjoint and the longest chain of cycles, each made
//! of sections of the previous one, has `d + 1` members.

use std::collections::HashMap;

use indexmap::IndexSet;
use num_integer::Integer;
use petgraph::algo::tarjan_scc;
use petgraph::graph::DiGraph;
use serde::Serialize;

use crate::backend::{BackendDescriptor, Element, Group};
use crate::contraction::Nucleus;
use crate::dimension::{close_groupoid, Equality, GroupoidOutcome, DEFAULT_ARROW_CAP};
use crate::error::Result;
use crate::par;
use crate::recursion::{decode_vertex, encode_vertex, GroupWord, RecursionSystem};

/// Non-trivial states of the minimized automaton of an element.
#[derive(Debug, Clone)]
pub struct MooreDiagram {
    pub states: Vec<GroupWord>,
    /// `edges[s][x]`: the state of `states[s]|_x`, `None` when trivial.
    pub edges: Vec<Vec<Option<usize>>>,
    /// `None` for the identity.
    pub initial: Option<usize>,
}

impl MooreDiagram {
    pub fn of(group: &Group, w: &GroupWord) -> Result<Self> {
        let aut = group.keyer().automaton(w)?;
        let keep: Vec<usize> = (0..aut.len()).filter(|&s| Some(s) != aut.trivial).collect();
        let pos: HashMap<usize, usize> = keep.iter().enumerate().map(|(i, &s)| (s, i)).collect();
        let edges = keep.iter().map(|&s| aut.trans[s].iter().map(|t| pos.get(t).copied()).collect()).collect();
        Ok(Self {
            states: keep.iter().map(|&s| aut.reps[s].clone()).collect(),
            edges,
            initial: pos.get(&aut.initial).copied(),
        })
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    /// Strongly connected components that carry at least one cycle, as
    /// `(states, internal edge count)`.
    fn cyclic_components(&self) -> (Vec<Vec<usize>>, Vec<usize>, Vec<usize>) {
        let mut graph: DiGraph<(), ()> = DiGraph::new();
        let idx: Vec<_> = (0..self.len()).map(|_| graph.add_node(())).collect();
        for (s, row) in self.edges.iter().enumerate() {
            for t in row.iter().flatten() {
                graph.add_edge(idx[s], idx[*t], ());
            }
        }
        let sccs: Vec<Vec<usize>> =
            tarjan_scc(&graph).into_iter().map(|c| c.into_iter().map(|n| n.index()).collect()).collect();
        let mut comp = vec![0; self.len()];
        for (c, scc) in sccs.iter().enumerate() {
            for &s in scc {
                comp[s] = c;
            }
        }
        let mut internal = vec![0; sccs.len()];
        for (s, row) in self.edges.iter().enumerate() {
            for t in row.iter().flatten() {
                if comp[*t] == comp[s] {
                    internal[comp[s]] += 1;
                }
            }
        }
        (sccs, comp, internal)
    }

    /// Lengths of the non-trivial cycles; `None` if two of them meet.
    pub fn cycle_lengths(&self) -> Option<Vec<usize>> {
        let (sccs, _, internal) = self.cyclic_components();
        let mut out = Vec::new();
        for (scc, &e) in sccs.iter().zip(&internal) {
            if e == 0 {
                continue;
            }
            // a strongly connected component is one simple cycle iff it has as many edges as states
            if e != scc.len() {
                return None;
            }
            out.push(scc.len());
        }
        Some(out)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ActivityClass {
    Finitary,
    Polynomial(usize),
    Exponential,
}

impl std::fmt::Display for ActivityClass {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Self::Finitary => write!(f, "finitary"),
            Self::Polynomial(d) => write!(f, "polynomial({d})"),
            Self::Exponential => write!(f, "exponential"),
        }
    }
}

pub fn classify(diagram: &MooreDiagram) -> ActivityClass {
    let (sccs, comp, internal) = diagram.cyclic_components();
    if sccs.iter().zip(&internal).any(|(scc, &e)| e > 0 && e != scc.len()) {
        return ActivityClass::Exponential;
    }
    // tarjan_scc lists sinks first, so successors are final before their sources
    let mut chain = vec![0usize; sccs.len()];
    for (c, scc) in sccs.iter().enumerate() {
        let mut best = 0;
        for &s in scc {
            for t in diagram.edges[s].iter().flatten() {
                if comp[*t] != c {
                    best = best.max(chain[comp[*t]]);
                }
            }
        }
        chain[c] = best + usize::from(internal[c] > 0);
    }
    match chain.iter().copied().max().unwrap_or(0) {
        0 => ActivityClass::Finitary,
        k => ActivityClass::Polynomial(k - 1),
    }
}

pub fn activity_class(group: &Group, w: &GroupWord) -> Result<ActivityClass> {
    Ok(classify(&MooreDiagram::of(group, w)?))
}

/// `alpha(n)` for `n = 0..=levels`: the number of length-`n` words with a
/// non-trivial section. Saturates at `u64::MAX`.
pub fn activity_counts(group: &Group, w: &GroupWord, levels: usize) -> Result<Vec<u64>> {
    let m = MooreDiagram::of(group, w)?;
    let mut cur = vec![0u64; m.len()];
    if let Some(i) = m.initial {
        cur[i] = 1;
    }
    let mut out = vec![cur.iter().sum()];
    for _ in 0..levels {
        let mut next = vec![0u64; m.len()];
        for (s, row) in m.edges.iter().enumerate() {
            for t in row.iter().flatten() {
                next[*t] = next[*t].saturating_add(cur[s]);
            }
        }
        cur = next;
        out.push(cur.iter().fold(0u64, |a, &b| a.saturating_add(b)));
    }
    Ok(out)
}

/// A loop of the groupoid whose element has infinite order: the loop
/// arrows `v -> v` carrying its powers are pairwise distinct.
#[derive(Debug, Clone, Serialize)]
pub struct GrowthWitness {
    pub vertex: String,
    pub element: String,
    /// Length of the shortest known word for the `k`-th power, `k = 1, 2, 4, 8`.
    pub power_lengths: Vec<usize>,
}

#[derive(Debug, Clone)]
pub enum PoldOutcome {
    Contracting(Nucleus),
    NotContracting(GrowthWitness),
    NotApplicable(String),
}

#[derive(Debug, Clone, Serialize)]
pub struct PoldSetup {
    /// Cycle-length lcm, the level of the subtrees.
    pub level: usize,
    /// Words `v` of that level with `g|_v = g` for a state `g`.
    pub fixed_words: Vec<String>,
    pub arrows: usize,
}

#[derive(Debug, Clone)]
pub struct PoldReport {
    pub outcome: PoldOutcome,
    pub classes: Vec<(String, ActivityClass)>,
    pub setup: Option<PoldSetup>,
}

/// Largest level bound accepted for the subtree words.
const MAX_VERTEX_CODE: f64 = (1u64 << 60) as f64;

/// Contraction test for groups generated by automata of polynomial activity:
/// the group is contracting iff the groupoid of the self-returning subtree
/// maps is finite, and then the nucleus is the set of sections of its arrows.
/// Works in the faithful quotient whatever the system's backend.
pub fn pold_contraction_test(sys: &RecursionSystem, arrow_cap: usize) -> Result<PoldReport> {
    let group = Group::with_backend(sys, BackendDescriptor::Tree)?;
    let k = sys.generators().len();
    let diagrams = par::map_range(k, |g| MooreDiagram::of(&group, &GroupWord::gen(g)));
    let diagrams = diagrams.into_iter().collect::<Result<Vec<_>>>()?;
    let classes: Vec<(String, ActivityClass)> =
        diagrams.iter().enumerate().map(|(g, m)| (sys.gen_name(g).to_string(), classify(m))).collect();
    let na = |why: String, classes, setup| Ok(PoldReport { outcome: PoldOutcome::NotApplicable(why), classes, setup });
    if let Some((name, _)) = classes.iter().find(|(_, c)| *c == ActivityClass::Exponential) {
        return na(format!("generator {name} has exponential activity"), classes, None);
    }

    // states of the generators: a generating set closed under sections
    let mut states: IndexSet<Element> = IndexSet::new();
    let mut level = 1usize;
    for m in &diagrams {
        for w in &m.states {
            states.insert(group.tree_element(w)?);
        }
        for l in m.cycle_lengths().unwrap_or_default() {
            level = level.lcm(&l);
        }
    }
    let d = sys.degree();
    if (d as f64).powi(level as i32) > MAX_VERTEX_CODE {
        return na(format!("cycle lengths force level {level}, too deep to index"), classes, None);
    }

    let mut gens: Vec<(usize, usize, Element)> = Vec::new();
    let mut fixed: IndexSet<usize> = IndexSet::new();
    let mut objects: IndexSet<usize> = IndexSet::new();
    for g in &states {
        let word = group.canonical_word(g);
        for v in returning_words(&group, &word, level)? {
            let u = sys.act_word(&word, &v)?;
            let (vi, ui) = (encode_vertex(d, &v), encode_vertex(d, &u));
            fixed.insert(vi);
            objects.insert(vi);
            objects.insert(ui);
            gens.push((vi, ui, g.clone()));
        }
    }
    let fmt = |i: usize| sys.alphabet().format_vertex(&decode_vertex(d, level, i));
    let mut setup = PoldSetup { level, fixed_words: fixed.iter().map(|&i| fmt(i)).collect(), arrows: 0 };
    let objects: Vec<usize> = objects.into_iter().collect();
    match close_groupoid(&group, Equality::Faithful, &objects, &gens, arrow_cap, true)? {
        GroupoidOutcome::Finite { arrows, list } => {
            setup.arrows = arrows;
            let seeds = list.into_iter().map(|(_, _, e)| e);
            let nucleus = section_closure(&group, seeds)?;
            let nucleus = Nucleus::from_elements(&group, nucleus, 0)?;
            Ok(PoldReport { outcome: PoldOutcome::Contracting(nucleus), classes, setup: Some(setup) })
        }
        GroupoidOutcome::InfiniteLoop { vertex, element } => {
            let power_lengths = [1, 2, 4, 8]
                .iter()
                .map(|&p| Ok(group.canonical_word(&group.tree_element(&element.pow(p))?).len()))
                .collect::<Result<Vec<_>>>()?;
            let e = group.tree_element(&element)?;
            let witness = GrowthWitness { vertex: fmt(vertex), element: group.format(&e), power_lengths };
            Ok(PoldReport { outcome: PoldOutcome::NotContracting(witness), classes, setup: Some(setup) })
        }
        GroupoidOutcome::CapExceeded => {
            na(format!("groupoid exceeds {arrow_cap} arrows without a growth witness"), classes, Some(setup))
        }
    }
}

pub fn pold_default(sys: &RecursionSystem) -> Result<PoldReport> {
    pold_contraction_test(sys, DEFAULT_ARROW_CAP)
}

/// Words `v` of length `n` with `w|_v = w`. Only paths through non-trivial
/// states can return, and there are polynomially many of those.
fn returning_words(group: &Group, w: &GroupWord, n: usize) -> Result<Vec<Vec<usize>>> {
    let m = MooreDiagram::of(group, w)?;
    let Some(start) = m.initial else {
        return Ok(Vec::new());
    };
    let mut out = Vec::new();
    let mut stack: Vec<(usize, Vec<usize>)> = vec![(start, Vec::new())];
    while let Some((s, v)) = stack.pop() {
        if v.len() == n {
            if s == start {
                out.push(v);
            }
            continue;
        }
        for (x, t) in m.edges[s].iter().enumerate() {
            if let Some(t) = t {
                let mut next = v.clone();
                next.push(x);
                stack.push((*t, next));
            }
        }
    }
    out.sort();
    Ok(out)
}

fn section_closure(group: &Group, seeds: impl IntoIterator<Item = Element>) -> Result<Vec<Element>> {
    let mut set: IndexSet<Element> = seeds.into_iter().collect();
    set.insert(group.identity());
    let mut i = 0;
    while i < set.len() {
        let e = set[i].clone();
        for s in group.sections(&e)? {
            set.insert(s);
        }
        i += 1;
    }
    Ok(set.into_iter().collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus;
    use crate::dsl::parse_str;

    fn group(text: &str) -> Group {
        Group::new(parse_str(text).unwrap()).unwrap()
    }

    #[test]
    fn classes() {
        let g = group(corpus::HANOI);
        for name in ["a", "b", "c"] {
            let w = g.system().parse_word(name).unwrap();
            assert_eq!(activity_class(&g, &w).unwrap(), ActivityClass::Polynomial(0));
        }
        let g = group("alphabet: 0 1\na = (0 1)");
        assert_eq!(activity_class(&g, &GroupWord::gen(0)).unwrap(), ActivityClass::Finitary);
        assert_eq!(activity_class(&g, &GroupWord::empty()).unwrap(), ActivityClass::Finitary);
        let g = group(corpus::LONG_RANGE);
        let b = g.system().parse_word("b").unwrap();
        assert_eq!(activity_class(&g, &b).unwrap(), ActivityClass::Polynomial(1));
        // two loops at one state
        let g = group("alphabet: 0 1\na = (0 1)(a, a)");
        assert_eq!(activity_class(&g, &GroupWord::gen(0)).unwrap(), ActivityClass::Exponential);
    }

    #[test]
    fn counts() {
        let g = group(corpus::LONG_RANGE);
        let b = g.system().parse_word("b").unwrap();
        assert_eq!(activity_counts(&g, &b, 4).unwrap(), vec![1, 2, 3, 4, 5]);
        let a = g.system().parse_word("a").unwrap();
        assert_eq!(activity_counts(&g, &a, 3).unwrap(), vec![1, 1, 1, 1]);
    }

    #[test]
    fn pold_outcomes() {
        let sys = parse_str(corpus::ADDING_MACHINE).unwrap();
        let r = pold_default(&sys).unwrap();
        let PoldOutcome::Contracting(n) = &r.outcome else { panic!("{:?}", r.outcome) };
        assert_eq!(n.format(&sys), vec!["1", "a", "a^-1"]);

        let sys = parse_str(corpus::LONG_RANGE).unwrap();
        let r = pold_default(&sys).unwrap();
        let PoldOutcome::NotContracting(w) = &r.outcome else { panic!("{:?}", r.outcome) };
        assert!(w.power_lengths.windows(2).all(|p| p[0] < p[1]), "{w:?}");

        let sys = parse_str("alphabet: 0 1\na = (0 1)(a, a)").unwrap();
        assert!(matches!(pold_default(&sys).unwrap().outcome, PoldOutcome::NotApplicable(_)));
    }
}
