//! Finite-state transducer view of words: section closures, Moore
//! minimization and canonical keys for the faithful tree action.

use std::collections::{HashMap, VecDeque};
use std::sync::Arc;

use dashmap::DashMap;

use crate::error::{Error, Result};
use crate::recursion::{GroupWord, Permutation, RecursionSystem};

/// Canonical encoding shared by all backends; equal keys mean equal elements.
pub type Key = Arc<[u32]>;

/// The section automaton of one word: states are normal-form words, state 0
/// is the starting word.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SectionClosure {
    pub states: Vec<GroupWord>,
    /// `trans[s][x]` is the state of `states[s]|_x`.
    pub trans: Vec<Vec<usize>>,
    /// `out[s]` is the root permutation of `states[s]`.
    pub out: Vec<Permutation>,
}

impl SectionClosure {
    /// Breadth-first expansion of sections, with states identified by the
    /// `normalize` word map.
    pub fn build(
        sys: &RecursionSystem,
        w: &GroupWord,
        budget: usize,
        normalize: impl Fn(GroupWord) -> GroupWord,
    ) -> Result<Self> {
        let d = sys.degree();
        let start = normalize(w.clone());
        let mut index: HashMap<GroupWord, usize> = HashMap::new();
        let mut states = vec![start.clone()];
        index.insert(start, 0);
        let mut trans: Vec<Vec<usize>> = Vec::new();
        let mut out = Vec::new();
        let mut i = 0;
        while i < states.len() {
            let cur = states[i].clone();
            out.push(sys.perm_of(&cur));
            let mut row = Vec::with_capacity(d);
            for x in 0..d {
                let s = normalize(sys.section_letter_raw(&cur, x));
                let next = match index.get(&s) {
                    Some(&j) => j,
                    None => {
                        if states.len() >= budget {
                            return Err(Error::BudgetExceeded { what: "section closure", states: states.len() });
                        }
                        let j = states.len();
                        states.push(s.clone());
                        index.insert(s, j);
                        j
                    }
                };
                row.push(next);
            }
            trans.push(row);
            i += 1;
        }
        Ok(Self { states, trans, out })
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    /// Every state acts trivially on the first level.
    pub fn acts_trivially(&self) -> bool {
        self.out.iter().all(Permutation::is_identity)
    }

    /// Image of a finite word under the starting state.
    pub fn act(&self, v: &[usize]) -> Vec<usize> {
        let mut s = 0;
        v.iter()
            .map(|&x| {
                let y = self.out[s].apply(x);
                s = self.trans[s][x];
                y
            })
            .collect()
    }

    /// State reached from state 0 along `v`.
    pub fn state_after(&self, v: &[usize]) -> usize {
        v.iter().fold(0, |s, &x| self.trans[s][x])
    }

    /// Longest shortest-path distance from the start; every state is reached
    /// by a word of at most this length.
    pub fn depth(&self) -> usize {
        let mut dist = vec![usize::MAX; self.len()];
        dist[0] = 0;
        let mut queue = VecDeque::from([0usize]);
        let mut best = 0;
        while let Some(s) = queue.pop_front() {
            best = best.max(dist[s]);
            for &t in &self.trans[s] {
                if dist[t] == usize::MAX {
                    dist[t] = dist[s] + 1;
                    queue.push_back(t);
                }
            }
        }
        best
    }
}

/// The minimized Mealy automaton of an element.
#[derive(Debug, Clone)]
pub struct MinimalAutomaton {
    pub perms: Vec<Permutation>,
    pub trans: Vec<Vec<usize>>,
    /// Shortlex-least word representing each state.
    pub reps: Vec<GroupWord>,
    pub initial: usize,
    /// Index of the identity state, if reachable.
    pub trivial: Option<usize>,
    /// Class of each state of the source closure.
    pub class_of: Vec<usize>,
}

impl MinimalAutomaton {
    /// Moore partition refinement on `(out, trans)`.
    pub fn from_closure(c: &SectionClosure) -> Self {
        let n = c.len();
        let d = c.trans.first().map_or(0, Vec::len);
        let mut class: Vec<usize> = {
            let mut ids: HashMap<&Permutation, usize> = HashMap::new();
            c.out
                .iter()
                .map(|p| {
                    let k = ids.len();
                    *ids.entry(p).or_insert(k)
                })
                .collect()
        };
        let mut count = class.iter().copied().max().map_or(0, |m| m + 1);
        loop {
            let mut ids: HashMap<Vec<usize>, usize> = HashMap::new();
            let next: Vec<usize> = (0..n)
                .map(|s| {
                    let mut sig = Vec::with_capacity(d + 1);
                    sig.push(class[s]);
                    sig.extend(c.trans[s].iter().map(|&t| class[t]));
                    let k = ids.len();
                    *ids.entry(sig).or_insert(k)
                })
                .collect();
            let new_count = ids.len();
            class = next;
            if new_count == count {
                break;
            }
            count = new_count;
        }
        let mut perms = vec![None; count];
        let mut trans = vec![Vec::new(); count];
        let mut reps: Vec<Option<GroupWord>> = vec![None; count];
        for s in 0..n {
            let k = class[s];
            if perms[k].is_none() {
                perms[k] = Some(c.out[s].clone());
                trans[k] = c.trans[s].iter().map(|&t| class[t]).collect();
            }
            let better = match &reps[k] {
                None => true,
                Some(r) => c.states[s].shortlex_cmp(r).is_lt(),
            };
            if better {
                reps[k] = Some(c.states[s].clone());
            }
        }
        let perms: Vec<Permutation> = perms.into_iter().map(|p| p.expect("class has a state")).collect();
        let trivial = (0..count).find(|&k| perms[k].is_identity() && trans[k].iter().all(|&t| t == k));
        Self {
            perms,
            trans,
            reps: reps.into_iter().map(|r| r.expect("class has a state")).collect(),
            initial: class[0],
            trivial,
            class_of: class,
        }
    }

    pub fn len(&self) -> usize {
        self.perms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.perms.is_empty()
    }

    /// Canonical code of the sub-automaton reachable from `start`: states in
    /// breadth-first order (letters ascending), each written as its
    /// permutation images followed by successor numbers.
    pub fn code_from(&self, start: usize) -> Vec<u32> {
        let mut number: HashMap<usize, u32> = HashMap::new();
        let mut order = vec![start];
        number.insert(start, 0);
        let mut i = 0;
        while i < order.len() {
            for &t in &self.trans[order[i]] {
                if let std::collections::hash_map::Entry::Vacant(slot) = number.entry(t) {
                    slot.insert(order.len() as u32);
                    order.push(t);
                }
            }
            i += 1;
        }
        let mut code = Vec::with_capacity(1 + order.len() * 2 * self.trans[start].len());
        code.push(order.len() as u32);
        for &s in &order {
            code.extend(self.perms[s].images().iter().map(|&y| y as u32));
            code.extend(self.trans[s].iter().map(|t| number[t]));
        }
        code
    }
}

/// Closure cap below which every state's key is cached alongside the word's.
const CACHE_ALL_STATES: usize = 96;

/// Memoized canonical keys of words in the faithful quotient.
#[derive(Debug)]
pub struct TreeKeyer {
    sys: Arc<RecursionSystem>,
    cap: usize,
    keys: DashMap<GroupWord, Key>,
    reps: DashMap<Key, GroupWord>,
}

impl TreeKeyer {
    pub fn new(sys: Arc<RecursionSystem>, cap: usize) -> Self {
        Self { sys, cap, keys: DashMap::new(), reps: DashMap::new() }
    }

    pub fn cap(&self) -> usize {
        self.cap
    }

    /// Word-level closure with free reduction only.
    pub fn closure(&self, w: &GroupWord) -> Result<SectionClosure> {
        SectionClosure::build(&self.sys, w, self.cap, |x| x)
    }

    pub fn automaton(&self, w: &GroupWord) -> Result<MinimalAutomaton> {
        Ok(MinimalAutomaton::from_closure(&self.closure(w)?))
    }

    pub fn key(&self, w: &GroupWord) -> Result<Key> {
        if let Some(k) = self.keys.get(w) {
            return Ok(k.clone());
        }
        let closure = self.closure(w)?;
        let aut = MinimalAutomaton::from_closure(&closure);
        let key: Key = aut.code_from(aut.initial).into();
        if closure.len() <= CACHE_ALL_STATES {
            let mut by_class: HashMap<usize, Key> = HashMap::new();
            for (s, word) in closure.states.iter().enumerate() {
                let k = aut.class_of[s];
                let kk = by_class.entry(k).or_insert_with(|| aut.code_from(k).into()).clone();
                self.remember(word, kk);
            }
        } else {
            self.remember(w, key.clone());
        }
        Ok(key)
    }

    fn remember(&self, w: &GroupWord, key: Key) {
        self.keys.entry(w.clone()).or_insert_with(|| key.clone());
        self.reps
            .entry(key)
            .and_modify(|r| {
                if w.shortlex_cmp(r).is_lt() {
                    *r = w.clone();
                }
            })
            .or_insert_with(|| w.clone());
    }

    /// Shortlex-least word seen so far for this key.
    pub fn representative(&self, key: &Key) -> Option<GroupWord> {
        self.reps.get(key).map(|r| r.clone())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dsl::parse_str;

    #[test]
    fn basilica_closure_states() {
        let sys = parse_str("alphabet: 0 1\na = (0 1)(1, b)\nb = (1, a)").unwrap();
        let a = sys.parse_word("a").unwrap();
        let c = SectionClosure::build(&sys, &a, 100, |x| x).unwrap();
        let names: Vec<String> = c.states.iter().map(|w| sys.format_word(w)).collect();
        assert_eq!(names, vec!["a", "1", "b"]);
        assert!(!c.acts_trivially());
    }

    #[test]
    fn empty_word_is_single_absorbing_state() {
        let sys = parse_str("alphabet: 0 1\na = (0 1)(1, a)").unwrap();
        let c = SectionClosure::build(&sys, &GroupWord::empty(), 10, |x| x).unwrap();
        assert_eq!(c.len(), 1);
        assert_eq!(c.trans[0], vec![0, 0]);
        assert!(c.acts_trivially());
    }

    #[test]
    fn budget_is_reported() {
        // b^n = (a^n, a^-n, b^n) over the free group: four states
        let sys = parse_str("alphabet: 0 1 2\na = (0 1 2)\nb = (a, a^-1, b)").unwrap();
        let w = sys.parse_word("b^40").unwrap();
        let err = SectionClosure::build(&sys, &w, 3, |x| x).unwrap_err();
        assert!(matches!(err, Error::BudgetExceeded { .. }));
    }

    #[test]
    fn minimization_merges_equal_states() {
        // c and d have identical recursions
        let sys = parse_str("alphabet: 0 1\nc = (0 1)(d, 1)\nd = (0 1)(c, 1)").unwrap();
        let aut = MinimalAutomaton::from_closure(&SectionClosure::build(&sys, &GroupWord::gen(0), 10, |x| x).unwrap());
        assert_eq!(aut.len(), 2);
        let keyer = TreeKeyer::new(Arc::new(sys), 100);
        assert_eq!(keyer.key(&GroupWord::gen(0)).unwrap(), keyer.key(&GroupWord::gen(1)).unwrap());
    }
}
