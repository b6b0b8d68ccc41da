//! Shared helpers and engine-independent oracles.
#![allow(dead_code)]

use std::collections::BTreeSet;

use selfsim::contraction::{compute_nucleus, ContractionStatus, Nucleus, NucleusOptions};
use selfsim::{corpus, dsl, Group, RecursionSystem};

pub fn system(name: &str) -> RecursionSystem {
    dsl::parse_str(corpus::by_name(name).unwrap_or_else(|| panic!("no bundled system {name}"))).unwrap()
}

pub fn group(name: &str) -> Group {
    Group::new(system(name)).unwrap()
}

pub fn nucleus(group: &Group) -> Option<Nucleus> {
    match compute_nucleus(group, &NucleusOptions::default()).unwrap() {
        ContractionStatus::Contracting(n) => Some(n),
        _ => None,
    }
}

pub fn sorted(words: Vec<String>) -> BTreeSet<String> {
    words.into_iter().collect()
}

/// Gupta-Sidki over `<a> * <b>`, both of order 3, coded by hand from
/// `a = (0 1 2)`, `b = (a, a^-1, b)`. Words are lists of syllables
/// `(factor, exponent)` with factor 0 for `a`, 1 for `b`, exponent 1 or 2,
/// read right to left.
pub mod gupta_sidki {
    use super::BTreeSet;

    pub type Syl = (u8, u8);

    fn push(w: &mut Vec<Syl>, (f, e): Syl) {
        if e % 3 == 0 {
            return;
        }
        match w.last_mut() {
            Some((g, k)) if *g == f => {
                *k = (*k + e) % 3;
                if *k == 0 {
                    w.pop();
                }
            }
            _ => w.push((f, e % 3)),
        }
    }

    fn act_syl((f, e): Syl, x: u8) -> (u8, Option<Syl>) {
        if f == 0 {
            return ((x + e) % 3, None);
        }
        let sec = match x {
            0 => (0, e),
            1 => (0, 3 - e),
            _ => (1, e),
        };
        (x, Some(sec))
    }

    /// `w|_x`, reduced.
    pub fn section(w: &[Syl], x: u8) -> Vec<Syl> {
        let mut secs = vec![None; w.len()];
        let mut y = x;
        for i in (0..w.len()).rev() {
            let (z, s) = act_syl(w[i], y);
            secs[i] = s;
            y = z;
        }
        let mut out = Vec::new();
        for s in secs.into_iter().flatten() {
            push(&mut out, s);
        }
        out
    }

    /// All reduced words with at most `k` syllables.
    pub fn words(k: usize) -> Vec<Vec<Syl>> {
        let mut all = vec![Vec::new()];
        let mut frontier = vec![Vec::new()];
        for _ in 0..k {
            let mut next = Vec::new();
            for w in &frontier {
                for f in 0..2u8 {
                    if w.last().is_some_and(|&(g, _)| g == f) {
                        continue;
                    }
                    for e in 1..3u8 {
                        let mut v: Vec<Syl> = w.clone();
                        v.push((f, e));
                        next.push(v);
                    }
                }
            }
            all.extend(next.iter().cloned());
            frontier = next;
        }
        all
    }

    pub fn format(w: &[Syl]) -> String {
        if w.is_empty() {
            return "1".into();
        }
        w.iter().map(|&(f, e)| format!("{}{}", ["a", "b"][f as usize], if e == 1 { "" } else { "^-1" })).collect()
    }

    /// Elements that occur as sections at every depth of words with at most
    /// `k` syllables: iterate the section map on sets until a set repeats and
    /// take the union over the cycle.
    pub fn saturated_sections(k: usize) -> BTreeSet<String> {
        let mut cur: BTreeSet<Vec<Syl>> = words(k).into_iter().collect();
        let mut history: Vec<BTreeSet<Vec<Syl>>> = Vec::new();
        for _ in 0..200 {
            if let Some(i) = history.iter().position(|h| *h == cur) {
                return history[i..].iter().flatten().map(|w| format(w)).collect();
            }
            let next = cur.iter().flat_map(|w| (0..3).map(|x| section(w, x))).collect();
            history.push(std::mem::replace(&mut cur, next));
        }
        panic!("section sets did not become periodic");
    }
}
