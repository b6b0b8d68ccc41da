//! Element orders in the faithful quotient.
//!
//! For `g` with root orbits `O_1..O_k` (representatives `x_i`) the order of
//! `g` is `lcm_i |O_i| * ord(g^{|O_i|}|_{x_i})`. The recursion is unrolled
//! into a finite graph of elements; a cycle carrying a factor `|O| > 1` forces
//! infinite order, and otherwise the orders are the least solution of the
//! lcm equations.

use indexmap::IndexSet;
use num_integer::Integer;
use petgraph::algo::tarjan_scc;
use petgraph::graph::DiGraph;
use serde::{Deserialize, Serialize};

use crate::backend::{Element, Group};
use crate::error::Result;
use crate::recursion::GroupWord;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Order {
    Finite(u64),
    Infinite,
    Unknown,
}

#[derive(Debug, Clone, Copy)]
pub struct OrderOptions {
    /// Finite orders above this are reported as `Unknown`.
    pub max_order: u64,
    /// Cap on distinct elements in the unrolled recursion.
    pub max_elements: usize,
    /// Cap on the length of the words `g^{|O|}` fed to the recursion; powers
    /// can double in length at every step without ever closing a cycle.
    pub max_word_len: usize,
}

impl Default for OrderOptions {
    fn default() -> Self {
        Self { max_order: 1 << 40, max_elements: 10_000, max_word_len: 4_096 }
    }
}

pub fn order(group: &Group, w: &GroupWord, opts: OrderOptions) -> Result<Order> {
    let sys = group.system();
    let start = match group.tree_element(w) {
        Ok(e) => e,
        Err(crate::Error::BudgetExceeded { .. }) => return Ok(Order::Unknown),
        Err(e) => return Err(e),
    };
    let mut nodes: IndexSet<Element> = IndexSet::new();
    nodes.insert(start);
    let mut edges: Vec<(usize, usize, u64)> = Vec::new();
    let mut complete = true;
    let mut i = 0;
    while i < nodes.len() {
        if nodes.len() > opts.max_elements {
            complete = false;
            break;
        }
        let g = nodes[i].clone();
        let word = group.canonical_word(&g);
        for orbit in sys.perm_of(&word).orbits() {
            let m = orbit.len();
            if word.len() * m > opts.max_word_len {
                complete = false;
                continue;
            }
            let sec = sys.section_letter_raw(&word.pow(m as i64), orbit[0]);
            let h = match group.tree_element(&sec) {
                Ok(h) => h,
                Err(crate::Error::BudgetExceeded { .. }) => {
                    complete = false;
                    continue;
                }
                Err(e) => return Err(e),
            };
            let (j, _) = nodes.insert_full(h);
            edges.push((i, j, m as u64));
        }
        i += 1;
    }

    let mut graph: DiGraph<(), u64> = DiGraph::new();
    let idx: Vec<_> = (0..nodes.len()).map(|_| graph.add_node(())).collect();
    for &(u, v, m) in &edges {
        graph.add_edge(idx[u], idx[v], m);
    }
    let sccs = tarjan_scc(&graph);
    let mut comp = vec![0usize; nodes.len()];
    for (c, scc) in sccs.iter().enumerate() {
        for n in scc {
            comp[n.index()] = c;
        }
    }
    if edges.iter().any(|&(u, v, m)| m > 1 && comp[u] == comp[v]) {
        return Ok(Order::Infinite);
    }
    if !complete {
        return Ok(Order::Unknown);
    }
    // tarjan_scc lists components sinks first
    let mut value = vec![1u64; sccs.len()];
    for c in 0..sccs.len() {
        let mut acc: u64 = 1;
        for &(u, v, m) in &edges {
            if comp[u] != c || comp[v] == c {
                continue;
            }
            let Some(term) = m.checked_mul(value[comp[v]]) else {
                return Ok(Order::Unknown);
            };
            let l = acc.lcm(&term);
            if l > opts.max_order {
                return Ok(Order::Unknown);
            }
            acc = l;
        }
        value[c] = acc;
    }
    Ok(Order::Finite(value[comp[0]]))
}
