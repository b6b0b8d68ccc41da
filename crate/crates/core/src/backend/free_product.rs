//! Free products of finite groups: syllable normal forms.

use std::collections::HashMap;

use crate::backend::tree::{Key, TreeKeyer};
use crate::backend::FactorSpec;
use crate::error::ValidationError;
use crate::recursion::{GroupWord, RecursionSystem, Sym};

/// Multiplication table of a finite group; element 0 is the identity.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CayleyTable {
    mult: Vec<Vec<u16>>,
    inv: Vec<u16>,
}

impl CayleyTable {
    /// Checks identity, closure, associativity and inverses.
    pub fn new(mult: Vec<Vec<u16>>) -> Result<Self, ValidationError> {
        let n = mult.len();
        let bad = |m: &str| ValidationError::Backend(format!("Cayley table: {m}"));
        if n == 0 || mult.iter().any(|row| row.len() != n) {
            return Err(bad("table must be square and non-empty"));
        }
        if mult.iter().flatten().any(|&x| x as usize >= n) {
            return Err(bad("entry out of range"));
        }
        for (x, row) in mult.iter().enumerate() {
            if mult[0][x] as usize != x || row[0] as usize != x {
                return Err(bad("element 0 is not the identity"));
            }
        }
        for x in 0..n {
            for y in 0..n {
                for z in 0..n {
                    let l = mult[mult[x][y] as usize][z];
                    let r = mult[x][mult[y][z] as usize];
                    if l != r {
                        return Err(bad("not associative"));
                    }
                }
            }
        }
        let mut inv = Vec::with_capacity(n);
        for row in &mult {
            match row.iter().position(|&v| v == 0) {
                Some(y) => inv.push(y as u16),
                None => return Err(bad("element without inverse")),
            }
        }
        Ok(Self { mult, inv })
    }

    /// `Z/n` with elements `0..n` added modulo `n`.
    pub fn cyclic(n: usize) -> Self {
        let mult = (0..n).map(|x| (0..n).map(|y| ((x + y) % n) as u16).collect()).collect();
        let inv = (0..n).map(|x| ((n - x) % n) as u16).collect();
        Self { mult, inv }
    }

    pub fn order(&self) -> usize {
        self.mult.len()
    }

    pub fn mul(&self, x: u16, y: u16) -> u16 {
        self.mult[x as usize][y as usize]
    }

    pub fn inv(&self, x: u16) -> u16 {
        self.inv[x as usize]
    }
}

/// One free factor: a cluster of generators and the finite group they generate.
#[derive(Debug, Clone)]
pub struct FiniteFactor {
    pub generators: Vec<usize>,
    pub table: CayleyTable,
    /// `gen_elem[i]` is the element of `generators[i]`.
    pub gen_elem: Vec<u16>,
    /// Shortest word for every element, used as the printed normal form.
    pub reps: Vec<GroupWord>,
}

/// Factor cap when deriving a cluster's group from the tree action.
const FACTOR_CAP: usize = 4096;

impl FiniteFactor {
    fn cyclic(gen: usize, n: usize) -> Self {
        let reps = (0..n)
            .map(|k| {
                if 2 * k <= n {
                    GroupWord::gen(gen).pow(k as i64)
                } else {
                    GroupWord::gen(gen).pow(-((n - k) as i64))
                }
            })
            .collect();
        Self { generators: vec![gen], table: CayleyTable::cyclic(n), gen_elem: vec![(1 % n) as u16], reps }
    }

    /// Enumerates the subgroup of the faithful quotient generated by the cluster.
    fn derived(gens: &[usize], keyer: &TreeKeyer) -> Result<Self, ValidationError> {
        let err = |m: String| ValidationError::Backend(m);
        let key = |w: &GroupWord| keyer.key(w).map_err(|e| err(format!("deriving factor table: {e}")));
        let mut index: HashMap<Key, u16> = HashMap::new();
        let mut reps = vec![GroupWord::empty()];
        index.insert(key(&GroupWord::empty())?, 0);
        let steps: Vec<GroupWord> = gens.iter().flat_map(|&g| [GroupWord::gen(g), GroupWord::gen_inv(g)]).collect();
        let mut i = 0;
        while i < reps.len() {
            let base = reps[i].clone();
            for s in &steps {
                let w = base.mul(s);
                let k = key(&w)?;
                if let std::collections::hash_map::Entry::Vacant(slot) = index.entry(k) {
                    if reps.len() >= FACTOR_CAP {
                        return Err(err(format!("factor group exceeds {FACTOR_CAP} elements")));
                    }
                    slot.insert(reps.len() as u16);
                    reps.push(w);
                }
            }
            i += 1;
        }
        let n = reps.len();
        let mut mult = vec![vec![0u16; n]; n];
        for x in 0..n {
            for y in 0..n {
                mult[x][y] = index[&key(&reps[x].mul(&reps[y]))?];
            }
        }
        let gen_elem = gens.iter().map(|&g| key(&GroupWord::gen(g)).map(|k| index[&k])).collect::<Result<_, _>>()?;
        Ok(Self { generators: gens.to_vec(), table: CayleyTable::new(mult)?, gen_elem, reps })
    }

    fn elem_of(&self, s: Sym) -> u16 {
        let i = self.generators.iter().position(|&g| g == s.index()).expect("generator of this factor");
        let e = self.gen_elem[i];
        if s.inv {
            self.table.inv(e)
        } else {
            e
        }
    }
}

/// A syllable: (factor index, non-identity element of that factor).
pub type Syllable = (u16, u16);

#[derive(Debug, Clone)]
pub struct FreeProductGroup {
    factor_of: Vec<usize>,
    factors: Vec<FiniteFactor>,
}

impl FreeProductGroup {
    pub fn build(sys: &RecursionSystem, specs: &[FactorSpec], keyer: &TreeKeyer) -> Result<Self, ValidationError> {
        let mut factor_of = vec![usize::MAX; sys.generators().len()];
        let mut factors = Vec::with_capacity(specs.len());
        for (fi, spec) in specs.iter().enumerate() {
            let gens: Vec<usize> = spec
                .generators
                .iter()
                .map(|n| sys.gen_index(n).ok_or_else(|| ValidationError::Backend(format!("unknown generator `{n}`"))))
                .collect::<Result<_, _>>()?;
            for &g in &gens {
                factor_of[g] = fi;
            }
            let factor = match spec.order {
                Some(n) => FiniteFactor::cyclic(gens[0], n as usize),
                None => FiniteFactor::derived(&gens, keyer)?,
            };
            factors.push(factor);
        }
        let fp = Self { factor_of, factors };
        fp.check_recursion(sys)?;
        Ok(fp)
    }

    pub fn factors(&self) -> &[FiniteFactor] {
        &self.factors
    }

    pub fn syllables(&self, w: &GroupWord) -> Vec<Syllable> {
        let mut out: Vec<Syllable> = Vec::new();
        for &s in w.syms() {
            let f = self.factor_of[s.index()];
            let factor = &self.factors[f];
            let e = factor.elem_of(s);
            if e == 0 {
                continue;
            }
            match out.last_mut() {
                Some(top) if top.0 as usize == f => {
                    let p = factor.table.mul(top.1, e);
                    if p == 0 {
                        out.pop();
                    } else {
                        top.1 = p;
                    }
                }
                _ => out.push((f as u16, e)),
            }
        }
        out
    }

    pub fn word_of(&self, syllables: &[Syllable]) -> GroupWord {
        GroupWord::from_syms(
            syllables.iter().flat_map(|&(f, e)| self.factors[f as usize].reps[e as usize].syms().iter().copied()),
        )
    }

    pub fn normal_word(&self, w: &GroupWord) -> GroupWord {
        self.word_of(&self.syllables(w))
    }

    /// The recursion must send every defining relation of every factor to an
    /// element with identity permutation and trivial sections.
    fn check_recursion(&self, sys: &RecursionSystem) -> Result<(), ValidationError> {
        for factor in &self.factors {
            let n = factor.table.order();
            let mut relators = Vec::new();
            for (i, &g) in factor.generators.iter().enumerate() {
                relators.push(GroupWord::gen(g).mul(&factor.reps[factor.gen_elem[i] as usize].inverse()));
            }
            for x in 0..n {
                for y in 0..n {
                    let xy = factor.table.mul(x as u16, y as u16) as usize;
                    relators.push(factor.reps[x].mul(&factor.reps[y]).mul(&factor.reps[xy].inverse()));
                }
            }
            for r in relators {
                let trivial = sys.perm_of(&r).is_identity()
                    && (0..sys.degree()).all(|x| self.syllables(&sys.section_letter_raw(&r, x)).is_empty());
                if !trivial {
                    return Err(ValidationError::Backend(format!(
                        "wreath recursion is not defined on the free product: relator {} does not map to 1",
                        sys.format_word(&r)
                    )));
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cayley_validation() {
        assert!(CayleyTable::new(vec![vec![0, 1], vec![1, 0]]).is_ok());
        assert!(CayleyTable::new(vec![vec![0, 1], vec![1, 1]]).is_err());
        assert!(CayleyTable::new(vec![vec![1, 0], vec![0, 1]]).is_err());
        let z3 = CayleyTable::cyclic(3);
        assert_eq!(z3.mul(2, 2), 1);
        assert_eq!(z3.inv(1), 2);
    }

    #[test]
    fn cyclic_representatives_are_shortest() {
        let f = FiniteFactor::cyclic(0, 3);
        assert_eq!(f.reps[1], GroupWord::gen(0));
        assert_eq!(f.reps[2], GroupWord::gen_inv(0));
        let f = FiniteFactor::cyclic(0, 4);
        assert_eq!(f.reps[2], GroupWord::gen(0).pow(2));
    }
}
