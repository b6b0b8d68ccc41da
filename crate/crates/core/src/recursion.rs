//! Alphabets, permutations, group words and the section calculus of a wreath
//! recursion.
//!
//! Words act on the tree as functions: the rightmost syllable acts first, so
//! `(gh)(v) = g(h(v))` and `(gh)|_x = g|_{h(x)} h|_x`. Letters are stored as
//! indices `0..d`; symbols only appear at the parse/print boundary.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::backend::BackendDescriptor;
use crate::error::{Error, Result, ValidationError};

/// Ordered set of distinct letter symbols.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Alphabet {
    symbols: Vec<String>,
}

impl Alphabet {
    pub fn new<S: Into<String>>(symbols: impl IntoIterator<Item = S>) -> Result<Self, ValidationError> {
        let symbols: Vec<String> = symbols.into_iter().map(Into::into).collect();
        if symbols.len() < 2 {
            return Err(ValidationError::AlphabetTooSmall);
        }
        for (i, s) in symbols.iter().enumerate() {
            if symbols[..i].contains(s) {
                return Err(ValidationError::DuplicateLetter(s.clone()));
            }
        }
        Ok(Self { symbols })
    }

    /// `{0, 1, ..., d-1}` written with decimal symbols.
    pub fn numeric(d: usize) -> Self {
        Self::new((0..d).map(|i| i.to_string())).expect("numeric alphabet of size >= 2")
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    pub fn symbol(&self, x: usize) -> &str {
        &self.symbols[x]
    }

    pub fn symbols(&self) -> &[String] {
        &self.symbols
    }

    pub fn index_of(&self, symbol: &str) -> Option<usize> {
        self.symbols.iter().position(|s| s == symbol)
    }

    /// True when every symbol is a single character, so words can be printed
    /// without separators.
    pub fn compact(&self) -> bool {
        self.symbols.iter().all(|s| s.chars().count() == 1)
    }

    /// Prints a tree vertex (a word over the alphabet).
    pub fn format_vertex(&self, v: &[usize]) -> String {
        let sep = if self.compact() { "" } else { "." };
        v.iter().map(|&x| self.symbol(x)).collect::<Vec<_>>().join(sep)
    }

    /// Inverse of [`Alphabet::format_vertex`].
    pub fn parse_vertex(&self, text: &str) -> Option<Vec<usize>> {
        if text.is_empty() {
            return Some(Vec::new());
        }
        if self.compact() {
            text.chars().map(|c| self.index_of(c.encode_utf8(&mut [0; 4]))).collect()
        } else {
            text.split('.').map(|s| self.index_of(s)).collect()
        }
    }
}

/// A bijection of `{0..d-1}`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Permutation {
    images: Vec<usize>,
}

impl Permutation {
    pub fn identity(d: usize) -> Self {
        Self { images: (0..d).collect() }
    }

    pub fn from_images(images: Vec<usize>) -> Result<Self, ValidationError> {
        let mut seen = vec![false; images.len()];
        for &i in &images {
            if i >= images.len() || seen[i] {
                return Err(ValidationError::NotAPermutation);
            }
            seen[i] = true;
        }
        Ok(Self { images })
    }

    /// Builds a permutation from disjoint cycles, each mapping `c[i] -> c[i+1]`.
    pub fn from_cycles(d: usize, cycles: &[Vec<usize>]) -> Result<Self, ValidationError> {
        let mut images: Vec<usize> = (0..d).collect();
        let mut used = vec![false; d];
        for cycle in cycles {
            for (i, &x) in cycle.iter().enumerate() {
                if x >= d || used[x] {
                    return Err(ValidationError::NotAPermutation);
                }
                used[x] = true;
                images[x] = cycle[(i + 1) % cycle.len()];
            }
        }
        Ok(Self { images })
    }

    pub fn degree(&self) -> usize {
        self.images.len()
    }

    pub fn apply(&self, x: usize) -> usize {
        self.images[x]
    }

    pub fn images(&self) -> &[usize] {
        &self.images
    }

    pub fn is_identity(&self) -> bool {
        self.images.iter().enumerate().all(|(i, &x)| i == x)
    }

    pub fn inverse(&self) -> Self {
        let mut inv = vec![0; self.images.len()];
        for (i, &x) in self.images.iter().enumerate() {
            inv[x] = i;
        }
        Self { images: inv }
    }

    /// `self ∘ other`: apply `other` first.
    pub fn compose(&self, other: &Self) -> Self {
        Self { images: other.images.iter().map(|&x| self.images[x]).collect() }
    }

    /// Orbits of `<self>` on the letters, each starting with its least letter,
    /// listed in order of these least letters.
    pub fn orbits(&self) -> Vec<Vec<usize>> {
        let mut seen = vec![false; self.images.len()];
        let mut out = Vec::new();
        for start in 0..self.images.len() {
            if seen[start] {
                continue;
            }
            let mut orbit = vec![start];
            seen[start] = true;
            let mut x = self.images[start];
            while x != start {
                seen[x] = true;
                orbit.push(x);
                x = self.images[x];
            }
            out.push(orbit);
        }
        out
    }

    /// Non-trivial cycles in canonical form (least letter first, sorted).
    pub fn cycles(&self) -> Vec<Vec<usize>> {
        self.orbits().into_iter().filter(|c| c.len() > 1).collect()
    }
}

/// One syllable of a group word: a generator or its formal inverse.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Sym {
    pub gen: u32,
    pub inv: bool,
}

impl Sym {
    pub fn new(gen: usize, inv: bool) -> Self {
        Self { gen: gen as u32, inv }
    }

    pub fn inverse(self) -> Self {
        Self { gen: self.gen, inv: !self.inv }
    }

    pub fn index(self) -> usize {
        self.gen as usize
    }
}

/// A freely reduced word in the generators and their inverses.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct GroupWord {
    syms: Vec<Sym>,
}

impl GroupWord {
    pub fn empty() -> Self {
        Self::default()
    }

    pub fn gen(g: usize) -> Self {
        Self { syms: vec![Sym::new(g, false)] }
    }

    pub fn gen_inv(g: usize) -> Self {
        Self { syms: vec![Sym::new(g, true)] }
    }

    /// Freely reduces the given syllable sequence.
    pub fn from_syms(syms: impl IntoIterator<Item = Sym>) -> Self {
        let mut out: Vec<Sym> = Vec::new();
        for s in syms {
            if out.last() == Some(&s.inverse()) {
                out.pop();
            } else {
                out.push(s);
            }
        }
        Self { syms: out }
    }

    pub fn syms(&self) -> &[Sym] {
        &self.syms
    }

    pub fn len(&self) -> usize {
        self.syms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.syms.is_empty()
    }

    pub fn mul(&self, other: &Self) -> Self {
        Self::from_syms(self.syms.iter().chain(other.syms.iter()).copied())
    }

    pub fn inverse(&self) -> Self {
        Self { syms: self.syms.iter().rev().map(|s| s.inverse()).collect() }
    }

    /// Integer power; negative exponents invert.
    pub fn pow(&self, k: i64) -> Self {
        let base = if k < 0 { self.inverse() } else { self.clone() };
        let mut syms = Vec::with_capacity(base.len() * k.unsigned_abs() as usize);
        for _ in 0..k.unsigned_abs() {
            syms.extend_from_slice(&base.syms);
        }
        Self::from_syms(syms)
    }

    /// Shortlex order: length first, then syllables (generator index, positive before inverse).
    pub fn shortlex_cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.len().cmp(&other.len()).then_with(|| self.syms.cmp(&other.syms))
    }
}

/// Wreath recursion data for one generator.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GeneratorDef {
    pub name: String,
    pub perm: Permutation,
    pub sections: Vec<GroupWord>,
}

/// An alphabet, named generators with their recursions, and the overgroup in
/// which words are compared.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RecursionSystem {
    alphabet: Alphabet,
    generators: Vec<GeneratorDef>,
    backend: BackendDescriptor,
}

pub(crate) fn valid_name(name: &str) -> bool {
    let mut chars = name.chars();
    matches!(chars.next(), Some(c) if c.is_alphabetic() || c == '_') && chars.all(|c| c.is_alphanumeric() || c == '_')
}

impl RecursionSystem {
    pub fn new(
        alphabet: Alphabet,
        generators: Vec<GeneratorDef>,
        backend: BackendDescriptor,
    ) -> Result<Self, ValidationError> {
        if generators.is_empty() {
            return Err(ValidationError::NoGenerators);
        }
        let d = alphabet.len();
        for (i, g) in generators.iter().enumerate() {
            if !valid_name(&g.name) {
                return Err(ValidationError::BadGeneratorName(g.name.clone()));
            }
            if generators[..i].iter().any(|h| h.name == g.name) {
                return Err(ValidationError::DuplicateGenerator(g.name.clone()));
            }
            if g.perm.degree() != d {
                return Err(ValidationError::NotAPermutation);
            }
            if g.sections.len() != d {
                return Err(ValidationError::SectionCount {
                    generator: g.name.clone(),
                    expected: d,
                    found: g.sections.len(),
                });
            }
            for w in &g.sections {
                if let Some(s) = w.syms().iter().find(|s| s.index() >= generators.len()) {
                    return Err(ValidationError::UnknownSymbol {
                        generator: g.name.clone(),
                        symbol: format!("#{}", s.gen),
                    });
                }
            }
        }
        backend.validate(&generators)?;
        Ok(Self { alphabet, generators, backend })
    }

    /// Same recursion compared in a different overgroup.
    pub fn with_backend(&self, backend: BackendDescriptor) -> Result<Self, ValidationError> {
        Self::new(self.alphabet.clone(), self.generators.clone(), backend)
    }

    pub fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    pub fn degree(&self) -> usize {
        self.alphabet.len()
    }

    pub fn generators(&self) -> &[GeneratorDef] {
        &self.generators
    }

    pub fn backend(&self) -> &BackendDescriptor {
        &self.backend
    }

    pub fn gen_index(&self, name: &str) -> Option<usize> {
        self.generators.iter().position(|g| g.name == name)
    }

    pub fn gen_name(&self, g: usize) -> &str {
        &self.generators[g].name
    }

    fn check_word(&self, w: &GroupWord) -> Result<()> {
        match w.syms().iter().find(|s| s.index() >= self.generators.len()) {
            Some(s) => Err(Error::UnknownGenerator(s.index())),
            None => Ok(()),
        }
    }

    fn check_letter(&self, x: usize) -> Result<()> {
        if x < self.degree() {
            Ok(())
        } else {
            Err(Error::UnknownLetter(x))
        }
    }

    #[inline]
    pub(crate) fn sym_act(&self, s: Sym, x: usize) -> usize {
        let p = &self.generators[s.index()].perm;
        if s.inv {
            p.images().iter().position(|&y| y == x).expect("bijection")
        } else {
            p.apply(x)
        }
    }

    /// Section of one syllable; inverse sections follow
    /// `(g^-1)|_x = (g|_{g^-1(x)})^-1`.
    pub(crate) fn sym_section(&self, s: Sym, x: usize) -> GroupWord {
        let g = &self.generators[s.index()];
        if s.inv {
            let y = self.sym_act(s, x);
            g.sections[y].inverse()
        } else {
            g.sections[x].clone()
        }
    }

    pub(crate) fn act_letter_raw(&self, w: &GroupWord, x: usize) -> usize {
        w.syms().iter().rev().fold(x, |y, &s| self.sym_act(s, y))
    }

    pub(crate) fn section_letter_raw(&self, w: &GroupWord, x: usize) -> GroupWord {
        let mut parts: Vec<GroupWord> = Vec::with_capacity(w.len());
        let mut y = x;
        for &s in w.syms().iter().rev() {
            parts.push(self.sym_section(s, y));
            y = self.sym_act(s, y);
        }
        GroupWord::from_syms(parts.iter().rev().flat_map(|p| p.syms().iter().copied()))
    }

    /// Root permutation of the element represented by `w`.
    pub fn perm_of(&self, w: &GroupWord) -> Permutation {
        Permutation { images: (0..self.degree()).map(|x| self.act_letter_raw(w, x)).collect() }
    }

    /// Image of a letter under `w` (rightmost syllable first).
    pub fn act_letter(&self, w: &GroupWord, x: usize) -> Result<usize> {
        self.check_word(w)?;
        self.check_letter(x)?;
        Ok(self.act_letter_raw(w, x))
    }

    /// Freely reduced section word `w|_x`.
    pub fn section_letter(&self, w: &GroupWord, x: usize) -> Result<GroupWord> {
        self.check_word(w)?;
        self.check_letter(x)?;
        Ok(self.section_letter_raw(w, x))
    }

    /// Image `w(v)` of a finite word, letter by letter.
    pub fn act_word(&self, w: &GroupWord, v: &[usize]) -> Result<Vec<usize>> {
        self.check_word(w)?;
        let mut cur = w.clone();
        let mut out = Vec::with_capacity(v.len());
        for &x in v {
            self.check_letter(x)?;
            out.push(self.act_letter_raw(&cur, x));
            cur = self.section_letter_raw(&cur, x);
        }
        Ok(out)
    }

    /// Section `w|_v` along a finite word.
    pub fn section_word(&self, w: &GroupWord, v: &[usize]) -> Result<GroupWord> {
        self.check_word(w)?;
        let mut cur = w.clone();
        for &x in v {
            self.check_letter(x)?;
            cur = self.section_letter_raw(&cur, x);
        }
        Ok(cur)
    }

    /// Prints a word with the generator names; inverses as `^-1`, the empty word as `1`.
    pub fn format_word(&self, w: &GroupWord) -> String {
        if w.is_empty() {
            return "1".to_string();
        }
        let compact = self.generators.iter().all(|g| g.name.chars().count() == 1);
        let parts: Vec<String> = w
            .syms()
            .iter()
            .map(|s| {
                let name = self.gen_name(s.index());
                if s.inv {
                    format!("{name}^-1")
                } else {
                    name.to_string()
                }
            })
            .collect();
        parts.join(if compact { "" } else { " " })
    }

    /// Parses a word over the generator names (see the DSL manual in the README).
    pub fn parse_word(&self, text: &str) -> Result<GroupWord> {
        crate::dsl::parse_word_text(self, text, "<word>", 1, 1).map_err(Error::from)
    }
}

impl fmt::Display for RecursionSystem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&crate::dsl::serialize(self))
    }
}

/// All words of length `n` in lexicographic order, encoded as indices.
pub fn level_words(d: usize, n: usize) -> Vec<Vec<usize>> {
    let total = d.pow(n as u32);
    (0..total).map(|i| decode_vertex(d, n, i)).collect()
}

/// Vertex index of a level-`n` word; the first letter is the most significant digit.
pub fn encode_vertex(d: usize, v: &[usize]) -> usize {
    v.iter().fold(0, |acc, &x| acc * d + x)
}

pub fn decode_vertex(d: usize, n: usize, mut i: usize) -> Vec<usize> {
    let mut v = vec![0; n];
    for slot in v.iter_mut().rev() {
        *slot = i % d;
        i /= d;
    }
    v
}
