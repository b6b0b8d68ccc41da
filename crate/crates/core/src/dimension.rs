//! Partitions of a level certifying an upper bound on the dimension of the
//! limit space.
//!
//! For a part `V` of `X^n` and a finite set `A`, the arrows `(v, g(v), g|_v)`
//! with `g ∈ A` and `v, g(v) ∈ V` generate a groupoid of subtree
//! isomorphisms. If every part of a partition `V_0, ..., V_d` gives a finite
//! groupoid, the limit space has dimension at most `d`. A failed search says
//! nothing about lower bounds.

use std::collections::{HashMap, HashSet};

use dashmap::DashMap;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use indexmap::IndexSet;

use crate::backend::{order, Element, Group, Order, OrderOptions};
use crate::contraction::Nucleus;
use crate::error::{Error, Result};
use crate::par;
use crate::recursion::{decode_vertex, encode_vertex, GroupWord, RecursionSystem};

pub type Vertex = Vec<usize>;

pub const DEFAULT_ARROW_CAP: usize = 10_000;

/// `src X* -> dst X*`, `src w ↦ dst elem(w)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Arrow {
    pub src: Vertex,
    pub dst: Vertex,
    pub elem: Element,
}

/// How arrow elements are compared.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Equality {
    /// The group's own backend (free words never identify more than the tree does).
    #[default]
    Backend,
    /// The faithful action on the tree.
    Faithful,
}

#[derive(Debug, Clone)]
pub enum Closure {
    Finite(Vec<Arrow>),
    CapExceeded { arrows: usize },
}

impl Closure {
    pub fn is_finite(&self) -> bool {
        matches!(self, Self::Finite(_))
    }
}

pub(crate) fn norm(group: &Group, eq: Equality, w: &GroupWord) -> Result<Element> {
    match eq {
        Equality::Backend => group.normalize(w),
        Equality::Faithful => group.tree_element(w),
    }
}

/// `(source, target, element)` on vertex indices.
type RawArrow = (usize, usize, Element);

/// Per-level data shared by all closures: images and sections of every
/// element of `A` at every vertex of `X^n`.
struct LevelData<'g> {
    group: &'g Group,
    eq: Equality,
    n: usize,
    image: Vec<Vec<usize>>,
    section: Vec<Vec<Element>>,
}

impl<'g> LevelData<'g> {
    fn new(group: &'g Group, n: usize, a: &[GroupWord], eq: Equality) -> Result<Self> {
        let sys = group.system();
        let d = sys.degree();
        let count = d.pow(n as u32);
        let mut image = Vec::with_capacity(a.len());
        let mut section = Vec::with_capacity(a.len());
        for w in a {
            let rows = par::map_range(count, |i| -> Result<(usize, Element)> {
                let v = decode_vertex(d, n, i);
                let u = encode_vertex(d, &sys.act_word(w, &v)?);
                Ok((u, norm(group, eq, &sys.section_word(w, &v)?)?))
            });
            let mut im = Vec::with_capacity(count);
            let mut sec = Vec::with_capacity(count);
            for r in rows {
                let (u, s) = r?;
                im.push(u);
                sec.push(s);
            }
            image.push(im);
            section.push(sec);
        }
        Ok(Self { group, eq, n, image, section })
    }

    fn close(&self, part: &[usize], cap: usize, materialize: bool) -> Result<Option<(usize, Vec<RawArrow>)>> {
        let inside: HashSet<usize> = part.iter().copied().collect();
        let mut gens: Vec<RawArrow> = Vec::new();
        for (g, im) in self.image.iter().enumerate() {
            for &v in part {
                if inside.contains(&im[v]) {
                    gens.push((v, im[v], self.section[g][v].clone()));
                }
            }
        }
        Ok(match close_groupoid(self.group, self.eq, part, &gens, cap, materialize)? {
            GroupoidOutcome::Finite { arrows, list } => Some((arrows, list)),
            _ => None,
        })
    }

    fn to_arrows(&self, raw: Vec<RawArrow>) -> Vec<Arrow> {
        let d = self.group.system().degree();
        raw.into_iter()
            .map(|(s, t, elem)| Arrow { src: decode_vertex(d, self.n, s), dst: decode_vertex(d, self.n, t), elem })
            .collect()
    }
}

/// Result of closing a groupoid given by generating arrows.
#[derive(Debug, Clone)]
pub(crate) enum GroupoidOutcome {
    /// `arrows` counts all arrows; `list` is filled only when materialized.
    Finite {
        arrows: usize,
        list: Vec<RawArrow>,
    },
    /// A loop at `vertex` whose element has infinite order.
    InfiniteLoop {
        vertex: usize,
        element: GroupWord,
    },
    CapExceeded,
}

/// Closure of the groupoid on `objects` generated by the arrows `gens`
/// (`(src, dst, elem)`, inverses added here). Each connected component `C`
/// with base `b` contributes `|C|^2 * |Iso(b)|` arrows, where the isotropy
/// group is generated by the Schreier elements `P_t^-1 g P_s`.
pub(crate) fn close_groupoid(
    group: &Group,
    eq: Equality,
    objects: &[usize],
    gens: &[(usize, usize, Element)],
    cap: usize,
    materialize: bool,
) -> Result<GroupoidOutcome> {
    let mut out: HashMap<usize, Vec<(usize, Element)>> = HashMap::new();
    let mut seen: HashSet<(usize, usize, Element)> = HashSet::new();
    for (s, t, e) in gens {
        let inv = norm(group, eq, &e.word().inverse())?;
        for (s, t, e) in [(*s, *t, e.clone()), (*t, *s, inv)] {
            if seen.insert((s, t, e.clone())) {
                out.entry(s).or_default().push((t, e));
            }
        }
    }
    let identity = norm(group, eq, &GroupWord::empty())?;
    let mut path: HashMap<usize, Element> = HashMap::new();
    let mut total = 0usize;
    let mut list = Vec::new();
    for &base in objects {
        if path.contains_key(&base) {
            continue;
        }
        path.insert(base, identity.clone());
        let mut comp = vec![base];
        let mut i = 0;
        while i < comp.len() {
            let s = comp[i];
            let ps = path[&s].clone();
            for (t, g) in out.get(&s).into_iter().flatten() {
                if !path.contains_key(t) {
                    path.insert(*t, norm(group, eq, &g.word().mul(ps.word()))?);
                    comp.push(*t);
                }
            }
            i += 1;
        }
        let mut iso_gens: Vec<Element> = Vec::new();
        for &s in &comp {
            for (t, g) in out.get(&s).into_iter().flatten() {
                let w = path[t].word().inverse().mul(g.word()).mul(path[&s].word());
                let h = norm(group, eq, &w)?;
                if h != identity && !iso_gens.contains(&h) {
                    iso_gens.push(h);
                }
            }
        }
        let c2 = comp.len() * comp.len();
        if total + c2 > cap {
            return Ok(GroupoidOutcome::CapExceeded);
        }
        if let Some(element) = infinite_element(group, &iso_gens)? {
            return Ok(GroupoidOutcome::InfiniteLoop { vertex: base, element });
        }
        let Some(iso) = enumerate(group, eq, &iso_gens, (cap - total) / c2)? else {
            return Ok(GroupoidOutcome::CapExceeded);
        };
        total += c2 * iso.len();
        if materialize {
            for &s in &comp {
                let ps_inv = path[&s].word().inverse();
                for &t in &comp {
                    for h in &iso {
                        let w = path[&t].word().mul(h.word()).mul(&ps_inv);
                        list.push((s, t, norm(group, eq, &w)?));
                    }
                }
            }
        }
    }
    Ok(GroupoidOutcome::Finite { arrows: total, list })
}

/// An isotropy element of certified infinite order among the generators and
/// their pairwise products, if any.
fn infinite_element(group: &Group, gens: &[Element]) -> Result<Option<GroupWord>> {
    let mut cands: Vec<GroupWord> = gens.iter().map(|g| g.word().clone()).collect();
    if gens.len() <= 8 {
        for a in gens {
            for b in gens {
                cands.push(a.word().mul(b.word()));
            }
        }
    }
    let opts = OrderOptions { max_elements: 2_000, ..Default::default() };
    let orders = par::map(&cands, |w| order(group, w, opts));
    for (w, o) in cands.into_iter().zip(orders) {
        if o? == Order::Infinite {
            return Ok(Some(w));
        }
    }
    Ok(None)
}

/// Breadth-first enumeration of `<gens>`, or `None` past `cap` elements.
fn enumerate(group: &Group, eq: Equality, gens: &[Element], cap: usize) -> Result<Option<Vec<Element>>> {
    let identity = norm(group, eq, &GroupWord::empty())?;
    let mut steps: Vec<GroupWord> = Vec::new();
    for g in gens {
        steps.push(g.word().clone());
        steps.push(g.word().inverse());
    }
    let mut seen: IndexSet<Element> = IndexSet::new();
    seen.insert(identity);
    let mut i = 0;
    while i < seen.len() {
        let base = seen[i].word().clone();
        for s in &steps {
            let e = norm(group, eq, &base.mul(s))?;
            if !seen.contains(&e) {
                if seen.len() >= cap {
                    return Ok(None);
                }
                seen.insert(e);
            }
        }
        i += 1;
    }
    Ok(Some(seen.into_iter().collect()))
}

fn vertex_ids(sys: &RecursionSystem, n: usize, part: &[Vertex]) -> Result<Vec<usize>> {
    let d = sys.degree();
    part.iter()
        .map(|v| {
            if v.len() != n || v.iter().any(|&x| x >= d) {
                Err(Error::Malformed(format!("`{}` is not a vertex of level {n}", sys.alphabet().format_vertex(v))))
            } else {
                Ok(encode_vertex(d, v))
            }
        })
        .collect()
}

/// The groupoid generated on one part; the part's words must share one length.
pub fn groupoid_closure(
    group: &Group,
    part: &[Vertex],
    a: &[GroupWord],
    arrow_cap: usize,
    eq: Equality,
) -> Result<Closure> {
    let Some(n) = part.first().map(Vec::len) else {
        return Ok(Closure::Finite(Vec::new()));
    };
    let ids = vertex_ids(group.system(), n, part)?;
    let data = LevelData::new(group, n, a, eq)?;
    Ok(match data.close(&ids, arrow_cap, true)? {
        Some((_, raw)) => Closure::Finite(data.to_arrows(raw)),
        None => Closure::CapExceeded { arrows: arrow_cap },
    })
}

/// Identity, inverse and composition closure of an arrow set.
pub fn is_groupoid(group: &Group, arrows: &[Arrow], eq: Equality) -> Result<bool> {
    let set: HashSet<&Arrow> = arrows.iter().collect();
    let mut by_src: HashMap<&Vertex, Vec<&Arrow>> = HashMap::new();
    for a in arrows {
        by_src.entry(&a.src).or_default().push(a);
    }
    let id = norm(group, eq, &GroupWord::empty())?;
    for a in arrows {
        for v in [&a.src, &a.dst] {
            if !set.contains(&Arrow { src: v.clone(), dst: v.clone(), elem: id.clone() }) {
                return Ok(false);
            }
        }
        let inv = Arrow { src: a.dst.clone(), dst: a.src.clone(), elem: norm(group, eq, &a.elem.word().inverse())? };
        if !set.contains(&inv) {
            return Ok(false);
        }
        for b in by_src.get(&a.dst).into_iter().flatten() {
            let c = Arrow {
                src: a.src.clone(),
                dst: b.dst.clone(),
                elem: norm(group, eq, &b.elem.word().mul(a.elem.word()))?,
            };
            if !set.contains(&c) {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

#[derive(Debug, Clone)]
pub struct PartitionCertificate {
    pub level: usize,
    pub parts: Vec<Vec<Vertex>>,
    pub generating_set: Vec<GroupWord>,
    /// Name of the generating set, e.g. `nucleus`.
    pub generating_set_kind: String,
    pub equality: Equality,
    pub closures: Vec<Vec<Arrow>>,
    pub d: usize,
}

impl PartitionCertificate {
    pub fn arrows_per_part(&self) -> Vec<usize> {
        self.closures.iter().map(Vec::len).collect()
    }
}

#[derive(Debug, Clone)]
pub enum Verdict {
    Certified(PartitionCertificate),
    NotCertified { part: Option<usize>, reason: String },
}

impl Verdict {
    pub fn certificate(&self) -> Option<&PartitionCertificate> {
        match self {
            Self::Certified(c) => Some(c),
            Self::NotCertified { .. } => None,
        }
    }
}

/// The set `A` used for certificates: words plus a name for reports.
#[derive(Debug, Clone)]
pub struct GeneratingSet {
    pub words: Vec<GroupWord>,
    pub kind: String,
}

impl GeneratingSet {
    pub fn nucleus(n: &Nucleus) -> Self {
        Self { words: n.words().to_vec(), kind: "nucleus".into() }
    }

    pub fn custom(words: Vec<GroupWord>) -> Self {
        Self { words, kind: "custom".into() }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct VerifyOptions {
    pub arrow_cap: usize,
    pub equality: Equality,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        Self { arrow_cap: DEFAULT_ARROW_CAP, equality: Equality::Backend }
    }
}

pub fn verify_partition(
    group: &Group,
    level: usize,
    parts: &[Vec<Vertex>],
    a: &GeneratingSet,
    opts: VerifyOptions,
) -> Result<Verdict> {
    let sys = group.system();
    let total = sys.degree().pow(level as u32);
    let mut owner = vec![usize::MAX; total];
    let mut ids = Vec::with_capacity(parts.len());
    for (p, part) in parts.iter().enumerate() {
        let pid = vertex_ids(sys, level, part)?;
        for &v in &pid {
            if owner[v] != usize::MAX {
                return Ok(Verdict::NotCertified {
                    part: Some(p),
                    reason: format!("vertex index {v} lies in two parts"),
                });
            }
            owner[v] = p;
        }
        ids.push(pid);
    }
    if owner.contains(&usize::MAX) {
        return Ok(Verdict::NotCertified { part: None, reason: "parts do not cover the level".into() });
    }
    if parts.is_empty() {
        return Ok(Verdict::NotCertified { part: None, reason: "no parts".into() });
    }
    let data = LevelData::new(group, level, &a.words, opts.equality)?;
    let results = par::map(&ids, |p| data.close(p, opts.arrow_cap, true));
    let mut closures = Vec::with_capacity(parts.len());
    for (p, r) in results.into_iter().enumerate() {
        match r? {
            Some((_, raw)) => closures.push(data.to_arrows(raw)),
            None => {
                return Ok(Verdict::NotCertified {
                    part: Some(p),
                    reason: format!("groupoid closure exceeded {} arrows", opts.arrow_cap),
                })
            }
        }
    }
    Ok(Verdict::Certified(PartitionCertificate {
        level,
        parts: parts.to_vec(),
        generating_set: a.words.clone(),
        generating_set_kind: a.kind.clone(),
        equality: opts.equality,
        closures,
        d: parts.len() - 1,
    }))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Strategy {
    Exhaustive,
    Greedy,
    Random,
}

impl std::str::FromStr for Strategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "exhaustive" => Ok(Self::Exhaustive),
            "greedy" => Ok(Self::Greedy),
            "random" => Ok(Self::Random),
            _ => Err(Error::Malformed(format!("unknown strategy `{s}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct SearchOptions {
    pub strategy: Strategy,
    /// Exhaustive: `(d+1)^(|X|^n)` must not exceed this. Random: restarts.
    pub budget: u64,
    pub seed: u64,
    pub verify: VerifyOptions,
}

impl Default for SearchOptions {
    fn default() -> Self {
        Self { strategy: Strategy::Exhaustive, budget: 1 << 20, seed: 0, verify: VerifyOptions::default() }
    }
}

#[derive(Debug, Clone)]
pub enum SearchOutcome {
    Certified(PartitionCertificate),
    /// Not a lower bound: another level may still certify.
    NotFound {
        log: Vec<String>,
    },
}

impl SearchOutcome {
    pub fn certificate(&self) -> Option<&PartitionCertificate> {
        match self {
            Self::Certified(c) => Some(c),
            Self::NotFound { .. } => None,
        }
    }
}

/// Memoized finiteness of part closures; finiteness passes to subsets.
struct Oracle<'a, 'g> {
    data: &'a LevelData<'g>,
    cap: usize,
    memo: DashMap<Vec<usize>, bool>,
}

impl Oracle<'_, '_> {
    fn finite(&self, part: &[usize]) -> Result<bool> {
        let mut key = part.to_vec();
        key.sort_unstable();
        if let Some(v) = self.memo.get(&key) {
            return Ok(*v);
        }
        let ok = self.data.close(&key, self.cap, false)?.is_some();
        self.memo.insert(key, ok);
        Ok(ok)
    }
}

fn parts_of(labels: &[usize], k: usize) -> Vec<Vec<usize>> {
    let mut parts = vec![Vec::new(); k];
    for (v, &l) in labels.iter().enumerate() {
        parts[l].push(v);
    }
    parts.retain(|p| !p.is_empty());
    parts
}

fn to_vertices(sys: &RecursionSystem, n: usize, parts: &[Vec<usize>]) -> Vec<Vec<Vertex>> {
    let d = sys.degree();
    parts.iter().map(|p| p.iter().map(|&v| decode_vertex(d, n, v)).collect()).collect()
}

/// Candidate labelings in lexicographic order: restricted growth strings
/// (vertex 0 in part 0) avoiding pairs whose closure is already infinite.
fn restricted_growth(total: usize, k: usize, conflict: &[Vec<bool>], limit: usize) -> Vec<Vec<usize>> {
    fn go(
        labels: &mut Vec<usize>,
        used: usize,
        total: usize,
        k: usize,
        conflict: &[Vec<bool>],
        out: &mut Vec<Vec<usize>>,
        limit: usize,
    ) {
        if out.len() >= limit {
            return;
        }
        let v = labels.len();
        if v == total {
            out.push(labels.clone());
            return;
        }
        for l in 0..(used + 1).min(k) {
            if (0..v).any(|u| labels[u] == l && conflict[u][v]) {
                continue;
            }
            labels.push(l);
            go(labels, used.max(l + 1), total, k, conflict, out, limit);
            labels.pop();
        }
    }
    let mut out = Vec::new();
    go(&mut Vec::with_capacity(total), 0, total, k, conflict, &mut out, limit);
    out
}

fn first_fit(oracle: &Oracle, order: &[usize], k: usize) -> Result<Option<Vec<Vec<usize>>>> {
    let mut parts: Vec<Vec<usize>> = Vec::new();
    for &v in order {
        let mut placed = false;
        for p in parts.iter_mut() {
            p.push(v);
            if oracle.finite(p)? {
                placed = true;
                break;
            }
            p.pop();
        }
        if !placed {
            if parts.len() == k || !oracle.finite(&[v])? {
                return Ok(None);
            }
            parts.push(vec![v]);
        }
    }
    Ok(Some(parts))
}

pub fn search_partition(
    group: &Group,
    n: usize,
    d_target: usize,
    a: &GeneratingSet,
    opts: &SearchOptions,
) -> Result<SearchOutcome> {
    let sys = group.system();
    let total = sys.degree().pow(n as u32);
    let k = d_target + 1;
    let data = LevelData::new(group, n, &a.words, opts.verify.equality)?;
    let oracle = Oracle { data: &data, cap: opts.verify.arrow_cap, memo: DashMap::new() };
    let mut log = Vec::new();

    let singles = par::map_range(total, |v| oracle.finite(&[v]));
    for (v, ok) in singles.into_iter().enumerate() {
        if !ok? {
            log.push(format!(
                "the groupoid on the single vertex {} is not finite within the cap",
                sys.alphabet().format_vertex(&decode_vertex(sys.degree(), n, v))
            ));
            return Ok(SearchOutcome::NotFound { log });
        }
    }
    let pairs: Vec<(usize, usize)> = (0..total).flat_map(|u| (u + 1..total).map(move |v| (u, v))).collect();
    let pair_ok = par::map(&pairs, |&(u, v)| oracle.finite(&[u, v]));
    let mut conflict = vec![vec![false; total]; total];
    let mut degree = vec![0usize; total];
    for (&(u, v), ok) in pairs.iter().zip(pair_ok) {
        if !ok? {
            conflict[u][v] = true;
            conflict[v][u] = true;
            degree[u] += 1;
            degree[v] += 1;
        }
    }
    log.push(format!("{} conflicting vertex pairs", degree.iter().sum::<usize>() / 2));

    let found: Option<Vec<Vec<usize>>> = match opts.strategy {
        Strategy::Exhaustive => {
            let space = (k as f64).powf(total as f64);
            if space > opts.budget as f64 {
                log.push(format!("exhaustive search space {k}^{total} exceeds the budget {}", opts.budget));
                None
            } else {
                let cands = restricted_growth(total, k, &conflict, opts.budget as usize);
                log.push(format!("{} candidate partitions after pair pruning", cands.len()));
                let mut hit = None;
                for chunk in cands.chunks(256) {
                    let ok = par::map(chunk, |labels| -> Result<bool> {
                        for p in parts_of(labels, k) {
                            if !oracle.finite(&p)? {
                                return Ok(false);
                            }
                        }
                        Ok(true)
                    });
                    let mut first = None;
                    for (labels, r) in chunk.iter().zip(ok) {
                        if r? && first.is_none() {
                            first = Some(parts_of(labels, k));
                        }
                    }
                    if first.is_some() {
                        hit = first;
                        break;
                    }
                }
                hit
            }
        }
        Strategy::Greedy => {
            let mut order: Vec<usize> = (0..total).collect();
            order.sort_by_key(|&v| (std::cmp::Reverse(degree[v]), v));
            first_fit(&oracle, &order, k)?
        }
        Strategy::Random => {
            let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
            let restarts = opts.budget.clamp(1, 256) as usize;
            let orders: Vec<Vec<usize>> = (0..restarts)
                .map(|_| {
                    let mut o: Vec<usize> = (0..total).collect();
                    o.shuffle(&mut rng);
                    o
                })
                .collect();
            let mut hit = None;
            for o in orders {
                if let Some(p) = first_fit(&oracle, &o, k)? {
                    hit = Some(p);
                    break;
                }
            }
            if hit.is_none() {
                log.push(format!("{restarts} randomized restarts failed"));
            }
            hit
        }
    };
    let Some(mut parts) = found else {
        log.push(format!("no partition of level {n} into at most {k} parts certified"));
        return Ok(SearchOutcome::NotFound { log });
    };
    for p in parts.iter_mut() {
        p.sort_unstable();
    }
    parts.sort();
    // re-verify from scratch before returning
    let fresh = group.fresh()?;
    match verify_partition(&fresh, n, &to_vertices(sys, n, &parts), a, opts.verify)? {
        Verdict::Certified(c) => Ok(SearchOutcome::Certified(c)),
        Verdict::NotCertified { reason, .. } => {
            log.push(format!("candidate failed re-verification: {reason}"));
            Ok(SearchOutcome::NotFound { log })
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Induction {
    /// `v` joins the part of its first `n` letters.
    #[default]
    Prefix,
    /// `v` joins the part of its last `n` letters.
    Suffix,
}

/// The partition of `X^(n+1)` induced by a partition of `X^n`.
pub fn induce_partition(d: usize, parts: &[Vec<Vertex>], how: Induction) -> Vec<Vec<Vertex>> {
    parts
        .iter()
        .map(|part| {
            let mut out = Vec::with_capacity(part.len() * d);
            for v in part {
                for x in 0..d {
                    let mut w = v.clone();
                    match how {
                        Induction::Prefix => w.push(x),
                        Induction::Suffix => w.insert(0, x),
                    }
                    out.push(w);
                }
            }
            out.sort();
            out
        })
        .collect()
}

#[derive(Debug, Clone, Serialize)]
pub struct ReportRow {
    pub level: usize,
    pub d: usize,
    pub certified: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct DimensionReport {
    pub rows: Vec<ReportRow>,
    /// `(level, least certified d)`.
    pub least_per_level: Vec<(usize, Option<usize>)>,
    pub best_bound: Option<usize>,
}

/// Smallest certified `d` per level; levels use exhaustive search when it
/// fits the budget and greedy first-fit otherwise.
pub fn dimension_report(
    group: &Group,
    levels: impl IntoIterator<Item = usize>,
    ds: impl IntoIterator<Item = usize> + Clone,
    a: &GeneratingSet,
    opts: &SearchOptions,
) -> Result<DimensionReport> {
    let mut rows = Vec::new();
    let mut least = Vec::new();
    for n in levels {
        let total = group.system().degree().pow(n as u32);
        let mut best = None;
        for d in ds.clone() {
            let mut o = *opts;
            if o.strategy == Strategy::Exhaustive && ((d + 1) as f64).powf(total as f64) > o.budget as f64 {
                o.strategy = Strategy::Greedy;
            }
            let certified = search_partition(group, n, d, a, &o)?.certificate().is_some();
            rows.push(ReportRow { level: n, d, certified });
            if certified {
                best = Some(d);
                break;
            }
        }
        least.push((n, best));
    }
    let best_bound = least.iter().filter_map(|&(_, d)| d).min();
    Ok(DimensionReport { rows, least_per_level: least, best_bound })
}

/// sha256 of the canonical text, hex encoded.
pub fn system_hash(sys: &RecursionSystem) -> String {
    hex::encode(Sha256::digest(crate::dsl::serialize(sys).as_bytes()))
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq, Eq)]
pub struct CertificateJson {
    #[serde(rename = "system-hash")]
    pub system_hash: String,
    pub level: usize,
    pub parts: Vec<Vec<String>>,
    #[serde(rename = "generating-set")]
    pub generating_set: Vec<String>,
    #[serde(rename = "generating-set-kind")]
    pub generating_set_kind: String,
    pub equality: Equality,
    #[serde(rename = "arrows-per-part")]
    pub arrows_per_part: Vec<usize>,
    pub d: usize,
    /// Canonical text of the system, so the file verifies on its own.
    pub system: String,
}

pub fn certificate_json(sys: &RecursionSystem, cert: &PartitionCertificate) -> CertificateJson {
    CertificateJson {
        system_hash: system_hash(sys),
        level: cert.level,
        parts: cert.parts.iter().map(|p| p.iter().map(|v| sys.alphabet().format_vertex(v)).collect()).collect(),
        generating_set: cert.generating_set.iter().map(|w| sys.format_word(w)).collect(),
        generating_set_kind: cert.generating_set_kind.clone(),
        equality: cert.equality,
        arrows_per_part: cert.arrows_per_part(),
        d: cert.d,
        system: crate::dsl::serialize(sys),
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct CertificateCheck {
    pub certified: bool,
    pub problems: Vec<String>,
}

/// Rebuilds the system from the certificate and recomputes every closure.
pub fn verify_certificate(cert: &CertificateJson, arrow_cap: usize) -> Result<CertificateCheck> {
    let sys = crate::dsl::parse_str(&cert.system)?;
    let mut problems = Vec::new();
    if system_hash(&sys) != cert.system_hash {
        problems.push("system-hash does not match the embedded system".to_string());
    }
    if cert.parts.len() != cert.d + 1 {
        problems.push(format!("d = {} but there are {} parts", cert.d, cert.parts.len()));
    }
    let parts = cert
        .parts
        .iter()
        .map(|p| {
            p.iter()
                .map(|s| sys.alphabet().parse_vertex(s).ok_or_else(|| Error::Malformed(format!("bad vertex `{s}`"))))
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    let words = cert.generating_set.iter().map(|w| sys.parse_word(w)).collect::<Result<Vec<_>>>()?;
    let group = Group::new(sys)?;
    let a = GeneratingSet { words, kind: cert.generating_set_kind.clone() };
    let opts = VerifyOptions { arrow_cap, equality: cert.equality };
    match verify_partition(&group, cert.level, &parts, &a, opts)? {
        Verdict::Certified(c) => {
            if c.arrows_per_part() != cert.arrows_per_part {
                problems.push(format!(
                    "arrow counts {:?} differ from recorded {:?}",
                    c.arrows_per_part(),
                    cert.arrows_per_part
                ));
            }
        }
        Verdict::NotCertified { part, reason } => {
            problems.push(format!("part {}: {reason}", part.map_or("-".to_string(), |p| p.to_string())));
        }
    }
    Ok(CertificateCheck { certified: problems.is_empty(), problems })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::contraction::{compute_nucleus, NucleusOptions};
    use crate::dsl::parse_str;

    fn setup(text: &str) -> (Group, GeneratingSet) {
        let g = Group::new(parse_str(text).unwrap()).unwrap();
        let n = compute_nucleus(&g, &NucleusOptions::default()).unwrap();
        let a = GeneratingSet::nucleus(n.nucleus().unwrap());
        (g, a)
    }

    fn words(sys: &RecursionSystem, list: &[&str]) -> Vec<Vertex> {
        list.iter().map(|s| sys.alphabet().parse_vertex(s).unwrap()).collect()
    }

    #[test]
    fn hanoi_partition_certifies() {
        let (g, a) = setup(crate::corpus::HANOI);
        let sys = g.system();
        let diag = words(sys, &["00", "11", "22"]);
        let rest = words(sys, &["01", "02", "10", "12", "20", "21"]);
        let v = verify_partition(&g, 2, &[diag, rest.clone()], &a, VerifyOptions::default()).unwrap();
        let cert = v.certificate().expect("certified");
        assert_eq!(cert.d, 1);
        let Closure::Finite(arrows) = groupoid_closure(&g, &rest, &a.words, 1000, Equality::Backend).unwrap() else {
            panic!()
        };
        assert!(arrows.iter().all(|x| x.elem.word().is_empty()));
        assert!(is_groupoid(&g, &arrows, Equality::Backend).unwrap());
    }

    #[test]
    fn empty_part_and_adding_machine() {
        let (g, _) = setup(crate::corpus::ADDING_MACHINE);
        assert!(
            matches!(groupoid_closure(&g, &[], &[], 10, Equality::Backend).unwrap(), Closure::Finite(v) if v.is_empty())
        );
        let a = vec![GroupWord::gen(0)];
        let c = groupoid_closure(&g, &[vec![0], vec![1]], &a, 200, Equality::Backend).unwrap();
        assert!(matches!(c, Closure::CapExceeded { .. }));
        let nuc = setup(crate::corpus::ADDING_MACHINE).1;
        let out = search_partition(&g, 1, 0, &nuc, &SearchOptions::default()).unwrap();
        assert!(out.certificate().is_none());
    }

    #[test]
    fn singletons_with_identity() {
        let (g, _) = setup(crate::corpus::BASILICA);
        let parts: Vec<Vec<Vertex>> = (0..4).map(|i| vec![decode_vertex(2, 2, i)]).collect();
        let a = GeneratingSet::custom(vec![GroupWord::empty()]);
        assert!(verify_partition(&g, 2, &parts, &a, VerifyOptions::default()).unwrap().certificate().is_some());
    }

    #[test]
    fn strategies_agree_on_hanoi() {
        let (g, a) = setup(crate::corpus::HANOI);
        for strategy in [Strategy::Exhaustive, Strategy::Greedy, Strategy::Random] {
            let opts = SearchOptions { strategy, ..Default::default() };
            let out = search_partition(&g, 2, 1, &a, &opts).unwrap();
            assert!(out.certificate().is_some(), "{strategy:?}");
        }
    }

    #[test]
    fn certificate_round_trip() {
        let (g, a) = setup(crate::corpus::HANOI);
        let out = search_partition(&g, 2, 1, &a, &SearchOptions::default()).unwrap();
        let json = certificate_json(g.system(), out.certificate().unwrap());
        let text = serde_json::to_string(&json).unwrap();
        let back: CertificateJson = serde_json::from_str(&text).unwrap();
        assert!(verify_certificate(&back, DEFAULT_ARROW_CAP).unwrap().certified);
        let mut forged = back.clone();
        forged.parts = vec![forged.parts.concat()];
        forged.d = 0;
        assert!(!verify_certificate(&forged, DEFAULT_ARROW_CAP).unwrap().certified);
    }

    #[test]
    fn induced_partitions() {
        let parts = vec![vec![vec![0]], vec![vec![1]]];
        let pre = induce_partition(2, &parts, Induction::Prefix);
        assert_eq!(pre[0], vec![vec![0, 0], vec![0, 1]]);
        let suf = induce_partition(2, &parts, Induction::Suffix);
        assert_eq!(suf[0], vec![vec![0, 0], vec![1, 0]]);
    }
}
