//! Action on the levels `X^n`: Schreier graphs, tile graphs, transitivity
//! and self-replication.
//!
//! Vertices are words of length `n` listed lexicographically, first letter at
//! the root of the tree. Tile graphs use this action directly, so the word
//! `x_1 x_2 ... x_n` names the tile indexed by the reversed left-infinite
//! sequence `x_n ... x_2 x_1`.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::str::FromStr;

use indexmap::IndexSet;
use petgraph::unionfind::UnionFind;
use serde::{Deserialize, Serialize};

use crate::backend::{Element, Group};
use crate::contraction::Nucleus;
use crate::error::{Error, Result};
use crate::par;
use crate::recursion::{decode_vertex, encode_vertex, GroupWord, RecursionSystem};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Flavor {
    Schreier,
    Tile,
}

impl Flavor {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::Schreier => "schreier",
            Self::Tile => "tile",
        }
    }
}

/// A labelled graph on `X^n`. Schreier graphs are directed with one edge per
/// generator and vertex; tile graphs are simple and undirected, stored with
/// `src < dst`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LevelGraph {
    pub level: usize,
    pub flavor: Flavor,
    pub vertices: Vec<String>,
    pub edges: Vec<(usize, usize, String)>,
}

impl LevelGraph {
    fn new(level: usize, flavor: Flavor, vertices: Vec<String>, mut edges: Vec<(usize, usize, String)>) -> Self {
        edges.sort();
        Self { level, flavor, vertices, edges }
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn degrees(&self) -> Vec<usize> {
        let mut deg = vec![0; self.vertices.len()];
        for &(u, v, _) in &self.edges {
            deg[u] += 1;
            deg[v] += 1;
        }
        deg
    }

    /// Connected components of the underlying undirected graph.
    pub fn components(&self) -> usize {
        let mut uf = UnionFind::new(self.vertices.len());
        for &(u, v, _) in &self.edges {
            uf.union(u, v);
        }
        let mut labels = uf.into_labeling();
        labels.sort_unstable();
        labels.dedup();
        labels.len()
    }

    pub fn is_connected(&self) -> bool {
        self.components() <= 1
    }
}

fn level_vertices(sys: &RecursionSystem, n: usize) -> Vec<String> {
    let d = sys.degree();
    (0..d.pow(n as u32)).map(|i| sys.alphabet().format_vertex(&decode_vertex(d, n, i))).collect()
}

/// Permutation of `X^n` (as vertex indices) induced by a word.
pub fn level_action(sys: &RecursionSystem, w: &GroupWord, n: usize) -> Vec<usize> {
    let d = sys.degree();
    par::map_range(d.pow(n as u32), |i| {
        let v = decode_vertex(d, n, i);
        encode_vertex(d, &sys.act_word(w, &v).expect("word over declared generators"))
    })
}

pub fn schreier(sys: &RecursionSystem, n: usize) -> LevelGraph {
    let mut edges = Vec::new();
    for (g, def) in sys.generators().iter().enumerate() {
        let image = level_action(sys, &GroupWord::gen(g), n);
        edges.extend(image.into_iter().enumerate().map(|(v, u)| (v, u, def.name.clone())));
    }
    LevelGraph::new(n, Flavor::Schreier, level_vertices(sys, n), edges)
}

/// `v -- u` whenever a non-identity nucleus element maps `v` to `u != v`;
/// the label is the first such element in nucleus order.
pub fn tile_graph(group: &Group, nucleus: &Nucleus, n: usize) -> LevelGraph {
    let sys = group.system();
    let mut best: HashMap<(usize, usize), usize> = HashMap::new();
    for (i, w) in nucleus.words().iter().enumerate() {
        if w.is_empty() {
            continue;
        }
        for (v, u) in level_action(sys, w, n).into_iter().enumerate() {
            if u != v {
                best.entry((v.min(u), v.max(u))).or_insert(i);
            }
        }
    }
    let names = nucleus.format(sys);
    let edges = best.into_iter().map(|((v, u), i)| (v, u, names[i].clone())).collect();
    LevelGraph::new(n, Flavor::Tile, level_vertices(sys, n), edges)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LevelReport {
    pub level: usize,
    pub orbits: usize,
    pub transitive: bool,
    /// Present when a nucleus was supplied.
    pub tile_connected: Option<bool>,
}

/// Orbit counts for levels `0..=n_max`.
pub fn level_transitive(group: &Group, nucleus: Option<&Nucleus>, n_max: usize) -> Vec<LevelReport> {
    (0..=n_max)
        .map(|n| {
            let orbits = schreier(group.system(), n).components();
            LevelReport {
                level: n,
                orbits,
                transitive: orbits == 1,
                tile_connected: nucleus.map(|nu| tile_graph(group, nu, n).is_connected()),
            }
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub enum SelfReplication {
    /// For each generator, a word `g` fixing the first letter `x` with `g|_x`
    /// equal to that generator.
    Yes {
        witnesses: Vec<(String, String)>,
    },
    /// The first level splits into more than one orbit.
    Intransitive {
        orbits: usize,
    },
    /// The section map on the stabilizer has a finite image missing a generator.
    NotSurjective {
        image_order: usize,
        missing: String,
    },
    Unknown,
}

impl SelfReplication {
    pub fn is_yes(&self) -> bool {
        matches!(self, Self::Yes { .. })
    }

    pub fn is_no(&self) -> bool {
        matches!(self, Self::Intransitive { .. } | Self::NotSurjective { .. })
    }
}

/// Searches products of at most `length_cap` Schreier generators of the
/// stabilizer of the first letter. Equality is taken in the faithful quotient.
pub fn self_replicating_check(group: &Group, length_cap: usize) -> Result<SelfReplication> {
    let sys = group.system();
    let d = sys.degree();
    let orbits = schreier(sys, 1).components();
    if orbits != 1 {
        return Ok(SelfReplication::Intransitive { orbits });
    }
    let ng = sys.generators().len();
    let steps: Vec<GroupWord> = (0..ng).map(GroupWord::gen).chain((0..ng).map(GroupWord::gen_inv)).collect();
    // transversal t[y] with t[y](0) = y
    let mut t: Vec<Option<GroupWord>> = vec![None; d];
    t[0] = Some(GroupWord::empty());
    let mut queue = vec![0usize];
    while let Some(y) = queue.pop() {
        let ty = t[y].clone().expect("visited");
        for s in &steps {
            let z = sys.act_letter(s, y)?;
            if t[z].is_none() {
                t[z] = Some(s.mul(&ty));
                queue.insert(0, z);
            }
        }
    }
    let t: Vec<GroupWord> = t.into_iter().map(|w| w.expect("transitive")).collect();
    let mut gens: Vec<(GroupWord, Element)> = Vec::new();
    let mut seen_gen: IndexSet<Element> = IndexSet::new();
    for y in 0..d {
        for s in &steps {
            let z = sys.act_letter(s, y)?;
            let h = t[z].inverse().mul(s).mul(&t[y]);
            let sec = group.tree_element(&sys.section_letter(&h, 0)?)?;
            if !group.keyer().closure(sec.word())?.acts_trivially() && seen_gen.insert(sec.clone()) {
                gens.push((h, sec));
            }
        }
    }
    let targets: Vec<Element> = (0..ng).map(|g| group.tree_element(&GroupWord::gen(g))).collect::<Result<_>>()?;
    let mut found: HashMap<usize, GroupWord> = HashMap::new();
    let mut reached: IndexSet<Element> = IndexSet::new();
    let mut witness_of: Vec<GroupWord> = vec![GroupWord::empty()];
    reached.insert(group.tree_element(&GroupWord::empty())?);
    let mut frontier = vec![0usize];
    let mut complete = false;
    for _ in 0..length_cap {
        let mut next = Vec::new();
        for &i in &frontier {
            for (h, sec) in &gens {
                for (hw, sw) in [(h.clone(), sec.word().clone()), (h.inverse(), sec.word().inverse())] {
                    let img = reached[i].word().mul(&sw);
                    let e = group.tree_element(&img)?;
                    if !reached.contains(&e) {
                        reached.insert(e);
                        witness_of.push(witness_of[i].mul(&hw));
                        next.push(reached.len() - 1);
                    }
                }
            }
        }
        if next.is_empty() {
            complete = true;
            break;
        }
        frontier = next;
    }
    for (g, target) in targets.iter().enumerate() {
        if let Some(i) = reached.get_index_of(target) {
            found.insert(g, witness_of[i].clone());
        }
    }
    if found.len() == ng {
        let witnesses = (0..ng).map(|g| (sys.gen_name(g).to_string(), sys.format_word(&found[&g]))).collect();
        return Ok(SelfReplication::Yes { witnesses });
    }
    if complete {
        let missing = (0..ng).find(|g| !found.contains_key(g)).expect("some generator missing");
        return Ok(SelfReplication::NotSurjective {
            image_order: reached.len(),
            missing: sys.gen_name(missing).into(),
        });
    }
    Ok(SelfReplication::Unknown)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExportFormat {
    Dot,
    Graphml,
    Json,
}

impl FromStr for ExportFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "dot" => Ok(Self::Dot),
            "graphml" => Ok(Self::Graphml),
            "json" => Ok(Self::Json),
            other => Err(Error::UnsupportedFormat(other.to_string())),
        }
    }
}

#[derive(Serialize, Deserialize)]
struct JsonGraph {
    level: usize,
    flavor: Flavor,
    vertices: Vec<String>,
    edges: Vec<(String, String, String)>,
}

fn xml_escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

fn xml_unescape(s: &str) -> String {
    s.replace("&quot;", "\"").replace("&gt;", ">").replace("&lt;", "<").replace("&amp;", "&")
}

fn dot_quote(s: &str) -> String {
    format!("\"{}\"", s.replace('\\', "\\\\").replace('"', "\\\""))
}

pub fn export(graph: &LevelGraph, format: ExportFormat) -> String {
    let mut out = String::new();
    match format {
        ExportFormat::Dot => {
            let (kw, arrow) = match graph.flavor {
                Flavor::Schreier => ("digraph", "->"),
                Flavor::Tile => ("graph", "--"),
            };
            let _ = writeln!(out, "{kw} {}_{} {{", graph.flavor.as_str(), graph.level);
            let _ = writeln!(out, "  // vertices are words of length {}, first letter at the root", graph.level);
            for v in &graph.vertices {
                let _ = writeln!(out, "  {};", dot_quote(v));
            }
            for (u, v, label) in &graph.edges {
                let _ = writeln!(
                    out,
                    "  {} {arrow} {} [label={}];",
                    dot_quote(&graph.vertices[*u]),
                    dot_quote(&graph.vertices[*v]),
                    dot_quote(label)
                );
            }
            out.push_str("}\n");
        }
        ExportFormat::Graphml => {
            let directed = match graph.flavor {
                Flavor::Schreier => "directed",
                Flavor::Tile => "undirected",
            };
            out.push_str("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n");
            out.push_str("<graphml xmlns=\"http://graphml.graphdrawing.org/xmlns\">\n");
            out.push_str("  <key id=\"label\" for=\"edge\" attr.name=\"label\" attr.type=\"string\"/>\n");
            out.push_str("  <key id=\"level\" for=\"graph\" attr.name=\"level\" attr.type=\"int\"/>\n");
            out.push_str("  <key id=\"flavor\" for=\"graph\" attr.name=\"flavor\" attr.type=\"string\"/>\n");
            let _ = writeln!(out, "  <graph id=\"G\" edgedefault=\"{directed}\">");
            let _ = writeln!(out, "    <data key=\"level\">{}</data>", graph.level);
            let _ = writeln!(out, "    <data key=\"flavor\">{}</data>", graph.flavor.as_str());
            for v in &graph.vertices {
                let _ = writeln!(out, "    <node id=\"v{}\"/>", xml_escape(v));
            }
            for (u, v, label) in &graph.edges {
                let _ = writeln!(
                    out,
                    "    <edge source=\"v{}\" target=\"v{}\"><data key=\"label\">{}</data></edge>",
                    xml_escape(&graph.vertices[*u]),
                    xml_escape(&graph.vertices[*v]),
                    xml_escape(label)
                );
            }
            out.push_str("  </graph>\n</graphml>\n");
        }
        ExportFormat::Json => {
            let j = JsonGraph {
                level: graph.level,
                flavor: graph.flavor,
                vertices: graph.vertices.clone(),
                edges: graph
                    .edges
                    .iter()
                    .map(|(u, v, l)| (graph.vertices[*u].clone(), graph.vertices[*v].clone(), l.clone()))
                    .collect(),
            };
            out = serde_json::to_string_pretty(&j).expect("plain data serializes");
            out.push('\n');
        }
    }
    out
}

fn from_named(
    level: usize,
    flavor: Flavor,
    vertices: Vec<String>,
    edges: Vec<(String, String, String)>,
) -> Result<LevelGraph> {
    let index: HashMap<&str, usize> = vertices.iter().enumerate().map(|(i, v)| (v.as_str(), i)).collect();
    let lookup =
        |v: &str| index.get(v).copied().ok_or_else(|| Error::Malformed(format!("edge endpoint `{v}` is not a vertex")));
    let edges = edges.iter().map(|(u, v, l)| Ok((lookup(u)?, lookup(v)?, l.clone()))).collect::<Result<Vec<_>>>()?;
    Ok(LevelGraph::new(level, flavor, vertices, edges))
}

pub fn import_json(text: &str) -> Result<LevelGraph> {
    let j: JsonGraph = serde_json::from_str(text).map_err(|e| Error::Malformed(format!("graph json: {e}")))?;
    from_named(j.level, j.flavor, j.vertices, j.edges)
}

fn attr<'a>(line: &'a str, name: &str) -> Option<&'a str> {
    let pat = format!("{name}=\"");
    let start = line.find(&pat)? + pat.len();
    let end = line[start..].find('"')? + start;
    Some(&line[start..end])
}

fn data<'a>(line: &'a str, key: &str) -> Option<&'a str> {
    let pat = format!("<data key=\"{key}\">");
    let start = line.find(&pat)? + pat.len();
    let end = line[start..].find("</data>")? + start;
    Some(&line[start..end])
}

/// Reads the GraphML written by [`export`].
pub fn import_graphml(text: &str) -> Result<LevelGraph> {
    let bad = |m: &str| Error::Malformed(format!("graphml: {m}"));
    let mut level = None;
    let mut flavor = None;
    let mut vertices = Vec::new();
    let mut edges = Vec::new();
    let strip = |id: &str| id.strip_prefix('v').map(xml_unescape).ok_or_else(|| bad("node ids start with `v`"));
    for line in text.lines().map(str::trim) {
        if line.starts_with("<node ") {
            vertices.push(strip(attr(line, "id").ok_or_else(|| bad("node without id"))?)?);
        } else if line.starts_with("<edge ") {
            let s = strip(attr(line, "source").ok_or_else(|| bad("edge without source"))?)?;
            let t = strip(attr(line, "target").ok_or_else(|| bad("edge without target"))?)?;
            let l = data(line, "label").map(xml_unescape).unwrap_or_default();
            edges.push((s, t, l));
        } else if let Some(v) = data(line, "level") {
            level = Some(v.parse().map_err(|_| bad("level is not an integer"))?);
        } else if let Some(v) = data(line, "flavor") {
            flavor = Some(match v {
                "schreier" => Flavor::Schreier,
                "tile" => Flavor::Tile,
                _ => return Err(bad("unknown flavor")),
            });
        }
    }
    from_named(
        level.ok_or_else(|| bad("missing level"))?,
        flavor.ok_or_else(|| bad("missing flavor"))?,
        vertices,
        edges,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::contraction::{compute_nucleus, NucleusOptions};
    use crate::dsl::parse_str;

    fn group(text: &str) -> Group {
        Group::new(parse_str(text).unwrap()).unwrap()
    }

    #[test]
    fn level_zero() {
        let g = group(crate::corpus::HANOI);
        let s = schreier(g.system(), 0);
        assert_eq!(s.vertices, vec![""]);
        assert_eq!(s.edges.len(), 3);
        assert!(s.edges.iter().all(|&(u, v, _)| u == 0 && v == 0));
        let json = export(&s, ExportFormat::Json);
        assert!(json.contains("\"vertices\": [\n    \"\"\n  ]"), "{json}");
    }

    #[test]
    fn adding_machine_schreier_is_a_cycle() {
        let g = group(crate::corpus::ADDING_MACHINE);
        let s = schreier(g.system(), 3);
        assert_eq!(s.vertex_count(), 8);
        assert!(s.is_connected());
        // a adds one, least significant letter first
        let i = s.vertices.iter().position(|v| v == "110").unwrap();
        let (_, j, _) = s.edges.iter().find(|e| e.0 == i).unwrap();
        assert_eq!(s.vertices[*j], "001");
    }

    #[test]
    fn adding_machine_tiles_dot() {
        let g = group(crate::corpus::ADDING_MACHINE);
        let n = compute_nucleus(&g, &NucleusOptions::default()).unwrap();
        let t = tile_graph(&g, n.nucleus().unwrap(), 2);
        let dot = export(&t, ExportFormat::Dot);
        assert_eq!(dot.matches(" -- ").count(), 4);
        assert!(dot.starts_with("graph tile_2 {"));
    }

    #[test]
    fn graphml_round_trip() {
        let g = group(crate::corpus::HANOI);
        let s = schreier(g.system(), 2);
        let back = import_graphml(&export(&s, ExportFormat::Graphml)).unwrap();
        assert_eq!(back, s);
        let back = import_json(&export(&s, ExportFormat::Json)).unwrap();
        assert_eq!(back, s);
        assert!(matches!("png".parse::<ExportFormat>(), Err(Error::UnsupportedFormat(_))));
    }

    #[test]
    fn self_replication() {
        let b = group(crate::corpus::BASILICA);
        assert!(self_replicating_check(&b, 4).unwrap().is_yes());
        let trivial = group("alphabet: 0 1\ne = ()");
        assert_eq!(self_replicating_check(&trivial, 4).unwrap(), SelfReplication::Intransitive { orbits: 2 });
        let z2 = group("alphabet: 0 1\na = (0 1)");
        assert!(matches!(self_replicating_check(&z2, 4).unwrap(), SelfReplication::NotSurjective { .. }));
        let z = group(crate::corpus::Z_3TO2);
        assert!(!self_replicating_check(&z, 6).unwrap().is_yes());
    }

    #[test]
    fn transitivity_reports() {
        let b = group(crate::corpus::BASILICA);
        assert!(level_transitive(&b, None, 4).iter().all(|r| r.transitive));
        let trivial = group("alphabet: 0 1\ne = ()");
        let r = level_transitive(&trivial, None, 2);
        assert_eq!(r.iter().map(|r| r.transitive).collect::<Vec<_>>(), vec![true, false, false]);
    }
}
