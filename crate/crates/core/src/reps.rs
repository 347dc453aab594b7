//! Uniform-space descriptors, their standard representations B_X, and
//! representations of finite points by cliques.
//!
//! ```text
//! space Three
//! points a b c
//! cover 1: {a b} {b c}
//! cover 2: {a} {b} {c}
//! ```
//!
//! Interval point sets use `points interval <lo> <hi>` with blocks written
//! `{<lo>..<hi>}`, or `basis dyadic <depth>` for the dyadic interval covers.

use crate::bits::BitSet;
use crate::descriptor::brace_groups;
use crate::error::{Error, Result};
use crate::maps::Trace;
use crate::reals::{level_anticover, parse_rational, Window, Q};
use crate::space::{CoherenceOracle, Space, Token};
use crate::totality::TotalityView;
use std::collections::{HashMap, VecDeque};
use std::fmt;
use std::sync::Arc;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Points {
    Finite(Vec<String>),
    Interval(Window),
}

/// A set of points: finite indices or a closed rational interval.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Region {
    Points(BitSet),
    Interval(Q, Q),
    Empty,
}

impl Region {
    fn interval(lo: Q, hi: Q) -> Region {
        if lo <= hi {
            Region::Interval(lo, hi)
        } else {
            Region::Empty
        }
    }

    pub fn is_empty(&self) -> bool {
        match self {
            Region::Points(s) => s.is_empty(),
            Region::Interval(..) => false,
            Region::Empty => true,
        }
    }

    pub fn intersect(&self, other: &Region) -> Region {
        match (self, other) {
            (Region::Points(a), Region::Points(b)) => Region::Points(a.intersection(b)),
            (Region::Interval(a, b), Region::Interval(c, d)) => Region::interval(
                if a > c { a.clone() } else { c.clone() },
                if b < d { b.clone() } else { d.clone() },
            ),
            _ => Region::Empty,
        }
    }

    pub fn meets(&self, other: &Region) -> bool {
        !self.intersect(other).is_empty()
    }

    pub fn is_subset(&self, other: &Region) -> bool {
        match (self, other) {
            (Region::Empty, _) => true,
            (Region::Points(a), Region::Points(b)) => a.is_subset(b),
            (Region::Points(a), _) => a.is_empty(),
            (Region::Interval(a, b), Region::Interval(c, d)) => c <= a && b <= d,
            _ => false,
        }
    }

    pub fn contains_value(&self, v: &Q) -> bool {
        matches!(self, Region::Interval(a, b) if a <= v && v <= b)
    }

    fn bounds(&self) -> Option<(&Q, &Q)> {
        match self {
            Region::Interval(a, b) => Some((a, b)),
            _ => None,
        }
    }
}

impl fmt::Display for Region {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Region::Points(s) => write!(f, "{s:?}"),
            Region::Interval(a, b) => write!(f, "[{a},{b}]"),
            Region::Empty => write!(f, "∅"),
        }
    }
}

/// A point set with a countable basis, materialized up to a finite level.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct UniformSpaceDescriptor {
    pub name: String,
    pub points: Points,
    /// `covers[n-1]` is the n-th basis cover.
    pub covers: Vec<Vec<Region>>,
}

impl UniformSpaceDescriptor {
    pub fn finite(
        name: &str,
        points: &[&str],
        covers: &[&[&[&str]]],
    ) -> Result<UniformSpaceDescriptor> {
        let names: Vec<String> = points.iter().map(|s| s.to_string()).collect();
        let find = |p: &str| {
            names
                .iter()
                .position(|n| n == p)
                .ok_or_else(|| Error::Domain(format!("unknown point {p}")))
        };
        let mut cs = Vec::new();
        for c in covers {
            let mut blocks = Vec::new();
            for b in c.iter() {
                blocks.push(Region::Points(
                    b.iter().map(|p| find(p)).collect::<Result<BitSet>>()?,
                ));
            }
            cs.push(blocks);
        }
        let d = UniformSpaceDescriptor {
            name: name.to_string(),
            points: Points::Finite(names),
            covers: cs,
        };
        d.validate()?;
        Ok(d)
    }

    /// The window with the dyadic interval covers of levels 1..=depth.
    pub fn dyadic(window: Window, depth: usize) -> UniformSpaceDescriptor {
        let covers = (1..=depth as u32)
            .map(|n| {
                level_anticover(n, &window.lo, &window.hi)
                    .iter()
                    .map(|x| Region::Interval(x.lo(), x.hi()))
                    .collect()
            })
            .collect();
        UniformSpaceDescriptor {
            name: "R".into(),
            points: Points::Interval(window),
            covers,
        }
    }

    pub fn levels(&self) -> usize {
        self.covers.len()
    }

    /// Basis cover n, counted from 1.
    pub fn cover(&self, n: usize) -> &[Region] {
        &self.covers[n - 1]
    }

    pub fn all_points(&self) -> Region {
        match &self.points {
            Points::Finite(p) => Region::Points(BitSet::full(p.len())),
            Points::Interval(w) => Region::Interval(w.lo.clone(), w.hi.clone()),
        }
    }

    pub fn point_name(&self, p: usize) -> &str {
        match &self.points {
            Points::Finite(names) => &names[p],
            Points::Interval(_) => "",
        }
    }

    /// Each cover must cover the point set.
    pub fn validate(&self) -> Result<()> {
        for (i, c) in self.covers.iter().enumerate() {
            if !covers_region(c, &self.all_points()) {
                return Err(Error::Data(format!(
                    "cover {} does not cover the points",
                    i + 1
                )));
            }
        }
        Ok(())
    }

    /// Any two materialized covers have a common refinement among them.
    pub fn is_directed(&self) -> bool {
        let refines =
            |u: &[Region], v: &[Region]| u.iter().all(|a| v.iter().any(|b| a.is_subset(b)));
        let clip = |c: &[Region]| -> Vec<Region> {
            c.iter().map(|b| b.intersect(&self.all_points())).collect()
        };
        let cs: Vec<Vec<Region>> = self.covers.iter().map(|c| clip(c)).collect();
        cs.iter().all(|u| {
            cs.iter()
                .all(|v| cs.iter().any(|w| refines(w, u) && refines(w, v)))
        })
    }
}

fn covers_region(blocks: &[Region], all: &Region) -> bool {
    match all {
        Region::Points(all) => {
            blocks.iter().fold(BitSet::new(), |u, b| match b {
                Region::Points(s) => u.union(s),
                _ => u,
            }) == *all
        }
        Region::Interval(lo, hi) => {
            let mut iv: Vec<(&Q, &Q)> = blocks.iter().filter_map(Region::bounds).collect();
            iv.sort();
            let mut reach = lo.clone();
            let mut started = false;
            for (a, b) in iv {
                if *a > reach && (started || a > lo) {
                    return false;
                }
                if *b >= reach {
                    reach = b.clone();
                    started = true;
                }
            }
            started && reach >= *hi
        }
        Region::Empty => true,
    }
}

fn parse_block(text: &[String], points: &Points, line: usize) -> Result<Region> {
    match points {
        Points::Finite(names) => {
            let mut s = BitSet::new();
            for w in text {
                let i =
                    names
                        .iter()
                        .position(|n| n == w)
                        .ok_or_else(|| Error::UndeclaredToken {
                            line,
                            name: w.clone(),
                        })?;
                s.insert(i);
            }
            Ok(Region::Points(s))
        }
        Points::Interval(_) => {
            let joined = text.join("");
            let (a, b) = joined.split_once("..").ok_or_else(|| Error::Syntax {
                line,
                msg: format!("expected {{lo..hi}}, found {{{joined}}}"),
            })?;
            let (a, b) = (parse_rational(a)?, parse_rational(b)?);
            if a > b {
                return Err(Error::Syntax {
                    line,
                    msg: "empty interval block".into(),
                });
            }
            Ok(Region::Interval(a, b))
        }
    }
}

pub fn parse_uniform_file(text: &str) -> Result<UniformSpaceDescriptor> {
    let mut name = "X".to_string();
    let mut points: Option<Points> = None;
    let mut covers: Vec<Vec<Region>> = Vec::new();
    let mut dyadic: Option<usize> = None;
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let body = raw.split('#').next().unwrap().trim();
        if body.is_empty() {
            continue;
        }
        let words: Vec<&str> = body.split_whitespace().collect();
        match words[0] {
            "space" if words.len() == 2 => name = words[1].to_string(),
            "points" if words.get(1) == Some(&"interval") => {
                if words.len() != 4 {
                    return Err(Error::Syntax {
                        line,
                        msg: "expected `points interval <lo> <hi>`".into(),
                    });
                }
                points = Some(Points::Interval(Window::new(
                    parse_rational(words[2])?,
                    parse_rational(words[3])?,
                )?));
            }
            "points" => {
                let names: Vec<String> = words[1..].iter().map(|s| s.to_string()).collect();
                if names.is_empty() {
                    return Err(Error::Syntax {
                        line,
                        msg: "`points` needs at least one name".into(),
                    });
                }
                for (k, n) in names.iter().enumerate() {
                    if names[..k].contains(n) {
                        return Err(Error::DuplicateToken {
                            line,
                            name: n.clone(),
                        });
                    }
                }
                points = Some(Points::Finite(names));
            }
            "basis" if words.len() == 3 && words[1] == "dyadic" => {
                dyadic = Some(words[2].parse().map_err(|_| Error::Syntax {
                    line,
                    msg: "bad depth".into(),
                })?);
            }
            "cover" => {
                let pts = points.as_ref().ok_or(Error::Syntax {
                    line,
                    msg: "`cover` before `points`".into(),
                })?;
                let rest = body["cover".len()..].trim();
                let (num, blocks) = rest.split_once(':').ok_or(Error::Syntax {
                    line,
                    msg: "expected `cover <n>: {..}`".into(),
                })?;
                let n: usize = num.trim().parse().map_err(|_| Error::Syntax {
                    line,
                    msg: "bad cover index".into(),
                })?;
                if n != covers.len() + 1 {
                    return Err(Error::Syntax {
                        line,
                        msg: format!("expected cover {}, found {n}", covers.len() + 1),
                    });
                }
                let groups = brace_groups(blocks, line)?;
                covers.push(
                    groups
                        .iter()
                        .map(|g| parse_block(g, pts, line))
                        .collect::<Result<Vec<_>>>()?,
                );
            }
            other => {
                return Err(Error::Syntax {
                    line,
                    msg: format!("unknown directive `{other}`"),
                })
            }
        }
    }
    let points = points.ok_or(Error::Syntax {
        line: 1,
        msg: "missing `points` line".into(),
    })?;
    let d = match (dyadic, points) {
        (Some(depth), Points::Interval(w)) if covers.is_empty() => UniformSpaceDescriptor {
            name,
            ..UniformSpaceDescriptor::dyadic(w, depth)
        },
        (Some(_), _) => {
            return Err(Error::Syntax {
                line: 1,
                msg: "`basis dyadic` needs an interval and no covers".into(),
            })
        }
        (None, points) => UniformSpaceDescriptor {
            name,
            points,
            covers,
        },
    };
    d.validate()?;
    Ok(d)
}

/// Strict coherence of B_X tokens: different levels and meeting blocks.
struct BlockOracle {
    tokens: Vec<(usize, Region)>,
    /// Per level: token ids sorted by lower end, and whether upper ends are sorted too.
    by_level: Vec<(Vec<Token>, bool)>,
}

impl CoherenceOracle for BlockOracle {
    fn strictly_coherent(&self, x: Token, y: Token) -> bool {
        self.tokens[x].0 != self.tokens[y].0 && self.tokens[x].1.meets(&self.tokens[y].1)
    }

    fn neighbours(&self, x: Token) -> Vec<Token> {
        let (lx, ref bx) = self.tokens[x];
        let mut out = Vec::new();
        for (l, (ids, sorted)) in self.by_level.iter().enumerate() {
            if l == lx {
                continue;
            }
            match (bx.bounds(), sorted) {
                (Some((lo, hi)), true) => {
                    let upper = |t: &Token| self.tokens[*t].1.bounds().unwrap();
                    let start = ids.partition_point(|t| upper(t).1 < lo);
                    let end = ids.partition_point(|t| upper(t).0 <= hi);
                    out.extend(ids[start..end.max(start)].iter().copied());
                }
                _ => out.extend(ids.iter().copied().filter(|&t| bx.meets(&self.tokens[t].1))),
            }
        }
        out.sort_unstable();
        out
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Decoded {
    Point(usize),
    /// A nonempty intersection that is not a single point.
    Ambiguous(Region),
    Undefined,
}

/// The standard representation δ_X : B_X → X, materialized to a depth.
#[derive(Clone)]
pub struct StandardRep {
    desc: Arc<UniformSpaceDescriptor>,
    depth: usize,
    offsets: Vec<usize>,
    space: Arc<Space>,
    blocks: Vec<Region>,
}

/// B_X with levels 1..=depth. Depth 0 gives the empty space.
pub fn build_standard_rep(desc: &UniformSpaceDescriptor, depth: usize) -> Result<StandardRep> {
    if depth > desc.levels() {
        return Err(Error::Precondition(format!(
            "only {} covers are materialized",
            desc.levels()
        )));
    }
    let all = desc.all_points();
    let mut tokens = Vec::new();
    let mut labels = Vec::new();
    let mut offsets = vec![0];
    let mut by_level = Vec::new();
    for n in 1..=depth {
        let mut ids: Vec<Token> = Vec::new();
        for b in desc.cover(n) {
            let clipped = b.intersect(&all);
            ids.push(tokens.len());
            let shown = match (&desc.points, b) {
                (Points::Finite(names), Region::Points(s)) => {
                    format!(
                        "{{{}}}",
                        s.iter()
                            .map(|p| names[p].as_str())
                            .collect::<Vec<_>>()
                            .join(",")
                    )
                }
                _ => b.to_string(),
            };
            labels.push(format!("({n},{shown})"));
            tokens.push((n - 1, clipped));
        }
        offsets.push(tokens.len());
        by_level.push(ids);
    }
    let by_level = by_level
        .into_iter()
        .map(|mut ids: Vec<Token>| {
            let b = |t: &Token| tokens[*t].1.bounds().map(|(a, b)| (a.clone(), b.clone()));
            ids.sort_by_key(|t| b(t));
            let sorted = ids.windows(2).all(|w| match (b(&w[0]), b(&w[1])) {
                (Some((_, h0)), Some((_, h1))) => h0 <= h1,
                _ => false,
            });
            (ids, sorted)
        })
        .collect();
    let blocks: Vec<Region> = tokens.iter().map(|(_, r)| r.clone()).collect();
    let oracle = Arc::new(BlockOracle { tokens, by_level });
    let space = Space::from_oracle(&format!("B_{}", desc.name), labels, oracle);
    Ok(StandardRep {
        desc: Arc::new(desc.clone()),
        depth,
        offsets,
        space,
        blocks,
    })
}

impl StandardRep {
    pub fn space(&self) -> &Arc<Space> {
        &self.space
    }

    pub fn descriptor(&self) -> &UniformSpaceDescriptor {
        &self.desc
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    /// Token (n, U) for the i-th block of cover n.
    pub fn token(&self, n: usize, i: usize) -> Token {
        self.offsets[n - 1] + i
    }

    pub fn level_of(&self, t: Token) -> usize {
        self.offsets.partition_point(|&o| o <= t)
    }

    pub fn block_index(&self, t: Token) -> usize {
        t - self.offsets[self.level_of(t) - 1]
    }

    /// The block named by a token, clipped to the point set.
    pub fn block(&self, t: Token) -> &Region {
        &self.blocks[t]
    }

    /// {(n, U) : U ∈ 𝒰ₙ}.
    pub fn level_family(&self, n: usize) -> BitSet {
        (self.offsets[n - 1]..self.offsets[n]).collect()
    }

    /// The point in the intersection of the named blocks, if unique.
    pub fn decode(&self, a: &BitSet) -> Decoded {
        if a.is_empty() || !self.space.is_clique_unchecked(a) {
            return Decoded::Undefined;
        }
        let meet = a
            .iter()
            .fold(self.desc.all_points(), |r, t| r.intersect(&self.blocks[t]));
        match meet {
            Region::Empty => Decoded::Undefined,
            Region::Points(s) if s.is_empty() => Decoded::Undefined,
            Region::Points(s) if s.len() == 1 => Decoded::Point(s.first().unwrap()),
            r => Decoded::Ambiguous(r),
        }
    }

    /// A clique with one token per level, each the first block containing the point.
    pub fn clique_at_value(&self, v: &Q) -> Result<BitSet> {
        self.clique_through(&Region::Interval(v.clone(), v.clone()), None)
    }

    pub fn clique_at_point(&self, p: usize) -> Result<BitSet> {
        self.clique_through(&Region::Points(BitSet::singleton(p)), None)
    }

    fn clique_through(&self, p: &Region, fixed: Option<(usize, Token)>) -> Result<BitSet> {
        let mut a = BitSet::new();
        for n in 1..=self.depth {
            if let Some((m, t)) = fixed {
                if m == n {
                    a.insert(t);
                    continue;
                }
            }
            let t = (self.offsets[n - 1]..self.offsets[n])
                .find(|&t| p.is_subset(&self.blocks[t]))
                .ok_or_else(|| Error::Domain(format!("no level-{n} block contains {p}")))?;
            a.insert(t);
        }
        Ok(a)
    }
}

/// γ : X → Y, given by the images γ[↑x] of the tokens of X.
pub trait Representation {
    fn space(&self) -> &Arc<Space>;
    /// γ[↑x].
    fn image(&self, x: Token) -> Region;
    /// Uni-covers of the domain, coarsest first.
    fn unicovers(&self) -> Vec<BitSet>;
}

impl Representation for StandardRep {
    fn space(&self) -> &Arc<Space> {
        &self.space
    }

    fn image(&self, x: Token) -> Region {
        self.blocks[x].clone()
    }

    fn unicovers(&self) -> Vec<BitSet> {
        (1..=self.depth).map(|n| self.level_family(n)).collect()
    }
}

/// Image of a closed interval under a function on a window.
pub type IntervalImage = Arc<dyn Fn(&Q, &Q) -> (Q, Q) + Send + Sync>;

/// f ∘ δ for an interval standard representation.
#[derive(Clone)]
pub struct MappedRep {
    pub base: StandardRep,
    pub image_of: IntervalImage,
}

impl Representation for MappedRep {
    fn space(&self) -> &Arc<Space> {
        self.base.space()
    }

    fn image(&self, x: Token) -> Region {
        match self.base.block(x) {
            Region::Interval(a, b) => {
                let (c, d) = (self.image_of)(a, b);
                Region::interval(c, d)
            }
            _ => Region::Empty,
        }
    }

    fn unicovers(&self) -> Vec<BitSet> {
        self.base.unicovers()
    }
}

#[derive(Clone, Debug)]
pub struct LinearishReport {
    pub coherent_pairs: usize,
    /// A coherent pair with disjoint images.
    pub violation: Option<(Token, Token)>,
    /// For each target cover n, the index of a source uni-cover whose images fit it.
    pub unicover_for_level: Vec<Option<usize>>,
}

impl LinearishReport {
    pub fn holds(&self) -> bool {
        self.violation.is_none() && self.unicover_for_level.iter().all(Option::is_some)
    }
}

/// One cover clipped to the points, with a sorted view when it is made of
/// intervals whose two ends increase together.
struct CoverIndex {
    blocks: Vec<Region>,
    order: Vec<usize>,
    monotone: bool,
}

impl CoverIndex {
    fn new(cover: &[Region], all: &Region) -> CoverIndex {
        let blocks: Vec<Region> = cover.iter().map(|b| b.intersect(all)).collect();
        let mut order: Vec<usize> = (0..blocks.len())
            .filter(|&i| blocks[i].bounds().is_some())
            .collect();
        let mut monotone = order.len() == blocks.len();
        if monotone {
            order.sort_by(|&i, &j| blocks[i].bounds().cmp(&blocks[j].bounds()));
            monotone = order
                .windows(2)
                .all(|w| blocks[w[0]].bounds().unwrap().1 <= blocks[w[1]].bounds().unwrap().1);
        }
        CoverIndex {
            blocks,
            order,
            monotone,
        }
    }

    /// The first block, in cover order, containing r.
    fn first_containing(&self, r: &Region) -> Option<usize> {
        match (r.bounds(), self.monotone) {
            (Some((a, b)), true) => {
                let end = |i: &usize| self.blocks[*i].bounds().unwrap();
                let start = self.order.partition_point(|i| end(i).1 < b);
                let stop = self.order.partition_point(|i| end(i).0 <= a);
                self.order[start..stop.max(start)]
                    .iter()
                    .copied()
                    .filter(|&i| r.is_subset(&self.blocks[i]))
                    .min()
            }
            _ => (0..self.blocks.len()).find(|&i| r.is_subset(&self.blocks[i])),
        }
    }
}

fn fits(rep: &dyn Representation, c: &BitSet, cover: &CoverIndex, all: &Region) -> bool {
    c.iter().all(|x| {
        cover
            .first_containing(&rep.image(x).intersect(all))
            .is_some()
    })
}

/// Both linearish conditions, up to `depth` covers of the target.
pub fn linearish_check(
    rep: &dyn Representation,
    target: &UniformSpaceDescriptor,
    depth: usize,
) -> LinearishReport {
    let space = rep.space();
    let all = target.all_points();
    let images: Vec<Region> = (0..space.len())
        .map(|x| rep.image(x).intersect(&all))
        .collect();
    let mut pairs = 0;
    let mut violation = None;
    'outer: for x in 0..space.len() {
        if images[x].is_empty() {
            violation = Some((x, x));
            break;
        }
        for y in space.neighbours(x) {
            if y > x {
                pairs += 1;
                if !images[x].meets(&images[y]) {
                    violation = Some((x, y));
                    break 'outer;
                }
            }
        }
    }
    let cands = rep.unicovers();
    let unicover_for_level = (1..=depth.min(target.levels()))
        .map(|n| {
            let idx = CoverIndex::new(target.cover(n), &all);
            cands.iter().position(|c| fits(rep, c, &idx, &all))
        })
        .collect();
    LinearishReport {
        coherent_pairs: pairs,
        violation,
        unicover_for_level,
    }
}

/// F : X ⊸ B_Y with δ ∘ F = γ, and the source uni-cover used per level.
#[derive(Clone, Debug)]
pub struct Extension {
    pub trace: Trace,
    pub source_cover: Vec<usize>,
}

/// F(a) = {ψ(x,n) : n ≤ depth, x ∈ a ∩ 𝔠ₙ} where ψ(x,n) is the first block
/// of 𝒰ₙ containing γ[↑x].
pub fn extension_trace(
    rep: &dyn Representation,
    delta: &StandardRep,
    depth: usize,
) -> Result<Extension> {
    if depth > delta.depth() {
        return Err(Error::Precondition(format!(
            "target materialized to depth {}",
            delta.depth()
        )));
    }
    let target = delta.descriptor();
    let all = target.all_points();
    let cands = rep.unicovers();
    let mut pairs = Vec::new();
    let mut source_cover = Vec::new();
    for n in 1..=depth {
        let cover = CoverIndex::new(target.cover(n), &all);
        let k = cands
            .iter()
            .position(|c| fits(rep, c, &cover, &all))
            .ok_or_else(|| {
                Error::Precondition(format!("not linearish: no uni-cover fits cover {n}"))
            })?;
        source_cover.push(k);
        for x in cands[k].iter() {
            let img = rep.image(x).intersect(&all);
            let i = cover.first_containing(&img).unwrap();
            pairs.push((x, delta.token(n, i)));
        }
    }
    let trace = Trace::linear(rep.space(), delta.space(), pairs)?;
    if let Some(v) = trace.violation() {
        return Err(Error::InvalidTrace(format!(
            "{} against {}",
            v.first, v.second
        )));
    }
    Ok(Extension {
        trace,
        source_cover,
    })
}

/// Every two points are joined by a chain of overlapping blocks of cover n.
pub fn chain_connected(d: &UniformSpaceDescriptor, level: usize) -> Result<bool> {
    if level == 0 || level > d.levels() {
        return Err(Error::Precondition(format!(
            "cover {level} is not materialized"
        )));
    }
    let all = d.all_points();
    let blocks: Vec<Region> = d
        .cover(level)
        .iter()
        .map(|b| b.intersect(&all))
        .filter(|b| !b.is_empty())
        .collect();
    if blocks.is_empty() {
        return Ok(all.is_empty());
    }
    let graph = overlap_graph(&blocks);
    Ok(reachable(&graph, 0).len() == blocks.len())
}

fn overlap_graph(blocks: &[Region]) -> Vec<Vec<usize>> {
    (0..blocks.len())
        .map(|i| {
            (0..blocks.len())
                .filter(|&j| j != i && blocks[i].meets(&blocks[j]))
                .collect()
        })
        .collect()
}

fn reachable(graph: &[Vec<usize>], from: usize) -> Vec<usize> {
    let mut seen = vec![false; graph.len()];
    let mut queue = VecDeque::from([from]);
    seen[from] = true;
    let mut out = Vec::new();
    while let Some(i) = queue.pop_front() {
        out.push(i);
        for &j in &graph[i] {
            if !seen[j] {
                seen[j] = true;
                queue.push_back(j);
            }
        }
    }
    out
}

#[derive(Clone, Debug)]
pub struct QuotientWitness {
    pub level: usize,
    /// (n, Uₙ) in the candidate.
    pub kept: Token,
    /// An overlapping (n, U′ₙ) missing from it.
    pub missing: Token,
    /// A point of Uₙ ∩ U′ₙ.
    pub point: Region,
    pub a: BitSet,
    pub a_prime: BitSet,
    pub meet_a: usize,
    pub meet_a_prime: usize,
}

#[derive(Clone, Debug)]
pub enum QuotientVerdict {
    /// The candidate is {(n, U) : U ∈ 𝒰ₙ}.
    LevelForm(usize),
    /// Two points of the domain, at most one of which the candidate meets exactly once.
    Refuted(QuotientWitness),
}

/// Test an anti-clique of B_X against the level shape every uni-cover of
/// Dom(δ) must have, building the two-clique witness when it fails.
pub fn unicover_shape_refutation(
    delta: &StandardRep,
    candidate: &BitSet,
) -> Result<QuotientVerdict> {
    let space = delta.space();
    if candidate.is_empty() || candidate.last().unwrap() >= space.len() {
        return Err(Error::Precondition(
            "candidate must be a nonempty set of tokens".into(),
        ));
    }
    if !space.is_anti_clique(candidate) {
        return Err(Error::Precondition(
            "candidate is not an anti-clique".into(),
        ));
    }
    let n = delta.level_of(candidate.first().unwrap());
    let family = delta.level_family(n);
    if *candidate == family {
        return Ok(QuotientVerdict::LevelForm(n));
    }
    let ids: Vec<Token> = family.iter().collect();
    let blocks: Vec<Region> = ids.iter().map(|&t| delta.block(t).clone()).collect();
    let graph = overlap_graph(&blocks);
    let start = ids.iter().position(|t| candidate.contains(*t)).unwrap();
    let order = reachable(&graph, start);
    if order.len() != ids.len() {
        return Err(Error::Precondition(format!(
            "cover {n} is not chain-connected"
        )));
    }
    let (kept, missing) = order
        .iter()
        .filter(|&&i| candidate.contains(ids[i]))
        .find_map(|&i| {
            graph[i]
                .iter()
                .find(|&&j| !candidate.contains(ids[j]))
                .map(|&j| (ids[i], ids[j]))
        })
        .ok_or_else(|| Error::Internal("no missing neighbour in a partial level family".into()))?;
    let meet = delta.block(kept).intersect(delta.block(missing));
    let point = match meet {
        Region::Points(s) => Region::Points(BitSet::singleton(s.first().unwrap())),
        Region::Interval(a, b) => {
            let mid = (a + b) / Q::from_integer(2.into());
            Region::Interval(mid.clone(), mid)
        }
        Region::Empty => return Err(Error::Internal("overlap graph edge without overlap".into())),
    };
    let a = delta.clique_through(&point, Some((n, kept)))?;
    let a_prime = delta.clique_through(&point, Some((n, missing)))?;
    let meet_a = a.meet_count(candidate);
    let meet_a_prime = a_prime.meet_count(candidate);
    Ok(QuotientVerdict::Refuted(QuotientWitness {
        level: n,
        kept,
        missing,
        point,
        a,
        a_prime,
        meet_a,
        meet_a_prime,
    }))
}

/// A representation of finitely many points by cliques of a finite space.
#[derive(Clone, Debug)]
pub struct FiniteRep {
    pub space: Arc<Space>,
    pub points: Vec<String>,
    /// Dom(ρ) with the point each clique represents.
    pub domain: Vec<(BitSet, usize)>,
}

impl FiniteRep {
    pub fn new(
        space: &Arc<Space>,
        points: Vec<String>,
        domain: Vec<(BitSet, usize)>,
    ) -> Result<FiniteRep> {
        for (a, p) in &domain {
            if !space.is_clique(a)? || *p >= points.len() {
                return Err(Error::Domain(format!(
                    "bad domain entry {}",
                    space.set_label(a)
                )));
            }
        }
        let mut seen: HashMap<&BitSet, usize> = HashMap::new();
        for (a, p) in &domain {
            if let Some(q) = seen.insert(a, *p) {
                if q != *p {
                    return Err(Error::Domain(format!(
                        "{} decodes twice",
                        space.set_label(a)
                    )));
                }
            }
        }
        Ok(FiniteRep {
            space: space.clone(),
            points,
            domain,
        })
    }

    pub fn decode(&self, a: &BitSet) -> Option<usize> {
        self.domain.iter().find(|(b, _)| b == a).map(|(_, p)| *p)
    }

    pub fn domain_cliques(&self) -> Vec<BitSet> {
        let mut v: Vec<BitSet> = self.domain.iter().map(|(a, _)| a.clone()).collect();
        v.sort();
        v.dedup();
        v
    }

    pub fn view(&self) -> Result<TotalityView> {
        TotalityView::from_generators(&self.space, &self.domain_cliques())
    }
}

impl Representation for FiniteRep {
    fn space(&self) -> &Arc<Space> {
        &self.space
    }

    fn image(&self, x: Token) -> Region {
        Region::Points(
            self.domain
                .iter()
                .filter(|(a, _)| a.contains(x))
                .map(|(_, p)| *p)
                .collect(),
        )
    }

    fn unicovers(&self) -> Vec<BitSet> {
        self.view()
            .map(|v| v.co_strict().to_vec())
            .unwrap_or_default()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RepConnective {
    Tensor,
    Lollipop,
    Bang,
}

/// [ρ⊗σ](a⊗b) = (ρ(a), σ(b)); [!ρ](!a) = ρ(a); [ρ⊸σ](κ) = f when κ̂ tracks f.
pub fn rep_construct(connective: RepConnective, reps: &[&FiniteRep]) -> Result<FiniteRep> {
    match (connective, reps) {
        (RepConnective::Tensor, [x, y]) => {
            let space = Space::tensor(&x.space, &y.space);
            let points = x
                .points
                .iter()
                .flat_map(|p| y.points.iter().map(move |q| format!("({p},{q})")))
                .collect();
            let domain = x
                .domain
                .iter()
                .flat_map(|(a, p)| {
                    y.domain
                        .iter()
                        .map(|(b, q)| (space.product_set(a, b), p * y.points.len() + q))
                        .collect::<Vec<_>>()
                })
                .collect();
            FiniteRep::new(&space, points, domain)
        }
        (RepConnective::Bang, [x]) => {
            let space = Space::bang(&x.space)?;
            let domain = x
                .domain
                .iter()
                .map(|(a, p)| (space.promote(a), *p))
                .collect();
            FiniteRep::new(&space, x.points.clone(), domain)
        }
        (RepConnective::Lollipop, [x, y]) => {
            let space = Space::lollipop(&x.space, &y.space);
            if space.len() > crate::totality::DEFAULT_MAX_TOKENS {
                return Err(Error::Budget(format!(
                    "{} has too many tokens",
                    space.name()
                )));
            }
            let mut functions: Vec<Vec<usize>> = Vec::new();
            let mut domain = Vec::new();
            'cliques: for k in space.cliques(usize::MAX) {
                let f = Trace::from_clique(&space, &k)?;
                let mut table: Vec<Option<usize>> = vec![None; x.points.len()];
                for (a, p) in &x.domain {
                    let Some(q) = y.decode(&f.apply_unchecked(a)) else {
                        continue 'cliques;
                    };
                    match table[*p] {
                        Some(r) if r != q => continue 'cliques,
                        _ => table[*p] = Some(q),
                    }
                }
                let Some(table) = table.into_iter().collect::<Option<Vec<usize>>>() else {
                    continue;
                };
                let idx = functions
                    .iter()
                    .position(|g| *g == table)
                    .unwrap_or_else(|| {
                        functions.push(table.clone());
                        functions.len() - 1
                    });
                domain.push((k, idx));
            }
            let points = functions
                .iter()
                .map(|g| {
                    let maps: Vec<String> = g
                        .iter()
                        .enumerate()
                        .map(|(p, q)| format!("{}>{}", x.points[p], y.points[*q]))
                        .collect();
                    format!("[{}]", maps.join(" "))
                })
                .collect();
            FiniteRep::new(&space, points, domain)
        }
        _ => Err(Error::Shape("wrong number of representations".into())),
    }
}

/// Dom(ρ) = Dom(ρ)⊥⊥°, with the first clique in one side only.
pub fn classical_check(rep: &FiniteRep) -> Result<(bool, Option<BitSet>)> {
    let dom = rep.domain_cliques();
    let v = rep.view()?;
    let strict = v.strict();
    let witness = strict
        .iter()
        .find(|a| dom.binary_search(a).is_err())
        .or_else(|| dom.iter().find(|a| !v.is_strict(a)));
    Ok((witness.is_none(), witness.cloned()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::reals::{q, BoundedReals};

    fn three() -> UniformSpaceDescriptor {
        UniformSpaceDescriptor::finite(
            "Three",
            &["0", "1", "2"],
            &[&[&["0", "1"], &["1", "2"]], &[&["0"], &["1"], &["2"]]],
        )
        .unwrap()
    }

    #[test]
    fn three_point_rep() {
        let d = three();
        let r = build_standard_rep(&d, 1).unwrap();
        assert_eq!(r.space().len(), 2);
        assert!(!r.space().strict(0, 1)); // same level
        let r2 = build_standard_rep(&d, 2).unwrap();
        let a = r2.space().parse_set("{(1,{0,1}) (2,{1})}").unwrap();
        assert_eq!(r2.decode(&a), Decoded::Point(1));
        let b = r2.space().parse_set("{(1,{0,1})}").unwrap();
        assert!(matches!(r2.decode(&b), Decoded::Ambiguous(_)));
        assert_eq!(r2.decode(&BitSet::new()), Decoded::Undefined);
        assert_eq!(build_standard_rep(&d, 0).unwrap().space().len(), 0);
    }

    #[test]
    fn parse_descriptors() {
        let d = parse_uniform_file(
            "space Three\npoints 0 1 2\ncover 1: {0 1} {1 2}\ncover 2: {0} {1} {2}\n",
        )
        .unwrap();
        assert_eq!(d, three());
        let i = parse_uniform_file("points interval 0 1\ncover 1: {0..1/2} {1/4..1}\n").unwrap();
        assert_eq!(i.levels(), 1);
        assert!(parse_uniform_file("points interval 0 1\ncover 1: {0..1/4} {1/2..1}\n").is_err());
        assert!(parse_uniform_file("points a b\ncover 1: {a}\n").is_err());
        assert!(parse_uniform_file("points a b\ncover 2: {a b}\n").is_err());
        let r = parse_uniform_file("points interval 0 1\nbasis dyadic 3\n").unwrap();
        assert_eq!(r.levels(), 3);
        assert!(r.is_directed());
    }

    #[test]
    fn dyadic_basis_matches_bounded_reals() {
        let w = Window::new(q(0, 1), q(1, 1)).unwrap();
        let d = UniformSpaceDescriptor::dyadic(w.clone(), 6);
        let rep = build_standard_rep(&d, 6).unwrap();
        let r = Arc::new(BoundedReals::new(w, 1, 6).unwrap());
        let s = r.space("R");
        assert_eq!(rep.space().len(), s.len());
        for x in 0..s.len() {
            assert_eq!(rep.space().neighbours(x), s.neighbours(x));
        }
    }

    #[test]
    fn linearish_examples() {
        let d = three();
        let r = build_standard_rep(&d, 2).unwrap();
        assert!(linearish_check(&r, &d, 2).holds());
        assert!(linearish_check(&r, &d, 0).holds());

        // declare a coherence between the disjoint blocks {0} and {2}
        let x = Space::atom_named("Bad", &["l", "r"], &[("l", "r")]).unwrap();
        let bad = FiniteRep::new(
            &x,
            vec!["0".into(), "2".into()],
            vec![(BitSet::singleton(0), 0), (BitSet::singleton(1), 1)],
        )
        .unwrap();
        let pts = UniformSpaceDescriptor::finite("P", &["0", "2"], &[&[&["0"], &["2"]]]).unwrap();
        let rep = linearish_check(&bad, &pts, 1);
        assert_eq!(rep.violation, Some((0, 1)));
    }

    #[test]
    fn chain_examples() {
        assert!(chain_connected(&three(), 1).unwrap());
        assert!(!chain_connected(&three(), 2).unwrap());
        let d = UniformSpaceDescriptor::dyadic(Window::new(q(0, 1), q(1, 1)).unwrap(), 5);
        assert!((1..=5).all(|n| chain_connected(&d, n).unwrap()));
    }

    #[test]
    fn quotient_examples() {
        let d = UniformSpaceDescriptor::finite(
            "Three",
            &["0", "1", "2"],
            &[&[&["0", "1"], &["1", "2"]]],
        )
        .unwrap();
        let r = build_standard_rep(&d, 1).unwrap();
        assert!(matches!(
            unicover_shape_refutation(&r, &r.level_family(1)).unwrap(),
            QuotientVerdict::LevelForm(1)
        ));
        match unicover_shape_refutation(&r, &BitSet::singleton(1)).unwrap() {
            QuotientVerdict::Refuted(w) => {
                assert_eq!((w.kept, w.missing), (1, 0));
                assert_eq!((w.meet_a, w.meet_a_prime), (1, 0));
            }
            v => panic!("{v:?}"),
        }
        let rr = build_standard_rep(
            &UniformSpaceDescriptor::dyadic(Window::new(q(0, 1), q(1, 1)).unwrap(), 3),
            3,
        )
        .unwrap();
        let coherent = rr.space().parse_set("{(1,[0,1]) (2,[0,1/2])}").unwrap();
        assert!(unicover_shape_refutation(&rr, &coherent).is_err());
    }

    fn f2_rep() -> FiniteRep {
        let x = Space::atom_named("F2", &["p", "q"], &[]).unwrap();
        FiniteRep::new(
            &x,
            vec!["P".into(), "Q".into()],
            vec![(BitSet::singleton(0), 0), (BitSet::singleton(1), 1)],
        )
        .unwrap()
    }

    #[test]
    fn classical_examples() {
        let f = f2_rep();
        assert!(classical_check(&f).unwrap().0);
        let t = rep_construct(RepConnective::Tensor, &[&f, &f]).unwrap();
        assert!(classical_check(&t).unwrap().0);
        let b = rep_construct(RepConnective::Bang, &[&f]).unwrap();
        assert!(classical_check(&b).unwrap().0);
        // disjoint singletons of an antichain are already closed
        let c3 = Space::atom_named("C3", &["u", "v", "w"], &[]).unwrap();
        let two = FiniteRep::new(
            &c3,
            vec!["U".into(), "V".into()],
            vec![(BitSet::singleton(0), 0), (BitSet::singleton(1), 1)],
        )
        .unwrap();
        assert!(classical_check(&two).unwrap().0);
        // coherent singletons: no anti-clique meets both, so the closure is every clique
        let k2 = Space::atom_named("K2", &["u", "v"], &[("u", "v")]).unwrap();
        let open = FiniteRep::new(
            &k2,
            vec!["U".into(), "V".into()],
            vec![(BitSet::singleton(0), 0), (BitSet::singleton(1), 1)],
        )
        .unwrap();
        let (ok, w) = classical_check(&open).unwrap();
        assert!(!ok && w == Some(BitSet::new()));
        let l = rep_construct(RepConnective::Lollipop, &[&f, &f]).unwrap();
        assert_eq!(l.points.len(), 4);
    }
}
