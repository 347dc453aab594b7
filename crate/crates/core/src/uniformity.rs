//! Covers of point sets, the uni-covers and unbounded covers induced by a
//! co-totality, and the constructions behind fineness and strong uniform
//! continuity.
//!
//! Points are the strict total cliques of a view, indexed by their position
//! in `TotalityView::strict()`. Blocks are point-index sets.

use crate::bits::BitSet;
use crate::error::{Error, Result};
use crate::maps::{compose, theta_trace, transpose, Trace};
use crate::space::{Space, Token};
use crate::totality::{lift_bang, lift_lollipop, TotalityView};
use std::collections::{BTreeSet, HashSet};
use std::fmt;
use std::sync::Arc;

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Key {
    /// Uni-cover block ↑x°.
    Token(Token),
    /// Unbounded-cover block ↑a°.
    Clique(BitSet),
    /// Block of an abstract cover.
    Explicit,
}

impl Key {
    fn as_clique(&self) -> Option<BitSet> {
        match self {
            Key::Token(t) => Some(BitSet::singleton(*t)),
            Key::Clique(a) => Some(a.clone()),
            Key::Explicit => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Block {
    pub key: Key,
    pub points: BitSet,
}

/// A cover of the point set {0, .., n_points-1}.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Cover {
    n_points: usize,
    blocks: Vec<Block>,
}

impl Cover {
    pub fn keyed(n_points: usize, blocks: Vec<Block>) -> Result<Cover> {
        let all = BitSet::full(n_points);
        let union = blocks.iter().fold(BitSet::new(), |u, b| u.union(&b.points));
        if union != all {
            return Err(Error::Domain(format!(
                "blocks cover {union:?}, not all {n_points} points"
            )));
        }
        Ok(Cover { n_points, blocks })
    }

    pub fn explicit(n_points: usize, blocks: Vec<BitSet>) -> Result<Cover> {
        Cover::keyed(
            n_points,
            blocks
                .into_iter()
                .map(|points| Block {
                    key: Key::Explicit,
                    points,
                })
                .collect(),
        )
    }

    /// The one-block cover.
    pub fn trivial(n_points: usize) -> Cover {
        Cover {
            n_points,
            blocks: vec![Block {
                key: Key::Clique(BitSet::new()),
                points: BitSet::full(n_points),
            }],
        }
    }

    pub fn n_points(&self) -> usize {
        self.n_points
    }

    pub fn blocks(&self) -> &[Block] {
        &self.blocks
    }

    /// Distinct nonempty blocks.
    pub fn block_sets(&self) -> BTreeSet<BitSet> {
        self.blocks
            .iter()
            .filter(|b| !b.points.is_empty())
            .map(|b| b.points.clone())
            .collect()
    }

    /// Keys read as cliques, with blocks; `None` if any key is explicit.
    fn keyed_shape(&self) -> Option<BTreeSet<(BitSet, BitSet)>> {
        self.blocks
            .iter()
            .filter(|b| !b.points.is_empty())
            .map(|b| b.key.as_clique().map(|k| (k, b.points.clone())))
            .collect()
    }

    /// Identity as members of a family: keyed covers by keys, others by blocks.
    pub fn same_member(&self, other: &Cover) -> bool {
        match (self.keyed_shape(), other.keyed_shape()) {
            (Some(a), Some(b)) => a == b,
            (None, None) => self.block_sets() == other.block_sets(),
            _ => false,
        }
    }

    pub fn is_disjoint(&self) -> bool {
        let mut seen = BitSet::new();
        for b in &self.blocks {
            if seen.intersects(&b.points) {
                return false;
            }
            seen = seen.union(&b.points);
        }
        true
    }

    /// The block containing `p`, for a disjoint cover.
    pub fn block_of(&self, p: usize) -> Option<&Block> {
        self.blocks.iter().find(|b| b.points.contains(p))
    }
}

impl fmt::Display for Cover {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for b in &self.blocks {
            let key = match &b.key {
                Key::Token(t) => format!("{t}"),
                Key::Clique(a) => format!("{a:?}"),
                Key::Explicit => "-".to_string(),
            };
            writeln!(f, "block {key}: {:?}", b.points)?;
        }
        Ok(())
    }
}

fn same_points(u: &Cover, v: &Cover) -> Result<()> {
    if u.n_points != v.n_points {
        return Err(Error::Shape(format!(
            "covers of {} and {} points",
            u.n_points, v.n_points
        )));
    }
    Ok(())
}

/// U ⪯ V.
pub fn refines(u: &Cover, v: &Cover) -> Result<bool> {
    same_points(u, v)?;
    Ok(u.blocks
        .iter()
        .all(|a| v.blocks.iter().any(|b| a.points.is_subset(&b.points))))
}

/// U ∧ V with empty intersections dropped. Keys are joined when both sides
/// are keyed; a nonempty intersection guarantees the union is a clique.
pub fn meet(u: &Cover, v: &Cover) -> Result<Cover> {
    same_points(u, v)?;
    let mut blocks: Vec<Block> = Vec::new();
    for a in &u.blocks {
        for b in &v.blocks {
            let points = a.points.intersection(&b.points);
            if points.is_empty() {
                continue;
            }
            let key = match (a.key.as_clique(), b.key.as_clique()) {
                (Some(x), Some(y)) => Key::Clique(x.union(&y)),
                _ => Key::Explicit,
            };
            let block = Block { key, points };
            if !blocks.contains(&block) {
                blocks.push(block);
            }
        }
    }
    Ok(Cover {
        n_points: u.n_points,
        blocks,
    })
}

/// st(A; U).
pub fn star(a: &BitSet, u: &Cover) -> BitSet {
    u.blocks
        .iter()
        .filter(|b| b.points.intersects(a))
        .fold(BitSet::new(), |acc, b| acc.union(&b.points))
}

/// U* = {st(B; U) : B ∈ U}.
pub fn star_cover(u: &Cover) -> Cover {
    let blocks = u
        .blocks
        .iter()
        .map(|b| Block {
            key: Key::Explicit,
            points: star(&b.points, u),
        })
        .collect();
    Cover {
        n_points: u.n_points,
        blocks,
    }
}

pub fn star_refines(u: &Cover, v: &Cover) -> Result<bool> {
    refines(&star_cover(u), v)
}

/// |x − y| < U.
pub fn within(x: usize, y: usize, u: &Cover) -> bool {
    u.blocks
        .iter()
        .any(|b| b.points.contains(x) && b.points.contains(y))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Axiom {
    U1,
    U2,
    U3,
    U4,
}

#[derive(Clone, Debug)]
pub struct AxiomResult {
    pub axiom: Axiom,
    pub holds: bool,
    pub witness: Option<String>,
}

/// Check the requested axioms on a finite family of covers.
///
/// U1 asks that the meet of any two members is itself a member (keyed covers
/// compare by keys). U2 is read as basis generation and always holds for a
/// family treated as a generating set. U3 and U4 are checked directly.
pub fn verify_uniformity_axioms(
    family: &[Cover],
    n_points: usize,
    which: &[Axiom],
) -> Result<Vec<AxiomResult>> {
    for c in family {
        if c.n_points != n_points {
            return Err(Error::Shape("cover over a different point set".into()));
        }
    }
    let mut out = Vec::new();
    for &axiom in which {
        let witness = match axiom {
            Axiom::U1 => u1_witness(family)?,
            Axiom::U2 => None,
            Axiom::U3 => u3_witness(family)?,
            Axiom::U4 => u4_witness(family, n_points),
        };
        out.push(AxiomResult {
            axiom,
            holds: witness.is_none(),
            witness,
        });
    }
    Ok(out)
}

fn u1_witness(family: &[Cover]) -> Result<Option<String>> {
    for (i, u) in family.iter().enumerate() {
        for (j, v) in family.iter().enumerate().skip(i) {
            let m = meet(u, v)?;
            if !family.iter().any(|w| w.same_member(&m)) {
                return Ok(Some(format!(
                    "meet of covers {i} and {j} is not in the family"
                )));
            }
        }
    }
    Ok(None)
}

fn u3_witness(family: &[Cover]) -> Result<Option<String>> {
    for (i, u) in family.iter().enumerate() {
        let mut found = false;
        for v in family {
            if star_refines(v, u)? {
                found = true;
                break;
            }
        }
        if !found {
            return Ok(Some(format!(
                "cover {i} has no star-refinement in the family"
            )));
        }
    }
    Ok(None)
}

fn u4_witness(family: &[Cover], n_points: usize) -> Option<String> {
    for x in 0..n_points {
        for y in (x + 1)..n_points {
            if family.iter().all(|u| within(x, y, u)) {
                return Some(format!("points {x} and {y} are never separated"));
            }
        }
    }
    None
}

/// A finite view together with the bang space its unbounded covers live in.
#[derive(Clone, Debug)]
pub struct UniformView {
    view: TotalityView,
    bang: Arc<Space>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Flavor {
    Uni,
    Unbounded,
}

impl UniformView {
    pub fn new(view: TotalityView) -> Result<UniformView> {
        let bang = Space::bang(view.space())?;
        Ok(UniformView { view, bang })
    }

    pub fn view(&self) -> &TotalityView {
        &self.view
    }

    pub fn space(&self) -> &Arc<Space> {
        self.view.space()
    }

    pub fn bang(&self) -> &Arc<Space> {
        &self.bang
    }

    /// T°, indexed by position.
    pub fn points(&self) -> &[BitSet] {
        self.view.strict()
    }

    /// ↑a° as point indices.
    pub fn upper(&self, a: &BitSet) -> BitSet {
        self.view.upper(a)
    }

    pub fn token_block(&self, x: Token) -> BitSet {
        self.upper(&BitSet::singleton(x))
    }

    pub fn uni_cover(&self, c: &BitSet) -> Result<Cover> {
        let blocks = c
            .iter()
            .map(|x| Block {
                key: Key::Token(x),
                points: self.token_block(x),
            })
            .collect();
        Cover::keyed(self.points().len(), blocks)
    }

    pub fn unbounded_cover(&self, keys: &[BitSet]) -> Result<Cover> {
        let blocks = keys
            .iter()
            .map(|a| Block {
                key: Key::Clique(a.clone()),
                points: self.upper(a),
            })
            .collect();
        Cover::keyed(self.points().len(), blocks)
    }

    /// σ^b: the strict total anti-cliques of X.
    pub fn uni_covers(&self) -> &[BitSet] {
        self.view.co_strict()
    }

    /// Whether a set of cliques, read as tokens of !X, lies in T⊥_{!X}.
    ///
    /// An anti-clique of !X meets !a iff it meets !a°, so meeting the
    /// promotions of strict points is enough.
    pub fn is_unbounded_total(&self, keys: &[BitSet]) -> bool {
        let pairwise = keys.iter().enumerate().all(|(i, a)| {
            keys[i + 1..]
                .iter()
                .all(|b| a != b && !self.space().is_clique_unchecked(&a.union(b)))
        });
        pairwise
            && self
                .points()
                .iter()
                .all(|p| keys.iter().filter(|a| a.is_subset(p)).count() == 1)
    }

    /// β^ub: strict total anti-cliques of !X, each as a sorted list of cliques of X.
    pub fn unbounded_covers(&self) -> Result<Vec<Vec<BitSet>>> {
        self.unbounded_covers_with_budget(1 << 20)
    }

    pub fn unbounded_covers_with_budget(&self, budget: usize) -> Result<Vec<Vec<BitSet>>> {
        let anti = self.bang.anti_cliques_with_budget(budget)?;
        let mut out = Vec::new();
        for c in anti {
            let keys: Vec<BitSet> = c
                .iter()
                .map(|t| self.bang.bang_clique(t).unwrap().clone())
                .collect();
            let strict = keys.iter().all(|a| !self.upper(a).is_empty());
            if strict
                && self
                    .points()
                    .iter()
                    .all(|p| keys.iter().any(|a| a.is_subset(p)))
            {
                out.push(keys);
            }
        }
        Ok(out)
    }

    pub fn enumerate_covers(&self, flavor: Flavor) -> Result<Vec<Cover>> {
        match flavor {
            Flavor::Uni => self
                .uni_covers()
                .iter()
                .map(|c| self.uni_cover(c))
                .collect(),
            Flavor::Unbounded => self
                .unbounded_covers()?
                .iter()
                .map(|k| self.unbounded_cover(k))
                .collect(),
        }
    }

    /// Keys with nonempty blocks, sorted and deduplicated.
    fn strictify(&self, mut keys: Vec<BitSet>) -> Vec<BitSet> {
        keys.retain(|a| !self.upper(a).is_empty());
        keys.sort();
        keys.dedup();
        keys
    }

    /// 𝔄 ∧ 𝔅 = {a∪b : a∈𝔄, b∈𝔅, a≍b}°.
    pub fn wedge_unbounded(&self, a: &[BitSet], b: &[BitSet]) -> Vec<BitSet> {
        let mut keys = Vec::new();
        for x in a {
            for y in b {
                let u = x.union(y);
                if self.space().is_clique_unchecked(&u) {
                    keys.push(u);
                }
            }
        }
        self.strictify(keys)
    }

    /// 𝔠₁ ∧ … ∧ 𝔠ₘ as an unbounded cover; the empty wedge is {∅}.
    pub fn wedge_uni(&self, covers: &[BitSet]) -> Vec<BitSet> {
        let mut acc = vec![BitSet::new()];
        for c in covers {
            let singles: Vec<BitSet> = c.iter().map(BitSet::singleton).collect();
            acc = self.wedge_unbounded(&acc, &singles);
        }
        acc
    }

    /// One uni-cover through each token of `a`, taken from a strict point above `a`.
    pub fn upper_extension(&self, a: &BitSet) -> Result<Vec<BitSet>> {
        if self.upper(a).is_empty() {
            return Err(Error::Precondition(format!(
                "no strict total clique contains {}",
                self.space().set_label(a)
            )));
        }
        a.iter()
            .map(|x| {
                self.uni_covers()
                    .iter()
                    .find(|c| c.contains(x))
                    .cloned()
                    .ok_or_else(|| {
                        Error::Internal(format!(
                            "token {} of a strict point lies in no uni-cover",
                            x
                        ))
                    })
            })
            .collect()
    }

    /// An unbounded cover having `a` as a key.
    pub fn unbounded_containing(&self, a: &BitSet) -> Result<Vec<BitSet>> {
        let w = self.wedge_uni(&self.upper_extension(a)?);
        if w.binary_search(a).is_err() {
            return Err(Error::Internal(format!(
                "{} missing from its own wedge",
                self.space().set_label(a)
            )));
        }
        Ok(w)
    }

    /// 𝔅 with Σ_{b∈𝔅} ↑b° = ↑aₙ° ∖ ⋃_{i<n} ↑aᵢ°. Earlier cliques with empty
    /// blocks are skipped; an empty last block yields the empty family.
    pub fn finite_divide(&self, seq: &[BitSet]) -> Result<Vec<BitSet>> {
        let (last, earlier) = seq
            .split_last()
            .ok_or(Error::Precondition("empty clique sequence".into()))?;
        if !self.space().is_clique(last)? {
            return Err(Error::Domain(format!(
                "{} is not a clique",
                self.space().set_label(last)
            )));
        }
        if self.upper(last).is_empty() {
            return Ok(Vec::new());
        }
        let mut acc = vec![last.clone()];
        for a in earlier {
            if self.upper(a).is_empty() {
                continue;
            }
            let others: Vec<BitSet> = self
                .unbounded_containing(a)?
                .into_iter()
                .filter(|b| b != a)
                .collect();
            acc = self.wedge_unbounded(&acc, &others);
        }
        Ok(acc)
    }

    /// An unbounded cover refining {↑aₙ°}, built as the union of the
    /// successive finite divisions.
    pub fn refine_open_cover(&self, gens: &[BitSet]) -> Result<Vec<BitSet>> {
        let covered = gens
            .iter()
            .fold(BitSet::new(), |u, a| u.union(&self.upper(a)));
        if covered != BitSet::full(self.points().len()) {
            return Err(Error::Precondition(
                "generators do not cover the strict points".into(),
            ));
        }
        let mut keys = Vec::new();
        for n in 0..gens.len() {
            keys.extend(self.finite_divide(&gens[..=n])?);
        }
        Ok(self.strictify(keys))
    }

    /// star({a}; 𝔄) = ↑a₀° for the key a₀ below a, for every point and cover.
    pub fn scott_witness(&self, keys: &[BitSet]) -> Result<Option<usize>> {
        let cover = self.unbounded_cover(keys)?;
        for (i, p) in self.points().iter().enumerate() {
            let below: Vec<&BitSet> = keys.iter().filter(|a| a.is_subset(p)).collect();
            if below.len() != 1 || star(&BitSet::singleton(i), &cover) != self.upper(below[0]) {
                return Ok(Some(i));
            }
        }
        Ok(None)
    }

    /// a ↦ !a.
    pub fn bang_transport(&self, a: &BitSet) -> BitSet {
        self.bang.promote(a)
    }

    /// Keys of an unbounded cover as a token set of !X.
    pub fn bang_tokens(&self, keys: &[BitSet]) -> BitSet {
        keys.iter()
            .map(|a| self.bang.bang_token(a).expect("finite clique"))
            .collect()
    }

    /// Checks that a ↦ !a maps T° onto T°_{!X} and that β^ub_X, transported,
    /// is σ^b_{!X} with matching blocks.
    pub fn check_bang_homeomorphism(&self) -> Result<HomeomorphismReport> {
        let bview = lift_bang(&self.view)?;
        let mut image: Vec<BitSet> = self
            .points()
            .iter()
            .map(|p| self.bang_transport(p))
            .collect();
        image.sort();
        let bijection = image.len() == self.points().len() && image.as_slice() == bview.strict();

        let mut ours: Vec<BitSet> = self
            .unbounded_covers()?
            .iter()
            .map(|k| self.bang_tokens(k))
            .collect();
        ours.sort();
        let covers_coincide = ours.as_slice() == bview.co_strict();

        let mut blocks_match = true;
        for keys in self.unbounded_covers()? {
            for a in &keys {
                let t = self.bang.bang_token(a).unwrap();
                for p in self.points() {
                    if a.is_subset(p) != self.bang_transport(p).contains(t) {
                        blocks_match = false;
                    }
                }
            }
        }
        Ok(HomeomorphismReport {
            bijection,
            covers_coincide,
            blocks_match,
            points: self.points().len(),
        })
    }
}

#[derive(Clone, Debug)]
pub struct HomeomorphismReport {
    pub bijection: bool,
    pub covers_coincide: bool,
    pub blocks_match: bool,
    pub points: usize,
}

impl HomeomorphismReport {
    pub fn holds(&self) -> bool {
        self.bijection && self.covers_coincide && self.blocks_match
    }
}

/// 𝔞 = (F⊥(𝔟))°, a uni-cover of X for the uni-cover 𝔟 of Y.
pub fn modulus_for(f: &Trace, vx: &TotalityView, vy: &TotalityView, b: &BitSet) -> Result<BitSet> {
    if !vy.is_co_member(b) {
        return Err(Error::Domain(format!(
            "{} is not co-total",
            vy.space().set_label(b)
        )));
    }
    let t = transpose(f)?;
    let a = t.apply(b)?;
    vx.co_strict_part(&a)
}

/// Pairs of strict points in one block of 𝔞 whose images share no token of 𝔟.
pub fn modulus_violation(
    f: &Trace,
    vx: &TotalityView,
    a: &BitSet,
    b: &BitSet,
) -> Option<(BitSet, BitSet)> {
    let pts = vx.strict();
    let images: Vec<BitSet> = pts.iter().map(|p| f.apply_unchecked(p)).collect();
    for i in 0..pts.len() {
        for j in i..pts.len() {
            let close = pts[i].intersection(&pts[j]).intersects(a);
            let images_close = images[i].intersection(&images[j]).intersects(b);
            if close && !images_close {
                return Some((pts[i].clone(), pts[j].clone()));
            }
        }
    }
    None
}

/// Result of splitting a total F : (X ⊸ Y) → Z at a uni-cover of Z.
#[derive(Clone, Debug)]
pub struct PointEvaluation {
    /// The strict point a₀ of X.
    pub point: BitSet,
    /// The uni-cover 𝔟 of Y in the product modulus a₀ ⊗ 𝔟.
    pub co_point: BitSet,
    /// G = F ∘ θ : Y → Z.
    pub g: Trace,
}

pub fn point_evaluation_decomposition(
    f: &Trace,
    vx: &TotalityView,
    vy: &TotalityView,
    vz: &TotalityView,
    c: &BitSet,
) -> Result<PointEvaluation> {
    let lview = lift_lollipop(vx, vy)?;
    let lolli = lview.space().clone();
    if f.src().labels() != lolli.labels() {
        return Err(Error::Shape(format!(
            "{} does not start at {}",
            f.src().name(),
            lolli.name()
        )));
    }
    let modulus = modulus_for(f, &lview, vz, c)?;
    let (a0, b) = lolli.projections(&modulus);
    let product = lolli.product_set(&a0, &b);
    if product != modulus || !vx.is_strict(&a0) || vy.co_strict().binary_search(&b).is_err() {
        return Err(Error::Structure(format!(
            "modulus {} is not a strict point times a uni-cover",
            lolli.set_label(&modulus)
        )));
    }
    let theta_cover = vx
        .co_strict()
        .first()
        .ok_or(Error::Precondition("X has no uni-cover".into()))?;
    let theta = theta_trace(theta_cover, vx.space(), vy.space())?;
    let g = compose(&theta, f)?;
    for k in lview.strict() {
        let kappa = Trace::from_clique(&lolli, k)?;
        let lhs = f.apply_unchecked(k);
        let rhs = g.apply_unchecked(&kappa.apply_unchecked(&a0));
        if !lhs.intersection(&rhs).intersects(c) {
            return Err(Error::Internal(format!(
                "F and G separate at {} for cover {}",
                lolli.set_label(k),
                vz.space().set_label(c)
            )));
        }
    }
    Ok(PointEvaluation {
        point: a0,
        co_point: b,
        g,
    })
}

/// Deduplicate generator sequences by their block families.
pub fn distinct_block_keys(uv: &UniformView, keys: &[BitSet]) -> Vec<BitSet> {
    let mut seen: HashSet<BitSet> = HashSet::new();
    keys.iter()
        .filter(|a| seen.insert(uv.upper(a)))
        .cloned()
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn s(v: &[usize]) -> BitSet {
        v.iter().copied().collect()
    }
    fn f2_view() -> TotalityView {
        let x = Space::atom_named("F2", &["p", "q"], &[]).unwrap();
        TotalityView::from_generators(&x, &[s(&[0]), s(&[1])]).unwrap()
    }
    fn c2_view() -> TotalityView {
        let x = Space::atom_named("C2", &["u", "v"], &[("u", "v")]).unwrap();
        TotalityView::from_generators(&x, &[s(&[0, 1])]).unwrap()
    }

    #[test]
    fn cover_algebra() {
        let fine = Cover::explicit(3, vec![s(&[0]), s(&[1]), s(&[2])]).unwrap();
        let coarse = Cover::explicit(3, vec![s(&[0, 1]), s(&[2])]).unwrap();
        let other = Cover::explicit(3, vec![s(&[0]), s(&[1, 2])]).unwrap();
        assert!(refines(&fine, &coarse).unwrap());
        assert!(!refines(&coarse, &fine).unwrap());
        assert!(refines(&coarse, &coarse).unwrap());
        assert_eq!(
            meet(&coarse, &other).unwrap().block_sets(),
            fine.block_sets()
        );
        assert_eq!(
            meet(&coarse, &Cover::trivial(3)).unwrap().block_sets(),
            coarse.block_sets()
        );
        assert_eq!(star(&s(&[0]), &coarse), s(&[0, 1]));
        assert_eq!(star(&BitSet::new(), &coarse), BitSet::new());
        assert!(star_refines(&coarse, &coarse).unwrap());
        assert!(within(0, 1, &coarse) && !within(0, 2, &coarse) && within(2, 2, &coarse));
        assert!(Cover::explicit(3, vec![s(&[0])]).is_err());
        assert!(refines(&fine, &Cover::trivial(2)).is_err());
    }

    #[test]
    fn covers_of_small_views() {
        let uf = UniformView::new(f2_view()).unwrap();
        assert_eq!(uf.uni_covers(), &[s(&[0, 1])]);
        let ub = uf.unbounded_covers().unwrap();
        assert_eq!(ub, vec![vec![BitSet::new()], vec![s(&[0]), s(&[1])]]);

        let uc = UniformView::new(c2_view()).unwrap();
        assert_eq!(uc.uni_covers(), &[s(&[0]), s(&[1])]);
        assert_eq!(uc.wedge_unbounded(&[s(&[0])], &[s(&[1])]), vec![s(&[0, 1])]);
        let a = uc.unbounded_cover(&[s(&[0])]).unwrap();
        assert_eq!(uc.wedge_unbounded(&[s(&[0])], &[s(&[0])]), vec![s(&[0])]);
        assert!(a.is_disjoint());
    }

    #[test]
    fn axioms_on_small_views() {
        let uf = UniformView::new(f2_view()).unwrap();
        let ub = uf.enumerate_covers(Flavor::Unbounded).unwrap();
        let r = verify_uniformity_axioms(&ub, 2, &[Axiom::U1, Axiom::U3, Axiom::U4]).unwrap();
        assert!(r.iter().all(|a| a.holds), "{r:?}");

        let uc = UniformView::new(c2_view()).unwrap();
        let sb = uc.enumerate_covers(Flavor::Uni).unwrap();
        let r = verify_uniformity_axioms(&sb, 1, &[Axiom::U1, Axiom::U3, Axiom::U4]).unwrap();
        assert!(!r[0].holds && r[1].holds && r[2].holds);
    }

    #[test]
    fn upper_extension_examples() {
        let uf = UniformView::new(f2_view()).unwrap();
        assert_eq!(uf.upper_extension(&s(&[0])).unwrap(), vec![s(&[0, 1])]);
        assert!(uf.upper_extension(&BitSet::new()).unwrap().is_empty());
        assert_eq!(uf.wedge_uni(&[]), vec![BitSet::new()]);
        assert!(uf.upper_extension(&s(&[0, 1])).is_err());
        let uc = UniformView::new(c2_view()).unwrap();
        assert_eq!(
            uc.upper_extension(&s(&[0, 1])).unwrap(),
            vec![s(&[0]), s(&[1])]
        );
    }

    #[test]
    fn finite_divide_examples() {
        let uf = UniformView::new(f2_view()).unwrap();
        assert_eq!(uf.finite_divide(&[s(&[0])]).unwrap(), vec![s(&[0])]);
        let d = uf.finite_divide(&[s(&[0]), BitSet::new()]).unwrap();
        let covered = d.iter().fold(BitSet::new(), |u, b| u.union(&uf.upper(b)));
        assert_eq!(covered, uf.upper(&s(&[1])));

        let uc = UniformView::new(c2_view()).unwrap();
        assert!(uc.finite_divide(&[s(&[0, 1]), s(&[0])]).unwrap().is_empty());
    }

    #[test]
    fn refine_examples() {
        let uf = UniformView::new(f2_view()).unwrap();
        assert_eq!(
            uf.refine_open_cover(&[BitSet::new()]).unwrap(),
            vec![BitSet::new()]
        );
        assert_eq!(
            uf.refine_open_cover(&[s(&[0]), s(&[1])]).unwrap(),
            vec![s(&[0]), s(&[1])]
        );
        assert!(uf.refine_open_cover(&[s(&[0])]).is_err());
    }

    #[test]
    fn modulus_examples() {
        let v = f2_view();
        let id = Trace::identity(v.space());
        let b = s(&[0, 1]);
        assert_eq!(modulus_for(&id, &v, &v, &b).unwrap(), b);
        assert!(modulus_violation(&id, &v, &b, &b).is_none());
    }

    #[test]
    fn bang_transport_examples() {
        let uf = UniformView::new(f2_view()).unwrap();
        assert_eq!(
            uf.bang().set_label(&uf.bang_transport(&s(&[0]))),
            "{{} {p}}"
        );
        assert!(uf.check_bang_homeomorphism().unwrap().holds());
        let one = UniformView::new(crate::totality::one_view()).unwrap();
        assert_eq!(
            one.bang().set_label(&one.bang_transport(&s(&[0]))),
            "{{} {•}}"
        );
    }

    #[test]
    fn point_evaluation_at_p() {
        let (vx, vy) = (f2_view(), c2_view());
        let lolli = Space::lollipop(vx.space(), vy.space());
        // F(κ) = κ̂({p})
        let pairs: Vec<(usize, usize)> = (0..vy.space().len())
            .map(|y| (lolli.pair(0, y).unwrap(), y))
            .collect();
        let f = Trace::linear(&lolli, vy.space(), pairs).unwrap();
        let d = point_evaluation_decomposition(&f, &vx, &vy, &vy, &s(&[0])).unwrap();
        assert_eq!(d.point, s(&[0]));
        assert!(d.g.is_valid());
    }
}
