//! Orthogonality, bi-orthogonal closure, strict parts and the totality of
//! each connective, computed exhaustively on finite spaces.

use crate::bits::BitSet;
use crate::error::{Error, Result};
use crate::maps::Trace;
use crate::space::{Kind, Space, Token};
use std::collections::HashSet;
use std::sync::Arc;

/// Default cap on the token count of spaces handled exhaustively.
pub const DEFAULT_MAX_TOKENS: usize = 14;

/// a ⊥ c: the clique and the anti-clique share exactly one token.
pub fn orthogonal(a: &BitSet, c: &BitSet) -> bool {
    a.meet_count(c) == 1
}

/// Members of `candidates` orthogonal to every member of `sets`.
pub fn perp_within(sets: &[BitSet], candidates: &[BitSet]) -> Vec<BitSet> {
    candidates
        .iter()
        .filter(|c| sets.iter().all(|a| orthogonal(a, c)))
        .cloned()
        .collect()
}

/// A⊥ for a set of cliques of a finite space: all orthogonal anti-cliques.
pub fn perp_set(a: &[BitSet], x: &Space) -> Result<Vec<BitSet>> {
    check_size(x, DEFAULT_MAX_TOKENS)?;
    Ok(perp_within(a, &x.anti_cliques()))
}

/// B⊥ for a set of anti-cliques: all orthogonal cliques.
pub fn perp_of_anti(b: &[BitSet], x: &Space) -> Result<Vec<BitSet>> {
    check_size(x, DEFAULT_MAX_TOKENS)?;
    Ok(perp_within(b, &x.cliques(usize::MAX)))
}

fn check_size(x: &Space, cap: usize) -> Result<()> {
    if matches!(x.kind(), Kind::Oracle) {
        return Err(Error::Unsupported(format!(
            "{} has no exhaustive table",
            x.name()
        )));
    }
    if x.len() > cap {
        return Err(Error::Budget(format!(
            "{} has {} tokens, exhaustive cap is {cap}",
            x.name(),
            x.len()
        )));
    }
    Ok(())
}

/// Elements of `family` with no proper sub-element in the family.
///
/// `member` decides membership for arbitrary sets; the family is assumed
/// upward closed, so removing one token at a time suffices.
fn minimal_members(family: &[BitSet], member: impl Fn(&BitSet) -> bool) -> Vec<BitSet> {
    family
        .iter()
        .filter(|a| a.iter().all(|t| !member(&a.without(t))))
        .cloned()
        .collect()
}

/// A totality on a finite space, with its co-totality and strict parts.
#[derive(Clone, Debug)]
pub struct TotalityView {
    space: Arc<Space>,
    total: Vec<BitSet>,
    co: Vec<BitSet>,
    strict: Vec<BitSet>,
    co_strict: Vec<BitSet>,
}

impl TotalityView {
    /// T = A⊥⊥.
    pub fn from_generators(space: &Arc<Space>, gens: &[BitSet]) -> Result<TotalityView> {
        TotalityView::from_generators_capped(space, gens, DEFAULT_MAX_TOKENS)
    }

    pub fn from_generators_capped(
        space: &Arc<Space>,
        gens: &[BitSet],
        cap: usize,
    ) -> Result<TotalityView> {
        check_size(space, cap)?;
        for g in gens {
            if !space.is_clique(g)? {
                return Err(Error::Domain(format!(
                    "generator {} is not a clique",
                    space.set_label(g)
                )));
            }
        }
        let co = perp_within(gens, &space.anti_cliques());
        Ok(TotalityView::from_co(space, co))
    }

    /// T = B⊥ for a set of anti-cliques B.
    pub fn from_co_generators(space: &Arc<Space>, co_gens: &[BitSet]) -> Result<TotalityView> {
        check_size(space, DEFAULT_MAX_TOKENS)?;
        let total = perp_within(co_gens, &space.cliques(usize::MAX));
        let co = perp_within(&total, &space.anti_cliques());
        Ok(TotalityView::assemble(space, total, co))
    }

    /// A set claimed to be a totality; rejected unless T = T⊥⊥.
    pub fn from_total_set(space: &Arc<Space>, total: Vec<BitSet>) -> Result<TotalityView> {
        check_size(space, DEFAULT_MAX_TOKENS)?;
        let v = TotalityView::from_generators(space, &total)?;
        let mut given = total;
        given.sort();
        given.dedup();
        if given != v.total {
            return Err(Error::Internal(format!(
                "set of {} cliques is not bi-orthogonally closed",
                given.len()
            )));
        }
        Ok(v)
    }

    fn from_co(space: &Arc<Space>, co: Vec<BitSet>) -> TotalityView {
        let total = perp_within(&co, &space.cliques(usize::MAX));
        TotalityView::assemble(space, total, co)
    }

    fn assemble(space: &Arc<Space>, mut total: Vec<BitSet>, mut co: Vec<BitSet>) -> TotalityView {
        total.sort();
        co.sort();
        let strict = minimal_members(&total, |a| co.iter().all(|c| orthogonal(a, c)));
        let co_strict = minimal_members(&co, |c| total.iter().all(|a| orthogonal(a, c)));
        TotalityView {
            space: space.clone(),
            total,
            co,
            strict,
            co_strict,
        }
    }

    pub fn space(&self) -> &Arc<Space> {
        &self.space
    }

    /// T.
    pub fn total(&self) -> &[BitSet] {
        &self.total
    }

    /// T⊥.
    pub fn co(&self) -> &[BitSet] {
        &self.co
    }

    /// T°.
    pub fn strict(&self) -> &[BitSet] {
        &self.strict
    }

    /// (T⊥)°: the uni-covers.
    pub fn co_strict(&self) -> &[BitSet] {
        &self.co_strict
    }

    /// Membership in T by orthogonality to all of T⊥.
    pub fn is_member(&self, a: &BitSet) -> bool {
        self.space.is_clique_unchecked(a) && self.co.iter().all(|c| orthogonal(a, c))
    }

    /// Membership in T⊥ by orthogonality to all of T.
    pub fn is_co_member(&self, c: &BitSet) -> bool {
        self.space.is_anti_clique(c) && self.total.iter().all(|a| orthogonal(a, c))
    }

    pub fn is_strict(&self, a: &BitSet) -> bool {
        self.strict.binary_search(a).is_ok()
    }

    /// a° = ⋂{b ∈ T : b ⊆ a}, by greedy removal checked against the intersection.
    pub fn strict_part(&self, a: &BitSet) -> Result<BitSet> {
        if !self.is_member(a) {
            return Err(Error::Domain(format!(
                "{} is not total",
                self.space.set_label(a)
            )));
        }
        let mut cur = a.clone();
        for t in a {
            let smaller = cur.without(t);
            if self.is_member(&smaller) {
                cur = smaller;
            }
        }
        let meet = self
            .total
            .iter()
            .filter(|b| b.is_subset(a))
            .fold(a.clone(), |acc, b| acc.intersection(b));
        if meet != cur {
            return Err(Error::Internal(format!(
                "greedy strict part {} differs from intersection {}",
                self.space.set_label(&cur),
                self.space.set_label(&meet)
            )));
        }
        Ok(cur)
    }

    /// Strict part of a co-total anti-clique.
    pub fn co_strict_part(&self, c: &BitSet) -> Result<BitSet> {
        self.dual().strict_part(c)
    }

    /// The view on X⊥ with T and T⊥ exchanged.
    pub fn dual(&self) -> TotalityView {
        TotalityView {
            space: Space::dual(&self.space),
            total: self.co.clone(),
            co: self.total.clone(),
            strict: self.co_strict.clone(),
            co_strict: self.strict.clone(),
        }
    }

    /// Indices into `strict()` of the points above `a`: the block ↑a°.
    pub fn upper(&self, a: &BitSet) -> BitSet {
        self.strict
            .iter()
            .enumerate()
            .filter(|(_, p)| a.is_subset(p))
            .map(|(i, _)| i)
            .collect()
    }

    /// The unique token of a total clique met by an anti-clique.
    pub fn meet_token(a: &BitSet, c: &BitSet) -> Option<Token> {
        let m = a.intersection(c);
        if m.len() == 1 {
            m.first()
        } else {
            None
        }
    }
}

/// T_1 = {{•}}.
pub fn one_view() -> TotalityView {
    TotalityView::from_generators(&Space::one(), &[BitSet::singleton(0)]).expect("one token")
}

pub fn lift_dual(v: &TotalityView) -> TotalityView {
    v.dual()
}

/// T_{X⊗Y} = (T_X ⊗ T_Y)⊥⊥.
pub fn lift_tensor(vx: &TotalityView, vy: &TotalityView) -> Result<TotalityView> {
    let space = Space::tensor(&vx.space, &vy.space);
    let gens: Vec<BitSet> = vx
        .total
        .iter()
        .flat_map(|a| {
            vy.total
                .iter()
                .map(|b| space.product_set(a, b))
                .collect::<Vec<_>>()
        })
        .collect();
    let v = TotalityView::from_generators(&space, &gens)?;
    reverify(&v)?;
    Ok(v)
}

/// T_{X⊸Y} = {κ : κ̂[T_X] ⊆ T_Y}.
pub fn lift_lollipop(vx: &TotalityView, vy: &TotalityView) -> Result<TotalityView> {
    let space = Space::lollipop(&vx.space, &vy.space);
    check_size(&space, DEFAULT_MAX_TOKENS)?;
    let total: Vec<BitSet> = space
        .cliques(usize::MAX)
        .into_iter()
        .filter(|k| preserves_totality(&space, k, vx, vy))
        .collect();
    let co = perp_within(&total, &space.anti_cliques());
    let v = TotalityView::assemble(&space, total, co);
    reverify(&v)?;
    Ok(v)
}

fn preserves_totality(lolli: &Space, k: &BitSet, vx: &TotalityView, vy: &TotalityView) -> bool {
    let f = Trace::from_clique(lolli, k).expect("lollipop clique");
    vx.strict
        .iter()
        .all(|a| vy.is_member(&f.apply_unchecked(a)))
}

/// T_{!X} = (!T_X)⊥⊥.
pub fn lift_bang(vx: &TotalityView) -> Result<TotalityView> {
    let space = Space::bang(&vx.space)?;
    lift_bang_into(vx, &space)
}

pub fn lift_bang_into(vx: &TotalityView, bang: &Arc<Space>) -> Result<TotalityView> {
    let gens: Vec<BitSet> = vx.total.iter().map(|a| bang.promote(a)).collect();
    let v = TotalityView::from_generators(bang, &gens)?;
    reverify(&v)?;
    Ok(v)
}

fn reverify(v: &TotalityView) -> Result<()> {
    let back = perp_within(&v.co, &v.space.cliques(usize::MAX));
    if back != v.total {
        return Err(Error::Internal(format!(
            "lifted set on {} is not closed",
            v.space.name()
        )));
    }
    Ok(())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LiftConnective {
    Dual,
    Tensor,
    Lollipop,
    Bang,
    One,
}

pub fn lift_totality(connective: LiftConnective, views: &[&TotalityView]) -> Result<TotalityView> {
    let arity = match connective {
        LiftConnective::One => 0,
        LiftConnective::Dual | LiftConnective::Bang => 1,
        LiftConnective::Tensor | LiftConnective::Lollipop => 2,
    };
    if views.len() != arity {
        return Err(Error::Shape(format!("{connective:?} takes {arity} views")));
    }
    match connective {
        LiftConnective::One => Ok(one_view()),
        LiftConnective::Dual => Ok(lift_dual(views[0])),
        LiftConnective::Tensor => lift_tensor(views[0], views[1]),
        LiftConnective::Lollipop => lift_lollipop(views[0], views[1]),
        LiftConnective::Bang => lift_bang(views[0]),
    }
}

/// Tr(F) ∈ T_{X⊸Y}, decided directly and, when the lollipop is small enough,
/// through the lifted view; the two answers must agree.
pub fn is_total_trace(f: &Trace, vx: &TotalityView, vy: &TotalityView) -> Result<bool> {
    let direct = vx.total.iter().all(|a| vy.is_member(&f.apply_unchecked(a)));
    if f.linear_pairs().is_some() && vx.space.len() * vy.space.len() <= DEFAULT_MAX_TOKENS {
        let lv = lift_lollipop(vx, vy)?;
        let k = f.to_clique(lv.space())?;
        let via_view = lv.is_member(&k);
        if via_view != direct {
            return Err(Error::Internal("the two totality tests disagree".into()));
        }
    }
    Ok(direct)
}

/// Report of an internal completeness check.
#[derive(Clone, Debug)]
pub struct CompletenessReport {
    pub holds: bool,
    /// Strict part of the lifted totality.
    pub lifted_strict: Vec<BitSet>,
    /// Built from the strict parts of the operands.
    pub from_components: Vec<BitSet>,
    pub counterexample: Option<BitSet>,
}

fn compare(mut lhs: Vec<BitSet>, mut rhs: Vec<BitSet>) -> CompletenessReport {
    lhs.sort();
    lhs.dedup();
    rhs.sort();
    rhs.dedup();
    let l: HashSet<&BitSet> = lhs.iter().collect();
    let r: HashSet<&BitSet> = rhs.iter().collect();
    let counterexample = lhs
        .iter()
        .find(|a| !r.contains(a))
        .or_else(|| rhs.iter().find(|a| !l.contains(a)))
        .cloned();
    CompletenessReport {
        holds: counterexample.is_none(),
        lifted_strict: lhs,
        from_components: rhs,
        counterexample,
    }
}

/// (T_X⊗T_Y)⊥⊥° = T°_X ⊗ T°_Y, under its four nonemptiness hypotheses.
pub fn check_tensor_completeness(
    vx: &TotalityView,
    vy: &TotalityView,
) -> Result<CompletenessReport> {
    for (name, set) in [
        ("T_X", &vx.total),
        ("T_Y", &vy.total),
        ("T_X⊥", &vx.co),
        ("T_Y⊥", &vy.co),
    ] {
        if set.is_empty() {
            return Err(Error::Hypothesis(format!("{name} is empty")));
        }
    }
    let lifted = lift_tensor(vx, vy)?;
    let rhs: Vec<BitSet> = vx
        .strict
        .iter()
        .flat_map(|a| {
            vy.strict
                .iter()
                .map(|b| lifted.space.product_set(a, b))
                .collect::<Vec<_>>()
        })
        .collect();
    Ok(compare(lifted.strict.clone(), rhs))
}

/// (!T)⊥⊥° = !(T°).
pub fn check_bang_completeness(vx: &TotalityView) -> Result<CompletenessReport> {
    let lifted = lift_bang(vx)?;
    let rhs: Vec<BitSet> = vx.strict.iter().map(|a| lifted.space.promote(a)).collect();
    Ok(compare(lifted.strict.clone(), rhs))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CompletenessConnective {
    Tensor,
    Bang,
}

pub fn check_internal_completeness(
    connective: CompletenessConnective,
    views: &[&TotalityView],
) -> Result<CompletenessReport> {
    match (connective, views) {
        (CompletenessConnective::Tensor, [x, y]) => check_tensor_completeness(x, y),
        (CompletenessConnective::Bang, [x]) => check_bang_completeness(x),
        _ => Err(Error::Shape("wrong number of views".into())),
    }
}

/// 𝔞•𝔟 = {(x,y) : x ∈ 𝔞, y ∈ 𝔟}, an anti-clique of X⊗Y.
pub fn bullet(tensor: &Space, a: &BitSet, b: &BitSet) -> BitSet {
    tensor.product_set(a, b)
}

/// ∧ᵢ𝔠ᵢ: the finite cliques {x₁..xₙ} with xᵢ ∈ 𝔠ᵢ, as tokens of !X.
pub fn wedge(bang: &Space, covers: &[BitSet]) -> Result<BitSet> {
    let x = match bang.kind() {
        Kind::Bang(x) => x.clone(),
        _ => return Err(Error::Shape(format!("{} is not a bang space", bang.name()))),
    };
    let mut acc: Vec<BitSet> = vec![BitSet::new()];
    for c in covers {
        let mut next = Vec::new();
        for s in &acc {
            for t in c {
                let u = s.with(t);
                if x.is_clique_unchecked(&u) {
                    next.push(u);
                }
            }
        }
        next.sort();
        next.dedup();
        acc = next;
    }
    Ok(acc.iter().filter_map(|c| bang.bang_token(c)).collect())
}

/// {{x} : x ∈ 𝔠}.
pub fn singleton_wedge(bang: &Space, c: &BitSet) -> Result<BitSet> {
    wedge(bang, std::slice::from_ref(c))
}

/// (c¹, c²) for a total clique of X⊗Y; requires T_X⊥ and T_Y⊥ nonempty.
pub fn tensor_project(
    tensor: &Space,
    c: &BitSet,
    vx: &TotalityView,
    vy: &TotalityView,
) -> Result<(BitSet, BitSet)> {
    if vx.co.is_empty() || vy.co.is_empty() {
        return Err(Error::Hypothesis(
            "projection needs nonempty co-totalities".into(),
        ));
    }
    Ok(tensor.projections(c))
}

/// α¹ = {x : {x} ∈ α ∩ ∧𝔠 for some 𝔠 ∈ T⊥}.
pub fn bang_project(bang: &Space, alpha: &BitSet, vx: &TotalityView) -> Result<BitSet> {
    let mut out = BitSet::new();
    for c in &vx.co {
        let w = singleton_wedge(bang, c)?;
        for t in alpha.intersection(&w).iter() {
            out.insert(bang.bang_clique(t).unwrap().first().unwrap());
        }
    }
    Ok(out)
}

#[derive(Clone, Debug)]
pub enum Witness {
    Bullet(BitSet),
    Wedge(BitSet),
    SingletonWedge(BitSet),
    TensorProject(BitSet, BitSet),
    BangProject(BitSet),
}

/// Outcome of the total extension check.
#[derive(Clone, Debug)]
pub struct ExtensionReport {
    pub holds: bool,
    pub closure_size: usize,
    /// A clique of A⊥⊥ whose image is not in B⊥⊥.
    pub failure: Option<BitSet>,
}

/// F[A] ⊆ B implies F[A⊥⊥] ⊆ B⊥⊥, checked exhaustively. Empty A or B is
/// rejected.
pub fn total_extension_check(f: &Trace, a: &[BitSet], b: &[BitSet]) -> Result<ExtensionReport> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::Precondition("A and B must be nonempty".into()));
    }
    if f.linear_pairs().is_none() {
        return Err(Error::Unsupported(
            "total extension for stable traces".into(),
        ));
    }
    let bset: HashSet<&BitSet> = b.iter().collect();
    for x in a {
        let fx = f.apply(x)?;
        if !bset.contains(&fx) {
            return Err(Error::Precondition(format!(
                "F({}) = {} is not in B",
                f.src().set_label(x),
                f.dst().set_label(&fx)
            )));
        }
    }
    let va = TotalityView::from_generators(f.src(), a)?;
    let vb = TotalityView::from_generators(f.dst(), b)?;
    let failure = va
        .total()
        .iter()
        .find(|x| !vb.is_member(&f.apply_unchecked(x)))
        .cloned();
    Ok(ExtensionReport {
        holds: failure.is_none(),
        closure_size: va.total().len(),
        failure,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn f2() -> Arc<Space> {
        Space::atom_named("F2", &["p", "q"], &[]).unwrap()
    }
    fn c2() -> Arc<Space> {
        Space::atom_named("C2", &["u", "v"], &[("u", "v")]).unwrap()
    }
    fn s(v: &[usize]) -> BitSet {
        v.iter().copied().collect()
    }
    fn f2_view() -> TotalityView {
        TotalityView::from_generators(&f2(), &[s(&[0]), s(&[1])]).unwrap()
    }
    fn c2_view() -> TotalityView {
        TotalityView::from_generators(&c2(), &[s(&[0, 1])]).unwrap()
    }

    #[test]
    fn orthogonal_examples() {
        assert!(orthogonal(&s(&[0]), &s(&[0])));
        assert!(!orthogonal(&s(&[0]), &s(&[1])));
    }

    #[test]
    fn perp_examples() {
        assert_eq!(
            perp_set(&[s(&[0]), s(&[1])], &f2()).unwrap(),
            vec![s(&[0, 1])]
        );
        assert_eq!(
            perp_set(&[s(&[0, 1])], &c2()).unwrap(),
            vec![s(&[0]), s(&[1])]
        );
        assert_eq!(perp_set(&[], &f2()).unwrap(), f2().anti_cliques());
    }

    #[test]
    fn strict_part_examples() {
        let v = f2_view();
        assert_eq!(v.strict_part(&s(&[0])).unwrap(), s(&[0]));
        // an isolated token w that no generator mentions
        let x = Space::atom_named("F2w", &["p", "q", "w"], &[("p", "w"), ("q", "w")]).unwrap();
        let v = TotalityView::from_generators(&x, &[s(&[0]), s(&[1])]).unwrap();
        assert_eq!(v.strict_part(&s(&[0, 2])).unwrap(), s(&[0]));
        assert!(v.strict_part(&s(&[2])).is_err());
    }

    #[test]
    fn lift_examples() {
        let t = lift_tensor(&f2_view(), &f2_view()).unwrap();
        assert_eq!(t.strict().len(), 4);
        assert!(t.strict().iter().all(|a| a.len() == 1));

        let b = lift_bang(&f2_view()).unwrap();
        let names: Vec<String> = b.strict().iter().map(|a| b.space().set_label(a)).collect();
        assert_eq!(names, vec!["{{} {p}}", "{{} {q}}"]);

        let l = lift_lollipop(&f2_view(), &f2_view()).unwrap();
        let id = Trace::identity(&f2()).to_clique(l.space()).unwrap();
        assert!(l.is_member(&id));
    }

    #[test]
    fn is_total_examples() {
        assert!(is_total_trace(&Trace::identity(&f2()), &f2_view(), &f2_view()).unwrap());
        let empty = Trace::linear(&f2(), &c2(), []).unwrap();
        assert!(!is_total_trace(&empty, &f2_view(), &c2_view()).unwrap());
    }

    #[test]
    fn witness_examples() {
        let (vf, vc) = (f2_view(), c2_view());
        let tensor = Space::tensor(&f2(), &c2());
        let bl = bullet(&tensor, &s(&[0, 1]), &s(&[0]));
        assert_eq!(tensor.set_label(&bl), "{(p,u) (q,u)}");
        let lifted = lift_tensor(&vf, &vc).unwrap();
        assert!(lifted.is_co_member(&bl));

        let bang = Space::bang(&f2()).unwrap();
        let w = wedge(&bang, &[s(&[0, 1])]).unwrap();
        assert_eq!(bang.set_label(&w), "{{p} {q}}");
        assert!(lift_bang(&vf).unwrap().is_co_member(&w));

        let pu = s(&[tensor.pair(0, 0).unwrap()]);
        assert_eq!(
            tensor_project(&tensor, &pu, &vf, &vc).unwrap(),
            (s(&[0]), s(&[0]))
        );
    }

    #[test]
    fn completeness_examples() {
        let r = check_tensor_completeness(&f2_view(), &f2_view()).unwrap();
        assert!(r.holds);
        assert_eq!((r.lifted_strict.len(), r.from_components.len()), (4, 4));

        let r = check_bang_completeness(&c2_view()).unwrap();
        assert!(r.holds);
        let bang = Space::bang(&c2()).unwrap();
        assert_eq!(r.lifted_strict, vec![bang.promote(&s(&[0, 1]))]);

        // T_Y⊥ empty: every clique of C2 is total when generated by ∅ alone
        let all = TotalityView::from_generators(&c2(), &[BitSet::new()]).unwrap();
        assert!(all.co().is_empty());
        assert!(matches!(
            check_tensor_completeness(&f2_view(), &all),
            Err(Error::Hypothesis(_))
        ));
    }

    #[test]
    fn extension_examples() {
        let id = Trace::identity(&f2());
        let r = total_extension_check(&id, &[s(&[0])], &[s(&[0])]).unwrap();
        assert!(r.holds);
        assert_eq!(r.closure_size, 1);
        assert!(matches!(
            total_extension_check(&id, &[], &[s(&[0])]),
            Err(Error::Precondition(_))
        ));
        assert!(matches!(
            total_extension_check(&id, &[s(&[0])], &[s(&[1])]),
            Err(Error::Precondition(_))
        ));
    }
}
