//! Coherence spaces, cliques and the connectives 1, ⊥, dual, ⊗, ⊸ and !.

use crate::bits::BitSet;
use crate::error::{Error, Result};
use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

/// Canonical index of a token inside its space.
pub type Token = usize;

/// Label of the unique token of 1 and ⊥.
pub const UNIT_LABEL: &str = "•";

/// How a space was built.
#[derive(Clone)]
pub enum Kind {
    Atom,
    One,
    Dual(Arc<Space>),
    Tensor(Arc<Space>, Arc<Space>),
    Lollipop(Arc<Space>, Arc<Space>),
    Bang(Arc<Space>),
    /// Large finite space whose coherence is computed on demand.
    Oracle,
}

impl fmt::Debug for Kind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Kind::Atom => "atom",
            Kind::One => "one",
            Kind::Dual(_) => "dual",
            Kind::Tensor(..) => "tensor",
            Kind::Lollipop(..) => "lollipop",
            Kind::Bang(_) => "bang",
            Kind::Oracle => "oracle",
        };
        f.write_str(s)
    }
}

/// Connective selector for [`build_space`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Connective {
    Dual,
    Tensor,
    Lollipop,
    Bang,
    One,
}

/// Strict coherence computed on demand, for spaces too large to tabulate.
pub trait CoherenceOracle: Send + Sync {
    fn strictly_coherent(&self, x: Token, y: Token) -> bool;
    /// All tokens strictly coherent with `x`.
    fn neighbours(&self, x: Token) -> Vec<Token>;
}

#[derive(Clone)]
enum Table {
    Rows(Vec<BitSet>),
    Oracle(Arc<dyn CoherenceOracle>),
}

/// A finite coherence space.
///
/// Tokens are `0..len()`. Coherence is stored as strict-coherence rows; the
/// reflexive closure is implicit.
#[derive(Clone)]
pub struct Space {
    name: String,
    kind: Kind,
    labels: Vec<String>,
    index: HashMap<String, Token>,
    table: Table,
    bang_tokens: Vec<BitSet>,
}

impl fmt::Debug for Space {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "Space({} {:?}, {} tokens)",
            self.name,
            self.kind,
            self.len()
        )
    }
}

fn index_of(labels: &[String]) -> HashMap<String, Token> {
    labels
        .iter()
        .enumerate()
        .map(|(i, l)| (l.clone(), i))
        .collect()
}

impl Space {
    /// An atomic space from labels and unordered strict-coherence pairs.
    pub fn atom(
        name: &str,
        labels: Vec<String>,
        strict_pairs: &[(Token, Token)],
    ) -> Result<Arc<Space>> {
        let n = labels.len();
        let index = index_of(&labels);
        if index.len() != n {
            return Err(Error::Domain(format!(
                "space {name}: duplicate token label"
            )));
        }
        let mut rows = vec![BitSet::new(); n];
        for &(x, y) in strict_pairs {
            if x >= n || y >= n {
                return Err(Error::Domain(format!(
                    "space {name}: pair ({x},{y}) out of range"
                )));
            }
            if x == y {
                return Err(Error::Domain(format!(
                    "space {name}: strict pair on a single token {x}"
                )));
            }
            rows[x].insert(y);
            rows[y].insert(x);
        }
        Ok(Arc::new(Space {
            name: name.to_string(),
            kind: Kind::Atom,
            labels,
            index,
            table: Table::Rows(rows),
            bang_tokens: Vec::new(),
        }))
    }

    /// Atomic space with labels given as string slices.
    pub fn atom_named(
        name: &str,
        labels: &[&str],
        strict_pairs: &[(&str, &str)],
    ) -> Result<Arc<Space>> {
        let labels: Vec<String> = labels.iter().map(|s| s.to_string()).collect();
        let idx = index_of(&labels);
        let mut pairs = Vec::new();
        for (a, b) in strict_pairs {
            let x = *idx
                .get(*a)
                .ok_or_else(|| Error::Domain(format!("unknown token {a}")))?;
            let y = *idx
                .get(*b)
                .ok_or_else(|| Error::Domain(format!("unknown token {b}")))?;
            pairs.push((x, y));
        }
        Space::atom(name, labels, &pairs)
    }

    /// A large finite space with coherence supplied by an oracle.
    pub fn from_oracle(
        name: &str,
        labels: Vec<String>,
        oracle: Arc<dyn CoherenceOracle>,
    ) -> Arc<Space> {
        let index = index_of(&labels);
        Arc::new(Space {
            name: name.to_string(),
            kind: Kind::Oracle,
            labels,
            index,
            table: Table::Oracle(oracle),
            bang_tokens: Vec::new(),
        })
    }

    /// The one-token space. 1 and ⊥ coincide.
    pub fn one() -> Arc<Space> {
        Arc::new(Space {
            name: "1".to_string(),
            kind: Kind::One,
            labels: vec![UNIT_LABEL.to_string()],
            index: index_of(&[UNIT_LABEL.to_string()]),
            table: Table::Rows(vec![BitSet::new()]),
            bang_tokens: Vec::new(),
        })
    }

    pub fn bottom() -> Arc<Space> {
        Space::one()
    }

    pub fn dual(x: &Arc<Space>) -> Arc<Space> {
        let n = x.len();
        let rows = (0..n)
            .map(|t| {
                let r = x.row(t);
                let mut out = BitSet::full(n).difference(&r);
                out.remove(t);
                out
            })
            .collect();
        Arc::new(Space {
            name: format!("{}^", x.name),
            kind: Kind::Dual(x.clone()),
            labels: x.labels.clone(),
            index: x.index.clone(),
            table: Table::Rows(rows),
            bang_tokens: Vec::new(),
        })
    }

    pub fn tensor(x: &Arc<Space>, y: &Arc<Space>) -> Arc<Space> {
        Space::product(x, y, false)
    }

    pub fn lollipop(x: &Arc<Space>, y: &Arc<Space>) -> Arc<Space> {
        Space::product(x, y, true)
    }

    /// X ⊗ Y with coherence computed from the factors on demand.
    pub fn tensor_lazy(x: &Arc<Space>, y: &Arc<Space>) -> Arc<Space> {
        let mut labels = Vec::with_capacity(x.len() * y.len());
        for i in 0..x.len() {
            for j in 0..y.len() {
                labels.push(format!("({},{})", x.labels[i], y.labels[j]));
            }
        }
        let index = index_of(&labels);
        Arc::new(Space {
            name: format!("({} * {})", x.name, y.name),
            kind: Kind::Tensor(x.clone(), y.clone()),
            labels,
            index,
            table: Table::Oracle(Arc::new(TensorOracle {
                x: x.clone(),
                y: y.clone(),
            })),
            bang_tokens: Vec::new(),
        })
    }

    fn product(x: &Arc<Space>, y: &Arc<Space>, lolli: bool) -> Arc<Space> {
        let (nx, ny) = (x.len(), y.len());
        let n = nx * ny;
        let mut labels = Vec::with_capacity(n);
        for i in 0..nx {
            for j in 0..ny {
                labels.push(format!("({},{})", x.labels[i], y.labels[j]));
            }
        }
        let mut rows = vec![BitSet::new(); n];
        for s in 0..n {
            let (z, a) = (s / ny, s % ny);
            for t in (s + 1)..n {
                let (w, b) = (t / ny, t % ny);
                let ok = if lolli {
                    !x.coh(z, w) || y.strict(a, b)
                } else {
                    x.coh(z, w) && y.coh(a, b)
                };
                if ok {
                    rows[s].insert(t);
                    rows[t].insert(s);
                }
            }
        }
        let (kind, sym) = if lolli {
            (Kind::Lollipop(x.clone(), y.clone()), "-o")
        } else {
            (Kind::Tensor(x.clone(), y.clone()), "*")
        };
        let index = index_of(&labels);
        Arc::new(Space {
            name: format!("({} {} {})", x.name, sym, y.name),
            kind,
            labels,
            index,
            table: Table::Rows(rows),
            bang_tokens: Vec::new(),
        })
    }

    /// !X, whose tokens are the finite cliques of X in canonical order.
    pub fn bang(x: &Arc<Space>) -> Result<Arc<Space>> {
        Space::bang_with_budget(x, 1 << 16)
    }

    pub fn bang_with_budget(x: &Arc<Space>, budget: usize) -> Result<Arc<Space>> {
        let cliques = x.cliques_with_budget(usize::MAX, budget)?;
        let n = cliques.len();
        let mut rows = vec![BitSet::new(); n];
        for s in 0..n {
            for t in (s + 1)..n {
                if x.is_clique_unchecked(&cliques[s].union(&cliques[t])) {
                    rows[s].insert(t);
                    rows[t].insert(s);
                }
            }
        }
        let labels: Vec<String> = cliques.iter().map(|c| x.set_label(c)).collect();
        let index = index_of(&labels);
        Ok(Arc::new(Space {
            name: format!("!{}", x.name),
            kind: Kind::Bang(x.clone()),
            labels,
            index,
            table: Table::Rows(rows),
            bang_tokens: cliques,
        }))
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn kind(&self) -> &Kind {
        &self.kind
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn label(&self, t: Token) -> &str {
        &self.labels[t]
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn token(&self, label: &str) -> Option<Token> {
        self.index.get(label).copied()
    }

    /// Render a token set as `{a b c}`.
    pub fn set_label(&self, s: &BitSet) -> String {
        let parts: Vec<&str> = s.iter().map(|t| self.labels[t].as_str()).collect();
        format!("{{{}}}", parts.join(" "))
    }

    /// Parse `{a b}` or a whitespace separated label list into a token set.
    pub fn parse_set(&self, text: &str) -> Result<BitSet> {
        let inner = text.trim().trim_start_matches('{').trim_end_matches('}');
        let mut out = BitSet::new();
        for part in split_labels(inner) {
            let t = self
                .token(&part)
                .ok_or_else(|| Error::Domain(format!("unknown token {part} in {}", self.name)))?;
            out.insert(t);
        }
        Ok(out)
    }

    fn check(&self, t: Token) -> Result<()> {
        if t < self.len() {
            Ok(())
        } else {
            Err(Error::Domain(format!(
                "token {t} does not belong to {}",
                self.name
            )))
        }
    }

    /// Strict coherence row of `t`, as a set.
    pub fn row(&self, t: Token) -> BitSet {
        match &self.table {
            Table::Rows(r) => r[t].clone(),
            Table::Oracle(o) => o.neighbours(t).into_iter().collect(),
        }
    }

    /// Tokens strictly coherent with `t`.
    pub fn neighbours(&self, t: Token) -> Vec<Token> {
        match &self.table {
            Table::Rows(r) => r[t].to_vec(),
            Table::Oracle(o) => o.neighbours(t),
        }
    }

    /// Strict coherence, no bounds checks.
    pub fn strict(&self, x: Token, y: Token) -> bool {
        match &self.table {
            Table::Rows(r) => r[x].contains(y),
            Table::Oracle(o) => x != y && o.strictly_coherent(x, y),
        }
    }

    /// Coherence (reflexive), no bounds checks.
    pub fn coh(&self, x: Token, y: Token) -> bool {
        x == y || self.strict(x, y)
    }

    pub fn coherent(&self, x: Token, y: Token) -> Result<bool> {
        self.check(x)?;
        self.check(y)?;
        Ok(self.coh(x, y))
    }

    pub fn is_clique(&self, s: &BitSet) -> Result<bool> {
        if let Some(m) = s.last() {
            self.check(m)?;
        }
        Ok(self.is_clique_unchecked(s))
    }

    pub fn is_clique_unchecked(&self, s: &BitSet) -> bool {
        match &self.table {
            Table::Rows(r) => s.iter().all(|x| s.without(x).is_subset(&r[x])),
            Table::Oracle(_) => {
                let v = s.to_vec();
                v.iter()
                    .enumerate()
                    .all(|(i, &x)| v[i + 1..].iter().all(|&y| self.strict(x, y)))
            }
        }
    }

    /// Cliques of the dual space, computed without building it.
    pub fn is_anti_clique(&self, s: &BitSet) -> bool {
        let v = s.to_vec();
        v.iter()
            .enumerate()
            .all(|(i, &x)| v[i + 1..].iter().all(|&y| !self.strict(x, y)))
    }

    /// For tensor and lollipop spaces, split a token into its components.
    pub fn components(&self, t: Token) -> Option<(Token, Token)> {
        match &self.kind {
            Kind::Tensor(_, y) | Kind::Lollipop(_, y) => Some((t / y.len(), t % y.len())),
            _ => None,
        }
    }

    /// For tensor and lollipop spaces, the token (x,y).
    pub fn pair(&self, x: Token, y: Token) -> Option<Token> {
        match &self.kind {
            Kind::Tensor(a, b) | Kind::Lollipop(a, b) if x < a.len() && y < b.len() => {
                Some(x * b.len() + y)
            }
            _ => None,
        }
    }

    /// Operands of a binary connective.
    pub fn factors(&self) -> Option<(&Arc<Space>, &Arc<Space>)> {
        match &self.kind {
            Kind::Tensor(a, b) | Kind::Lollipop(a, b) => Some((a, b)),
            _ => None,
        }
    }

    /// Operand of ! or dual.
    pub fn operand(&self) -> Option<&Arc<Space>> {
        match &self.kind {
            Kind::Bang(a) | Kind::Dual(a) => Some(a),
            _ => None,
        }
    }

    /// For a bang space, the finite clique a token stands for.
    pub fn bang_clique(&self, t: Token) -> Option<&BitSet> {
        self.bang_tokens.get(t)
    }

    /// For a bang space, the token naming a finite clique of the operand.
    pub fn bang_token(&self, c: &BitSet) -> Option<Token> {
        self.bang_tokens.binary_search(c).ok()
    }

    /// a⊗b as a set of tokens of this tensor (or lollipop) space.
    pub fn product_set(&self, a: &BitSet, b: &BitSet) -> BitSet {
        let mut out = BitSet::new();
        for x in a {
            for y in b {
                out.insert(self.pair(x, y).expect("product of a non-product space"));
            }
        }
        out
    }

    /// Projections of a set of pair tokens.
    pub fn projections(&self, c: &BitSet) -> (BitSet, BitSet) {
        let mut l = BitSet::new();
        let mut r = BitSet::new();
        for t in c {
            let (x, y) = self
                .components(t)
                .expect("projection of a non-product space");
            l.insert(x);
            r.insert(y);
        }
        (l, r)
    }

    /// !a: all finite subsets of a clique, as a set of tokens of this bang space.
    pub fn promote(&self, a: &BitSet) -> BitSet {
        self.bang_tokens
            .iter()
            .enumerate()
            .filter(|(_, c)| c.is_subset(a))
            .map(|(i, _)| i)
            .collect()
    }

    /// All cliques up to a size, canonical order.
    pub fn cliques(&self, max_size: usize) -> Vec<BitSet> {
        self.cliques_with_budget(max_size, usize::MAX)
            .expect("unbounded budget")
    }

    pub fn cliques_with_budget(&self, max_size: usize, budget: usize) -> Result<Vec<BitSet>> {
        let rows: Vec<BitSet> = (0..self.len()).map(|t| self.row(t)).collect();
        collect_cliques(&rows, max_size, budget)
    }

    /// All anti-cliques (cliques of the dual), canonical order.
    pub fn anti_cliques(&self) -> Vec<BitSet> {
        self.anti_cliques_with_budget(usize::MAX)
            .expect("unbounded budget")
    }

    pub fn anti_cliques_with_budget(&self, budget: usize) -> Result<Vec<BitSet>> {
        let n = self.len();
        let rows: Vec<BitSet> = (0..n)
            .map(|t| {
                let mut r = BitSet::full(n).difference(&self.row(t));
                r.remove(t);
                r
            })
            .collect();
        collect_cliques(&rows, usize::MAX, budget)
    }
}

fn collect_cliques(rows: &[BitSet], max_size: usize, budget: usize) -> Result<Vec<BitSet>> {
    fn go(
        rows: &[BitSet],
        cur: &BitSet,
        cand: &BitSet,
        max_size: usize,
        budget: usize,
        out: &mut Vec<BitSet>,
    ) -> Result<()> {
        if out.len() >= budget {
            return Err(Error::Budget(format!("more than {budget} cliques")));
        }
        out.push(cur.clone());
        if cur.len() >= max_size {
            return Ok(());
        }
        for t in cand {
            let mut next_cand = cand.intersection(&rows[t]);
            // only extend upwards so each clique is produced once
            for u in cand.iter().take_while(|&u| u <= t) {
                next_cand.remove(u);
            }
            go(rows, &cur.with(t), &next_cand, max_size, budget, out)?;
        }
        Ok(())
    }
    let mut out = Vec::new();
    go(
        rows,
        &BitSet::new(),
        &BitSet::full(rows.len()),
        max_size,
        budget,
        &mut out,
    )?;
    out.sort();
    Ok(out)
}

pub(crate) fn split_labels(s: &str) -> Vec<String> {
    s.split_whitespace().map(|p| p.to_string()).collect()
}

struct TensorOracle {
    x: Arc<Space>,
    y: Arc<Space>,
}

impl CoherenceOracle for TensorOracle {
    fn strictly_coherent(&self, s: Token, t: Token) -> bool {
        let ny = self.y.len();
        s != t && self.x.coh(s / ny, t / ny) && self.y.coh(s % ny, t % ny)
    }

    fn neighbours(&self, s: Token) -> Vec<Token> {
        let ny = self.y.len();
        let (z, a) = (s / ny, s % ny);
        let mut xs = self.x.neighbours(z);
        xs.push(z);
        xs.sort_unstable();
        let mut ys = self.y.neighbours(a);
        ys.push(a);
        ys.sort_unstable();
        let mut out = Vec::with_capacity(xs.len() * ys.len());
        for &w in &xs {
            for &b in &ys {
                if (w, b) != (z, a) {
                    out.push(w * ny + b);
                }
            }
        }
        out
    }
}

/// Build a compound space from a connective and its operands.
pub fn build_space(connective: Connective, operands: &[Arc<Space>]) -> Result<Arc<Space>> {
    let arity = match connective {
        Connective::One => 0,
        Connective::Dual | Connective::Bang => 1,
        Connective::Tensor | Connective::Lollipop => 2,
    };
    if operands.len() != arity {
        return Err(Error::Shape(format!(
            "{connective:?} takes {arity} operands, got {}",
            operands.len()
        )));
    }
    Ok(match connective {
        Connective::One => Space::one(),
        Connective::Dual => Space::dual(&operands[0]),
        Connective::Tensor => Space::tensor(&operands[0], &operands[1]),
        Connective::Lollipop => Space::lollipop(&operands[0], &operands[1]),
        Connective::Bang => Space::bang(&operands[0])?,
    })
}

/// Countable spaces given by an index-enumerated predicate.
pub trait LazySpace {
    fn strictly_coherent(&self, x: u64, y: u64) -> bool;
    fn label(&self, x: u64) -> String;
}

/// Finite cliques of a lazy space, by increasing maximum index and then size,
/// looking only at tokens `0..max_index`.
///
/// This is also the token enumeration of the bang of a lazy space.
pub fn lazy_cliques<S: LazySpace + ?Sized>(
    space: &S,
    max_index: u64,
    max_size: usize,
    budget: usize,
) -> Result<Vec<Vec<u64>>> {
    let mut out: Vec<Vec<u64>> = vec![Vec::new()];
    for top in 0..max_index {
        let below: Vec<u64> = (0..top)
            .filter(|&i| space.strictly_coherent(i, top))
            .collect();
        let mut layer: Vec<Vec<u64>> = Vec::new();
        let mut stack: Vec<(Vec<u64>, usize)> = vec![(Vec::new(), 0)];
        while let Some((cur, from)) = stack.pop() {
            let mut c = cur.clone();
            c.push(top);
            if c.len() <= max_size {
                layer.push(c);
            }
            if cur.len() + 2 > max_size {
                continue;
            }
            for (k, &t) in below.iter().enumerate().skip(from) {
                if cur.iter().all(|&u| space.strictly_coherent(u, t)) {
                    let mut nxt = cur.clone();
                    nxt.push(t);
                    stack.push((nxt, k + 1));
                }
            }
        }
        for c in layer.iter_mut() {
            c.sort_unstable();
        }
        layer.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)));
        out.extend(layer);
        if out.len() > budget {
            return Err(Error::Budget(format!(
                "more than {budget} finite cliques below index {max_index}"
            )));
        }
    }
    Ok(out)
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

    #[test]
    fn f2_table() {
        let s = f2();
        assert!(s.coherent(0, 0).unwrap());
        assert!(!s.coherent(0, 1).unwrap());
        let d = Space::dual(&s);
        assert!(d.coherent(0, 1).unwrap());
        assert!(s.coherent(0, 5).is_err());
    }

    #[test]
    fn clique_examples() {
        assert!(f2().is_clique(&BitSet::new()).unwrap());
        assert!(c2().is_clique(&BitSet::from_iter([0, 1])).unwrap());
        assert!(!f2().is_clique(&BitSet::from_iter([0, 1])).unwrap());
    }

    #[test]
    fn build_examples() {
        let t = build_space(Connective::Tensor, &[f2(), f2()]).unwrap();
        assert_eq!(t.len(), 4);
        assert!((0..4).all(|i| (0..4).all(|j| i == j || !t.strict(i, j))));

        let b = Space::bang(&f2()).unwrap();
        let labels: Vec<&str> = b.labels().iter().map(|s| s.as_str()).collect();
        assert_eq!(labels, vec!["{}", "{p}", "{q}"]);
        assert!(b.strict(0, 1) && b.strict(0, 2) && !b.strict(1, 2));

        let l = build_space(Connective::Lollipop, &[Space::one(), Space::one()]).unwrap();
        assert_eq!(l.len(), 1);
        assert!(build_space(Connective::Tensor, &[f2()]).is_err());
    }

    #[test]
    fn enumerate_examples() {
        let names =
            |s: &Arc<Space>, v: Vec<BitSet>| v.iter().map(|c| s.set_label(c)).collect::<Vec<_>>();
        assert_eq!(names(&f2(), f2().cliques(2)), vec!["{}", "{p}", "{q}"]);
        assert_eq!(
            names(&c2(), c2().cliques(2)),
            vec!["{}", "{u}", "{v}", "{u v}"]
        );
        let one = Space::one();
        assert_eq!(names(&one, one.cliques(1)), vec!["{}", "{•}"]);
        assert!(c2().cliques_with_budget(2, 2).is_err());
    }

    struct Chain;
    impl LazySpace for Chain {
        fn strictly_coherent(&self, x: u64, y: u64) -> bool {
            x != y
        }
        fn label(&self, x: u64) -> String {
            x.to_string()
        }
    }

    #[test]
    fn lazy_clique_order() {
        let v = lazy_cliques(&Chain, 3, 3, 100).unwrap();
        assert_eq!(
            v,
            vec![
                vec![],
                vec![0],
                vec![1],
                vec![0, 1],
                vec![2],
                vec![0, 2],
                vec![1, 2],
                vec![0, 1, 2]
            ]
        );
        assert!(lazy_cliques(&Chain, 10, 10, 20).is_err());
    }
}
