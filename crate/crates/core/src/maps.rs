//! Linear and stable maps as traces.

use crate::bits::BitSet;
use crate::error::{Error, Result};
use crate::space::{Kind, Space, Token};
use std::collections::{BTreeSet, HashMap};
use std::fmt::Write as _;
use std::sync::Arc;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TraceKind {
    Linear,
    Stable,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Pairs {
    Linear(BTreeSet<(Token, Token)>),
    Stable(BTreeSet<(BitSet, Token)>),
}

/// The trace of a linear map X ⊸ Y or a stable map X → Y.
#[derive(Clone, Debug)]
pub struct Trace {
    src: Arc<Space>,
    dst: Arc<Space>,
    pairs: Pairs,
}

/// Two pairs that break the clique condition of a trace.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Violation {
    pub first: String,
    pub second: String,
}

impl Trace {
    pub fn linear(
        src: &Arc<Space>,
        dst: &Arc<Space>,
        pairs: impl IntoIterator<Item = (Token, Token)>,
    ) -> Result<Trace> {
        let pairs: BTreeSet<(Token, Token)> = pairs.into_iter().collect();
        for &(x, y) in &pairs {
            if x >= src.len() || y >= dst.len() {
                return Err(Error::Domain(format!(
                    "pair ({x},{y}) outside {} -> {}",
                    src.name(),
                    dst.name()
                )));
            }
        }
        Ok(Trace {
            src: src.clone(),
            dst: dst.clone(),
            pairs: Pairs::Linear(pairs),
        })
    }

    pub fn stable(
        src: &Arc<Space>,
        dst: &Arc<Space>,
        pairs: impl IntoIterator<Item = (BitSet, Token)>,
    ) -> Result<Trace> {
        let pairs: BTreeSet<(BitSet, Token)> = pairs.into_iter().collect();
        for (a, y) in &pairs {
            if *y >= dst.len() || !src.is_clique(a)? {
                return Err(Error::Domain(format!(
                    "pair ({}, {y}) is not a finite clique / token pair",
                    src.set_label(a)
                )));
            }
        }
        Ok(Trace {
            src: src.clone(),
            dst: dst.clone(),
            pairs: Pairs::Stable(pairs),
        })
    }

    /// Identity trace on a space.
    pub fn identity(x: &Arc<Space>) -> Trace {
        Trace::linear(x, x, (0..x.len()).map(|t| (t, t))).expect("in range")
    }

    pub fn kind(&self) -> TraceKind {
        match self.pairs {
            Pairs::Linear(_) => TraceKind::Linear,
            Pairs::Stable(_) => TraceKind::Stable,
        }
    }

    pub fn src(&self) -> &Arc<Space> {
        &self.src
    }

    pub fn dst(&self) -> &Arc<Space> {
        &self.dst
    }

    pub fn pairs(&self) -> &Pairs {
        &self.pairs
    }

    pub fn len(&self) -> usize {
        match &self.pairs {
            Pairs::Linear(p) => p.len(),
            Pairs::Stable(p) => p.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn linear_pairs(&self) -> Option<&BTreeSet<(Token, Token)>> {
        match &self.pairs {
            Pairs::Linear(p) => Some(p),
            Pairs::Stable(_) => None,
        }
    }

    pub fn stable_pairs(&self) -> Option<&BTreeSet<(BitSet, Token)>> {
        match &self.pairs {
            Pairs::Stable(p) => Some(p),
            Pairs::Linear(_) => None,
        }
    }

    /// Pair sets and token counts agree; spaces are compared by shape only.
    pub fn same_as(&self, other: &Trace) -> bool {
        self.pairs == other.pairs
            && self.src.len() == other.src.len()
            && self.dst.len() == other.dst.len()
    }

    fn linear_label(&self, p: (Token, Token)) -> String {
        format!("({}, {})", self.src.label(p.0), self.dst.label(p.1))
    }

    fn stable_label(&self, p: &(BitSet, Token)) -> String {
        format!("({}, {})", self.src.set_label(&p.0), self.dst.label(p.1))
    }

    /// The first pair of pairs breaking the clique condition, if any.
    pub fn violation(&self) -> Option<Violation> {
        match &self.pairs {
            Pairs::Linear(pairs) => {
                let mut outs: HashMap<Token, Vec<Token>> = HashMap::new();
                for &(x, y) in pairs {
                    outs.entry(x).or_default().push(y);
                }
                for &(z, x) in pairs {
                    let mut near = self.src.neighbours(z);
                    near.push(z);
                    near.sort_unstable();
                    for w in near {
                        for &y in outs.get(&w).map(Vec::as_slice).unwrap_or(&[]) {
                            if (w, y) != (z, x) && !self.dst.strict(x, y) {
                                let (a, b) = if (z, x) < (w, y) {
                                    ((z, x), (w, y))
                                } else {
                                    ((w, y), (z, x))
                                };
                                return Some(Violation {
                                    first: self.linear_label(a),
                                    second: self.linear_label(b),
                                });
                            }
                        }
                    }
                }
                None
            }
            Pairs::Stable(pairs) => {
                let v: Vec<&(BitSet, Token)> = pairs.iter().collect();
                // a partner's largest token is coherent with ours
                let mut by_last: HashMap<Token, Vec<usize>> = HashMap::new();
                let mut unsupported = Vec::new();
                for (i, p) in v.iter().enumerate() {
                    match p.0.last() {
                        Some(t) => by_last.entry(t).or_default().push(i),
                        None => unsupported.push(i),
                    }
                }
                for (i, p) in v.iter().enumerate() {
                    let mut cands: Vec<usize> = match p.0.last() {
                        None => (i + 1..v.len()).collect(),
                        Some(t) => {
                            let mut near = self.src.neighbours(t);
                            near.push(t);
                            near.iter()
                                .flat_map(|w| by_last.get(w).into_iter().flatten().copied())
                                .chain(unsupported.iter().copied())
                                .filter(|&j| j > i)
                                .collect()
                        }
                    };
                    cands.sort_unstable();
                    cands.dedup();
                    for q in cands.into_iter().map(|j| v[j]) {
                        if self.src.is_clique_unchecked(&p.0.union(&q.0))
                            && !self.dst.strict(p.1, q.1)
                        {
                            return Some(Violation {
                                first: self.stable_label(p),
                                second: self.stable_label(q),
                            });
                        }
                    }
                }
                None
            }
        }
    }

    pub fn is_valid(&self) -> bool {
        self.violation().is_none()
    }

    /// κ̂(a) for linear traces, the stable application otherwise.
    pub fn apply(&self, a: &BitSet) -> Result<BitSet> {
        if !self.src.is_clique(a)? {
            return Err(Error::Domain(format!(
                "{} is not a clique of {}",
                self.src.set_label(a),
                self.src.name()
            )));
        }
        let out = self.apply_unchecked(a);
        if !self.dst.is_clique_unchecked(&out) {
            return Err(Error::InvalidTrace(format!(
                "image {} of {} is not a clique",
                self.dst.set_label(&out),
                self.src.set_label(a)
            )));
        }
        Ok(out)
    }

    /// Application without clique checks, for exhaustive sweeps.
    pub fn apply_unchecked(&self, a: &BitSet) -> BitSet {
        match &self.pairs {
            Pairs::Linear(p) => p
                .iter()
                .filter(|(x, _)| a.contains(*x))
                .map(|&(_, y)| y)
                .collect(),
            Pairs::Stable(p) => p
                .iter()
                .filter(|(b, _)| b.is_subset(a))
                .map(|(_, y)| *y)
                .collect(),
        }
    }

    /// Sources of each output token within a clique: a singleton for linear
    /// traces, the minimal support for stable ones.
    pub fn supports(&self, a: &BitSet) -> Vec<(Token, BitSet)> {
        let mut out: Vec<(Token, BitSet)> = Vec::new();
        match &self.pairs {
            Pairs::Linear(p) => {
                for &(x, y) in p.iter().filter(|(x, _)| a.contains(*x)) {
                    out.push((y, BitSet::singleton(x)));
                }
            }
            Pairs::Stable(p) => {
                for (b, y) in p.iter().filter(|(b, _)| b.is_subset(a)) {
                    out.push((*y, b.clone()));
                }
            }
        }
        out.sort();
        out
    }

    /// The linear trace as a clique of X ⊸ Y.
    pub fn to_clique(&self, lolli: &Space) -> Result<BitSet> {
        let p = self.linear_pairs().ok_or(Error::Unsupported(
            "stable trace as a lollipop clique".into(),
        ))?;
        p.iter()
            .map(|&(x, y)| {
                lolli
                    .pair(x, y)
                    .ok_or(Error::Shape("space is not the matching lollipop".into()))
            })
            .collect()
    }

    /// Read a clique of X ⊸ Y (or X ⊗ Y) as a linear trace X → Y.
    pub fn from_clique(lolli: &Space, k: &BitSet) -> Result<Trace> {
        let (x, y) = lolli
            .factors()
            .ok_or(Error::Shape(format!("{} is not a lollipop", lolli.name())))?;
        let pairs: Vec<(Token, Token)> = k
            .iter()
            .map(|t| lolli.components(t).expect("product"))
            .collect();
        Trace::linear(x, y, pairs)
    }
}

/// Validation result with the first violating pair of pairs.
pub fn validate_trace(t: &Trace) -> (bool, Option<Violation>) {
    let v = t.violation();
    (v.is_none(), v)
}

pub fn apply_trace(t: &Trace, a: &BitSet) -> Result<BitSet> {
    if let Some(v) = t.violation() {
        return Err(Error::InvalidTrace(format!(
            "{} against {}",
            v.first, v.second
        )));
    }
    t.apply(a)
}

/// g ∘ f.
pub fn compose(f: &Trace, g: &Trace) -> Result<Trace> {
    if f.dst.labels() != g.src.labels() {
        return Err(Error::Shape(format!(
            "cannot compose through {} and {}",
            f.dst.name(),
            g.src.name()
        )));
    }
    match (&f.pairs, &g.pairs) {
        (Pairs::Linear(fp), Pairs::Linear(gp)) => {
            let mut by_mid: HashMap<Token, Vec<Token>> = HashMap::new();
            for &(y, z) in gp {
                by_mid.entry(y).or_default().push(z);
            }
            let pairs = fp
                .iter()
                .flat_map(|&(x, y)| by_mid.get(&y).into_iter().flatten().map(move |&z| (x, z)));
            Trace::linear(&f.src, &g.dst, pairs.collect::<Vec<_>>())
        }
        (Pairs::Stable(fp), Pairs::Stable(gp)) => {
            let mut by_out: HashMap<Token, Vec<&BitSet>> = HashMap::new();
            for (a, y) in fp {
                by_out.entry(*y).or_default().push(a);
            }
            let mut cands: BTreeSet<(BitSet, Token)> = BTreeSet::new();
            for (b, z) in gp {
                let mut partial: Vec<BitSet> = vec![BitSet::new()];
                for y in b {
                    let mut next = Vec::new();
                    for acc in &partial {
                        for a in by_out.get(&y).into_iter().flatten() {
                            let u = acc.union(a);
                            if f.src.is_clique_unchecked(&u) {
                                next.push(u);
                            }
                        }
                    }
                    next.sort();
                    next.dedup();
                    partial = next;
                }
                for a in partial {
                    cands.insert((a, *z));
                }
            }
            let minimal: Vec<(BitSet, Token)> = cands
                .iter()
                .filter(|(a, z)| {
                    !cands
                        .iter()
                        .any(|(b, w)| w == z && b != a && b.is_subset(a))
                })
                .cloned()
                .collect();
            Trace::stable(&f.src, &g.dst, minimal)
        }
        _ => Err(Error::Shape(
            "cannot compose a linear trace with a stable one".into(),
        )),
    }
}

/// F⊥ : Y⊥ ⊸ X⊥.
pub fn transpose(f: &Trace) -> Result<Trace> {
    let p = f
        .linear_pairs()
        .ok_or(Error::Unsupported("transpose of a stable trace".into()))?;
    Trace::linear(
        &Space::dual(&f.dst),
        &Space::dual(&f.src),
        p.iter().map(|&(x, y)| (y, x)),
    )
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Adjunction {
    StableToLinear,
    LinearToStable,
    Dereliction,
}

/// Re-type a stable trace X → Y as a linear trace !X ⊸ Y over the given bang space.
pub fn stable_to_linear(f: &Trace, bang: &Arc<Space>) -> Result<Trace> {
    let p = f
        .stable_pairs()
        .ok_or(Error::Shape("expected a stable trace".into()))?;
    match bang.kind() {
        Kind::Bang(x) if Arc::ptr_eq(x, &f.src) || x.len() == f.src.len() => {}
        _ => {
            return Err(Error::Shape(format!(
                "{} is not the bang of {}",
                bang.name(),
                f.src.name()
            )))
        }
    }
    let mut pairs = Vec::new();
    for (a, y) in p {
        let t = bang.bang_token(a).ok_or(Error::Shape(format!(
            "{} is not a token of the bang",
            f.src.set_label(a)
        )))?;
        pairs.push((t, *y));
    }
    Trace::linear(bang, &f.dst, pairs)
}

/// Re-type a linear trace !X ⊸ Y as a stable trace X → Y.
pub fn linear_to_stable(f: &Trace) -> Result<Trace> {
    let p = f
        .linear_pairs()
        .ok_or(Error::Shape("expected a linear trace".into()))?;
    let x = match f.src.kind() {
        Kind::Bang(x) => x.clone(),
        _ => {
            return Err(Error::Shape(format!(
                "{} is not a bang space",
                f.src.name()
            )))
        }
    };
    let pairs: Vec<(BitSet, Token)> = p
        .iter()
        .map(|&(t, y)| (f.src.bang_clique(t).unwrap().clone(), y))
        .collect();
    Trace::stable(&x, &f.dst, pairs)
}

/// The dereliction !X ⊸ X, pairs ({x}, x).
pub fn dereliction(bang: &Arc<Space>) -> Result<Trace> {
    let x = match bang.kind() {
        Kind::Bang(x) => x.clone(),
        _ => return Err(Error::Shape(format!("{} is not a bang space", bang.name()))),
    };
    let pairs: Vec<(Token, Token)> = (0..x.len())
        .map(|t| {
            (
                bang.bang_token(&BitSet::singleton(t))
                    .expect("singletons are cliques"),
                t,
            )
        })
        .collect();
    Trace::linear(bang, &x, pairs)
}

/// Extract the trace of a function given on all cliques of a finite space.
pub fn trace_of_function(
    x: &Arc<Space>,
    y: &Arc<Space>,
    f: &dyn Fn(&BitSet) -> BitSet,
    kind: TraceKind,
) -> Result<Trace> {
    let cliques = x.cliques(usize::MAX);
    let table: HashMap<BitSet, BitSet> = cliques.iter().map(|a| (a.clone(), f(a))).collect();
    for a in &cliques {
        let fa = &table[a];
        if !y.is_clique(fa)? {
            return Err(Error::Stability(format!(
                "f({}) = {} is not a clique",
                x.set_label(a),
                y.set_label(fa)
            )));
        }
        for t in a {
            let sub = a.without(t);
            if !table[&sub].is_subset(fa) {
                return Err(Error::Stability(format!(
                    "not monotone: f({}) is not below f({})",
                    x.set_label(&sub),
                    x.set_label(a)
                )));
            }
        }
    }
    let mut minimal: Vec<(BitSet, Token)> = Vec::new();
    for a in &cliques {
        for o in &table[a] {
            if a.iter().all(|t| !table[&a.without(t)].contains(o)) {
                minimal.push((a.clone(), o));
            }
        }
    }
    for a in &cliques {
        for o in &table[a] {
            let supports: Vec<&BitSet> = minimal
                .iter()
                .filter(|(b, z)| *z == o && b.is_subset(a))
                .map(|(b, _)| b)
                .collect();
            if supports.len() != 1 {
                return Err(Error::Stability(format!(
                    "token {} of f({}) has {} minimal supports",
                    y.label(o),
                    x.set_label(a),
                    supports.len()
                )));
            }
        }
    }
    let trace = match kind {
        TraceKind::Stable => Trace::stable(x, y, minimal)?,
        TraceKind::Linear => {
            if let Some((a, o)) = minimal.iter().find(|(a, _)| a.len() != 1) {
                return Err(Error::Stability(format!(
                    "minimal support {} of token {} is not a singleton",
                    x.set_label(a),
                    y.label(*o)
                )));
            }
            Trace::linear(x, y, minimal.iter().map(|(a, o)| (a.first().unwrap(), *o)))?
        }
    };
    for a in &cliques {
        if trace.apply_unchecked(a) != table[a] {
            return Err(Error::Stability(format!(
                "the extracted trace disagrees with f at {}",
                x.set_label(a)
            )));
        }
    }
    Ok(trace)
}

/// Tr(θ) = {(y,(x,y)) : x ∈ c, y ∈ Y}, a linear map Y ⊸ (X ⊸ Y).
pub fn theta_trace(c: &BitSet, x: &Arc<Space>, y: &Arc<Space>) -> Result<Trace> {
    if c.last().is_some_and(|m| m >= x.len()) || !x.is_anti_clique(c) {
        return Err(Error::Domain(format!(
            "{} is not an anti-clique of {}",
            x.set_label(c),
            x.name()
        )));
    }
    let lolli = Space::lollipop(x, y);
    let mut pairs = Vec::new();
    for b in 0..y.len() {
        for a in c {
            pairs.push((b, lolli.pair(a, b).unwrap()));
        }
    }
    Trace::linear(y, &lolli, pairs)
}

/// Write a trace in the line format `trace <kind> <src> -> <dst>` / `pair <in> -> <out>`.
pub fn write_trace(t: &Trace) -> String {
    let mut out = String::new();
    let kind = match t.kind() {
        TraceKind::Linear => "linear",
        TraceKind::Stable => "stable",
    };
    writeln!(out, "trace {kind} {} -> {}", t.src.name(), t.dst.name()).unwrap();
    match &t.pairs {
        Pairs::Linear(p) => {
            for &(x, y) in p {
                writeln!(out, "pair {} -> {}", t.src.label(x), t.dst.label(y)).unwrap();
            }
        }
        Pairs::Stable(p) => {
            for (a, y) in p {
                writeln!(out, "pair {} -> {}", t.src.set_label(a), t.dst.label(*y)).unwrap();
            }
        }
    }
    out
}

/// Parse the trace format; space names are resolved by the caller.
pub fn parse_trace(text: &str, resolve: &dyn Fn(&str) -> Option<Arc<Space>>) -> Result<Trace> {
    let mut header: Option<(TraceKind, Arc<Space>, Arc<Space>)> = None;
    let mut lin = Vec::new();
    let mut stab = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let body = raw.split('#').next().unwrap().trim();
        if body.is_empty() {
            continue;
        }
        if let Some(rest) = body.strip_prefix("trace ") {
            let words: Vec<&str> = rest.split_whitespace().collect();
            if words.len() != 4 || words[2] != "->" || header.is_some() {
                return Err(Error::Syntax {
                    line,
                    msg: "expected `trace <kind> <src> -> <dst>`".into(),
                });
            }
            let kind = match words[0] {
                "linear" => TraceKind::Linear,
                "stable" => TraceKind::Stable,
                k => {
                    return Err(Error::Syntax {
                        line,
                        msg: format!("unknown trace kind `{k}`"),
                    })
                }
            };
            let get = |n: &str| {
                resolve(n).ok_or_else(|| Error::Syntax {
                    line,
                    msg: format!("unknown space `{n}`"),
                })
            };
            header = Some((kind, get(words[1])?, get(words[3])?));
        } else if let Some(rest) = body.strip_prefix("pair ") {
            let (kind, src, dst) = header.as_ref().ok_or(Error::Syntax {
                line,
                msg: "`pair` before `trace`".into(),
            })?;
            let (input, output) = rest.rsplit_once("->").ok_or(Error::Syntax {
                line,
                msg: "expected `pair <in> -> <out>`".into(),
            })?;
            let (input, output) = (input.trim(), output.trim());
            let y = dst.token(output).ok_or_else(|| Error::UndeclaredToken {
                line,
                name: output.to_string(),
            })?;
            match kind {
                TraceKind::Linear => {
                    let x = src.token(input).ok_or_else(|| Error::UndeclaredToken {
                        line,
                        name: input.to_string(),
                    })?;
                    lin.push((x, y));
                }
                TraceKind::Stable => {
                    if !(input.starts_with('{') && input.ends_with('}')) {
                        return Err(Error::Syntax {
                            line,
                            msg: "stable input must be `{id ...}`".into(),
                        });
                    }
                    let mut a = BitSet::new();
                    for n in input[1..input.len() - 1].split_whitespace() {
                        a.insert(src.token(n).ok_or_else(|| Error::UndeclaredToken {
                            line,
                            name: n.to_string(),
                        })?);
                    }
                    stab.push((a, y));
                }
            }
        } else {
            return Err(Error::Syntax {
                line,
                msg: format!("unexpected `{body}`"),
            });
        }
    }
    let (kind, src, dst) = header.ok_or(Error::Syntax {
        line: 1,
        msg: "missing `trace` header".into(),
    })?;
    match kind {
        TraceKind::Linear => Trace::linear(&src, &dst, lin),
        TraceKind::Stable => Trace::stable(&src, &dst, stab),
    }
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
    fn validate_examples() {
        let f = f2();
        assert!(Trace::identity(&f).is_valid());
        let bad = Trace::linear(&c2(), &f, [(0, 0), (1, 1)]).unwrap();
        let v = bad.violation().unwrap();
        assert_eq!((v.first.as_str(), v.second.as_str()), ("(u, p)", "(v, q)"));
        let k = Trace::stable(&f, &c2(), [(BitSet::new(), 0)]).unwrap();
        assert!(k.is_valid());
    }

    #[test]
    fn apply_examples() {
        let f = f2();
        let id = Trace::identity(&f);
        assert_eq!(
            id.apply(&BitSet::singleton(0)).unwrap(),
            BitSet::singleton(0)
        );
        assert_eq!(id.apply(&BitSet::new()).unwrap(), BitSet::new());
        let bang = Space::bang(&f).unwrap();
        let der = dereliction(&bang).unwrap();
        // the promotion of {p} is {∅, {p}}
        let promoted = bang.promote(&BitSet::singleton(0));
        assert_eq!(bang.set_label(&promoted), "{{} {p}}");
        assert_eq!(der.apply(&promoted).unwrap(), BitSet::singleton(0));
        assert!(id.apply(&BitSet::from_iter([0, 1])).is_err());
    }

    #[test]
    fn compose_examples() {
        let (f, c) = (f2(), c2());
        let a = Trace::linear(&f, &c, [(0, 0)]).unwrap();
        let b = Trace::linear(&c, &f, [(0, 1)]).unwrap();
        let ab = compose(&a, &b).unwrap();
        assert_eq!(
            ab.linear_pairs()
                .unwrap()
                .iter()
                .copied()
                .collect::<Vec<_>>(),
            vec![(0, 1)]
        );
        assert!(compose(&a, &a).is_err());
    }

    #[test]
    fn transpose_examples() {
        let t = Trace::linear(&f2(), &c2(), [(0, 0)]).unwrap();
        let tt = transpose(&t).unwrap();
        assert_eq!(
            tt.linear_pairs()
                .unwrap()
                .iter()
                .copied()
                .collect::<Vec<_>>(),
            vec![(0, 0)]
        );
        assert_eq!(tt.src().label(0), "u");
        assert!(transpose(&transpose(&t).unwrap()).unwrap().same_as(&t));
        let s = Trace::stable(&f2(), &c2(), [(BitSet::new(), 0)]).unwrap();
        assert!(matches!(transpose(&s), Err(Error::Unsupported(_))));
    }

    #[test]
    fn adjunction_examples() {
        let (f, c) = (f2(), c2());
        let bang = Space::bang(&f).unwrap();
        let k = Trace::stable(&f, &c, [(BitSet::new(), 0)]).unwrap();
        let l = stable_to_linear(&k, &bang).unwrap();
        assert_eq!(write_trace(&l), "trace linear !F2 -> C2\npair {} -> u\n");
        assert!(linear_to_stable(&l).unwrap().same_as(&k));
        let d = dereliction(&bang).unwrap();
        assert_eq!(
            write_trace(&d),
            "trace linear !F2 -> F2\npair {p} -> p\npair {q} -> q\n"
        );
    }

    #[test]
    fn extraction_examples() {
        let (f, c) = (f2(), c2());
        let konst =
            trace_of_function(&f, &c, &|_| BitSet::singleton(0), TraceKind::Stable).unwrap();
        assert_eq!(konst.stable_pairs().unwrap().len(), 1);
        assert!(konst.stable_pairs().unwrap().contains(&(BitSet::new(), 0)));

        let id = trace_of_function(&f, &f, &|a| a.clone(), TraceKind::Linear).unwrap();
        assert!(id.same_as(&Trace::identity(&f)));

        let both = BitSet::from_iter([0, 1]);
        let g = move |a: &BitSet| {
            if *a == both {
                BitSet::singleton(0)
            } else {
                BitSet::new()
            }
        };
        let s = trace_of_function(&c, &c, &g, TraceKind::Stable).unwrap();
        assert_eq!(write_trace(&s), "trace stable C2 -> C2\npair {u v} -> u\n");
        let err = trace_of_function(&c, &c, &g, TraceKind::Linear).unwrap_err();
        assert!(err.to_string().contains("{u v}"));
    }

    #[test]
    fn theta_examples() {
        let (f, c) = (f2(), c2());
        let th = theta_trace(&BitSet::from_iter([0, 1]), &f, &c).unwrap();
        assert!(th.is_valid());
        assert_eq!(
            write_trace(&th),
            "trace linear C2 -> (F2 -o C2)\npair u -> (p,u)\npair u -> (q,u)\npair v -> (p,v)\npair v -> (q,v)\n"
        );
        let one = Space::one();
        let t1 = theta_trace(&BitSet::singleton(0), &one, &one).unwrap();
        assert_eq!(
            write_trace(&t1),
            "trace linear 1 -> (1 -o 1)\npair • -> (•,•)\n"
        );
        assert!(theta_trace(&BitSet::from_iter([0, 1]), &c, &f).is_err());
    }

    #[test]
    fn trace_file_round_trip() {
        let (f, c) = (f2(), c2());
        let t = Trace::stable(&f, &c, [(BitSet::singleton(1), 1), (BitSet::new(), 0)]).unwrap();
        let text = write_trace(&t);
        let resolve = |n: &str| match n {
            "F2" => Some(f.clone()),
            "C2" => Some(c.clone()),
            _ => None,
        };
        let back = parse_trace(&text, &resolve).unwrap();
        assert!(back.same_as(&t));
        assert!(matches!(
            parse_trace("trace linear F2 -> C2\npair z -> u\n", &resolve),
            Err(Error::UndeclaredToken { line: 2, .. })
        ));
        assert!(matches!(
            parse_trace("trace linear F2 -> D\n", &resolve),
            Err(Error::Syntax { line: 1, .. })
        ));
    }
}
