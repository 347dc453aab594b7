//! Realizers of real functions over the dyadic space R.
//!
//! A function with modulus μ is compiled to the linear trace whose level-n
//! outputs read one token at level μ(n+1): the modulus keeps f([x]) within
//! 2⁻ⁿ⁻¹ of f(value x), and rounding to the nearest level-n dyadic costs
//! another 2⁻ⁿ⁻¹. Functions without a global modulus read a level-0 token
//! first to pick a local one, which makes their traces stable but not linear.

use crate::bits::BitSet;
use crate::error::{Error, Result};
use crate::maps::Trace;
use crate::reals::{
    approx_clique, level_anticover, nearest, nearest_sqrt, q, q_int, BoundedReals, DyadicToken,
    RationalReal, Window, Q,
};
use crate::space::{Space, Token};
use num_traits::{Signed, Zero};
use std::collections::HashMap;
use std::fmt;
use std::sync::{Arc, Mutex};

/// An enclosure of f over a box: [lo, hi], or [√lo, √hi] for the square root.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Enclosure {
    Exact(Q, Q),
    Sqrt(Q, Q),
}

impl Enclosure {
    /// Whether the enclosed set lies in [lo, hi], decided exactly.
    pub fn within(&self, lo: &Q, hi: &Q) -> bool {
        match self {
            Enclosure::Exact(a, b) => lo <= a && b <= hi,
            Enclosure::Sqrt(a, b) => {
                (!lo.is_positive() || lo * lo <= *a) && !hi.is_negative() && *b <= hi * hi
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Builtin {
    Id,
    Neg,
    Half,
    Scale,
    Shift,
    Abs,
    Min,
    Max,
    Clamp,
    Sqrt,
    Add,
    Sq,
    Mul,
}

const BUILTINS: [(&str, Builtin, usize, usize); 13] = [
    ("id", Builtin::Id, 0, 1),
    ("neg", Builtin::Neg, 0, 1),
    ("half", Builtin::Half, 0, 1),
    ("scale", Builtin::Scale, 1, 1),
    ("shift", Builtin::Shift, 1, 1),
    ("abs", Builtin::Abs, 0, 1),
    ("min", Builtin::Min, 1, 1),
    ("max", Builtin::Max, 1, 1),
    ("clamp", Builtin::Clamp, 2, 1),
    ("sqrt", Builtin::Sqrt, 0, 1),
    ("add", Builtin::Add, 0, 2),
    ("sq", Builtin::Sq, 0, 1),
    ("mul", Builtin::Mul, 0, 2),
];

/// Smallest e with |v| ≤ 2ᵉ, for v ≠ 0.
fn ceil_log2(v: &Q) -> i64 {
    let v = v.abs();
    let mut e: i64 = 0;
    let mut p = q(1, 1);
    if v <= p {
        while v <= &p / q_int(2) {
            p /= q_int(2);
            e -= 1;
        }
    } else {
        while v > p {
            p *= q_int(2);
            e += 1;
        }
    }
    e
}

fn level_shift(k: u32, by: i64) -> u32 {
    (k as i64 + by).max(0) as u32
}

fn min_q(a: &Q, b: &Q) -> Q {
    if a < b {
        a.clone()
    } else {
        b.clone()
    }
}

fn max_q(a: &Q, b: &Q) -> Q {
    if a > b {
        a.clone()
    } else {
        b.clone()
    }
}

/// A built-in real function with its constant parameters.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FunctionSpec {
    pub builtin: Builtin,
    pub params: Vec<Q>,
}

impl FunctionSpec {
    pub fn new(name: &str, params: Vec<Q>) -> Result<FunctionSpec> {
        let &(_, builtin, np, _) = BUILTINS
            .iter()
            .find(|(n, ..)| *n == name)
            .ok_or_else(|| Error::Domain(format!("unknown function `{name}`")))?;
        if params.len() != np {
            return Err(Error::Shape(format!(
                "`{name}` takes {np} constant parameters, got {}",
                params.len()
            )));
        }
        if builtin == Builtin::Clamp && params[0] > params[1] {
            return Err(Error::Domain("clamp bounds are reversed".into()));
        }
        Ok(FunctionSpec { builtin, params })
    }

    /// Parse `name` or `name:p1:p2`.
    pub fn parse(text: &str) -> Result<FunctionSpec> {
        let mut parts = text.split(':');
        let name = parts.next().unwrap_or_default();
        let params = parts
            .map(crate::reals::parse_rational)
            .collect::<Result<Vec<_>>>()?;
        FunctionSpec::new(name, params)
    }

    fn entry(&self) -> &'static (&'static str, Builtin, usize, usize) {
        BUILTINS.iter().find(|e| e.1 == self.builtin).unwrap()
    }

    pub fn name(&self) -> &'static str {
        self.entry().0
    }

    pub fn arity(&self) -> usize {
        self.entry().3
    }

    pub fn is_uniform(&self) -> bool {
        !matches!(self.builtin, Builtin::Sq | Builtin::Mul)
    }

    /// μ(k): |x−y| ≤ 2^−μ(k) implies |f(x)−f(y)| ≤ 2⁻ᵏ. For binary
    /// functions, both coordinates within 2^−μ(k).
    pub fn modulus(&self, k: u32) -> Option<u32> {
        Some(match self.builtin {
            Builtin::Scale if self.params[0].is_zero() => 0,
            Builtin::Scale => level_shift(k, ceil_log2(&self.params[0])),
            Builtin::Sqrt => 2 * k + 2,
            Builtin::Add => k + 1,
            Builtin::Sq | Builtin::Mul => return None,
            _ => k,
        })
    }

    /// A modulus for x² and x·y valid while every argument stays within [−b, b].
    pub fn bounded_modulus(&self, b: &Q, k: u32) -> u32 {
        match self.modulus(k) {
            Some(m) => m,
            None => level_shift(k, ceil_log2(&(q_int(2) * (b.abs() + q_int(2))))),
        }
    }

    /// Source level for output level n, given the level-0 tokens of the arguments.
    pub fn local_source_level(&self, coarse: &[DyadicToken], n: u32) -> u32 {
        match self.modulus(n + 1) {
            Some(m) => m,
            None => {
                let b = coarse.iter().map(|c| c.m.abs()).max().unwrap_or_default();
                level_shift(n + 1, ceil_log2(&(q_int(2) * q_int(b + 2))))
            }
        }
    }

    /// f(args) when it is rational.
    pub fn eval(&self, args: &[Q]) -> Option<Q> {
        let p = &self.params;
        let x = &args[0];
        Some(match self.builtin {
            Builtin::Id => x.clone(),
            Builtin::Neg => -x,
            Builtin::Half => x / q_int(2),
            Builtin::Scale => x * &p[0],
            Builtin::Shift => x + &p[0],
            Builtin::Abs => x.abs(),
            Builtin::Min => min_q(x, &p[0]),
            Builtin::Max => max_q(x, &p[0]),
            Builtin::Clamp => max_q(&p[0], &min_q(x, &p[1])),
            Builtin::Add => x + &args[1],
            Builtin::Sq => x * x,
            Builtin::Mul => x * &args[1],
            Builtin::Sqrt => {
                let v = max_q(x, &Q::zero());
                let (n, d) = (v.numer().sqrt(), v.denom().sqrt());
                let r = Q::new(n, d);
                if &r * &r != v {
                    return None;
                }
                r
            }
        })
    }

    /// The level-n dyadic nearest to f(args), ties to even.
    pub fn nearest(&self, args: &[Q], n: u32) -> DyadicToken {
        match self.builtin {
            Builtin::Sqrt => nearest_sqrt(&max_q(&args[0], &Q::zero()), n),
            _ => nearest(&self.eval(args).expect("rational-valued"), n),
        }
    }

    /// f over a box of closed intervals.
    pub fn enclosure(&self, boxes: &[(Q, Q)]) -> Enclosure {
        let (a, b) = &boxes[0];
        let mono = |g: &dyn Fn(&Q) -> Q| Enclosure::Exact(g(a), g(b));
        match self.builtin {
            Builtin::Neg => Enclosure::Exact(-b, -a),
            Builtin::Scale if self.params[0].is_negative() => {
                Enclosure::Exact(b * &self.params[0], a * &self.params[0])
            }
            Builtin::Abs | Builtin::Sq => {
                let g = |v: &Q| {
                    if self.builtin == Builtin::Sq {
                        v * v
                    } else {
                        v.abs()
                    }
                };
                let top = max_q(&g(a), &g(b));
                let bot = if a.is_negative() && b.is_positive() {
                    Q::zero()
                } else {
                    min_q(&g(a), &g(b))
                };
                Enclosure::Exact(bot, top)
            }
            Builtin::Sqrt => Enclosure::Sqrt(max_q(a, &Q::zero()), max_q(b, &Q::zero())),
            Builtin::Add => Enclosure::Exact(a + &boxes[1].0, b + &boxes[1].1),
            Builtin::Mul => {
                let (c, d) = &boxes[1];
                let ps = [a * c, a * d, b * c, b * d];
                let lo = ps.iter().fold(ps[0].clone(), |m, v| min_q(&m, v));
                let hi = ps.iter().fold(ps[0].clone(), |m, v| max_q(&m, v));
                Enclosure::Exact(lo, hi)
            }
            _ => mono(&|v: &Q| self.eval(std::slice::from_ref(v)).unwrap()),
        }
    }
}

impl fmt::Display for FunctionSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())?;
        for p in &self.params {
            write!(f, ":{p}")?;
        }
        Ok(())
    }
}

/// A trace materialized between two bounded pieces of R.
#[derive(Clone)]
pub struct Materialized {
    pub trace: Trace,
    pub src: Arc<BoundedReals>,
    /// For binary realizers, the second factor of the source tensor.
    pub src2: Option<Arc<BoundedReals>>,
    pub dst: Arc<BoundedReals>,
    pub depth: u32,
}

impl Materialized {
    /// The clique of the source approximating q at every materialized level.
    pub fn input_clique(&self, q: &Q) -> Result<BitSet> {
        approx_set(&self.src, q)
    }

    pub fn outputs(&self, a: &BitSet) -> Vec<DyadicToken> {
        self.dst.tokens_of(&self.trace.apply_unchecked(a))
    }
}

fn approx_set(r: &BoundedReals, v: &Q) -> Result<BitSet> {
    if !r.window().contains(v) {
        return Err(Error::Domain(format!("{v} is outside the window")));
    }
    let a = approx_clique(&RationalReal(v.clone()), r.depth())?;
    r.set_of(&a[r.min_level() as usize..])
}

fn output_space(outs: &[DyadicToken], depth: u32) -> Result<Arc<BoundedReals>> {
    let lo = outs
        .iter()
        .map(DyadicToken::value)
        .min()
        .unwrap_or_default();
    let hi = outs
        .iter()
        .map(DyadicToken::value)
        .max()
        .unwrap_or_default();
    Ok(Arc::new(BoundedReals::new(Window::new(lo, hi)?, 0, depth)?))
}

pub type Modulus = Arc<dyn Fn(u32) -> u32 + Send + Sync>;

type LevelPairs = Arc<Vec<(DyadicToken, DyadicToken)>>;

/// The linear realizer of a uniformly continuous function, lazy in the level.
pub struct LinearRealizer {
    f: FunctionSpec,
    /// Set for x² and x·y compiled on a bounded window.
    bound: Option<Q>,
    modulus: Option<Modulus>,
    cache: Mutex<HashMap<(u32, Q, Q), LevelPairs>>,
}

impl LinearRealizer {
    pub fn new(f: FunctionSpec) -> Result<LinearRealizer> {
        if !f.is_uniform() {
            return Err(Error::Precondition(format!(
                "{f} is not uniformly continuous; use a window or stable mode"
            )));
        }
        Ok(LinearRealizer {
            f,
            bound: None,
            modulus: None,
            cache: Mutex::new(HashMap::new()),
        })
    }

    /// Compile with a caller-supplied modulus instead of the built-in one.
    pub fn with_modulus(f: FunctionSpec, modulus: Modulus) -> LinearRealizer {
        LinearRealizer {
            f,
            bound: None,
            modulus: Some(modulus),
            cache: Mutex::new(HashMap::new()),
        }
    }

    /// Compile on a window, where every built-in has a modulus.
    pub fn on_window(f: FunctionSpec, window: &Window) -> LinearRealizer {
        let bound = max_q(&window.lo.abs(), &window.hi.abs());
        LinearRealizer {
            f,
            bound: Some(bound),
            modulus: None,
            cache: Mutex::new(HashMap::new()),
        }
    }

    pub fn function(&self) -> &FunctionSpec {
        &self.f
    }

    /// s(n) = μ(n+1).
    pub fn source_level(&self, n: u32) -> u32 {
        if let Some(m) = &self.modulus {
            return m(n + 1);
        }
        match &self.bound {
            Some(b) => self.f.bounded_modulus(b, n + 1),
            None => self.f.modulus(n + 1).expect("uniform"),
        }
    }

    /// hₙ(x₁, ..).
    pub fn output(&self, xs: &[DyadicToken], n: u32) -> DyadicToken {
        let vals: Vec<Q> = xs.iter().map(DyadicToken::value).collect();
        self.f.nearest(&vals, n)
    }

    /// Pairs (x, hₙ(x)) over the window, one per level-s(n) token.
    pub fn level_pairs(&self, n: u32, window: &Window) -> LevelPairs {
        let key = (n, window.lo.clone(), window.hi.clone());
        let mut cache = self.cache.lock().unwrap();
        cache
            .entry(key)
            .or_insert_with(|| {
                let s = self.source_level(n);
                Arc::new(
                    level_anticover(s, &window.lo, &window.hi)
                        .into_iter()
                        .map(|x| {
                            let h = self.output(std::slice::from_ref(&x), n);
                            (x, h)
                        })
                        .collect(),
                )
            })
            .clone()
    }

    /// The image of a clique of R, output levels up to depth.
    pub fn apply(&self, a: &[DyadicToken], depth: u32) -> Vec<DyadicToken> {
        (0..=depth)
            .filter_map(|n| {
                let s = self.source_level(n);
                a.iter()
                    .find(|x| x.n == s)
                    .map(|x| self.output(std::slice::from_ref(x), n))
            })
            .collect()
    }

    /// f([x]) ⊆ [hₙ(x)] for every window token x at the source levels of n ≤ depth.
    pub fn check_containment(&self, window: &Window, depth: u32) -> Result<usize> {
        let mut checked = 0;
        for n in 0..=depth {
            if self.f.arity() == 2 {
                let s = self.source_level(n);
                let xs = level_anticover(s, &window.lo, &window.hi);
                for x in &xs {
                    for y in &xs {
                        let h = self.output(&[x.clone(), y.clone()], n);
                        if !self
                            .f
                            .enclosure(&[(x.lo(), x.hi()), (y.lo(), y.hi())])
                            .within(&h.lo(), &h.hi())
                        {
                            return Err(Error::Precondition(format!(
                                "modulus violated: {} at ({x},{y}) leaves {h}",
                                self.f
                            )));
                        }
                        checked += 1;
                    }
                }
                continue;
            }
            for (x, h) in self.level_pairs(n, window).iter() {
                if !self
                    .f
                    .enclosure(&[(x.lo(), x.hi())])
                    .within(&h.lo(), &h.hi())
                {
                    return Err(Error::Precondition(format!(
                        "modulus violated: {}([{x}]) leaves {h}",
                        self.f
                    )));
                }
                checked += 1;
            }
        }
        Ok(checked)
    }

    /// The trace with output levels 0..=depth, sources in the window.
    pub fn materialize(&self, window: &Window, depth: u32) -> Result<Materialized> {
        let top = (0..=depth).map(|n| self.source_level(n)).max().unwrap_or(0);
        let src = Arc::new(BoundedReals::new(window.clone(), 0, top)?);
        self.materialize_on(&src, depth)
    }

    /// As [`LinearRealizer::materialize`], reading from a given source space.
    pub fn materialize_on(&self, src: &Arc<BoundedReals>, depth: u32) -> Result<Materialized> {
        let window = src.window().clone();
        if self.f.arity() == 2 {
            return self.materialize_binary(src, depth);
        }
        let mut raw = Vec::new();
        for n in 0..=depth {
            if self.source_level(n) > src.depth() {
                return Err(Error::Precondition(format!(
                    "source materialized to level {} only",
                    src.depth()
                )));
            }
            raw.extend(self.level_pairs(n, &window).iter().cloned());
        }
        let outs: Vec<DyadicToken> = raw.iter().map(|(_, h)| h.clone()).collect();
        let dst = output_space(&outs, depth)?;
        let sx = src.space("R");
        let dx = dst.space("R");
        let pairs = raw
            .iter()
            .map(|(x, h)| Ok((index(src, x)?, index(&dst, h)?)))
            .collect::<Result<Vec<(Token, Token)>>>()?;
        Ok(Materialized {
            trace: Trace::linear(&sx, &dx, pairs)?,
            src: src.clone(),
            src2: None,
            dst,
            depth,
        })
    }

    fn materialize_binary(&self, src: &Arc<BoundedReals>, depth: u32) -> Result<Materialized> {
        let w = src.window();
        let mut raw = Vec::new();
        for n in 0..=depth {
            let s = self.source_level(n);
            if s > src.depth() {
                return Err(Error::Precondition(format!(
                    "source materialized to level {} only",
                    src.depth()
                )));
            }
            let xs = level_anticover(s, &w.lo, &w.hi);
            for x in &xs {
                for y in &xs {
                    raw.push((
                        x.clone(),
                        y.clone(),
                        self.output(&[x.clone(), y.clone()], n),
                    ));
                }
            }
        }
        let outs: Vec<DyadicToken> = raw.iter().map(|(_, _, h)| h.clone()).collect();
        let dst = output_space(&outs, depth)?;
        let sx = src.space("R");
        let tensor = Space::tensor_lazy(&sx, &sx);
        let dx = dst.space("R");
        let pairs = raw
            .iter()
            .map(|(x, y, h)| {
                Ok((
                    tensor.pair(index(src, x)?, index(src, y)?).unwrap(),
                    index(&dst, h)?,
                ))
            })
            .collect::<Result<Vec<(Token, Token)>>>()?;
        Ok(Materialized {
            trace: Trace::linear(&tensor, &dx, pairs)?,
            src: src.clone(),
            src2: Some(src.clone()),
            dst,
            depth,
        })
    }
}

fn index(r: &BoundedReals, x: &DyadicToken) -> Result<Token> {
    r.index_of(x)
        .ok_or_else(|| Error::Internal(format!("{x} is not materialized")))
}

/// The stable realizer: pairs ({c, x}, o) with c a level-0 token choosing the
/// local modulus and x the fine token supplying the value.
pub struct StableRealizer {
    f: FunctionSpec,
}

impl StableRealizer {
    pub fn new(f: FunctionSpec) -> Result<StableRealizer> {
        if f.arity() != 1 {
            return Err(Error::Unsupported(
                "stable traces of binary functions".into(),
            ));
        }
        Ok(StableRealizer { f })
    }

    pub fn source_level(&self, coarse: &DyadicToken, n: u32) -> u32 {
        self.f.local_source_level(std::slice::from_ref(coarse), n)
    }

    pub fn apply(&self, a: &[DyadicToken], depth: u32) -> Vec<DyadicToken> {
        let Some(c) = a.iter().find(|x| x.n == 0) else {
            return Vec::new();
        };
        (0..=depth)
            .filter_map(|n| {
                let s = self.source_level(c, n);
                a.iter()
                    .find(|x| x.n == s)
                    .map(|x| self.f.nearest(&[x.value()], n))
            })
            .collect()
    }

    pub fn materialize(&self, window: &Window, depth: u32) -> Result<Materialized> {
        let coarse = level_anticover(0, &window.lo, &window.hi);
        let top = coarse
            .iter()
            .map(|c| self.source_level(c, depth))
            .max()
            .unwrap_or(0);
        let src = Arc::new(BoundedReals::new(window.clone(), 0, top)?);
        let mut raw: Vec<(Vec<DyadicToken>, DyadicToken)> = Vec::new();
        for c in &coarse {
            for n in 0..=depth {
                let s = self.source_level(c, n);
                for x in level_anticover(s, &window.lo, &window.hi) {
                    if !c.meets(&x) {
                        continue;
                    }
                    let o = self.f.nearest(&[x.value()], n);
                    let support = if self.f.is_uniform() {
                        vec![x]
                    } else {
                        vec![c.clone(), x]
                    };
                    raw.push((support, o));
                }
            }
        }
        let outs: Vec<DyadicToken> = raw.iter().map(|(_, o)| o.clone()).collect();
        let dst = output_space(&outs, depth)?;
        let (sx, dx) = (src.space("R"), dst.space("R"));
        let pairs = raw
            .iter()
            .map(|(a, o)| Ok((src.set_of(a)?, index(&dst, o)?)))
            .collect::<Result<Vec<(BitSet, Token)>>>()?;
        Ok(Materialized {
            trace: Trace::stable(&sx, &dx, pairs)?,
            src,
            src2: None,
            dst,
            depth,
        })
    }
}

#[derive(Clone, Debug, Default)]
pub struct RealizationReport {
    pub checked: usize,
    /// Inputs whose level-n output misses f(q), with the reason.
    pub failures: Vec<(Q, String)>,
}

impl RealizationReport {
    pub fn holds(&self) -> bool {
        self.failures.is_empty()
    }
}

/// For each input q: approximate q, apply the trace, and require a level-n
/// output token whose interval holds f(q).
pub fn realization_check(
    m: &Materialized,
    f: &FunctionSpec,
    inputs: &[Q],
    n: u32,
) -> Result<RealizationReport> {
    if f.arity() != 1 {
        return Err(Error::Unsupported(
            "realization check of binary functions".into(),
        ));
    }
    let mut report = RealizationReport::default();
    for v in inputs {
        let a = m.input_clique(v)?;
        let outs = m.outputs(&a);
        let at_n: Vec<&DyadicToken> = outs.iter().filter(|o| o.n == n).collect();
        let why = match at_n.as_slice() {
            [] => Some(format!("no level-{n} output")),
            [o] if !f
                .enclosure(&[(v.clone(), v.clone())])
                .within(&o.lo(), &o.hi()) =>
            {
                Some(format!("{f}({v}) is outside {o}"))
            }
            [_] => None,
            _ => Some(format!("{} level-{n} outputs", at_n.len())),
        };
        if let Some(why) = why {
            report.failures.push((v.clone(), why));
        }
        report.checked += 1;
    }
    Ok(report)
}

/// Number of source tokens behind each output token of t(input).
pub fn query_profile(t: &Trace, input: &BitSet) -> Vec<(Token, usize)> {
    t.supports(input)
        .into_iter()
        .map(|(o, s)| (o, s.len()))
        .collect()
}

/// The modulus of a materialized linear realizer at output level n: the
/// source tokens sent into the level-n anti-cover, which must form one level.
pub fn real_modulus(m: &Materialized, n: u32) -> Result<(u32, Vec<DyadicToken>)> {
    let pairs = m
        .trace
        .linear_pairs()
        .ok_or(Error::Unsupported("modulus of a stable trace".into()))?;
    let mut out: Vec<DyadicToken> = pairs
        .iter()
        .filter(|(_, y)| m.dst.dyadic(*y).n == n)
        .map(|(x, _)| m.src.dyadic(*x))
        .collect();
    out.sort_by(|a, b| (a.n, &a.m).cmp(&(b.n, &b.m)));
    out.dedup();
    let level = out
        .first()
        .map(|x| x.n)
        .ok_or_else(|| Error::Structure(format!("nothing reaches level {n}")))?;
    if out.iter().any(|x| x.n != level) {
        return Err(Error::Structure(format!(
            "the modulus for level {n} spans several levels"
        )));
    }
    Ok((level, out))
}

/// A term over exact rational constants and built-in functions.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Expression {
    Const(Q),
    Apply(FunctionSpec, Vec<Expression>),
}

impl Expression {
    fn size(&self) -> usize {
        match self {
            Expression::Const(_) => 1,
            Expression::Apply(_, args) => 1 + args.iter().map(Expression::size).sum::<usize>(),
        }
    }

    pub fn is_uniform(&self) -> bool {
        match self {
            Expression::Const(_) => true,
            Expression::Apply(f, args) => f.is_uniform() && args.iter().all(Expression::is_uniform),
        }
    }
}

impl fmt::Display for Expression {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expression::Const(c) => write!(f, "{c}"),
            Expression::Apply(g, args) => {
                write!(f, "{}(", g.name())?;
                let parts: Vec<String> = g
                    .params
                    .iter()
                    .map(Q::to_string)
                    .chain(args.iter().map(Expression::to_string))
                    .collect();
                write!(f, "{})", parts.join(","))
            }
        }
    }
}

struct Parser<'a> {
    text: &'a str,
    pos: usize,
}

impl Parser<'_> {
    fn skip_ws(&mut self) {
        while self.text[self.pos..].starts_with(char::is_whitespace) {
            self.pos += 1;
        }
    }

    fn err(&self, msg: &str) -> Error {
        Error::Syntax {
            line: 1,
            msg: format!("{msg} at column {}", self.pos + 1),
        }
    }

    fn expr(&mut self) -> Result<Expression> {
        self.skip_ws();
        let rest = &self.text[self.pos..];
        let word_len = rest
            .find(|c: char| !(c.is_ascii_alphanumeric() || "_./-".contains(c)))
            .unwrap_or(rest.len());
        let word = &rest[..word_len];
        if word.is_empty() {
            return Err(self.err("expected a number or a function"));
        }
        self.pos += word_len;
        if let Some((_, def)) = CONSTANTS.iter().find(|c| c.0 == word) {
            return parse_expression(def);
        }
        if word.starts_with(|c: char| c.is_ascii_alphabetic()) {
            self.skip_ws();
            if !self.text[self.pos..].starts_with('(') {
                return Err(self.err(&format!("expected `(` after `{word}`")));
            }
            self.pos += 1;
            let mut args = vec![self.expr()?];
            loop {
                self.skip_ws();
                match self.text[self.pos..].chars().next() {
                    Some(',') => {
                        self.pos += 1;
                        args.push(self.expr()?);
                    }
                    Some(')') => {
                        self.pos += 1;
                        break;
                    }
                    _ => return Err(self.err("expected `,` or `)`")),
                }
            }
            let &(_, _, np, arity) = BUILTINS
                .iter()
                .find(|e| e.0 == word)
                .ok_or_else(|| Error::Domain(format!("unknown function `{word}`")))?;
            if args.len() != np + arity {
                return Err(Error::Shape(format!(
                    "`{word}` takes {} arguments, got {}",
                    np + arity,
                    args.len()
                )));
            }
            let rest = args.split_off(np);
            let params = args
                .into_iter()
                .map(|a| match a {
                    Expression::Const(c) => Ok(c),
                    _ => Err(Error::Domain(format!(
                        "parameters of `{word}` must be constants"
                    ))),
                })
                .collect::<Result<Vec<Q>>>()?;
            Ok(Expression::Apply(FunctionSpec::new(word, params)?, rest))
        } else {
            Ok(Expression::Const(crate::reals::parse_rational(word)?))
        }
    }
}

/// Named constants accepted wherever a number is, as expressions over the builtins.
pub const CONSTANTS: [(&str, &str); 3] = [
    ("sqrt2", "sqrt(2)"),
    ("phi", "half(add(1,sqrt(5)))"),
    ("silver", "add(1,sqrt(2))"),
];

pub fn parse_expression(text: &str) -> Result<Expression> {
    let mut p = Parser { text, pos: 0 };
    let e = p.expr()?;
    p.skip_ws();
    if p.pos != text.len() {
        return Err(p.err("trailing input"));
    }
    Ok(e)
}

#[derive(Clone, Debug, Default)]
pub struct EvalOptions {
    /// Compile x² and x·y with a local modulus read from a level-0 token.
    pub stable: bool,
    /// Promise that every argument of x² and x·y lies in this window.
    pub window: Option<Window>,
}

/// Per function node: outputs produced and source queries spent on them.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NodeProfile {
    pub node: String,
    pub outputs: usize,
    pub queries: usize,
}

impl NodeProfile {
    pub fn per_output(&self) -> usize {
        self.queries.checked_div(self.outputs).unwrap_or(0)
    }
}

#[derive(Clone, Debug)]
pub struct Evaluation {
    pub value: Q,
    pub token: DyadicToken,
    pub profile: Vec<NodeProfile>,
}

struct Evaluator<'a> {
    opts: &'a EvalOptions,
    memo: HashMap<(usize, u32), DyadicToken>,
    profile: Vec<Option<NodeProfile>>,
}

impl Evaluator<'_> {
    /// A level-n token whose interval holds the value of e.
    fn token(&mut self, e: &Expression, id: usize, n: u32) -> Result<DyadicToken> {
        if let Some(t) = self.memo.get(&(id, n)) {
            return Ok(t.clone());
        }
        let t = match e {
            Expression::Const(c) => nearest(c, n),
            Expression::Apply(f, args) => {
                let ids: Vec<usize> = args
                    .iter()
                    .scan(id + 1, |next, a| {
                        let i = *next;
                        *next += a.size();
                        Some(i)
                    })
                    .collect();
                let (s, queries) = if f.is_uniform() {
                    (f.modulus(n + 1).unwrap(), 1)
                } else if let Some(w) = &self.opts.window {
                    let b = max_q(&w.lo.abs(), &w.hi.abs());
                    (f.bounded_modulus(&b, n + 1), 1)
                } else if self.opts.stable {
                    let coarse = args
                        .iter()
                        .zip(&ids)
                        .map(|(a, &i)| self.token(a, i, 0))
                        .collect::<Result<Vec<_>>>()?;
                    (f.local_source_level(&coarse, n), 2)
                } else {
                    return Err(Error::Precondition(format!(
                        "{} is not uniformly continuous; pass a window or use stable mode",
                        f.name()
                    )));
                };
                let xs = args
                    .iter()
                    .zip(&ids)
                    .map(|(a, &i)| self.token(a, i, s))
                    .collect::<Result<Vec<_>>>()?;
                if let (false, Some(w)) = (f.is_uniform(), &self.opts.window) {
                    if let Some(x) = xs.iter().find(|x| x.hi() < w.lo || x.lo() > w.hi) {
                        return Err(Error::Domain(format!(
                            "argument {x} of {} leaves the window",
                            f.name()
                        )));
                    }
                }
                let p = self.profile[id].get_or_insert_with(|| NodeProfile {
                    node: f.to_string(),
                    outputs: 0,
                    queries: 0,
                });
                p.outputs += 1;
                p.queries += queries;
                let vals: Vec<Q> = xs.iter().map(DyadicToken::value).collect();
                f.nearest(&vals, n)
            }
        };
        self.memo.insert((id, n), t.clone());
        Ok(t)
    }
}

/// A rational within 2⁻ⁿ of the value of e, read off a level-n token.
pub fn eval_expression(e: &Expression, n: u32, opts: &EvalOptions) -> Result<Evaluation> {
    let mut ev = Evaluator {
        opts,
        memo: HashMap::new(),
        profile: vec![None; e.size()],
    };
    let token = ev.token(e, 0, n)?;
    Ok(Evaluation {
        value: token.value(),
        token,
        profile: ev.profile.into_iter().flatten().collect(),
    })
}

/// Strict-prefix pairs sharing a level-s token map to cliques sharing a
/// level-n token; returns the first counterexample among the samples. Each
/// sample pair must lie in one level-s interval around the first value.
pub fn modulus_pair_check(r: &LinearRealizer, n: u32, samples: &[(Q, Q)]) -> Option<(Q, Q)> {
    let s = r.source_level(n);
    let depth = s.max(n);
    samples
        .iter()
        .find(|(u, v)| {
            let x = nearest(u, s);
            let (a, b) = (prefix_through(u, depth, &x), prefix_through(v, depth, &x));
            let (fa, fb) = (r.apply(&a, n), r.apply(&b, n));
            !fa.iter().any(|t| t.n == n && fb.contains(t))
        })
        .cloned()
}

/// Tokens nearest to v at each level up to depth, with x forced at its level.
/// A clique when v lies in [x].
pub fn prefix_through(v: &Q, depth: u32, x: &DyadicToken) -> Vec<DyadicToken> {
    (0..=depth)
        .map(|k| if k == x.n { x.clone() } else { nearest(v, k) })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::maps::{trace_of_function, TraceKind};

    fn t(m: i64, n: u32) -> DyadicToken {
        DyadicToken::new(m, n)
    }

    fn f(name: &str) -> FunctionSpec {
        FunctionSpec::parse(name).unwrap()
    }

    fn w(lo: i64, hi: i64) -> Window {
        Window::new(q_int(lo), q_int(hi)).unwrap()
    }

    #[test]
    fn log2_helper() {
        assert_eq!(ceil_log2(&q(1, 1)), 0);
        assert_eq!(ceil_log2(&q(3, 1)), 2);
        assert_eq!(ceil_log2(&q(4, 1)), 2);
        assert_eq!(ceil_log2(&q(1, 3)), -1);
        assert_eq!(ceil_log2(&q(1, 4)), -2);
        assert_eq!(ceil_log2(&q(-5, 1)), 3);
    }

    #[test]
    fn half_example_pair() {
        let r = LinearRealizer::new(f("half")).unwrap();
        let pairs = r.level_pairs(0, &w(0, 2));
        assert!(pairs.contains(&(t(3, 1), t(1, 0))));
        assert!(r.check_containment(&w(-2, 2), 10).unwrap() > 0);
    }

    #[test]
    fn identity_rounds_down_a_level() {
        let r = LinearRealizer::new(f("id")).unwrap();
        for (x, h) in r.level_pairs(3, &w(0, 1)).iter() {
            assert_eq!(x.n, 4);
            assert_eq!(*h, nearest(&x.value(), 3));
        }
        let m = r.materialize(&w(0, 1), 6).unwrap();
        assert!(m.trace.is_valid());
    }

    #[test]
    fn sqrt_containment() {
        let r = LinearRealizer::new(f("sqrt")).unwrap();
        assert!(r
            .check_containment(&Window::new(q(0, 1), q(1, 16)).unwrap(), 6)
            .is_ok());
        let m = r
            .materialize(&Window::new(q(0, 1), q(1, 4)).unwrap(), 3)
            .unwrap();
        assert!(m.trace.is_valid());
    }

    #[test]
    fn bad_modulus_is_caught() {
        let r = LinearRealizer::with_modulus(f("scale:8"), Arc::new(|k| k));
        let err = r.check_containment(&w(0, 1), 3).unwrap_err();
        assert!(err.to_string().contains("modulus violated"));
        let ok = LinearRealizer::with_modulus(f("scale:8"), Arc::new(|k| k + 3));
        assert!(ok.check_containment(&w(0, 1), 3).is_ok());
    }

    #[test]
    fn add_example_pair() {
        let r = LinearRealizer::new(f("add")).unwrap();
        assert_eq!(r.source_level(0), 2);
        assert_eq!(r.output(&[t(0, 2), t(2, 2)], 0), nearest(&q(1, 2), 0));
        assert_eq!(r.output(&[t(1, 3), t(1, 3)], 2), t(1, 2));
        let m = r
            .materialize(&Window::new(q(0, 1), q(1, 16)).unwrap(), 4)
            .unwrap();
        assert!(m.trace.is_valid());
        assert!(r
            .check_containment(&Window::new(q(0, 1), q(1, 4)).unwrap(), 5)
            .is_ok());
    }

    #[test]
    fn realization_examples() {
        let r = LinearRealizer::new(f("half")).unwrap();
        let m = r.materialize(&w(0, 1), 10).unwrap();
        let third = q(1, 3);
        assert!(
            realization_check(&m, &f("half"), std::slice::from_ref(&third), 10)
                .unwrap()
                .holds()
        );
        // shift the level-10 output of the pair hit by 1/3
        let a = m.input_clique(&third).unwrap();
        let pairs = m.trace.linear_pairs().unwrap();
        let hit = *pairs
            .iter()
            .find(|(x, y)| a.contains(*x) && m.dst.dyadic(*y).n == 10)
            .unwrap();
        let o = m.dst.dyadic(hit.1);
        let moved = m.dst.index_of(&DyadicToken::new(o.m + 2, 10)).unwrap();
        let bad: Vec<(Token, Token)> = pairs
            .iter()
            .map(|&p| if p == hit { (p.0, moved) } else { p })
            .collect();
        let broken = Materialized {
            trace: Trace::linear(m.trace.src(), m.trace.dst(), bad).unwrap(),
            ..m
        };
        let rep = realization_check(&broken, &f("half"), &[third], 10).unwrap();
        assert_eq!(rep.failures.len(), 1);
        let c = LinearRealizer::new(f("scale:0"))
            .unwrap()
            .materialize(&w(-1, 1), 5)
            .unwrap();
        assert!(
            realization_check(&c, &f("scale:0"), &[q(1, 7), q(-2, 3)], 5)
                .unwrap()
                .holds()
        );
    }

    #[test]
    fn stable_square() {
        let s = StableRealizer::new(f("sq")).unwrap();
        let m = s
            .materialize(&Window::new(q(0, 1), q(1, 8)).unwrap(), 0)
            .unwrap();
        assert!(m.trace.is_valid());
        let a = m.input_clique(&q(1, 9)).unwrap();
        assert!(query_profile(&m.trace, &a).iter().all(|&(_, k)| k == 2));
        let (src, dst) = (m.trace.src().clone(), m.trace.dst().clone());
        let err = trace_of_function(
            &src,
            &dst,
            &|a| m.trace.apply_unchecked(a),
            TraceKind::Linear,
        )
        .unwrap_err();
        assert!(err.to_string().contains("not a singleton"));
        // a uniform function compiled stably has singleton supports
        let u = StableRealizer::new(f("half"))
            .unwrap()
            .materialize(&w(0, 1), 3)
            .unwrap();
        let a = u.input_clique(&q(1, 3)).unwrap();
        assert!(query_profile(&u.trace, &a).iter().all(|&(_, k)| k == 1));
    }

    #[test]
    fn parse_and_eval() {
        let e = parse_expression("add(1/3, 1/6)").unwrap();
        let r = eval_expression(&e, 20, &EvalOptions::default()).unwrap();
        assert!((r.value - q(1, 2)).abs() <= crate::reals::eps(20));
        let e = parse_expression("id(3/8)").unwrap();
        assert_eq!(
            eval_expression(&e, 3, &EvalOptions::default())
                .unwrap()
                .value,
            q(3, 8)
        );
        let e = parse_expression("clamp(0, 1, sqrt(2))").unwrap();
        assert_eq!(e.to_string(), "clamp(0,1,sqrt(2))");
        assert_eq!(
            eval_expression(&e, 8, &EvalOptions::default())
                .unwrap()
                .value,
            q(1, 1)
        );
        let sq = parse_expression("sq(3/2)").unwrap();
        assert!(eval_expression(&sq, 8, &EvalOptions::default()).is_err());
        let st = eval_expression(
            &sq,
            8,
            &EvalOptions {
                stable: true,
                window: None,
            },
        )
        .unwrap();
        assert!((st.value - q(9, 4)).abs() <= crate::reals::eps(8));
        assert_eq!(st.profile[0].per_output(), 2);
        let win = EvalOptions {
            stable: false,
            window: Some(w(-2, 2)),
        };
        assert!(
            (eval_expression(&sq, 8, &win).unwrap().value - q(9, 4)).abs() <= crate::reals::eps(8)
        );
        let out = EvalOptions {
            stable: false,
            window: Some(w(5, 6)),
        };
        assert!(eval_expression(&sq, 8, &out).is_err());
        for bad in ["add(1)", "foo(1)", "add(1,2", "scale(sqrt(2), 1)", ""] {
            assert!(parse_expression(bad).is_err(), "{bad}");
        }
    }

    #[test]
    fn modulus_on_reals() {
        let r = LinearRealizer::new(f("shift:1/3")).unwrap();
        let m = r.materialize(&w(0, 1), 6).unwrap();
        let (s, a) = real_modulus(&m, 4).unwrap();
        assert_eq!(s, 5);
        assert_eq!(a, level_anticover(5, &q_int(0), &q_int(1)));
        let samples = vec![(q(1, 3), q(11, 32)), (q(0, 1), q(1, 64))];
        assert!(modulus_pair_check(&r, 4, &samples).is_none());
    }

    #[test]
    fn named_constants() {
        let opts = EvalOptions { stable: false, window: Some(w(0, 4)) };
        let e = parse_expression("mul(phi, phi)").unwrap();
        let v = eval_expression(&e, 30, &opts).unwrap().value;
        // phi^2 = phi + 1 = 2.61803398874989...
        assert!(crate::reals::parse_rational("2.6180339877").unwrap() < v && v < crate::reals::parse_rational("2.6180339898").unwrap());
        assert!(parse_expression("sqrt2(1)").is_err());
    }

}
