//! The dyadic coherence space R.
//!
//! A token (m, n) stands for m/2ⁿ with the closed interval
//! [(m−1)/2ⁿ, (m+1)/2ⁿ]. Two tokens are strictly coherent when their levels
//! differ and their intervals meet. All arithmetic is exact.

use crate::bits::BitSet;
use crate::error::{Error, Result};
use crate::space::{CoherenceOracle, LazySpace, Space, Token};
use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use std::fmt;
use std::sync::Arc;

pub type Q = BigRational;

pub fn pow2(n: u32) -> BigInt {
    BigInt::one() << n as usize
}

pub fn q(n: i64, d: i64) -> Q {
    Q::new(BigInt::from(n), BigInt::from(d))
}

pub fn q_int(n: impl Into<BigInt>) -> Q {
    Q::from_integer(n.into())
}

/// 2^-n as a rational.
pub fn eps(n: u32) -> Q {
    Q::new(BigInt::one(), pow2(n))
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct DyadicToken {
    pub m: BigInt,
    pub n: u32,
}

impl DyadicToken {
    pub fn new(m: impl Into<BigInt>, n: u32) -> DyadicToken {
        DyadicToken { m: m.into(), n }
    }

    pub fn value(&self) -> Q {
        Q::new(self.m.clone(), pow2(self.n))
    }

    pub fn lo(&self) -> Q {
        Q::new(&self.m - 1, pow2(self.n))
    }

    pub fn hi(&self) -> Q {
        Q::new(&self.m + 1, pow2(self.n))
    }

    pub fn contains(&self, v: &Q) -> bool {
        self.lo() <= *v && *v <= self.hi()
    }

    pub fn meets(&self, other: &DyadicToken) -> bool {
        self.lo() <= other.hi() && other.lo() <= self.hi()
    }

    /// Parse `(m,n)`.
    pub fn parse(s: &str) -> Result<DyadicToken> {
        let inner = s
            .trim()
            .strip_prefix('(')
            .and_then(|r| r.strip_suffix(')'))
            .ok_or_else(|| Error::Domain(format!("expected (m,n), found `{s}`")))?;
        let (m, n) = inner
            .split_once(',')
            .ok_or_else(|| Error::Domain(format!("expected (m,n), found `{s}`")))?;
        let m: BigInt = m
            .trim()
            .parse()
            .map_err(|_| Error::Domain(format!("bad numerator in `{s}`")))?;
        let n: u32 = n
            .trim()
            .parse()
            .map_err(|_| Error::Domain(format!("bad level in `{s}`")))?;
        Ok(DyadicToken { m, n })
    }
}

impl fmt::Display for DyadicToken {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.m, self.n)
    }
}

pub fn r_strict(x: &DyadicToken, y: &DyadicToken) -> bool {
    x.n != y.n && x.meets(y)
}

pub fn r_coherent(x: &DyadicToken, y: &DyadicToken) -> bool {
    x == y || r_strict(x, y)
}

pub fn floor_q(v: &Q) -> BigInt {
    v.numer().div_floor(v.denom())
}

pub fn ceil_q(v: &Q) -> BigInt {
    -((-v.numer()).div_floor(v.denom()))
}

/// Nearest integer, ties to even.
pub fn round_even(v: &Q) -> BigInt {
    let f = floor_q(v);
    let frac = v - q_int(f.clone());
    let half = q(1, 2);
    if frac > half || (frac == half && f.is_odd()) {
        f + 1
    } else {
        f
    }
}

/// The level-n dyadic nearest to v.
pub fn nearest(v: &Q, n: u32) -> DyadicToken {
    DyadicToken::new(round_even(&(v * q_int(pow2(n)))), n)
}

/// The level-n dyadic nearest to √v, for v ≥ 0.
pub fn nearest_sqrt(v: &Q, n: u32) -> DyadicToken {
    assert!(!v.is_negative());
    let scaled = v * q_int(pow2(2 * n));
    let m0 = floor_q(&scaled).sqrt();
    let mid = q_int(m0.clone()) + q(1, 2);
    let mid_sq = &mid * &mid;
    let up = scaled > mid_sq || (scaled == mid_sq && m0.is_odd());
    DyadicToken::new(if up { m0 + 1 } else { m0 }, n)
}

/// Approximations of a real: |query(n) − x| ≤ 2⁻ⁿ⁻².
pub trait RealOracle {
    fn query(&self, n: u32) -> Q;
}

/// An exact rational.
#[derive(Clone, Debug)]
pub struct RationalReal(pub Q);

impl RealOracle for RationalReal {
    fn query(&self, _n: u32) -> Q {
        self.0.clone()
    }
}

/// √v for a nonnegative rational v, truncated at 2⁻ⁿ⁻².
#[derive(Clone, Debug)]
pub struct SqrtReal(pub Q);

impl RealOracle for SqrtReal {
    fn query(&self, n: u32) -> Q {
        let k = n + 2;
        let r = floor_q(&(&self.0 * q_int(pow2(2 * k)))).sqrt();
        Q::new(r, pow2(k))
    }
}

/// {x₀, .., x_depth}, xₙ the nearest level-n dyadic to query(n).
pub fn approx_clique(o: &dyn RealOracle, depth: u32) -> Result<Vec<DyadicToken>> {
    let a: Vec<DyadicToken> = (0..=depth).map(|n| nearest(&o.query(n), n)).collect();
    for (i, x) in a.iter().enumerate() {
        for y in &a[i + 1..] {
            if !r_strict(x, y) {
                return Err(Error::Data(format!(
                    "oracle answers at {x} and {y} are inconsistent"
                )));
            }
        }
    }
    Ok(a)
}

/// value(xₙ) for the level-n token of a.
pub fn rho_approx(a: &[DyadicToken], n: u32) -> Result<Q> {
    a.iter()
        .find(|x| x.n == n)
        .map(DyadicToken::value)
        .ok_or_else(|| Error::Precondition(format!("no level-{n} token")))
}

/// Numerator range of the level-n tokens meeting [lo, hi].
pub fn level_range(n: u32, lo: &Q, hi: &Q) -> (BigInt, BigInt) {
    let s = q_int(pow2(n));
    (
        ceil_q(&(lo * &s - q_int(1))),
        floor_q(&(hi * &s + q_int(1))),
    )
}

/// All level-n tokens whose intervals meet [lo, hi].
pub fn level_anticover(n: u32, lo: &Q, hi: &Q) -> Vec<DyadicToken> {
    let (a, b) = level_range(n, lo, hi);
    let mut out = Vec::new();
    let mut m = a;
    while m <= b {
        out.push(DyadicToken::new(m.clone(), n));
        m += 1;
    }
    out
}

/// Parse `p/q`, an integer, or a decimal literal, exactly.
pub fn parse_rational(s: &str) -> Result<Q> {
    let s = s.trim();
    let bad = || Error::Domain(format!("not a rational: `{s}`"));
    if let Some((p, d)) = s.split_once('/') {
        let p: BigInt = p.trim().parse().map_err(|_| bad())?;
        let d: BigInt = d.trim().parse().map_err(|_| bad())?;
        if d.is_zero() {
            return Err(bad());
        }
        return Ok(Q::new(p, d));
    }
    if let Some((w, f)) = s.split_once('.') {
        if f.is_empty() || !f.chars().all(|c| c.is_ascii_digit()) {
            return Err(bad());
        }
        let neg = w.starts_with('-');
        let w: BigInt = if w == "-" || w.is_empty() {
            BigInt::zero()
        } else {
            w.parse().map_err(|_| bad())?
        };
        let frac: BigInt = f.parse().map_err(|_| bad())?;
        let scale = num_traits::pow(BigInt::from(10), f.len());
        let mag = q_int(w.abs()) + Q::new(frac, scale);
        return Ok(if neg { -mag } else { mag });
    }
    Ok(q_int(s.parse::<BigInt>().map_err(|_| bad())?))
}

/// A closed rational interval.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Window {
    pub lo: Q,
    pub hi: Q,
}

impl Window {
    pub fn new(lo: Q, hi: Q) -> Result<Window> {
        if lo > hi {
            return Err(Error::Domain(format!("empty window [{lo}, {hi}]")));
        }
        Ok(Window { lo, hi })
    }

    pub fn contains(&self, v: &Q) -> bool {
        self.lo <= *v && *v <= self.hi
    }
}

/// The whole of R, enumerated by Cantor pairing of (zigzag(m), n).
#[derive(Clone, Copy, Debug, Default)]
pub struct RealLine;

impl RealLine {
    pub fn token(index: u64) -> DyadicToken {
        let w = ((((8 * index as u128 + 1) as f64).sqrt() as u64).saturating_sub(1)) / 2;
        let w = (w.saturating_sub(1)..=w + 1)
            .rev()
            .find(|&w| w * (w + 1) / 2 <= index)
            .unwrap();
        let n = index - w * (w + 1) / 2;
        let z = w - n;
        let m = if z.is_multiple_of(2) {
            (z / 2) as i64
        } else {
            -(z.div_ceil(2) as i64)
        };
        DyadicToken::new(m, n as u32)
    }

    pub fn index(t: &DyadicToken) -> Option<u64> {
        let m = t.m.to_i64()?;
        let z = if m >= 0 {
            2 * m as u64
        } else {
            (2 * (-m) - 1) as u64
        };
        let n = t.n as u64;
        let w = z + n;
        Some(w * (w + 1) / 2 + n)
    }
}

impl LazySpace for RealLine {
    fn strictly_coherent(&self, x: u64, y: u64) -> bool {
        r_strict(&RealLine::token(x), &RealLine::token(y))
    }

    fn label(&self, x: u64) -> String {
        RealLine::token(x).to_string()
    }
}

/// Symbolic totality of R: T⊥ is the family of level anticovers, and a clique
/// is total up to a depth when it meets each of them once.
#[derive(Clone, Debug)]
pub struct RealTotality {
    pub window: Window,
}

impl RealTotality {
    pub fn co_member(&self, n: u32) -> Vec<DyadicToken> {
        level_anticover(n, &self.window.lo, &self.window.hi)
    }

    /// a ⊥ Dₙ within the window.
    pub fn meets_level(&self, a: &[DyadicToken], n: u32) -> bool {
        let (lo, hi) = level_range(n, &self.window.lo, &self.window.hi);
        a.iter()
            .filter(|x| x.n == n && x.m >= lo && x.m <= hi)
            .count()
            == 1
    }

    pub fn is_total_to(&self, a: &[DyadicToken], depth: u32) -> bool {
        (0..=depth).all(|n| self.meets_level(a, n))
    }

    /// Uni-covers streamed by level.
    pub fn uni_covers(&self) -> impl Iterator<Item = Vec<DyadicToken>> + '_ {
        (0u32..).map(move |n| self.co_member(n))
    }
}

/// Levels `min_level..=depth` of R restricted to a window, as a finite space
/// whose coherence is computed by interval search.
#[derive(Clone, Debug)]
pub struct BoundedReals {
    window: Window,
    min_level: u32,
    depth: u32,
    /// Per level: first numerator and token count.
    levels: Vec<(i64, usize)>,
    offsets: Vec<usize>,
}

impl BoundedReals {
    pub fn new(window: Window, min_level: u32, depth: u32) -> Result<BoundedReals> {
        if depth > 40 {
            return Err(Error::Budget(format!(
                "depth {depth} is too large to materialize"
            )));
        }
        let mut levels = Vec::new();
        let mut offsets = vec![0];
        for n in min_level..=depth {
            let (a, b) = level_range(n, &window.lo, &window.hi);
            let a = a.to_i64().ok_or(Error::Budget("window too wide".into()))?;
            let b = b.to_i64().ok_or(Error::Budget("window too wide".into()))?;
            let count = (b - a + 1).max(0) as usize;
            levels.push((a, count));
            offsets.push(offsets.last().unwrap() + count);
        }
        if *offsets.last().unwrap() > 1 << 24 {
            return Err(Error::Budget("too many tokens".into()));
        }
        Ok(BoundedReals {
            window,
            min_level,
            depth,
            levels,
            offsets,
        })
    }

    pub fn window(&self) -> &Window {
        &self.window
    }

    pub fn depth(&self) -> u32 {
        self.depth
    }

    pub fn min_level(&self) -> u32 {
        self.min_level
    }

    pub fn len(&self) -> usize {
        *self.offsets.last().unwrap()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn dyadic(&self, t: Token) -> DyadicToken {
        let li = self.offsets.partition_point(|&o| o <= t) - 1;
        let (a, _) = self.levels[li];
        DyadicToken::new(
            a + (t - self.offsets[li]) as i64,
            self.min_level + li as u32,
        )
    }

    pub fn index_of(&self, x: &DyadicToken) -> Option<Token> {
        if x.n < self.min_level || x.n > self.depth {
            return None;
        }
        let li = (x.n - self.min_level) as usize;
        let (a, count) = self.levels[li];
        let k = x.m.to_i64()?.checked_sub(a)?;
        (k >= 0 && (k as usize) < count).then(|| self.offsets[li] + k as usize)
    }

    pub fn level_tokens(&self, n: u32) -> std::ops::Range<Token> {
        let li = (n - self.min_level) as usize;
        self.offsets[li]..self.offsets[li + 1]
    }

    pub fn set_of(&self, a: &[DyadicToken]) -> Result<BitSet> {
        a.iter()
            .map(|x| {
                self.index_of(x)
                    .ok_or_else(|| Error::Domain(format!("{x} is outside the window")))
            })
            .collect()
    }

    pub fn tokens_of(&self, s: &BitSet) -> Vec<DyadicToken> {
        s.iter().map(|t| self.dyadic(t)).collect()
    }

    pub fn space(self: &Arc<Self>, name: &str) -> Arc<Space> {
        let labels = (0..self.len())
            .map(|t| self.dyadic(t).to_string())
            .collect();
        Space::from_oracle(name, labels, self.clone())
    }
}

impl CoherenceOracle for BoundedReals {
    fn strictly_coherent(&self, x: Token, y: Token) -> bool {
        r_strict(&self.dyadic(x), &self.dyadic(y))
    }

    fn neighbours(&self, x: Token) -> Vec<Token> {
        let d = self.dyadic(x);
        let mut out = Vec::new();
        for k in self.min_level..=self.depth {
            if k == d.n {
                continue;
            }
            // tokens (m',k) with (m'−1)/2ᵏ ≤ hi(d) and (m'+1)/2ᵏ ≥ lo(d)
            let s = q_int(pow2(k));
            let top = floor_q(&(d.hi() * &s + q_int(1)));
            let bot = ceil_q(&(d.lo() * &s - q_int(1)));
            let li = (k - self.min_level) as usize;
            let (a, count) = self.levels[li];
            let lo = bot.to_i64().unwrap_or(i64::MIN).max(a);
            let hi = top.to_i64().unwrap_or(i64::MAX).min(a + count as i64 - 1);
            for m in lo..=hi {
                out.push(self.offsets[li] + (m - a) as usize);
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn t(m: i64, n: u32) -> DyadicToken {
        DyadicToken::new(m, n)
    }

    #[test]
    fn coherence_examples() {
        assert!(r_strict(&t(0, 1), &t(1, 2)));
        assert!(!r_strict(&t(0, 2), &t(1, 2)));
        assert!(!r_strict(&t(0, 1), &t(4, 2)));
        assert!(r_coherent(&t(3, 3), &t(3, 3)));
    }

    #[test]
    fn rounding() {
        assert_eq!(round_even(&q(1, 2)), BigInt::from(0));
        assert_eq!(round_even(&q(3, 2)), BigInt::from(2));
        assert_eq!(round_even(&q(-1, 2)), BigInt::from(0));
        assert_eq!(round_even(&q(-3, 2)), BigInt::from(-2));
        assert_eq!(round_even(&q(5, 3)), BigInt::from(2));
        assert_eq!(nearest_sqrt(&q_int(2), 4), t(23, 4)); // √2·16 ≈ 22.63
        assert_eq!(nearest_sqrt(&q(9, 4), 1), t(3, 1));
        assert_eq!(nearest_sqrt(&Q::zero(), 3), t(0, 3));
    }

    #[test]
    fn approx_examples() {
        let a = approx_clique(&RationalReal(q(1, 3)), 2).unwrap();
        assert_eq!(a, vec![t(0, 0), t(1, 1), t(1, 2)]);
        let z = approx_clique(&RationalReal(Q::zero()), 5).unwrap();
        assert!(z.iter().all(|x| x.m.is_zero()));
        let a = approx_clique(&RationalReal(q(1, 3)), 10).unwrap();
        let err = (rho_approx(&a, 10).unwrap() - q(1, 3)).abs();
        assert!(err <= eps(10));
        assert!(rho_approx(&a, 11).is_err());
        let r = approx_clique(&SqrtReal(q_int(2)), 20).unwrap();
        let v = r[20].value();
        assert!(
            (&v - eps(20)) * (&v - eps(20)) <= q_int(2)
                && q_int(2) <= (&v + eps(20)) * (&v + eps(20))
        );
    }

    #[test]
    fn anticover_examples() {
        let d = level_anticover(0, &Q::zero(), &Q::one());
        assert_eq!(d, vec![t(-1, 0), t(0, 0), t(1, 0), t(2, 0)]);
        let tot = RealTotality {
            window: Window::new(Q::zero(), Q::one()).unwrap(),
        };
        let a = approx_clique(&RationalReal(q(2, 7)), 8).unwrap();
        assert!(tot.is_total_to(&a, 8));
        assert!(!tot.is_total_to(&a[..3], 8));
    }

    #[test]
    fn parse_examples() {
        assert_eq!(parse_rational("1/3").unwrap(), q(1, 3));
        assert_eq!(parse_rational("-0.25").unwrap(), q(-1, 4));
        assert_eq!(parse_rational("7").unwrap(), q_int(7));
        assert!(parse_rational("1/0").is_err());
        assert!(parse_rational("x").is_err());
        assert_eq!(DyadicToken::parse("(-3, 2)").unwrap(), t(-3, 2));
    }

    #[test]
    fn real_line_indexing() {
        for i in 0..2000u64 {
            assert_eq!(RealLine::index(&RealLine::token(i)), Some(i));
        }
    }

    #[test]
    fn bounded_neighbours_match_brute_force() {
        let b = Arc::new(BoundedReals::new(Window::new(q(-1, 2), q(3, 4)).unwrap(), 0, 5).unwrap());
        for x in 0..b.len() {
            let fast = b.neighbours(x);
            let slow: Vec<Token> = (0..b.len())
                .filter(|&y| y != x && r_strict(&b.dyadic(x), &b.dyadic(y)))
                .collect();
            assert_eq!(fast, slow, "at {}", b.dyadic(x));
            assert_eq!(b.index_of(&b.dyadic(x)), Some(x));
        }
    }

    proptest::proptest! {
        /// Coherent tokens have values within the sum of their radii.
        #[test]
        fn coherence_bounds_distance(m1 in -200i64..200, n1 in 0u32..8, m2 in -200i64..200, n2 in 0u32..8) {
            let (x, y) = (t(m1, n1), t(m2, n2));
            if r_coherent(&x, &y) {
                proptest::prop_assert!((x.value() - y.value()).abs() <= eps(n1) + eps(n2));
            }
        }

        /// Approximations are cliques, stay within 2⁻ⁿ, and meet every level anticover.
        #[test]
        fn approximations(p in -1000i64..1000, d in 1i64..500) {
            let v = q(p, d);
            let a = approx_clique(&RationalReal(v.clone()), 20).unwrap();
            for n in 0..=20 {
                let r = rho_approx(&a, n).unwrap();
                proptest::prop_assert!((r - &v).abs() <= eps(n));
            }
            let lo = &v - q_int(1);
            let hi = &v + q_int(1);
            let tot = RealTotality { window: Window::new(lo, hi).unwrap() };
            proptest::prop_assert!(tot.is_total_to(&a, 20));
        }
    }
}
