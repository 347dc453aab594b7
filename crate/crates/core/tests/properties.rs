use cohspace_core::bits::BitSet;
use cohspace_core::descriptor::{parse_space_file, serialize_space, SpaceDescriptor};
use cohspace_core::realizers::{
    eval_expression, parse_expression, EvalOptions, FunctionSpec, LinearRealizer, StableRealizer,
};
use cohspace_core::reals::{eps, nearest, q, r_coherent, DyadicToken, Q};
use cohspace_core::totality::TotalityView;
use num_traits::Signed;
use proptest::prelude::*;
use std::collections::BTreeSet;

fn descriptor(n: usize, mask: u32, gen_mask: u32) -> SpaceDescriptor {
    let tokens: Vec<String> = (0..n).map(|i| format!("t{i}")).collect();
    let mut pairs = BTreeSet::new();
    let mut bit = 0;
    for x in 0..n {
        for y in x + 1..n {
            if mask >> bit & 1 == 1 {
                pairs.insert((x, y));
            }
            bit += 1;
        }
    }
    let d = SpaceDescriptor {
        name: "S".into(),
        tokens,
        pairs,
        generators: None,
    };
    let cliques = d.space().cliques_with_budget(usize::MAX, 1 << 12).unwrap();
    let gens: Vec<BitSet> = cliques
        .into_iter()
        .enumerate()
        .filter(|(i, _)| gen_mask >> (i % 32) & 1 == 1)
        .map(|(_, a)| a)
        .collect();
    SpaceDescriptor {
        generators: Some(gens),
        ..d
    }
}

fn a_prefix(v: &Q, top: u32) -> Vec<DyadicToken> {
    (0..=top).map(|k| nearest(v, k)).collect()
}

fn assert_clique(ts: &[DyadicToken]) -> Result<(), TestCaseError> {
    for x in ts {
        for y in ts {
            prop_assert!(r_coherent(x, y), "{x} and {y} are incoherent");
        }
    }
    Ok(())
}

const UNARY: [&str; 9] = [
    "id",
    "neg",
    "half",
    "scale:3",
    "shift:1/3",
    "abs",
    "min:1/2",
    "max:1/2",
    "clamp:-1:1",
];

proptest! {
    #[test]
    fn canonical_text_is_a_fixed_point(n in 1usize..6, mask in 0u32..1024, gens in any::<u32>()) {
        let d = descriptor(n, mask, gens);
        let text = serialize_space(&d);
        let back = parse_space_file(&text).unwrap();
        prop_assert_eq!(serialize_space(&back), text);
    }

    /// Co-total anti-cliques meet every total clique, uni-covers meet every strict point once.
    #[test]
    fn orthogonality(n in 1usize..5, mask in 0u32..64, gens in 1u32..u32::MAX) {
        let d = descriptor(n, mask, gens);
        let Ok(v) = TotalityView::from_generators(&d.space(), d.generators.as_ref().unwrap()) else {
            return Ok(());
        };
        for c in v.co() {
            for a in v.total() {
                prop_assert_eq!(c.intersection(a).len(), 1);
            }
        }
        for c in v.co_strict() {
            for a in v.strict() {
                prop_assert_eq!(c.intersection(a).len(), 1);
            }
        }
    }

    /// Outputs of a linear realizer on an approximation of x form a clique around f(x).
    #[test]
    fn linear_outputs_enclose(k in 0usize..UNARY.len(), p in -4000i64..4000, depth in 0u32..12) {
        let f = FunctionSpec::parse(UNARY[k]).unwrap();
        let x = q(p, 1000);
        let r = LinearRealizer::new(f.clone()).unwrap();
        let out = r.apply(&a_prefix(&x, r.source_level(depth)), depth);
        prop_assert_eq!(out.len(), depth as usize + 1);
        assert_clique(&out)?;
        let fx = f.eval(&[x]).unwrap();
        for h in &out {
            prop_assert!(h.contains(&fx), "{} outside {}", fx, h);
        }
    }

    #[test]
    fn sqrt_outputs_enclose(p in 0i64..4000, depth in 0u32..10) {
        let x = q(p, 1000);
        let r = LinearRealizer::new(FunctionSpec::parse("sqrt").unwrap()).unwrap();
        let out = r.apply(&a_prefix(&x, r.source_level(depth)), depth);
        prop_assert_eq!(out.len(), depth as usize + 1);
        for h in &out {
            let lo = h.lo().max(Q::from_integer(0.into()));
            prop_assert!(&lo * &lo <= x && x <= h.hi() * h.hi(), "sqrt({}) outside {}", x, h);
        }
    }

    /// The stable realizer of x² reads a coarse token first and still encloses x².
    #[test]
    fn stable_square_encloses(p in -4000i64..4000, depth in 0u32..8) {
        let x = q(p, 1000);
        let r = StableRealizer::new(FunctionSpec::parse("sq").unwrap()).unwrap();
        let top = r.source_level(&nearest(&x, 0), depth);
        let out = r.apply(&a_prefix(&x, top), depth);
        prop_assert_eq!(out.len(), depth as usize + 1);
        assert_clique(&out)?;
        for h in &out {
            prop_assert!(h.contains(&(&x * &x)));
        }
    }

    #[test]
    fn composite_expressions(a in -500i64..500, b in -500i64..500, n in 0u32..24) {
        let (x, y) = (q(a, 37), q(b, 41));
        let e = parse_expression(&format!("add(neg(half({a}/37)),{b}/41)")).unwrap();
        let got = eval_expression(&e, n, &EvalOptions::default()).unwrap();
        prop_assert!((got.value - (y - x / Q::from_integer(2.into()))).abs() <= eps(n));
    }
}
