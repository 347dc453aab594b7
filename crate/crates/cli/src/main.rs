//! `cohspace`: command-line front end.
//!
//! Exit codes: 0 when every requested check passes, 1 when a check fails or
//! its hypotheses do not hold, 2 on usage or input errors.

use clap::{Parser, Subcommand, ValueEnum};
use cohspace_core::bits::BitSet;
use cohspace_core::descriptor::{parse_space_file, serialize_space, SpaceDescriptor};
use cohspace_core::maps::{parse_trace, write_trace};
use cohspace_core::realizers::{
    eval_expression, parse_expression, query_profile, realization_check, EvalOptions, FunctionSpec,
    LinearRealizer, Materialized, StableRealizer,
};
use cohspace_core::reals::{parse_rational, Window, Q};
use cohspace_core::reps::{
    build_standard_rep, chain_connected, extension_trace, linearish_check, parse_uniform_file,
    unicover_shape_refutation, QuotientVerdict,
};
use cohspace_core::sweep::views_up_to;
use cohspace_core::totality::{
    check_bang_completeness, check_tensor_completeness, is_total_trace, TotalityView,
};
use cohspace_core::uniformity::{
    modulus_for, modulus_violation, verify_uniformity_axioms, Axiom, Flavor, Key, UniformView,
};
use cohspace_core::{Error, Space};
use serde_json::{json, Value};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

const SCHEMA: &str = "cohspace-report";
const SCHEMA_VERSION: u32 = 1;

#[derive(Parser)]
#[command(
    name = "cohspace",
    version,
    about = "Coherence spaces with totality, induced uniformities, and real realizers"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
    /// Print a machine-readable JSON report instead of text
    #[arg(long, global = true)]
    json: bool,
    /// Seed for sampled checks
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Upper bound on enumerated objects
    #[arg(long, global = true, default_value_t = 1 << 16)]
    budget: usize,
}

#[derive(Clone, Copy, ValueEnum)]
enum CoverKind {
    Uni,
    Unbounded,
}

#[derive(Subcommand)]
enum Cmd {
    /// Parse a space file, close its totality, and optionally check a trace
    Check {
        file: PathBuf,
        /// Linear or stable trace from this space
        #[arg(long)]
        trace: Option<PathBuf>,
        /// Target space of the trace
        #[arg(long)]
        target: Option<PathBuf>,
        /// Print the canonical serialization of the space
        #[arg(long)]
        canonical: bool,
    },
    /// Internal completeness of tensor and bang
    Complete {
        #[arg(long, num_args = 2, value_names = ["X", "Y"])]
        tensor: Option<Vec<PathBuf>>,
        #[arg(long, value_name = "X")]
        bang: Option<PathBuf>,
        /// Every space and totality on at most this many tokens
        #[arg(long, value_name = "TOKENS")]
        sweep: Option<usize>,
    },
    /// Covers induced by a totality, the axioms, fineness, Scott and bang checks
    Unif {
        file: PathBuf,
        #[arg(long, value_enum, default_value = "uni")]
        covers: CoverKind,
        #[arg(long)]
        axioms: bool,
        /// Refine every cover of the points by strict upper sets
        #[arg(long)]
        fine: bool,
        #[arg(long)]
        scott: bool,
        /// Compare unbounded covers of X with uni-covers of !X
        #[arg(long)]
        bang: bool,
        /// Moduli of a linear trace into --target, one per uni-cover of the target
        #[arg(long, requires = "target")]
        modulus: Option<PathBuf>,
        #[arg(long)]
        target: Option<PathBuf>,
    },
    /// Standard representation of a uniform-space descriptor
    Reps {
        file: PathBuf,
        #[arg(long, default_value_t = 3)]
        depth: usize,
        #[arg(long)]
        linearish: bool,
        /// Build the extension of the representation along itself
        #[arg(long)]
        extend: bool,
        #[arg(long)]
        chain: bool,
        /// Test a candidate uni-cover `{tok ...}`, or `all` for every level
        /// family and every single-block deletion
        #[arg(long)]
        quotient: Option<String>,
    },
    /// Compile a built-in real function to a trace
    Realize {
        #[arg(long = "fn", value_name = "NAME[:PARAM...]")]
        function: String,
        #[arg(long, default_value_t = 6)]
        depth: u32,
        #[arg(long, num_args = 2, value_names = ["LO", "HI"], allow_hyphen_values = true)]
        window: Option<Vec<String>>,
        #[arg(long)]
        stable: bool,
        #[arg(long)]
        validate: bool,
        /// Inputs sampled by --validate
        #[arg(long, default_value_t = 100)]
        samples: usize,
        #[arg(long, value_name = "TRACEFILE")]
        emit: Option<PathBuf>,
    },
    /// Evaluate an expression to within 2^-precision
    Realeval {
        expr: String,
        #[arg(long, default_value_t = 20)]
        precision: u32,
        #[arg(long)]
        profile: bool,
        #[arg(long, num_args = 2, value_names = ["LO", "HI"], allow_hyphen_values = true)]
        window: Option<Vec<String>>,
        #[arg(long)]
        stable: bool,
    },
    /// Source tokens read per output token on one input
    Profile {
        #[arg(long = "fn", value_name = "NAME[:PARAM...]")]
        function: String,
        #[arg(long, allow_hyphen_values = true)]
        at: String,
        #[arg(long, default_value_t = 4)]
        depth: u32,
        #[arg(long, num_args = 2, value_names = ["LO", "HI"], allow_hyphen_values = true)]
        window: Option<Vec<String>>,
        #[arg(long)]
        stable: bool,
    },
}

/// Outcome of a subcommand: text lines, JSON payload, pass/fail.
struct Report {
    command: &'static str,
    ok: bool,
    lines: Vec<String>,
    data: Value,
}

impl Report {
    fn new(command: &'static str) -> Report {
        Report {
            command,
            ok: true,
            lines: Vec::new(),
            data: json!({}),
        }
    }

    fn line(&mut self, s: impl Into<String>) {
        self.lines.push(s.into());
    }

    fn set(&mut self, key: &str, v: Value) {
        self.data[key] = v;
    }

    fn check(&mut self, name: &str, holds: bool, detail: impl Into<String>) {
        let detail = detail.into();
        self.ok &= holds;
        self.line(
            format!("{name}: {} {detail}", if holds { "PASS" } else { "FAIL" })
                .trim_end()
                .to_string(),
        );
        let checks = self
            .data
            .as_object_mut()
            .unwrap()
            .entry("checks")
            .or_insert_with(|| json!([]));
        checks
            .as_array_mut()
            .unwrap()
            .push(json!({"name": name, "holds": holds, "detail": detail}));
    }
}

enum Failure {
    /// Check could not be carried out as asked: exit 1.
    Check(String),
    /// Bad usage or input: exit 2.
    Input(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Failure {
        match e {
            Error::Hypothesis(_)
            | Error::Stability(_)
            | Error::InvalidTrace(_)
            | Error::Structure(_) => Failure::Check(e.to_string()),
            _ => Failure::Input(e.to_string()),
        }
    }
}

type Run = Result<Report, Failure>;

fn read(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

fn load_space(path: &Path) -> Result<SpaceDescriptor, Failure> {
    parse_space_file(&read(path)?).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

fn view_of(d: &SpaceDescriptor) -> Result<TotalityView, Failure> {
    let gens = d
        .generators
        .as_ref()
        .ok_or_else(|| Failure::Input(format!("space {} declares no totality", d.name)))?;
    Ok(TotalityView::from_generators(&d.space(), gens)?)
}

fn labels(space: &Space, sets: &[BitSet]) -> Vec<String> {
    sets.iter().map(|a| space.set_label(a)).collect()
}

fn window_arg(w: &Option<Vec<String>>) -> Result<Window, Failure> {
    match w {
        None => Ok(Window::new(
            Q::from_integer(0.into()),
            Q::from_integer(1.into()),
        )?),
        Some(v) => Ok(Window::new(parse_rational(&v[0])?, parse_rational(&v[1])?)?),
    }
}

fn check(file: &Path, trace: Option<&Path>, target: Option<&Path>, canonical: bool) -> Run {
    let mut r = Report::new("check");
    let d = load_space(file)?;
    let space = d.space();
    r.line(format!(
        "space {}: {} tokens, {} strict pairs",
        d.name,
        space.len(),
        d.pairs.len()
    ));
    r.set(
        "space",
        json!({"name": d.name, "tokens": space.labels(), "strict_pairs": d.pairs.len()}),
    );
    if canonical {
        r.line(serialize_space(&d).trim_end().to_string());
    }
    let view = match &d.generators {
        Some(_) => {
            let v = view_of(&d)?;
            r.line(format!(
                "total cliques ({}): {}",
                v.total().len(),
                labels(&space, v.total()).join(" ")
            ));
            r.line(format!(
                "strict points ({}): {}",
                v.strict().len(),
                labels(&space, v.strict()).join(" ")
            ));
            r.line(format!(
                "co-total anti-cliques ({}): {}",
                v.co().len(),
                labels(&space, v.co()).join(" ")
            ));
            r.line(format!(
                "uni-covers ({}): {}",
                v.co_strict().len(),
                labels(&space, v.co_strict()).join(" ")
            ));
            r.set(
                "totality",
                json!({
                    "total": labels(&space, v.total()),
                    "strict": labels(&space, v.strict()),
                    "co_total": labels(&space, v.co()),
                    "co_strict": labels(&space, v.co_strict()),
                }),
            );
            Some(v)
        }
        None => {
            r.line("no totality declared");
            None
        }
    };
    if let Some(path) = trace {
        let target = target.ok_or_else(|| Failure::Input("--trace needs --target".into()))?;
        let e = load_space(target)?;
        let (x, y) = (space.clone(), e.space());
        let t = parse_trace(&read(path)?, &|name| {
            [&x, &y].into_iter().find(|s| s.name() == name).cloned()
        })?;
        let v = t.violation();
        let detail = v
            .as_ref()
            .map(|v| format!("{} against {}", v.first, v.second))
            .unwrap_or_default();
        r.check("trace valid", v.is_none(), detail);
        if let (Some(vx), Some(_), true) = (&view, &e.generators, v.is_none()) {
            let total = is_total_trace(&t, vx, &view_of(&e)?)?;
            r.check("trace total", total, "");
        }
    }
    Ok(r)
}

fn complete(tensor: Option<&[PathBuf]>, bang: Option<&Path>, sweep: Option<usize>) -> Run {
    let mut r = Report::new("complete");
    if tensor.is_none() && bang.is_none() && sweep.is_none() {
        return Err(Failure::Input(
            "give --tensor X Y, --bang X or --sweep N".into(),
        ));
    }
    if let Some([a, b]) = tensor {
        let (vx, vy) = (view_of(&load_space(a)?)?, view_of(&load_space(b)?)?);
        let rep = check_tensor_completeness(&vx, &vy)?;
        let sp = Space::tensor(vx.space(), vy.space());
        r.line(format!(
            "strict part of the lifted totality: {}",
            labels(&sp, &rep.lifted_strict).join(" ")
        ));
        let detail = rep
            .counterexample
            .map(|c| format!("counterexample {}", sp.set_label(&c)))
            .unwrap_or_default();
        r.check("tensor completeness", rep.holds, detail);
    }
    if let Some(a) = bang {
        let vx = view_of(&load_space(a)?)?;
        let rep = check_bang_completeness(&vx)?;
        let sp = Space::bang(vx.space())?;
        r.line(format!(
            "strict part of the lifted totality: {}",
            labels(&sp, &rep.lifted_strict).join(" ")
        ));
        let detail = rep
            .counterexample
            .map(|c| format!("counterexample {}", sp.set_label(&c)))
            .unwrap_or_default();
        r.check("bang completeness", rep.holds, detail);
    }
    if let Some(n) = sweep {
        if n > 3 {
            return Err(Failure::Input("sweeps are limited to 3 tokens".into()));
        }
        let views = views_up_to(n, false)?;
        let (mut pairs, mut skipped, mut failures) = (0, 0, 0);
        for vx in &views {
            failures += usize::from(!check_bang_completeness(vx)?.holds);
            for vy in &views {
                match check_tensor_completeness(vx, vy) {
                    Ok(rep) => {
                        pairs += 1;
                        failures += usize::from(!rep.holds);
                    }
                    Err(Error::Hypothesis(_)) => skipped += 1,
                    Err(e) => return Err(e.into()),
                }
            }
        }
        r.check(
            "sweep",
            failures == 0,
            format!("{} views, {pairs} tensor pairs ({skipped} outside hypotheses), {failures} failures", views.len()),
        );
    }
    Ok(r)
}

fn key_label(uv: &UniformView, k: &Key) -> String {
    match k {
        Key::Token(t) => uv.space().label(*t).to_string(),
        Key::Clique(a) => uv.space().set_label(a),
        Key::Explicit => "-".into(),
    }
}

#[allow(clippy::too_many_arguments)]
fn unif(
    file: &Path,
    kind: CoverKind,
    axioms: bool,
    fine: bool,
    scott: bool,
    bang: bool,
    modulus: Option<&Path>,
    target: Option<&Path>,
    budget: usize,
) -> Run {
    let mut r = Report::new("unif");
    let d = load_space(file)?;
    let uv = UniformView::new(view_of(&d)?)?;
    let space = uv.space().clone();
    let points: Vec<String> = labels(&space, uv.points());
    r.line(format!("points: {}", points.join(" ")));
    let flavor = match kind {
        CoverKind::Uni => Flavor::Uni,
        CoverKind::Unbounded => Flavor::Unbounded,
    };
    if uv.points().is_empty() {
        return Err(Failure::Check("the totality has no strict points".into()));
    }
    if let CoverKind::Unbounded = kind {
        let n = uv.unbounded_covers_with_budget(budget)?.len();
        r.line(format!("{n} unbounded covers"));
    }
    let covers = uv.enumerate_covers(flavor)?;
    let mut out = Vec::new();
    for (i, c) in covers.iter().enumerate() {
        r.line(format!("cover {}", i + 1));
        let mut blocks = Vec::new();
        for b in c.blocks() {
            let pts: Vec<&str> = b.points.iter().map(|p| points[p].as_str()).collect();
            r.line(format!(
                "block {}: {}",
                key_label(&uv, &b.key),
                pts.join(" ")
            ));
            blocks.push(json!({"key": key_label(&uv, &b.key), "points": pts}));
        }
        out.push(json!(blocks));
    }
    r.set("points", json!(points));
    r.set("covers", json!(out));
    if axioms {
        let which: &[Axiom] = match kind {
            CoverKind::Uni => &[Axiom::U3, Axiom::U4],
            CoverKind::Unbounded => &[Axiom::U1, Axiom::U2, Axiom::U3, Axiom::U4],
        };
        for a in verify_uniformity_axioms(&covers, points.len(), which)? {
            r.check(
                &format!("{:?}", a.axiom),
                a.holds,
                a.witness.unwrap_or_default(),
            );
        }
    }
    if fine {
        let keys: Vec<BitSet> = space
            .cliques_with_budget(usize::MAX, budget)?
            .into_iter()
            .filter(|a| !uv.upper(a).is_empty())
            .collect();
        let keys = cohspace_core::uniformity::distinct_block_keys(&uv, &keys);
        if keys.len() > 16 {
            return Err(Failure::Input(format!(
                "{} strict upper sets are too many to combine",
                keys.len()
            )));
        }
        let all = BitSet::full(points.len());
        let (mut checked, mut bad) = (0, None);
        for m in 1u32..(1 << keys.len()) {
            let gens: Vec<BitSet> = keys
                .iter()
                .enumerate()
                .filter(|(i, _)| m >> i & 1 == 1)
                .map(|(_, a)| a.clone())
                .collect();
            if gens
                .iter()
                .fold(BitSet::new(), |u, a| u.union(&uv.upper(a)))
                != all
            {
                continue;
            }
            let refined = uv.refine_open_cover(&gens)?;
            let ok = uv.is_unbounded_total(&refined)
                && refined
                    .iter()
                    .all(|b| gens.iter().any(|a| uv.upper(b).is_subset(&uv.upper(a))));
            if !ok && bad.is_none() {
                bad = Some(labels(&space, &gens).join(" "));
            }
            checked += 1;
        }
        r.check(
            "fine",
            bad.is_none(),
            bad.map(|g| format!("not refined: {g}"))
                .unwrap_or(format!("{checked} open covers")),
        );
    }
    if scott {
        let mut bad = None;
        for keys in uv.unbounded_covers_with_budget(budget)? {
            if let Some(p) = uv.scott_witness(&keys)? {
                bad = Some(format!(
                    "point {} against {}",
                    points[p],
                    labels(&space, &keys).join(" ")
                ));
                break;
            }
        }
        r.check("scott", bad.is_none(), bad.unwrap_or_default());
    }
    if bang {
        let h = uv.check_bang_homeomorphism()?;
        r.check(
            "bang homeomorphism",
            h.holds(),
            format!(
                "bijection {}, covers coincide {}, blocks match {}",
                h.bijection, h.covers_coincide, h.blocks_match
            ),
        );
    }
    if let (Some(path), Some(target)) = (modulus, target) {
        let e = load_space(target)?;
        let vy = view_of(&e)?;
        let (x, y) = (space.clone(), vy.space().clone());
        let f = parse_trace(&read(path)?, &|name| {
            [&x, &y].into_iter().find(|s| s.name() == name).cloned()
        })?;
        let mut bad = None;
        for b in vy.co_strict() {
            let a = modulus_for(&f, uv.view(), &vy, b)?;
            r.line(format!(
                "modulus of {}: {}",
                y.set_label(b),
                x.set_label(&a)
            ));
            if let Some((p, q)) = modulus_violation(&f, uv.view(), &a, b) {
                bad.get_or_insert(format!("{} and {}", x.set_label(&p), x.set_label(&q)));
            }
        }
        r.check("modulus", bad.is_none(), bad.unwrap_or_default());
    }
    Ok(r)
}

fn reps(
    file: &Path,
    depth: usize,
    linearish: bool,
    extend: bool,
    chain: bool,
    quotient: Option<&str>,
) -> Run {
    let mut r = Report::new("reps");
    let d = parse_uniform_file(&read(file)?)
        .map_err(|e| Failure::Input(format!("{}: {e}", file.display())))?;
    let rep = build_standard_rep(&d, depth)?;
    let counts: Vec<usize> = (1..=depth).map(|n| rep.level_family(n).len()).collect();
    r.line(format!(
        "{}: {} tokens, per level {:?}",
        rep.space().name(),
        rep.space().len(),
        counts
    ));
    r.set("tokens_per_level", json!(counts));
    r.check("directed", d.is_directed(), "");
    if chain {
        let mut flags = Vec::new();
        for n in 1..=depth {
            let c = chain_connected(&d, n)?;
            r.line(format!(
                "level {n}: {}chain-connected",
                if c { "" } else { "not " }
            ));
            flags.push(c);
        }
        r.set("chain_connected", json!(flags));
    }
    if linearish {
        let l = linearish_check(&rep, &d, depth);
        let detail = match l.violation {
            Some((x, y)) => format!(
                "disjoint images at {} and {}",
                rep.space().label(x),
                rep.space().label(y)
            ),
            None => format!("{} coherent pairs", l.coherent_pairs),
        };
        r.check("linearish", l.holds(), detail);
    }
    if extend {
        let e = extension_trace(&rep, &rep, depth)?;
        let levels: Vec<usize> = e.source_cover.iter().map(|k| k + 1).collect();
        r.check(
            "extension",
            e.trace.is_valid(),
            format!("{} pairs, source levels {levels:?}", e.trace.len()),
        );
    }
    if let Some(q) = quotient {
        let cands: Vec<(String, BitSet)> = if q == "all" {
            let mut v = Vec::new();
            for n in 1..=depth {
                let fam = rep.level_family(n);
                v.push((format!("level {n}"), fam.clone()));
                for t in fam.iter() {
                    v.push((
                        format!("level {n} without {}", rep.space().label(t)),
                        fam.without(t),
                    ));
                }
            }
            v
        } else {
            vec![(q.to_string(), rep.space().parse_set(q)?)]
        };
        let mut verdicts = Vec::new();
        for (name, c) in cands {
            let line = match unicover_shape_refutation(&rep, &c) {
                Err(Error::Precondition(why)) => format!("{name}: not tested, {why}"),
                Err(e) => return Err(e.into()),
                Ok(QuotientVerdict::LevelForm(n)) => format!("{name}: consistent with level {n}"),
                Ok(QuotientVerdict::Refuted(w)) => format!(
                    "{name}: refuted at {} (kept {}, missing {}): a = {} meets {} of its blocks, a' = {} meets {}",
                    w.point,
                    rep.space().label(w.kept),
                    rep.space().label(w.missing),
                    rep.space().set_label(&w.a),
                    w.meet_a,
                    rep.space().set_label(&w.a_prime),
                    w.meet_a_prime
                ),
            };
            verdicts.push(json!(line));
            r.line(line);
        }
        r.set("quotient", json!(verdicts));
    }
    Ok(r)
}

fn materialize(
    f: &FunctionSpec,
    window: &Window,
    depth: u32,
    stable: bool,
) -> Result<Materialized, Failure> {
    if stable || !f.is_uniform() {
        if !stable {
            return Err(Failure::Input(format!(
                "{f} is not uniformly continuous; pass --stable"
            )));
        }
        Ok(StableRealizer::new(f.clone())?.materialize(window, depth)?)
    } else {
        Ok(LinearRealizer::new(f.clone())?.materialize(window, depth)?)
    }
}

#[allow(clippy::too_many_arguments)]
fn realize(
    function: &str,
    depth: u32,
    window: &Option<Vec<String>>,
    stable: bool,
    validate: bool,
    samples: usize,
    emit: Option<&Path>,
    seed: u64,
) -> Run {
    let mut r = Report::new("realize");
    let f = FunctionSpec::parse(function)?;
    let w = window_arg(window)?;
    let m = materialize(&f, &w, depth, stable)?;
    r.line(format!(
        "{f} on [{}, {}]: {} pairs, output levels 0..={depth}",
        w.lo,
        w.hi,
        m.trace.len()
    ));
    r.set("function", json!(f.to_string()));
    r.set("pairs", json!(m.trace.len()));
    if validate {
        let v = m.trace.violation();
        r.check(
            "valid",
            v.is_none(),
            v.map(|v| format!("{} against {}", v.first, v.second))
                .unwrap_or_default(),
        );
        if !stable && f.arity() == 1 {
            let n = LinearRealizer::new(f.clone())?.check_containment(&w, depth)?;
            r.check("containment", true, format!("{n} source tokens"));
        }
        if f.arity() == 1 {
            let inputs = sample_inputs(&w, samples, seed);
            let rep = realization_check(&m, &f, &inputs, depth)?;
            let detail = rep
                .failures
                .first()
                .map(|(q, why)| format!("at {q}: {why}"))
                .unwrap_or(format!("{} inputs", rep.checked));
            r.check("realizes", rep.holds(), detail);
        }
    }
    if let Some(path) = emit {
        std::fs::write(path, write_trace(&m.trace))
            .map_err(|e| Failure::Input(format!("{}: {e}", path.display())))?;
        r.line(format!("trace written to {}", path.display()));
    }
    Ok(r)
}

/// Evenly spread rationals of the window, shifted by the seed.
fn sample_inputs(w: &Window, k: usize, seed: u64) -> Vec<Q> {
    let k = k.max(1);
    let offset = Q::new(((seed % 997) as i64).into(), 997.into());
    (0..k)
        .map(|i| {
            let t =
                (Q::from_integer((i as i64).into()) + &offset) / Q::from_integer((k as i64).into());
            &w.lo + (&w.hi - &w.lo) * t
        })
        .collect()
}

fn realeval(
    expr: &str,
    precision: u32,
    profile: bool,
    window: &Option<Vec<String>>,
    stable: bool,
) -> Run {
    let mut r = Report::new("realeval");
    let e = parse_expression(expr)?;
    let window = window.as_ref().map(|_| window_arg(window)).transpose()?;
    let ev = eval_expression(&e, precision, &EvalOptions { stable, window })?;
    r.line(format!("{e} = {} (within 2^-{precision})", ev.value));
    r.set("expression", json!(e.to_string()));
    r.set("value", json!(ev.value.to_string()));
    r.set("token", json!(ev.token.to_string()));
    if profile {
        let mut prof = Vec::new();
        for p in &ev.profile {
            r.line(format!(
                "{}: {} outputs, {} queries each",
                p.node,
                p.outputs,
                p.per_output()
            ));
            prof.push(
                json!({"node": p.node, "outputs": p.outputs, "queries_per_output": p.per_output()}),
            );
        }
        r.set("profile", json!(prof));
    }
    Ok(r)
}

fn profile(
    function: &str,
    at: &str,
    depth: u32,
    window: &Option<Vec<String>>,
    stable: bool,
) -> Run {
    let mut r = Report::new("profile");
    let f = FunctionSpec::parse(function)?;
    if f.arity() != 1 {
        return Err(Failure::Input("profiles are for unary functions".into()));
    }
    let w = window_arg(window)?;
    let m = materialize(&f, &w, depth, stable)?;
    let v = parse_rational(at)?;
    let a = m.input_clique(&v)?;
    let mut out = Vec::new();
    for (o, k) in query_profile(&m.trace, &a) {
        let label = m.trace.dst().label(o).to_string();
        r.line(format!("{label}: {k}"));
        out.push(json!({"output": label, "sources": k}));
    }
    r.set("profile", json!(out));
    Ok(r)
}

fn run(cli: &Cli) -> Run {
    match &cli.cmd {
        Cmd::Check {
            file,
            trace,
            target,
            canonical,
        } => check(file, trace.as_deref(), target.as_deref(), *canonical),
        Cmd::Complete {
            tensor,
            bang,
            sweep,
        } => complete(tensor.as_deref(), bang.as_deref(), *sweep),
        Cmd::Unif {
            file,
            covers,
            axioms,
            fine,
            scott,
            bang,
            modulus,
            target,
        } => unif(
            file,
            *covers,
            *axioms,
            *fine,
            *scott,
            *bang,
            modulus.as_deref(),
            target.as_deref(),
            cli.budget,
        ),
        Cmd::Reps {
            file,
            depth,
            linearish,
            extend,
            chain,
            quotient,
        } => reps(
            file,
            *depth,
            *linearish,
            *extend,
            *chain,
            quotient.as_deref(),
        ),
        Cmd::Realize {
            function,
            depth,
            window,
            stable,
            validate,
            samples,
            emit,
        } => realize(
            function,
            *depth,
            window,
            *stable,
            *validate,
            *samples,
            emit.as_deref(),
            cli.seed,
        ),
        Cmd::Realeval {
            expr,
            precision,
            profile,
            window,
            stable,
        } => realeval(expr, *precision, *profile, window, *stable),
        Cmd::Profile {
            function,
            at,
            depth,
            window,
            stable,
        } => profile(function, at, *depth, window, *stable),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (code, body) = match run(&cli) {
        Ok(r) => {
            let code = if r.ok { 0 } else { 1 };
            if cli.json {
                let v = json!({"schema": SCHEMA, "version": SCHEMA_VERSION, "command": r.command, "ok": r.ok, "data": r.data});
                (code, serde_json::to_string_pretty(&v).unwrap())
            } else {
                (code, r.lines.join("\n"))
            }
        }
        Err(f) => {
            let (code, msg) = match f {
                Failure::Check(m) => (1, m),
                Failure::Input(m) => (2, m),
            };
            if cli.json {
                let v =
                    json!({"schema": SCHEMA, "version": SCHEMA_VERSION, "ok": false, "error": msg});
                println!("{}", serde_json::to_string_pretty(&v).unwrap());
            } else {
                eprintln!("error: {msg}");
            }
            return ExitCode::from(code);
        }
    };
    println!("{body}");
    ExitCode::from(code)
}
