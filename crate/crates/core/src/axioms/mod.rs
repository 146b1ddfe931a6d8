//! Randomized and exhaustive checks of the six-functor identities on the
//! implemented instances, with shrinking and a registry of known
//! counterexamples.

pub mod checks;
pub mod gen;

use crate::exactalg::FieldSpec;
use crate::grpfun::{
    dual, is_cohomologically_proper, mackey_check, restrict, shriek_push, star_push, unit, upper_shriek,
    FinGroup, FinGroupoid, GpdMap, GroupoidCarrier, Verdict,
};
use crate::homlib::{derived_hom, homotopic, Complex};
use crate::kernels::{
    repair_unit, search_certificate, verdier_dual, InvertibilityWitness, ObjectCertificate, SmoothCertificate,
};
use crate::posetsheaf::{derived_push, derived_sections, fiber_product, model, restrict as prestrict, Model, MonotoneMap, Sheaf};
use checks::Case;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::sync::Arc;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum AxiomError {
    #[error("generator bounds exceeded: {0}")]
    Bounds(String),
    #[error("unknown suite {0:?}")]
    UnknownSuite(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Suite {
    Spheres,
    Kunneth,
    Excision,
    BaseChange,
    Projection,
    Condition4,
    Clopen,
    Compactification,
    Ambidexterity,
    Mackey,
    GroupAdjunction,
    Kernels,
    Certificates,
    Verdier,
    Registry,
}

impl Suite {
    pub const ALL: [Suite; 15] = [
        Suite::Spheres,
        Suite::Kunneth,
        Suite::Excision,
        Suite::BaseChange,
        Suite::Projection,
        Suite::Condition4,
        Suite::Clopen,
        Suite::Compactification,
        Suite::Ambidexterity,
        Suite::Mackey,
        Suite::GroupAdjunction,
        Suite::Kernels,
        Suite::Certificates,
        Suite::Verdier,
        Suite::Registry,
    ];

    pub fn name(self) -> String {
        serde_json::to_value(self).unwrap().as_str().unwrap().to_string()
    }

    fn index(self) -> u64 {
        Suite::ALL.iter().position(|&s| s == self).unwrap() as u64
    }
}

impl std::str::FromStr for Suite {
    type Err = AxiomError;

    fn from_str(s: &str) -> Result<Suite, AxiomError> {
        Suite::ALL.into_iter().find(|x| x.name() == s).ok_or_else(|| AxiomError::UnknownSuite(s.to_string()))
    }
}

#[derive(Debug, Clone)]
pub struct SuiteConfig {
    pub seed: u64,
    pub field: FieldSpec,
    pub max_poset: usize,
    pub max_group_order: usize,
    pub max_stalk_dim: usize,
    pub window: usize,
    pub suites: Vec<Suite>,
    /// Overrides the per-suite number of random cases.
    pub cases: Option<usize>,
}

impl SuiteConfig {
    pub fn new(seed: u64, field: FieldSpec) -> SuiteConfig {
        SuiteConfig {
            seed,
            field,
            max_poset: gen::MAX_POSET,
            max_group_order: gen::MAX_GROUP_ORDER,
            max_stalk_dim: 2,
            window: 3,
            suites: Suite::ALL.to_vec(),
            cases: None,
        }
    }

    pub fn validate(&self) -> Result<(), AxiomError> {
        let check = |what: &str, v: usize, lo: usize, hi: usize| {
            if v < lo || v > hi {
                Err(AxiomError::Bounds(format!("{what} = {v} outside {lo}..={hi}")))
            } else {
                Ok(())
            }
        };
        check("max_poset", self.max_poset, 1, gen::MAX_POSET)?;
        check("max_group_order", self.max_group_order, 1, gen::MAX_GROUP_ORDER)?;
        check("max_stalk_dim", self.max_stalk_dim, 1, gen::MAX_STALK_DIM)?;
        check("window", self.window, 1, 6)
    }

    fn cases(&self, default: usize) -> usize {
        self.cases.unwrap_or(default)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum Outcome {
    Pass { cases: usize },
    Fail { case: usize, reason: String, counterexample: serde_json::Value },
    ExpectedFail { witness: serde_json::Value },
    UnknownWithinWindow { detail: String },
}

impl Outcome {
    /// Passing, or failing where a failure is recorded as expected.
    pub fn is_expected(&self) -> bool {
        !matches!(self, Outcome::Fail { .. })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub seed: u64,
    pub field: String,
    pub checks: BTreeMap<String, Outcome>,
    pub totals: BTreeMap<String, usize>,
}

impl Report {
    pub fn ok(&self) -> bool {
        self.checks.values().all(Outcome::is_expected)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).unwrap()
    }
}

fn suite_rng(cfg: &SuiteConfig, suite: Suite) -> ChaCha8Rng {
    let mut r = ChaCha8Rng::seed_from_u64(cfg.seed);
    r.set_stream(suite.index());
    r
}

fn run_cases<C: Case>(
    n: usize,
    r: &mut ChaCha8Rng,
    gen: impl Fn(u64) -> C,
    prop: impl Fn(&C) -> Result<(), String>,
) -> Outcome {
    for i in 0..n {
        let c = gen(r.gen());
        if let Err(reason) = prop(&c) {
            let small = checks::shrink(c, |c| prop(c).is_err());
            let reason = prop(&small).err().unwrap_or(reason);
            return Outcome::Fail { case: i, reason, counterexample: small.describe() };
        }
    }
    Outcome::Pass { cases: n }
}

fn all_pass(results: Vec<(String, Result<(), String>)>) -> Outcome {
    let n = results.len();
    for (i, (name, r)) in results.into_iter().enumerate() {
        if let Err(reason) = r {
            return Outcome::Fail { case: i, reason, counterexample: serde_json::json!({ "instance": name }) };
        }
    }
    Outcome::Pass { cases: n }
}

fn spheres(cfg: &SuiteConfig) -> Outcome {
    let results = (0..=3)
        .map(|n| {
            let (p, _) = model(Model::Sphere(n));
            let k = Sheaf::constant(p.clone(), cfg.field).complex(0);
            let got = derived_sections(&p, &k).betti_profile();
            let want: BTreeMap<i32, usize> =
                if n == 0 { BTreeMap::from([(0, 2)]) } else { BTreeMap::from([(0, 1), (n as i32, 1)]) };
            let r = if got == want { Ok(()) } else { Err(format!("H^*(S^{n}) = {got:?}")) };
            (format!("sphere:{n}"), r)
        })
        .collect();
    all_pass(results)
}

fn poset_suite(cfg: &SuiteConfig, suite: Suite) -> Outcome {
    let mut r = suite_rng(cfg, suite);
    let (f, mp, md) = (cfg.field, cfg.max_poset, cfg.max_stalk_dim);
    let pc = |kinds: &'static str, objects| move |s| checks::gen_poset_case(s, f, mp, md, kinds, objects);
    match suite {
        Suite::Excision => run_cases(cfg.cases(200), &mut r, pc("U", 1), checks::excision),
        Suite::BaseChange => {
            let mut r2 = r.clone();
            let open = run_cases(cfg.cases(60), &mut r, pc("U", 1), checks::base_change);
            if !open.is_expected() {
                return open;
            }
            r2.set_word_pos(1 << 20);
            run_cases(cfg.cases(60), &mut r2, pc("Z", 1), checks::base_change)
        }
        Suite::Projection => {
            let mut r2 = r.clone();
            let open = run_cases(cfg.cases(60), &mut r, pc("U", 2), checks::projection);
            if !open.is_expected() {
                return open;
            }
            r2.set_word_pos(1 << 20);
            run_cases(cfg.cases(60), &mut r2, pc("Z", 2), checks::projection)
        }
        Suite::Condition4 => run_cases(cfg.cases(100), &mut r, pc("UZ", 1), checks::condition_four),
        Suite::Compactification => run_cases(cfg.cases(100), &mut r, pc("UZ", 1), checks::compactification),
        Suite::Clopen => run_cases(cfg.cases(100), &mut r, |s| checks::gen_clopen_case(s, f, mp, md), checks::clopen),
        Suite::Kunneth => run_cases(
            cfg.cases(100),
            &mut r,
            |s| checks::gen_kunneth_case(s, f, mp.min(4), md),
            checks::kunneth,
        ),
        _ => unreachable!(),
    }
}

fn small_groups(max: usize) -> Vec<(&'static str, FinGroup)> {
    [("C2", FinGroup::cyclic(2)), ("C3", FinGroup::cyclic(3)), ("C4", FinGroup::cyclic(4)), ("S3", FinGroup::symmetric3())]
        .into_iter()
        .filter(|(_, g)| g.order() <= max)
        .collect()
}

/// Ambidexterity of `BG -> pt` agrees with `char k ∤ |G|`.
fn ambidexterity(cfg: &SuiteConfig) -> Outcome {
    let mut results = Vec::new();
    for (name, g) in small_groups(cfg.max_group_order) {
        for field in [FieldSpec::Rationals, FieldSpec::prime(2).unwrap(), FieldSpec::prime(3).unwrap()] {
            let x = FinGroupoid::classifying(g.clone());
            let rep = is_cohomologically_proper(&GpdMap::to_point(&x), field, cfg.window);
            let r = match rep.verdict {
                Verdict::UnknownWithinWindow { window } => Err(format!("undecided within window {window}")),
                _ if !rep.agrees() => Err(format!("verdict {:?} against predicate {}", rep.verdict, rep.predicate)),
                _ => Ok(()),
            };
            results.push((format!("B{name}/{field}"), r));
        }
    }
    all_pass(results)
}

fn mackey(cfg: &SuiteConfig) -> Outcome {
    let mut r = suite_rng(cfg, Suite::Mackey);
    let s3 = Arc::new(FinGroup::symmetric3());
    let c4 = Arc::new(FinGroup::cyclic(4));
    let triples: Vec<(&str, Arc<FinGroup>, Vec<usize>, Vec<usize>)> = vec![
        ("S3;C2;C2'", s3.clone(), vec![0, 1], vec![0, 3]),
        ("S3;C3;C2", s3.clone(), vec![0, 4, 5], vec![0, 1]),
        ("C4;C2;C2", c4, vec![0, 2], vec![0, 2]),
    ];
    let mut results = Vec::new();
    for (name, g, h, k) in &triples {
        let f = GpdMap::subgroup(g, h).unwrap();
        let gm = GpdMap::subgroup(g, k).unwrap();
        let trivial = GroupoidCarrier::new(f.source.clone()).trivial(cfg.field);
        let mut mods = vec![trivial];
        for _ in 0..cfg.cases(50) / triples.len() + 1 {
            mods.push(gen::gen_rep(r.gen(), &f.source, cfg.field, cfg.max_stalk_dim).unwrap());
        }
        for (i, m) in mods.iter().enumerate() {
            let res = match mackey_check(&f, &gm, m, r.gen()) {
                Ok(rep) if rep.holds() => Ok(()),
                Ok(_) => Err("no isomorphism between the two sides".into()),
                Err(e) => Err(e.to_string()),
            };
            results.push((format!("{name}#{i}"), res));
        }
    }
    all_pass(results)
}

/// `f_! ⊣ f^* ⊣ f_*`, the projection formula and `f^! = f^*` for subgroup
/// inclusions, compared on homology dimensions.
fn group_adjunction(cfg: &SuiteConfig) -> Outcome {
    let mut r = suite_rng(cfg, Suite::GroupAdjunction);
    let s3 = Arc::new(FinGroup::symmetric3());
    let c4 = Arc::new(FinGroup::cyclic(4));
    let maps = [GpdMap::subgroup(&s3, &[0, 1]).unwrap(), GpdMap::subgroup(&s3, &[0, 4, 5]).unwrap(), GpdMap::subgroup(&c4, &[0, 2]).unwrap()];
    let w = cfg.window;
    let mut results = Vec::new();
    for i in 0..cfg.cases(12) {
        let f = &maps[i % maps.len()];
        let (x, y) = (&f.source, &f.target);
        let cx = crate::grpfun::carrier_of(x);
        let cy = crate::grpfun::carrier_of(y);
        let a = gen::gen_complex(r.gen(), &cx, cfg.field, cfg.max_stalk_dim).unwrap();
        let b = gen::gen_complex(r.gen(), &cy, cfg.field, cfg.max_stalk_dim).unwrap();
        let res = (|| -> Result<(), String> {
            let fa = shriek_push(f, &a, w);
            let left = derived_hom_betti(&fa, &b, w)?;
            let right = derived_hom_betti(&a, &restrict(f, &b), w)?;
            agree("Hom(f_!A, B) vs Hom(A, f^*B)", &left, &right)?;
            let left = derived_hom_betti(&restrict(f, &b), &a, w)?;
            let right = derived_hom_betti(&b, &star_push(f, &a, w), w)?;
            agree("Hom(f^*B, A) vs Hom(B, f_*A)", &left, &right)?;
            let pf = shriek_push(f, &a.tensor(&restrict(f, &b)), w).betti_profile();
            let fb = fa.tensor(&b).betti_profile();
            agree("f_!(A ⊗ f^*B) vs f_!A ⊗ B", &pf, &fb)?;
            if upper_shriek(f, &b).betti_profile() != restrict(f, &b).betti_profile() {
                return Err("f^! differs from f^*".into());
            }
            Ok(())
        })();
        results.push((format!("case {i}"), res));
    }
    all_pass(results)
}

/// Betti numbers of `RHom(a, b)` in the degrees where it is faithful.
fn derived_hom_betti(a: &Complex, b: &Complex, w: usize) -> Result<BTreeMap<i32, usize>, String> {
    let h = derived_hom(&Arc::new(a.clone()), b, w).map_err(|e| e.to_string())?;
    let top = h.valid_to().unwrap_or(i32::MAX);
    Ok(h.betti_profile().into_iter().filter(|&(n, _)| n <= top).collect())
}

fn agree(what: &str, a: &BTreeMap<i32, usize>, b: &BTreeMap<i32, usize>) -> Result<(), String> {
    if a == b {
        Ok(())
    } else {
        Err(format!("{what}: {a:?} vs {b:?}"))
    }
}

fn kernels(cfg: &SuiteConfig) -> Outcome {
    let mut r = suite_rng(cfg, Suite::Kernels);
    let (f, mo, w) = (cfg.field, cfg.max_group_order, cfg.window);
    run_cases(cfg.cases(100), &mut r, |s| checks::gen_kernel_case(s, f, mo, w), checks::kernel_calculus)
}

fn certificates(cfg: &SuiteConfig) -> Outcome {
    let q = FieldSpec::Rationals;
    let w = cfg.window;
    let bg = |n| FinGroupoid::classifying(FinGroup::cyclic(n));
    let mut results = Vec::new();
    let x3 = bg(3);
    let f3 = GpdMap::to_point(&x3);
    let one = Arc::new(unit(&x3, q));
    for (name, tri) in [
        ("suave 1 on BC3", ObjectCertificate::suave_triangles(&f3, &one, &one, w)),
        ("prim 1 on BC3", ObjectCertificate::prim_triangles(&f3, &one, &one, w)),
    ] {
        let res = tri.map_err(|e| e.to_string()).and_then(|t| {
            search_certificate(&t, cfg.seed).map(|_| ()).map_err(|v| format!("search ended with {}", v.name()))
        });
        results.push((name.to_string(), res));
    }
    for n in [1, 2, 3] {
        let x = bg(n);
        let f = GpdMap::to_point(&x);
        let l = Arc::new(unit(&x, q));
        let res = (|| -> Result<(), String> {
            let tri = SmoothCertificate::triangles(&f, &l, w).map_err(|e| e.to_string())?;
            let (alpha, beta) = search_certificate(&tri, cfg.seed).map_err(|v| v.name().to_string())?;
            InvertibilityWitness::trivial(&x, q).verify(&x, &l).map_err(|e| e.to_string())?;
            // a rescaled unit is repaired to one homotopic to the original
            let bad = alpha.scale(&q.int(3));
            if tri.check(&bad, &beta).map_err(|e| e.to_string())?.is_adjoint() {
                return Err("a rescaled unit passed the triangle identities".into());
            }
            let fixed = repair_unit(&tri, &bad, &beta).map_err(|e| e.to_string())?;
            if !tri.check(&fixed, &beta).map_err(|e| e.to_string())?.is_adjoint() {
                return Err("repaired unit fails the triangle identities".into());
            }
            if !fixed.sub(&alpha).is_zero() && homotopic(&fixed, &alpha).is_err() {
                return Err("units for the same counit are not homotopic".into());
            }
            Ok(())
        })();
        results.push((format!("smooth BC{n}"), res));
    }
    all_pass(results)
}

fn verdier(cfg: &SuiteConfig) -> Outcome {
    let q = FieldSpec::Rationals;
    let mut r = suite_rng(cfg, Suite::Verdier);
    let mut results = Vec::new();
    for n in [2, 3] {
        let x = FinGroupoid::classifying(FinGroup::cyclic(n));
        let f = GpdMap::to_point(&x);
        let g = GpdMap::to_point(&FinGroupoid::classifying(FinGroup::cyclic(5 - n)));
        for i in 0..3 {
            let rep = gen::gen_rep(r.gen(), &x, q, cfg.max_stalk_dim).unwrap();
            let a = Complex::concentrated(GroupoidCarrier::new(x.clone()), rep, i - 1);
            let res = (|| -> Result<(), String> {
                let da = dual(&x, &a);
                let tri = ObjectCertificate::suave_triangles(&f, &a, &da, cfg.window).map_err(|e| e.to_string())?;
                search_certificate(&tri, cfg.seed).map_err(|v| format!("not suave: {}", v.name()))?;
                let d = verdier_dual(&f, &a, Some(&g)).map_err(|e| e.to_string())?;
                if !d.biduality_ok() {
                    return Err("A -> DDA is not a quasi-isomorphism".into());
                }
                if d.base_change != Some(true) {
                    return Err("duality does not commute with base change".into());
                }
                Ok(())
            })();
            results.push((format!("BC{n}#{i}"), res));
        }
    }
    all_pass(results)
}

/// Recorded counterexamples: each must still fail in the recorded way.
pub fn registry(cfg: &SuiteConfig) -> BTreeMap<String, Outcome> {
    let mut out = BTreeMap::new();
    let q = FieldSpec::Rationals;

    let (s, _) = model(Model::Sierpinski);
    let g = Arc::new(s.subposet(&[1]));
    let j = MonotoneMap::inclusion(&s, &[1]);
    let jk = derived_push(&j, &Sheaf::constant(g, q).complex(0));
    let stalk = prestrict(&s, &[0], &jk).betti(0);
    let i = MonotoneMap::inclusion(&s, &[0]);
    let fp = fiber_product(&i, &j).map(|(p, ..)| p.len()).unwrap_or(usize::MAX);
    out.insert(
        "sierpinski-open-pushforward-base-change".into(),
        if stalk == 1 && fp == 0 {
            Outcome::ExpectedFail { witness: serde_json::json!({ "i^*Rj_*k": stalk, "pushforward over the empty fiber product": 0 }) }
        } else {
            Outcome::Fail { case: 0, reason: "base change unexpectedly holds".into(), counterexample: serde_json::json!({ "stalk": stalk }) }
        },
    );

    let f3 = FieldSpec::prime(3).unwrap();
    let x = FinGroupoid::classifying(FinGroup::cyclic(3));
    let rep = is_cohomologically_proper(&GpdMap::to_point(&x), f3, cfg.window);
    out.insert(
        "norm-BC3-F3".into(),
        match rep.verdict {
            Verdict::NotProper { degree } => Outcome::ExpectedFail { witness: serde_json::json!({ "norm fails in degree": degree }) },
            v => Outcome::Fail { case: 0, reason: format!("verdict {v:?}"), counterexample: serde_json::json!({}) },
        },
    );

    let (p, field) = (2, FieldSpec::prime(2).unwrap());
    let x = FinGroupoid::classifying(FinGroup::cyclic(p));
    let one = Arc::new(unit(&x, field));
    let tri = ObjectCertificate::prim_triangles(&GpdMap::to_point(&x), &one, &one, cfg.window);
    out.insert(
        "prim-unit-BCp-Fp".into(),
        match tri.map(|t| search_certificate(&t, cfg.seed)) {
            Ok(Err(v)) if v.residue().is_some_and(|r| !r.is_zero()) => Outcome::ExpectedFail {
                witness: serde_json::json!({ "p": p, "verdict": v.name(), "residue_is_zero": false }),
            },
            Ok(Err(v)) => Outcome::Fail { case: 0, reason: format!("{} without residue", v.name()), counterexample: serde_json::json!({}) },
            Ok(Ok(_)) => Outcome::Fail { case: 0, reason: "a certificate was found".into(), counterexample: serde_json::json!({}) },
            Err(e) => Outcome::Fail { case: 0, reason: e.to_string(), counterexample: serde_json::json!({}) },
        },
    );
    out
}

pub fn run_suite(cfg: &SuiteConfig, suite: Suite) -> BTreeMap<String, Outcome> {
    let single = |o| BTreeMap::from([(suite.name(), o)]);
    match suite {
        Suite::Spheres => single(spheres(cfg)),
        Suite::Ambidexterity => single(ambidexterity(cfg)),
        Suite::Mackey => single(mackey(cfg)),
        Suite::GroupAdjunction => single(group_adjunction(cfg)),
        Suite::Kernels => single(kernels(cfg)),
        Suite::Certificates => single(certificates(cfg)),
        Suite::Verdier => single(verdier(cfg)),
        Suite::Registry => registry(cfg).into_iter().map(|(k, v)| (format!("registry/{k}"), v)).collect(),
        _ => single(poset_suite(cfg, suite)),
    }
}

pub fn run(cfg: &SuiteConfig) -> Result<Report, AxiomError> {
    cfg.validate()?;
    let mut checks = BTreeMap::new();
    for &s in &cfg.suites {
        checks.extend(run_suite(cfg, s));
    }
    let mut totals = BTreeMap::new();
    for o in checks.values() {
        let k = match o {
            Outcome::Pass { .. } => "pass",
            Outcome::Fail { .. } => "fail",
            Outcome::ExpectedFail { .. } => "expected_fail",
            Outcome::UnknownWithinWindow { .. } => "unknown_within_window",
        };
        *totals.entry(k.to_string()).or_insert(0) += 1;
    }
    Ok(Report { seed: cfg.seed, field: cfg.field.to_string(), checks, totals })
}
