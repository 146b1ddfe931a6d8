use num_rational::BigRational;
use num_traits::{One, Zero};
use sixfun::axioms::{run, Outcome, Suite, SuiteConfig};
use sixfun::exactalg::FieldSpec;
use sixfun::grpfun::{is_cohomologically_proper, unit, FinGroup, FinGroupoid, GpdMap, Verdict};
use sixfun::kernels::{certify_file, verdier_dual, CertificateFile};
use sixfun::posetsheaf::{compact_support_sections, derived_sections, model, Model, Sheaf};
use std::collections::BTreeMap;
use std::io::Write;
use std::path::PathBuf;
use std::process::Command;
use std::sync::Arc;

// ---- brute-force oracle: cohomology of order complexes ----

/// A poset as its order relation, `leq[a][b]` iff `a <= b`.
#[derive(Clone)]
struct Order {
    leq: Vec<Vec<bool>>,
}

impl Order {
    fn discrete(n: usize) -> Order {
        Order { leq: (0..n).map(|a| (0..n).map(|b| a == b).collect()).collect() }
    }

    /// Two new points above everything.
    fn suspend(&self) -> Order {
        let n = self.leq.len();
        let mut leq = vec![vec![false; n + 2]; n + 2];
        for a in 0..n + 2 {
            for b in 0..n + 2 {
                leq[a][b] = a == b || (a < n && b >= n) || (a < n && b < n && self.leq[a][b]);
            }
        }
        Order { leq }
    }

    fn sphere(n: usize) -> Order {
        (0..n).fold(Order::discrete(2), |o, _| o.suspend())
    }

    fn product(&self, o: &Order) -> Order {
        let (n, m) = (self.leq.len(), o.leq.len());
        let leq = (0..n * m)
            .map(|i| (0..n * m).map(|j| self.leq[i / m][j / m] && o.leq[i % m][j % m]).collect())
            .collect();
        Order { leq }
    }

    /// Strict chains `x0 < x1 < ... < xk` by length.
    fn simplices(&self) -> Vec<Vec<Vec<usize>>> {
        let n = self.leq.len();
        let mut out: Vec<Vec<Vec<usize>>> = vec![(0..n).map(|x| vec![x]).collect()];
        loop {
            let next: Vec<Vec<usize>> = out
                .last()
                .unwrap()
                .iter()
                .flat_map(|c| {
                    let top = *c.last().unwrap();
                    (0..n).filter(move |&y| y != top && self.leq[top][y]).map(move |y| {
                        let mut d = c.clone();
                        d.push(y);
                        d
                    })
                })
                .collect();
            if next.is_empty() {
                return out;
            }
            out.push(next);
        }
    }
}

fn circle_order() -> Order {
    // a, b < x, y
    let mut leq = Order::discrete(4).leq;
    for lo in [0, 1] {
        for hi in [2, 3] {
            leq[lo][hi] = true;
        }
    }
    Order { leq }
}

fn rank(rows: Vec<Vec<i64>>, p: Option<u64>) -> usize {
    match p {
        Some(p) => {
            let mut m: Vec<Vec<u64>> = rows.iter().map(|r| r.iter().map(|&x| x.rem_euclid(p as i64) as u64).collect()).collect();
            let mut r = 0;
            let cols = m.first().map_or(0, Vec::len);
            for c in 0..cols {
                let Some(piv) = (r..m.len()).find(|&i| m[i][c] != 0) else { continue };
                m.swap(r, piv);
                let inv = (1..p).find(|&y| m[r][c] * y % p == 1).unwrap();
                for i in 0..m.len() {
                    if i != r && m[i][c] != 0 {
                        let f = m[i][c] * inv % p;
                        for j in 0..cols {
                            m[i][j] = (m[i][j] + p * p - f * m[r][j] % p) % p;
                        }
                    }
                }
                r += 1;
            }
            r
        }
        None => {
            let mut m: Vec<Vec<BigRational>> =
                rows.iter().map(|r| r.iter().map(|&x| BigRational::from_integer(x.into())).collect()).collect();
            let mut r = 0;
            let cols = m.first().map_or(0, Vec::len);
            for c in 0..cols {
                let Some(piv) = (r..m.len()).find(|&i| !m[i][c].is_zero()) else { continue };
                m.swap(r, piv);
                let inv = BigRational::one() / m[r][c].clone();
                for i in 0..m.len() {
                    if i != r && !m[i][c].is_zero() {
                        let f = m[i][c].clone() * inv.clone();
                        for j in 0..cols {
                            let t = f.clone() * m[r][j].clone();
                            m[i][j] -= t;
                        }
                    }
                }
                r += 1;
            }
            r
        }
    }
}

/// `H^*(|K(X)|, |K(Z)|)` for `Z` a set of points (empty for absolute
/// cohomology), with coefficients in Q (`p = None`) or F_p.
fn order_complex_cohomology(o: &Order, z: &[usize], p: Option<u64>) -> BTreeMap<i32, usize> {
    let simp: Vec<Vec<Vec<usize>>> =
        o.simplices().into_iter().map(|l| l.into_iter().filter(|s| !s.iter().all(|v| z.contains(v))).collect()).collect();
    let index: Vec<BTreeMap<Vec<usize>, usize>> =
        simp.iter().map(|l| l.iter().enumerate().map(|(i, s)| (s.clone(), i)).collect()).collect();
    // delta_k : C^k -> C^{k+1}, rows indexed by (k+1)-simplices
    let ranks: Vec<usize> = (0..simp.len())
        .map(|k| {
            if k + 1 >= simp.len() {
                return 0;
            }
            let rows = simp[k + 1]
                .iter()
                .map(|s| {
                    let mut row = vec![0i64; simp[k].len()];
                    for i in 0..s.len() {
                        let mut face = s.clone();
                        face.remove(i);
                        if let Some(&j) = index[k].get(&face) {
                            row[j] += if i % 2 == 0 { 1 } else { -1 };
                        }
                    }
                    row
                })
                .collect();
            rank(rows, p)
        })
        .collect();
    (0..simp.len())
        .map(|k| {
            let before = if k == 0 { 0 } else { ranks[k - 1] };
            (k as i32, simp[k].len() - ranks[k] - before)
        })
        .filter(|&(_, d)| d > 0)
        .collect()
}

// ---- criteria ----

type Verdict_ = Result<String, String>;

fn suite(seed: u64, field: FieldSpec, suites: &[Suite], cases: Option<usize>) -> Result<BTreeMap<String, Outcome>, String> {
    let mut cfg = SuiteConfig::new(seed, field);
    cfg.suites = suites.to_vec();
    cfg.cases = cases;
    let r = run(&cfg).map_err(|e| e.to_string())?;
    Ok(r.checks)
}

fn require_pass(checks: &BTreeMap<String, Outcome>, min_cases: usize) -> Result<usize, String> {
    let mut total = 0;
    for (name, o) in checks {
        match o {
            Outcome::Pass { cases } if *cases >= min_cases => total += cases,
            other => return Err(format!("{name}: {other:?}")),
        }
    }
    Ok(total)
}

fn sphere_models() -> Verdict_ {
    let q = FieldSpec::Rationals;
    for n in 0..=3 {
        let (p, _) = model(Model::Sphere(n));
        let got = derived_sections(&p, &Sheaf::constant(p.clone(), q).complex(0)).betti_profile();
        let oracle = order_complex_cohomology(&Order::sphere(n), &[], None);
        let want: BTreeMap<i32, usize> = if n == 0 { [(0, 2)].into() } else { [(0, 1), (n as i32, 1)].into() };
        if got != oracle || oracle != want || p.len() != 2 * n + 2 {
            return Err(format!("S^{n}: library {got:?}, oracle {oracle:?}"));
        }
    }
    Ok("S^0..S^3 match the order-complex oracle".into())
}

fn kunneth() -> Verdict_ {
    let c4 = circle_order();
    let torus = c4.product(&c4);
    for (field, p) in [(FieldSpec::Rationals, None), (FieldSpec::prime(2).unwrap(), Some(2))] {
        let (t, _) = model(Model::ProductOfCircles);
        let got = derived_sections(&t, &Sheaf::constant(t.clone(), field).complex(0)).betti_profile();
        let oracle = order_complex_cohomology(&torus, &[], p);
        let want: BTreeMap<i32, usize> = [(0, 1), (1, 2), (2, 1)].into();
        if got != want || oracle != want {
            return Err(format!("C4 x C4 over {field}: library {got:?}, oracle {oracle:?}"));
        }
        require_pass(&suite(0, field, &[Suite::Kunneth], Some(100))?, 100)?;
    }
    Ok("H^*(C4 x C4) = (1,2,1) over Q and F2; 100 random pairs per field".into())
}

fn excision() -> Verdict_ {
    let n = require_pass(&suite(0, FieldSpec::Rationals, &[Suite::Excision], Some(200))?, 200)?;
    Ok(format!("{n} triples"))
}

fn lecture_four() -> Verdict_ {
    let mut parts = Vec::new();
    for (s, per_run) in [
        (Suite::BaseChange, 50),
        (Suite::Projection, 50),
        (Suite::Condition4, 100),
        (Suite::Clopen, 100),
        (Suite::Compactification, 100),
    ] {
        // base change and projection each run open and closed halves
        let n = require_pass(&suite(0, FieldSpec::Rationals, &[s], Some(per_run))?, per_run)?;
        let configs = if per_run == 50 { 2 * n } else { n };
        if configs < 100 {
            return Err(format!("{}: only {configs} configurations", s.name()));
        }
        parts.push(format!("{} {configs}", s.name()));
    }
    Ok(parts.join(", "))
}

fn registry() -> Verdict_ {
    let checks = suite(0, FieldSpec::Rationals, &[Suite::Registry], None)?;
    match checks.get("registry/sierpinski-open-pushforward-base-change") {
        Some(Outcome::ExpectedFail { witness }) if witness["i^*Rj_*k"] == 1 && witness["pushforward over the empty fiber product"] == 0 => {
            Ok("Sierpinski: i^*Rj_*k has dimension 1, base-changed side 0".into())
        }
        other => Err(format!("{other:?}")),
    }
}

fn compact_support() -> Verdict_ {
    let (p, open) = model(Model::IntervalInCircle);
    let c4 = circle_order();
    let labels: Vec<&str> = (0..p.len()).map(|i| p.label(i)).collect();
    let z: Vec<usize> = (0..4).filter(|i| !open.contains(i)).collect();
    if labels != ["a", "b", "x", "y"] {
        return Err(format!("unexpected labels {labels:?}"));
    }
    for (field, q) in [(FieldSpec::Rationals, None), (FieldSpec::prime(2).unwrap(), Some(2))] {
        let sub = Arc::new(p.subposet(&open));
        let rc = compact_support_sections(&p, &open, &Sheaf::constant(sub, field).complex(-1)).map_err(|e| e.to_string())?;
        // RΓ_c(J, k[1]) = H^{*+1}(X, X \ J)
        let oracle: BTreeMap<i32, usize> =
            order_complex_cohomology(&c4, &z, q).into_iter().map(|(n, d)| (n - 1, d)).collect();
        let want: BTreeMap<i32, usize> = [(0, 1)].into();
        if rc.betti_profile() != want || oracle != want {
            return Err(format!("over {field}: library {:?}, oracle {oracle:?}", rc.betti_profile()));
        }
    }
    Ok("RΓ_c(J, k[1]) = k over Q and F2".into())
}

fn ambidexterity() -> Verdict_ {
    let mut n = 0;
    for g in ["C2", "C3", "C4", "S3"] {
        for (k, ch) in [("Q", 0u64), ("F2", 2), ("F3", 3)] {
            let grp = FinGroup::by_name(g).map_err(|e| e.to_string())?;
            let invertible = ch == 0 || grp.order() as u64 % ch != 0;
            let x = FinGroupoid::classifying(grp);
            let r = is_cohomologically_proper(&GpdMap::to_point(&x), k.parse().unwrap(), 3);
            let proper = match r.verdict {
                Verdict::Proper => true,
                Verdict::NotProper { .. } => false,
                Verdict::UnknownWithinWindow { .. } => return Err(format!("B{g} over {k}: undecided")),
            };
            if proper != invertible {
                return Err(format!("B{g} over {k}: proper = {proper}, |G| invertible = {invertible}"));
            }
            n += 1;
        }
    }
    Ok(format!("{n} (group, field) pairs match the divisibility predicate"))
}

fn mackey() -> Verdict_ {
    let n = require_pass(&suite(0, FieldSpec::Rationals, &[Suite::Mackey], Some(50))?, 53)?;
    Ok(format!("{n} modules over three triples"))
}

fn kernel_calculus() -> Verdict_ {
    let n = require_pass(&suite(0, FieldSpec::Rationals, &[Suite::Kernels], Some(100))?, 100)?;
    require_pass(&suite(0, FieldSpec::Rationals, &[Suite::Certificates], None)?, 1)?;
    Ok(format!("{n} kernel triples; unit uniqueness on every smooth certificate"))
}

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(name)
}

fn certify(name: &str) -> Result<sixfun::kernels::CertifyOutcome, String> {
    let text = std::fs::read_to_string(fixture(name)).map_err(|e| e.to_string())?;
    let file = CertificateFile::parse(&text).map_err(|e| e.to_string())?;
    certify_file(&file).map_err(|e| e.to_string())
}

fn certificates() -> Verdict_ {
    for (name, verdict, repaired) in [
        ("suave-BC3-Q.json", "Suave", false),
        ("prim-BC3-Q.json", "Prim", false),
        ("smooth-BC2-Q.json", "Smooth", false),
        ("smooth-id.json", "Smooth", false),
        ("smooth-BC2-Q-misscaled.json", "Smooth", true),
    ] {
        let o = certify(name)?;
        if o.verdict != verdict || o.repaired != repaired {
            return Err(format!("{name}: {o:?}"));
        }
    }
    let o = certify("prim-BCp-Fp.json")?;
    let residue_nonzero = o.residue.as_ref().is_some_and(|r| r.components.values().flatten().any(|m| m.iter().flatten().any(|e| e != "0")));
    if !o.verdict.starts_with("Fails") || !residue_nonzero {
        return Err(format!("prim-BCp-Fp.json: {o:?}"));
    }
    let checks = suite(0, FieldSpec::Rationals, &[Suite::Certificates, Suite::Registry], None)?;
    match checks.get("registry/prim-unit-BCp-Fp") {
        Some(Outcome::ExpectedFail { .. }) => {}
        other => return Err(format!("prim search over F_p: {other:?}")),
    }
    require_pass(&checks.into_iter().filter(|(k, _)| !k.starts_with("registry")).collect(), 1)?;
    Ok("fixtures verified; prim over F_p fails with a nonzero residue; mis-scaled unit repaired".into())
}

fn verdier() -> Verdict_ {
    let o = certify("suave-BC3-Q.json")?;
    if o.verdict != "Suave" {
        return Err(format!("fixture not suave: {}", o.verdict));
    }
    let q = FieldSpec::Rationals;
    let x = FinGroupoid::classifying(FinGroup::cyclic(3));
    let g = GpdMap::to_point(&FinGroupoid::classifying(FinGroup::cyclic(2)));
    let d = verdier_dual(&GpdMap::to_point(&x), &unit(&x, q), Some(&g)).map_err(|e| e.to_string())?;
    if !d.biduality_ok() || d.base_change != Some(true) {
        return Err("biduality or base change fails for the fixture object".into());
    }
    require_pass(&suite(0, q, &[Suite::Verdier], None)?, 1)?;
    Ok("fixture object and random certified suave objects".into())
}

fn determinism() -> Verdict_ {
    let exe = env!("CARGO_BIN_EXE_sixfun");
    let once = || {
        Command::new(exe).args(["verify", "--seed", "0", "--all", "--json"]).output().map_err(|e| e.to_string())
    };
    let (a, b) = (once()?, once()?);
    if !a.status.success() {
        return Err(format!("exit status {:?}", a.status.code()));
    }
    if a.stdout != b.stdout || a.stdout.is_empty() {
        return Err("reports differ between runs".into());
    }
    Ok(format!("{} identical bytes", a.stdout.len()))
}

#[test]
fn acceptance() {
    let criteria: [(&str, fn() -> Verdict_); 12] = [
        ("sphere models", sphere_models),
        ("kunneth", kunneth),
        ("excision", excision),
        ("base change, projection, condition (4), clopen, compactification", lecture_four),
        ("registry", registry),
        ("compact support of an interval", compact_support),
        ("ambidexterity boundary", ambidexterity),
        ("mackey", mackey),
        ("kernel calculus", kernel_calculus),
        ("certificates", certificates),
        ("verdier duality", verdier),
        ("determinism", determinism),
    ];
    let mut failed = Vec::new();
    let mut err = std::io::stderr();
    for (i, (name, f)) in criteria.iter().enumerate() {
        let t = std::time::Instant::now();
        let r = f();
        let secs = t.elapsed().as_secs_f64();
        match &r {
            Ok(msg) => writeln!(err, "criterion {:>2} PASS ({secs:.1}s) {name}: {msg}", i + 1).unwrap(),
            Err(msg) => {
                writeln!(err, "criterion {:>2} FAIL ({secs:.1}s) {name}: {msg}", i + 1).unwrap();
                failed.push(i + 1);
            }
        }
        assert!(secs < 60.0, "criterion {} took {secs:.1}s", i + 1);
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
