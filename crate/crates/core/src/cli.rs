//! The `sixfun` command line. Every subcommand renders its whole output to
//! a string first, so identical invocations print identical bytes.

use crate::axioms::{self, Suite, SuiteConfig};
use crate::exactalg::FieldSpec;
use crate::homlib::Complex;
use crate::kernels::{certify_file, CertificateFile, CertifyOutcome};
use crate::posetsheaf::{compact_support_sections, derived_sections, model, FinPoset, Model, PosetFile, Sheaf, SheafFile};
use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::sync::Arc;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("{path}: {msg}")]
    Input { path: String, msg: String },
    #[error("{0}")]
    Usage(String),
}

#[derive(Debug, Parser)]
#[command(name = "sixfun", version, about = "Exact six-functor computations on finite posets and groupoids")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Sheaf cohomology of a model or a poset file.
    Cohomology(CohomologyArgs),
    /// Compactly supported cohomology of a constant sheaf on a subset.
    Csupport(CsupportArgs),
    /// Run the axiom suites.
    Verify(VerifyArgs),
    /// Check a certificate file.
    Certify(CertifyArgs),
    /// List the built-in models.
    Models,
}

#[derive(Debug, Args)]
pub struct SpaceArgs {
    /// Built-in model, see `models`.
    #[arg(long, conflicts_with = "poset")]
    pub model: Option<String>,
    /// Poset file (`{"elements": [...], "relations": [[a, b], ...]}`).
    #[arg(long)]
    pub poset: Option<PathBuf>,
    #[arg(long, default_value = "Q")]
    pub field: String,
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Args)]
pub struct CohomologyArgs {
    #[command(flatten)]
    pub space: SpaceArgs,
    /// Sheaf file, or `constant`.
    #[arg(long, default_value = "constant")]
    pub sheaf: String,
    /// Also print the cochain complex dimensions.
    #[arg(long)]
    pub dump: bool,
}

#[derive(Debug, Args)]
pub struct CsupportArgs {
    #[command(flatten)]
    pub space: SpaceArgs,
    /// Comma-separated labels of a locally closed subset; defaults to the
    /// model's distinguished open.
    #[arg(long)]
    pub subset: Option<String>,
    /// Compute with `k[shift]`.
    #[arg(long, default_value_t = 0, allow_hyphen_values = true)]
    pub shift: i32,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value = "Q")]
    pub field: String,
    /// Run every suite (the default when no `--suite` is given).
    #[arg(long)]
    pub all: bool,
    #[arg(long = "suite")]
    pub suites: Vec<String>,
    #[arg(long, default_value_t = 3)]
    pub window: usize,
    #[arg(long, default_value_t = axioms::gen::MAX_POSET)]
    pub max_poset: usize,
    #[arg(long, default_value_t = axioms::gen::MAX_GROUP_ORDER)]
    pub max_group_order: usize,
    #[arg(long, default_value_t = 2)]
    pub max_stalk_dim: usize,
    #[arg(long)]
    pub cases: Option<usize>,
    /// Write the JSON report here.
    #[arg(long)]
    pub output: Option<PathBuf>,
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Args)]
pub struct CertifyArgs {
    pub file: PathBuf,
    #[arg(long)]
    pub json: bool,
}

/// Printed by `cohomology --json` and `csupport --json`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CohomologyOutput {
    pub space: String,
    pub field: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub subset: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub shift: Option<i32>,
    /// Degree to dimension, listing every degree between the first and
    /// last nonzero one.
    pub dims: BTreeMap<i32, usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cochain_dims: Option<BTreeMap<i32, usize>>,
}

impl CohomologyOutput {
    pub fn render(&self) -> String {
        if self.dims.is_empty() {
            return "H^* = 0\n".into();
        }
        let parts: Vec<String> = self.dims.iter().map(|(n, d)| format!("H^{n} = {d}")).collect();
        let mut s = parts.join(", ") + "\n";
        if let Some(c) = &self.cochain_dims {
            let parts: Vec<String> = c.iter().map(|(n, d)| format!("C^{n} = {d}")).collect();
            s += &(parts.join(", ") + "\n");
        }
        s
    }
}

/// What a run prints and the exit status it asks for.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Output {
    pub stdout: String,
    pub code: i32,
}

fn ok(stdout: String) -> Output {
    Output { stdout, code: 0 }
}

fn read(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|source| CliError::Io { path: path.display().to_string(), source })
}

fn parse_json<T: serde::de::DeserializeOwned>(path: &Path, text: &str) -> Result<T, CliError> {
    let de = &mut serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(de).map_err(|e| CliError::Input {
        path: path.display().to_string(),
        msg: format!("{}: {}", e.path(), e.inner()),
    })
}

fn field(s: &str) -> Result<FieldSpec, CliError> {
    s.parse().map_err(|e| CliError::Usage(format!("--field {s}: {e}")))
}

fn load_space(a: &SpaceArgs) -> Result<(String, Arc<FinPoset>, Vec<usize>), CliError> {
    match (&a.model, &a.poset) {
        (Some(name), None) => {
            let m: Model = name.parse().map_err(|e| CliError::Usage(format!("--model: {e}")))?;
            let (p, open) = model(m);
            Ok((name.clone(), p, open))
        }
        (None, Some(path)) => {
            let f: PosetFile = parse_json(path, &read(path)?)?;
            let p = FinPoset::from_file(&f)
                .map_err(|e| CliError::Input { path: path.display().to_string(), msg: e.to_string() })?;
            let all = (0..p.len()).collect();
            Ok((path.display().to_string(), Arc::new(p), all))
        }
        _ => Err(CliError::Usage("give exactly one of --model and --poset".into())),
    }
}

/// Homology dimensions from the first to the last nonzero degree.
fn dims(c: &Complex) -> BTreeMap<i32, usize> {
    let b = c.betti_profile();
    match (b.keys().next(), b.keys().next_back()) {
        (Some(&lo), Some(&hi)) => (lo..=hi).map(|n| (n, c.betti(n))).collect(),
        _ => BTreeMap::new(),
    }
}

fn emit(out: &CohomologyOutput, json: bool) -> Output {
    if json {
        ok(serde_json::to_string_pretty(out).unwrap() + "\n")
    } else {
        ok(out.render())
    }
}

pub fn cmd_cohomology(a: &CohomologyArgs) -> Result<Output, CliError> {
    let k = field(&a.space.field)?;
    let (name, p, _) = load_space(&a.space)?;
    let sheaf = if a.sheaf == "constant" {
        Sheaf::constant(p.clone(), k)
    } else {
        let path = Path::new(&a.sheaf);
        let f: SheafFile = parse_json(path, &read(path)?)?;
        if f.field != k {
            return Err(CliError::Input { path: a.sheaf.clone(), msg: format!("field: file is over {}, --field is {k}", f.field) });
        }
        Sheaf::from_file(p.clone(), &f).map_err(|e| CliError::Input { path: a.sheaf.clone(), msg: e.to_string() })?
    };
    let rg = derived_sections(&p, &sheaf.complex(0));
    let out = CohomologyOutput {
        space: name,
        field: k.to_string(),
        subset: None,
        shift: None,
        dims: dims(&rg),
        cochain_dims: a.dump.then(|| rg.degrees().map(|n| (n, rg.total_dim(n))).collect()),
    };
    Ok(emit(&out, a.space.json))
}

pub fn cmd_csupport(a: &CsupportArgs) -> Result<Output, CliError> {
    let k = field(&a.space.field)?;
    let (name, p, open) = load_space(&a.space)?;
    let subset = match &a.subset {
        None => open,
        Some(s) => {
            let mut v = s
                .split(',')
                .map(|l| p.index(l.trim()).ok_or_else(|| CliError::Usage(format!("--subset: unknown element {l:?}"))))
                .collect::<Result<Vec<_>, _>>()?;
            v.sort();
            v.dedup();
            v
        }
    };
    let sub = Arc::new(p.subposet(&subset));
    let a_sub = Sheaf::constant(sub, k).complex(-a.shift);
    let rc = compact_support_sections(&p, &subset, &a_sub).map_err(|e| CliError::Usage(format!("--subset: {e}")))?;
    let out = CohomologyOutput {
        space: name,
        field: k.to_string(),
        subset: Some(subset.iter().map(|&i| p.label(i).to_string()).collect()),
        shift: Some(a.shift),
        dims: dims(&rc),
        cochain_dims: None,
    };
    Ok(emit(&out, a.space.json))
}

pub fn verify_config(a: &VerifyArgs) -> Result<SuiteConfig, CliError> {
    let mut cfg = SuiteConfig::new(a.seed, field(&a.field)?);
    cfg.window = a.window;
    cfg.max_poset = a.max_poset;
    cfg.max_group_order = a.max_group_order;
    cfg.max_stalk_dim = a.max_stalk_dim;
    cfg.cases = a.cases;
    if a.all && !a.suites.is_empty() {
        return Err(CliError::Usage("--all and --suite are exclusive".into()));
    }
    if !a.suites.is_empty() {
        cfg.suites = a
            .suites
            .iter()
            .map(|s| s.parse::<Suite>().map_err(|e| CliError::Usage(format!("--suite: {e}"))))
            .collect::<Result<_, _>>()?;
    }
    cfg.validate().map_err(|e| CliError::Usage(e.to_string()))?;
    Ok(cfg)
}

pub fn cmd_verify(a: &VerifyArgs) -> Result<Output, CliError> {
    let cfg = verify_config(a)?;
    let report = axioms::run(&cfg).map_err(|e| CliError::Usage(e.to_string()))?;
    let json = report.to_json() + "\n";
    if let Some(path) = &a.output {
        std::fs::write(path, &json).map_err(|source| CliError::Io { path: path.display().to_string(), source })?;
    }
    let stdout = if a.json {
        json
    } else {
        let mut s = format!("seed {} field {}\n", report.seed, report.field);
        for (name, o) in &report.checks {
            let line = match o {
                axioms::Outcome::Pass { cases } => format!("pass ({cases} cases)"),
                axioms::Outcome::ExpectedFail { witness } => format!("expected failure confirmed {witness}"),
                axioms::Outcome::UnknownWithinWindow { detail } => format!("unknown within window: {detail}"),
                axioms::Outcome::Fail { case, reason, counterexample } => {
                    format!("FAIL at case {case}: {reason}\n    {counterexample}")
                }
            };
            s += &format!("{name}: {line}\n");
        }
        let totals: Vec<String> = report.totals.iter().map(|(k, v)| format!("{k} {v}")).collect();
        s + &totals.join(", ") + "\n"
    };
    Ok(Output { stdout, code: if report.ok() { 0 } else { 1 } })
}

pub fn cmd_certify(a: &CertifyArgs) -> Result<Output, CliError> {
    let path = a.file.display().to_string();
    let file = CertificateFile::parse(&read(&a.file)?).map_err(|e| CliError::Input { path: path.clone(), msg: e.to_string() })?;
    let outcome: CertifyOutcome = certify_file(&file).map_err(|e| CliError::Input { path, msg: e.to_string() })?;
    let code = if outcome.is_success() { 0 } else { 1 };
    let stdout = if a.json {
        serde_json::to_string_pretty(&outcome).unwrap() + "\n"
    } else {
        let mut s = outcome.verdict.clone();
        if outcome.repaired {
            s += " (unit repaired)";
        }
        if outcome.searched {
            s += " (2-cells found by search)";
        }
        s += "\n";
        if let Some(d) = &outcome.detail {
            s += &format!("{d}\n");
        }
        if let Some(r) = &outcome.residue {
            s += &format!("residue {}\n", serde_json::to_string(r).unwrap());
        }
        s
    };
    Ok(Output { stdout, code })
}

pub fn cmd_models() -> Output {
    let rows = [
        ("point", "one point"),
        ("sierpinski", "s < g, open {g}"),
        ("circle", "a, b < x, y"),
        ("sphere:N", "N-fold suspension of two points, N <= 6"),
        ("interval-in-circle", "the circle with the open interval {a, x, y}"),
        ("torus", "circle × circle"),
        ("figure-eight", "two circles glued at a, open part two disjoint intervals"),
    ];
    ok(rows.iter().map(|(n, d)| format!("{n:<20} {d}\n")).collect())
}

pub fn run(cli: &Cli) -> Result<Output, CliError> {
    match &cli.command {
        Command::Cohomology(a) => cmd_cohomology(a),
        Command::Csupport(a) => cmd_csupport(a),
        Command::Verify(a) => cmd_verify(a),
        Command::Certify(a) => cmd_certify(a),
        Command::Models => Ok(cmd_models()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn go(args: &[&str]) -> Output {
        let cli = Cli::try_parse_from(std::iter::once("sixfun").chain(args.iter().copied())).unwrap();
        run(&cli).unwrap()
    }

    #[test]
    fn cohomology_of_models() {
        assert_eq!(go(&["cohomology", "--model", "point", "--field", "Q"]).stdout, "H^0 = 1\n");
        assert_eq!(go(&["cohomology", "--model", "sphere:1"]).stdout, "H^0 = 1, H^1 = 1\n");
        assert_eq!(go(&["cohomology", "--model", "torus", "--field", "F2"]).stdout, "H^0 = 1, H^1 = 2, H^2 = 1\n");
        assert_eq!(go(&["cohomology", "--model", "sphere:2"]).stdout, "H^0 = 1, H^1 = 0, H^2 = 1\n");
    }

    #[test]
    fn compact_support() {
        let o = go(&["csupport", "--model", "interval-in-circle", "--shift", "1", "--field", "Q"]);
        assert_eq!(o.stdout, "H^0 = 1\n");
        let o = go(&["csupport", "--model", "figure-eight", "--shift", "1"]);
        assert_eq!(o.stdout, "H^0 = 2\n");
        assert_eq!(go(&["csupport", "--model", "point"]).stdout, "H^0 = 1\n");
        let cli = Cli::try_parse_from(["sixfun", "csupport", "--model", "sphere:1", "--subset", "a,b,x"]).unwrap();
        assert!(run(&cli).is_ok());
        let d = Cli::try_parse_from(["sixfun", "csupport", "--poset", "x.json", "--model", "point"]);
        assert!(d.is_err());
    }

    #[test]
    fn json_round_trips() {
        for args in [
            &["cohomology", "--model", "torus", "--json", "--dump"][..],
            &["csupport", "--model", "figure-eight", "--shift", "1", "--json"][..],
        ] {
            let o = go(args);
            let back: CohomologyOutput = serde_json::from_str(&o.stdout).unwrap();
            assert_eq!(serde_json::to_string_pretty(&back).unwrap() + "\n", o.stdout);
        }
    }

    #[test]
    fn bad_flags_fail_before_work() {
        let cli = Cli::try_parse_from(["sixfun", "verify", "--suite", "nope"]).unwrap();
        assert!(matches!(run(&cli), Err(CliError::Usage(_))));
        let cli = Cli::try_parse_from(["sixfun", "verify", "--max-poset", "9"]).unwrap();
        assert!(matches!(run(&cli), Err(CliError::Usage(_))));
        let cli = Cli::try_parse_from(["sixfun", "cohomology", "--model", "klein"]).unwrap();
        assert!(matches!(run(&cli), Err(CliError::Usage(_))));
    }

    #[test]
    fn registry_suite_exits_zero() {
        let o = go(&["verify", "--suite", "registry"]);
        assert_eq!(o.code, 0);
        assert_eq!(o.stdout.matches("expected failure confirmed").count(), 3);
    }
}
