//! Command-line interface. Every command prints one JSON report on stdout;
//! progress goes to stderr.
//!
//! Exit codes: 0 success, 1 verification or certificate failure, 2 usage or
//! input error, 3 resource budget exceeded.

use std::ffi::OsString;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_bigint::BigUint;
use num_traits::ToPrimitive;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use thiserror::Error;

use crate::bounds::{
    bezout_report, degree_report, vc_report, vc_shatter_oracle, wlt_report, BoundsError, VcVariant,
    SHATTER_BUDGET,
};
use crate::encoding::{code_eq, decode, encode_poly, encode_slp, CodeError, ValueCode};
use crate::families::{
    fd_closed_form, fd_slp, fn_closed_form, fn_slp, gtilde_system, phi_formula, pn_first_order,
    pn_slp, pn_specialized, rn_closed_form, rn_slp, FamilyError, HypercubeFamily, PhiVariant,
};
use crate::harness::{
    blowup_report, distinctness_probe_gamma_n, eliminate_hypercube, independence_rank,
    lk_at_points_rank, robustness_probe, separability_check, tangent_rank_paradigm1, ElimMode,
    ElimResult, HarnessError, PointSource, Probe, RankField, CERT_PRIME, ELIM_BUDGET,
    EXACT_RANK_LIMIT,
};
use crate::poly::{expand, parse_poly, parse_poly_in, ExpandError, Exponents, MultiPoly, PolyError, DEFAULT_BUDGET};
use crate::reproduce::{self, Options};
use crate::ring::{least_prime_congruent_one, parse_rational, ArithError, Rational, Rationals};
use crate::sequences::{
    is_correct_test_sequence, is_identification_sequence, pit, required_length, required_set_size,
    sample_sequence, ClassEnum, ClassSpec, Kind, SequenceFormatError, TestSequence,
};
use crate::slp::{parse_slp, serialize_slp, EvalError, ParseError, Slp};

/// Environment variable overriding term and combinatorial budgets.
pub const BUDGET_ENV: &str = "ELIMKIT_BUDGET";

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Failed(String),
    #[error("{0}")]
    Budget(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Failed(_) => 1,
            CliError::Usage(_) => 2,
            CliError::Budget(_) => 3,
        }
    }
}

fn usage(e: impl std::fmt::Display) -> CliError {
    CliError::Usage(e.to_string())
}

impl From<ExpandError> for CliError {
    fn from(e: ExpandError) -> Self {
        match e {
            ExpandError::TooLarge { .. } => CliError::Budget(e.to_string()),
            _ => usage(e),
        }
    }
}

impl From<FamilyError> for CliError {
    fn from(e: FamilyError) -> Self {
        match e {
            FamilyError::SizeLimit { .. } => CliError::Budget(e.to_string()),
            FamilyError::Expand(x) => x.into(),
            FamilyError::InvalidArgument(_) => usage(e),
        }
    }
}

impl From<HarnessError> for CliError {
    fn from(e: HarnessError) -> Self {
        match e {
            HarnessError::SizeLimit { .. } | HarnessError::Budget { .. } => CliError::Budget(e.to_string()),
            HarnessError::NoFullRankPoints(_) => CliError::Failed(e.to_string()),
            HarnessError::Family(f) => f.into(),
            _ => usage(e),
        }
    }
}

impl From<BoundsError> for CliError {
    fn from(e: BoundsError) -> Self {
        match e {
            BoundsError::Budget { .. } => CliError::Budget(e.to_string()),
            BoundsError::Undecided(_) => CliError::Failed(e.to_string()),
            _ => usage(e),
        }
    }
}

macro_rules! usage_from {
    ($($t:ty),*) => {$(
        impl From<$t> for CliError {
            fn from(e: $t) -> Self {
                usage(e)
            }
        }
    )*};
}
usage_from!(PolyError, EvalError, ParseError, ArithError, CodeError, SequenceFormatError, std::io::Error, serde_json::Error);

type Res<T> = Result<T, CliError>;

#[derive(Parser, Debug)]
#[command(name = "elimkit", version, about = "Straight-line programs, encodings by values and elimination certificates")]
pub struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Straight-line program files.
    #[command(subcommand)]
    Slp(SlpCmd),
    /// Test and identification sequences.
    #[command(subcommand)]
    Seq(SeqCmd),
    /// Encodings by values.
    #[command(subcommand)]
    Encode(EncodeCmd),
    /// Built-in program families.
    #[command(subcommand)]
    Family(FamilyCmd),
    /// Certificates and probes.
    #[command(subcommand)]
    Harness(HarnessCmd),
    /// Numeric bounds.
    #[command(subcommand)]
    Bounds(BoundsCmd),
    /// Runs the acceptance checks and prints a pass/fail table on stderr.
    Reproduce(ReproduceArgs),
}

#[derive(Args, Debug)]
struct SlpFile {
    #[arg(long)]
    file: PathBuf,
}

#[derive(Args, Debug)]
struct AtArg {
    /// Comma-separated `name=value` pairs; values are integers or `p/q`.
    #[arg(long)]
    at: Option<String>,
}

#[derive(Subcommand, Debug)]
enum SlpCmd {
    Eval {
        #[command(flatten)]
        file: SlpFile,
        #[command(flatten)]
        at: AtArg,
    },
    Expand {
        #[command(flatten)]
        file: SlpFile,
        #[arg(long, default_value_t = 0)]
        output: usize,
    },
    Profile {
        #[command(flatten)]
        file: SlpFile,
    },
    Validate {
        #[command(flatten)]
        file: SlpFile,
    },
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum KindArg {
    CorrectTest,
    Identification,
    #[value(alias = "circuit-class")]
    Circuit,
}

impl From<KindArg> for Kind {
    fn from(k: KindArg) -> Self {
        match k {
            KindArg::CorrectTest => Kind::CorrectTest,
            KindArg::Identification => Kind::Identification,
            KindArg::Circuit => Kind::CircuitClass,
        }
    }
}

#[derive(Args, Debug)]
struct SpecArgs {
    #[arg(long = "L")]
    l: u64,
    #[arg(long)]
    t: u64,
    #[arg(long, default_value_t = 1)]
    delta: u64,
    #[arg(long, default_value_t = 0)]
    k: u64,
    #[arg(long, default_value_t = 1)]
    delta1: u64,
    #[arg(long, default_value_t = 1)]
    delta2: u64,
}

impl SpecArgs {
    fn spec(&self) -> Res<ClassSpec> {
        let s = ClassSpec {
            k: self.k,
            delta1: self.delta1,
            delta2: self.delta2,
            ..ClassSpec::new(self.l, self.t, self.delta)
        };
        s.validate().map_err(usage)?;
        Ok(s)
    }
}

#[derive(Subcommand, Debug)]
enum SeqCmd {
    /// Required length `m` and set size `M`.
    Params {
        #[command(flatten)]
        spec: SpecArgs,
        #[arg(long, value_enum, default_value = "circuit")]
        kind: KindArg,
    },
    Sample {
        #[command(flatten)]
        spec: SpecArgs,
        #[arg(long, value_enum, default_value = "circuit")]
        kind: KindArg,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Also write the bare sequence JSON here.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Checks a sequence against an explicit class.
    Verify {
        #[arg(long)]
        gamma: PathBuf,
        #[arg(long)]
        class_file: PathBuf,
        #[arg(long, value_enum, default_value = "identification")]
        kind: KindArg,
    },
    /// Identity test of a program output on a sequence.
    Pit {
        #[command(flatten)]
        file: SlpFile,
        #[arg(long)]
        gamma: PathBuf,
        #[command(flatten)]
        at: AtArg,
        #[arg(long, default_value_t = 0)]
        output: usize,
    },
}

#[derive(Subcommand, Debug)]
enum EncodeCmd {
    /// Values of a program output or a polynomial on the sequence.
    Values {
        #[arg(long)]
        gamma: PathBuf,
        #[arg(long, conflicts_with = "poly")]
        file: Option<PathBuf>,
        #[arg(long)]
        poly: Option<String>,
        /// Coordinate order for `--poly`; defaults to its variables sorted by name.
        #[arg(long)]
        vars: Option<String>,
        #[command(flatten)]
        at: AtArg,
        #[arg(long, default_value_t = 0)]
        output: usize,
    },
    Decode {
        #[arg(long)]
        gamma: PathBuf,
        #[arg(long)]
        code: PathBuf,
        /// Comma-separated variable names, in coordinate order.
        #[arg(long)]
        vars: String,
        /// Comma-separated monomials, e.g. `1,Y_1,Y_1*Y_2`.
        #[arg(long)]
        basis: String,
    },
    Eq {
        #[arg(long)]
        gamma: PathBuf,
        #[arg(long)]
        a: PathBuf,
        #[arg(long)]
        b: PathBuf,
    },
}

#[derive(Args, Debug)]
struct Specialize {
    #[arg(long, allow_hyphen_values = true)]
    t: Option<String>,
    /// Comma-separated; defaults to all ones.
    #[arg(long, allow_hyphen_values = true)]
    u: Option<String>,
}

impl Specialize {
    fn values(&self, n: u32) -> Res<Option<(Rational, Vec<Rational>)>> {
        let Some(t) = &self.t else {
            if self.u.is_some() {
                return Err(usage("--u needs --t"));
            }
            return Ok(None);
        };
        let t = parse_rational(t)?;
        let u = match &self.u {
            Some(s) => parse_list(s)?,
            None => vec![Rational::from_integer(1.into()); n as usize],
        };
        if u.len() != n as usize {
            return Err(usage(format!("expected {n} values for --u, got {}", u.len())));
        }
        Ok(Some((t, u)))
    }
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum VariantArg {
    Circuit,
    Sparse,
}

#[derive(Subcommand, Debug)]
enum FamilyCmd {
    Fd {
        #[arg(long)]
        d: u64,
    },
    Pn {
        #[arg(long)]
        n: u32,
        #[command(flatten)]
        at: Specialize,
    },
    Fn {
        #[arg(long)]
        n: u32,
        #[command(flatten)]
        at: Specialize,
    },
    Gtilde {
        #[arg(long)]
        n: u32,
    },
    Rn {
        #[arg(long)]
        n: u32,
    },
    Phi {
        #[arg(long)]
        n: u32,
        #[arg(long, value_enum, default_value = "circuit")]
        variant: VariantArg,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum FieldArg {
    Q,
    P,
}

#[derive(Subcommand, Debug)]
enum HarnessCmd {
    /// Elimination polynomial over the hypercube.
    Elim {
        #[arg(long, conflicts_with = "file")]
        n: Option<u32>,
        #[command(flatten)]
        spec: Specialize,
        #[arg(long)]
        first_order: bool,
        /// A custom single-output program; parameters come from `--at`.
        #[arg(long)]
        file: Option<PathBuf>,
        #[command(flatten)]
        at: AtArg,
    },
    Independence {
        #[arg(long)]
        n: u32,
        #[arg(long, value_enum)]
        field: Option<FieldArg>,
    },
    LkRank {
        #[arg(long)]
        n: u32,
        #[arg(long, value_enum)]
        field: Option<FieldArg>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// JSON array of integer points, one per row.
        #[arg(long)]
        points: Option<PathBuf>,
        /// Use the unsigned forms.
        #[arg(long)]
        unsigned: bool,
    },
    Tangent {
        #[arg(long)]
        d: u64,
        #[arg(long)]
        p: Option<u64>,
    },
    Blowup {
        #[arg(long)]
        n: u32,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    Robust {
        #[arg(long, value_parser = clap::value_parser!(u8).range(1..=2))]
        paradigm: u8,
        #[arg(long)]
        d: Option<u64>,
        #[arg(long)]
        p: Option<u64>,
        #[arg(long)]
        n: Option<u32>,
        #[arg(long, default_value_t = 20)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    Distinctness {
        #[arg(long)]
        n: u32,
        #[arg(long, default_value_t = 200)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    Separable {
        #[arg(long, conflicts_with = "n")]
        poly: Option<String>,
        #[arg(long)]
        n: Option<u32>,
        #[command(flatten)]
        spec: Specialize,
    },
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum VcVariantArg {
    Complex,
    Real,
}

#[derive(Subcommand, Debug)]
enum BoundsCmd {
    Bezout {
        #[arg(long)]
        deg_v: BigUint,
        #[arg(long)]
        deg_w: BigUint,
    },
    Degree {
        #[command(flatten)]
        spec: SpecArgs,
        #[arg(long)]
        equidim: bool,
    },
    Vc {
        #[arg(long = "L")]
        l: u64,
        #[arg(long)]
        delta2: u64,
        #[arg(long, value_enum, default_value = "complex")]
        variant: VcVariantArg,
    },
    Wlt {
        #[arg(long = "L")]
        l: u64,
        #[arg(long)]
        t: u64,
        #[arg(long, default_value = "1")]
        epsilon: String,
    },
    /// Brute-force zero-set shattering of an explicit class.
    Shatter {
        #[arg(long)]
        class_file: PathBuf,
        /// Points separated by `;`, coordinates by `,`.
        #[arg(long, allow_hyphen_values = true)]
        pool: String,
        #[arg(long, default_value_t = 3)]
        max_s: usize,
    },
}

#[derive(Args, Debug)]
struct ReproduceArgs {
    /// Run every criterion (the default; kept for explicitness).
    #[arg(long)]
    all: bool,
    /// Run only this criterion.
    #[arg(long, conflicts_with = "all", value_parser = clap::value_parser!(u32).range(1..=12))]
    only: Option<u32>,
    #[arg(long)]
    max_n: Option<u32>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct RunReport {
    pub command: Vec<String>,
    pub seed: Option<u64>,
    pub wall_time_ms: u64,
    pub payload: Value,
    pub verdict: Option<bool>,
}

/// What a command produced, before timing is attached.
struct Outcome {
    seed: Option<u64>,
    payload: Value,
    verdict: Option<bool>,
}

impl Outcome {
    fn plain(payload: Value) -> Self {
        Self {
            seed: None,
            payload,
            verdict: None,
        }
    }

    fn judged(payload: Value, verdict: bool) -> Self {
        Self {
            seed: None,
            payload,
            verdict: Some(verdict),
        }
    }

    fn seeded(mut self, seed: u64) -> Self {
        self.seed = Some(seed);
        self
    }
}

fn budget(default: u64) -> Res<u64> {
    match std::env::var(BUDGET_ENV) {
        Ok(v) => v
            .trim()
            .parse()
            .map_err(|_| usage(format!("{BUDGET_ENV} must be a nonnegative integer, got {v:?}"))),
        Err(_) => Ok(default),
    }
}

fn read(path: &Path) -> Res<String> {
    std::fs::read_to_string(path).map_err(|e| usage(format!("{}: {e}", path.display())))
}

/// Reads JSON from a file; a saved report is unwrapped to its payload.
fn read_payload(path: &Path) -> Res<Value> {
    let v: Value = serde_json::from_str(&read(path)?).map_err(|e| usage(format!("{}: {e}", path.display())))?;
    match v {
        Value::Object(mut m) if m.contains_key("command") && m.contains_key("payload") => {
            Ok(m.remove("payload").expect("checked"))
        }
        v => Ok(v),
    }
}

fn load_slp(path: &Path) -> Res<Slp> {
    let slp = parse_slp(&read(path)?)?;
    slp.validate().map_err(|v| usage(format!("invalid program: {v}")))?;
    Ok(slp)
}

fn load_gamma(path: &Path) -> Res<TestSequence> {
    Ok(TestSequence::from_json(&read_payload(path)?.to_string())?)
}

fn load_code(path: &Path) -> Res<ValueCode> {
    Ok(serde_json::from_value(read_payload(path)?)?)
}

#[derive(Deserialize)]
struct ClassFile {
    vars: Vec<String>,
    members: Vec<String>,
}

fn load_class(path: &Path) -> Res<ClassEnum> {
    let f: ClassFile = serde_json::from_value(read_payload(path)?)?;
    let members = f
        .members
        .iter()
        .map(|m| parse_poly_in(m, &f.vars))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(ClassEnum::new(&f.vars, members)?)
}

fn parse_list(s: &str) -> Res<Vec<Rational>> {
    s.split(',')
        .filter(|x| !x.trim().is_empty())
        .map(|x| parse_rational(x).map_err(CliError::from))
        .collect()
}

fn parse_at(at: &AtArg) -> Res<Vec<(String, Rational)>> {
    let Some(s) = &at.at else { return Ok(Vec::new()) };
    s.split(',')
        .filter(|x| !x.trim().is_empty())
        .map(|pair| {
            let (k, v) = pair
                .split_once('=')
                .ok_or_else(|| usage(format!("expected name=value, got {pair:?}")))?;
            Ok((k.trim().to_string(), parse_rational(v)?))
        })
        .collect()
}

/// Values for `names` drawn from the assignment; every name must be set
/// and every assignment used.
fn assign(names: &[String], pairs: &[(String, Rational)], what: &str) -> Res<Vec<Rational>> {
    names
        .iter()
        .map(|n| {
            pairs
                .iter()
                .find(|(k, _)| k == n)
                .map(|(_, v)| v.clone())
                .ok_or_else(|| usage(format!("missing value for {what} {n}")))
        })
        .collect()
}

fn reject_unknown(pairs: &[(String, Rational)], known: &[&[String]]) -> Res<()> {
    for (k, _) in pairs {
        if !known.iter().any(|names| names.contains(k)) {
            return Err(usage(format!("unknown name {k}")));
        }
    }
    Ok(())
}

fn params_from_at(slp: &Slp, at: &AtArg) -> Res<Vec<Rational>> {
    let pairs = parse_at(at)?;
    reject_unknown(&pairs, &[slp.params()])?;
    assign(slp.params(), &pairs, "parameter")
}

/// Integers that fit `u64` print as numbers, larger ones as strings.
fn big_json(n: &BigUint) -> Value {
    match n.to_u64() {
        Some(v) => json!(v),
        None => json!(n.to_string()),
    }
}

fn to_value<T: Serialize>(x: &T) -> Value {
    serde_json::to_value(x).expect("report types serialize")
}

fn run_slp(cmd: SlpCmd) -> Res<Outcome> {
    Ok(match cmd {
        SlpCmd::Eval { file, at } => {
            let slp = load_slp(&file.file)?;
            let pairs = parse_at(&at)?;
            reject_unknown(&pairs, &[slp.params(), slp.vars()])?;
            let p = assign(slp.params(), &pairs, "parameter")?;
            let x = assign(slp.vars(), &pairs, "variable")?;
            let out = slp.evaluate(&Rationals, &p, &x)?;
            Outcome::plain(json!({ "values": out.iter().map(|v| v.to_string()).collect::<Vec<_>>() }))
        }
        SlpCmd::Expand { file, output } => {
            let slp = load_slp(&file.file)?;
            let b = budget(DEFAULT_BUDGET as u64)? as usize;
            let p = expand(&slp, output, b)?;
            Outcome::plain(json!({
                "vars": p.vars(),
                "terms": p.num_terms(),
                "polynomial": p.to_string(),
            }))
        }
        SlpCmd::Profile { file } => Outcome::plain(to_value(&load_slp(&file.file)?.profile())),
        SlpCmd::Validate { file } => {
            let slp = parse_slp(&read(&file.file)?)?;
            match slp.validate() {
                Ok(()) => Outcome::judged(json!({ "valid": true }), true),
                Err(v) => Outcome::judged(json!({ "valid": false, "violation": v.to_string() }), false),
            }
        }
    })
}

fn run_seq(cmd: SeqCmd) -> Res<Outcome> {
    Ok(match cmd {
        SeqCmd::Params { spec, kind } => {
            let s = spec.spec()?;
            let kind = kind.into();
            Outcome::plain(json!({
                "m": required_length(&s, kind),
                "M": big_json(&required_set_size(&s, kind)),
            }))
        }
        SeqCmd::Sample { spec, kind, seed, out } => {
            let s = spec.spec()?;
            let m = required_length(&s, kind.into());
            if m > budget(DEFAULT_BUDGET as u64)? {
                return Err(CliError::Budget(format!("sequence length {m} exceeds the budget")));
            }
            let gamma = sample_sequence(&s, kind.into(), seed);
            let text = gamma.to_json();
            if let Some(path) = out {
                std::fs::write(&path, &text).map_err(|e| usage(format!("{}: {e}", path.display())))?;
            }
            Outcome::plain(serde_json::from_str(&text)?).seeded(seed)
        }
        SeqCmd::Verify { gamma, class_file, kind } => {
            let g = load_gamma(&gamma)?;
            let class = load_class(&class_file)?;
            match kind {
                KindArg::CorrectTest => {
                    let v = is_correct_test_sequence(&g, &class)?;
                    let witness = v.witness.map(|i| class.members[i].to_string());
                    Outcome::judged(json!({ "kind": "correct-test", "holds": v.holds, "witness": witness }), v.holds)
                }
                KindArg::Identification => {
                    let v = is_identification_sequence(&g, &class)?;
                    let witness = v
                        .witness
                        .map(|(i, j)| [class.members[i].to_string(), class.members[j].to_string()]);
                    Outcome::judged(json!({ "kind": "identification", "holds": v.holds, "witness": witness }), v.holds)
                }
                KindArg::Circuit => {
                    return Err(usage("verify takes --kind correct-test or identification"))
                }
            }
        }
        SeqCmd::Pit { file, gamma, at, output } => {
            let slp = load_slp(&file.file)?;
            let g = load_gamma(&gamma)?;
            let params = params_from_at(&slp, &at)?;
            Outcome::plain(to_value(&pit(&slp, output, &params, &g)?))
        }
    })
}

fn split_names(s: &str) -> Vec<String> {
    s.split(',').map(|v| v.trim().to_string()).filter(|v| !v.is_empty()).collect()
}

fn parse_basis(vars: &[String], text: &str) -> Res<Vec<Exponents>> {
    text.split(',')
        .map(|m| {
            let p = parse_poly_in(m, vars)?;
            let terms = p.sorted_terms();
            match terms.as_slice() {
                [(e, c)] if **c == Rational::from_integer(1.into()) => Ok((*e).clone()),
                _ => Err(usage(format!("basis entry {m:?} is not a monomial"))),
            }
        })
        .collect()
}

fn run_encode(cmd: EncodeCmd) -> Res<Outcome> {
    Ok(match cmd {
        EncodeCmd::Values { gamma, file, poly, vars, at, output } => {
            let g = load_gamma(&gamma)?;
            let code = match (file, poly) {
                (Some(f), None) => {
                    let slp = load_slp(&f)?;
                    let params = params_from_at(&slp, &at)?;
                    encode_slp(&slp, output, &params, &g)?
                }
                (None, Some(p)) => {
                    let vars = match vars {
                        Some(v) => split_names(&v),
                        None => {
                            let mut v = parse_poly(&p)?.used_vars();
                            v.sort();
                            v
                        }
                    };
                    if vars.len() != g.t {
                        return Err(usage(format!("{} variables for points of dimension {}", vars.len(), g.t)));
                    }
                    encode_poly(&parse_poly_in(&p, &vars)?, &g)?
                }
                _ => return Err(usage("give exactly one of --file or --poly")),
            };
            Outcome::plain(to_value(&code))
        }
        EncodeCmd::Decode { gamma, code, vars, basis } => {
            let g = load_gamma(&gamma)?;
            let c = load_code(&code)?;
            let vars = split_names(&vars);
            if vars.len() != g.t {
                return Err(usage(format!("{} variables for points of dimension {}", vars.len(), g.t)));
            }
            let basis = parse_basis(&vars, &basis)?;
            let p = decode(&c, &g, &vars, &basis)?;
            Outcome::plain(json!({ "polynomial": p.to_string() }))
        }
        EncodeCmd::Eq { gamma, a, b } => {
            let id = load_gamma(&gamma)?.fingerprint();
            let (a, b) = (load_code(&a)?, load_code(&b)?);
            if a.gamma_id != id {
                return Err(usage(format!("first code was taken on {}, not {id}", a.gamma_id)));
            }
            Outcome::plain(json!({ "equal": code_eq(&a, &b)? }))
        }
    })
}

fn family_payload(slp: &Slp, closed: Option<&MultiPoly>) -> Value {
    let mut v = json!({
        "slp": serialize_slp(slp),
        "profile": to_value(&slp.profile()),
    });
    if let Some(p) = closed {
        v["closed_form"] = json!(p.to_string());
    }
    v
}

/// Closed forms are printed only while they stay small.
const CLOSED_FORM_LIMIT: u32 = 6;

fn run_family(cmd: FamilyCmd) -> Res<Outcome> {
    Ok(match cmd {
        FamilyCmd::Fd { d } => {
            if d == 0 {
                return Err(usage("d must be positive"));
            }
            if d > budget(DEFAULT_BUDGET as u64)? {
                return Err(CliError::Budget(format!("d = {d} exceeds the budget")));
            }
            Outcome::plain(family_payload(&fd_slp(d), Some(&fd_closed_form(d))))
        }
        FamilyCmd::Pn { n, at } => {
            check_n(n)?;
            match at.values(n)? {
                Some((t, u)) => Outcome::plain(json!({ "text": pn_specialized(n, &t, &u)?.to_string() })),
                None => {
                    let mut v = family_payload(&pn_slp(n), None);
                    v["first_order"] = to_value(&pn_first_order(n)?);
                    Outcome::plain(v)
                }
            }
        }
        FamilyCmd::Fn { n, at } => {
            check_n(n)?;
            match at.values(n)? {
                Some((t, u)) => {
                    let closed = fn_closed_form(n);
                    let names = closed.vars().to_vec();
                    let mut assignment = vec![(names[0].as_str(), t)];
                    assignment.extend(names[1..=n as usize].iter().map(String::as_str).zip(u));
                    Outcome::plain(json!({ "text": closed.specialize(&assignment).to_string() }))
                }
                None => {
                    let closed = (n <= CLOSED_FORM_LIMIT).then(|| fn_closed_form(n));
                    Outcome::plain(family_payload(&fn_slp(n).slp, closed.as_ref()))
                }
            }
        }
        FamilyCmd::Gtilde { n } => {
            let g = gtilde_system(n)?;
            Outcome::plain(json!({
                "n": g.n,
                "vars": g.vars,
                "equations": g.equations.iter().map(|e| e.to_string()).collect::<Vec<_>>(),
                "f_tilde": g.f_tilde.to_string(),
            }))
        }
        FamilyCmd::Rn { n } => {
            check_n(n)?;
            let closed = (n <= CLOSED_FORM_LIMIT).then(|| rn_closed_form(n));
            Outcome::plain(family_payload(&rn_slp(n), closed.as_ref()))
        }
        FamilyCmd::Phi { n, variant, seed } => {
            let v = match variant {
                VariantArg::Circuit => PhiVariant::Circuit,
                VariantArg::Sparse => PhiVariant::Sparse,
            };
            Outcome::plain(to_value(&phi_formula(n, v, seed)?)).seeded(seed)
        }
    })
}

/// Families are built eagerly, so `n` is capped here.
const FAMILY_LIMIT: u32 = 20;

fn check_n(n: u32) -> Res<()> {
    if n == 0 {
        return Err(usage("n must be positive"));
    }
    if n > FAMILY_LIMIT {
        return Err(CliError::Budget(format!("n = {n} exceeds the supported maximum {FAMILY_LIMIT}")));
    }
    Ok(())
}

fn rank_field(field: Option<FieldArg>, n: u32) -> RankField {
    match field {
        Some(FieldArg::Q) => RankField::Rationals,
        Some(FieldArg::P) => RankField::Prime { p: CERT_PRIME },
        None if n <= EXACT_RANK_LIMIT => RankField::Rationals,
        None => RankField::Prime { p: CERT_PRIME },
    }
}

fn run_harness(cmd: HarnessCmd) -> Res<Outcome> {
    Ok(match cmd {
        HarnessCmd::Elim { n, spec, first_order, file, at } => {
            let b = budget(ELIM_BUDGET)?;
            let (fam, mode) = match (n, file) {
                (Some(n), None) => {
                    check_n(n)?;
                    let mode = if first_order {
                        ElimMode::FirstOrder
                    } else {
                        let (t, u) = spec
                            .values(n)?
                            .ok_or_else(|| usage("give --t (and optionally --u) or --first-order"))?;
                        ElimMode::at(t, &u)
                    };
                    (fn_slp(n), mode)
                }
                (None, Some(f)) => {
                    let slp = load_slp(&f)?;
                    let params = params_from_at(&slp, &at)?;
                    (HypercubeFamily::custom(slp)?, ElimMode::Specialized(params))
                }
                _ => return Err(usage("give exactly one of --n or --file")),
            };
            match eliminate_hypercube(&fam, &mode, b)? {
                ElimResult::Specialized(p) => Outcome::plain(json!({ "polynomial": p.to_string() })),
                ElimResult::FirstOrder(f) => Outcome::plain(to_value(&f)),
            }
        }
        HarnessCmd::Independence { n, field } => {
            let c = independence_rank(n, rank_field(field, n))?;
            let full = c.is_full();
            Outcome::judged(to_value(&c), full)
        }
        HarnessCmd::LkRank { n, field, seed, points, unsigned } => {
            let source = match points {
                Some(p) => PointSource::Explicit(serde_json::from_value(read_payload(&p)?)?),
                None => PointSource::Seeded(seed),
            };
            let (c, attempts) = lk_at_points_rank(n, &source, rank_field(field, n), !unsigned)?;
            let full = c.is_full();
            Outcome::judged(json!({ "certificate": to_value(&c), "attempts": to_value(&attempts) }), full)
                .seeded(seed)
        }
        HarnessCmd::Tangent { d, p } => {
            if d == 0 {
                return Err(usage("d must be positive"));
            }
            let p = p.unwrap_or_else(|| least_prime_congruent_one(d, 1 << 16));
            let c = tangent_rank_paradigm1(d, p)?;
            let full = c.rank as u64 == d;
            Outcome::judged(to_value(&c), full)
        }
        HarnessCmd::Blowup { n, seed } => {
            let r = blowup_report(n, seed)?;
            let ok = r.certified_lower_bound_m_star == Some(1u64 << n);
            Outcome::judged(to_value(&r), ok).seeded(seed)
        }
        HarnessCmd::Robust { paradigm, d, p, n, samples, seed } => {
            let probe = if paradigm == 1 {
                let d = d.ok_or_else(|| usage("paradigm 1 needs --d"))?;
                if d == 0 {
                    return Err(usage("d must be positive"));
                }
                Probe::Paradigm1 {
                    d,
                    p: p.unwrap_or_else(|| least_prime_congruent_one(d, 100)),
                }
            } else {
                Probe::Paradigm2 {
                    n: n.ok_or_else(|| usage("paradigm 2 needs --n"))?,
                    samples,
                    seed,
                }
            };
            let r = robustness_probe(&probe)?;
            let out = Outcome::judged(to_value(&r), r.passed());
            if paradigm == 2 {
                out.seeded(seed)
            } else {
                out
            }
        }
        HarnessCmd::Distinctness { n, trials, seed } => {
            if trials as u64 > budget(DEFAULT_BUDGET as u64)? {
                return Err(CliError::Budget(format!("{trials} trials exceed the budget")));
            }
            let r = distinctness_probe_gamma_n(n, trials, seed)?;
            let ok = r.counterexamples.is_empty();
            Outcome::judged(to_value(&r), ok).seeded(seed)
        }
        HarnessCmd::Separable { poly, n, spec } => {
            let p = match (poly, n) {
                (Some(p), None) => parse_poly(&p)?,
                (None, Some(n)) => {
                    check_n(n)?;
                    let (t, u) = spec.values(n)?.ok_or_else(|| usage("--n needs --t"))?;
                    pn_specialized(n, &t, &u)?
                }
                _ => return Err(usage("give exactly one of --poly or --n")),
            };
            let r = separability_check(&p)?;
            Outcome::judged(
                json!({ "separable": r.separable, "gcd_with_derivative": r.gcd_with_derivative.to_string() }),
                r.separable,
            )
        }
    })
}

fn parse_pool(text: &str) -> Res<Vec<Vec<Rational>>> {
    text.split(';')
        .filter(|p| !p.trim().is_empty())
        .map(parse_list)
        .collect()
}

fn run_bounds(cmd: BoundsCmd) -> Res<Outcome> {
    Ok(match cmd {
        BoundsCmd::Bezout { deg_v, deg_w } => Outcome::plain(to_value(&bezout_report(&deg_v, &deg_w))),
        BoundsCmd::Degree { spec, equidim } => Outcome::plain(to_value(&degree_report(&spec.spec()?, equidim))),
        BoundsCmd::Vc { l, delta2, variant } => {
            let v = match variant {
                VcVariantArg::Complex => VcVariant::Complex,
                VcVariantArg::Real => VcVariant::Real,
            };
            Outcome::plain(to_value(&vc_report(l, delta2, v)?))
        }
        BoundsCmd::Wlt { l, t, epsilon } => Outcome::plain(to_value(&wlt_report(l, t, &parse_rational(&epsilon)?)?)),
        BoundsCmd::Shatter { class_file, pool, max_s } => {
            let class = load_class(&class_file)?;
            let pool = parse_pool(&pool)?;
            if pool.iter().any(|p| p.len() != class.vars.len()) {
                return Err(usage(format!("pool points must have {} coordinates", class.vars.len())));
            }
            let r = vc_shatter_oracle(&class.members, &class.vars, &pool, max_s, budget(SHATTER_BUDGET)?)?;
            Outcome::plain(to_value(&r))
        }
    })
}

fn run_reproduce(args: ReproduceArgs) -> Res<Outcome> {
    let opts = Options {
        seed: args.seed,
        max_n: args.max_n,
    };
    let ids: Vec<u32> = match args.only {
        Some(id) => vec![id],
        None => reproduce::CRITERIA.iter().map(|c| c.0).collect(),
    };
    let mut outcomes = Vec::new();
    for id in ids {
        let t = reproduce::run_one(id, &opts);
        eprintln!(
            "criterion {:>2}  {}  {:>8.2}s  {}",
            id,
            if t.outcome.passed { "PASS" } else { "FAIL" },
            t.elapsed.as_secs_f64(),
            t.outcome.title
        );
        outcomes.push(t.outcome);
    }
    let passed = outcomes.iter().all(|o| o.passed);
    Ok(Outcome::judged(json!({ "max_n": args.max_n, "criteria": to_value(&outcomes) }), passed).seeded(args.seed))
}

fn dispatch(cmd: Command) -> Res<Outcome> {
    match cmd {
        Command::Slp(c) => run_slp(c),
        Command::Seq(c) => run_seq(c),
        Command::Encode(c) => run_encode(c),
        Command::Family(c) => run_family(c),
        Command::Harness(c) => run_harness(c),
        Command::Bounds(c) => run_bounds(c),
        Command::Reproduce(a) => run_reproduce(a),
    }
}

/// Runs one invocation. Returns the exit code and the report, if any.
pub fn run<I, T>(argv: I) -> (i32, Option<RunReport>)
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let argv: Vec<OsString> = argv.into_iter().map(Into::into).collect();
    let cli = match Cli::try_parse_from(&argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return (if e.use_stderr() { 2 } else { 0 }, None);
        }
    };
    let start = Instant::now();
    match dispatch(cli.command) {
        Ok(out) => {
            let code = if out.verdict == Some(false) { 1 } else { 0 };
            let report = RunReport {
                command: argv.iter().skip(1).map(|a| a.to_string_lossy().into_owned()).collect(),
                seed: out.seed,
                wall_time_ms: start.elapsed().as_millis() as u64,
                payload: out.payload,
                verdict: out.verdict,
            };
            (code, Some(report))
        }
        Err(e) => {
            eprintln!("error: {e}");
            (e.exit_code(), None)
        }
    }
}

/// Entry point for the binary: prints the report and returns the exit code.
pub fn main_with<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let (code, report) = run(argv);
    if let Some(r) = report {
        println!("{}", serde_json::to_string(&r).expect("report serializes"));
    }
    code
}

#[cfg(test)]
mod tests {
    use super::*;

    fn payload(args: &[&str]) -> (i32, Value) {
        let mut argv = vec!["elimkit"];
        argv.extend_from_slice(args);
        let (code, report) = run(argv);
        (code, report.map(|r| r.payload).unwrap_or(Value::Null))
    }

    #[test]
    fn worked_examples() {
        let (c, p) = payload(&["seq", "params", "--L", "2", "--t", "1", "--kind", "circuit"]);
        assert_eq!(c, 0);
        assert_eq!(p, json!({"m": 66, "M": 4096}));
        let (c, p) = payload(&["family", "pn", "--n", "2", "--t", "0"]);
        assert_eq!(c, 0);
        assert_eq!(p["text"], "Y^4 - 6*Y^3 + 11*Y^2 - 6*Y");
        let (c, p) = payload(&["harness", "independence", "--n", "3"]);
        assert_eq!(c, 0);
        assert_eq!(p["rank"], 8);
    }

    #[test]
    fn exit_codes() {
        assert_eq!(payload(&["seq", "params", "--t", "1"]).0, 2);
        assert_eq!(payload(&["family", "pn", "--n", "2", "--t", "0", "--u", "1"]).0, 2);
        assert_eq!(payload(&["harness", "independence", "--n", "40"]).0, 3);
        assert_eq!(payload(&["harness", "separable", "--poly", "(Y-1)^2"]).0, 1);
        assert_eq!(payload(&["harness", "tangent", "--d", "4"]).0, 0);
    }

    #[test]
    fn pool_and_at_parsing() {
        let pool = parse_pool("-1,0; 2,1/2").unwrap();
        assert_eq!(pool.len(), 2);
        assert_eq!(pool[1][1], crate::ring::rat_frac(1, 2));
        let at = AtArg { at: Some("T=1, U_1=-2/3".into()) };
        let pairs = parse_at(&at).unwrap();
        assert_eq!(pairs[1].0, "U_1");
        assert!(parse_at(&AtArg { at: Some("T".into()) }).is_err());
    }
}
