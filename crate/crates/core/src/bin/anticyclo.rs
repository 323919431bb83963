//! Batch verification front-end: fixture ingestion, pipeline
//! orchestration (forms → class groups → Euler factors → L-values →
//! verification reports), and deterministic report emission.
//!
//! Exit codes: 0 on pass/success, 1 on verification failure, 2 on input
//! or schema error (reported as a machine-readable error record).

use std::collections::BTreeMap;
use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use anticyclo::classgroup::{enumerate, frobenius_exponent};
use anticyclo::fixtures::{load_json, to_canonical_json, FormFile, FrobRequest, ModelFile};
use anticyclo::iwasawa::{euler_factor, euler_mu_lambda, mu_lambda, IwasawaSeries};
use anticyclo::mahler::Measure;
use anticyclo::model::{
    l_value, verify_congruence, verify_stabilization, EulerCorrection, FormFamily,
};
use anticyclo::padic::{PadicRing, ZpInt};
use anticyclo::qexp::{check_congruence, heegner_validate};
use anticyclo::synth::stabilization_lambda_budget;
use anticyclo::{Error, Result};

#[derive(Parser)]
#[command(name = "anticyclo", version)]
#[command(about = "Verification suite for anticyclotomic p-adic L-value identities")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Write the report to a file instead of stdout
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Report format
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    format: Format,

    /// Override the p-adic working precision M
    #[arg(long = "precision-p", global = true)]
    precision_p: Option<u32>,

    /// Override the t-adic window length N
    #[arg(long = "precision-t", global = true)]
    precision_t: Option<usize>,

    /// Seed for any synthetic data the command generates
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    /// Line-oriented human-readable report
    Text,
    /// Canonical JSON record
    Record,
}

#[derive(Subcommand)]
enum Command {
    /// q-expansion operations
    Forms {
        #[command(subcommand)]
        cmd: FormsCmd,
    },
    /// Heegner-hypothesis checks
    Heegner {
        #[command(subcommand)]
        cmd: HeegnerCmd,
    },
    /// Class groups of imaginary quadratic orders
    Classgroup {
        #[command(subcommand)]
        cmd: ClassgroupCmd,
    },
    /// Iwasawa-algebra computations
    Iwasawa {
        #[command(subcommand)]
        cmd: IwasawaCmd,
    },
    /// μ/λ of the stabilizing Euler factor 𝒫_v̄
    EulerFactor {
        #[arg(long)]
        p: u64,
        #[arg(long)]
        ell: u64,
        /// Hecke eigenvalue a_ℓ
        #[arg(long, allow_hyphen_values = true)]
        a_ell: i64,
        /// Half-weight r (weight = 2r)
        #[arg(long)]
        r: u32,
        /// Frobenius exponent a_v
        #[arg(long)]
        a_v: u64,
        #[arg(long)]
        divides_level: bool,
    },
    /// Model L-values
    Lvalue {
        #[command(subcommand)]
        cmd: LvalueCmd,
    },
    /// Identity and congruence verification on model fixtures
    Verify {
        #[command(subcommand)]
        cmd: VerifyCmd,
    },
}

#[derive(Subcommand)]
enum FormsCmd {
    /// Coefficient-wise congruence of two stored forms mod ϖ^m
    CheckCongruence {
        f1: PathBuf,
        f2: PathBuf,
        #[arg(long, short)]
        modulus: u32,
        /// Override the Sturm-style verification bound
        #[arg(long)]
        bound: Option<usize>,
    },
    /// ℓ-stabilization f − a_ℓ V f (+ ℓ^{2r−1} V² f when ℓ ∤ N)
    Stabilize {
        form: PathBuf,
        #[arg(long)]
        ell: u64,
    },
}

#[derive(Subcommand)]
enum HeegnerCmd {
    /// Check the Heegner and ordinariness hypotheses for (N, 2r, D_K, p)
    Validate {
        #[arg(long)]
        level: u64,
        #[arg(long)]
        weight: u32,
        #[arg(long)]
        d_k: u64,
        #[arg(long)]
        p: u64,
    },
}

#[derive(Subcommand)]
enum ClassgroupCmd {
    /// Enumerate reduced forms of discriminant Δ
    Enumerate {
        #[arg(long, allow_hyphen_values = true)]
        delta: i64,
        /// Also decompose the p-Sylow subgroup
        #[arg(long)]
        p: Option<u64>,
    },
    /// Frobenius exponent a_v at tower level n
    Frobenius {
        /// JSON request file; overrides the individual flags
        #[arg(long)]
        request: Option<PathBuf>,
        #[arg(long, default_value_t = 0)]
        d_k: u64,
        #[arg(long, default_value_t = 0)]
        p: u64,
        #[arg(long, default_value_t = 0)]
        ell: u64,
        #[arg(long, default_value_t = 1)]
        n: u32,
    },
}

#[derive(Subcommand)]
enum IwasawaCmd {
    /// μ/λ of a polynomial in Z_p⟦T⟧ given by its coefficients
    Invariants {
        #[arg(long)]
        p: u64,
        /// Comma-separated T-coefficients a_0,a_1,…
        #[arg(long)]
        coeffs: String,
    },
}

#[derive(Subcommand)]
enum LvalueCmd {
    /// Evaluate ℒ(F)(ρ) for every character in a model fixture
    Eval { model: PathBuf },
}

#[derive(Subcommand)]
enum VerifyCmd {
    /// V-identity and stabilized identity on a model fixture
    Stabilization { model: PathBuf },
    /// Euler-corrected congruence of L-values mod ϖ^m; the second family
    /// is the first perturbed by ϖ^e
    Congruence {
        model: PathBuf,
        #[arg(long, short)]
        modulus: u32,
        /// Perturbation exponent e (default: the modulus)
        #[arg(long)]
        exponent: Option<u32>,
    },
    /// λ-budget equality across the stabilization
    LambdaBudget { model: PathBuf },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (report, pass) = match run(&cli) {
        Ok(out) => out,
        Err(e) => {
            let record = json!({ "error": e.to_string(), "kind": error_kind(&e) });
            emit(&cli, &record);
            return ExitCode::from(2);
        }
    };
    emit(&cli, &report);
    if pass {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}

fn error_kind(e: &Error) -> &'static str {
    match e {
        Error::SchemaError(_) => "schema",
        Error::InvariantViolation(_) => "invariant",
        Error::Io(_) => "io",
        _ => "domain",
    }
}

fn emit(cli: &Cli, report: &Value) {
    let text = match cli.format {
        Format::Record => to_canonical_json(report).expect("serializable report"),
        Format::Text => {
            let mut s = String::new();
            render_text(report, "", &mut s);
            s
        }
    };
    match &cli.out {
        Some(path) => fs::write(path, text).expect("report path writable"),
        None => print!("{text}"),
    }
}

/// Deterministic line-oriented rendering: `path.to.key: value`.
fn render_text(v: &Value, path: &str, out: &mut String) {
    match v {
        Value::Object(map) => {
            for (k, val) in map {
                let sub = if path.is_empty() {
                    k.clone()
                } else {
                    format!("{path}.{k}")
                };
                render_text(val, &sub, out);
            }
        }
        Value::Array(items) => {
            for (i, val) in items.iter().enumerate() {
                render_text(val, &format!("{path}[{i}]"), out);
            }
        }
        other => {
            out.push_str(path);
            out.push_str(": ");
            out.push_str(&other.to_string());
            out.push('\n');
        }
    }
}

fn run(cli: &Cli) -> Result<(Value, bool)> {
    match &cli.command {
        Command::Forms { cmd } => run_forms(cmd),
        Command::Heegner { cmd } => run_heegner(cmd),
        Command::Classgroup { cmd } => run_classgroup(cmd),
        Command::Iwasawa { cmd } => run_iwasawa(cli, cmd),
        Command::EulerFactor {
            p,
            ell,
            a_ell,
            r,
            a_v,
            divides_level,
        } => {
            let m = cli.precision_p.unwrap_or(5);
            let n = cli.precision_t.unwrap_or(8);
            let ring = PadicRing::zp(*p, m)?;
            let e = euler_factor(
                *ell,
                &ring.from_i64(*a_ell),
                *r,
                &ZpInt::from_i64(*p, m, *a_v as i64),
                *divides_level,
                n,
            )?;
            let rep = euler_mu_lambda(&e);
            let pass = rep.mu_decided && rep.lambda_decided;
            Ok((
                json!({
                    "ell": ell,
                    "divides_level": divides_level,
                    "effective_precision": e.effective_precision,
                    "invariants": rep,
                }),
                pass,
            ))
        }
        Command::Lvalue { cmd } => run_lvalue(cmd),
        Command::Verify { cmd } => run_verify(cmd),
    }
}

fn run_forms(cmd: &FormsCmd) -> Result<(Value, bool)> {
    match cmd {
        FormsCmd::CheckCongruence {
            f1,
            f2,
            modulus,
            bound,
        } => {
            let g1 = load_json::<FormFile>(f1)?.to_qexp()?;
            let g2 = load_json::<FormFile>(f2)?.to_qexp()?;
            let rep = check_congruence(&g1, &g2, *modulus, *bound)?;
            let pass = rep.passed();
            Ok((serde_json::to_value(&rep)?, pass))
        }
        FormsCmd::Stabilize { form, ell } => {
            let f = load_json::<FormFile>(form)?.to_qexp()?;
            let g = f.stabilize(*ell)?;
            Ok((serde_json::to_value(FormFile::from_qexp(&g))?, true))
        }
    }
}

fn run_heegner(cmd: &HeegnerCmd) -> Result<(Value, bool)> {
    let HeegnerCmd::Validate {
        level,
        weight,
        d_k,
        p,
    } = cmd;
    let verdict = heegner_validate(*level, *weight, *d_k, *p)?;
    let pass = verdict.pass;
    Ok((serde_json::to_value(&verdict)?, pass))
}

fn run_classgroup(cmd: &ClassgroupCmd) -> Result<(Value, bool)> {
    match cmd {
        ClassgroupCmd::Enumerate { delta, p } => {
            let data = enumerate(*delta, p.unwrap_or(0))?;
            let forms: Vec<Value> = data
                .forms
                .iter()
                .map(|f| json!([f.a, f.b, f.c]))
                .collect();
            Ok((
                json!({
                    "delta": data.delta,
                    "h": data.h,
                    "forms": forms,
                    "sylow_order": data.sylow_order,
                    "sylow_k": data.sylow_k,
                    "generator": data.generator.map(|g| json!([g.a, g.b, g.c])),
                    "generator_prime": data.generator_prime,
                }),
                true,
            ))
        }
        ClassgroupCmd::Frobenius {
            request,
            d_k,
            p,
            ell,
            n,
        } => {
            let req = match request {
                Some(path) => load_json::<FrobRequest>(path)?,
                None => FrobRequest {
                    schema_version: anticyclo::fixtures::SCHEMA_VERSION,
                    d_k: *d_k,
                    p: *p,
                    ell: *ell,
                    n: *n,
                    delta_n: None,
                },
            };
            req.validate()?;
            let frob = frobenius_exponent(req.d_k, req.p, req.ell, req.n)?;
            Ok((serde_json::to_value(frob)?, true))
        }
    }
}

fn run_iwasawa(cli: &Cli, cmd: &IwasawaCmd) -> Result<(Value, bool)> {
    let IwasawaCmd::Invariants { p, coeffs } = cmd;
    let m = cli.precision_p.unwrap_or(6);
    let ring = PadicRing::zp(*p, m)?;
    let parsed = coeffs
        .split(',')
        .map(|s| {
            s.trim()
                .parse::<u64>()
                .map_err(|e| Error::SchemaError(format!("coefficient {s:?}: {e}")))
        })
        .collect::<Result<Vec<u64>>>()?;
    let n = cli.precision_t.unwrap_or(parsed.len().max(2) + 2);
    let f = IwasawaSeries::from_u64_coeffs(&ring, &parsed, n);
    let rep = mu_lambda(&f);
    let pass = rep.mu_decided && rep.lambda_decided;
    Ok((serde_json::to_value(rep)?, pass))
}

fn run_lvalue(cmd: &LvalueCmd) -> Result<(Value, bool)> {
    let LvalueCmd::Eval { model } = cmd;
    let fx = load_json::<ModelFile>(model)?.build()?;
    let mut values = BTreeMap::new();
    for rho in &fx.characters {
        let v = l_value(&fx.family, &fx.context, rho)?;
        let rows: Vec<Vec<u64>> = v.coeffs().iter().map(|c| c.coeffs().to_vec()).collect();
        values.insert(rho.label.clone(), rows);
    }
    Ok((json!({ "values": values }), true))
}

fn run_verify(cmd: &VerifyCmd) -> Result<(Value, bool)> {
    match cmd {
        VerifyCmd::Stabilization { model } => {
            let fx = load_json::<ModelFile>(model)?.build()?;
            let rep = verify_stabilization(
                &fx.family,
                fx.ell,
                &fx.a_ell,
                &fx.context,
                &fx.characters,
            )?;
            let pass = rep.pass();
            Ok((serde_json::to_value(&rep)?, pass))
        }
        VerifyCmd::Congruence {
            model,
            modulus,
            exponent,
        } => {
            let fx = load_json::<ModelFile>(model)?.build()?;
            let ring = fx.family.ring().clone();
            let e = exponent.unwrap_or(*modulus);
            let p = ring.p();
            let step = p.pow(e.min(ring.precision()));
            let mut bump = 0u64;
            let measures = fx
                .family
                .measures()
                .iter()
                .map(|meas| {
                    let c = meas
                        .coeffs()
                        .iter()
                        .map(|x| {
                            bump += 1;
                            x.add(&ring.from_u64(step.wrapping_mul(bump % p + 1)))
                        })
                        .collect();
                    Measure::from_coeffs(c, false)
                })
                .collect();
            let f2 = FormFamily::new(fx.family.r, fx.family.level_tag, measures)?;
            let euler = [EulerCorrection {
                ell: fx.ell,
                a1: fx.a_ell.clone(),
                a2: fx.a_ell.clone(),
            }];
            let rep = verify_congruence(
                &fx.family,
                &f2,
                *modulus,
                &fx.context,
                &fx.characters,
                &euler,
            )?;
            let pass = rep.pass();
            Ok((serde_json::to_value(&rep)?, pass))
        }
        VerifyCmd::LambdaBudget { model } => {
            let fx = load_json::<ModelFile>(model)?.build()?;
            let (lhs, rhs) = stabilization_lambda_budget(&fx)?;
            Ok((
                json!({ "corrected_budget": lhs, "stabilized_budget": rhs, "pass": lhs == rhs }),
                lhs == rhs,
            ))
        }
    }
}
