//! Command-line front end. Every subcommand renders one JSON document (or a
//! CSV table for `sweep`) that embeds the request it was produced from, so a
//! result file can be replayed.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_bigint::BigInt;
use num_rational::BigRational;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{json, Map, Value};

use crate::asymptotics::{self, SaddleData};
use crate::cumulants::{delta_exact_resummed, delta_exact_truncated, DeltaResult, Method};
use crate::error::{Error, Result};
use crate::numerics::{verify_precision, BigReal, Precision, Scalar};
use crate::oracle::{self, DEFAULT_STATE_CAP};
use crate::simulator::{self, Init, SimConfig};
use crate::stationary::{intensive_quantities, ModelParams, StationaryData};
use crate::tq;

/// Version of the JSON layout.
pub const SCHEMA: u32 = 1;

pub const CSV_HEADER: &str = "N,p,q,J,Delta,Delta_over_N32,Delta_over_N,prediction,gap";

const DEFAULT_REL_TOL: f64 = 1e-12;
const DEFAULT_ASYMP_TOL: f64 = 1e-13;

#[derive(Parser, Debug)]
#[command(
    name = "qboson",
    version,
    args_conflicts_with_subcommands = true,
    about = "Current cumulants of the q-boson zero range process"
)]
pub struct Cli {
    /// Re-run the request embedded in an earlier JSON result
    #[arg(long, value_name = "FILE")]
    pub replay: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Option<Command>,
}

#[derive(Subcommand, Serialize, Deserialize, Clone, Debug, PartialEq)]
#[serde(tag = "command", content = "args", rename_all = "kebab-case")]
pub enum Command {
    /// Exact J and Delta from the closed-form double sum
    Exact(RunArgs),
    /// J and Delta from perturbation theory on the full generator
    Oracle(RunArgs),
    /// Monte Carlo estimates of J and Delta
    Simulate(RunArgs),
    /// Saddle-point data and the KPZ constant at density rho
    Asymptotic(RunArgs),
    /// Crossover prediction for q = exp(-alpha / sqrt N)
    Crossover(RunArgs),
    /// First-order T-Q identity check
    VerifyTq(RunArgs),
    /// Exact Delta over a list of N against the asymptotic prediction
    Sweep(RunArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BackendKind {
    Rational,
    Float,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InitKind {
    Stationary,
    AllEqual,
    SinglePile,
}

impl From<InitKind> for Init {
    fn from(k: InitKind) -> Init {
        match k {
            InitKind::Stationary => Init::StationaryProduct,
            InitKind::AllEqual => Init::AllEqual,
            InitKind::SinglePile => Init::SinglePile,
        }
    }
}

#[derive(Args, Serialize, Deserialize, Clone, Debug, PartialEq)]
pub struct RunArgs {
    /// Number of sites; `sweep` takes a comma separated list
    #[arg(long = "n", value_delimiter = ',')]
    pub n: Vec<usize>,
    /// Number of particles
    #[arg(long)]
    pub p: Option<usize>,
    /// Density p/N, as "a/b", an integer or a decimal
    #[arg(long, allow_hyphen_values = true)]
    pub rho: Option<String>,
    /// Rate parameter, as "a/b", an integer or a decimal (decimals force the float backend)
    #[arg(long, allow_hyphen_values = true)]
    pub q: Option<String>,
    /// Crossover scaling, q = exp(-alpha / sqrt N)
    #[arg(long, allow_hyphen_values = true)]
    pub alpha: Option<f64>,
    #[arg(long, value_enum)]
    pub backend: Option<BackendKind>,
    /// Mantissa bits of the float backend
    #[arg(long, default_value_t = 256)]
    pub prec: u32,
    #[arg(long)]
    pub tol: Option<f64>,
    /// Cut the kernel sums at this many terms instead of resumming
    #[arg(long)]
    pub imax: Option<usize>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Burn-in time; defaults to 10 N^2
    #[arg(long)]
    pub t_burn: Option<f64>,
    #[arg(long, default_value_t = 1000.0)]
    pub t_measure: f64,
    #[arg(long, default_value_t = 100)]
    pub reps: usize,
    #[arg(long, value_enum, default_value_t = InitKind::Stationary)]
    pub init: InitKind,
    /// Largest configuration space the oracle accepts
    #[arg(long, default_value_t = DEFAULT_STATE_CAP)]
    pub cap: usize,
    /// Also run the finite-difference eigenvalue cross-check (oracle)
    #[arg(long, default_value_t = false)]
    pub fd: bool,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    #[arg(long)]
    #[serde(skip)]
    pub out: Option<PathBuf>,
}

impl Default for RunArgs {
    fn default() -> Self {
        RunArgs {
            n: Vec::new(),
            p: None,
            rho: None,
            q: None,
            alpha: None,
            backend: None,
            prec: 256,
            tol: None,
            imax: None,
            seed: 0,
            t_burn: None,
            t_measure: 1000.0,
            reps: 100,
            init: InitKind::Stationary,
            cap: DEFAULT_STATE_CAP,
            fd: false,
            format: Format::Json,
            out: None,
        }
    }
}

impl Command {
    pub fn args(&self) -> &RunArgs {
        match self {
            Command::Exact(a)
            | Command::Oracle(a)
            | Command::Simulate(a)
            | Command::Asymptotic(a)
            | Command::Crossover(a)
            | Command::VerifyTq(a)
            | Command::Sweep(a) => a,
        }
    }
}

/// Process exit status for a library error.
pub fn exit_code(err: &Error) -> u8 {
    match err {
        Error::Precision(_) => 3,
        Error::Solver(_) | Error::NoConvergence(_) => 4,
        _ => 2,
    }
}

/// A number given on the command line.
#[derive(Clone, Debug, PartialEq)]
pub enum Number {
    Exact(BigRational),
    Decimal(f64),
}

impl Number {
    pub fn to_f64(&self) -> f64 {
        match self {
            Number::Exact(r) => r.to_f64(),
            Number::Decimal(x) => *x,
        }
    }
}

pub fn parse_number(s: &str) -> Result<Number> {
    let s = s.trim();
    let bad = || Error::InvalidParameter(format!("cannot parse '{s}' as a number"));
    if let Some((num, den)) = s.split_once('/') {
        let num: BigInt = num.trim().parse().map_err(|_| bad())?;
        let den: BigInt = den.trim().parse().map_err(|_| bad())?;
        if den == BigInt::from(0) {
            return Err(Error::InvalidParameter(format!(
                "zero denominator in '{s}'"
            )));
        }
        return Ok(Number::Exact(BigRational::new(num, den)));
    }
    if let Ok(k) = s.parse::<BigInt>() {
        return Ok(Number::Exact(BigRational::from_integer(k)));
    }
    let x: f64 = s.parse().map_err(|_| bad())?;
    if !x.is_finite() {
        return Err(bad());
    }
    Ok(Number::Decimal(x))
}

fn missing(what: &str) -> Error {
    Error::InvalidParameter(format!("--{what} is required"))
}

impl RunArgs {
    fn single_n(&self) -> Result<usize> {
        match self.n.as_slice() {
            [n] => Ok(*n),
            [] => Err(missing("n")),
            _ => Err(Error::InvalidParameter(
                "this command takes a single --n".into(),
            )),
        }
    }

    fn q_number(&self) -> Result<Number> {
        parse_number(self.q.as_deref().ok_or_else(|| missing("q"))?)
    }

    /// `p` directly, or `rho N` when that is an integer.
    fn particles(&self, n: usize) -> Result<usize> {
        match (self.p, &self.rho) {
            (Some(p), None) => Ok(p),
            (None, Some(rho)) => {
                let rho = match parse_number(rho)? {
                    Number::Exact(r) => r,
                    Number::Decimal(x) => BigRational::from_float(x)
                        .ok_or_else(|| Error::InvalidParameter(format!("bad rho {x}")))?,
                };
                let p = rho * BigRational::from_integer(n.into());
                if !p.is_integer() || p < BigRational::from_integer(1.into()) {
                    return Err(Error::InvalidParameter(format!(
                        "rho * N = {p} is not a positive integer for N = {n}"
                    )));
                }
                Ok(p.to_integer().try_into().map_err(|_| missing("p"))?)
            }
            (Some(_), Some(_)) => Err(Error::InvalidParameter(
                "give --p or --rho, not both".into(),
            )),
            (None, None) => Err(missing("p")),
        }
    }

    fn rho_f64(&self) -> Result<f64> {
        Ok(parse_number(self.rho.as_deref().ok_or_else(|| missing("rho"))?)?.to_f64())
    }

    fn precision(&self) -> Result<Precision> {
        if self.prec < 24 {
            return Err(Error::InvalidParameter(format!(
                "--prec {} is below 24 bits",
                self.prec
            )));
        }
        Ok(Precision::new(self.prec))
    }

    fn rel_tol(&self) -> f64 {
        self.tol.unwrap_or(DEFAULT_REL_TOL)
    }

    /// Rational unless asked otherwise or fed a decimal.
    fn backend_for(&self, q: &Number) -> Result<BackendKind> {
        match (self.backend, q) {
            (Some(BackendKind::Rational), Number::Decimal(_)) => Err(Error::InvalidParameter(
                "a decimal q needs the float backend".into(),
            )),
            (Some(b), _) => Ok(b),
            (None, Number::Exact(_)) => Ok(BackendKind::Rational),
            (None, Number::Decimal(_)) => Ok(BackendKind::Float),
        }
    }
}

fn real_q(q: &Number, prec: Precision) -> Result<BigReal> {
    match q {
        Number::Exact(r) => Ok(BigReal::from_rational(r, prec)),
        Number::Decimal(x) => BigReal::from_f64(*x, prec)
            .ok_or_else(|| Error::InvalidParameter(format!("q = {x} is not finite"))),
    }
}

fn text<S: Scalar>(x: &S) -> Value {
    Value::String(x.to_text())
}

fn number_text(q: &Number) -> String {
    match q {
        Number::Exact(r) => r.to_text(),
        Number::Decimal(x) => format!("{x}"),
    }
}

/// JSON or CSV output of one command.
pub fn run(cmd: &Command) -> Result<String> {
    let request = serde_json::to_value(cmd).expect("request serializes");
    let args = cmd.args();
    let result = match cmd {
        Command::Exact(a) => cmd_exact(a)?,
        Command::Oracle(a) => cmd_oracle(a)?,
        Command::Simulate(a) => cmd_simulate(a)?,
        Command::Asymptotic(a) => cmd_asymptotic(a)?,
        Command::Crossover(a) => cmd_crossover(a)?,
        Command::VerifyTq(a) => cmd_verify_tq(a)?,
        Command::Sweep(a) => {
            let rows = sweep_rows(a)?;
            if args.format == Format::Csv {
                return Ok(render_csv(&rows));
            }
            Value::Array(rows.iter().map(SweepRow::to_json).collect())
        }
    };
    if args.format == Format::Csv {
        return Err(Error::InvalidParameter(
            "CSV output is only available for sweep".into(),
        ));
    }
    let doc = json!({ "schema": SCHEMA, "request": request, "result": result });
    Ok(serde_json::to_string_pretty(&doc).expect("json renders") + "\n")
}

/// Re-runs the request stored in a JSON document produced by [`run`].
pub fn replay(document: &str) -> Result<String> {
    let doc: Value = serde_json::from_str(document)
        .map_err(|e| Error::InvalidParameter(format!("replay file is not JSON: {e}")))?;
    let request = doc
        .get("request")
        .cloned()
        .ok_or_else(|| Error::InvalidParameter("replay file has no request".into()))?;
    let cmd: Command = serde_json::from_value(request)
        .map_err(|e| Error::InvalidParameter(format!("bad embedded request: {e}")))?;
    run(&cmd)
}

fn exact_fields<S: Scalar>(
    params: &ModelParams<S>,
    d: &DeltaResult<S>,
) -> Result<Map<String, Value>> {
    let data = StationaryData::with_degree(params, params.particles());
    let z = data.z(params.particles())?.clone();
    let iq = intensive_quantities(params, &d.current, Some(&d.delta));
    let mut m = Map::new();
    m.insert("N".into(), json!(params.sites()));
    m.insert("p".into(), json!(params.particles()));
    m.insert("q".into(), text(params.q().value()));
    m.insert(
        "backend".into(),
        json!(S::backend(&params.context()).to_string()),
    );
    m.insert("Z".into(), text(&z));
    m.insert("J".into(), text(&d.current));
    m.insert("j_N".into(), text(&iq.bond_current));
    m.insert("Delta".into(), text(&d.delta));
    m.insert(
        "Delta_j".into(),
        iq.bond_diffusion.as_ref().map(text).unwrap_or(Value::Null),
    );
    m.insert("v_p".into(), text(&iq.particle_velocity));
    m.insert(
        "Delta_p".into(),
        iq.particle_diffusion
            .as_ref()
            .map(text)
            .unwrap_or(Value::Null),
    );
    let method = match &d.method {
        Method::Resummed => json!({ "kind": "resummed" }),
        Method::Truncated { i_max, tail_bound } => {
            json!({ "kind": "truncated", "imax": i_max, "tail_bound": text(tail_bound) })
        }
        Method::FreeParticles => json!({ "kind": "free-particles" }),
    };
    m.insert("method".into(), method);
    m.insert(
        "breakdown".into(),
        d.breakdown
            .as_ref()
            .map(|b| json!({ "pJ": text(&b.pj), "S1": text(&b.s1), "S2": text(&b.s2) }))
            .unwrap_or(Value::Null),
    );
    Ok(m)
}

fn delta_for<S: Scalar>(params: &ModelParams<S>, imax: Option<usize>) -> Result<DeltaResult<S>> {
    match imax {
        Some(i) => delta_exact_truncated(params, i),
        None => delta_exact_resummed(params),
    }
}

fn cmd_exact(a: &RunArgs) -> Result<Value> {
    let n = a.single_n()?;
    let p = a.particles(n)?;
    let q = a.q_number()?;
    match a.backend_for(&q)? {
        BackendKind::Rational => {
            let Number::Exact(qr) = q else {
                unreachable!("checked by backend_for")
            };
            let params = ModelParams::new(n, p, qr)?;
            let d = delta_for(&params, a.imax)?;
            Ok(Value::Object(exact_fields(&params, &d)?))
        }
        BackendKind::Float => {
            let prec = a.precision()?;
            let d = verify_precision(prec, a.rel_tol(), |pr| {
                delta_for(&ModelParams::new(n, p, real_q(&q, pr)?)?, a.imax)
            })?;
            let params = ModelParams::new(n, p, real_q(&q, prec)?)?;
            let mut m = exact_fields(&params, &d)?;
            m.insert(
                "precision".into(),
                json!({ "bits": prec.bits(), "verified_rel_tol": a.rel_tol() }),
            );
            Ok(Value::Object(m))
        }
    }
}

fn oracle_fields<S: Scalar>(params: &ModelParams<S>, a: &RunArgs) -> Result<Value> {
    let r = oracle::oracle(params, a.cap)?;
    let mut m = Map::new();
    m.insert("N".into(), json!(params.sites()));
    m.insert("p".into(), json!(params.particles()));
    m.insert("q".into(), text(params.q().value()));
    m.insert(
        "backend".into(),
        json!(S::backend(&params.context()).to_string()),
    );
    m.insert("states".into(), json!(r.states));
    m.insert("J".into(), text(&r.current));
    m.insert("Delta".into(), text(&r.delta));
    m.insert("product_form_gap".into(), json!(r.product_form_gap));
    if a.fd {
        let gen = oracle::build_generator(params, a.cap)?;
        let (d1, d2) = oracle::lambda_fd_cumulants(&gen, 1e-4, Precision::new(128))?;
        m.insert("finite_difference".into(), json!({ "J": d1, "Delta": d2 }));
    }
    Ok(Value::Object(m))
}

fn cmd_oracle(a: &RunArgs) -> Result<Value> {
    let n = a.single_n()?;
    let p = a.particles(n)?;
    let q = a.q_number()?;
    match a.backend_for(&q)? {
        BackendKind::Rational => {
            let Number::Exact(qr) = q else {
                unreachable!("checked by backend_for")
            };
            oracle_fields(&ModelParams::new(n, p, qr)?, a)
        }
        BackendKind::Float => {
            let prec = a.precision()?;
            oracle_fields(&ModelParams::new(n, p, real_q(&q, prec)?)?, a)
        }
    }
}

fn cmd_simulate(a: &RunArgs) -> Result<Value> {
    let n = a.single_n()?;
    let p = a.particles(n)?;
    let q = a.q_number()?;
    let mut cfg = SimConfig::new(n, p, q.to_f64(), a.t_measure, a.reps, a.seed);
    if let Some(t) = a.t_burn {
        cfg.t_burn = t;
    }
    cfg.init = a.init.into();
    let est = simulator::estimate_cumulants(&cfg)?;
    let prec = Precision::new(128);
    let exact = delta_exact_resummed(&ModelParams::new(n, p, real_q(&q, prec)?)?)?;
    let (j, d) = (exact.current.to_f64(), exact.delta.to_f64());
    Ok(json!({
        "config": cfg,
        "estimate": est,
        "exact": { "J": j, "Delta": d },
        "z_scores": { "J": (est.j_hat - j) / est.se_j, "Delta": (est.delta_hat - d) / est.se_delta },
    }))
}

fn saddle_json(s: &SaddleData) -> Value {
    let (phi1, phi2) = asymptotics::phi_derivatives(s);
    json!({
        "saddle": s,
        "K": asymptotics::kpz_coefficient(s),
        "K_from_A_lambda": asymptotics::kpz_from_amplitude(s),
        "phi_form": {
            "phi1": phi1,
            "phi2": phi2,
            "value": asymptotics::kpz_coefficient_phi_form(s, phi1, phi2),
        },
    })
}

fn cmd_asymptotic(a: &RunArgs) -> Result<Value> {
    let rho = a.rho_f64()?;
    let q = a.q_number()?.to_f64();
    let s = asymptotics::saddle_data(rho, q, a.tol.unwrap_or(DEFAULT_ASYMP_TOL))?;
    let mut v = saddle_json(&s);
    if !a.n.is_empty() {
        let finite: Vec<Value> =
            a.n.iter()
                .map(|&n| {
                    json!({
                        "N": n,
                        "ln_Z": asymptotics::log_partition_asymp(n, &s),
                        "j_N": asymptotics::current_asymp(n, &s),
                    })
                })
                .collect();
        v["finite_n"] = Value::Array(finite);
    }
    Ok(v)
}

fn cmd_crossover(a: &RunArgs) -> Result<Value> {
    let rho = a.rho_f64()?;
    let alpha = a.alpha.ok_or_else(|| missing("alpha"))?;
    let c = asymptotics::crossover_prediction(rho, alpha, a.tol.unwrap_or(1e-12))?;
    Ok(serde_json::to_value(c).expect("plain data"))
}

fn tq_fields<S: Scalar>(params: &ModelParams<S>) -> Result<Value> {
    let t = tq::tq_first_order(params)?;
    let check = tq::verify_tq_first_order(&t, params)?;
    let all_zero = check.residual.iter().all(|c| c.is_zero());
    Ok(json!({
        "N": params.sites(),
        "p": params.particles(),
        "q": text(params.q().value()),
        "residual": if all_zero { "0".to_string() } else { format!("{:e}", check.max_residual) },
        "residual_coefficients": check.residual.iter().map(text).collect::<Vec<_>>(),
        "Q1_at_1": text(&check.q1_at_one),
        "lambda1": text(&check.lambda1),
        "J": text(&check.current),
        "b1": t.b1.iter().map(text).collect::<Vec<_>>(),
        "q1": t.q1.iter().map(text).collect::<Vec<_>>(),
        "t1": t.t1.iter().map(text).collect::<Vec<_>>(),
        "passed": check.passed,
    }))
}

fn cmd_verify_tq(a: &RunArgs) -> Result<Value> {
    let n = a.single_n()?;
    let p = a.particles(n)?;
    let q = a.q_number()?;
    match a.backend_for(&q)? {
        BackendKind::Rational => {
            let Number::Exact(qr) = q else {
                unreachable!("checked by backend_for")
            };
            tq_fields(&ModelParams::new(n, p, qr)?)
        }
        BackendKind::Float => tq_fields(&ModelParams::new(n, p, real_q(&q, a.precision()?)?)?),
    }
}

/// One line of a sweep table.
#[derive(Clone, Debug, PartialEq)]
pub struct SweepRow {
    pub n: usize,
    pub p: usize,
    pub q: String,
    pub current: f64,
    pub delta: f64,
    pub delta_over_n32: f64,
    pub delta_over_n: f64,
    /// `K` for a fixed `q`, `rho F(g)` under crossover scaling.
    pub prediction: f64,
    /// Relative deviation of the matching column from `prediction`.
    pub gap: f64,
}

impl SweepRow {
    fn to_json(&self) -> Value {
        json!({
            "N": self.n, "p": self.p, "q": self.q, "J": self.current, "Delta": self.delta,
            "Delta_over_N32": self.delta_over_n32, "Delta_over_N": self.delta_over_n,
            "prediction": self.prediction, "gap": self.gap,
        })
    }
}

pub fn render_csv(rows: &[SweepRow]) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{}\n",
            r.n,
            r.p,
            r.q,
            r.current,
            r.delta,
            r.delta_over_n32,
            r.delta_over_n,
            r.prediction,
            r.gap
        ));
    }
    out
}

fn sweep_row(a: &RunArgs, n: usize) -> Result<SweepRow> {
    let p = a.particles(n)?;
    let rho = p as f64 / n as f64;
    let prec = a.precision()?;
    let (q, q_text) = match (a.alpha, &a.q) {
        (Some(alpha), None) => {
            let q = asymptotics::crossover_q(alpha, n);
            (Number::Decimal(q), format!("{q}"))
        }
        (None, Some(_)) => {
            let q = a.q_number()?;
            let t = number_text(&q);
            (q, t)
        }
        _ => {
            return Err(Error::InvalidParameter(
                "sweep takes exactly one of --q, --alpha".into(),
            ))
        }
    };
    let (current, delta) = match a.backend_for(&q)? {
        BackendKind::Rational => {
            let Number::Exact(qr) = &q else {
                unreachable!("checked by backend_for")
            };
            let d = delta_for(&ModelParams::new(n, p, qr.clone())?, a.imax)?;
            (d.current.to_f64(), d.delta.to_f64())
        }
        BackendKind::Float => {
            let d = verify_precision(prec, a.rel_tol(), |pr| {
                delta_for(&ModelParams::new(n, p, real_q(&q, pr)?)?, a.imax)
            })?;
            (d.current.to_f64(), d.delta.to_f64())
        }
    };
    let nf = n as f64;
    let delta_over_n32 = delta / nf.powf(1.5);
    let delta_over_n = delta / nf;
    let (prediction, observed) = match a.alpha {
        Some(alpha) => {
            let c = asymptotics::crossover_prediction(rho, alpha, a.tol.unwrap_or(1e-12))?;
            (c.prediction, delta_over_n)
        }
        None => {
            let s = asymptotics::saddle_data(rho, q.to_f64(), DEFAULT_ASYMP_TOL)?;
            (asymptotics::kpz_coefficient(&s), delta_over_n32)
        }
    };
    let gap = if prediction == 0.0 {
        f64::NAN
    } else {
        (observed - prediction).abs() / prediction.abs()
    };
    Ok(SweepRow {
        n,
        p,
        q: q_text,
        current,
        delta,
        delta_over_n32,
        delta_over_n,
        prediction,
        gap,
    })
}

/// Rows in the order of `--n`, computed in parallel.
pub fn sweep_rows(a: &RunArgs) -> Result<Vec<SweepRow>> {
    if a.n.is_empty() {
        return Err(missing("n"));
    }
    a.n.par_iter().map(|&n| sweep_row(a, n)).collect()
}
