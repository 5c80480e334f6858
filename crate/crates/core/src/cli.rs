//! Command dispatch and reporting for the `momentkit` binary.
//!
//! Every command produces a [`RunReport`]; the exit code is 0 when it passes,
//! 1 when a verification fails and 2 for usage, parse and semantic errors.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::AlgebraError;
use crate::instance::{self, InstanceParams};
use crate::model::{self, Model, ModelError};
use crate::moment::MomentSystem;
use crate::report::Report;
use crate::tpoly::TPoly;

pub const SCHEMA: u32 = 1;
pub const DEGREE_BOUND_ENV: &str = "MOMENTKIT_DEGREE_BOUND";

pub const EXIT_OK: i32 = 0;
pub const EXIT_VERIFY_FAILED: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub schema: u32,
    pub command: String,
    pub passed: bool,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub checks: Vec<Report>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub details: BTreeMap<String, Value>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub timing_ms: Option<f64>,
}

impl RunReport {
    pub fn new(command: &str, checks: Vec<Report>) -> Self {
        RunReport {
            schema: SCHEMA,
            command: command.into(),
            passed: checks.iter().all(|c| c.passed),
            checks,
            details: BTreeMap::new(),
            timing_ms: None,
        }
    }

    pub fn detail(mut self, key: &str, value: impl Into<Value>) -> Self {
        self.details.insert(key.into(), value.into());
        self
    }

    pub fn exit_code(&self) -> i32 {
        if self.passed {
            EXIT_OK
        } else {
            EXIT_VERIFY_FAILED
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("reports serialize") + "\n"
    }

    pub fn to_text(&self) -> String {
        let mut out = format!(
            "{}: {}\n",
            self.command,
            if self.passed { "PASS" } else { "FAIL" }
        );
        for c in &self.checks {
            out += &c.to_text();
        }
        for (k, v) in &self.details {
            write_value(&mut out, k, v, 0);
        }
        if let Some(ms) = self.timing_ms {
            out += &format!("time: {ms:.3} ms\n");
        }
        out
    }
}

fn write_value(out: &mut String, key: &str, v: &Value, depth: usize) {
    let pad = "  ".repeat(depth);
    match v {
        Value::String(s) if s.contains('\n') => {
            *out += &format!("{pad}{key}:\n");
            for line in s.lines() {
                *out += &format!("{pad}  {line}\n");
            }
        }
        Value::String(s) => *out += &format!("{pad}{key}: {s}\n"),
        Value::Object(m) => {
            *out += &format!("{pad}{key}:\n");
            for (k, v) in m {
                write_value(out, k, v, depth + 1);
            }
        }
        Value::Array(items) if items.iter().all(|i| !i.is_object()) => {
            let items: Vec<String> = items
                .iter()
                .map(|i| i.as_str().map_or_else(|| i.to_string(), str::to_string))
                .collect();
            *out += &format!("{pad}{key}: [{}]\n", items.join(", "));
        }
        other => *out += &format!("{pad}{key}: {other}\n"),
    }
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Parse(String),
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
}

impl From<ModelError> for CliError {
    fn from(e: ModelError) -> Self {
        CliError::Parse(e.to_string())
    }
}

/// Settings shared by all commands.
#[derive(Clone, Debug, Default)]
pub struct Context {
    pub degree_bound: Option<i64>,
}

impl Context {
    /// Reads the Tot degree bound override from the environment.
    pub fn from_env() -> Result<Self, CliError> {
        let degree_bound = match std::env::var(DEGREE_BOUND_ENV) {
            Ok(v) => Some(v.trim().parse::<i64>().ok().filter(|b| *b >= 0).ok_or_else(|| {
                CliError::Usage(format!("{DEGREE_BOUND_ENV} must be a nonnegative integer, got `{v}`"))
            })?),
            Err(_) => None,
        };
        Ok(Context { degree_bound })
    }

    pub fn system(&self, model: &Model) -> Result<MomentSystem, CliError> {
        let ms = model.system().map_err(|e| CliError::Parse(e.to_string()))?;
        Ok(match self.degree_bound {
            Some(b) => ms.with_degree_bound(b),
            None => ms,
        })
    }
}

pub fn load_model(path: &Path) -> Result<Model, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Usage(format!("cannot read {}: {e}", path.display())))?;
    model::parse_model(&text).map_err(|e| CliError::Parse(format!("{}:{e}", path.display())))
}

fn render_map(gens: &[String], values: &[TPoly]) -> Value {
    Value::Object(
        gens.iter()
            .zip(values)
            .map(|(g, v)| (g.clone(), Value::String(v.render(gens))))
            .collect(),
    )
}

pub fn verify(model: &Model, ctx: &Context) -> Result<RunReport, CliError> {
    let ms = ctx.system(model)?;
    Ok(RunReport::new(
        "verify",
        vec![
            ms.verify_system(),
            ms.line().verify_tot_jacobi(),
            ms.verify_gm_hamiltonian(-3..=3),
        ],
    )
    .detail("order", ms.n()))
}

pub fn trivialize(model: &Model, ctx: &Context) -> Result<RunReport, CliError> {
    let ms = ctx.system(model)?;
    let system = ms.verify_system();
    if !system.passed {
        return Ok(RunReport::new("trivialize", vec![system]));
    }
    let r = ms.trivialize()?;
    Ok(RunReport::new("trivialize", vec![r.report.clone()])
        .detail("lifts", render_map(&r.gens, &r.lifts))
        .detail("alpha_vanishes", r.alpha_vanishes)
        .detail("poisson_compatible", r.poisson_compatible))
}

#[derive(Clone, Debug)]
pub enum TwistSelect {
    Named(String),
    Seed(u64),
    /// The first twist declared in the model.
    First,
}

/// Applies a gauge twist and returns the twisted system as a model.
pub fn twist(model: &Model, which: &TwistSelect, ctx: &Context) -> Result<(RunReport, Model), CliError> {
    let ms = ctx.system(model)?;
    let (label, g) = match which {
        TwistSelect::Named(name) => (
            name.clone(),
            model
                .twist(name)
                .cloned()
                .ok_or_else(|| CliError::Usage(format!("unknown twist `{name}`")))?,
        ),
        TwistSelect::Seed(seed) => (
            format!("seed {seed}"),
            instance::random_twist(&mut instance::rng_for(*seed), ms.nvars(), ms.n(), instance::MAX_DEGREE),
        ),
        TwistSelect::First => {
            let (name, g) = model
                .twists
                .first()
                .ok_or_else(|| CliError::Usage("model declares no twist; pass --seed or --name".into()))?;
            (name.clone(), g.clone())
        }
    };
    let twisted = ms.twist(&g)?;
    let out = Model::from_system(&twisted);
    let gens = model.gens.clone();
    let report = RunReport::new("twist", vec![twisted.verify_system()])
        .detail("twist", label)
        .detail("phi", render_map(&gens, &g.phi))
        .detail("unit", g.unit.render(&gens))
        .detail("model", out.render());
    Ok((report, out))
}

pub fn tot(model: &Model, left: &str, right: &str, ctx: &Context) -> Result<RunReport, CliError> {
    let ms = ctx.system(model)?;
    let gens = model.gens.clone();
    let a = model::parse_tot(left, &gens, ms.n())
        .map_err(|e| CliError::Parse(format!("--left {e}")))?;
    let b = model::parse_tot(right, &gens, ms.n())
        .map_err(|e| CliError::Parse(format!("--right {e}")))?;
    let r = ms.line().tot_bracket(&a, &b).map_err(|e| CliError::Usage(e.to_string()))?;
    Ok(RunReport::new("tot", Vec::new())
        .detail("left", a.render(&gens))
        .detail("right", b.render(&gens))
        .detail("bracket", r.render(&gens))
        .detail("order", r.order()))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Space {
    Base,
    Tot,
}

pub fn rank(model: &Model, point: &str, space: Space, ctx: &Context) -> Result<RunReport, CliError> {
    let ms = ctx.system(model)?;
    let pt = model
        .point(point)
        .ok_or_else(|| CliError::Usage(format!("unknown point `{point}`")))?;
    let r = match space {
        Space::Base => ms.structure().bivector_rank(pt),
        Space::Tot => ms.tot_rank(pt),
    }
    .map_err(|e| CliError::Usage(e.to_string()))?;
    let mut check = Report::pass("rank-even");
    if r % 2 != 0 {
        check.fail([point.to_string()], r.to_string());
    }
    Ok(RunReport::new("rank", vec![check])
        .detail("space", if space == Space::Base { "base" } else { "tot" })
        .detail("point", point)
        .detail("rank", r))
}

pub fn conformal(model: &Model, name: Option<&str>, ctx: &Context) -> Result<RunReport, CliError> {
    let ms = ctx.system(model)?;
    let decls: Vec<_> = model
        .conformal
        .iter()
        .filter(|c| name.is_none_or(|n| n == c.name))
        .collect();
    if decls.is_empty() {
        return Err(CliError::Usage(match name {
            Some(n) => format!("unknown conformal field `{n}`"),
            None => "model declares no conformal field".into(),
        }));
    }
    let system = ms.verify_system();
    if !system.passed {
        return Ok(RunReport::new("conformal", vec![system]));
    }
    let mut checks = Vec::new();
    let mut fields = serde_json::Map::new();
    for decl in decls {
        let ext = ms.extend_conformal(&decl.field, &decl.weight)?;
        let mut d = serde_json::Map::new();
        d.insert("lambda".into(), ext.lambda.to_string().into());
        if let Some(mu) = &ext.mu {
            d.insert("mu".into(), mu.to_string().into());
        }
        if let Some(w) = &ext.module_weight {
            d.insert("h".into(), serde_json::to_value(w).expect("serializable"));
        }
        d.insert("strategy".into(), ext.strategy.into());
        if let Some(f) = &ext.field {
            d.insert("field".into(), render_map(&model.gens, f.values()));
        }
        fields.insert(decl.name.clone(), Value::Object(d));
        checks.push(Report::aggregate(format!("conformal {}", decl.name), vec![ext.report]));
    }
    Ok(RunReport::new("conformal", checks).detail("fields", Value::Object(fields)))
}

/// One round-trip case: twist the trivial system on the instance's base and
/// recover the canonical lifts.
pub fn roundtrip_case(seed: u64, params: InstanceParams) -> Result<Report, AlgebraError> {
    let inst = instance::random_instance(seed, params)?;
    let base = inst.catalog.structure();
    let n = inst.model.order;
    let trivial = MomentSystem::make_trivial(&base, n)?;
    let twisted = trivial.twist(&inst.twist)?;
    let r = twisted.trivialize()?;
    let label = format!("seed {seed} ({}, n={n})", inst.catalog.name());
    let mut check = Report::pass(label.clone());
    let gens = r.gens.clone();
    for (i, l) in r.lifts.iter().enumerate() {
        let a = twisted.line().alpha_of(l)?;
        if !a.is_zero() {
            check.fail([format!("alpha {}", gens[i])], a.render(&gens));
        }
    }
    let original = base.lift(n)?;
    for i in 0..gens.len() {
        for j in (i + 1)..gens.len() {
            let lhs = twisted.structure().bracket(&r.lifts[i], &r.lifts[j])?;
            let rhs = original.entry(i, j).substitute(&r.lifts)?;
            let d = &lhs - &rhs;
            if !d.is_zero() {
                check.fail([gens[i].clone(), gens[j].clone()], d.render(&gens));
            }
        }
    }
    Ok(check)
}

pub fn roundtrip(cases: u64, seed: u64, params: InstanceParams) -> Result<RunReport, CliError> {
    params.check()?;
    let outcomes: Vec<Report> = (0..cases)
        .into_par_iter()
        .map(|c| {
            let s = seed.wrapping_add(c);
            roundtrip_case(s, params).unwrap_or_else(|e| {
                let mut r = Report::pass(format!("seed {s}"));
                r.fail(["error"], e.to_string());
                r
            })
        })
        .collect();
    let recovered = outcomes.iter().filter(|r| r.passed).count();
    let failures: Vec<Report> = outcomes.into_iter().filter(|r| !r.passed).collect();
    let mut summary = Report::aggregate("roundtrip", failures);
    summary.note(format!("{recovered}/{cases} exact recoveries"));
    summary.passed = recovered as u64 == cases;
    Ok(RunReport::new("roundtrip", vec![summary])
        .detail("cases", cases)
        .detail("seed", seed)
        .detail("recovered", recovered))
}

pub fn generate(seed: u64, params: InstanceParams, ctx: &Context) -> Result<(RunReport, Model), CliError> {
    let inst = instance::random_instance(seed, params)?;
    let ms = ctx.system(&inst.model)?;
    let report = RunReport::new("generate", vec![ms.verify_system()])
        .detail("seed", seed)
        .detail("catalog", inst.catalog.name())
        .detail("model", inst.model.render());
    Ok((report, inst.model))
}

#[derive(Parser, Debug)]
#[command(name = "momentkit", version, about = "Exact checks and trivialization for moment systems")]
pub struct Cli {
    /// Emit the report as JSON.
    #[arg(long, global = true)]
    pub json: bool,
    /// Include wall-clock timing in the report.
    #[arg(long, global = true)]
    pub timing: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Poisson axioms, cocycle condition, Tot Jacobi and the G_m grading.
    Verify { model: PathBuf },
    /// Canonical lifts with vanishing module bracket.
    Trivialize { model: PathBuf },
    /// Apply a gauge twist (declared or seeded) and report the new system.
    Twist {
        model: PathBuf,
        #[arg(long, conflicts_with = "name")]
        seed: Option<u64>,
        #[arg(long)]
        name: Option<String>,
        /// Write the twisted model here.
        #[arg(long)]
        emit: Option<PathBuf>,
    },
    /// Bracket of two total-space expressions such as `x*s^2`.
    Tot {
        model: PathBuf,
        #[arg(long, allow_hyphen_values = true)]
        left: String,
        #[arg(long, allow_hyphen_values = true)]
        right: String,
    },
    /// Rank of the bracket matrix at a named point.
    Rank {
        model: PathBuf,
        #[arg(long)]
        point: String,
        #[arg(long, value_enum, default_value = "base")]
        space: Space,
    },
    /// Extend declared conformal fields to the system.
    Conformal {
        model: PathBuf,
        #[arg(long)]
        name: Option<String>,
    },
    /// Twist-then-trivialize property suite over seeded instances.
    Roundtrip {
        #[arg(long, default_value_t = 100)]
        cases: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        bounds: Bounds,
    },
    /// Print a seeded random model.
    Generate {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        bounds: Bounds,
    },
}

#[derive(clap::Args, Debug, Clone, Copy)]
pub struct Bounds {
    #[arg(long, default_value_t = instance::MAX_GENS)]
    pub gens: usize,
    #[arg(long, default_value_t = instance::MAX_ORDER)]
    pub order: usize,
    #[arg(long, default_value_t = instance::MAX_DEGREE)]
    pub degree: u32,
}

impl From<Bounds> for InstanceParams {
    fn from(b: Bounds) -> Self {
        InstanceParams {
            max_gens: b.gens,
            max_order: b.order,
            max_degree: b.degree,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Outcome {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

impl Outcome {
    fn usage(message: impl Into<String>) -> Self {
        Outcome {
            code: EXIT_USAGE,
            stdout: String::new(),
            stderr: message.into(),
        }
    }
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I) -> Outcome
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let text = e.render().to_string();
            return match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => Outcome {
                    code: EXIT_OK,
                    stdout: text,
                    stderr: String::new(),
                },
                _ => Outcome::usage(text),
            };
        }
    };
    let ctx = match Context::from_env() {
        Ok(c) => c,
        Err(e) => return Outcome::usage(format!("error: {e}\n")),
    };
    let start = cli.timing.then(Instant::now);
    match execute(&cli.command, &ctx) {
        Ok((mut report, text_override)) => {
            if let Some(t) = start {
                report.timing_ms = Some(t.elapsed().as_secs_f64() * 1000.0);
            }
            let stdout = if cli.json {
                report.to_json()
            } else {
                text_override.unwrap_or_else(|| report.to_text())
            };
            Outcome {
                code: report.exit_code(),
                stdout,
                stderr: String::new(),
            }
        }
        Err(e) => Outcome::usage(format!("error: {e}\n")),
    }
}

fn execute(cmd: &Command, ctx: &Context) -> Result<(RunReport, Option<String>), CliError> {
    Ok(match cmd {
        Command::Verify { model } => (verify(&load_model(model)?, ctx)?, None),
        Command::Trivialize { model } => (trivialize(&load_model(model)?, ctx)?, None),
        Command::Twist { model, seed, name, emit } => {
            let which = match (seed, name) {
                (Some(s), _) => TwistSelect::Seed(*s),
                (None, Some(n)) => TwistSelect::Named(n.clone()),
                (None, None) => TwistSelect::First,
            };
            let (report, out) = twist(&load_model(model)?, &which, ctx)?;
            if let Some(path) = emit {
                std::fs::write(path, out.render())
                    .map_err(|e| CliError::Usage(format!("cannot write {}: {e}", path.display())))?;
            }
            (report, None)
        }
        Command::Tot { model, left, right } => (tot(&load_model(model)?, left, right, ctx)?, None),
        Command::Rank { model, point, space } => (rank(&load_model(model)?, point, *space, ctx)?, None),
        Command::Conformal { model, name } => (conformal(&load_model(model)?, name.as_deref(), ctx)?, None),
        Command::Roundtrip { cases, seed, bounds } => (roundtrip(*cases, *seed, (*bounds).into())?, None),
        Command::Generate { seed, bounds } => {
            let (report, m) = generate(*seed, (*bounds).into(), ctx)?;
            let text = report.passed.then(|| m.render());
            (report, text)
        }
    })
}
