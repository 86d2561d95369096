//! Batch front end. Every subcommand reads a flat `key = value` config
//! (plus `--set key=value` overrides), writes its artifacts into the output
//! directory and returns an exit code: 0 all checks pass, 1 a check failed,
//! 2 configuration or I/O error, 3 domain error.

use std::collections::{BTreeMap, BTreeSet};
use std::ffi::OsString;
use std::f64::consts::PI;
use std::fs;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::algebra::{Biquaternion, LorentzTransform};
use crate::bohr::{local_solve_rho, solve_bohr, BohrInput, BohrState, Branch};
use crate::ensemble::{
    partition_regions, scaling_sweep, tile, ChargeRule, Domain, RadiusField, TileOptions, EXPONENT_TOLERANCE,
};
use crate::error::Error;
use crate::fit::{log_space, ExponentCheck};
use crate::lattice::{
    bohr_field, build_lattices, charge_conjugate_field, convergence_order, dirac_residual, discrete_partial,
    equivalence_check, limit_sweep, photon_apply, photon_residual, renormalize_mass, transform_field,
    transform_value, ConvergenceOrder, DiracBasis, DifferenceMode, FieldKind, Frame, HypercubicLattice,
    LatticeField,
};
use crate::mspace::RoundelKind;

/// Environment variable that overrides the configured output directory.
pub const OUT_DIR_ENV: &str = "ROUNDEL_OUT_DIR";
const DEFAULT_OUT_DIR: &str = "roundel-out";

pub const EXIT_PASS: i32 = 0;
pub const EXIT_CHECK_FAILED: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_DOMAIN: i32 = 3;

#[derive(Parser, Debug)]
#[command(name = "roundel", version, about = "Roundel ensembles, Bohr states and lattice checks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone, Default)]
struct Common {
    /// Flat `key = value` configuration file.
    #[arg(long, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Override one configuration key.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory (overrides the environment and the config).
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,
    /// Multiplies every tolerance.
    #[arg(long, value_name = "X")]
    tolerance_scale: Option<f64>,
    /// Use central differences for first derivatives.
    #[arg(long)]
    central_differences: bool,
    /// Include the charge-conjugation check.
    #[arg(long)]
    conjugate_charge: bool,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Solve one circular orbit and check its identities.
    SolveBohr(Common),
    /// Tabulate the local solution over a grid of potentials.
    LocalSolve(Common),
    /// Tile a box with roundels.
    Tile(Common),
    /// Lattice residuals, convergence orders and frame equivalence.
    LatticeVerify(Common),
    /// Roundel and lattice scaling exponents.
    ScalingSweep(Common),
}

/// Failure that maps onto an exit code.
#[derive(Debug)]
enum Failure {
    Config(String),
    Domain(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Format(msg) => Failure::Config(msg),
            other => Failure::Domain(other),
        }
    }
}

type Outcome<T> = std::result::Result<T, Failure>;
type Body = fn(&mut Context) -> Outcome<Vec<Check>>;

fn config_err(msg: impl Into<String>) -> Failure {
    Failure::Config(msg.into())
}

/// Parsed `key = value` pairs with typed accessors.
#[derive(Clone, Debug, Default)]
pub struct Config {
    values: BTreeMap<String, String>,
}

impl Config {
    /// Blank lines and `#` comments are ignored; later keys replace earlier
    /// ones.
    pub fn parse(text: &str) -> std::result::Result<Self, String> {
        let mut values = BTreeMap::new();
        for (no, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| format!("line {}: expected `key = value`", no + 1))?;
            let k = k.trim();
            if k.is_empty() || k.contains(char::is_whitespace) {
                return Err(format!("line {}: bad key `{k}`", no + 1));
            }
            values.insert(k.to_string(), v.trim().to_string());
        }
        Ok(Self { values })
    }

    pub fn set(&mut self, assignment: &str) -> std::result::Result<(), String> {
        let (k, v) = assignment
            .split_once('=')
            .ok_or_else(|| format!("override `{assignment}` is not KEY=VALUE"))?;
        self.values.insert(k.trim().to_string(), v.trim().to_string());
        Ok(())
    }

    fn check_keys(&self, allowed: &[&str]) -> Outcome<()> {
        let allowed: BTreeSet<&str> = allowed.iter().copied().chain(["seed", "out"]).collect();
        for k in self.values.keys() {
            if !allowed.contains(k.as_str()) {
                return Err(config_err(format!(
                    "unknown key `{k}` (expected one of: {})",
                    allowed.iter().copied().collect::<Vec<_>>().join(", ")
                )));
            }
        }
        Ok(())
    }

    fn raw(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(String::as_str)
    }

    fn f64(&self, key: &str, default: f64) -> Outcome<f64> {
        match self.raw(key) {
            None => Ok(default),
            Some(v) => parse_f64(key, v),
        }
    }

    fn u64(&self, key: &str, default: u64) -> Outcome<u64> {
        match self.raw(key) {
            None => Ok(default),
            Some(v) => v.parse().map_err(|_| config_err(format!("`{key}`: expected an integer, got `{v}`"))),
        }
    }

    fn bool(&self, key: &str, default: bool) -> Outcome<bool> {
        match self.raw(key) {
            None => Ok(default),
            Some("true" | "1" | "yes") => Ok(true),
            Some("false" | "0" | "no") => Ok(false),
            Some(v) => Err(config_err(format!("`{key}`: expected true/false, got `{v}`"))),
        }
    }

    fn list(&self, key: &str) -> Outcome<Option<Vec<f64>>> {
        match self.raw(key) {
            None => Ok(None),
            Some(v) => v
                .split(',')
                .map(|p| parse_f64(key, p.trim()))
                .collect::<Outcome<Vec<f64>>>()
                .map(Some),
        }
    }

    fn list_or(&self, key: &str, default: &[f64]) -> Outcome<Vec<f64>> {
        Ok(self.list(key)?.unwrap_or_else(|| default.to_vec()))
    }

    fn string(&self, key: &str, default: &str) -> String {
        self.raw(key).unwrap_or(default).to_string()
    }

    /// Canonical `key=value` listing used for the config hash.
    fn canonical(&self) -> String {
        self.values.iter().map(|(k, v)| format!("{k}={v}\n")).collect()
    }
}

fn parse_f64(key: &str, v: &str) -> Outcome<f64> {
    let x: f64 = v
        .parse()
        .map_err(|_| config_err(format!("`{key}`: expected a number, got `{v}`")))?;
    if !x.is_finite() {
        return Err(config_err(format!("`{key}`: value must be finite")));
    }
    Ok(x)
}

fn positive(key: &str, x: f64) -> Outcome<f64> {
    if x > 0.0 {
        Ok(x)
    } else {
        Err(config_err(format!("`{key}` must be positive, got {x}")))
    }
}

fn count(key: &str, x: u64, min: u64) -> Outcome<usize> {
    if x >= min {
        Ok(x as usize)
    } else {
        Err(config_err(format!("`{key}` must be at least {min}, got {x}")))
    }
}

fn quantum_number(cfg: &Config) -> Outcome<u32> {
    let n = cfg.u64("n", 1)?;
    if n == 0 || n > u32::MAX as u64 {
        return Err(config_err(format!("`n` must be a positive integer, got {n}")));
    }
    Ok(n as u32)
}

fn kind(cfg: &Config) -> Outcome<RoundelKind> {
    cfg.string("kind", "pure").parse().map_err(config_err)
}

/// Geometric sequence from `<key>_min`, `<key>_max`, `<key>_count`, or an
/// explicit comma list under `<key>s` / `<key>`.
fn sequence(cfg: &Config, list_key: &str, prefix: &str, lo: f64, hi: f64, n: u64) -> Outcome<Vec<f64>> {
    if let Some(v) = cfg.list(list_key)? {
        for &x in &v {
            positive(list_key, x)?;
        }
        return Ok(v);
    }
    let lo = positive(&format!("{prefix}_min"), cfg.f64(&format!("{prefix}_min"), lo)?)?;
    let hi = positive(&format!("{prefix}_max"), cfg.f64(&format!("{prefix}_max"), hi)?)?;
    let n = count(&format!("{prefix}_count"), cfg.u64(&format!("{prefix}_count"), n)?, 1)?;
    if n == 1 {
        return Ok(vec![hi]);
    }
    if hi <= lo {
        return Err(config_err(format!("`{prefix}_max` must exceed `{prefix}_min`")));
    }
    Ok(log_space(lo, hi, n))
}

#[derive(Clone, Debug, Serialize, PartialEq)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Pass,
    Fail,
    Skipped,
}

/// One judged quantity.
#[derive(Clone, Debug, Serialize)]
pub struct Check {
    pub name: String,
    pub measured: f64,
    pub expected: f64,
    pub tolerance: f64,
    /// How `measured` is compared: `abs_le` (`|measured| ≤ tolerance`),
    /// `near` (`|measured − expected| ≤ tolerance`), `at_least`
    /// (`measured ≥ expected − tolerance`) or `flag`.
    pub rule: &'static str,
    pub status: Status,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl Check {
    fn status(pass: bool) -> Status {
        if pass {
            Status::Pass
        } else {
            Status::Fail
        }
    }

    fn at_most(name: &str, measured: f64, tolerance: f64) -> Self {
        Self {
            name: name.into(),
            measured,
            expected: 0.0,
            tolerance,
            rule: "abs_le",
            status: Self::status(measured.abs() <= tolerance),
            note: None,
        }
    }

    fn near(name: &str, measured: f64, expected: f64, tolerance: f64) -> Self {
        Self {
            name: name.into(),
            measured,
            expected,
            tolerance,
            rule: "near",
            status: Self::status((measured - expected).abs() <= tolerance),
            note: None,
        }
    }

    fn at_least(name: &str, measured: f64, expected: f64, tolerance: f64) -> Self {
        Self {
            name: name.into(),
            measured,
            expected,
            tolerance,
            rule: "at_least",
            status: Self::status(measured >= expected - tolerance),
            note: None,
        }
    }

    fn flag(name: &str, ok: bool) -> Self {
        Self {
            name: name.into(),
            measured: if ok { 1.0 } else { 0.0 },
            expected: 1.0,
            tolerance: 0.0,
            rule: "flag",
            status: Self::status(ok),
            note: None,
        }
    }

    fn exponent(prefix: &str, e: &ExponentCheck) -> Self {
        let mut c = Self::near(&format!("{prefix}{}", e.quantity), e.slope, e.expected, e.tolerance);
        if e.low_confidence {
            c.note = Some("low confidence: two points or fewer".into());
        }
        c
    }

    fn convergence(name: &str, order: &ConvergenceOrder, min: f64, tolerance: f64) -> Self {
        match order {
            ConvergenceOrder::Skipped => Self {
                name: name.into(),
                measured: f64::NAN,
                expected: min,
                tolerance,
                rule: "at_least",
                status: Status::Skipped,
                note: Some("needs at least two spacings".into()),
            },
            ConvergenceOrder::Exact { max_residual } => {
                let mut c = Self::at_least(name, f64::INFINITY, min, tolerance);
                c.note = Some(format!("exact at every spacing (max residual {max_residual:e})"));
                c
            }
            ConvergenceOrder::Measured { order, low_confidence, .. } => {
                let mut c = Self::at_least(name, *order, min, tolerance);
                if *low_confidence {
                    c.note = Some("low confidence: two points".into());
                }
                c
            }
        }
    }

    fn with_note(mut self, note: impl Into<String>) -> Self {
        self.note = Some(note.into());
        self
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Metadata {
    pub version: &'static str,
    pub command: &'static str,
    pub seed: u64,
    pub config_hash: String,
    pub tolerance_scale: f64,
    pub central_differences: bool,
    pub conjugate_charge: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct RunReport {
    pub metadata: Metadata,
    pub status: Status,
    pub checks: Vec<Check>,
}

impl RunReport {
    fn new(metadata: Metadata, checks: Vec<Check>) -> Self {
        let failed = checks.iter().any(|c| c.status == Status::Fail);
        Self {
            metadata,
            status: if failed { Status::Fail } else { Status::Pass },
            checks,
        }
    }

    fn exit_code(&self) -> i32 {
        if self.status == Status::Pass {
            EXIT_PASS
        } else {
            EXIT_CHECK_FAILED
        }
    }
}

/// Formats a number for CSV with 17 significant digits.
pub fn csv_number(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        String::new()
    }
}

struct Table {
    header: Vec<&'static str>,
    rows: Vec<Vec<String>>,
}

impl Table {
    fn new(header: &[&'static str]) -> Self {
        Self {
            header: header.to_vec(),
            rows: Vec::new(),
        }
    }

    fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    fn render(&self) -> Outcome<Vec<u8>> {
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(Vec::new());
        let io = |e: csv::Error| config_err(format!("csv: {e}"));
        w.write_record(&self.header).map_err(io)?;
        for r in &self.rows {
            w.write_record(r).map_err(io)?;
        }
        w.into_inner().map_err(|e| config_err(format!("csv: {e}")))
    }
}

/// Everything a subcommand needs.
struct Context {
    cfg: Config,
    seed: u64,
    out: PathBuf,
    scale: f64,
    central: bool,
    conjugate: bool,
    files: Vec<(String, Vec<u8>)>,
}

impl Context {
    fn tol(&self, t: f64) -> f64 {
        t * self.scale
    }

    fn mode(&self) -> DifferenceMode {
        if self.central {
            DifferenceMode::Central
        } else {
            DifferenceMode::Backward
        }
    }

    fn emit_json<T: Serialize>(&mut self, name: &str, value: &T) -> Outcome<()> {
        let mut bytes = serde_json::to_vec_pretty(value).map_err(|e| config_err(format!("json: {e}")))?;
        bytes.push(b'\n');
        self.files.push((name.into(), bytes));
        Ok(())
    }

    fn emit_csv(&mut self, name: &str, table: &Table) -> Outcome<()> {
        let bytes = table.render()?;
        self.files.push((name.into(), bytes));
        Ok(())
    }

    fn metadata(&self, command: &'static str) -> Metadata {
        let mut canon = self.cfg.canonical();
        canon.push_str(&format!(
            "#seed={}\n#tolerance_scale={:e}\n#central={}\n#conjugate={}\n",
            self.seed, self.scale, self.central, self.conjugate
        ));
        let digest = Sha256::digest(canon.as_bytes());
        let config_hash = digest.iter().map(|b| format!("{b:02x}")).collect();
        Metadata {
            version: env!("CARGO_PKG_VERSION"),
            command,
            seed: self.seed,
            config_hash,
            tolerance_scale: self.scale,
            central_differences: self.central,
            conjugate_charge: self.conjugate,
        }
    }

    fn flush(&self) -> Outcome<()> {
        fs::create_dir_all(&self.out)
            .map_err(|e| config_err(format!("cannot create {}: {e}", self.out.display())))?;
        for (name, bytes) in &self.files {
            let path = self.out.join(name);
            fs::write(&path, bytes).map_err(|e| config_err(format!("cannot write {}: {e}", path.display())))?;
        }
        Ok(())
    }
}

fn build_context(common: &Common) -> Outcome<Context> {
    let mut cfg = match &common.config {
        Some(path) => {
            let text = fs::read_to_string(path)
                .map_err(|e| config_err(format!("cannot read {}: {e}", path.display())))?;
            Config::parse(&text).map_err(config_err)?
        }
        None => Config::default(),
    };
    for s in &common.set {
        cfg.set(s).map_err(config_err)?;
    }
    let seed = match common.seed {
        Some(s) => s,
        None => cfg.u64("seed", 0)?,
    };
    let out = match (&common.out, std::env::var_os(OUT_DIR_ENV)) {
        (Some(p), _) => p.clone(),
        (None, Some(env)) if !env.is_empty() => PathBuf::from(env),
        _ => PathBuf::from(cfg.string("out", DEFAULT_OUT_DIR)),
    };
    let scale = common.tolerance_scale.unwrap_or(1.0);
    if !(scale > 0.0 && scale.is_finite()) {
        return Err(config_err(format!("--tolerance-scale must be positive, got {scale}")));
    }
    Ok(Context {
        cfg,
        seed,
        out,
        scale,
        central: common.central_differences,
        conjugate: common.conjugate_charge,
        files: Vec::new(),
    })
}

/// Runs the command line and returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { EXIT_PASS };
            let _ = e.print();
            return code;
        }
    };
    let (name, common, body): (&'static str, &Common, Body) = match &cli.command {
        Command::SolveBohr(c) => ("solve-bohr", c, cmd_solve_bohr),
        Command::LocalSolve(c) => ("local-solve", c, cmd_local_solve),
        Command::Tile(c) => ("tile", c, cmd_tile),
        Command::LatticeVerify(c) => ("lattice-verify", c, cmd_lattice_verify),
        Command::ScalingSweep(c) => ("scaling-sweep", c, cmd_scaling_sweep),
    };
    let result = build_context(common).and_then(|mut ctx| {
        let checks = body(&mut ctx)?;
        let report = RunReport::new(ctx.metadata(name), checks);
        ctx.emit_json("report.json", &report)?;
        ctx.flush()?;
        Ok(report)
    });
    match result {
        Ok(report) => {
            for c in &report.checks {
                let tag = match c.status {
                    Status::Pass => "PASS",
                    Status::Fail => "FAIL",
                    Status::Skipped => "SKIP",
                };
                println!(
                    "{tag} {} measured={:e} expected={:e} tolerance={:e} ({})",
                    c.name, c.measured, c.expected, c.tolerance, c.rule
                );
            }
            report.exit_code()
        }
        Err(Failure::Config(msg)) => {
            eprintln!("configuration error: {msg}");
            EXIT_CONFIG
        }
        Err(Failure::Domain(e)) => {
            eprintln!("error: {e}");
            EXIT_DOMAIN
        }
    }
}

const BOHR_KEYS: [&str; 5] = ["e", "f", "n", "m", "allow_repulsive"];
const ALPHA: f64 = 1.0 / 137.035_999;

fn bohr_input(cfg: &Config, e: f64, f: f64) -> Outcome<BohrInput> {
    Ok(BohrInput {
        e: cfg.f64("e", e)?,
        f: cfg.f64("f", f)?,
        n: quantum_number(cfg)?,
        m: cfg.f64("m", 1.0)?,
        allow_repulsive: cfg.bool("allow_repulsive", false)?,
    })
}

#[derive(Serialize)]
struct BohrOutput<'a> {
    state: &'a BohrState,
    lorentz_factor: f64,
    binding_energy: f64,
    period: f64,
    mass_shell_residual: f64,
    quantization_residual: f64,
    energy_identity_residual: f64,
}

fn cmd_solve_bohr(ctx: &mut Context) -> Outcome<Vec<Check>> {
    ctx.cfg.check_keys(&BOHR_KEYS)?;
    let input = bohr_input(&ctx.cfg, -1.0, ALPHA)?;
    let state = solve_bohr(&input)?;
    let out = BohrOutput {
        state: &state,
        lorentz_factor: state.lorentz_factor(),
        binding_energy: state.binding_energy(),
        period: state.period(),
        mass_shell_residual: state.mass_shell_residual(),
        quantization_residual: state.quantization_residual(),
        energy_identity_residual: state.energy_identity_residual(),
    };
    ctx.emit_json("bohr_state.json", &out)?;
    let mut energy = Check::at_most("energy_identity", out.energy_identity_residual, ctx.tol(1e-12));
    if input.coupling() > 0.0 {
        energy.status = Status::Skipped;
        energy.note = Some("the closed-form energy holds for attractive pairs only".into());
    }
    Ok(vec![
        Check::at_most("mass_shell", out.mass_shell_residual, ctx.tol(1e-12)),
        Check::at_most("quantization", out.quantization_residual, ctx.tol(1e-12)),
        energy,
    ])
}

fn cmd_local_solve(ctx: &mut Context) -> Outcome<Vec<Check>> {
    ctx.cfg.check_keys(&["e", "m", "n", "a_values", "a_max", "a_count"])?;
    let cfg = &ctx.cfg;
    let e = cfg.f64("e", -1.0)?;
    let m = cfg.f64("m", 1.0)?;
    let n = quantum_number(cfg)?;
    let grid = match cfg.list("a_values")? {
        Some(v) => v,
        None => {
            let a_max = positive("a_max", cfg.f64("a_max", 1.0)?)?;
            let k = count("a_count", cfg.u64("a_count", 10)?, 1)?;
            (-(k as i64)..=k as i64).map(|i| a_max * i as f64 / k as f64).collect()
        }
    };
    let tol = ctx.tol(1e-10);
    let mut table = Table::new(&["A", "rho", "R", "f", "residual", "branch", "degenerate", "tolerance"]);
    let mut worst: f64 = 0.0;
    let mut signs = true;
    let mut pairs = Vec::new();
    for &a in &grid {
        let r = local_solve_rho(a, e, m, n)?;
        let res = r.residual();
        worst = worst.max(res);
        signs &= r.rho == 0.0 && a == 0.0 || r.rho.signum() == a.signum();
        pairs.push((a, r.rho));
        let branch = match r.branch {
            Branch::PositiveRoot => "positive",
            Branch::NegativeRoot => "negative",
            Branch::Degenerate => "degenerate",
        };
        table.push(vec![
            csv_number(a),
            csv_number(r.rho),
            r.radius.map(csv_number).unwrap_or_default(),
            r.charge.map(csv_number).unwrap_or_default(),
            csv_number(res),
            branch.into(),
            r.is_degenerate().to_string(),
            csv_number(tol),
        ]);
    }
    pairs.sort_by(|x, y| x.0.total_cmp(&y.0));
    let monotone = pairs.windows(2).all(|w| w[0].0 == w[1].0 || w[1].1 > w[0].1);
    ctx.emit_csv("local_solve.csv", &table)?;
    Ok(vec![
        Check::at_most("max_residual", worst, tol),
        Check::flag("sign_rho_equals_sign_a", signs),
        Check::flag("rho_monotone_in_a", monotone),
    ])
}

#[derive(Serialize)]
struct TileOutput<'a> {
    summary: crate::ensemble::EnsembleSummary,
    roundels: &'a [crate::ensemble::Roundel],
    regions: &'a [crate::ensemble::Region],
}

fn cmd_tile(ctx: &mut Context) -> Outcome<Vec<Check>> {
    ctx.cfg.check_keys(&[
        "kind",
        "radius",
        "radius_slope",
        "domain_min",
        "domain_max",
        "c",
        "charge",
        "boundary_samples",
        "regions_per_axis",
        "coverage_resolution",
        "max_depth",
        "max_radius_ratio",
    ])?;
    let cfg = &ctx.cfg;
    let kind = kind(cfg)?;
    let three = |key: &str, default: [f64; 3]| -> Outcome<[f64; 3]> {
        match cfg.list(key)? {
            None => Ok(default),
            Some(v) if v.len() == 3 => Ok([v[0], v[1], v[2]]),
            Some(_) => Err(config_err(format!("`{key}` needs three numbers"))),
        }
    };
    let default_max = match kind {
        RoundelKind::Pure => [1.0, 1.0, 0.0],
        RoundelKind::Superposition => [1.0, 1.0, 1.0],
    };
    let domain = Domain::new(three("domain_min", [0.0; 3])?, three("domain_max", default_max)?);
    let r0 = positive("radius", cfg.f64("radius", 0.25)?)?;
    let slope = cfg.f64("radius_slope", 0.0)?;
    let field = if slope == 0.0 {
        RadiusField::Uniform(r0)
    } else {
        let x0 = domain.min[0];
        RadiusField::variable(move |p| r0 + slope * (p[0] - x0))
    };
    let mut opts = TileOptions::for_kind(kind);
    opts.c = cfg.f64("c", opts.c)?;
    opts.charge = ChargeRule::Uniform(cfg.f64("charge", 1.0)?);
    opts.seed = ctx.seed;
    opts.boundary_samples = count("boundary_samples", cfg.u64("boundary_samples", 8)?, 0)?;
    opts.coverage_resolution = count("coverage_resolution", cfg.u64("coverage_resolution", 33)?, 2)?;
    opts.max_depth = count("max_depth", cfg.u64("max_depth", 8)?, 0)? as u32;
    opts.max_radius_ratio = positive("max_radius_ratio", cfg.f64("max_radius_ratio", opts.max_radius_ratio)?)?;
    let per_axis = count("regions_per_axis", cfg.u64("regions_per_axis", 1)?, 1)?;

    let ens = partition_regions(&tile(domain, &field, kind, &opts)?, per_axis);
    let summary = ens.summary(opts.coverage_resolution);
    let mut table = Table::new(&["x1", "x2", "x3", "owner", "region"]);
    for b in &ens.boundary {
        table.push(vec![
            csv_number(b.point[0]),
            csv_number(b.point[1]),
            csv_number(b.point[2]),
            b.owner.to_string(),
            b.region.to_string(),
        ]);
    }
    let checks = vec![
        Check::at_least("min_pair_gap", summary.min_pair_gap, 0.0, ctx.tol(crate::ensemble::OVERLAP_TOL)),
        Check::at_most("coverage_ratio_excess", (summary.coverage_max_ratio - summary.c).max(0.0), ctx.tol(1e-12))
            .with_note(format!("max ratio {:e} against c = {:e}", summary.coverage_max_ratio, summary.c)),
        Check::flag("every_region_non_empty", ens.regions.iter().all(|r| !r.roundels.is_empty())),
    ];
    ctx.emit_json(
        "ensemble.json",
        &TileOutput {
            summary,
            roundels: &ens.roundels,
            regions: &ens.regions,
        },
    )?;
    ctx.emit_csv("boundary.csv", &table)?;
    Ok(checks)
}

fn extent4(cfg: &Config, key: &str, default: [usize; 4]) -> Outcome<[usize; 4]> {
    match cfg.list(key)? {
        None => Ok(default),
        Some(v) if v.len() == 4 && v.iter().all(|x| x.fract() == 0.0 && *x >= 3.0) => {
            Ok([v[0] as usize, v[1] as usize, v[2] as usize, v[3] as usize])
        }
        Some(_) => Err(config_err(format!("`{key}` needs four integers >= 3"))),
    }
}

fn scalar_field(l: HypercubicLattice, f: impl Fn([f64; 4]) -> f64) -> Outcome<LatticeField<Biquaternion>> {
    Ok(LatticeField::from_fn(l, |_, x| Biquaternion::real(f(x), 0.0, 0.0, 0.0))?)
}

/// Smooth multi-component potential used by the frame checks.
fn probe_potential(x: [f64; 4]) -> Biquaternion {
    Biquaternion::from_four_vector([
        (0.7 * x[0]).cos() * (1.3 * x[1]).sin() + 0.2,
        (0.9 * x[2]).sin() * 0.5,
        x[0] * x[3] - 0.3 * x[1] * x[1],
        (0.4 * x[1] + 0.6 * x[3]).cos(),
    ])
}

fn cmd_lattice_verify(ctx: &mut Context) -> Outcome<Vec<Check>> {
    ctx.cfg.check_keys(&[
        "e",
        "f",
        "n",
        "m",
        "spacings",
        "extent",
        "photon_extent",
        "a",
        "radius",
        "angle",
        "rapidity",
    ])?;
    let cfg = ctx.cfg.clone();
    let mode = ctx.mode();
    let spacings = cfg.list_or("spacings", &[0.1, 0.05, 0.025, 0.0125, 0.00625])?;
    for &h in &spacings {
        positive("spacings", h)?;
    }
    let extent = extent4(&cfg, "extent", [32, 32, 3, 3])?;
    let photon_extent = extent4(&cfg, "photon_extent", [12, 12, 12, 3])?;
    let input = bohr_input(&cfg, -1.0, 0.5)?;
    let state = solve_bohr(&input)?;
    let mass = Biquaternion::scalar(state.mass_tilde());
    let basis = DiracBasis::standard();
    let order_tol = ctx.tol(EXPONENT_TOLERANCE);
    let mut checks = Vec::new();

    // closed-form orbit solution on the M-space lattice
    let mut dirac = Table::new(&["spacing", "residual", "conjugate_residual"]);
    let mut residuals = Vec::new();
    let mut conj_gap: f64 = 0.0;
    for &h in &spacings {
        let l = HypercubicLattice::new(h, extent, [0.0; 4], Frame::Snapshot)?;
        let (phi, a) = bohr_field(&state, l)?;
        let r = dirac_residual(&phi, &a, input.e, mass, &basis, mode)?;
        let rc = if ctx.conjugate {
            let c = dirac_residual(&charge_conjugate_field(&phi), &a, -input.e, mass, &basis, mode)?;
            conj_gap = conj_gap.max((c - r).abs());
            csv_number(c)
        } else {
            String::new()
        };
        residuals.push(r);
        dirac.push(vec![csv_number(h), csv_number(r), rc]);
    }
    let min_order = if ctx.central { 2.0 } else { 1.0 };
    let order = convergence_order(&spacings, &residuals, 1e-13)?;
    checks.push(Check::convergence("dirac_convergence_order", &order, min_order, order_tol));
    if ctx.conjugate {
        checks.push(Check::at_most("charge_conjugation_invariance", conj_gap, ctx.tol(1e-12)));
    }

    // uniform sphere: A = (4π/3) ρ r² along the radial axis, source (8π/3) ρ
    let rho = 3.0 * state.potential.abs() / (4.0 * PI * state.radius * state.radius);
    let source = 8.0 * PI * rho / 3.0;
    let mut photon = Table::new(&["spacing", "sphere_residual", "smooth_residual"]);
    let mut sphere = Vec::new();
    let mut smooth = Vec::new();
    let (k0, k1, k2) = (0.8, 1.1, 0.6);
    for &h in &spacings {
        let l = HypercubicLattice::new(h, [3, 3, extent[1].max(3), 3], [0.0; 4], Frame::Snapshot)?;
        let a = scalar_field(l, |x| 4.0 * PI * rho * x[2] * x[2] / 3.0)?;
        let j = scalar_field(l, |_| source)?;
        let r = photon_residual(&a, &j, &basis)?.versatile / source;
        sphere.push(r);
        let l = HypercubicLattice::new(h, photon_extent, [0.0; 4], Frame::Snapshot)?;
        let wave = |x: [f64; 4]| (k0 * x[0]).cos() * (k1 * x[1]).sin() * (k2 * x[2]).cos();
        let a = scalar_field(l, wave)?;
        let j = scalar_field(l, |x| (k0 * k0 - k1 * k1 - k2 * k2) * wave(x))?;
        let s = photon_residual(&a, &j, &basis)?.versatile;
        smooth.push(s);
        photon.push(vec![csv_number(h), csv_number(r), csv_number(s)]);
    }
    let worst_sphere = sphere.iter().cloned().fold(0.0, f64::max);
    checks.push(
        Check::at_most("photon_sphere_source", worst_sphere, ctx.tol(1e-10))
            .with_note(format!("relative to the source 8π/3 ρ = {source:e}")),
    );
    checks.push(Check::convergence(
        "photon_sphere_order",
        &convergence_order(&spacings, &sphere, ctx.tol(1e-10))?,
        1.0,
        order_tol,
    ));
    checks.push(Check::convergence(
        "photon_smooth_order",
        &convergence_order(&spacings, &smooth, 1e-13)?,
        2.0,
        order_tol,
    ));

    // frame equivalence
    let a_sp = positive("a", cfg.f64("a", 0.05)?)?;
    let r_k = positive("radius", cfg.f64("radius", 0.1)?)?;
    let angle = cfg.f64("angle", PI / 2.0)?;
    let rapidity = cfg.f64("rapidity", 1.0)?;
    let frames = [
        ("identity", LorentzTransform::identity()),
        ("rotation", LorentzTransform::rotation([0.0, 0.0, 1.0], angle)),
        ("boost", LorentzTransform::boost([1.0, 0.0, 0.0], rapidity)),
    ];
    for (label, z) in frames {
        let (_, lk, binding) = build_lattices(a_sp, r_k, [5; 4], z)?;
        checks.push(Check::flag(&format!("binding_{label}_neighbors_in_region"), binding.neighbors_in_region()));
        let a_k = LatticeField::from_fn(lk, |_, x| probe_potential(x))?;
        let mut j_k = LatticeField::constant(lk, Biquaternion::ZERO)?;
        for s in lk.interior_sites() {
            j_k.set(&s, photon_apply(&a_k, &s, &basis)?);
        }
        let rep = equivalence_check(&binding, &a_k, &j_k)?;
        checks.push(Check::at_most(&format!("equivalence_{label}"), rep.covariance_residual, ctx.tol(1e-10)));
        checks.push(Check::at_most(
            &format!("snapshot_residual_{label}"),
            rep.snapshot_residual / rep.scale,
            ctx.tol(1e-10),
        ));
        let a_p = transform_field(FieldKind::Potential, &a_k, &binding)?;
        let mut worst: f64 = 0.0;
        for s in lk.interior_sites() {
            for mu in 0..4 {
                let d = discrete_partial(&a_k, &s, mu, mode)?;
                let lhs = transform_value(FieldKind::Derivative, &d, &binding);
                let rhs = discrete_partial(&a_p, &s, mu, mode)?;
                worst = worst.max(lhs.max_abs_diff(&rhs) / lhs.norm().max(1.0));
            }
        }
        checks.push(Check::at_most(&format!("derivative_covariance_{label}"), worst, ctx.tol(1e-10)));
    }

    let m = renormalize_mass(mass, a_sp, r_k)?;
    let want = mass * (a_sp / r_k);
    checks.push(Check::at_most(
        "mass_renormalization",
        m.local.max_abs_diff(&want) / want.norm(),
        ctx.tol(1e-14),
    ));

    ctx.emit_csv("dirac_convergence.csv", &dirac)?;
    ctx.emit_csv("photon_convergence.csv", &photon)?;
    Ok(checks)
}

#[derive(Serialize)]
struct SweepOutput<'a> {
    roundel: &'a [ExponentCheck],
    roundel_decades: f64,
    lattice: Vec<LatticeExponents<'a>>,
}

#[derive(Serialize)]
struct LatticeExponents<'a> {
    p: f64,
    decades: f64,
    cube_sphere_factor: f64,
    exponents: &'a [ExponentCheck],
}

fn cmd_scaling_sweep(ctx: &mut Context) -> Outcome<Vec<Check>> {
    let mut keys = BOHR_KEYS.to_vec();
    keys.extend([
        "kind", "radii", "r_min", "r_max", "r_count", "side", "p", "spacings", "a_min", "a_max", "a_count",
        "current", "lattice_side",
    ]);
    ctx.cfg.check_keys(&keys)?;
    let cfg = ctx.cfg.clone();
    let template = bohr_input(&cfg, -1.0, ALPHA)?;
    let kind = kind(&cfg)?;
    let radii = sequence(&cfg, "radii", "r", 1e-3, 1e-1, 9)?;
    let side = positive("side", cfg.f64("side", 10.0)?)?;
    let ps = cfg.list_or("p", &[1.0])?;
    let spacings = sequence(&cfg, "spacings", "a", 1e-3, 1e-1, 9)?;
    let current = positive("current", cfg.f64("current", 1.0)?)?;
    let lattice_side = positive("lattice_side", cfg.f64("lattice_side", 1.0)?)?;
    let tol = ctx.tol(EXPONENT_TOLERANCE);
    if radii.len() < 2 || spacings.len() < 2 {
        return Err(config_err("a sweep needs at least two points"));
    }

    let mut roundel = scaling_sweep(&template, &radii, side, kind)?;
    for e in &mut roundel.exponents {
        e.tolerance = tol;
        e.pass = e.deviation.abs() <= tol;
    }
    let mut rt = Table::new(&["R", "m_bare", "e_bare", "e_bare_partner", "f", "A", "rho", "nl", "closure"]);
    for r in &roundel.rows {
        rt.push(vec![
            csv_number(r.radius),
            csv_number(r.m_bare),
            csv_number(r.e_bare),
            csv_number(r.e_bare_partner),
            csv_number(r.f),
            csv_number(r.potential),
            csv_number(r.rho),
            r.nl.to_string(),
            csv_number(r.closure),
        ]);
    }
    let mut checks: Vec<Check> = roundel.exponents.iter().map(|e| Check::exponent("roundel_slope_", e)).collect();
    let worst_closure = roundel.rows.iter().map(|r| r.closure).fold(0.0, f64::max);
    checks.push(Check::at_most("roundel_orbit_closure", worst_closure, ctx.tol(1e-10)));

    let mut lt = Table::new(&["p", "a", "R_k", "J", "A", "f_k", "nl", "e_ba", "e_b", "coupling", "M"]);
    let mut sweeps = Vec::new();
    for &p in &ps {
        positive("p", p)?;
        let s = limit_sweep(p, &spacings, template.n, current, lattice_side, tol)?;
        for r in &s.rows {
            lt.push(vec![
                csv_number(p),
                csv_number(r.a),
                csv_number(r.radius),
                csv_number(r.current),
                csv_number(r.potential),
                csv_number(r.f_k),
                r.nl.to_string(),
                csv_number(r.e_ba),
                csv_number(r.e_b),
                csv_number(r.coupling),
                csv_number(r.mass),
            ]);
        }
        for e in &s.exponents {
            checks.push(Check::exponent(&format!("lattice_p{p}_slope_"), e));
        }
        sweeps.push(s);
    }
    let out = SweepOutput {
        roundel: &roundel.exponents,
        roundel_decades: roundel.decades,
        lattice: sweeps
            .iter()
            .map(|s| LatticeExponents {
                p: s.p,
                decades: s.decades,
                cube_sphere_factor: s.cube_sphere_factor,
                exponents: &s.exponents,
            })
            .collect(),
    };
    ctx.emit_json("exponents.json", &out)?;
    ctx.emit_csv("roundel_sweep.csv", &rt)?;
    ctx.emit_csv("limit_sweep.csv", &lt)?;
    Ok(checks)
}
