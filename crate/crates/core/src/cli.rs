//! Command-line front end.
//!
//! Flags may also come from a plain `key=value` file given with `--config`;
//! keys are the long flag names without dashes, and flags on the command
//! line win. Exit codes: 0 success, 2 usage, 3 domain, 4 internal
//! consistency.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::airy::airy_all;
use crate::error::{Error, Result};
use crate::fluxes::{jump_residuals, transferred_fluxes, TransferredFluxes};
use crate::noise::{noise_budget, quantum_force_psd, NoiseBudget, ResonatorSpec, NOMINAL_CURRENT};
use crate::oracle::transmission_converged;
use crate::scattering::{solve, BarrierFamily, BarrierSpec, ScatteringSolution};
use crate::uncertainty::{dt_dl, uncertainty_product, DtDlMethod, UncertaintyResult};
use crate::units::{Energy, Length};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_DOMAIN: i32 = 3;
pub const EXIT_CONSISTENCY: i32 = 4;

/// Default barrier height, eV.
pub const DEFAULT_V0_EV: f64 = 5.0;
/// Default electron energy, eV.
pub const DEFAULT_E_EV: f64 = 1.0;
/// Default gap, nm. A documented choice; override with `--gap`.
pub const DEFAULT_GAP_NM: f64 = 1.0;

#[derive(Debug, Parser)]
#[command(
    name = "tunnel-noise",
    version,
    about = "Tunnelling transducer uncertainty and noise budgets"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Sweep bias, gap or energy and tabulate the requested outputs.
    Sweep(Flags),
    /// Noise budget and feasibility verdict for one operating point.
    Feasibility(Flags),
    /// Full dump of a single solved barrier.
    Solve(Flags),
    /// Run the built-in invariant checks.
    Selftest(Flags),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum BarrierArg {
    Sym,
    Asym,
    Field,
}

impl From<BarrierArg> for BarrierFamily {
    fn from(b: BarrierArg) -> Self {
        match b {
            BarrierArg::Sym => BarrierFamily::SymmetricRect,
            BarrierArg::Asym => BarrierFamily::AsymmetricRect,
            BarrierArg::Field => BarrierFamily::LinearField,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
pub enum SweepVariable {
    #[value(name = "phi")]
    #[serde(rename = "phi")]
    Phi,
    #[value(name = "gap")]
    #[serde(rename = "gap")]
    Gap,
    #[value(name = "E")]
    #[serde(rename = "E")]
    Energy,
}

impl SweepVariable {
    pub fn column(self) -> &'static str {
        match self {
            SweepVariable::Phi => "phi",
            SweepVariable::Gap => "gap",
            SweepVariable::Energy => "E",
        }
    }

    pub fn unit(self) -> &'static str {
        match self {
            SweepVariable::Gap => "nm",
            _ => "eV",
        }
    }
}

/// Output columns.
#[derive(
    Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize, ValueEnum,
)]
pub enum Output {
    #[value(name = "T")]
    #[serde(rename = "T")]
    Transmission,
    #[value(name = "R")]
    #[serde(rename = "R")]
    Reflection,
    #[value(name = "delta_l")]
    #[serde(rename = "delta_l")]
    DeltaL,
    #[value(name = "delta_p")]
    #[serde(rename = "delta_p")]
    DeltaP,
    #[value(name = "product")]
    #[serde(rename = "product")]
    Product,
    #[value(name = "s_fq")]
    #[serde(rename = "s_fq")]
    SFq,
}

impl Output {
    pub const DEFAULT: [Output; 5] = [
        Output::Transmission,
        Output::Reflection,
        Output::DeltaL,
        Output::DeltaP,
        Output::Product,
    ];

    pub fn column(self) -> &'static str {
        match self {
            Output::Transmission => "T",
            Output::Reflection => "R",
            Output::DeltaL => "delta_l",
            Output::DeltaP => "delta_p",
            Output::Product => "product",
            Output::SFq => "s_fq",
        }
    }

    pub fn unit(self) -> &'static str {
        match self {
            Output::Transmission | Output::Reflection => "1",
            Output::DeltaL => "nm",
            Output::DeltaP => "kg*m/s",
            Output::Product => "hbar",
            Output::SFq => "N^2/Hz",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    Csv,
    Json,
}

/// Every flag is optional so that config-file values can fill the gaps.
#[derive(Debug, Clone, Default, Args)]
pub struct Flags {
    /// key=value file; command-line flags override its entries.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub barrier: Option<BarrierArg>,
    /// Barrier height (eV).
    #[arg(long = "V0")]
    pub v0: Option<f64>,
    /// Electron energy (eV).
    #[arg(long = "E")]
    pub energy: Option<f64>,
    /// Work-function offset or bias drop (eV).
    #[arg(long)]
    pub phi: Option<f64>,
    /// Gap (nm).
    #[arg(long)]
    pub gap: Option<f64>,
    #[arg(long, value_enum)]
    pub sweep: Option<SweepVariable>,
    #[arg(long, allow_negative_numbers = true)]
    pub min: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub max: Option<f64>,
    #[arg(long)]
    pub steps: Option<usize>,
    /// Electron count.
    #[arg(long = "N")]
    pub n: Option<f64>,
    /// Tunnel current (A).
    #[arg(long = "I0")]
    pub i0: Option<f64>,
    /// Resonator mass (kg).
    #[arg(long)]
    pub mass: Option<f64>,
    /// Resonator temperature (K).
    #[arg(long)]
    pub temp: Option<f64>,
    /// Resonator frequency (Hz).
    #[arg(long)]
    pub f0: Option<f64>,
    /// Mechanical quality factor.
    #[arg(long = "Q")]
    pub q: Option<f64>,
    /// Output file; standard output when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// Comma-separated output columns.
    #[arg(long, value_enum, value_delimiter = ',')]
    pub outputs: Option<Vec<Output>>,
}

fn usage(msg: impl Into<String>) -> Error {
    Error::Input(msg.into())
}

fn parse_value<T: ValueEnum>(key: &str, v: &str) -> Result<T> {
    T::from_str(v, false)
        .map_err(|_| usage(format!("config key `{key}`: unrecognised value `{v}`")))
}

fn parse_number<T: std::str::FromStr>(key: &str, v: &str) -> Result<T> {
    v.parse()
        .map_err(|_| usage(format!("config key `{key}`: `{v}` is not a number")))
}

/// Parse a `key=value` configuration text. Blank lines and `#` comments are
/// ignored.
pub fn parse_config(text: &str) -> Result<Flags> {
    let mut f = Flags::default();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| usage(format!("config line {}: expected key=value", lineno + 1)))?;
        let (key, value) = (key.trim(), value.trim());
        match key {
            "barrier" => f.barrier = Some(parse_value(key, value)?),
            "V0" => f.v0 = Some(parse_number(key, value)?),
            "E" => f.energy = Some(parse_number(key, value)?),
            "phi" => f.phi = Some(parse_number(key, value)?),
            "gap" => f.gap = Some(parse_number(key, value)?),
            "sweep" => f.sweep = Some(parse_value(key, value)?),
            "min" => f.min = Some(parse_number(key, value)?),
            "max" => f.max = Some(parse_number(key, value)?),
            "steps" => f.steps = Some(parse_number(key, value)?),
            "N" => f.n = Some(parse_number(key, value)?),
            "I0" => f.i0 = Some(parse_number(key, value)?),
            "mass" => f.mass = Some(parse_number(key, value)?),
            "temp" => f.temp = Some(parse_number(key, value)?),
            "f0" => f.f0 = Some(parse_number(key, value)?),
            "Q" => f.q = Some(parse_number(key, value)?),
            "out" => f.out = Some(PathBuf::from(value)),
            "format" => f.format = Some(parse_value(key, value)?),
            "outputs" => {
                f.outputs = Some(
                    value
                        .split(',')
                        .map(|v| parse_value(key, v.trim()))
                        .collect::<Result<Vec<_>>>()?,
                )
            }
            other => {
                return Err(usage(format!(
                    "config line {}: unknown key `{other}`",
                    lineno + 1
                )))
            }
        }
    }
    Ok(f)
}

impl Flags {
    /// Fill unset fields from `base`.
    pub fn or(self, base: Flags) -> Flags {
        Flags {
            config: self.config.or(base.config),
            barrier: self.barrier.or(base.barrier),
            v0: self.v0.or(base.v0),
            energy: self.energy.or(base.energy),
            phi: self.phi.or(base.phi),
            gap: self.gap.or(base.gap),
            sweep: self.sweep.or(base.sweep),
            min: self.min.or(base.min),
            max: self.max.or(base.max),
            steps: self.steps.or(base.steps),
            n: self.n.or(base.n),
            i0: self.i0.or(base.i0),
            mass: self.mass.or(base.mass),
            temp: self.temp.or(base.temp),
            f0: self.f0.or(base.f0),
            q: self.q.or(base.q),
            out: self.out.or(base.out),
            format: self.format.or(base.format),
            outputs: self.outputs.or(base.outputs),
        }
    }

    /// Merge with the config file named by `--config`, if any.
    pub fn resolve(self) -> Result<Flags> {
        match &self.config {
            None => Ok(self),
            Some(path) => {
                let text = std::fs::read_to_string(path)
                    .map_err(|e| usage(format!("cannot read config {}: {e}", path.display())))?;
                Ok(self.or(parse_config(&text)?))
            }
        }
    }
}

/// Fixed parameters of one operating point, in user units.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PointConfig {
    pub barrier: BarrierArg,
    pub v0_ev: f64,
    pub energy_ev: f64,
    pub phi_ev: f64,
    pub gap_nm: f64,
    pub n_electrons: f64,
    pub tunnel_current: f64,
    pub resonator: ResonatorSpec,
}

impl PointConfig {
    pub fn from_flags(f: &Flags) -> Result<Self> {
        let barrier = f.barrier.unwrap_or(BarrierArg::Field);
        let phi = f.phi.unwrap_or(0.0);
        if barrier == BarrierArg::Sym && phi != 0.0 {
            return Err(usage("--phi is not used by the symmetric barrier"));
        }
        let nominal = ResonatorSpec::NOMINAL;
        let cfg = PointConfig {
            barrier,
            v0_ev: f.v0.unwrap_or(DEFAULT_V0_EV),
            energy_ev: f.energy.unwrap_or(DEFAULT_E_EV),
            phi_ev: phi,
            gap_nm: f.gap.unwrap_or(DEFAULT_GAP_NM),
            n_electrons: f.n.unwrap_or(1.0),
            tunnel_current: f.i0.unwrap_or(NOMINAL_CURRENT),
            resonator: ResonatorSpec {
                mass: f.mass.unwrap_or(nominal.mass),
                f0: f.f0.unwrap_or(nominal.f0),
                quality: f.q.unwrap_or(nominal.quality),
                temperature: f.temp.unwrap_or(nominal.temperature),
            },
        };
        cfg.check()?;
        Ok(cfg)
    }

    fn check(&self) -> Result<()> {
        let positive = |name: &str, v: f64| {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(usage(format!(
                    "--{name} must be positive and finite, got {v}"
                )))
            }
        };
        positive("V0", self.v0_ev)?;
        positive("E", self.energy_ev)?;
        positive("gap", self.gap_nm)?;
        positive("I0", self.tunnel_current)?;
        if !(self.phi_ev.is_finite() && self.phi_ev >= 0.0) {
            return Err(usage(format!(
                "--phi must be non-negative, got {}",
                self.phi_ev
            )));
        }
        if !(self.n_electrons.is_finite() && self.n_electrons >= 1.0) {
            return Err(usage(format!(
                "--N must be at least 1, got {}",
                self.n_electrons
            )));
        }
        if self.energy_ev >= self.v0_ev {
            return Err(usage(format!(
                "--E ({} eV) must lie below --V0 ({} eV)",
                self.energy_ev, self.v0_ev
            )));
        }
        self.resonator.validate().map_err(|e| usage(e.to_string()))
    }

    pub fn spec(&self) -> BarrierSpec {
        let (v0, phi, gap) = (
            Energy::from_ev(self.v0_ev),
            Energy::from_ev(self.phi_ev),
            Length::from_nm(self.gap_nm),
        );
        match self.barrier {
            BarrierArg::Sym => BarrierSpec::symmetric(v0, gap),
            BarrierArg::Asym => BarrierSpec::asymmetric(v0, phi, gap),
            BarrierArg::Field => BarrierSpec::linear_field(v0, phi, gap),
        }
    }

    pub fn energy(&self) -> Energy {
        Energy::from_ev(self.energy_ev)
    }

    fn with(mut self, var: SweepVariable, value: f64) -> Self {
        match var {
            SweepVariable::Phi => self.phi_ev = value,
            SweepVariable::Gap => self.gap_nm = value,
            SweepVariable::Energy => self.energy_ev = value,
        }
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepConfig {
    pub point: PointConfig,
    pub variable: SweepVariable,
    pub min: f64,
    pub max: f64,
    pub steps: usize,
    pub outputs: Vec<Output>,
    pub format: Format,
    pub out: Option<PathBuf>,
}

impl SweepConfig {
    /// Defaults reproduce the bias sweep: field barrier, φ from 0 to 5 eV.
    pub fn from_flags(f: &Flags) -> Result<Self> {
        let variable = f.sweep.unwrap_or(SweepVariable::Phi);
        let point = PointConfig::from_flags(f)?;
        let (dmin, dmax) = match variable {
            SweepVariable::Phi => (0.0, 5.0),
            SweepVariable::Gap => (0.1, 2.0),
            SweepVariable::Energy => (0.05 * point.v0_ev, 0.95 * point.v0_ev),
        };
        let mut outputs = f
            .outputs
            .clone()
            .unwrap_or_else(|| Output::DEFAULT.to_vec());
        let mut seen = std::collections::HashSet::new();
        outputs.retain(|o| seen.insert(*o));
        let cfg = SweepConfig {
            point,
            variable,
            min: f.min.unwrap_or(dmin),
            max: f.max.unwrap_or(dmax),
            steps: f.steps.unwrap_or(101),
            outputs,
            format: f.format.unwrap_or(Format::Csv),
            out: f.out.clone(),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.steps < 2 {
            return Err(usage(format!(
                "--steps must be at least 2, got {}",
                self.steps
            )));
        }
        if !(self.min.is_finite() && self.max.is_finite() && self.min < self.max) {
            return Err(usage(format!(
                "--min ({}) must be below --max ({})",
                self.min, self.max
            )));
        }
        if self.outputs.is_empty() {
            return Err(usage("--outputs must name at least one column"));
        }
        match self.variable {
            SweepVariable::Phi if self.point.barrier == BarrierArg::Sym => {
                Err(usage("--sweep phi needs --barrier asym or field"))
            }
            SweepVariable::Phi if self.min < 0.0 => {
                Err(usage("--min must be non-negative for a phi sweep"))
            }
            SweepVariable::Gap if self.min <= 0.0 => {
                Err(usage("--min must be positive for a gap sweep"))
            }
            SweepVariable::Energy if self.min <= 0.0 || self.max >= self.point.v0_ev => {
                Err(usage(format!(
                    "an energy sweep must stay inside (0, V0 = {} eV)",
                    self.point.v0_ev
                )))
            }
            _ => Ok(()),
        }
    }

    pub fn grid(&self) -> Vec<f64> {
        let n = self.steps - 1;
        (0..=n)
            .map(|i| {
                if i == n {
                    self.max
                } else {
                    self.min + (self.max - self.min) * i as f64 / n as f64
                }
            })
            .collect()
    }
}

/// One evaluated grid point: the sweep value plus requested columns, in the
/// order of `SweepConfig::outputs`.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub value: f64,
    pub columns: Vec<f64>,
    delta_p: f64,
    product: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSummary {
    pub rows: usize,
    pub skipped: usize,
    /// Present for bias sweeps only.
    pub delta_p_nondecreasing: Option<bool>,
    pub product_nondecreasing: Option<bool>,
    /// Product at φ = 0 for bias sweeps, in units of ħ.
    pub zero_bias_product: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepTable {
    pub config: SweepConfig,
    pub rows: Vec<SweepRow>,
    pub summary: SweepSummary,
}

fn evaluate(cfg: &SweepConfig, value: f64) -> Result<SweepRow> {
    let point = cfg.point.with(cfg.variable, value);
    let (energy, spec) = (point.energy(), point.spec());
    let u = uncertainty_product(energy, &spec, point.n_electrons)?;
    let mut columns = Vec::with_capacity(cfg.outputs.len());
    for o in &cfg.outputs {
        columns.push(match o {
            Output::Transmission => u.transmission,
            Output::Reflection => u.reflection,
            Output::DeltaL => u.delta_l.nm(),
            Output::DeltaP => u.delta_p,
            Output::Product => u.product_over_hbar,
            Output::SFq => quantum_force_psd(point.tunnel_current, energy, &spec)?,
        });
    }
    if columns.iter().any(|c| !c.is_finite()) {
        return Err(Error::Range {
            reason: format!("non-finite output at {} = {value}", cfg.variable.column()),
            scale: value,
        });
    }
    Ok(SweepRow {
        value,
        columns,
        delta_p: u.delta_p,
        product: u.product_over_hbar,
    })
}

fn nondecreasing(v: impl Iterator<Item = f64>) -> bool {
    let v: Vec<f64> = v.collect();
    v.windows(2).all(|w| w[1] >= w[0])
}

/// Evaluate the grid in parallel; rows keep grid order. Domain and range
/// failures skip the point, consistency failures abort.
pub fn run_sweep(cfg: &SweepConfig) -> Result<SweepTable> {
    cfg.validate()?;
    let results: Vec<Result<SweepRow>> = cfg.grid().par_iter().map(|&v| evaluate(cfg, v)).collect();
    let mut rows = Vec::with_capacity(results.len());
    let mut skipped = 0;
    for r in results {
        match r {
            Ok(row) => rows.push(row),
            Err(Error::Domain { .. } | Error::Range { .. }) => skipped += 1,
            Err(e) => return Err(e),
        }
    }
    let bias = cfg.variable == SweepVariable::Phi;
    let zero_bias_product = if bias {
        let p = cfg.point.with(SweepVariable::Phi, 0.0);
        Some(uncertainty_product(p.energy(), &p.spec(), p.n_electrons)?.product_over_hbar)
    } else {
        None
    };
    let summary = SweepSummary {
        rows: rows.len(),
        skipped,
        delta_p_nondecreasing: bias.then(|| nondecreasing(rows.iter().map(|r| r.delta_p))),
        product_nondecreasing: bias.then(|| nondecreasing(rows.iter().map(|r| r.product))),
        zero_bias_product,
    };
    Ok(SweepTable {
        config: cfg.clone(),
        rows,
        summary,
    })
}

fn sci(v: f64) -> String {
    format!("{v:.11e}")
}

impl SweepTable {
    fn column_names(&self) -> Vec<&'static str> {
        std::iter::once(self.config.variable.column())
            .chain(self.config.outputs.iter().map(|o| o.column()))
            .collect()
    }

    fn units(&self) -> Vec<(&'static str, &'static str)> {
        std::iter::once((self.config.variable.column(), self.config.variable.unit()))
            .chain(self.config.outputs.iter().map(|o| (o.column(), o.unit())))
            .collect()
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::new();
        let units: Vec<String> = self
            .units()
            .iter()
            .map(|(c, u)| format!("{c}={u}"))
            .collect();
        let _ = writeln!(s, "# units: {}", units.join(", "));
        let _ = writeln!(s, "{}", self.column_names().join(","));
        for row in &self.rows {
            let cells: Vec<String> = std::iter::once(row.value)
                .chain(row.columns.iter().copied())
                .map(sci)
                .collect();
            let _ = writeln!(s, "{}", cells.join(","));
        }
        let m = &self.summary;
        let _ = writeln!(s, "# rows: {}, skipped: {}", m.rows, m.skipped);
        if let (Some(dp), Some(prod)) = (m.delta_p_nondecreasing, m.product_nondecreasing) {
            let _ = writeln!(
                s,
                "# delta_p nondecreasing: {dp}, product nondecreasing: {prod}"
            );
        }
        if let Some(p) = m.zero_bias_product {
            let _ = writeln!(s, "# zero-bias product: {} hbar", sci(p));
        }
        s
    }

    pub fn to_json(&self) -> Result<String> {
        #[derive(Serialize)]
        struct Doc<'a> {
            config: &'a SweepConfig,
            units: BTreeMap<&'static str, &'static str>,
            rows: Vec<BTreeMap<&'static str, f64>>,
            summary: &'a SweepSummary,
        }
        let names = self.column_names();
        let rows = self
            .rows
            .iter()
            .map(|r| {
                names
                    .iter()
                    .copied()
                    .zip(std::iter::once(r.value).chain(r.columns.iter().copied()))
                    .collect()
            })
            .collect();
        let doc = Doc {
            config: &self.config,
            units: self.units().into_iter().collect(),
            rows,
            summary: &self.summary,
        };
        serde_json::to_string_pretty(&doc)
            .map_err(|e| Error::Consistency(format!("serialising sweep: {e}")))
    }

    pub fn render(&self) -> Result<String> {
        match self.config.format {
            Format::Csv => Ok(self.to_csv()),
            Format::Json => self.to_json().map(|s| s + "\n"),
        }
    }
}

fn emit(text: &str, out: Option<&Path>) -> Result<()> {
    match out {
        Some(path) => std::fs::write(path, text)
            .map_err(|e| usage(format!("cannot write {}: {e}", path.display()))),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(text.as_bytes())
                .map_err(|e| usage(format!("cannot write to standard output: {e}")))
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeasibilityReport {
    pub budget: NoiseBudget,
    pub verdict: Verdict,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Pass,
    AtThreshold,
    Fail,
}

/// Noise budget and a verdict on `feasibility_lhs < 1`.
pub fn feasibility_report(point: &PointConfig) -> Result<FeasibilityReport> {
    let budget = noise_budget(
        point.tunnel_current,
        point.energy(),
        &point.spec(),
        &point.resonator,
    )?;
    let lhs = budget.feasibility_lhs;
    let verdict = if (lhs - 1.0).abs() <= 1e-12 {
        Verdict::AtThreshold
    } else if lhs < 1.0 {
        Verdict::Pass
    } else {
        Verdict::Fail
    };
    Ok(FeasibilityReport { budget, verdict })
}

impl FeasibilityReport {
    pub fn to_text(&self) -> String {
        let b = &self.budget;
        let mut s = String::new();
        let mut line = |name: &str, v: f64, unit: &str| {
            let _ = writeln!(s, "{name:<18}{:>20} {unit}", sci(v));
        };
        line("I0", b.tunnel_current, "A");
        line("E", b.electron_energy, "eV");
        line("S_fQ", b.s_fq, "N^2/Hz");
        line("S_fL", b.s_fl, "N^2/Hz");
        line("psd_ratio", b.psd_ratio, "(S_fL/S_fQ)");
        line("feasibility_lhs", b.feasibility_lhs, "(< 1 required)");
        line("shot_noise", b.shot_psd, "A/sqrt(Hz)");
        let verdict = match self.verdict {
            Verdict::Pass => "PASS",
            Verdict::AtThreshold => "AT THRESHOLD (not below 1)",
            Verdict::Fail => "FAIL",
        };
        let _ = writeln!(s, "verdict: {verdict}");
        s
    }
}

/// Everything known about one solved point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveDump {
    pub config: PointConfig,
    pub solution: ScatteringSolution,
    pub matching_residuals: [f64; 4],
    pub dt_dl_analytic: f64,
    pub dt_dl_numeric: f64,
    pub transferred: TransferredFluxes,
    pub jump_residual_max: Option<f64>,
    pub uncertainty: UncertaintyResult,
}

pub fn solve_dump(point: &PointConfig) -> Result<SolveDump> {
    let (energy, spec) = (point.energy(), point.spec());
    let solution = solve(energy, &spec)?;
    let jump_residual_max = if spec.family == BarrierFamily::LinearField {
        Some(jump_residuals(&solution)?.max())
    } else {
        None
    };
    Ok(SolveDump {
        config: *point,
        matching_residuals: solution.matching_residuals()?,
        dt_dl_analytic: dt_dl(&solution, DtDlMethod::Analytic)?,
        dt_dl_numeric: dt_dl(&solution, DtDlMethod::Numeric)?,
        transferred: transferred_fluxes(&solution),
        jump_residual_max,
        uncertainty: uncertainty_product(energy, &spec, point.n_electrons)?,
        solution,
    })
}

impl SolveDump {
    pub fn to_csv(&self) -> String {
        let s = &self.solution;
        let u = &self.uncertainty;
        let mut rows: Vec<(&str, f64, &str)> = vec![
            ("T", s.transmission, "1"),
            ("R", s.reflection, "1"),
            ("ln_T", s.ln_transmission, "1"),
            ("t_re", s.t.re, "1"),
            ("t_im", s.t.im, "1"),
            ("r_re", s.r.re, "1"),
            ("r_im", s.r.im, "1"),
            ("k", s.k.per_meter(), "1/m"),
            ("k_bar", s.k_bar.per_meter(), "1/m"),
            ("k0", s.k0.per_meter(), "1/m"),
            ("J_in", s.incident_flux, "m/s"),
            ("dT_dl_analytic", self.dt_dl_analytic, "1/m"),
            ("dT_dl_numeric", self.dt_dl_numeric, "1/m"),
            ("J_p_t", self.transferred.j_p_t, "N"),
            ("J_p2_t", self.transferred.j_p2_t, "(kg*m/s)^2/s"),
            ("delta_l", u.delta_l.nm(), "nm"),
            ("delta_p", u.delta_p, "kg*m/s"),
            ("product", u.product_over_hbar, "hbar"),
            ("N", u.n_electrons, "1"),
        ];
        let worst = self.matching_residuals.iter().copied().fold(0.0, f64::max);
        rows.push(("matching_residual_max", worst, "1"));
        if let Some(j) = self.jump_residual_max {
            rows.push(("jump_residual_max", j, "1"));
        }
        let mut out = String::from("# single point; quantity,value,unit\nquantity,value,unit\n");
        for (name, v, unit) in rows {
            let _ = writeln!(out, "{name},{},{unit}", sci(v));
        }
        out
    }
}

/// Outcome of one built-in check.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    /// `None` marks an informational line that is reported, not asserted.
    pub pass: Option<bool>,
    pub detail: String,
}

fn check(name: &str, pass: bool, detail: String) -> Check {
    Check {
        name: name.into(),
        pass: Some(pass),
        detail,
    }
}

/// Deterministic parameter grid over the three families.
fn selftest_cases() -> Vec<(Energy, BarrierSpec)> {
    let mut cases = Vec::new();
    for &v0 in &[2.0, 5.0, 9.0] {
        for &ef in &[0.1, 0.5, 0.9] {
            for &gap in &[0.2, 0.8, 1.6] {
                for &phi in &[0.5, 2.0] {
                    let (v, p, g) = (
                        Energy::from_ev(v0),
                        Energy::from_ev(phi),
                        Length::from_nm(gap),
                    );
                    let e = Energy::from_ev(ef * v0);
                    cases.push((e, BarrierSpec::symmetric(v, g)));
                    cases.push((e, BarrierSpec::asymmetric(v, p, g)));
                    cases.push((e, BarrierSpec::linear_field(v, p, g)));
                }
            }
        }
    }
    cases
}

/// Numerical invariants of the implementation plus reported model trends.
pub fn selftest() -> Result<Vec<Check>> {
    let cases = selftest_cases();
    let sols: Vec<ScatteringSolution> = cases
        .iter()
        .map(|(e, s)| solve(*e, s))
        .collect::<Result<_>>()?;
    let mut out = Vec::new();

    let unitarity = sols
        .iter()
        .map(|s| (s.transmission + s.reflection - 1.0).abs())
        .fold(0.0, f64::max);
    out.push(check(
        "unitarity",
        unitarity <= 1e-10,
        format!("max |T + R - 1| = {unitarity:.1e}"),
    ));

    let mut continuity: f64 = 0.0;
    for s in &sols {
        continuity = continuity.max(s.matching_residuals()?.iter().copied().fold(0.0, f64::max));
    }
    out.push(check(
        "continuity",
        continuity <= 1e-9,
        format!("max matching residual {continuity:.1e}"),
    ));

    let mut oracle: f64 = 0.0;
    for (e, s) in cases.iter().step_by(7) {
        let a = solve(*e, s)?.ln_transmission;
        oracle = oracle.max((a - transmission_converged(s, *e, 4000)?.ln_transmission).abs());
    }
    out.push(check(
        "oracle equivalence",
        oracle <= 1e-8,
        format!("max |ln T - ln T_oracle| = {oracle:.1e}"),
    ));

    let mut heis: f64 = 0.0;
    for (e, s) in cases
        .iter()
        .filter(|(_, s)| s.family == BarrierFamily::SymmetricRect)
    {
        heis = heis.max((uncertainty_product(*e, s, 1.0)?.product_over_hbar / 0.5 - 1.0).abs());
    }
    out.push(check(
        "symmetric product",
        heis <= 1e-10,
        format!("max |product/0.5 - 1| = {heis:.1e}"),
    ));

    let mut deriv: f64 = 0.0;
    let mut jumps: f64 = 0.0;
    for s in &sols {
        let (a, n) = (
            dt_dl(s, DtDlMethod::Analytic)?,
            dt_dl(s, DtDlMethod::Numeric)?,
        );
        deriv = deriv.max(((a - n) / a).abs());
        if s.barrier.family == BarrierFamily::LinearField {
            jumps = jumps.max(jump_residuals(s)?.max());
        }
    }
    out.push(check(
        "dT/dl agreement",
        deriv <= 1e-6,
        format!("max relative deviation {deriv:.1e}"),
    ));
    out.push(check(
        "flux jump relations",
        jumps <= 1e-9,
        format!("max residual {jumps:.1e}"),
    ));

    let mut wronskian: f64 = 0.0;
    for i in 0..=600 {
        let z = -30.0 + 0.1 * i as f64;
        if z <= 10.0 {
            wronskian =
                wronskian.max((airy_all(z)?.wronskian() * std::f64::consts::PI - 1.0).abs());
        }
    }
    out.push(check(
        "Airy Wronskian",
        wronskian <= 1e-10,
        format!("max relative error {wronskian:.1e} on [-30, 10]"),
    ));

    let nominal = PointConfig::from_flags(&Flags::default())?;
    let lhs = feasibility_report(&nominal)?.budget.feasibility_lhs;
    out.push(check(
        "nominal feasibility",
        (lhs - 1.0).abs() <= 1e-12,
        format!("feasibility_lhs = {lhs}"),
    ));

    let sweep = run_sweep(&SweepConfig::from_flags(&Flags {
        steps: Some(51),
        ..Flags::default()
    })?)?;
    let m = &sweep.summary;
    out.push(check(
        "bias sweep delta_p",
        m.delta_p_nondecreasing == Some(true),
        format!("delta_p nondecreasing over phi in [0, 5] eV at gap {DEFAULT_GAP_NM} nm"),
    ));
    out.push(Check {
        name: "bias sweep product".into(),
        pass: None,
        detail: format!(
            "product nondecreasing: {} (zero-bias value {:.12} hbar)",
            m.product_nondecreasing.unwrap_or(false),
            m.zero_bias_product.unwrap_or(f64::NAN)
        ),
    });
    Ok(out)
}

/// Map an error to its process exit code.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Input(_) => EXIT_USAGE,
        Error::Domain { .. } | Error::Range { .. } => EXIT_DOMAIN,
        Error::Consistency(_) => EXIT_CONSISTENCY,
    }
}

fn json<T: Serialize>(v: &T) -> Result<String> {
    serde_json::to_string_pretty(v)
        .map(|s| s + "\n")
        .map_err(|e| Error::Consistency(format!("serialising output: {e}")))
}

/// Run one parsed command; returns the exit code.
pub fn run(cli: Cli) -> Result<i32> {
    match cli.command {
        Command::Sweep(flags) => {
            let flags = flags.resolve()?;
            let cfg = SweepConfig::from_flags(&flags)?;
            let table = run_sweep(&cfg)?;
            emit(&table.render()?, cfg.out.as_deref())?;
            Ok(EXIT_OK)
        }
        Command::Feasibility(flags) => {
            let flags = flags.resolve()?;
            let report = feasibility_report(&PointConfig::from_flags(&flags)?)?;
            let text = match flags.format {
                Some(Format::Json) => json(&report)?,
                _ => report.to_text(),
            };
            emit(&text, flags.out.as_deref())?;
            Ok(EXIT_OK)
        }
        Command::Solve(flags) => {
            let flags = flags.resolve()?;
            let dump = solve_dump(&PointConfig::from_flags(&flags)?)?;
            let text = match flags.format {
                Some(Format::Json) => json(&dump)?,
                _ => dump.to_csv(),
            };
            emit(&text, flags.out.as_deref())?;
            Ok(EXIT_OK)
        }
        Command::Selftest(flags) => {
            let flags = flags.resolve()?;
            let checks = selftest()?;
            let text = match flags.format {
                Some(Format::Json) => json(&checks)?,
                _ => checks
                    .iter()
                    .map(|c| {
                        let tag = match c.pass {
                            Some(true) => "PASS",
                            Some(false) => "FAIL",
                            None => "INFO",
                        };
                        format!("[{tag}] {}: {}\n", c.name, c.detail)
                    })
                    .collect(),
            };
            emit(&text, flags.out.as_deref())?;
            let failed = checks.iter().any(|c| c.pass == Some(false));
            Ok(if failed { EXIT_CONSISTENCY } else { EXIT_OK })
        }
    }
}

/// Parse arguments, run, report errors on stderr and return the exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}
