//! Scenario configuration and the end-to-end run: coefficients, sweep,
//! CSV series and JSON report.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::evolution::{bouncer_position_grid, time_grid, well_momentum_grid, MomentumMethod, Propagator};
use crate::grid::Grid1D;
use crate::information::{nonclassicality_series, FisherOptions, SweepPoint};
use crate::packets::{
    bouncer_coefficients_analytic, project_auto, well_coefficients_analytic, CoefficientSet,
    GaussianPacketSpec,
};
use crate::revivals::{revival_report, AnalysisOptions, RevivalReport, TimeSeries};
use crate::systems::{
    bouncer_closed_form_timescales, spectrum_timescales, Eigenbasis, InfiniteWell, QuantumBouncer,
    TimeScales,
};

pub const CSV_HEADER: &str = "t,re_A,im_A,abs_A2,I_rho,I_gamma,J_nc";

/// Warnings kept verbatim in the report; the rest are only counted.
const REPORT_WARNING_LIMIT: usize = 50;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SystemKind {
    InfiniteWell,
    QuantumBouncer,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CoefficientMethod {
    Quadrature,
    Analytic,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MomentumRoute {
    EigenSum,
    Fft,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RevivalTimeSource {
    ClosedForm,
    Spectrum,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemSection {
    pub kind: SystemKind,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PacketSection {
    #[serde(alias = "z0")]
    pub x0: f64,
    pub sigma: f64,
    pub p0: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct UnitsSection {
    pub hbar: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mass: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub length: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BasisSection {
    /// Largest level considered when projecting.
    pub n_max: usize,
    pub capture_target: f64,
    /// Per-side weight dropped from the edges of the retained band.
    pub trim: f64,
    pub coefficients: CoefficientMethod,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridsSection {
    pub position: usize,
    pub momentum: usize,
    pub momentum_method: MomentumRoute,
    /// Eigen-sum momentum half-width in units of the top retained level's momentum.
    pub momentum_reach: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    pub t_start: f64,
    pub t_end: f64,
    pub samples: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnalysisSection {
    pub q_max: u32,
    pub tolerance: f64,
    pub prominence: f64,
    pub classical_window: f64,
    pub classical_tolerance: f64,
    pub revival_time: RevivalTimeSource,
}

impl AnalysisSection {
    pub fn options(&self) -> AnalysisOptions<f64> {
        AnalysisOptions {
            q_max: self.q_max,
            tolerance: self.tolerance,
            prominence: self.prominence,
            classical_window: self.classical_window,
            classical_tolerance: self.classical_tolerance,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputsSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub series: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub report: Option<PathBuf>,
}

/// Validated scenario with every default filled in.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScenarioConfig {
    pub system: SystemSection,
    pub packet: PacketSection,
    pub units: UnitsSection,
    pub basis: BasisSection,
    pub grids: GridsSection,
    pub sweep: SweepSection,
    pub analysis: AnalysisSection,
    pub fisher: FisherOptions<f64>,
    pub outputs: OutputsSection,
}

const SECTIONS: [&str; 9] = [
    "system", "packet", "units", "basis", "grids", "sweep", "analysis", "fisher", "outputs",
];

fn config_err(msg: impl Into<String>) -> Error {
    Error::Config(msg.into())
}

fn section<T: serde::de::DeserializeOwned>(table: &toml::Table, name: &str) -> Result<T> {
    let value = table.get(name).cloned().unwrap_or_else(|| toml::Value::Table(toml::Table::new()));
    value
        .try_into()
        .map_err(|e: toml::de::Error| config_err(format!("[{name}] {}", e.message())))
}

/// Inserts `key = value` into `[name]` unless the document sets it.
fn default_key(table: &mut toml::Table, name: &str, key: &str, value: impl Into<toml::Value>) {
    if let Some(toml::Value::Table(s)) = table.get_mut(name) {
        s.entry(key).or_insert_with(|| value.into());
    }
}

fn as_f64(table: &toml::Table, name: &str, key: &str) -> Option<f64> {
    match table.get(name)?.get(key)? {
        toml::Value::Float(v) => Some(*v),
        toml::Value::Integer(v) => Some(*v as f64),
        _ => None,
    }
}

/// Parses a TOML scenario, fills per-system defaults and validates it.
pub fn parse_config(text: &str) -> Result<ScenarioConfig> {
    let mut table: toml::Table = text.parse().map_err(|e: toml::de::Error| config_err(e.to_string()))?;
    for key in table.keys() {
        if !SECTIONS.contains(&key.as_str()) {
            return Err(config_err(format!(
                "unknown section `{key}`, expected one of {}",
                SECTIONS.join(", ")
            )));
        }
    }
    for name in SECTIONS {
        match table.get(name) {
            None => {
                table.insert(name.into(), toml::Value::Table(toml::Table::new()));
            }
            Some(toml::Value::Table(_)) => {}
            Some(_) => return Err(config_err(format!("`{name}` must be a section"))),
        }
    }
    for name in ["system", "packet"] {
        if table[name].as_table().is_some_and(|t| t.is_empty()) {
            return Err(config_err(format!("missing required section [{name}]")));
        }
    }
    let system: SystemSection = section(&table, "system")?;
    fill_defaults(&mut table, system.kind)?;
    let config = ScenarioConfig {
        system,
        packet: section(&table, "packet")?,
        units: section(&table, "units")?,
        basis: section(&table, "basis")?,
        grids: section(&table, "grids")?,
        sweep: section(&table, "sweep")?,
        analysis: section(&table, "analysis")?,
        fisher: section(&table, "fisher")?,
        outputs: section(&table, "outputs")?,
    };
    config.validate()?;
    Ok(config)
}

fn fill_defaults(t: &mut toml::Table, kind: SystemKind) -> Result<()> {
    default_key(t, "units", "hbar", 1.0);
    default_key(t, "basis", "capture_target", 1.0 - 1e-10);
    default_key(t, "basis", "trim", 1e-20);
    default_key(t, "basis", "coefficients", "quadrature");
    default_key(t, "grids", "momentum_reach", crate::evolution::WELL_MOMENTUM_REACH);
    default_key(t, "sweep", "t_start", 0.0);
    let a = AnalysisOptions::<f64>::default();
    default_key(t, "analysis", "q_max", i64::from(a.q_max));
    default_key(t, "analysis", "tolerance", a.tolerance);
    default_key(t, "analysis", "prominence", a.prominence);
    default_key(t, "analysis", "classical_window", a.classical_window);
    default_key(t, "analysis", "classical_tolerance", a.classical_tolerance);
    default_key(t, "analysis", "revival_time", "closed_form");
    match kind {
        SystemKind::InfiniteWell => {
            default_key(t, "units", "mass", 0.5);
            default_key(t, "units", "length", 1.0);
            default_key(t, "basis", "n_max", 600);
            default_key(t, "grids", "position", 32768);
            default_key(t, "grids", "momentum", 32768);
            default_key(t, "grids", "momentum_method", "eigen_sum");
            // 1.25 revival periods, T_rev = 4mL²/(πħ), so T_rev is an interior sample.
            let (m, l, h) = (
                as_f64(t, "units", "mass").unwrap_or(f64::NAN),
                as_f64(t, "units", "length").unwrap_or(f64::NAN),
                as_f64(t, "units", "hbar").unwrap_or(f64::NAN),
            );
            let t0 = as_f64(t, "sweep", "t_start").unwrap_or(0.0);
            default_key(t, "sweep", "t_end", t0 + 1.25 * 4.0 * m * l * l / (std::f64::consts::PI * h));
            default_key(t, "sweep", "samples", 5001);
        }
        SystemKind::QuantumBouncer => {
            default_key(t, "basis", "n_max", 400);
            default_key(t, "grids", "position", 32768);
            default_key(t, "grids", "momentum", 131072);
            default_key(t, "grids", "momentum_method", "fft");
            // Five classical periods, T_cl = 2√z0.
            let z0 = as_f64(t, "packet", "x0")
                .or_else(|| as_f64(t, "packet", "z0"))
                .unwrap_or(f64::NAN);
            let t0 = as_f64(t, "sweep", "t_start").unwrap_or(0.0);
            default_key(t, "sweep", "t_end", t0 + 5.0 * 2.0 * z0.sqrt());
            default_key(t, "sweep", "samples", 2001);
        }
    }
    Ok(())
}

fn require(cond: bool, msg: impl FnOnce() -> String) -> Result<()> {
    if cond {
        Ok(())
    } else {
        Err(config_err(msg()))
    }
}

fn positive(name: &str, v: f64) -> Result<()> {
    require(v > 0.0 && v.is_finite(), || format!("{name} = {v} must be positive and finite"))
}

impl ScenarioConfig {
    pub fn validate(&self) -> Result<()> {
        let p = &self.packet;
        positive("packet.sigma", p.sigma)?;
        require(p.x0.is_finite() && p.p0.is_finite(), || "packet.x0 and packet.p0 must be finite".into())?;
        positive("units.hbar", self.units.hbar)?;
        match self.system.kind {
            SystemKind::InfiniteWell => {
                let mass = self.units.mass.unwrap_or(f64::NAN);
                let length = self.units.length.unwrap_or(f64::NAN);
                positive("units.mass", mass)?;
                positive("units.length", length)?;
                require(p.x0 > 0.0 && p.x0 < length, || {
                    format!("packet.x0 = {} must lie inside (0, {length})", p.x0)
                })?;
            }
            SystemKind::QuantumBouncer => {
                require(self.units.hbar == 1.0, || {
                    "quantum_bouncer works in scaled units: units.hbar must be 1".into()
                })?;
                require(self.units.mass.is_none() && self.units.length.is_none(), || {
                    "units.mass and units.length do not apply to quantum_bouncer".into()
                })?;
                require(p.x0 > 0.0, || format!("packet.z0 = {} must be above the floor", p.x0))?;
            }
        }
        let b = &self.basis;
        require(b.n_max >= 3, || format!("basis.n_max = {} must be at least 3", b.n_max))?;
        require(b.capture_target > 0.0 && b.capture_target < 1.0, || {
            format!("basis.capture_target = {} must lie in (0, 1)", b.capture_target)
        })?;
        require((0.0..1e-4).contains(&b.trim), || {
            format!("basis.trim = {} must lie in [0, 1e-4)", b.trim)
        })?;
        let g = &self.grids;
        require(g.position >= 3, || format!("grids.position = {} must be at least 3", g.position))?;
        require(g.momentum >= 3, || format!("grids.momentum = {} must be at least 3", g.momentum))?;
        match g.momentum_method {
            MomentumRoute::Fft => require(g.momentum.is_power_of_two(), || {
                format!("grids.momentum = {} must be a power of two for the fft route", g.momentum)
            })?,
            MomentumRoute::EigenSum => {
                require(self.system.kind == SystemKind::InfiniteWell, || {
                    "grids.momentum_method = \"eigen_sum\" needs closed-form momentum eigenfunctions (infinite_well only)".into()
                })?;
                positive("grids.momentum_reach", g.momentum_reach)?;
            }
        }
        let s = &self.sweep;
        require(s.samples >= 2, || format!("sweep.samples = {} must be at least 2", s.samples))?;
        require(s.t_start.is_finite() && s.t_end.is_finite() && s.t_end > s.t_start, || {
            format!("sweep range [{}, {}] must be finite and increasing", s.t_start, s.t_end)
        })?;
        let a = &self.analysis;
        require(a.q_max >= 2, || format!("analysis.q_max = {} must be at least 2", a.q_max))?;
        positive("analysis.tolerance", a.tolerance)?;
        require(a.prominence >= 0.0 && a.prominence.is_finite(), || {
            format!("analysis.prominence = {} must be non-negative", a.prominence)
        })?;
        positive("analysis.classical_window", a.classical_window)?;
        positive("analysis.classical_tolerance", a.classical_tolerance)?;
        let f = &self.fisher;
        require(f.floor >= 0.0 && f.floor.is_finite(), || format!("fisher.floor = {} must be non-negative", f.floor))?;
        positive("fisher.norm_tolerance", f.norm_tolerance)?;
        Ok(())
    }

    /// The resolved document, defaults included.
    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| config_err(e.to_string()))
    }

    pub fn packet_spec(&self) -> Result<GaussianPacketSpec<f64>> {
        GaussianPacketSpec::new(self.packet.x0, self.packet.sigma, self.packet.p0)
    }
}

pub fn read_config(path: &Path) -> Result<ScenarioConfig> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    parse_config(&text)
}

pub enum System {
    Well(InfiniteWell<f64>),
    Bouncer(QuantumBouncer<f64>),
}

impl System {
    pub fn build(config: &ScenarioConfig) -> Result<Self> {
        match config.system.kind {
            SystemKind::InfiniteWell => Ok(System::Well(InfiniteWell::new(
                config.units.length.unwrap_or(1.0),
                config.units.mass.unwrap_or(0.5),
                config.units.hbar,
            )?)),
            // One level beyond n_max so timescales stay defined at the top.
            SystemKind::QuantumBouncer => Ok(System::Bouncer(QuantumBouncer::new(config.basis.n_max + 1)?)),
        }
    }

    pub fn basis(&self) -> &dyn Eigenbasis<f64> {
        match self {
            System::Well(w) => w,
            System::Bouncer(b) => b,
        }
    }
}

/// Projects the packet, keeps the shortest prefix reaching the capture
/// target and trims negligible edge levels.
pub fn scenario_coefficients(config: &ScenarioConfig, system: &System) -> Result<CoefficientSet<f64>> {
    let spec = config.packet_spec()?;
    let basis = &config.basis;
    let full = match (basis.coefficients, system) {
        (CoefficientMethod::Quadrature, s) => {
            project_auto(s.basis(), &spec, basis.capture_target, basis.n_max)?
        }
        (CoefficientMethod::Analytic, System::Well(w)) => {
            well_coefficients_analytic(w, &spec, basis.n_max)?.shortest_reaching(basis.capture_target)
        }
        (CoefficientMethod::Analytic, System::Bouncer(b)) => {
            bouncer_coefficients_analytic(b, &spec, basis.n_max)?.shortest_reaching(basis.capture_target)
        }
    };
    if !(full.captured_norm >= 1.0 - 1e-4) {
        return Err(Error::InsufficientCapture {
            captured: full.captured_norm,
            tolerance: 1e-4,
        });
    }
    Ok(full.trimmed(basis.trim))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TimescaleSummary {
    pub spectrum: TimeScales<f64>,
    pub closed_form: TimeScales<f64>,
    pub revival_time_source: RevivalTimeSource,
}

impl TimescaleSummary {
    fn selected(&self) -> &TimeScales<f64> {
        match self.revival_time_source {
            RevivalTimeSource::ClosedForm => &self.closed_form,
            RevivalTimeSource::Spectrum => &self.spectrum,
        }
    }

    pub fn t_revival(&self) -> f64 {
        self.selected().t_revival
    }

    pub fn t_classical(&self) -> f64 {
        self.selected().t_classical
    }
}

pub fn scenario_timescales(
    config: &ScenarioConfig,
    system: &System,
    coeffs: &CoefficientSet<f64>,
) -> Result<TimescaleSummary> {
    let n_bar = coeffs.n_bar();
    let basis = system.basis();
    let spectrum = basis.spectrum(n_bar + 1)?;
    let from_spectrum = spectrum_timescales(&spectrum, n_bar, basis.hbar())?;
    let closed_form = match system {
        System::Well(w) => w.closed_form_timescales(n_bar)?,
        System::Bouncer(_) => bouncer_closed_form_timescales(config.packet.x0)?,
    };
    Ok(TimescaleSummary {
        spectrum: from_spectrum,
        closed_form,
        revival_time_source: config.analysis.revival_time,
    })
}

pub fn scenario_propagator(
    config: &ScenarioConfig,
    system: &System,
    coeffs: CoefficientSet<f64>,
) -> Result<Propagator<f64>> {
    let g = &config.grids;
    let last = coeffs.last_n();
    let (position, method) = match system {
        System::Well(w) => {
            let position = Grid1D::new(0.0, w.length(), g.position)?;
            let method = match g.momentum_method {
                MomentumRoute::EigenSum => {
                    MomentumMethod::EigenSum(well_momentum_grid(w, last, g.momentum_reach, g.momentum)?)
                }
                MomentumRoute::Fft => MomentumMethod::Fft { min_count: g.momentum },
            };
            (position, method)
        }
        System::Bouncer(b) => (
            bouncer_position_grid(b, last, g.position)?,
            MomentumMethod::Fft { min_count: g.momentum },
        ),
    };
    Propagator::new(system.basis(), coeffs, position, method)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct LevelBand {
    pub first: usize,
    pub last: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepSummary {
    pub t_start: f64,
    pub t_end: f64,
    pub samples: usize,
    pub non_finite: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TimedWarning {
    pub t: f64,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WarningSummary {
    pub count: usize,
    pub first: Vec<TimedWarning>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScenarioReport {
    pub system: SystemKind,
    pub n_bar: usize,
    pub captured_norm: f64,
    pub levels: LevelBand,
    pub timescales: TimescaleSummary,
    pub sweep: SweepSummary,
    pub warnings: WarningSummary,
    pub analysis: RevivalReport<f64>,
}

/// Everything a run produces before it is written out.
pub struct ScenarioOutput {
    pub points: Vec<SweepPoint<f64>>,
    pub report: ScenarioReport,
}

/// Runs the sweep and analysis in memory.
pub fn evaluate_scenario(config: &ScenarioConfig) -> Result<ScenarioOutput> {
    let system = System::build(config)?;
    let coeffs = scenario_coefficients(config, &system)?;
    let timescales = scenario_timescales(config, &system, &coeffs)?;
    let (n_bar, captured_norm) = (coeffs.n_bar(), coeffs.captured_norm);
    let levels = LevelBand {
        first: coeffs.first_n,
        last: coeffs.last_n(),
    };
    let prop = scenario_propagator(config, &system, coeffs)?;
    let s = &config.sweep;
    let times = time_grid(s.t_start, s.t_end, s.samples)?;
    let points = nonclassicality_series(&prop, &times, &config.fisher);

    let jnc = TimeSeries::new(times.clone(), points.iter().map(|p| p.j_nc).collect())?;
    let a2 = TimeSeries::new(times, points.iter().map(|p| p.autocorrelation.norm_sqr()).collect())?;
    let analysis = revival_report(
        &jnc,
        &a2,
        timescales.t_revival(),
        timescales.t_classical(),
        &config.analysis.options(),
    )?;
    let all_warnings = points
        .iter()
        .flat_map(|p| p.warnings.iter().map(move |w| (p.t, w)));
    let count = all_warnings.clone().count();
    let first = all_warnings
        .take(REPORT_WARNING_LIMIT)
        .map(|(t, w)| TimedWarning { t, message: w.clone() })
        .collect();
    let report = ScenarioReport {
        system: config.system.kind,
        n_bar,
        captured_norm,
        levels,
        timescales,
        sweep: SweepSummary {
            t_start: s.t_start,
            t_end: s.t_end,
            samples: s.samples,
            non_finite: points.iter().filter(|p| !p.is_finite()).count(),
        },
        warnings: WarningSummary { count, first },
        analysis,
    };
    Ok(ScenarioOutput { points, report })
}

/// 15 significant digits.
pub fn format_real(v: f64) -> String {
    format!("{v:.14e}")
}

pub fn write_series<W: Write>(out: &mut W, points: &[SweepPoint<f64>]) -> std::io::Result<()> {
    writeln!(out, "{CSV_HEADER}")?;
    for p in points {
        let a = p.autocorrelation;
        let row = [a.re, a.im, a.norm_sqr(), p.fisher.i_rho, p.fisher.i_gamma, p.j_nc];
        write!(out, "{}", format_real(p.t))?;
        for v in row {
            write!(out, ",{}", format_real(v))?;
        }
        writeln!(out)?;
    }
    Ok(())
}

fn round_numbers(v: &mut serde_json::Value) {
    match v {
        serde_json::Value::Number(n) if n.is_f64() => {
            let r: f64 = format_real(n.as_f64().unwrap_or(0.0)).parse().unwrap_or(f64::NAN);
            *v = serde_json::Number::from_f64(r).map_or(serde_json::Value::Null, serde_json::Value::Number);
        }
        serde_json::Value::Array(a) => a.iter_mut().for_each(round_numbers),
        serde_json::Value::Object(o) => o.values_mut().for_each(round_numbers),
        _ => {}
    }
}

/// Pretty JSON with every float rounded to 15 significant digits.
pub fn report_json<S: Serialize>(report: &S) -> Result<String> {
    let mut value = serde_json::to_value(report).map_err(|e| Error::Io(e.to_string()))?;
    round_numbers(&mut value);
    serde_json::to_string_pretty(&value).map_err(|e| Error::Io(e.to_string()))
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

/// Output paths resolved from flags, falling back to `[outputs]`.
pub fn output_paths(
    config: &ScenarioConfig,
    series: Option<PathBuf>,
    report: Option<PathBuf>,
) -> Result<(PathBuf, PathBuf)> {
    let series = series
        .or_else(|| config.outputs.series.clone())
        .ok_or_else(|| config_err("no series path: pass --out-series or set outputs.series"))?;
    let report = report
        .or_else(|| config.outputs.report.clone())
        .ok_or_else(|| config_err("no report path: pass --out-report or set outputs.report"))?;
    Ok((series, report))
}

/// Runs the scenario and writes both files. Output files are opened before
/// the sweep so an unwritable path fails fast. Non-finite sweep points are
/// still written, then reported as a numeric failure.
pub fn run_scenario(config: &ScenarioConfig, series: &Path, report: &Path) -> Result<ScenarioReport> {
    let mut series_out = create(series)?;
    let mut report_out = create(report)?;
    let output = evaluate_scenario(config)?;
    let io = |e: std::io::Error| Error::Io(e.to_string());
    write_series(&mut series_out, &output.points).map_err(io)?;
    series_out.flush().map_err(io)?;
    writeln!(report_out, "{}", report_json(&output.report)?).map_err(io)?;
    report_out.flush().map_err(io)?;
    let bad = output.report.sweep.non_finite;
    if bad > 0 {
        return Err(Error::NonFinite(format!("{bad} sweep points are not finite")));
    }
    Ok(output.report)
}

/// Coefficients and both timescale estimates, without a sweep.
pub fn timescales_command(config: &ScenarioConfig) -> Result<(TimescaleSummary, f64)> {
    let system = System::build(config)?;
    let coeffs = scenario_coefficients(config, &system)?;
    Ok((scenario_timescales(config, &system, &coeffs)?, coeffs.captured_norm))
}
