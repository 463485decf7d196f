//! Command-line front end: scenario ingestion and the `table`, `curve`,
//! `simulate`, and `compare` subcommands.
//!
//! Output contracts:
//! - CSV is locale-independent ('.' decimals, '\n' line endings, header row
//!   first) with floats printed in shortest round-trip form; the `--tol`
//!   setting is echoed as a `# tol=...` line on stderr so the CSV body stays
//!   clean.
//! - JSON embeds the same values under a `"meta"` object.
//! - Exit codes: 0 success, 2 usage/config error, 3 internal numeric
//!   failure (a non-finite value that would otherwise be written out).

use std::fs;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::dpsk::{ber_dpsk_preamp, ber_dpsk_preamp_limit, DpskChannel};
use crate::linkbudget::{
    background_breakdown, dpsk_background_per_bit, effective_counts, LinkScenario, Modulation,
};
use crate::mcsim::{simulate_ppm, SimConfig};
use crate::ppm::{ber_mppm, PpmChannel};
use crate::{Error, Result};

const DEFAULT_TOL: f64 = 1e-12;
const DEFAULT_MODULATIONS: [u32; 5] = [2, 4, 8, 16, 32];
const COMPARE_TARGETS: [f64; 3] = [1e-4, 1e-6, 1e-9];
/// Bisection gives up above this many photons/bit and reports the target
/// unreachable.
const MAX_PHOTONS_PER_BIT: f64 = 1e4;

#[derive(Debug, Parser)]
#[command(
    name = "photon-link",
    version,
    about = "BER models for photon-counting PPM and pre-amplified DPSK optical links"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Background-photon breakdown per modulation for a scenario
    Table(TableArgs),
    /// BER vs photons/bit series for DPSK and each PPM order
    Curve(CurveArgs),
    /// Seeded Poisson Monte Carlo run for one PPM configuration
    Simulate(SimulateArgs),
    /// Photons/bit required to reach target BERs, per radiance level
    Compare(CompareArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OutputFormat {
    Csv,
    Json,
}

#[derive(Debug, Args)]
pub struct TableArgs {
    /// Scenario JSON file
    #[arg(long)]
    pub scenario: PathBuf,
    /// Output path, or "stdout"
    #[arg(long, default_value = "stdout")]
    pub out: String,
    #[arg(long, value_enum, default_value_t = OutputFormat::Csv)]
    pub format: OutputFormat,
    /// Analytic truncation tolerance (echoed in output metadata)
    #[arg(long, default_value_t = DEFAULT_TOL)]
    pub tol: f64,
}

#[derive(Debug, Args)]
pub struct CurveArgs {
    /// Scenario JSON file
    #[arg(long)]
    pub scenario: PathBuf,
    /// Output path, or "stdout"
    #[arg(long, default_value = "stdout")]
    pub out: String,
    #[arg(long, value_enum, default_value_t = OutputFormat::Csv)]
    pub format: OutputFormat,
    /// Analytic truncation tolerance
    #[arg(long, default_value_t = DEFAULT_TOL)]
    pub tol: f64,
    /// Idealized mode: counting efficiency 1, n_sp 1, infinite gain
    #[arg(long)]
    pub ideal: bool,
    /// Override the scenario's Q-switch efficiency, in (0, 1]
    #[arg(long)]
    pub qswitch: Option<f64>,
    /// Smallest photons/bit on the grid
    #[arg(long, default_value_t = 1.0)]
    pub grid_min: f64,
    /// Largest photons/bit on the grid
    #[arg(long, default_value_t = 150.0)]
    pub grid_max: f64,
    /// Number of log-spaced grid points
    #[arg(long, default_value_t = 150)]
    pub grid_points: usize,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// PPM order M (power of 2)
    #[arg(long)]
    pub order: u32,
    /// Mean signal photons per pulsed slot, K_s
    #[arg(long)]
    pub ks: f64,
    /// Mean background photons per slot, K_b
    #[arg(long, conflicts_with = "kb_per_symbol")]
    pub kb: Option<f64>,
    /// Mean background photons per symbol; divided by M to get K_b
    #[arg(long)]
    pub kb_per_symbol: Option<f64>,
    /// Symbols to simulate
    #[arg(long, default_value_t = 1_000_000)]
    pub symbols: u64,
    /// Master RNG seed
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Symbols per parallel work unit (does not affect tallies)
    #[arg(long, default_value_t = 65_536)]
    pub chunk_size: u64,
    /// Worker threads (default: rayon's global pool)
    #[arg(long)]
    pub workers: Option<usize>,
    /// Analytic truncation tolerance for the reference SER/BER
    #[arg(long, default_value_t = DEFAULT_TOL)]
    pub tol: f64,
    /// Output path, or "stdout"
    #[arg(long, default_value = "stdout")]
    pub out: String,
}

#[derive(Debug, Args)]
pub struct CompareArgs {
    /// Scenario JSON file (uses its radiance_levels list when present)
    #[arg(long)]
    pub scenario: PathBuf,
    /// Output path, or "stdout"
    #[arg(long, default_value = "stdout")]
    pub out: String,
    /// Analytic truncation tolerance
    #[arg(long, default_value_t = DEFAULT_TOL)]
    pub tol: f64,
    /// Idealized mode: counting efficiency 1, n_sp 1, infinite gain
    #[arg(long)]
    pub ideal: bool,
    /// Override the scenario's Q-switch efficiency, in (0, 1]
    #[arg(long)]
    pub qswitch: Option<f64>,
}

// ---------------------------------------------------------------------------
// Scenario file
// ---------------------------------------------------------------------------

/// On-disk scenario schema: the LinkScenario fields plus the optional
/// `radiance_levels` and `modulations` lists. Unknown keys are rejected so
/// unit mistakes cannot slip through silently.
#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    pub spectral_radiance: f64,
    pub aperture_diameter: f64,
    pub filter_bandwidth: f64,
    pub fov_full_angle: f64,
    pub wavelength: f64,
    pub data_rate: f64,
    pub polarization_filtered: bool,
    pub counter_efficiency: f64,
    pub dark_count_rate: f64,
    pub qswitch_efficiency: f64,
    pub amplifier_gain: f64,
    pub n_sp: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub radiance_levels: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub modulations: Option<Vec<u32>>,
}

impl ScenarioFile {
    pub fn scenario(&self) -> LinkScenario {
        LinkScenario {
            spectral_radiance: self.spectral_radiance,
            aperture_diameter: self.aperture_diameter,
            filter_bandwidth: self.filter_bandwidth,
            fov_full_angle: self.fov_full_angle,
            wavelength: self.wavelength,
            data_rate: self.data_rate,
            polarization_filtered: self.polarization_filtered,
            counter_efficiency: self.counter_efficiency,
            dark_count_rate: self.dark_count_rate,
            qswitch_efficiency: self.qswitch_efficiency,
            amplifier_gain: self.amplifier_gain,
            n_sp: self.n_sp,
        }
    }

    pub fn modulations(&self) -> Vec<u32> {
        self.modulations
            .clone()
            .unwrap_or_else(|| DEFAULT_MODULATIONS.to_vec())
    }

    pub fn radiance_levels(&self) -> Vec<f64> {
        self.radiance_levels
            .clone()
            .unwrap_or_else(|| vec![self.spectral_radiance])
    }
}

pub fn load_scenario(path: &PathBuf) -> Result<ScenarioFile> {
    let text = fs::read_to_string(path)
        .map_err(|e| Error::Config(format!("cannot read scenario {}: {e}", path.display())))?;
    let file: ScenarioFile = serde_json::from_str(&text)
        .map_err(|e| Error::Config(format!("malformed scenario {}: {e}", path.display())))?;
    file.scenario().validate()?;
    Ok(file)
}

// ---------------------------------------------------------------------------
// BER series
// ---------------------------------------------------------------------------

/// A labeled BER-vs-photons/bit curve for one modulation.
#[derive(Debug, Clone, Serialize)]
pub struct BerSeries {
    pub label: String,
    /// (photons_per_bit, ber) points, photons strictly increasing.
    pub points: Vec<(f64, f64)>,
}

impl BerSeries {
    /// Wrap a point list, enforcing a strictly increasing photon grid and
    /// BER values in [0, 1].
    pub fn new(label: String, points: Vec<(f64, f64)>) -> Result<BerSeries> {
        for pair in points.windows(2) {
            if pair[1].0 <= pair[0].0 {
                return Err(Error::Domain(format!(
                    "photons_per_bit must be strictly increasing in series {label}"
                )));
            }
        }
        if let Some(&(p, ber)) = points.iter().find(|&&(_, b)| !(0.0..=1.0).contains(&b)) {
            return Err(Error::NonFinite(format!(
                "BER {ber} out of [0, 1] at {p} photons/bit in series {label}"
            )));
        }
        Ok(BerSeries { label, points })
    }
}

// ---------------------------------------------------------------------------
// Evaluation context
// ---------------------------------------------------------------------------

/// A scenario with the curve/compare toggles applied.
#[derive(Debug, Clone)]
struct EvalContext {
    scenario: LinkScenario,
    ideal: bool,
    tol: f64,
}

impl EvalContext {
    fn new(
        mut scenario: LinkScenario,
        ideal: bool,
        qswitch: Option<f64>,
        tol: f64,
    ) -> Result<EvalContext> {
        if let Some(q) = qswitch {
            if !q.is_finite() || q <= 0.0 || q > 1.0 {
                return Err(Error::Config(format!(
                    "--qswitch must lie in (0, 1], got {q}"
                )));
            }
            scenario.qswitch_efficiency = q;
        }
        if ideal {
            scenario.counter_efficiency = 1.0;
            scenario.n_sp = 1.0;
        }
        if !tol.is_finite() || tol <= 0.0 || tol > 1e-6 {
            return Err(Error::Config(format!(
                "--tol must lie in (0, 1e-6], got {tol}"
            )));
        }
        Ok(EvalContext {
            scenario,
            ideal,
            tol,
        })
    }

    /// BER of one modulation at the given average received photons/bit.
    fn ber(&self, modulation: Modulation, photons_per_bit: f64) -> Result<f64> {
        match modulation {
            Modulation::Dpsk => {
                let n_b = dpsk_background_per_bit(&self.scenario);
                if self.ideal {
                    ber_dpsk_preamp_limit(photons_per_bit, 1.0, n_b)
                } else {
                    let ch = DpskChannel::new(
                        photons_per_bit,
                        self.scenario.amplifier_gain,
                        self.scenario.n_sp,
                        n_b,
                    )?;
                    Ok(ber_dpsk_preamp(&ch))
                }
            }
            Modulation::Ppm(m) => {
                let (k_s, k_b) = effective_counts(&self.scenario, photons_per_bit, m)?;
                let ch = PpmChannel::new(m, k_s, k_b)?;
                Ok(ber_mppm(&ch, self.tol)?.ber)
            }
        }
    }

    /// Smallest photons/bit reaching `target` BER, by bisection on the
    /// monotone-decreasing BER curve; None when the target stays out of
    /// reach below [`MAX_PHOTONS_PER_BIT`].
    fn photons_for_target(&self, modulation: Modulation, target: f64) -> Result<Option<f64>> {
        let mut hi = 1.0;
        while self.ber(modulation, hi)? > target {
            hi *= 2.0;
            if hi > MAX_PHOTONS_PER_BIT {
                return Ok(None);
            }
        }
        let mut lo = 0.0;
        for _ in 0..80 {
            let mid = 0.5 * (lo + hi);
            if self.ber(modulation, mid)? > target {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Ok(Some(0.5 * (lo + hi)))
    }
}

// ---------------------------------------------------------------------------
// Commands
// ---------------------------------------------------------------------------

/// Execute a parsed command line. The caller maps the error to an exit code.
pub fn execute(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Table(args) => cmd_table(args),
        Command::Curve(args) => cmd_curve(args),
        Command::Simulate(args) => cmd_simulate(args),
        Command::Compare(args) => cmd_compare(args),
    }
}

fn cmd_table(args: TableArgs) -> Result<()> {
    let file = load_scenario(&args.scenario)?;
    let rows = background_breakdown(&file.scenario(), &file.modulations())?;
    for row in &rows {
        ensure_finite(
            &[
                row.symbol_rate,
                row.photons_per_symbol_in_pol,
                row.photons_per_slot,
            ],
            "background breakdown",
        )?;
    }
    let text = match args.format {
        OutputFormat::Csv => {
            echo_meta_stderr(args.tol);
            let mut text =
                String::from("modulation,symbol_rate_msps,photons_per_symbol_in_pol,photons_per_slot\n");
            for row in &rows {
                text.push_str(&format!(
                    "{},{},{},{}\n",
                    row.modulation,
                    fmt_f64(row.symbol_rate / 1e6),
                    fmt_f64(row.photons_per_symbol_in_pol),
                    fmt_f64(row.photons_per_slot)
                ));
            }
            text
        }
        OutputFormat::Json => {
            let rows: Vec<_> = rows
                .iter()
                .map(|row| {
                    json!({
                        "modulation": row.modulation.to_string(),
                        "symbol_rate_msps": row.symbol_rate / 1e6,
                        "photons_per_symbol_in_pol": row.photons_per_symbol_in_pol,
                        "photons_per_slot": row.photons_per_slot,
                    })
                })
                .collect();
            pretty(&json!({ "meta": { "tol": args.tol }, "rows": rows }))
        }
    };
    write_output(&args.out, &text)
}

fn cmd_curve(args: CurveArgs) -> Result<()> {
    let file = load_scenario(&args.scenario)?;
    let ctx = EvalContext::new(file.scenario(), args.ideal, args.qswitch, args.tol)?;
    let grid = log_grid(args.grid_min, args.grid_max, args.grid_points)?;

    let mut modulations = vec![Modulation::Dpsk];
    modulations.extend(file.modulations().iter().map(|&m| Modulation::Ppm(m)));

    let mut series = Vec::with_capacity(modulations.len());
    for &modulation in &modulations {
        let mut points = Vec::with_capacity(grid.len());
        for &p in &grid {
            let ber = ctx.ber(modulation, p)?;
            ensure_finite(&[ber], "BER curve")?;
            points.push((p, ber));
        }
        series.push(BerSeries::new(modulation.to_string(), points)?);
    }

    let text = match args.format {
        OutputFormat::Csv => {
            echo_meta_stderr(args.tol);
            let mut text = String::from("modulation,photons_per_bit,ber\n");
            for s in &series {
                for &(p, ber) in &s.points {
                    text.push_str(&format!("{},{},{}\n", s.label, fmt_f64(p), fmt_f64(ber)));
                }
            }
            text
        }
        OutputFormat::Json => {
            let series: Vec<_> = series
                .iter()
                .map(|s| {
                    json!({
                        "label": s.label,
                        "points": s.points.iter().map(|(p, b)| json!([p, b])).collect::<Vec<_>>(),
                    })
                })
                .collect();
            pretty(&json!({
                "meta": {
                    "tol": args.tol,
                    "ideal": args.ideal,
                    "qswitch": ctx.scenario.qswitch_efficiency,
                },
                "series": series,
            }))
        }
    };
    write_output(&args.out, &text)
}

fn cmd_simulate(args: SimulateArgs) -> Result<()> {
    let k_b = match (args.kb, args.kb_per_symbol) {
        (Some(kb), None) => kb,
        (None, Some(per_symbol)) => per_symbol / args.order as f64,
        (None, None) => {
            return Err(Error::Config(
                "one of --kb or --kb-per-symbol is required".into(),
            ))
        }
        (Some(_), Some(_)) => unreachable!("clap rejects conflicting flags"),
    };
    let channel = PpmChannel::new(args.order, args.ks, k_b)?;
    let cfg = SimConfig {
        channel,
        n_symbols: args.symbols,
        seed: args.seed,
        chunk_size: args.chunk_size,
    };
    let report = match args.workers {
        Some(workers) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(workers)
                .build()
                .map_err(|e| Error::Config(format!("cannot build worker pool: {e}")))?;
            pool.install(|| simulate_ppm(&cfg))?
        }
        None => simulate_ppm(&cfg)?,
    };

    let analytic = ber_mppm(&channel, args.tol)?;
    let sigma = (analytic.ser * (1.0 - analytic.ser) / args.symbols as f64).sqrt();
    let z_score = if sigma > 0.0 {
        Some((report.ser_hat - analytic.ser) / sigma)
    } else if report.ser_hat == analytic.ser {
        Some(0.0)
    } else {
        None
    };

    ensure_finite(
        &[report.ser_hat, report.ber_hat, analytic.ser, analytic.ber],
        "simulation report",
    )?;
    let text = pretty(&json!({
        "meta": {
            "tol": args.tol,
            "order": args.order,
            "ks": args.ks,
            "kb": k_b,
            "chunk_size": args.chunk_size,
            "workers": args.workers,
        },
        "report": report,
        "analytic": {
            "ser": analytic.ser,
            "ber": analytic.ber,
            "bound_ser": analytic.bound_ser,
            "truncation_residual": analytic.truncation_residual,
        },
        "z_score": z_score,
    }));
    write_output(&args.out, &text)
}

fn cmd_compare(args: CompareArgs) -> Result<()> {
    let file = load_scenario(&args.scenario)?;
    let mut modulations = vec![Modulation::Dpsk];
    modulations.extend(file.modulations().iter().map(|&m| Modulation::Ppm(m)));

    let mut levels = Vec::new();
    for &radiance in &file.radiance_levels() {
        if !radiance.is_finite() || radiance < 0.0 {
            return Err(Error::Config(format!(
                "radiance levels must be finite and >= 0, got {radiance}"
            )));
        }
        let mut scenario = file.scenario();
        scenario.spectral_radiance = radiance;
        let ctx = EvalContext::new(scenario, args.ideal, args.qswitch, args.tol)?;

        let mut per_target = Vec::new();
        for &target in &COMPARE_TARGETS {
            let mut requirements = Vec::new();
            for &modulation in &modulations {
                let needed = ctx.photons_for_target(modulation, target)?;
                if let Some(p) = needed {
                    ensure_finite(&[p], "photon requirement")?;
                }
                requirements.push((modulation.to_string(), needed));
            }
            // best (fewest photons) first; unreachable targets sort last
            let mut ranking: Vec<&(String, Option<f64>)> = requirements.iter().collect();
            ranking.sort_by(|a, b| match (a.1, b.1) {
                (Some(x), Some(y)) => x.total_cmp(&y),
                (Some(_), None) => std::cmp::Ordering::Less,
                (None, Some(_)) => std::cmp::Ordering::Greater,
                (None, None) => std::cmp::Ordering::Equal,
            });
            let ranking: Vec<String> = ranking.iter().map(|(label, _)| label.clone()).collect();
            per_target.push(json!({
                "target_ber": target,
                "requirements": requirements.iter().map(|(label, needed)| json!({
                    "modulation": label,
                    "photons_per_bit": needed,
                    "reachable": needed.is_some(),
                })).collect::<Vec<_>>(),
                "ranking": ranking,
            }));
        }
        levels.push(json!({ "radiance": radiance, "targets": per_target }));
    }

    let text = pretty(&json!({
        "meta": { "tol": args.tol, "ideal": args.ideal },
        "levels": levels,
    }));
    write_output(&args.out, &text)
}

// ---------------------------------------------------------------------------
// Helpers
// ---------------------------------------------------------------------------

/// Log-spaced grid from `min` to `max` inclusive, strictly increasing.
fn log_grid(min: f64, max: f64, points: usize) -> Result<Vec<f64>> {
    if min.is_nan() || min <= 0.0 || max.is_nan() || max <= min || points < 2 {
        return Err(Error::Config(format!(
            "grid requires 0 < min < max and >= 2 points, got [{min}, {max}] x {points}"
        )));
    }
    let ratio = max / min;
    Ok((0..points)
        .map(|i| min * ratio.powf(i as f64 / (points - 1) as f64))
        .collect())
}

fn ensure_finite(values: &[f64], what: &str) -> Result<()> {
    for &v in values {
        if !v.is_finite() {
            return Err(Error::NonFinite(format!("{what} produced {v}")));
        }
    }
    Ok(())
}

/// Shortest round-trip float formatting, switching to scientific notation
/// outside a plain-decimal-friendly magnitude window.
fn fmt_f64(v: f64) -> String {
    let a = v.abs();
    if v != 0.0 && (a < 1e-4 || a >= 1e15) {
        format!("{v:e}")
    } else {
        format!("{v}")
    }
}

fn echo_meta_stderr(tol: f64) {
    eprintln!("# tol={tol:e}");
}

fn pretty(value: &serde_json::Value) -> String {
    let mut text = serde_json::to_string_pretty(value).expect("JSON serialization");
    text.push('\n');
    text
}

fn write_output(out: &str, text: &str) -> Result<()> {
    if out == "stdout" || out == "-" {
        print!("{text}");
        Ok(())
    } else {
        fs::write(out, text)
            .map_err(|e| Error::Config(format!("cannot write output {out}: {e}")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn reference_json(radiance: f64) -> String {
        format!(
            r#"{{
                "spectral_radiance": {radiance},
                "aperture_diameter": 40.0,
                "filter_bandwidth": 5e-4,
                "fov_full_angle": 0.5,
                "wavelength": 1547.5,
                "data_rate": 311e6,
                "polarization_filtered": true,
                "counter_efficiency": 0.7,
                "dark_count_rate": 0.0,
                "qswitch_efficiency": 1.0,
                "amplifier_gain": 1e4,
                "n_sp": 1.05,
                "modulations": [2, 4, 8, 16, 32]
            }}"#
        )
    }

    fn context(radiance: f64, ideal: bool, qswitch: Option<f64>) -> EvalContext {
        let file: ScenarioFile = serde_json::from_str(&reference_json(radiance)).unwrap();
        EvalContext::new(file.scenario(), ideal, qswitch, 1e-12).unwrap()
    }

    #[test]
    fn scenario_rejects_unknown_keys() {
        let mut text = reference_json(10.0);
        text = text.replace("\"modulations\"", "\"radiance\": 1.0, \"modulations\"");
        let parsed: std::result::Result<ScenarioFile, _> = serde_json::from_str(&text);
        assert!(parsed.is_err(), "unknown key must be a hard error");
    }

    #[test]
    fn scenario_rejects_missing_keys() {
        let text = reference_json(10.0).replace(r#""wavelength": 1547.5,"#, "");
        let parsed: std::result::Result<ScenarioFile, _> = serde_json::from_str(&text);
        assert!(parsed.is_err(), "missing key must be a hard error");
    }

    #[test]
    fn log_grid_is_strictly_increasing() {
        let grid = log_grid(1.0, 150.0, 150).unwrap();
        assert_eq!(grid.len(), 150);
        assert!((grid[0] - 1.0).abs() < 1e-12);
        assert!((grid[149] - 150.0).abs() < 1e-9);
        for w in grid.windows(2) {
            assert!(w[1] > w[0]);
        }
        assert!(log_grid(0.0, 10.0, 5).is_err());
        assert!(log_grid(10.0, 1.0, 5).is_err());
        assert!(log_grid(1.0, 10.0, 1).is_err());
    }

    #[test]
    fn dpsk_bisection_matches_closed_form() {
        // finite-gain DPSK inverts in closed form:
        // p = ((G−1)·n_sp + G·N_b)/G · ln(1/(2·target))
        let ctx = context(10.0, false, None);
        let n_b = dpsk_background_per_bit(&ctx.scenario);
        let target = 1e-6f64;
        let g = 1e4;
        let expected = ((g - 1.0) * 1.05 + g * n_b) / g * (1.0 / (2.0 * target)).ln();
        let got = ctx
            .photons_for_target(Modulation::Dpsk, target)
            .unwrap()
            .unwrap();
        assert!(
            (got - expected).abs() < 1e-6 * expected,
            "bisection {got} vs closed form {expected}"
        );
    }

    #[test]
    fn requirements_monotone_in_target() {
        let ctx = context(1.0, false, None);
        for modulation in [Modulation::Dpsk, Modulation::Ppm(4), Modulation::Ppm(32)] {
            let p4 = ctx.photons_for_target(modulation, 1e-4).unwrap().unwrap();
            let p6 = ctx.photons_for_target(modulation, 1e-6).unwrap().unwrap();
            let p9 = ctx.photons_for_target(modulation, 1e-9).unwrap().unwrap();
            assert!(p4 <= p6 && p6 <= p9, "{modulation}: {p4} {p6} {p9}");
        }
    }

    #[test]
    fn quantum_limit_requirement_shared_across_modulations() {
        // zero radiance + idealized: every modulation needs the same photons
        // per *pulse* N with ½e^(−N) = target
        let ctx = context(0.0, true, None);
        let target = 1e-6f64;
        let want = (1.0 / (2.0 * target)).ln();
        let dpsk = ctx
            .photons_for_target(Modulation::Dpsk, target)
            .unwrap()
            .unwrap();
        assert!((dpsk - want).abs() < 1e-6 * want);
        for &m in &[2u32, 8, 32] {
            let per_bit = ctx
                .photons_for_target(Modulation::Ppm(m), target)
                .unwrap()
                .unwrap();
            let per_symbol = per_bit * (m.trailing_zeros() as f64);
            assert!(
                (per_symbol - want).abs() < 1e-5 * want,
                "M={m}: per-symbol requirement {per_symbol} vs {want}"
            );
        }
    }

    #[test]
    fn ber_series_enforces_invariants() {
        assert!(BerSeries::new("x".into(), vec![(1.0, 0.1), (2.0, 0.05)]).is_ok());
        assert!(BerSeries::new("x".into(), vec![(2.0, 0.1), (1.0, 0.05)]).is_err());
        assert!(BerSeries::new("x".into(), vec![(1.0, 0.1), (1.0, 0.05)]).is_err());
        assert!(BerSeries::new("x".into(), vec![(1.0, 1.5)]).is_err());
    }

    #[test]
    fn eval_context_validates_toggles() {
        let file: ScenarioFile = serde_json::from_str(&reference_json(1.0)).unwrap();
        assert!(EvalContext::new(file.scenario(), false, Some(0.0), 1e-12).is_err());
        assert!(EvalContext::new(file.scenario(), false, Some(1.5), 1e-12).is_err());
        assert!(EvalContext::new(file.scenario(), false, None, 0.0).is_err());
        assert!(EvalContext::new(file.scenario(), false, None, 1e-3).is_err());
    }
}
