// Copyright 2026 The pdc-bell Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//    http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

//! Subcommand definitions and drivers.

use std::f64::consts::TAU;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use pdc_bell_core::bell::{self, ChshSettings, CountsTable};
use pdc_bell_core::lhv::{self, LhvParams, Model};
use pdc_bell_core::oracle::{self, DEFAULT_CUTOFF};
use pdc_bell_core::perturbation::{self, PROBABILITY_ORDER};
use pdc_bell_core::{CircuitConfig, Engine, Event, Occupation};
use rayon::prelude::*;
use serde::Serialize;
use serde_json::json;

use crate::config::{self, Angles, CircuitArgs, FileConfig};
use crate::formats::{self, fmt_f64};
use crate::manifest::OutputSet;
use crate::CliError;

#[derive(Debug, Parser)]
#[command(
    name = "pdc-bell",
    version,
    about = "Interwoven down-conversion Bell test calculator"
)]
pub struct Cli {
    /// JSON config file; flags override its values.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true, env = "PDC_BELL_OUT", default_value = ".")]
    pub out: PathBuf,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[arg(long, global = true, value_parser = config::parse_engine)]
    pub engine: Option<Engine>,
    /// Read every angle (flags, config and settings files) in degrees.
    #[arg(long, global = true)]
    pub degrees: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Dump the perturbative state and its norm polynomial.
    State(CircuitArgs),
    /// Clauser-Horne value at one phase pair.
    Ch(ChArgs),
    /// Sweep a phase or visibility and tabulate a quantity.
    Scan(ScanArgs),
    /// Monte Carlo counts for a local hidden variable model.
    Lhv(LhvArgs),
    /// Error of the truncated probabilities against exact evolution.
    OracleCheck(OracleCheckArgs),
    /// Phase-shift CHSH combination from a counts table.
    PaperChsh(PaperChshArgs),
}

#[derive(Debug, Default, Clone, clap::Args)]
pub struct ChArgs {
    #[arg(long)]
    pub g: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub alpha: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub beta: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ScanKind {
    /// CH against the phase sum.
    Ch,
    /// On-on four-photon coincidence against the phase sum, with a fit.
    Interference,
    /// Alice's pair probability against Bob's phase.
    Nosignal,
    /// Best synthetic CH against visibility.
    Visibility,
}

#[derive(Debug, Clone, clap::Args)]
pub struct ScanArgs {
    #[arg(value_enum)]
    pub what: ScanKind,
    /// Sweep points: phases on [0, 2pi), visibilities on [0, 1].
    #[arg(long)]
    pub points: Option<usize>,
    /// Phase points per visibility in a visibility scan.
    #[arg(long, default_value_t = 720)]
    pub phase_points: usize,
    #[command(flatten)]
    pub circuit: CircuitArgs,
}

#[derive(Debug, Default, Clone, clap::Args)]
pub struct LhvArgs {
    #[arg(long, value_parser = config::parse_model)]
    pub model: Option<Model>,
    /// Derive (c, d) from a coupling.
    #[arg(long, conflicts_with_all = ["c", "d"])]
    pub g: Option<f64>,
    #[arg(long, requires = "d")]
    pub c: Option<f64>,
    #[arg(long, requires = "c")]
    pub d: Option<f64>,
    #[arg(long)]
    pub samples: Option<u64>,
    /// JSON file with alpha, alpha_prime, beta, beta_prime.
    #[arg(long)]
    pub settings: Option<PathBuf>,
}

#[derive(Debug, Clone, clap::Args)]
pub struct OracleCheckArgs {
    /// Taylor orders of the squeezers to check.
    #[arg(long, value_delimiter = ',')]
    pub orders: Option<Vec<usize>>,
    #[arg(long, value_delimiter = ',')]
    pub g_list: Option<Vec<f64>>,
    /// Truncation order of the probabilities; defaults to each build's
    /// accuracy order.
    #[arg(long)]
    pub probability_order: Option<usize>,
    #[command(flatten)]
    pub circuit: CircuitArgs,
}

#[derive(Debug, Default, Clone, clap::Args)]
pub struct PaperChshArgs {
    /// Counts CSV; without it, ideal counts are synthesized.
    #[arg(long)]
    pub counts: Option<PathBuf>,
    #[arg(long)]
    pub visibility: Option<f64>,
    #[arg(long)]
    pub n_tot: Option<u64>,
    /// Probability per run of each (+-1, +-1) outcome pair before
    /// modulation; at most 1/8 for any visibility.
    #[arg(long)]
    pub rate: Option<f64>,
    #[arg(long)]
    pub settings: Option<PathBuf>,
}

/// What a successful run produced.
#[derive(Debug, Clone)]
pub struct Outcome {
    pub manifest: PathBuf,
    pub contract_ok: bool,
    /// Human-readable one-line results for stderr.
    pub notes: Vec<String>,
}

struct Ctx<'a> {
    cli: &'a Cli,
    file: FileConfig,
    angles: Angles,
}

impl Ctx<'_> {
    fn engine(&self) -> Engine {
        self.cli
            .engine
            .or(self.file.engine)
            .unwrap_or(Engine::Perturbative)
    }

    fn seed(&self) -> Option<u64> {
        self.cli.seed.or(self.file.seed)
    }

    fn outputs(&self, stem: &str) -> OutputSet {
        OutputSet::new(&self.cli.out, stem)
    }

    /// Settings from a file flag, else the config, else the standard set.
    fn settings(&self, path: Option<&Path>) -> Result<ChshSettings, CliError> {
        let given = match path {
            Some(p) => Some(config::read_json::<ChshSettings>(p)?),
            None => self.file.settings,
        };
        Ok(given.map_or_else(ChshSettings::standard, |s| self.angles.settings(s)))
    }
}

pub fn run(cli: &Cli) -> Result<Outcome, CliError> {
    let file = config::load(cli.config.as_deref())?;
    let angles = Angles {
        degrees: cli.degrees || file.degrees.unwrap_or(false),
    };
    let ctx = Ctx { cli, file, angles };
    match &cli.command {
        Command::State(args) => cmd_state(&ctx, args),
        Command::Ch(args) => cmd_ch(&ctx, args),
        Command::Scan(args) => cmd_scan(&ctx, args),
        Command::Lhv(args) => cmd_lhv(&ctx, args),
        Command::OracleCheck(args) => cmd_oracle_check(&ctx, args),
        Command::PaperChsh(args) => cmd_paper_chsh(&ctx, args),
    }
}

#[derive(Serialize)]
struct StateDump {
    config: CircuitConfig,
    terms: Vec<formats::TermDump>,
    /// Coefficients of `g^k` in the squared norm.
    norm_squared: Vec<[f64; 2]>,
    /// Nonzero amplitudes with the series evaluated at the configured `g`.
    amplitudes: Vec<formats::AmplitudeDump>,
}

fn cmd_state(ctx: &Ctx, args: &CircuitArgs) -> Result<Outcome, CliError> {
    let cfg = args.merge(&ctx.file, ctx.angles, None)?;
    let series = perturbation::build_state(&cfg)?;
    let norm = series.norm_squared()?;
    let dump = StateDump {
        config: cfg,
        terms: formats::dump_state(&series),
        norm_squared: formats::poly_pairs(&norm),
        amplitudes: formats::dump_amplitudes(&series.evaluate(cfg.g)),
    };
    let mut out = ctx.outputs("state");
    out.add_json("state.json", &dump)?;
    let manifest = out.finish("state", serde_json::to_value(cfg)?, ctx.seed(), None)?;
    Ok(Outcome {
        manifest,
        contract_ok: true,
        notes: vec![format!("{} terms", dump.terms.len())],
    })
}

fn cmd_ch(ctx: &Ctx, args: &ChArgs) -> Result<Outcome, CliError> {
    let g = args
        .g
        .or(ctx.file.g)
        .ok_or_else(|| CliError::Usage("coupling g is required".into()))?;
    let alpha = ctx
        .angles
        .radians(args.alpha.or(ctx.file.alpha).unwrap_or(0.0));
    let beta = ctx
        .angles
        .radians(args.beta.or(ctx.file.beta).unwrap_or(0.0));
    let engine = ctx.engine();
    let ch = bell::ch_from_quantum(g, alpha, beta, engine)?;
    let body = json!({
        "g": g,
        "alpha": alpha,
        "beta": beta,
        "engine": engine,
        "probabilities": ch.inputs,
        "ch": ch.value,
        "cross_check": ch.reference,
        "violated": ch.violated(),
    });
    let mut out = ctx.outputs("ch");
    out.add_json("ch.json", &body)?;
    let config = json!({ "g": g, "alpha": alpha, "beta": beta, "engine": engine });
    let manifest = out.finish("ch", config, ctx.seed(), Some(engine.to_string()))?;
    Ok(Outcome {
        manifest,
        contract_ok: true,
        notes: vec![format!("CH = {:e} (violated: {})", ch.value, ch.violated())],
    })
}

/// `n` phases evenly spaced on `[0, 2pi)`.
fn phase_grid(n: usize) -> Vec<f64> {
    (0..n).map(|k| TAU * k as f64 / n as f64).collect()
}

fn cmd_scan(ctx: &Ctx, args: &ScanArgs) -> Result<Outcome, CliError> {
    let cfg = args.circuit.merge(&ctx.file, ctx.angles, None)?;
    let engine = ctx.engine();
    let points = args.points.or(ctx.file.points).unwrap_or(24);
    if points == 0 {
        return Err(CliError::Usage("--points must be positive".into()));
    }
    let (stem, csv, summary, contract_ok) = match args.what {
        ScanKind::Ch => scan_ch(&cfg, engine, points)?,
        ScanKind::Interference => scan_interference(&cfg, engine, points)?,
        ScanKind::Nosignal => scan_nosignal(&cfg, engine, points)?,
        ScanKind::Visibility => scan_visibility(&cfg, points, args.phase_points)?,
    };
    let mut out = ctx.outputs(stem);
    out.add(&format!("{stem}.csv"), csv.into_bytes());
    out.add_json(&format!("{stem}.json"), &summary)?;
    let mut config = serde_json::to_value(cfg)?;
    config["points"] = json!(points);
    if args.what == ScanKind::Visibility {
        config["phase_points"] = json!(args.phase_points);
    }
    let manifest = out.finish(stem, config, ctx.seed(), Some(engine.to_string()))?;
    Ok(Outcome {
        manifest,
        contract_ok,
        notes: vec![summary.to_string()],
    })
}

type ScanResult = (&'static str, String, serde_json::Value, bool);

fn scan_ch(cfg: &CircuitConfig, engine: Engine, points: usize) -> Result<ScanResult, CliError> {
    let rows = phase_grid(points)
        .into_par_iter()
        .map(|delta| {
            bell::ch_from_quantum(cfg.g, cfg.alpha, delta - cfg.alpha, engine).map(|ch| (delta, ch))
        })
        .collect::<Result<Vec<_>, _>>()?;
    let mut csv = String::from("delta,alpha,beta,ch,cross_check,closed_form\n");
    let mut worst: f64 = 0.0;
    for (delta, ch) in &rows {
        worst = worst.max((ch.value - ch.reference).abs());
        let closed = cfg.g.powi(4) * (1.0 - 4.0 * (delta / 2.0).cos().powi(2));
        writeln!(
            csv,
            "{},{},{},{},{},{}",
            fmt_f64(*delta),
            fmt_f64(ch.alpha),
            fmt_f64(ch.beta),
            fmt_f64(ch.value),
            fmt_f64(ch.reference),
            fmt_f64(closed)
        )
        .ok();
    }
    let max = rows
        .iter()
        .map(|(_, c)| c.value)
        .fold(f64::NEG_INFINITY, f64::max);
    let summary = json!({ "g": cfg.g, "max_ch": max, "max_engine_gap": worst });
    Ok(("scan_ch", csv, summary, true))
}

fn coincidence(cfg: &CircuitConfig, event: Event, engine: Engine) -> Result<f64, CliError> {
    Ok(match engine {
        Engine::Perturbative => {
            let state = perturbation::build_state(cfg)?;
            perturbation::probability(&state, event, PROBABILITY_ORDER, cfg.g)?
        }
        Engine::Oracle => oracle::exact_state_auto(cfg, DEFAULT_CUTOFF)?.probability(event),
    })
}

fn scan_interference(
    cfg: &CircuitConfig,
    engine: Engine,
    points: usize,
) -> Result<ScanResult, CliError> {
    let samples = phase_grid(points)
        .into_par_iter()
        .map(|delta| {
            let c = cfg.with_phases(cfg.alpha, delta - cfg.alpha);
            coincidence(&c, Event::Exact(Occupation::new(1, 1, 1, 1)), engine).map(|p| (delta, p))
        })
        .collect::<Result<Vec<_>, _>>()?;
    let mut csv = String::from("delta,p_1111\n");
    for (delta, p) in &samples {
        writeln!(csv, "{},{}", fmt_f64(*delta), fmt_f64(*p)).ok();
    }
    let fit = bell::visibility_fit(&samples)?;
    let summary = json!({ "g": cfg.g, "fit": fit });
    Ok(("scan_interference", csv, summary, true))
}

fn scan_nosignal(
    cfg: &CircuitConfig,
    engine: Engine,
    points: usize,
) -> Result<ScanResult, CliError> {
    let betas = phase_grid(points);
    let marginals = bell::alice_marginals(cfg, &betas, engine)?;
    let mut csv = String::from("beta,p_alice\n");
    for (beta, p) in &marginals {
        writeln!(csv, "{},{}", fmt_f64(*beta), fmt_f64(*p)).ok();
    }
    let spread = bell::spread(&marginals);
    let exact_build = engine == Engine::Oracle || cfg.accuracy_order() >= PROBABILITY_ORDER;
    let tolerance = bell::engine_tolerance(cfg.g);
    let contract_ok = !exact_build || spread <= tolerance;
    let summary = json!({
        "g": cfg.g,
        "corrected": cfg.corrected,
        "spread": spread,
        "tolerance": if exact_build { Some(tolerance) } else { None },
        "uncorrected_expectation": 4.0 * cfg.g.powi(4),
    });
    Ok(("scan_nosignal", csv, summary, contract_ok))
}

fn scan_visibility(
    cfg: &CircuitConfig,
    points: usize,
    phase_points: usize,
) -> Result<ScanResult, CliError> {
    if points < 2 {
        return Err(CliError::Usage(
            "a visibility scan needs at least 2 points".into(),
        ));
    }
    let vs: Vec<f64> = (0..points)
        .map(|k| k as f64 / (points - 1) as f64)
        .collect();
    let scan = bell::visibility_scan(cfg.g, &vs, phase_points)?;
    let mut csv = String::from("visibility,max_ch\n");
    for (v, c) in &scan.rows {
        writeln!(csv, "{},{}", fmt_f64(*v), fmt_f64(*c)).ok();
    }
    let summary = json!({ "g": cfg.g, "threshold": scan.threshold });
    Ok(("scan_visibility", csv, summary, scan.threshold.is_some()))
}

#[derive(Serialize)]
struct PairSummary {
    alpha: f64,
    beta: f64,
    mc_joint: f64,
    analytic_joint: Option<f64>,
}

fn cmd_lhv(ctx: &Ctx, args: &LhvArgs) -> Result<Outcome, CliError> {
    let file = &ctx.file;
    let model = args.model.or(file.model).unwrap_or(Model::Base);
    let params = match (args.g, args.c, args.d) {
        (Some(g), _, _) => LhvParams::from_g(g)?,
        (None, Some(c), Some(d)) => LhvParams::new(c, d)?,
        _ => match (file.g, file.c, file.d) {
            (_, Some(c), Some(d)) => LhvParams::new(c, d)?,
            (Some(g), _, _) => LhvParams::from_g(g)?,
            _ => return Err(CliError::Usage("give --g or both --c and --d".into())),
        },
    };
    let samples = args.samples.or(file.samples).unwrap_or(1_000_000);
    if samples == 0 {
        return Err(CliError::Core(pdc_bell_core::Error::NoSamples));
    }
    let seed = ctx.seed().unwrap_or(0);
    let settings = ctx.settings(args.settings.as_deref())?;
    let setting_list = settings.required_settings();

    let shards = (0..lhv::shard_count(samples))
        .into_par_iter()
        .map(|k| {
            lhv::mc_shard(
                model,
                &setting_list,
                &params,
                lhv::shard_len(samples, k),
                seed.wrapping_add(k),
            )
        })
        .collect::<Result<Vec<_>, _>>()?;
    let mut counts = CountsTable::new(0);
    for shard in &shards {
        counts.merge(shard)?;
    }
    counts.validate()?;

    let n = counts.n_tot() as f64;
    let pairs = settings
        .pairs()
        .iter()
        .map(|&(alpha, beta)| {
            Ok(PairSummary {
                alpha,
                beta,
                mc_joint: counts.count(1, 1, alpha, beta)? as f64 / n,
                analytic_joint: (model == Model::Base)
                    .then(|| params.analytic_joint(alpha, beta).ok())
                    .flatten(),
            })
        })
        .collect::<Result<Vec<_>, CliError>>()?;
    let (a0, b0) = (settings.alpha, settings.beta);
    let ch = bell::ch_from_counts(&counts, &settings)?;
    let summary = json!({
        "model": model,
        "params": params,
        "samples": samples,
        "seed": seed,
        "settings": settings,
        "single": {
            "mc": counts.alice_count(1, a0, b0)? as f64 / n,
            "analytic": (model == Model::Base).then(|| params.analytic_single()),
        },
        "pairs": pairs,
        "paper_chsh": bell::paper_chsh(&counts, &settings)?,
        "ch": ch,
        "postselection": bell::postselection(&counts, a0, b0)?,
        "symmetry": bell::symmetry_audit(&counts, a0, b0, 0.05)?,
    });
    let contract_ok = ch.value <= 4.0 * ch.sigma;

    let mut csv = Vec::new();
    formats::write_counts(&counts, &mut csv)?;
    let mut out = ctx.outputs("lhv");
    out.add("lhv_counts.csv", csv);
    out.add_json("lhv_summary.json", &summary)?;
    let config = json!({
        "model": model,
        "params": params,
        "samples": samples,
        "settings": settings,
    });
    let manifest = out.finish("lhv", config, Some(seed), None)?;
    Ok(Outcome {
        manifest,
        contract_ok,
        notes: vec![format!(
            "S = {:.6}, CH = {:e} +- {:e}",
            summary["paper_chsh"], ch.value, ch.sigma
        )],
    })
}

fn cmd_oracle_check(ctx: &Ctx, args: &OracleCheckArgs) -> Result<Outcome, CliError> {
    let file = &ctx.file;
    let g_list = args
        .g_list
        .clone()
        .or_else(|| file.g_list.clone())
        .unwrap_or_else(|| vec![0.2, 0.1, 0.05, 0.025]);
    let orders = args
        .orders
        .clone()
        .or_else(|| file.orders.clone())
        .unwrap_or_else(|| vec![2, 3, 4]);
    if g_list.is_empty() || orders.is_empty() {
        return Err(CliError::Usage(
            "--g-list and --orders must be non-empty".into(),
        ));
    }
    let template = args.circuit.merge(file, ctx.angles, Some(g_list[0]))?;
    let probability_order = args.probability_order.or(file.probability_order);

    let mut out = ctx.outputs("oracle_check");
    let mut summaries = Vec::new();
    let mut contract_ok = true;
    let mut notes = Vec::new();
    for &order in &orders {
        let cfg = template.with_order(order);
        cfg.validate()?;
        let p_order = probability_order.unwrap_or(cfg.accuracy_order());
        let report = oracle::convergence_scan(&cfg, &g_list, p_order)?;
        let mut csv = String::from("g,event,exact,perturbative,abs_err,slope\n");
        for row in &report.rows {
            let slope = report.slope(row.event).map(fmt_f64).unwrap_or_default();
            writeln!(
                csv,
                "{},{},{},{},{},{}",
                fmt_f64(row.g),
                row.event,
                fmt_f64(row.exact),
                fmt_f64(row.perturbative),
                fmt_f64(row.abs_err),
                slope
            )
            .ok();
        }
        out.add(&format!("oracle_check_order{order}.csv"), csv.into_bytes());
        let events: Vec<_> = report
            .events
            .iter()
            .map(|e| json!({ "event": e.event.to_string(), "slope": e.slope, "pass": report.passes(e.event) }))
            .collect();
        let failing: Vec<String> = report
            .events
            .iter()
            .filter(|e| report.passes(e.event) == Some(false))
            .map(|e| e.event.to_string())
            .collect();
        contract_ok &= report.all_pass();
        notes.push(format!(
            "order {order} (probabilities to g^{p_order}): {}",
            if failing.is_empty() {
                "pass".to_string()
            } else {
                format!(
                    "below slope {:.1} for {}",
                    report.required_slope(),
                    failing.join(" ")
                )
            }
        ));
        summaries.push(json!({
            "order": order,
            "probability_order": p_order,
            "required_slope": report.required_slope(),
            "all_pass": report.all_pass(),
            "events": events,
        }));
    }
    out.add_json("oracle_check.json", &summaries)?;
    let mut config = serde_json::to_value(template)?;
    config["orders"] = json!(orders);
    config["g_list"] = json!(g_list);
    config["probability_order"] = json!(probability_order);
    let manifest = out.finish(
        "oracle_check",
        config,
        ctx.seed(),
        Some(Engine::Oracle.to_string()),
    )?;
    Ok(Outcome {
        manifest,
        contract_ok,
        notes,
    })
}

fn cmd_paper_chsh(ctx: &Ctx, args: &PaperChshArgs) -> Result<Outcome, CliError> {
    let file = &ctx.file;
    let settings = ctx.settings(args.settings.as_deref())?;
    let mut config = json!({ "settings": settings });
    let counts = match &args.counts {
        Some(path) => {
            let f = std::fs::File::open(path).map_err(|source| CliError::Io {
                path: path.clone(),
                source,
            })?;
            config["counts"] = json!(path);
            formats::read_counts(f)?
        }
        None => {
            let visibility = args.visibility.or(file.visibility).unwrap_or(1.0);
            let n_tot = args.n_tot.or(file.n_tot).unwrap_or(1_000_000);
            let rate = args.rate.or(file.rate).unwrap_or(0.125);
            config["visibility"] = json!(visibility);
            config["n_tot"] = json!(n_tot);
            config["rate"] = json!(rate);
            bell::ideal_counts(&settings.required_settings(), n_tot, rate, visibility)?
        }
    };
    let correlations = settings
        .pairs()
        .iter()
        .map(|&(a, b)| {
            Ok(json!({ "alpha": a, "beta": b, "e": bell::paper_correlation(&counts, a, b)? }))
        })
        .collect::<Result<Vec<_>, CliError>>()?;
    let s = bell::paper_chsh(&counts, &settings)?;
    let ch = bell::ch_from_counts(&counts, &settings).ok();
    let summary = json!({
        "settings": settings,
        "n_tot": counts.n_tot(),
        "correlations": correlations,
        "s": s,
        "ch": ch,
    });
    let mut out = ctx.outputs("paper_chsh");
    out.add_json("paper_chsh.json", &summary)?;
    if args.counts.is_none() {
        let mut csv = Vec::new();
        formats::write_counts(&counts, &mut csv)?;
        out.add("paper_chsh_counts.csv", csv);
    }
    let manifest = out.finish("paper_chsh", config, ctx.seed(), None)?;
    Ok(Outcome {
        manifest,
        contract_ok: true,
        notes: vec![format!("S = {s:.6}")],
    })
}
