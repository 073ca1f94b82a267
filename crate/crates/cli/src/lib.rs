//! The `qed` command line: build, verify, plot and flow subcommands over the
//! constructions in `qed_core`.

pub mod emit;

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use qed_core::flow::{extract_streamlines, FlowField};
use qed_core::mapping::{CurveLabel, Topology};
use qed_core::verify::{kernel_selftest, verify_map, VerificationReport, VerifyOptions};
use qed_core::{BoundaryTrace, Complex, ConstructedMap, DomainKind, DomainSpec, Normalization};

use emit::{clip, Polyline, Window};

#[derive(Debug, Parser)]
#[command(name = "qed", version, about = "Quasi-exceptional domains from elliptic functions")]
pub struct RunConfig {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Construct the map and print a JSON summary of its constants.
    Build(Options),
    /// Run the full property battery and write the JSON report.
    Verify(Options),
    /// Trace the boundary and write it as SVG or CSV.
    Plot(Options),
    /// Streamlines, circulations and far-field velocities.
    Flow(Options),
    /// Only the elliptic kernel identities.
    KernelSelftest(Options),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum TypeArg {
    I,
    Ii,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum NormalizationArg {
    /// `F = 2 v_z B`, unit boundary speed.
    Unit,
    /// `F` equal to the σ quotient.
    Raw,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Svg,
    Json,
}

#[derive(Debug, Clone, Args)]
pub struct Options {
    #[arg(long = "type", value_enum, default_value = "ii")]
    pub kind: TypeArg,
    /// `ω`; the real period of the parameter rectangle is `4ω`.
    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
    pub omega: f64,
    /// `Im ω′`, the height of the parameter rectangle.
    #[arg(long = "omega-prime", default_value_t = 2.0, allow_negative_numbers = true)]
    pub omega_prime: f64,
    /// Interior pole height (Type II only).
    #[arg(long, default_value_t = 0.5, allow_negative_numbers = true)]
    pub epsilon: f64,
    /// Boundary samples per side.
    #[arg(long, default_value_t = 1024)]
    pub samples: usize,
    #[arg(long, value_enum, default_value = "unit")]
    pub normalization: NormalizationArg,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// Output file; standard output when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Interior streamline levels for `flow`.
    #[arg(long, default_value_t = 12)]
    pub levels: usize,
    /// Grid columns for `flow`; rows are half as many.
    #[arg(long, default_value_t = 160)]
    pub grid: usize,
    /// Periods drawn for Type II plots.
    #[arg(long, default_value_t = 2)]
    pub periods: usize,
    #[arg(long, hide = true)]
    pub inject_error: bool,
}

impl Options {
    pub fn spec(&self) -> DomainSpec {
        DomainSpec {
            kind: match self.kind {
                TypeArg::I => DomainKind::TypeI,
                TypeArg::Ii => DomainKind::TypeII,
            },
            omega: self.omega,
            omega_prime_imag: self.omega_prime,
            epsilon: (self.kind == TypeArg::Ii).then_some(self.epsilon),
            samples_per_side: self.samples,
            normalization: match self.normalization {
                NormalizationArg::Unit => Normalization::NeumannUnit,
                NormalizationArg::Raw => Normalization::RawSigmaRatio,
            },
        }
    }

    fn writer(&self) -> Result<Box<dyn Write>> {
        Ok(match &self.out {
            Some(p) => Box::new(BufWriter::new(
                File::create(p).with_context(|| format!("cannot create {}", p.display()))?,
            )),
            None => Box::new(BufWriter::new(io::stdout().lock())),
        })
    }

    fn format_or(&self, default: Format, allowed: &[Format]) -> Result<Format> {
        let f = self.format.unwrap_or(default);
        if !allowed.contains(&f) {
            bail!("format {f:?} is not available here; choose one of {allowed:?}");
        }
        Ok(f)
    }
}

/// Exit status of a completed run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Success,
    ChecksFailed,
}

#[derive(Debug, Serialize)]
struct BuildSummary<'a> {
    schema: u32,
    spec: &'a DomainSpec,
    warnings: &'a [String],
    c0: f64,
    c_pole: f64,
    boundary_constants: [f64; 2],
    residue_v: Option<f64>,
    scale: Complex,
    base_point: Complex,
    translation_period: Option<Complex>,
    topology: Topology,
    crossings: usize,
}

/// Builds the map for `opts`, optionally perturbed for the exit-code control.
pub fn construct(opts: &Options) -> Result<ConstructedMap> {
    let mut cm = ConstructedMap::build(&opts.spec()).context("invalid domain parameters")?;
    if opts.inject_error {
        cm.perturb_scale(1.001);
    }
    Ok(cm)
}

fn label_id(label: CurveLabel) -> String {
    match label {
        CurveLabel::BottomLeftArc => "bottom_left_arc".into(),
        CurveLabel::BottomRightArc => "bottom_right_arc".into(),
        CurveLabel::TopClosed => "top".into(),
        CurveLabel::Bubble(k) => format!("bubble{k}"),
    }
}

/// The boundary polylines as plotted: Type II rows rotated horizontal and
/// repeated over `periods`, Type I curves as traced.
pub fn boundary_polylines(trace: &BoundaryTrace, periods: usize) -> Vec<Polyline> {
    match trace.period {
        Some(_) => {
            let per = trace.curves.len();
            trace
                .aligned_periods(periods)
                .into_iter()
                .enumerate()
                .map(|(k, (label, points))| Polyline {
                    id: format!("{}.p{}", label_id(label), k / per),
                    points,
                    closed: trace.curves[k % per].closed,
                })
                .collect()
        }
        None => trace
            .curves
            .iter()
            .map(|c| Polyline {
                id: label_id(c.label),
                points: c.points.clone(),
                closed: c.closed,
            })
            .collect(),
    }
}

/// Window for Type I drawings: a square around the closed curves and the
/// apexes (middle samples) of the unbounded arcs, enlarged by 60%.
pub fn type_one_window(curves: &[Polyline]) -> Option<Window> {
    let closed = curves.iter().filter(|c| c.closed).flat_map(|c| c.points.iter().copied());
    let apexes = curves.iter().filter(|c| !c.closed).map(|c| c.points[c.points.len() / 2]);
    Window::bounding(closed.chain(apexes)).map(|w| w.squared().scaled(1.6))
}

fn clip_all(curves: Vec<Polyline>, window: Option<Window>) -> Vec<Polyline> {
    match window {
        Some(w) => curves.iter().flat_map(|c| clip(c, &w)).collect(),
        None => curves,
    }
}

fn flow_polylines(cm: &ConstructedMap, field: &FlowField, periods: usize) -> Vec<Polyline> {
    let rot = cm.alignment();
    let period = cm.translation_period();
    let copies = if period.is_some() { periods.max(1) } else { 1 };
    let mut out = Vec::new();
    for (i, s) in field.streamlines.iter().enumerate() {
        let tag = if s.boundary {
            "boundary"
        } else if s.saddle {
            "saddle"
        } else {
            "level"
        };
        for (j, branch) in s.branches.iter().enumerate() {
            for k in 0..copies {
                let shift = period.map_or(Complex::new(0.0, 0.0), |p| p * k as f64);
                out.push(Polyline {
                    id: format!("{tag}{i}.b{j}.p{k}"),
                    points: branch.iter().map(|z| (z + shift) * rot).collect(),
                    closed: s.boundary && (cm.kind() == DomainKind::TypeII || s.level == cm.roof.boundary_constants.top),
                });
            }
        }
    }
    out
}

fn write_json<T: Serialize>(opts: &Options, value: &T) -> Result<()> {
    let mut w = opts.writer()?;
    serde_json::to_writer_pretty(&mut w, value)?;
    writeln!(w)?;
    w.flush()?;
    Ok(())
}

fn write_report(opts: &Options, report: &VerificationReport) -> Result<Outcome> {
    opts.format_or(Format::Json, &[Format::Json])?;
    write_json(opts, report)?;
    for c in report.failures() {
        eprintln!("FAIL {}: residual {:e}, tolerance {:e} ({})", c.name, c.residual, c.tolerance, c.property);
    }
    Ok(if report.pass { Outcome::Success } else { Outcome::ChecksFailed })
}

pub fn run(config: &RunConfig) -> Result<Outcome> {
    match &config.command {
        Command::KernelSelftest(opts) => write_report(opts, &kernel_selftest(opts.seed)),
        Command::Verify(opts) => {
            let cm = construct(opts)?;
            let vo = VerifyOptions {
                seed: opts.seed,
                inject_error: opts.inject_error,
                ..VerifyOptions::default()
            };
            let report = verify_map(&cm, &vo);
            write_report(opts, &report)
        }
        Command::Build(opts) => {
            opts.format_or(Format::Json, &[Format::Json])?;
            let cm = construct(opts)?;
            let trace = cm.trace_raw(opts.samples)?;
            let bc = cm.roof.boundary_constants;
            let summary = BuildSummary {
                schema: 1,
                spec: &cm.spec,
                warnings: &cm.warnings,
                c0: cm.roof.c0,
                c_pole: cm.roof.c_pole,
                boundary_constants: [bc.bottom, bc.top],
                residue_v: cm.roof.residue(),
                scale: cm.scale,
                base_point: cm.base,
                translation_period: cm.translation_period(),
                topology: trace.topology(),
                crossings: trace.crossings().len(),
            };
            write_json(opts, &summary)?;
            Ok(Outcome::Success)
        }
        Command::Plot(opts) => {
            let format = opts.format_or(Format::Svg, &[Format::Svg, Format::Csv])?;
            let cm = construct(opts)?;
            let trace = cm.trace_boundary()?;
            let curves = boundary_polylines(&trace, opts.periods);
            let mut w = opts.writer()?;
            match format {
                Format::Csv => emit::write_csv(&mut w, &curves)?,
                _ => {
                    let window = match cm.kind() {
                        DomainKind::TypeI => type_one_window(&curves),
                        DomainKind::TypeII => None,
                    };
                    w.write_all(emit::svg(&clip_all(curves, window)).as_bytes())?;
                }
            }
            w.flush()?;
            Ok(Outcome::Success)
        }
        Command::Flow(opts) => {
            let format = opts.format_or(Format::Svg, &[Format::Svg, Format::Csv, Format::Json])?;
            let cm = construct(opts)?;
            let field = extract_streamlines(&cm, opts.levels, opts.grid.max(8), (opts.grid / 2).max(4))?;
            if format == Format::Json {
                write_json(opts, &field)?;
                return Ok(Outcome::Success);
            }
            let curves = flow_polylines(&cm, &field, opts.periods);
            let mut w = opts.writer()?;
            match format {
                Format::Csv => emit::write_csv(&mut w, &curves)?,
                _ => {
                    let window = match cm.kind() {
                        DomainKind::TypeI => type_one_window(&curves),
                        DomainKind::TypeII => {
                            let boundary: Vec<Polyline> = curves.iter().filter(|c| c.closed).cloned().collect();
                            Window::bounding(boundary.iter().flat_map(|c| c.points.iter().copied())).map(|w| w.scaled(1.6))
                        }
                    };
                    w.write_all(emit::svg(&clip_all(curves, window)).as_bytes())?;
                }
            }
            w.flush()?;
            Ok(Outcome::Success)
        }
    }
}
