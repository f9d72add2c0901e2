mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use critcircle::bounds::{
    fit_cubic, fit_linear_growth, sample_d1_upper, saddle_node_probe, tracker_campaign, GridSpec, SampleDomain,
    Tracker,
};
use critcircle::circle_map::{closest_returns, Family};
use critcircle::exec::Exec;
use critcircle::number_theory::continued_fraction;
use critcircle::siegel::{build_puzzle, density_probe, remeasure, render, symmetry_audit, PuzzleConfig, RasterSpec};
use critcircle::{LabError, Result};
use serde_json::json;

use config::{parse_grid, parse_levels, CampaignConfig};
use output::{num, Sink};

#[derive(Parser)]
#[command(name = "critcircle", version, about = "Critical circle map laboratory")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
    #[command(flatten)]
    flags: Flags,
}

#[derive(Clone, Copy, ValueEnum)]
enum FamilyArg {
    Standard,
    Blaschke,
}

#[derive(Args)]
struct Flags {
    #[arg(long, global = true)]
    family: Option<FamilyArg>,
    /// Rotation number: `golden`, a decimal, or quotients `PREFIX;PERIOD`.
    #[arg(long, global = true)]
    theta: Option<String>,
    /// Family parameter; overrides --theta.
    #[arg(long, global = true)]
    param: Option<f64>,
    /// Inclusive level range `a..b`.
    #[arg(long, global = true, value_parser = parse_levels)]
    levels: Option<(usize, usize)>,
    #[arg(long, global = true)]
    eps: Option<f64>,
    #[arg(long = "cutoff-B", global = true)]
    cutoff_b: Option<f64>,
    #[arg(long = "k-good", global = true)]
    k_good: Option<f64>,
    /// Radii x angles, e.g. `32x64`.
    #[arg(long, global = true, value_parser = parse_grid)]
    grid: Option<GridSpec>,
    #[arg(long, global = true)]
    samples: Option<usize>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true)]
    res: Option<usize>,
    #[arg(long, global = true)]
    budget: Option<usize>,
    #[arg(long = "max-n", global = true)]
    max_n: Option<usize>,
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// JSON file whose keys override the flags.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Run on one thread; output is identical either way.
    #[arg(long, global = true)]
    sequential: bool,
}

#[derive(Subcommand)]
enum Cmd {
    /// Continued fraction quotients and convergents of x in (0,1).
    Cf {
        #[arg(allow_hyphen_values = true)]
        x: f64,
        #[arg(long, default_value_t = 10)]
        depth: usize,
    },
    /// Closest return times and interval lengths.
    Returns,
    #[command(subcommand)]
    Bounds(BoundsCmd),
    #[command(subcommand)]
    Siegel(SiegelCmd),
}

#[derive(Subcommand)]
enum BoundsCmd {
    /// Backward-orbit tracker over random points of D_1.
    Campaign,
    /// Linear growth envelope of the univalent factor.
    Lin {
        /// Sample D_alpha instead of the Euclidean disc.
        #[arg(long)]
        alpha: Option<f64>,
    },
    /// Cubic lower bound on the rescaled return map.
    Cubic,
    /// Near-parabolic multiplier behind each return.
    Saddle,
}

#[derive(Subcommand)]
enum SiegelCmd {
    /// Solve for the Blaschke parameter.
    Tau,
    /// Classified raster as PPM plus class counts.
    Julia {
        #[arg(long)]
        audit: bool,
    },
    /// Puzzle pieces P_0..P_{max-n}.
    Puzzle,
    /// Empty-space fractions at level max-n.
    Density {
        /// Remeasure on a raster of twice the resolution.
        #[arg(long)]
        double: bool,
    },
}

impl Flags {
    fn config(&self) -> Result<CampaignConfig> {
        let mut c = CampaignConfig::default();
        if let Some(f) = self.family {
            c.family = match f {
                FamilyArg::Standard => Family::Standard,
                FamilyArg::Blaschke => Family::BlaschkeCircle,
            };
        }
        if let Some(t) = &self.theta {
            c.theta = t.clone();
        }
        c.param = self.param.or(c.param);
        c.levels = self.levels.unwrap_or(c.levels);
        c.eps = self.eps.unwrap_or(c.eps);
        c.cutoff_b = self.cutoff_b.unwrap_or(c.cutoff_b);
        c.k_good = self.k_good.unwrap_or(c.k_good);
        c.grid = self.grid.unwrap_or(c.grid);
        c.samples = self.samples.unwrap_or(c.samples);
        c.seed = self.seed.unwrap_or(c.seed);
        c.res = self.res.unwrap_or(c.res);
        c.budget = self.budget.unwrap_or(c.budget);
        c.max_n = self.max_n.unwrap_or(c.max_n);
        c.out = self.out.clone();
        if let Some(path) = &self.config {
            c = c.overlay_file(path)?;
        }
        Ok(c)
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    let exec = if cli.flags.sequential {
        Exec::Sequential
    } else {
        Exec::Parallel
    };
    let res = cli.flags.config().and_then(|cfg| run(&cli.cmd, &cfg, exec));
    match res {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_usage() { 2 } else { 3 })
        }
    }
}

fn run(cmd: &Cmd, cfg: &CampaignConfig, exec: Exec) -> Result<()> {
    match cmd {
        Cmd::Cf { x, depth } => cmd_cf(cfg, *x, *depth),
        Cmd::Returns => cmd_returns(cfg),
        Cmd::Bounds(b) => match b {
            BoundsCmd::Campaign => cmd_campaign(cfg, exec),
            BoundsCmd::Lin { alpha } => cmd_lin(cfg, *alpha, exec),
            BoundsCmd::Cubic => cmd_cubic(cfg, exec),
            BoundsCmd::Saddle => cmd_saddle(cfg),
        },
        Cmd::Siegel(s) => match s {
            SiegelCmd::Tau => cmd_tau(cfg),
            SiegelCmd::Julia { audit } => cmd_julia(cfg, *audit, exec),
            SiegelCmd::Puzzle => cmd_puzzle(cfg, exec),
            SiegelCmd::Density { double } => cmd_density(cfg, *double, exec),
        },
    }
}

fn cmd_cf(cfg: &CampaignConfig, x: f64, depth: usize) -> Result<()> {
    let rho = continued_fraction(x, depth)?;
    let rows: Vec<_> = rho
        .quotients
        .iter()
        .enumerate()
        .map(|(m, r)| vec![m.to_string(), r.to_string(), rho.p[m + 1].to_string(), rho.q[m + 1].to_string()])
        .collect();
    let mut sink = Sink::new(cfg, "cf")?;
    sink.csv("cf.csv", &["m", "r", "p", "q"], &rows)?;
    sink.finish(json!({ "x": x, "depth": depth, "numerically_rational": rho.numerically_rational }))
}

fn cmd_returns(cfg: &CampaignConfig) -> Result<()> {
    let f = cfg.circle_map()?;
    let levels = cfg.level_range()?;
    let orbit = closest_returns(&f, levels.end() + 1, 0.0)?;
    let mut rows = Vec::new();
    let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
    for m in levels {
        let ratio = orbit.len(m) / orbit.len(m + 1);
        lo = lo.min(ratio);
        hi = hi.max(ratio);
        rows.push(vec![
            m.to_string(),
            orbit.q[m].to_string(),
            orbit.p[m].to_string(),
            num(orbit.delta[m]),
            num(orbit.len(m)),
            num(ratio),
        ]);
    }
    let mut sink = Sink::new(cfg, "returns")?;
    sink.csv("returns.csv", &["m", "q", "p", "delta", "length", "ratio"], &rows)?;
    sink.finish(json!({ "param": f.param, "ratio_min": lo, "ratio_max": hi }))
}

fn cmd_campaign(cfg: &CampaignConfig, exec: Exec) -> Result<()> {
    let f = cfg.circle_map()?;
    let mut traces = Vec::new();
    let mut events = Vec::new();
    let mut summaries = Vec::new();
    for n in cfg.level_range()? {
        let tracker = Tracker::new(&f, n, cfg.eps, cfg.k_good)?;
        let samples = sample_d1_upper(tracker.discs[0], cfg.samples, cfg.seed);
        let camp = tracker_campaign(&tracker, &samples, exec);
        for (k, (z, t)) in camp.samples.iter().zip(&camp.traces).enumerate() {
            let mut row = vec![n.to_string(), k.to_string(), num(z.re), num(z.im)];
            match t {
                Ok(t) => {
                    let outcome = serde_json::to_value(t.outcome).expect("outcome");
                    row.extend([
                        outcome.as_str().unwrap_or_default().to_string(),
                        t.events.len().to_string(),
                        num(t.forward_residual),
                        String::new(),
                    ]);
                    for e in &t.events {
                        events.push(vec![
                            n.to_string(),
                            k.to_string(),
                            e.i.to_string(),
                            e.level.to_string(),
                            e.label.name().to_string(),
                            num(e.angle),
                            num(e.distance),
                        ]);
                    }
                }
                Err(msg) => row.extend(["branch-failure".into(), "0".into(), String::new(), msg.clone()]),
            }
            traces.push(row);
        }
        summaries.push(json!({ "n": n, "summary": camp.summary }));
    }
    let mut sink = Sink::new(cfg, "campaign")?;
    sink.csv(
        "campaign_traces.csv",
        &["n", "sample", "re", "im", "outcome", "events", "forward_residual", "error"],
        &traces,
    )?;
    if cfg.out.is_some() {
        sink.csv(
            "campaign_events.csv",
            &["n", "sample", "i", "level", "label", "angle", "distance"],
            &events,
        )?;
    }
    sink.finish(json!({ "param": f.param, "levels": summaries }))
}

fn cmd_lin(cfg: &CampaignConfig, alpha: Option<f64>, exec: Exec) -> Result<()> {
    let f = cfg.circle_map()?;
    let domain = alpha.map_or(SampleDomain::D1, SampleDomain::DAlpha);
    let mut rows = Vec::new();
    for n in cfg.level_range()? {
        let fit = fit_linear_growth(&f, n, cfg.grid, domain, exec)?;
        rows.push(vec![
            n.to_string(),
            num(fit.c1),
            num(fit.c2),
            fit.attempted.to_string(),
            fit.failed.to_string(),
        ]);
    }
    let mut sink = Sink::new(cfg, "lin")?;
    sink.csv("lin.csv", &["n", "c1", "c2", "attempted", "failed"], &rows)?;
    sink.finish(json!({ "param": f.param, "domain": domain }))
}

/// Cutoffs reported alongside the configured one.
const B_SENSITIVITY: [f64; 3] = [2.0, 5.0, 10.0];

fn cmd_cubic(cfg: &CampaignConfig, exec: Exec) -> Result<()> {
    let f = cfg.circle_map()?;
    let mut rows = Vec::new();
    for n in cfg.level_range()? {
        let fit = fit_cubic(&f, n, cfg.grid, cfg.cutoff_b, exec)?;
        let mut row = vec![
            n.to_string(),
            num(fit.b),
            num(fit.c),
            num(fit.c_max),
            fit.samples.len().to_string(),
            fit.attempted.to_string(),
            fit.failed.to_string(),
        ];
        for b in B_SENSITIVITY {
            // a cutoff beyond the rescaled disc leaves nothing to fit
            row.push(fit_cubic(&f, n, cfg.grid, b, exec).map_or(String::new(), |s| num(s.c)));
        }
        rows.push(row);
    }
    let mut sink = Sink::new(cfg, "cubic")?;
    sink.csv(
        "cubic.csv",
        &["n", "b", "c", "c_max", "retained", "attempted", "failed", "c_b2", "c_b5", "c_b10"],
        &rows,
    )?;
    sink.finish(json!({ "param": f.param }))
}

fn cmd_saddle(cfg: &CampaignConfig) -> Result<()> {
    let f = cfg.circle_map()?;
    let mut rows = Vec::new();
    for m in cfg.level_range()? {
        let s = saddle_node_probe(&f, m)?;
        rows.push(vec![
            m.to_string(),
            s.q.to_string(),
            num(s.fixed_point.re),
            num(s.fixed_point.im),
            num(s.multiplier.re),
            num(s.multiplier.im),
            num((s.multiplier - 1.0).norm()),
        ]);
    }
    let mut sink = Sink::new(cfg, "saddle")?;
    sink.csv(
        "saddle.csv",
        &["m", "q", "fixed_re", "fixed_im", "mult_re", "mult_im", "dist_to_one"],
        &rows,
    )?;
    sink.finish(json!({ "param": f.param }))
}

fn cmd_tau(cfg: &CampaignConfig) -> Result<()> {
    let f = cfg.blaschke()?;
    let beta = f.fixed_point_beta()?;
    let rows = vec![vec![num(f.theta), num(f.tau), num(beta.re), num(beta.im)]];
    let mut sink = Sink::new(cfg, "tau")?;
    sink.csv("tau.csv", &["theta", "tau", "beta_re", "beta_im"], &rows)?;
    sink.finish(json!({ "theta": f.theta, "tau": f.tau }))
}

fn raster_spec(cfg: &CampaignConfig, resolution: usize) -> Result<RasterSpec> {
    if resolution < 16 || cfg.budget == 0 {
        return Err(LabError::Domain("resolution must be >= 16 and budget positive".into()));
    }
    Ok(RasterSpec {
        resolution,
        budget: cfg.budget,
        ..RasterSpec::default()
    })
}

fn cmd_julia(cfg: &CampaignConfig, audit: bool, exec: Exec) -> Result<()> {
    let f = cfg.blaschke()?;
    let spec = raster_spec(cfg, cfg.res)?;
    let raster = render(&f, &spec, exec);
    let counts: Vec<_> = critcircle::siegel::PixelClass::ALL
        .iter()
        .map(|c| vec![c.name().to_string(), raster.count(*c).to_string()])
        .collect();
    let mut sink = Sink::new(cfg, "julia")?;
    if cfg.out.is_some() {
        sink.bytes("julia.ppm", &raster.to_ppm())?;
    }
    sink.csv("julia_counts.csv", &["class", "pixels"], &counts)?;
    let audit = audit.then(|| symmetry_audit(&f, &raster, exec));
    sink.finish(json!({ "tau": f.tau, "spec": spec, "symmetry": audit }))
}

fn puzzle_config(cfg: &CampaignConfig) -> Result<PuzzleConfig> {
    if cfg.res < 64 {
        return Err(LabError::Domain("puzzle resolution must be >= 64".into()));
    }
    Ok(PuzzleConfig {
        resolution: cfg.res,
        ..PuzzleConfig::default()
    })
}

fn cmd_puzzle(cfg: &CampaignConfig, exec: Exec) -> Result<()> {
    let f = cfg.blaschke()?;
    let puzzle = build_puzzle(&f, cfg.max_n, &puzzle_config(cfg)?, exec)?;
    let mut sink = Sink::new(cfg, "puzzle")?;
    let rows: Vec<_> = puzzle
        .pieces
        .iter()
        .map(|p| {
            let ratio = if p.n == 0 { f64::NAN } else { p.diameter / p.trace_chord() };
            vec![
                p.n.to_string(),
                p.q.to_string(),
                p.p.to_string(),
                num(p.trace_end),
                num(p.trace_residual),
                num(p.trace_chord()),
                num(p.diameter),
                num(ratio),
                num(p.inscribed_radius),
                p.pixels.to_string(),
            ]
        })
        .collect();
    sink.csv(
        "puzzle.csv",
        &[
            "n", "q", "p", "trace_end", "trace_residual", "trace_chord", "diameter", "ratio", "inscribed_radius",
            "pixels",
        ],
        &rows,
    )?;
    if cfg.out.is_some() {
        for p in &puzzle.pieces {
            let pts: Vec<_> = p.boundary.iter().map(|z| vec![num(z.re), num(z.im)]).collect();
            sink.csv(&format!("piece_{}.csv", p.n), &["re", "im"], &pts)?;
        }
    }
    sink.finish(json!({ "tau": f.tau, "max_n": cfg.max_n }))
}

fn cmd_density(cfg: &CampaignConfig, double: bool, exec: Exec) -> Result<()> {
    let f = cfg.blaschke()?;
    let n = cfg.max_n;
    let puzzle = build_puzzle(&f, n, &puzzle_config(cfg)?, exec)?;
    let piece = &puzzle.pieces[n];
    let raster = render(&f, &raster_spec(cfg, cfg.res)?, exec);
    let report = density_probe(&f, &raster, piece, cfg.samples, cfg.seed, exec)?;
    let fine = if double {
        let r2 = render(&f, &raster_spec(cfg, 2 * cfg.res)?, exec);
        Some(remeasure(&report, &r2)?)
    } else {
        None
    };
    let rows: Vec<_> = report
        .samples
        .iter()
        .enumerate()
        .map(|(k, s)| {
            let mut row = vec![
                num(s.z.re),
                num(s.z.im),
                s.entry.to_string(),
                num(s.expansion),
                num(s.radius),
                num(s.radius_px),
                num(s.fraction),
                s.critical_hits.to_string(),
            ];
            if let Some(r) = &fine {
                row.push(r.samples.get(k).map_or(String::new(), |s| num(s.fraction)));
            }
            row
        })
        .collect();
    let mut header = vec![
        "re", "im", "entry", "expansion", "radius", "radius_px", "fraction", "critical_hits",
    ];
    if fine.is_some() {
        header.push("fraction_doubled");
    }
    let mut sink = Sink::new(cfg, "density")?;
    sink.csv("density.csv", &header, &rows)?;
    sink.finish(json!({
        "tau": f.tau,
        "n": n,
        "min_fraction": report.min_fraction,
        "mean_fraction": report.mean_fraction,
        "skipped_no_entry": report.skipped_no_entry,
        "skipped_small": report.skipped_small,
        "skipped_edge": report.skipped_edge,
        "min_fraction_doubled": fine.as_ref().map(|r| r.min_fraction),
    }))
}
