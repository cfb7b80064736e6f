use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use holoembed::basin::{basin_raster_run, basin_trace};
use holoembed::config::{load, out_dir, BasinConfig, LatticeSpec, Overrides, TorusConfig};
use holoembed::jordan::JordanConfig;
use holoembed::wp::{wp_eval, wp_verify, WpVerifyConfig};
use holoembed::{pipeline_basin_demo, pipeline_jordan, pipeline_torus2, Result, RunArtifacts};
use holoembed_core::basin::{BasinQuery, Membership, Slice};
use holoembed_core::Cx64;

#[derive(Parser)]
#[command(name = "holoembed", version, about = "Proper holomorphic embeddings of bordered tori into C^2")]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args)]
struct Common {
    /// RNG seed, overriding the config.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Torus grid spacing, overriding the config.
    #[arg(long, global = true)]
    density: Option<f64>,
    /// Also write SVG figures.
    #[arg(long, global = true)]
    svg: bool,
}

#[derive(Subcommand)]
enum Cmd {
    /// Embed a torus with two removed discs or points.
    Torus2 {
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Mark a point on a surface with one Jordan boundary curve.
    Jordan {
        #[arg(long)]
        surface: PathBuf,
    },
    /// Basin of attraction: the induction demo, or queries on a sequence.
    #[command(args_conflicts_with_subcommands = true)]
    Basin {
        #[arg(long)]
        config: Option<PathBuf>,
        #[command(subcommand)]
        query: Option<BasinCmd>,
    },
    /// The Weierstrass function.
    Wp {
        #[command(subcommand)]
        cmd: WpCmd,
    },
}

#[derive(Args)]
struct QueryArgs {
    /// Sequence JSON, as written to `sequence.json` by `basin`.
    #[arg(long)]
    sequence: PathBuf,
    #[arg(long, default_value_t = 200)]
    max_iter: usize,
    #[arg(long, default_value_t = 1e-3)]
    converge_radius: f64,
    #[arg(long, default_value_t = 1e8)]
    escape_radius: f64,
}

impl QueryArgs {
    fn query(&self) -> Result<BasinQuery<f64>> {
        Ok(BasinQuery::new(self.max_iter, self.converge_radius, self.escape_radius)?)
    }
}

#[derive(Subcommand)]
enum BasinCmd {
    /// Verdict for every point of a CSV file.
    Trace {
        #[command(flatten)]
        q: QueryArgs,
        /// CSV with columns `id,re_z,im_z,re_w,im_w`.
        #[arg(long)]
        points: PathBuf,
    },
    /// Escape-time raster of a complex line.
    Raster {
        #[command(flatten)]
        q: QueryArgs,
        /// Coordinate that varies: 0 for z, 1 for w.
        #[arg(long, default_value_t = 0)]
        axis: usize,
        /// `x0,x1,y0,y1`.
        #[arg(long, value_delimiter = ',', default_values_t = [-4.0, 4.0, -4.0, 4.0])]
        window: Vec<f64>,
        /// `width,height`.
        #[arg(long, value_delimiter = ',', default_values_t = [100, 100])]
        size: Vec<usize>,
        /// Value of the other coordinate, `re,im`.
        #[arg(long, value_delimiter = ',', default_values_t = [0.0, 0.0])]
        fixed: Vec<f64>,
    },
}

#[derive(Subcommand)]
enum WpCmd {
    /// Print the function and its derivative at points `re,im`.
    Eval {
        #[arg(required = true, allow_hyphen_values = true)]
        z: Vec<String>,
        #[arg(long, value_delimiter = ',', default_values_t = [1.0, 0.0])]
        omega1: Vec<f64>,
        #[arg(long, value_delimiter = ',', default_values_t = [0.0, 1.0])]
        omega2: Vec<f64>,
        #[arg(long, default_value_t = 60)]
        truncation: usize,
    },
    /// Run the correctness suite.
    Verify {
        #[arg(long)]
        config: Option<PathBuf>,
    },
}

fn config_or_default<T: Default + for<'de> serde::Deserialize<'de>>(path: Option<&Path>) -> Result<T> {
    path.map_or_else(|| Ok(T::default()), load)
}

fn parse_cx(s: &str) -> Result<Cx64> {
    let bad = || holoembed::PipelineError::Input(format!("expected re,im, got {s:?}"));
    let (a, b) = s.split_once(',').ok_or_else(bad)?;
    Ok(Cx64::new(a.trim().parse().map_err(|_| bad())?, b.trim().parse().map_err(|_| bad())?))
}

fn summary(a: &RunArtifacts) -> bool {
    let r = &a.report;
    for c in &r.checks.checks {
        println!("{} {} margin {:e}", if c.pass { "PASS" } else { "FAIL" }, c.name, c.margin);
    }
    println!("{}: {} ({} checks), artifacts in {}", r.pipeline, if r.pass { "pass" } else { "FAIL" }, r.checks.len(), a.dir.display());
    r.pass
}

fn verdict_summary(ms: &[Membership]) -> bool {
    let conv = ms.iter().filter(|m| m.converged()).count();
    let esc = ms.iter().filter(|m| matches!(m, Membership::Escaped { .. })).count();
    println!("{} points: {conv} converged, {esc} escaped, {} undecided", ms.len(), ms.len() - conv - esc);
    true
}

fn run(cli: Cli) -> Result<bool> {
    let c = &cli.common;
    let ov = Overrides { seed: c.seed, density: c.density };
    let out = c.out.as_deref();
    match cli.cmd {
        Cmd::Torus2 { config } => {
            let mut cfg: TorusConfig = config_or_default(config.as_deref())?;
            cfg.apply(&ov);
            Ok(summary(&pipeline_torus2(&cfg, &out_dir(out, "out/torus2"), c.svg)?))
        }
        Cmd::Jordan { surface } => {
            let mut cfg: JordanConfig = load(&surface)?;
            if let Some(s) = c.seed {
                cfg.normalize.seed = s;
            }
            Ok(summary(&pipeline_jordan(&cfg, &out_dir(out, "out/jordan"), c.svg)?))
        }
        Cmd::Basin { config, query: None } => {
            let mut cfg: BasinConfig = config_or_default(config.as_deref())?;
            cfg.apply(&ov);
            Ok(summary(&pipeline_basin_demo(&cfg, &out_dir(out, "out/basin"), c.svg)?))
        }
        Cmd::Basin { query: Some(BasinCmd::Trace { q, points }), .. } => {
            let ms = basin_trace(&q.sequence, &points, &q.query()?, &out_dir(out, "out/basin_trace"))?;
            Ok(verdict_summary(&ms))
        }
        Cmd::Basin { query: Some(BasinCmd::Raster { q, axis, window, size, fixed }), .. } => {
            if window.len() != 4 || size.len() != 2 || fixed.len() != 2 {
                return Err(holoembed::PipelineError::Input("expected --window x0,x1,y0,y1 --size w,h --fixed re,im".into()));
            }
            if axis > 1 {
                return Err(holoembed::PipelineError::Input(format!("axis must be 0 or 1, got {axis}")));
            }
            let slice = Slice { axis, fixed: [fixed[0], fixed[1]], window: [window[0], window[1], window[2], window[3]], width: size[0], height: size[1] };
            let ms = basin_raster_run(&q.sequence, &slice, &q.query()?, &out_dir(out, "out/basin_raster"), c.svg)?;
            Ok(verdict_summary(&ms))
        }
        Cmd::Wp { cmd: WpCmd::Eval { z, omega1, omega2, truncation } } => {
            if omega1.len() != 2 || omega2.len() != 2 {
                return Err(holoembed::PipelineError::Input("expected --omega1 re,im --omega2 re,im".into()));
            }
            let lattice = LatticeSpec { omega1: Cx64::new(omega1[0], omega1[1]), omega2: Cx64::new(omega2[0], omega2[1]) };
            let zs = z.iter().map(|s| parse_cx(s)).collect::<Result<Vec<_>>>()?;
            let vals = wp_eval(&lattice, truncation, &zs)?;
            println!("{}", serde_json::to_string_pretty(&vals).expect("serializable"));
            Ok(true)
        }
        Cmd::Wp { cmd: WpCmd::Verify { config } } => {
            let mut cfg: WpVerifyConfig = config_or_default(config.as_deref())?;
            if let Some(s) = c.seed {
                cfg.seed = s;
            }
            Ok(summary(&wp_verify(&cfg, &out_dir(out, "out/wp"))?))
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
