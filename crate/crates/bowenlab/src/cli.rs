//! Command-line surface. Thin argument handling here; the math lives in
//! the library modules. Exit codes: 0 success, 1 input trouble, 2 a
//! theorem-level assertion failed, 3 the library contradicted itself.

use crate::cocycle::{
    eigen_moduli, markov_exponents, sampled_exponents, volume_exponents, Flavor, VolumeOptions,
};
use crate::dimension::{bowen_root, box_dimension};
use crate::error::{input, Error, Result};
use crate::exceptional::{
    avoid_series, check_theorem_a, check_theorem_b, BoundaryRule, Target,
};
use crate::map_models::{Model, ModelConfig};
use crate::pressure::{pressure_limit, pressure_separated};
use crate::report::{avoid_table, pressure_grid_table, sig9};
use crate::selftest;
use crate::symbolic::coding;
use clap::{Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use std::path::{Path, PathBuf};

#[derive(Parser, Debug)]
#[command(
    name = "bowenlab",
    version,
    about = "Pressure, Bowen roots and avoidance repellers for expanding maps"
)]
struct Cli {
    /// Seed for the randomized consistency checks.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum FamilyArg {
    /// Subadditive family built from the smallest singular values.
    Sub,
    /// Superadditive family built from the largest singular values.
    Super,
}

impl From<FamilyArg> for Flavor {
    fn from(f: FamilyArg) -> Flavor {
        match f {
            FamilyArg::Sub => Flavor::Sub,
            FamilyArg::Super => Flavor::Super,
        }
    }
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum MethodArg {
    Spectral,
    Separated,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum TheoremArg {
    A,
    B,
    Both,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum MeasureArg {
    Parry,
    Lebesgue,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Topological pressure at one s or along an s-grid.
    Pressure {
        #[arg(long)]
        model: PathBuf,
        #[arg(long, value_enum)]
        family: FamilyArg,
        /// Single evaluation point.
        #[arg(long)]
        s: Option<f64>,
        /// Grid lo:hi:points; emits CSV with both families.
        #[arg(long = "s-grid")]
        s_grid: Option<String>,
        #[arg(long, value_enum, default_value_t = MethodArg::Spectral)]
        method: MethodArg,
        /// Cylinder depth (spectral sweep cap, or n for the separated set).
        #[arg(long)]
        depth: Option<usize>,
        /// Separation radius for the separated-set method.
        #[arg(long)]
        eps: Option<f64>,
    },
    /// Bowen-equation root of the chosen family.
    Root {
        #[arg(long)]
        model: PathBuf,
        #[arg(long, value_enum)]
        family: FamilyArg,
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
    },
    /// Avoidance series: forbid the target's cylinders at each depth.
    Avoid {
        #[arg(long)]
        model: PathBuf,
        /// Comma-separated coordinates of the avoided point.
        #[arg(long, required_unless_present = "itinerary", conflicts_with = "itinerary")]
        target: Option<String>,
        /// Periodic symbol block naming the avoided point symbolically.
        #[arg(long)]
        itinerary: Option<String>,
        /// Inclusive depth range lo:hi.
        #[arg(long)]
        depths: String,
        /// Which theorem bounds to assert on the rows.
        #[arg(long, value_enum)]
        theorem: Option<TheoremArg>,
        /// CSV destination; stdout when absent.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Lyapunov exponents under the Parry or Lebesgue reference measure.
    Lyapunov {
        #[arg(long)]
        model: PathBuf,
        #[arg(long, value_enum, default_value_t = MeasureArg::Parry)]
        measure: MeasureArg,
        /// Markov depth for the Parry measure on sampled models.
        #[arg(long)]
        depth: Option<usize>,
    },
    /// Topological entropy of the model's coding.
    Entropy {
        #[arg(long)]
        model: PathBuf,
    },
    /// Box-counting dimension of the repeller.
    Boxdim {
        #[arg(long)]
        model: PathBuf,
        #[arg(long = "max-depth", default_value_t = 10)]
        max_depth: usize,
    },
    /// Run the built-in invariant suite.
    Selftest,
}

/// Entry point for the binary. Returns the process exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    init_threads();
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                clap::error::ErrorKind::DisplayHelp
                | clap::error::ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            return code;
        }
    };
    match execute(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("{e}");
            e.exit_code()
        }
    }
}

fn init_threads() {
    if let Ok(v) = std::env::var("BOWENLAB_THREADS") {
        if let Ok(n) = v.parse::<usize>() {
            if n >= 1 {
                let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
            }
        }
    }
}

fn load_model(path: &Path) -> Result<Model> {
    let text = std::fs::read_to_string(path)?;
    let cfg: ModelConfig = serde_json::from_str(&text)?;
    Model::new(cfg)
}

fn parse_pair(text: &str) -> Result<(usize, usize)> {
    let parts: Vec<&str> = text.split(':').collect();
    if parts.len() != 2 {
        return input(format!("expected lo:hi, got {text}"));
    }
    let lo = parts[0].parse().map_err(|_| Error::Input(format!("bad integer {}", parts[0])))?;
    let hi = parts[1].parse().map_err(|_| Error::Input(format!("bad integer {}", parts[1])))?;
    Ok((lo, hi))
}

fn parse_grid(text: &str) -> Result<(f64, f64, usize)> {
    let parts: Vec<&str> = text.split(':').collect();
    if parts.len() != 3 {
        return input(format!("expected lo:hi:points, got {text}"));
    }
    let lo: f64 = parts[0].parse().map_err(|_| Error::Input(format!("bad number {}", parts[0])))?;
    let hi: f64 = parts[1].parse().map_err(|_| Error::Input(format!("bad number {}", parts[1])))?;
    let n: usize = parts[2].parse().map_err(|_| Error::Input(format!("bad count {}", parts[2])))?;
    if !(lo.is_finite() && hi.is_finite()) || hi < lo || n < 2 {
        return input("grid needs finite lo <= hi and at least 2 points");
    }
    Ok((lo, hi, n))
}

fn parse_coords(text: &str) -> Result<Vec<f64>> {
    text.split(',')
        .map(|p| {
            p.trim()
                .parse::<f64>()
                .map_err(|_| Error::Input(format!("bad coordinate {p}")))
        })
        .collect()
}

fn parse_symbols(text: &str) -> Result<Vec<u16>> {
    text.split(',')
        .map(|p| {
            p.trim()
                .parse::<u16>()
                .map_err(|_| Error::Input(format!("bad symbol {p}")))
        })
        .collect()
}

fn execute(cli: Cli) -> Result<()> {
    match cli.cmd {
        Cmd::Pressure { model, family, s, s_grid, method, depth, eps } => {
            let model = load_model(&model)?;
            let sft = coding(&model)?;
            match (s, s_grid) {
                (Some(s), None) => {
                    let est = match method {
                        MethodArg::Spectral => {
                            let m = depth.unwrap_or(6).max(sft.window_len());
                            pressure_limit(&model, &sft, family.into(), s, m)?
                        }
                        MethodArg::Separated => pressure_separated(
                            &model,
                            family.into(),
                            s,
                            depth.unwrap_or(8),
                            eps.unwrap_or(0.01),
                        )?,
                    };
                    println!("pressure = {}", sig9(est.value));
                }
                (None, Some(grid)) => {
                    let (lo, hi, n) = parse_grid(&grid)?;
                    let m = depth.unwrap_or(6).max(sft.window_len());
                    let pts: Result<Vec<(f64, f64, f64)>> = (0..n)
                        .into_par_iter()
                        .map(|k| {
                            let s = lo + (hi - lo) * k as f64 / (n - 1) as f64;
                            let p_sub = pressure_limit(&model, &sft, Flavor::Sub, s, m)?.value;
                            let p_sup = pressure_limit(&model, &sft, Flavor::Super, s, m)?.value;
                            Ok((s, p_sub, p_sup))
                        })
                        .collect();
                    print!("{}", pressure_grid_table(&pts?).render()?);
                }
                _ => return input("pass exactly one of --s or --s-grid"),
            }
        }
        Cmd::Root { model, family, tol } => {
            let model = load_model(&model)?;
            let sft = coding(&model)?;
            let flavor: Flavor = family.into();
            let root = bowen_root(&model, &sft, flavor, tol)?;
            match flavor {
                Flavor::Sub => println!("alpha0 = {:.9}", root.root),
                Flavor::Super => println!("s_star = {:.9}", root.root),
            }
        }
        Cmd::Avoid { model, target, itinerary, depths, theorem, out } => {
            let model = load_model(&model)?;
            let tgt = match (target, itinerary) {
                (Some(coords), None) => Target::Point(parse_coords(&coords)?),
                (None, Some(block)) => Target::Itinerary(parse_symbols(&block)?),
                _ => unreachable!("clap enforces exactly one target form"),
            };
            let (lo, hi) = parse_pair(&depths)?;
            let sft = coding(&model)?;
            let rows = avoid_series(&model, &sft, &tgt, BoundaryRule::CoreOnly, lo, hi)?;
            let sampled = model.kind_name() == "perturbed_doubling";
            let check_a = || check_theorem_a(&rows, if sampled { 0.05 } else { 1e-6 });
            let check_b = || -> Result<()> {
                let alpha0_ref = bowen_root(&model, &sft, Flavor::Sub, 1e-10)?.root;
                check_theorem_b(&rows, alpha0_ref)
            };
            match theorem {
                Some(TheoremArg::A) => check_a()?,
                Some(TheoremArg::B) => check_b()?,
                Some(TheoremArg::Both) => {
                    check_a()?;
                    check_b()?;
                }
                None => {}
            }
            let table = avoid_table(model.dim(), &rows);
            match out {
                Some(path) => table.write_to(&path)?,
                None => print!("{}", table.render()?),
            }
        }
        Cmd::Lyapunov { model, measure, depth } => {
            let model = load_model(&model)?;
            let exps = match measure {
                MeasureArg::Parry => {
                    let base = coding(&model)?;
                    let z = match depth {
                        Some(m) if m > 1 => base.recode_window(m)?,
                        _ => base,
                    };
                    let mu = z.parry_measure()?;
                    if model.is_locally_constant() {
                        markov_exponents(&model, &mu)?
                    } else {
                        sampled_exponents(&model, &mu)?
                    }
                }
                MeasureArg::Lebesgue => match model.kind_name() {
                    "linear_toral" => {
                        let a = model.constant_jacobian().expect("toral derivative");
                        eigen_moduli(&a).iter().map(|m| m.ln()).collect()
                    }
                    "perturbed_doubling" => {
                        let opts = VolumeOptions { seed: cli.seed, ..VolumeOptions::default() };
                        volume_exponents(&model, &opts)?
                    }
                    other => {
                        return Err(Error::Domain(format!(
                            "Lebesgue is not invariant for {other} models; use --measure parry"
                        )))
                    }
                },
            };
            for (i, v) in exps.iter().enumerate() {
                println!("lambda_{} = {}", i + 1, sig9(*v));
            }
        }
        Cmd::Entropy { model } => {
            let model = load_model(&model)?;
            let h = coding(&model)?.topological_entropy()?;
            println!("h_top = {}", sig9(h));
        }
        Cmd::Boxdim { model, max_depth } => {
            let model = load_model(&model)?;
            let est = box_dimension(&model, &coding(&model)?, max_depth)?;
            println!("boxdim = {}", sig9(est.dimension));
        }
        Cmd::Selftest => selftest::run_all()?,
    }
    Ok(())
}
