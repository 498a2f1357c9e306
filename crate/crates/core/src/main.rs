use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use rand::Rng;

use prodec::channel::{transmit, Constellation, LlrGrid};
use prodec::codes::{pc_rate, resolve_code, scc_rate, CodeParams, Structure, FIXTURES};
use prodec::de::{
    build_lut, build_sr_lut, de_gldpc, de_scgldpc, gldpc_rows, residual_at, threshold_search,
    write_trajectory_csv, ComponentStats, LutTarget, Recursion, ScConfig, ScSchedule, Transfer,
    WeightRule,
};
use prodec::decoder::{DecodeSchedule, DecoderKind};
use prodec::lut::{CombiningLut, LutSet};
use prodec::pc::{PcDecoder, ProductCode};
use prodec::rng::{stream, Purpose};
use prodec::sim::{self, SweepConfig};
use prodec::soft::PackedMessage;
use prodec::{BchCode, Error, Result};

#[derive(Parser)]
#[command(name = "prodec", version, about = "Product and staircase code decoding lab")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Print the component-code fixtures and the rates they give.
    Codes,
    /// Run a BER sweep described by a TOML file.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        /// CSV output; records go next to it with a `.jsonl` extension.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Suppress per-point progress on stderr.
        #[arg(long)]
        quiet: bool,
    },
    /// Density-evolution trajectories and thresholds.
    De(DeArgs),
    /// Generate combining tables.
    Lut(LutArgs),
    /// Message sizes of the packed ternary format.
    PackDemo {
        #[arg(long, default_value = "C2")]
        code: String,
        #[arg(long, default_value_t = 4.4)]
        snr: f64,
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
}

#[derive(Args)]
struct CodeArgs {
    /// `C1`, `C2`, `C3` or `bch(v=..,t=..,s=..,ext=..)`.
    #[arg(long, default_value = "C2")]
    code: String,
    #[arg(long, default_value = "pc")]
    structure: Structure,
    #[arg(long, default_value_t = 1)]
    m: u32,
    /// Trials per error-count stratum of the component statistics.
    #[arg(long, default_value_t = prodec::de::DEFAULT_SAMPLES)]
    samples: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
}

impl CodeArgs {
    fn params(&self) -> Result<CodeParams> {
        resolve_code(&self.code, self.structure)
    }
}

#[derive(Args)]
struct ScArgs {
    #[arg(long, default_value_t = 50)]
    positions: usize,
    #[arg(long, default_value_t = 7)]
    window: usize,
    /// Iterations per window position (coupled) or per array (product).
    #[arg(long, default_value_t = 10)]
    iterations: usize,
    #[arg(long, default_value = "sweep", value_parser = parse_schedule)]
    schedule: ScSchedule,
}

impl ScArgs {
    fn config(&self) -> ScConfig {
        ScConfig {
            positions: self.positions,
            window: self.window,
            iterations: self.iterations,
            schedule: self.schedule,
        }
    }
}

#[derive(Args)]
struct DeArgs {
    #[command(flatten)]
    code: CodeArgs,
    #[command(flatten)]
    sc: ScArgs,
    /// Run the uncoupled recursion even for staircase codes.
    #[arg(long)]
    uncoupled: bool,
    /// Phases of the uncoupled recursion; defaults to two per iteration.
    #[arg(long)]
    steps: Option<usize>,
    /// Use this constant weight instead of the log-ratio rule.
    #[arg(long)]
    weight: Option<f64>,
    /// Write the trajectory at this Eb/N0 (dB) instead of searching for the
    /// threshold.
    #[arg(long)]
    snr: Option<f64>,
    #[arg(long, default_value_t = prodec::de::DEFAULT_TARGET)]
    target: f64,
    #[arg(long, default_value_t = 1.0)]
    lo: f64,
    #[arg(long, default_value_t = 8.0)]
    hi: f64,
    #[arg(long, default_value_t = 0.005)]
    tol: f64,
    /// Trajectory CSV; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct LutArgs {
    #[command(flatten)]
    code: CodeArgs,
    #[command(flatten)]
    sc: ScArgs,
    #[arg(long, default_value = "ibdd-cr")]
    decoder: DecoderKind,
    /// Eb/N0 points in dB, comma separated.
    #[arg(long, value_delimiter = ',', required = true)]
    snr: Vec<f64>,
    #[arg(long)]
    out: PathBuf,
}

fn parse_schedule(s: &str) -> std::result::Result<ScSchedule, String> {
    match s {
        "sweep" => Ok(ScSchedule::Sweep),
        "parallel" => Ok(ScSchedule::Parallel),
        _ => Err(format!("unknown schedule `{s}` (sweep, parallel)")),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let res = match cli.cmd {
        Cmd::Codes => codes(),
        Cmd::Simulate { config, out, quiet } => simulate(&config, out.as_deref(), quiet),
        Cmd::De(a) => de(&a),
        Cmd::Lut(a) => lut(&a),
        Cmd::PackDemo { code, snr, seed } => pack_demo(&code, snr, seed),
    };
    match res {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}

fn rate(code: &BchCode, structure: Structure) -> f64 {
    match structure {
        Structure::Pc => pc_rate(code),
        Structure::Scc => scc_rate(code),
    }
}

fn codes() -> Result<()> {
    let mut out = io::stdout().lock();
    // rates are listed truncated to three digits, with the exact value after
    writeln!(
        out,
        "{:<3} {:<27} {:>4} {:>4} {:>2} {:>16} {:>5} {:>16} {:>6} {:>6} {:>6} {:>6}",
        "id", "component", "n", "k", "t", "pc_rate", "scc_n", "scc_rate", "hd_pc", "sd_pc", "hd_scc", "sd_scc"
    )?;
    for f in &FIXTURES {
        let c = f.params.build()?;
        let s = f.id.params_for(Structure::Scc).build()?;
        let (rp, rs) = (pc_rate(&c), scc_rate(&s));
        writeln!(
            out,
            "{:<3} {:<27} {:>4} {:>4} {:>2} {:>7.3} ({:.5}) {:>5} {:>7.3} ({:.5}) {:>6.2} {:>6.2} {:>6.2} {:>6.2}",
            f.id.to_string(),
            f.params.to_string(),
            c.n(),
            c.k(),
            c.t(),
            truncate3(rp),
            rp,
            s.n(),
            truncate3(rs),
            rs,
            f.pc_hd_limit_db,
            f.pc_sd_limit_db,
            f.scc_hd_limit_db,
            f.scc_sd_limit_db,
        )?;
    }
    Ok(())
}

fn truncate3(x: f64) -> f64 {
    (x * 1000.0 + 1e-9).floor() / 1000.0
}

fn simulate(config: &Path, out: Option<&Path>, quiet: bool) -> Result<()> {
    let mut cfg = SweepConfig::load(config)?;
    cfg.apply_env()?;
    let records = sim::run_sweep_with(&cfg, |r| {
        if !quiet {
            eprintln!("{} {} {}: {r}", r.code, r.structure, r.decoder);
        }
    })?;
    match out {
        Some(path) => {
            sim::write_csv(BufWriter::new(File::create(path)?), &records)?;
            let jsonl = path.with_extension("jsonl");
            sim::write_jsonl(BufWriter::new(File::create(jsonl)?), &records)?;
        }
        None => sim::write_csv(io::stdout().lock(), &records)?,
    }
    Ok(())
}

fn de(a: &DeArgs) -> Result<()> {
    let code = a.code.params()?.build()?;
    let c = Constellation::new(a.code.m)?;
    let stats = ComponentStats::estimate(&code, a.code.samples, a.code.seed)?;
    let rule = match a.weight {
        Some(w) => WeightRule::Constant(w),
        None => WeightRule::LogRatio,
    };
    let coupled = a.code.structure == Structure::Scc && !a.uncoupled;
    let steps = a.steps.unwrap_or(2 * a.sc.iterations);
    let recursion = if coupled {
        Recursion::Coupled(a.sc.config())
    } else {
        Recursion::Gldpc { steps }
    };
    let r = rate(&code, a.code.structure);
    match a.snr {
        Some(db) => {
            let sigma = c.sigma_for_ebn0(db, r)?;
            let transfer = Transfer::new(&stats, &c, sigma);
            let (rows, residual) = if coupled {
                let tr = de_scgldpc(&transfer, a.sc.config(), rule)?;
                (tr.rows(), tr.residual())
            } else {
                let tr = de_gldpc(&transfer, steps, rule);
                (gldpc_rows(&tr), tr.residual())
            };
            match &a.out {
                Some(p) => write_trajectory_csv(BufWriter::new(File::create(p)?), &rows)?,
                None => write_trajectory_csv(io::stdout().lock(), &rows)?,
            }
            eprintln!("p_ch {:.4e}  residual {residual:.4e}", transfer.p_ch());
        }
        None => {
            let th = threshold_search(
                |db| residual_at(&stats, &c, r, recursion, rule, db),
                a.target,
                a.lo,
                a.hi,
                a.tol,
            )?;
            println!(
                "{} {} {} threshold_db {th:.3}",
                CodeParams::of(&code),
                a.code.structure,
                if coupled { "coupled" } else { "uncoupled" }
            );
        }
    }
    Ok(())
}

fn lut(a: &LutArgs) -> Result<()> {
    if !a.decoder.needs_lut() {
        return Err(Error::Config(format!("decoder {} takes no table", a.decoder)));
    }
    let code = a.code.params()?.build()?;
    let c = Constellation::new(a.code.m)?;
    let stats = ComponentStats::estimate(&code, a.code.samples, a.code.seed)?;
    let target = match a.code.structure {
        Structure::Pc => LutTarget::Product {
            iterations: a.sc.iterations,
        },
        Structure::Scc => LutTarget::Staircase(a.sc.config()),
    };
    let r = rate(&code, a.code.structure);
    let mut set = LutSet::default();
    for &db in &a.snr {
        let sigma = c.sigma_for_ebn0(db, r)?;
        let t = if a.decoder == DecoderKind::IbddSr {
            build_sr_lut(&code, &stats, &c, sigma, target)?
        } else {
            build_lut(&code, &stats, &c, sigma, target)?
        };
        eprintln!(
            "{db:.3} dB  sigma {sigma:.5}  {} weights, {} clamped",
            t.len(),
            t.clamped.len()
        );
        set.tables.push(t);
    }
    set.save(&a.out)
}

fn pack_demo(code: &str, snr: f64, seed: u64) -> Result<()> {
    let mut out = io::stdout().lock();
    writeln!(out, "{:>5} {:>10} {:>10} {:>9}", "n", "plain", "packed", "overhead")?;
    for n in [255usize, 256, 511, 512] {
        writeln!(
            out,
            "{n:>5} {n:>10} {:>10} {:>8.2}%",
            n + 1,
            100.0 * PackedMessage::overhead(n)
        )?;
    }

    let params = resolve_code(code, Structure::Pc)?;
    let component = params.build()?;
    let pc = ProductCode::new(component.clone());
    let c = Constellation::new(1)?;
    let sigma = c.sigma_for_ebn0(snr, pc.rate())?;
    let mut rng = stream(seed, Purpose::Simulation, 0, 0);
    let info: Vec<u8> = (0..pc.info_len()).map(|_| rng.random_range(0..2u8)).collect();
    let block = pc.encode(&info)?;
    let llr = transmit(block.bits(), &c, sigma, &mut rng)?;
    let grid = LlrGrid::new(pc.n(), pc.n(), llr, sigma)?;
    let schedule = DecodeSchedule::default();
    let table = CombiningLut::constant(3.0, schedule.soft_iterations);
    let run = |kind, packed| -> Result<_> {
        PcDecoder::new(&component, kind, schedule, Some(&table))?
            .with_packed_messages(packed)
            .decode(&grid, Some(block.bits()))
    };
    let cr = run(DecoderKind::IbddCr, false)?;
    let bee = run(DecoderKind::Bee, false)?;
    let packed = run(DecoderKind::Bee, true)?;
    let same = bee.decisions == packed.decisions && bee.trajectory == packed.trajectory;
    writeln!(out)?;
    writeln!(out, "one {params} product array at {snr} dB")?;
    writeln!(out, "  ibdd-cr soft-phase bits  {}", cr.soft_message_bits)?;
    writeln!(out, "  bee packed bits          {}", packed.soft_message_bits)?;
    writeln!(out, "  bee ternary (2 bit) bits {}", bee.soft_message_bits)?;
    writeln!(
        out,
        "  measured overhead        {:.3}%",
        100.0 * (packed.soft_message_bits as f64 / cr.soft_message_bits as f64 - 1.0)
    )?;
    writeln!(out, "  packed == unpacked       {same}")?;
    if !same {
        return Err(Error::MalformedMessage("packed decoding diverged".into()));
    }
    Ok(())
}
