use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use anyhow::{ensure, Context};
use clap::{Args, Parser, Subcommand};
use coarse_core::lfcm::uniform_module;
use coarse_core::operator::random_band_operator;
use coarse_core::rigidity::{extract_embedding, ExtractionConfig};
use coarse_core::{DimensionVector, LfcmSpace, MeasurableMap, Scale, Space};
use coarse_lab::experiment::{self, parse_schedule, ExperimentConfig};
use coarse_lab::gen::{self, Equivalence, SpaceKind};
use coarse_lab::json::{JScale, LfcmDoc, ModeDoc, ModuleDoc, OperatorDoc, RelationDoc, StepDoc};
use coarse_lab::{binfmt, laws, pgm};
use serde::Serialize;

#[derive(Parser)]
#[command(name = "coarse-lab", version, about = "Coarse-geometry operator experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate an LFCM space with singleton blocks.
    GenSpace {
        #[arg(long, value_enum)]
        kind: SpaceKind,
        #[arg(long)]
        size: usize,
        #[arg(long, default_value_t = 1)]
        components: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Generate a bijective coarse equivalence of a space onto itself.
    GenMap {
        #[arg(long)]
        space: PathBuf,
        #[arg(long)]
        distortion: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Build a scrambled unitary `W_Y · P_f · W_X` over a map.
    BuildUnitary {
        #[arg(long)]
        space: PathBuf,
        #[arg(long)]
        map: PathBuf,
        /// Propagation of the scrambling unitaries.
        #[arg(long, default_value_t = 0)]
        scramble: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Source ranks: a JSON array, or a module document.
        #[arg(long)]
        module: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Also write the bare matrix in the binary format.
        #[arg(long)]
        binary: Option<PathBuf>,
    },
    /// Extract a coarse relation from a unitary.
    Extract {
        #[arg(long)]
        unitary: PathBuf,
        /// Ground-truth map, for the closeness verdict.
        #[arg(long)]
        map: Option<PathBuf>,
        #[command(flatten)]
        extraction: ExtractionArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the law suites and print one line per criterion.
    VerifyLaws {
        /// Criteria to run; all when omitted.
        #[arg(long = "criterion")]
        criteria: Vec<u8>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run seeded recovery experiments in parallel.
    Sweep {
        #[arg(long, value_enum)]
        kind: SpaceKind,
        #[arg(long)]
        size: usize,
        #[arg(long, default_value_t = 1)]
        components: usize,
        #[arg(long, default_value_t = 1)]
        distortion: u64,
        #[arg(long, default_value_t = 0)]
        scramble: u64,
        #[arg(long, default_value_t = 10)]
        runs: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        extraction: ExtractionArgs,
        #[arg(long)]
        module: Option<PathBuf>,
        /// Slack in the recovery bound `D + 2p + slack`.
        #[arg(long, default_value_t = 2)]
        slack: u64,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        csv: Option<PathBuf>,
        /// Record wall time per run (makes output nondeterministic).
        #[arg(long)]
        timing: bool,
    },
    /// Render blockwise norms of an endogenous operator as a PGM image.
    Heatmap {
        /// Operator document; without it a random band operator on `Z_size`.
        #[arg(long)]
        operator: Option<PathBuf>,
        #[arg(long, default_value_t = 1)]
        band: u64,
        #[arg(long, default_value_t = 20)]
        size: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Args)]
struct ExtractionArgs {
    #[arg(long, default_value_t = 0.1)]
    delta: f64,
    /// Steps `F,E;F,E`; the doubling schedule when omitted.
    #[arg(long)]
    schedule: Option<String>,
    #[arg(long, value_enum, default_value_t = ModeDoc::Blocks)]
    mode: ModeDoc,
}

impl ExtractionArgs {
    fn schedule(&self) -> anyhow::Result<Option<Vec<(Scale, Scale)>>> {
        self.schedule.as_deref().map(parse_schedule).transpose()
    }
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> anyhow::Result<T> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
}

fn write_json<T: Serialize>(value: &T, out: Option<&Path>) -> anyhow::Result<()> {
    let text = serde_json::to_string_pretty(value)?;
    match out {
        Some(p) => fs::write(p, text + "\n").with_context(|| format!("writing {}", p.display())),
        None => {
            println!("{text}");
            Ok(())
        }
    }
}

fn read_dims(path: &Path, block_count: usize) -> anyhow::Result<Vec<usize>> {
    let value: serde_json::Value = read_json(path)?;
    let dims = if value.is_array() {
        serde_json::from_value(value)?
    } else {
        let doc: ModuleDoc = serde_json::from_value(value)?;
        doc.dimension_vector(block_count)?.0
    };
    ensure!(dims.len() == block_count, "module has {} ranks for {block_count} blocks", dims.len());
    Ok(dims)
}

fn load_map(space: &Arc<LfcmSpace>, path: &Path) -> anyhow::Result<(Equivalence, MeasurableMap)> {
    let eq: Equivalence = read_json(path)?;
    let map = MeasurableMap::new(space.clone(), space.clone(), eq.forward.clone())?;
    Ok((eq, map))
}

#[derive(Serialize)]
struct ExtractReport {
    relation: RelationDoc,
    success: bool,
    chosen_step: usize,
    steps: Vec<StepDoc>,
    #[serde(skip_serializing_if = "Option::is_none")]
    closeness: Option<JScale>,
    verdict: String,
}

/// `Ok(true)` when the command recovered or passed.
fn run(cli: Cli) -> anyhow::Result<bool> {
    match cli.command {
        Command::GenSpace { kind, size, components, seed, out } => {
            let sp = gen::gen_space(kind, size, components, seed)?;
            write_json(&LfcmDoc::from_lfcm(&sp), out.as_deref())?;
            Ok(true)
        }
        Command::GenMap { space, distortion, seed, out } => {
            let sp = read_json::<LfcmDoc>(&space)?.to_lfcm()?;
            write_json(&gen::gen_equivalence(&sp, distortion, seed)?, out.as_deref())?;
            Ok(true)
        }
        Command::BuildUnitary { space, map, scramble, seed, module, out, binary } => {
            let sp = Arc::new(read_json::<LfcmDoc>(&space)?.to_lfcm()?);
            let (_, f) = load_map(&sp, &map)?;
            let cx = match module {
                Some(p) => coarse_core::lfcm::make_module(sp.clone(), &DimensionVector(read_dims(&p, sp.block_count())?))?,
                None => uniform_module(sp.clone()),
            };
            let cy = gen::transported_module(&f, &cx)?;
            let u = gen::build_scrambled_unitary(&f, &cx, &cy, Scale::Finite(scramble), seed)?;
            write_json(&OperatorDoc::from_operator(&u)?, out.as_deref())?;
            if let Some(p) = binary {
                let file = fs::File::create(&p).with_context(|| format!("creating {}", p.display()))?;
                binfmt::write_matrix(std::io::BufWriter::new(file), u.matrix())?;
            }
            Ok(true)
        }
        Command::Extract { unitary, map, extraction, out } => {
            ensure!(extraction.delta > 0.0 && extraction.delta < 1.0, "delta must lie in (0, 1)");
            let u = read_json::<OperatorDoc>(&unitary)?.to_operator()?;
            let schedule = match extraction.schedule()? {
                Some(s) => s,
                None => coarse_core::rigidity::default_schedule(&u),
            };
            let ex = extract_embedding(&u, &ExtractionConfig::new(extraction.delta, schedule, extraction.mode.into()))?;
            let closeness = match map {
                Some(p) => {
                    ensure!(u.is_endogenous(), "closeness needs an operator over one space");
                    let sp = u.source().space().clone();
                    let (eq, _) = load_map(&sp, &p)?;
                    let dom = sp.points_of(&coarse_core::lfcm::domain(u.source(), 1)?.blocks);
                    Some(gen::closeness_to_truth(&ex.relation, &eq.forward, sp.base(), &dom))
                }
                None => None,
            };
            let ok = closeness.map_or(ex.success, |c| c.is_finite());
            let verdict = match closeness {
                Some(c) if c.is_finite() => "recovered",
                Some(_) => "not_recovered",
                None if ex.success => "success",
                None => "failure",
            };
            let report = ExtractReport {
                relation: RelationDoc::from_relation(&ex.relation),
                success: ex.success,
                chosen_step: ex.chosen_step,
                steps: ex.steps.iter().map(StepDoc::from_diagnostics).collect(),
                closeness: closeness.map(JScale),
                verdict: verdict.into(),
            };
            write_json(&report, out.as_deref())?;
            Ok(ok)
        }
        Command::VerifyLaws { criteria, seed, out } => {
            let ids = if criteria.is_empty() { (1..=8).collect() } else { criteria };
            let mut reports = Vec::new();
            for id in ids {
                let r = laws::run_criterion(id, seed, experiment::thread_cap())
                    .with_context(|| format!("no criterion {id}"))?;
                println!("criterion {} ({}): {} {}", r.id, r.name, if r.passed { "PASS" } else { "FAIL" }, r.detail);
                reports.push(r);
            }
            if let Some(p) = out {
                write_json(&reports, Some(&p))?;
            }
            Ok(reports.iter().all(|r| r.passed))
        }
        Command::Sweep {
            kind,
            size,
            components,
            distortion,
            scramble,
            runs,
            seed,
            extraction,
            module,
            slack,
            out,
            csv,
            timing,
        } => {
            let mut base = ExperimentConfig::new(kind, size, distortion, scramble, seed);
            base.components = components;
            base.delta = extraction.delta;
            base.mode = extraction.mode;
            base.slack = slack;
            base.schedule = extraction.schedule()?.map(|s| s.into_iter().map(|(f, e)| (JScale(f), JScale(e))).collect());
            if let Some(p) = module {
                let sp = gen::gen_space(kind, size, components, 0)?;
                base.dims = Some(read_dims(&p, sp.block_count())?);
            }
            base.validate()?;
            let results = experiment::sweep(&experiment::seeded_configs(&base, runs), experiment::thread_cap(), timing)?;
            if let Some(p) = csv {
                let file = fs::File::create(&p).with_context(|| format!("creating {}", p.display()))?;
                experiment::write_csv(file, &results)?;
            }
            if out.is_some() || !results.is_empty() {
                write_json(&results, out.as_deref())?;
            }
            let recovered = results.iter().filter(|r| r.recovered()).count();
            let within = results.iter().filter(|r| r.within_bound).count();
            eprintln!("{recovered}/{runs} recovered, {within}/{runs} within bound");
            Ok(recovered == results.len())
        }
        Command::Heatmap { operator, band, size, seed, out } => {
            let t = match operator {
                Some(p) => read_json::<OperatorDoc>(&p)?.to_operator()?,
                None => {
                    let c = uniform_module(Arc::new(LfcmSpace::singletons(Space::interval(size))));
                    random_band_operator(&c, &c, Scale::Finite(band), &mut gen::rng(seed))?
                }
            };
            pgm::render_heatmap(&t, &out)?;
            Ok(true)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            let _ = writeln!(std::io::stderr(), "error: {e:#}");
            ExitCode::from(2)
        }
    }
}
