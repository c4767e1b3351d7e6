//! End-to-end recovery experiments: generate, scramble, extract, compare.

use std::sync::Arc;
use std::time::Instant;

use anyhow::{ensure, Context};
use coarse_core::lfcm::{domain, make_module, uniform_module};
use coarse_core::rigidity::{default_schedule, extract_embedding, Extraction, ExtractionConfig};
use coarse_core::{DimensionVector, LfcmSpace, MeasurableMap, Module, Operator, Relation, Scale, Space};
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::gen::{self, Equivalence, SpaceKind};
use crate::json::{JScale, ModeDoc, StepDoc};

fn one() -> usize {
    1
}

fn two() -> u64 {
    2
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub kind: SpaceKind,
    pub size: usize,
    #[serde(default = "one")]
    pub components: usize,
    /// Distortion bound `D` of the ground-truth equivalence.
    pub distortion: u64,
    /// Propagation `p` of the scrambling unitaries.
    pub scramble: u64,
    pub delta: f64,
    /// Explicit `(F, E)` schedule; the doubling schedule when absent.
    #[serde(default)]
    pub schedule: Option<Vec<(JScale, JScale)>>,
    pub seed: u64,
    #[serde(default)]
    pub mode: ModeDoc,
    /// Ranks of the source module per block; uniform rank 1 when absent.
    #[serde(default)]
    pub dims: Option<Vec<usize>>,
    /// Recovery bound is `D + 2p + slack`.
    #[serde(default = "two")]
    pub slack: u64,
}

impl ExperimentConfig {
    pub fn new(kind: SpaceKind, size: usize, distortion: u64, scramble: u64, seed: u64) -> Self {
        ExperimentConfig {
            kind,
            size,
            components: 1,
            distortion,
            scramble,
            delta: 0.1,
            schedule: None,
            seed,
            mode: ModeDoc::Blocks,
            dims: None,
            slack: 2,
        }
    }

    pub fn validate(&self) -> anyhow::Result<()> {
        ensure!(self.size >= 1, "size must be at least 1");
        ensure!(self.components >= 1, "component count must be at least 1");
        ensure!(self.distortion >= 1, "distortion bound must be at least 1");
        ensure!(self.delta > 0.0 && self.delta < 1.0, "delta must lie in (0, 1)");
        Ok(())
    }

    pub fn bound(&self) -> u64 {
        self.distortion + 2 * self.scramble + self.slack
    }

    /// Independent seeds for the space, the map and the unitary.
    fn sub_seeds(&self) -> [u64; 3] {
        let mut r = gen::rng(self.seed);
        [r.gen(), r.gen(), r.gen()]
    }
}

/// Parses `a,b;c,d` into `(F, E)` steps; `inf` is accepted.
pub fn parse_schedule(s: &str) -> anyhow::Result<Vec<(Scale, Scale)>> {
    let scale = |t: &str| -> anyhow::Result<Scale> {
        let t = t.trim();
        if t == "inf" {
            Ok(Scale::Infinite)
        } else {
            Ok(Scale::Finite(t.parse().with_context(|| format!("bad scale {t:?}"))?))
        }
    };
    let steps = s
        .split(';')
        .filter(|p| !p.trim().is_empty())
        .map(|p| {
            let (f, e) = p.split_once(',').with_context(|| format!("step {p:?} is not of the form F,E"))?;
            Ok((scale(f)?, scale(e)?))
        })
        .collect::<anyhow::Result<Vec<_>>>()?;
    ensure!(!steps.is_empty(), "schedule is empty");
    Ok(steps)
}

/// Everything generated for one configuration before extraction.
#[derive(Clone, Debug)]
pub struct Instance {
    pub space: Arc<LfcmSpace>,
    pub equivalence: Equivalence,
    pub map: MeasurableMap,
    pub source: Module,
    pub target: Module,
    pub unitary: Operator,
}

pub fn build_instance(cfg: &ExperimentConfig) -> anyhow::Result<Instance> {
    cfg.validate()?;
    let [s_space, s_map, s_unitary] = cfg.sub_seeds();
    let space = Arc::new(gen::gen_space(cfg.kind, cfg.size, cfg.components, s_space)?);
    let equivalence = gen::gen_equivalence(&space, cfg.distortion, s_map)?;
    let map = MeasurableMap::new(space.clone(), space.clone(), equivalence.forward.clone())?;
    let source = match &cfg.dims {
        None => uniform_module(space.clone()),
        Some(d) => make_module(space.clone(), &DimensionVector(d.clone())).context("module dims")?,
    };
    let target = gen::transported_module(&map, &source)?;
    let unitary = gen::build_scrambled_unitary(&map, &source, &target, Scale::Finite(cfg.scramble), s_unitary)?;
    Ok(Instance { space, equivalence, map, source, target, unitary })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RelationSummary {
    pub pairs: usize,
    pub domain_points: usize,
    pub range_points: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentResult {
    pub config: ExperimentConfig,
    pub relation: RelationSummary,
    pub success: bool,
    pub chosen_step: usize,
    pub closeness: JScale,
    pub bound: u64,
    pub within_bound: bool,
    /// `"recovered"` exactly when the closeness is finite.
    pub verdict: String,
    pub steps: Vec<StepDoc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub wall_time: Option<f64>,
}

impl ExperimentResult {
    pub fn recovered(&self) -> bool {
        self.closeness.0.is_finite()
    }
}

pub fn extraction_config(cfg: &ExperimentConfig, u: &Operator) -> ExtractionConfig {
    let schedule = match &cfg.schedule {
        Some(s) => s.iter().map(|(f, e)| (f.0, e.0)).collect(),
        None => default_schedule(u),
    };
    ExtractionConfig::new(cfg.delta, schedule, cfg.mode.into())
}

/// Closeness of an extraction to the ground truth of its instance.
pub fn closeness_of(inst: &Instance, ex: &Extraction) -> anyhow::Result<Scale> {
    let dom = inst.space.points_of(&domain(&inst.source, 1)?.blocks);
    Ok(gen::closeness_to_truth(&ex.relation, &inst.equivalence.forward, inst.space.base(), &dom))
}

pub fn run_experiment(cfg: &ExperimentConfig, timing: bool) -> anyhow::Result<ExperimentResult> {
    let start = Instant::now();
    let inst = build_instance(cfg).with_context(|| format!("building instance for seed {}", cfg.seed))?;
    let ex = extract_embedding(&inst.unitary, &extraction_config(cfg, &inst.unitary))
        .with_context(|| format!("extracting for seed {}", cfg.seed))?;
    let closeness = closeness_of(&inst, &ex)?;
    let bound = cfg.bound();
    let recovered = closeness.is_finite();
    Ok(ExperimentResult {
        config: cfg.clone(),
        relation: RelationSummary {
            pairs: ex.relation.len(),
            domain_points: ex.relation.domain().count(),
            range_points: ex.relation.range().count(),
        },
        success: ex.success,
        chosen_step: ex.chosen_step,
        closeness: JScale(closeness),
        bound,
        within_bound: closeness <= Scale::Finite(bound),
        verdict: if recovered { "recovered" } else { "not_recovered" }.into(),
        steps: ex.steps.iter().map(StepDoc::from_diagnostics).collect(),
        wall_time: timing.then(|| start.elapsed().as_secs_f64()),
    })
}

/// `max d(y, y')` over `(y, x) ∈ r`, `(y', x) ∈ s`; `∞` when some `x` is
/// covered by only one of them.
pub fn relation_closeness(r: &Relation, s: &Relation, y: &Space) -> Scale {
    let (rt, st) = (r.transpose(), s.transpose());
    let mut out = Scale::ZERO;
    for x in 0..r.source_len() {
        let (a, b) = (rt.row(x), st.row(x));
        if a.is_empty() != b.is_empty() {
            return Scale::Infinite;
        }
        for p in a.iter() {
            for q in b.iter() {
                out = out.max(y.dist(p, q));
            }
        }
    }
    out
}

/// Thread cap from `COARSE_LAB_THREADS`, if set to a positive integer.
pub fn thread_cap() -> Option<usize> {
    std::env::var("COARSE_LAB_THREADS").ok()?.trim().parse().ok().filter(|&n| n > 0)
}

/// Runs every configuration on a pool of `threads` workers (the rayon
/// default when `None`); results keep the input order.
pub fn sweep(configs: &[ExperimentConfig], threads: Option<usize>, timing: bool) -> anyhow::Result<Vec<ExperimentResult>> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = threads {
        builder = builder.num_threads(n);
    }
    let pool = builder.build()?;
    pool.install(|| configs.par_iter().map(|c| run_experiment(c, timing)).collect())
}

/// `count` copies of `base` with consecutive seeds.
pub fn seeded_configs(base: &ExperimentConfig, count: usize) -> Vec<ExperimentConfig> {
    (0..count as u64)
        .map(|i| ExperimentConfig { seed: base.seed.wrapping_add(i), ..base.clone() })
        .collect()
}

#[derive(Debug, Serialize)]
struct CsvRow<'a> {
    seed: u64,
    kind: SpaceKind,
    size: usize,
    components: usize,
    distortion: u64,
    scramble: u64,
    delta: f64,
    mode: ModeDoc,
    relation_pairs: usize,
    success: bool,
    chosen_step: usize,
    closeness: String,
    bound: u64,
    within_bound: bool,
    verdict: &'a str,
    #[serde(skip_serializing_if = "Option::is_none")]
    wall_time: Option<f64>,
}

pub fn write_csv<W: std::io::Write>(w: W, results: &[ExperimentResult]) -> anyhow::Result<()> {
    let mut out = csv::Writer::from_writer(w);
    for r in results {
        let c = &r.config;
        out.serialize(CsvRow {
            seed: c.seed,
            kind: c.kind,
            size: c.size,
            components: c.components,
            distortion: c.distortion,
            scramble: c.scramble,
            delta: c.delta,
            mode: c.mode,
            relation_pairs: r.relation.pairs,
            success: r.success,
            chosen_step: r.chosen_step,
            closeness: r.closeness.0.to_string(),
            bound: r.bound,
            within_bound: r.within_bound,
            verdict: &r.verdict,
            wall_time: r.wall_time,
        })?;
    }
    out.flush()?;
    Ok(())
}
