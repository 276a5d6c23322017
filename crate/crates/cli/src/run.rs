//! `run`: mechanism runs on files, or distortion sweeps over generated
//! instances.

use rayon::prelude::*;
use serde::Serialize;
use twoquery::adversary::{distortion_trial, DistortionRow, Generator, Measure, ProblemKindTag, TrialOptions};
use twoquery::mechanisms::{
    general_two_queries_with, match_two_queries_with, sc_two_queries_with, top_two_baseline, MechanismKind,
    ScOutcome,
};
use twoquery::sra::SrsMode;
use twoquery::{derive_ordinal, Instance, OrdinalProfile, ProblemKind, QueryTranscript};

use crate::config::{pick, require, ExperimentConfig};
use crate::failure::{CliResult, Failure};
use crate::files::{emit_json, expand_instances, load_instance, load_ordinal, sibling, write, write_json};
use crate::gen::{check_size, parse_kind};
use crate::{pick_enum, Construction, MeasureArg, MechanismArg, RunArgs, SrsArg};

/// A run result, or the signaled absence of a representative set.
#[derive(Serialize)]
#[serde(untagged)]
enum RunDoc {
    Run(twoquery::MechanismRun),
    NotFound { srs_not_found: bool, transcript: QueryTranscript },
}

fn run_one(
    mechanism: MechanismKind,
    inst: &Instance,
    ord: &OrdinalProfile,
    family: Option<ProblemKind>,
    srs_mode: SrsMode,
    budget: usize,
) -> CliResult<RunDoc> {
    if let Some(kind) = family {
        if kind != inst.kind() {
            return Err(Failure::param(format!("--family {kind} does not match the instance kind {}", inst.kind())));
        }
    }
    Ok(match mechanism {
        MechanismKind::Match2q => RunDoc::Run(match_two_queries_with(inst, ord, budget)?),
        MechanismKind::General2q => RunDoc::Run(general_two_queries_with(inst, &inst.family()?, ord, budget)?),
        MechanismKind::Top2 => RunDoc::Run(top_two_baseline(inst, ord, budget)?),
        MechanismKind::Sc2q => match sc_two_queries_with(inst, ord, srs_mode, budget)? {
            ScOutcome::Run(run) => RunDoc::Run(run),
            ScOutcome::SrsNotFound { transcript } => {
                eprintln!("note: no representative set found");
                RunDoc::NotFound { srs_not_found: true, transcript }
            }
        },
    })
}

pub fn cmd_run(args: RunArgs, cfg: &ExperimentConfig) -> CliResult<()> {
    let mechanism: MechanismKind =
        require(pick_enum(args.mechanism, &cfg.mechanism, "mechanism")?, "mechanism")?.into();
    let srs_mode: SrsMode = pick_enum(args.srs_mode, &cfg.srs_mode, "srs-mode")?.unwrap_or(SrsArg::Auto).into();
    if args.instance.is_empty() {
        return sweep(args, cfg, mechanism, srs_mode);
    }
    let budget = args.budget.unwrap_or(twoquery::mechanisms::DEFAULT_BUDGET);
    let family = args.family.as_deref().map(|f| parse_kind(f, args.k)).transpose()?;
    let paths = expand_instances(&args.instance)?;
    let out = pick(args.out, &cfg.out);
    if paths.len() == 1 {
        let inst = load_instance(&paths[0])?;
        let ord = match &args.ordinal {
            Some(p) => load_ordinal(p)?,
            None => derive_ordinal(&inst),
        };
        let doc = run_one(mechanism, &inst, &ord, family, srs_mode, budget)?;
        return emit_json(out.as_deref(), &doc);
    }
    if args.ordinal.is_some() {
        return Err(Failure::param("--ordinal applies to a single instance"));
    }
    let dir = require(out, "out")?;
    for path in &paths {
        let inst = load_instance(path)?;
        let doc = run_one(mechanism, &inst, &derive_ordinal(&inst), family, srs_mode, budget)?;
        let target = sibling(&dir, path, ".run.json");
        write_json(&target, &doc)?;
        println!("{}", target.display());
    }
    Ok(())
}

fn generator_for(
    construction: Construction,
    kind: Option<ProblemKind>,
    size: usize,
    m: Option<usize>,
    lambda: usize,
) -> CliResult<Generator> {
    Ok(match construction {
        Construction::Theorem5 => Generator::LowerBound { m: size, lambda },
        Construction::SrsImpossible => {
            return Err(Failure::param("sweeps support the random and theorem5 constructions"))
        }
        Construction::Random => match require(kind, "kind")? {
            ProblemKind::OneSidedMatching => Generator::OneSided { n: size },
            ProblemKind::SocialChoice => Generator::SocialChoice { n: size, m: m.unwrap_or(size) },
            other => Generator::Family { kind: tag(other), k: other.param(), n: size },
        },
    })
}

fn tag(kind: ProblemKind) -> ProblemKindTag {
    match kind {
        ProblemKind::OneSidedMatching => ProblemKindTag::OneSidedMatching,
        ProblemKind::GeneralMatching => ProblemKindTag::GeneralMatching,
        ProblemKind::TwoSidedMatching => ProblemKindTag::TwoSidedMatching,
        ProblemKind::KMatching(_) => ProblemKindTag::KMatching,
        ProblemKind::CliquePacking(_) => ProblemKindTag::CliquePacking,
        ProblemKind::CyclePacking(_) => ProblemKindTag::CyclePacking,
        ProblemKind::KAllocation(_) => ProblemKindTag::KConstrainedAllocation,
        ProblemKind::SocialChoice => ProblemKindTag::SocialChoice,
    }
}

fn sweep(args: RunArgs, cfg: &ExperimentConfig, mechanism: MechanismKind, srs_mode: SrsMode) -> CliResult<()> {
    let construction = require(pick_enum(args.construction, &cfg.construction, "construction")?, "construction")?;
    let kind = pick(args.kind, &cfg.kind).map(|k| parse_kind(&k, pick(args.k, &cfg.k))).transpose()?;
    let sizes = if args.sizes.is_empty() { cfg.sizes.clone().unwrap_or_default() } else { args.sizes };
    let sizes = if sizes.is_empty() { vec![require(cfg.n, "sizes")?] } else { sizes };
    let allow_large = args.allow_large || cfg.allow_large.unwrap_or(false);
    let m = pick(args.m, &cfg.m);
    for &s in &sizes {
        check_size(s.max(m.unwrap_or(0)), allow_large)?;
    }
    let lambda = pick(args.lambda, &cfg.lambda).unwrap_or(2);
    let trials = pick(args.trials, &cfg.trials).unwrap_or(1);
    let seed = pick(args.seed, &cfg.seed).unwrap_or(0);
    let measure = match pick_enum(args.measure, &cfg.measure, "measure")?.unwrap_or(MeasureArg::Realized) {
        MeasureArg::Realized => Measure::Realized,
        MeasureArg::Adversarial => Measure::Adversarial,
    };
    let fallback = pick_enum::<MechanismArg>(args.fallback, &cfg.fallback, "fallback")?.map(MechanismKind::from);
    let opts = TrialOptions {
        measure,
        srs_mode,
        fallback,
        tolerance: pick(args.tolerance, &cfg.tolerance).unwrap_or(twoquery::adversary::BISECTION_TOLERANCE),
    };
    let csv_path = require(pick(args.csv, &cfg.csv), "csv")?;
    let generators: Vec<Generator> = sizes
        .iter()
        .map(|&s| generator_for(construction, kind, s, m, lambda))
        .collect::<CliResult<_>>()?;
    let tasks: Vec<(usize, u64)> =
        (0..generators.len()).flat_map(|g| (0..trials as u64).map(move |t| (g, seed.wrapping_add(t)))).collect();

    let jobs = pick(args.jobs, &cfg.jobs).unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .map_err(|e| Failure::param(format!("thread pool: {e}")))?;
    // results come back in task order, so the file content does not depend on scheduling
    let results: Vec<twoquery::Result<Option<DistortionRow>>> =
        pool.install(|| tasks.par_iter().map(|&(g, s)| distortion_trial(mechanism, &generators[g], s, &opts)).collect());

    let mut rows = Vec::new();
    let mut skipped = 0;
    for r in results {
        match r? {
            Some(row) => rows.push(row),
            None => skipped += 1,
        }
    }
    if skipped > 0 {
        eprintln!("note: {skipped} trial(s) skipped without a representative set");
    }
    write(&csv_path, &rows_to_csv(&rows)?)?;
    println!("{}", csv_path.display());
    Ok(())
}

pub fn rows_to_csv(rows: &[DistortionRow]) -> CliResult<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["seed", "n", "m", "lambda", "mechanism", "distortion", "bound", "slack"])
        .map_err(|e| Failure::param(e))?;
    for r in rows {
        let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
        w.write_record([
            r.seed.to_string(),
            r.n.to_string(),
            r.m.to_string(),
            r.lambda.to_string(),
            r.mechanism.clone(),
            r.distortion.to_string(),
            opt(r.bound),
            opt(r.slack),
        ])
        .map_err(|e| Failure::param(e))?;
    }
    w.into_inner().map_err(|e| Failure::param(e))
}
