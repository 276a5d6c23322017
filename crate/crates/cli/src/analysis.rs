//! `solve`, `sra verify`, `adversary` and `verify`.

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};
use twoquery::adversary::{
    adversarial_completion, guarantee_bound, optimum_welfare, rival_candidates, seeded_rng, CompletionResult,
    BISECTION_TOLERANCE,
};
use twoquery::mechanisms::{output_welfare, MechanismKind, MechanismOutput, MechanismRun};
use twoquery::solvers::enumerate::brute_force;
use twoquery::solvers::{solve_family, EdgeWeights};
use twoquery::sra::{
    ceil_sqrt, find_representative_set, serial_dictatorship, verify_representative_set, verify_sra, SRAssignment,
    SrsMode,
};
use twoquery::{check_feasible, derive_ordinal, total_weight, FamilySpec, Instance, QueryTranscript, Subgraph};

use crate::config::{pick, ExperimentConfig};
use crate::failure::{CliResult, Failure};
use crate::files::{emit_json, expand_instances, load_instance, load_json, load_ordinal, read_bytes};
use crate::gen::parse_kind;
use crate::{pick_enum, AdversaryArgs, SolveArgs, SraArgs, SrsArg, VerifyArgs};

/// Cap on members enumerated by `solve --brute`.
const BRUTE_CAP: usize = 200_000;

pub fn cmd_solve(args: SolveArgs) -> CliResult<()> {
    let inst = load_instance(&args.instance)?;
    let kind = match &args.family {
        Some(f) => parse_kind(f, args.k.or(inst.kind().param()))?,
        None => inst.kind(),
    };
    if kind != inst.kind() {
        return Err(Failure::param(format!("--family {kind} does not match the instance kind {}", inst.kind())));
    }
    let spec = FamilySpec::for_kind(kind)?;
    let weights = EdgeWeights::from_instance(&inst);
    let result =
        if args.brute { brute_force(&inst, &spec, &weights, BRUTE_CAP)? } else { solve_family(&inst, &spec, &weights)? };
    emit_json(args.out.as_deref(), &result)
}

#[derive(Serialize)]
#[serde(untagged)]
enum SraDoc {
    Assignment { assignment: SRAssignment, verdict: twoquery::sra::SraVerdict, exhausted_bound: usize, exhausted_ok: bool },
    Set { set: Option<twoquery::sra::RepresentativeSet>, verdict: Option<twoquery::sra::SrsVerdict> },
}

pub fn cmd_sra(args: SraArgs, cfg: &ExperimentConfig) -> CliResult<()> {
    let inst = load_instance(&args.instance)?;
    let ord = match &args.ordinal {
        Some(p) => load_ordinal(p)?,
        None => derive_ordinal(&inst),
    };
    if inst.is_social_choice() {
        let mode: SrsMode = pick_enum(args.srs_mode, &cfg.srs_mode, "srs-mode")?.unwrap_or(SrsArg::Auto).into();
        let set = find_representative_set(&ord, mode)?;
        let verdict = set.as_ref().map(|s| verify_representative_set(s, &ord));
        emit_json(args.out.as_deref(), &SraDoc::Set { set, verdict })?;
        return Ok(());
    }
    let sides = inst.sides();
    let assignment = match &args.assignment {
        Some(p) => load_json::<SRAssignment>(p)?,
        None => {
            let order = args.order_seed.map(|s| {
                let mut o = sides.n1.clone();
                o.shuffle(&mut seeded_rng(s));
                o
            });
            serial_dictatorship(&ord, &sides, order.as_deref())?
        }
    };
    let k_eff = match args.k_eff {
        Some(k) => k,
        None => inst.family()?.k_eff,
    };
    let verdict = verify_sra(&assignment, &ord, &sides, k_eff, None);
    let exhausted_bound = ceil_sqrt(sides.n1.len());
    let exhausted_ok = assignment.exhausted.len() <= exhausted_bound;
    let holds = verdict.holds && exhausted_ok;
    emit_json(args.out.as_deref(), &SraDoc::Assignment { assignment, verdict, exhausted_bound, exhausted_ok })?;
    if !holds {
        return Err(Failure::verify("the assignment is not sufficiently representative"));
    }
    Ok(())
}

/// A bare transcript, or a mechanism run carrying one.
#[derive(Deserialize)]
#[serde(untagged)]
enum TranscriptSource {
    Run(MechanismRun),
    Transcript(QueryTranscript),
}

#[derive(Serialize)]
struct AdversaryDoc {
    output: MechanismOutput,
    /// Welfare of the output and of the certificate under the completion.
    output_welfare: f64,
    rival_welfare: f64,
    #[serde(flatten)]
    completion: CompletionResult,
}

pub fn cmd_adversary(args: AdversaryArgs, cfg: &ExperimentConfig) -> CliResult<()> {
    let inst = load_instance(&args.instance)?;
    let source: TranscriptSource = serde_json::from_slice(&read_bytes(&args.transcript)?)
        .map_err(|e| Failure::param(format!("{}: not a run or transcript: {e}", args.transcript.display())))?;
    let (transcript, run_output) = match source {
        TranscriptSource::Run(run) => (run.transcript, Some(run.output)),
        TranscriptSource::Transcript(t) => (t, None),
    };
    let output = match (&args.solution, args.winner, run_output) {
        (Some(p), _, _) => MechanismOutput::Solution(load_json::<Subgraph>(p)?),
        (None, Some(w), _) => MechanismOutput::Winner(w),
        (None, None, Some(o)) => o,
        (None, None, None) => return Err(Failure::param("a bare transcript needs --solution or --winner")),
    };
    let ord = match &args.ordinal {
        Some(p) => load_ordinal(p)?,
        None => derive_ordinal(&inst),
    };
    if !transcript.agrees_with(inst.preference_values()) {
        return Err(Failure::param("the transcript disagrees with the instance values"));
    }
    let tolerance = pick(args.tolerance, &cfg.tolerance).unwrap_or(BISECTION_TOLERANCE);
    let structure = inst.skeleton();
    let rivals = rival_candidates(&structure, &ord, &transcript)?;
    let completion = adversarial_completion(&structure, &ord, &transcript, &output, &rivals, tolerance)?;
    let completed = Instance::new(inst.kind(), completed_values(&inst, &completion)?, inst.side_split().cloned())?;
    let doc = AdversaryDoc {
        output_welfare: output_welfare(&output, &completed)?,
        rival_welfare: output_welfare(&completion.certificate, &completed)?,
        output,
        completion,
    };
    emit_json(args.output.as_deref(), &doc)
}

/// The completion in the instance's own value layout (one-sided instances
/// complete in node space).
fn completed_values(inst: &Instance, c: &CompletionResult) -> CliResult<twoquery::ValuationProfile> {
    if inst.kind() != twoquery::ProblemKind::OneSidedMatching {
        return Ok(c.values.clone());
    }
    let n = inst.n();
    let rows = (0..n).map(|i| (0..n).map(|j| c.values.get(i, n + j)).collect()).collect();
    Ok(twoquery::ValuationProfile::new(rows)?)
}

#[derive(Serialize)]
struct Check {
    name: &'static str,
    passed: bool,
    detail: String,
}

#[derive(Serialize)]
struct VerifyRecord {
    instance: String,
    kind: String,
    mechanism: String,
    checks: Vec<Check>,
}

/// Relative slack for floating-point comparisons of welfare sums.
const REL_TOL: f64 = 1e-9;

fn leq(a: f64, b: f64) -> bool {
    a <= b + REL_TOL * a.abs().max(b.abs()).max(1.0)
}

fn verify_instance(inst: &Instance, srs_mode: SrsMode) -> CliResult<(MechanismKind, Vec<Check>)> {
    let ord = derive_ordinal(inst);
    let mut checks = Vec::new();
    let mechanism = match inst.kind() {
        twoquery::ProblemKind::OneSidedMatching => MechanismKind::Match2q,
        twoquery::ProblemKind::SocialChoice => MechanismKind::Sc2q,
        _ => MechanismKind::General2q,
    };
    let Some(run) = twoquery::adversary::run_mechanism(mechanism, inst, &ord, srs_mode)? else {
        checks.push(Check { name: "srs", passed: true, detail: "no representative set found; nothing to check".into() });
        return Ok((mechanism, checks));
    };
    let t = &run.transcript;
    checks.push(Check {
        name: "budget",
        passed: t.max_issued() <= 2,
        detail: format!("at most {} queries per agent", t.max_issued()),
    });
    checks.push(Check {
        name: "transcript",
        passed: t.agrees_with(inst.preference_values()),
        detail: "revealed values match the instance".into(),
    });
    match &run.output {
        MechanismOutput::Solution(sub) => {
            let spec = inst.family()?;
            checks.push(Check {
                name: "feasible",
                passed: check_feasible(sub, &spec, inst)?,
                detail: format!("{} edges", sub.len()),
            });
            let sra = run.sra_used.as_ref().expect("graph mechanisms record their assignment");
            let sides = inst.sides();
            let verdict = verify_sra(sra, &ord, &sides, spec.k_eff, None);
            checks.push(Check {
                name: "sra",
                passed: verdict.holds,
                detail: format!("{} improvable, threshold {}", verdict.max_improvable, verdict.threshold),
            });
            let bound = ceil_sqrt(sides.n1.len());
            checks.push(Check {
                name: "exhausted",
                passed: sra.exhausted.len() <= bound,
                detail: format!("{} exhausted, bound {bound}", sra.exhausted.len()),
            });
            let best = twoquery::solvers::solve_instance(inst)?;
            let revealed_best = total_weight(&best.solution, inst, Some(t))?;
            checks.push(Check {
                name: "revealed-optimal",
                passed: leq(revealed_best, run.revealed_objective),
                detail: format!("optimum reveals {revealed_best}, output reveals {}", run.revealed_objective),
            });
        }
        MechanismOutput::Winner(w) => {
            checks.push(Check { name: "feasible", passed: *w < inst.m(), detail: format!("winner {w}") });
            let set = run.srs_used.as_ref().expect("sc2q records its set");
            let verdict = verify_representative_set(set, &ord);
            checks.push(Check {
                name: "srs",
                passed: verdict.holds,
                detail: format!("worst count {}, bound {}", verdict.worst_count, set.bound),
            });
        }
    }
    let optimum = optimum_welfare(inst)?;
    if let Some(bound) = guarantee_bound(mechanism, inst)? {
        checks.push(Check {
            name: "guarantee",
            passed: leq(optimum, bound * run.revealed_objective),
            detail: format!("optimum {optimum}, factor {bound}, revealed {}", run.revealed_objective),
        });
        let achieved = output_welfare(&run.output, inst)?;
        checks.push(Check {
            name: "distortion",
            passed: leq(optimum, bound * achieved),
            detail: format!("optimum {optimum}, achieved {achieved}"),
        });
    }
    Ok((mechanism, checks))
}

pub fn cmd_verify(args: VerifyArgs, cfg: &ExperimentConfig) -> CliResult<()> {
    let srs_mode: SrsMode = pick_enum(args.srs_mode, &cfg.srs_mode, "srs-mode")?.unwrap_or(SrsArg::Auto).into();
    let mut records = Vec::new();
    for path in expand_instances(&args.instance)? {
        let inst = load_instance(&path)?;
        let (mechanism, checks) = verify_instance(&inst, srs_mode)?;
        records.push(VerifyRecord {
            instance: path.display().to_string(),
            kind: inst.kind().to_string(),
            mechanism: mechanism.name().to_string(),
            checks,
        });
    }
    emit_json(args.out.as_deref(), &records)?;
    let failed: Vec<String> = records
        .iter()
        .flat_map(|r| r.checks.iter().filter(|c| !c.passed).map(move |c| format!("{}: {}", r.instance, c.name)))
        .collect();
    if !failed.is_empty() {
        return Err(Failure::verify(format!("{} check(s) failed: {}", failed.len(), failed.join(", "))));
    }
    Ok(())
}
