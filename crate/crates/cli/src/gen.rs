//! `gen`: deterministic instance files.

use std::path::Path;

use twoquery::adversary::{gen_lower_bound, gen_srs_impossible, random_instance, seeded_rng};
use twoquery::{derive_ordinal, Instance, ProblemKind};

use crate::config::{pick, require, ExperimentConfig};
use crate::failure::{CliResult, Failure};
use crate::files::{write_instance_file, write_json};
use crate::{pick_enum, Construction, GenArgs};

/// Largest agent or alternative count accepted without `--allow-large`.
pub const SOFT_SIZE_LIMIT: usize = 512;

pub fn check_size(size: usize, allow_large: bool) -> CliResult<()> {
    if size > SOFT_SIZE_LIMIT {
        if !allow_large {
            return Err(Failure::guard(format!(
                "size {size} exceeds {SOFT_SIZE_LIMIT}; pass --allow-large to override"
            )));
        }
        eprintln!("warning: size {size} exceeds {SOFT_SIZE_LIMIT}; exact solvers may be slow");
    }
    Ok(())
}

pub fn parse_kind(name: &str, k: Option<usize>) -> CliResult<ProblemKind> {
    Ok(ProblemKind::from_parts(name, k)?)
}

fn kind_slug(kind: ProblemKind) -> String {
    match kind.param() {
        Some(k) => format!("{}{k}", kind.name()),
        None => kind.name().to_string(),
    }
}

fn emit(out: &Path, name: &str, inst: &Instance, emit_ordinal: bool) -> CliResult<()> {
    let path = out.join(format!("{name}.json"));
    write_instance_file(&path, inst)?;
    println!("{}", path.display());
    if emit_ordinal {
        let path = out.join(format!("{name}.ordinal.json"));
        write_json(&path, &derive_ordinal(inst))?;
        println!("{}", path.display());
    }
    Ok(())
}

pub fn cmd_gen(args: GenArgs, cfg: &ExperimentConfig) -> CliResult<()> {
    let construction = require(pick_enum(args.construction, &cfg.construction, "construction")?, "construction")?;
    let out = require(pick(args.out, &cfg.out), "out")?;
    let seed = pick(args.seed, &cfg.seed).unwrap_or(0);
    let allow_large = args.allow_large || cfg.allow_large.unwrap_or(false);
    let emit_ordinal = args.emit_ordinal || cfg.emit_ordinal.unwrap_or(false);
    let k = pick(args.k, &cfg.k);
    match construction {
        Construction::Random => {
            let kind = parse_kind(&require(pick(args.kind, &cfg.kind), "kind")?, k)?;
            let n = require(pick(args.n, &cfg.n), "n")?;
            let m = pick(args.m, &cfg.m).unwrap_or(n);
            check_size(n.max(m), allow_large)?;
            let trials = pick(args.trials, &cfg.trials).unwrap_or(1);
            let symmetric = args.symmetric || cfg.symmetric.unwrap_or(false);
            for t in 0..trials as u64 {
                let s = seed.wrapping_add(t);
                let inst = random_instance(&mut seeded_rng(s), kind, n, m, symmetric)?;
                emit(&out, &format!("{}-n{n}-m{m}-s{s}", kind_slug(kind)), &inst, emit_ordinal)?;
            }
        }
        Construction::Theorem5 => {
            let m = require(pick(args.m, &cfg.m), "m")?;
            let lambda = pick(args.lambda, &cfg.lambda).unwrap_or(2);
            check_size(m, allow_large)?;
            let (inst, layout) = gen_lower_bound(m, lambda, seed)?;
            let name = format!("theorem5-m{m}-l{lambda}-s{seed}");
            emit(&out, &name, &inst, false)?;
            // the layout's rankings order the zero-valued tail; mechanisms should see them
            let layout_path = out.join(format!("{name}.layout.json"));
            write_json(&layout_path, &layout)?;
            println!("{}", layout_path.display());
            let ordinal_path = out.join(format!("{name}.ordinal.json"));
            write_json(&ordinal_path, &layout.ordinal())?;
            println!("{}", ordinal_path.display());
        }
        Construction::SrsImpossible => {
            let m = require(pick(args.m, &cfg.m), "m")?;
            let k = require(k, "k")?;
            let inst = gen_srs_impossible(m, k)?;
            emit(&out, &format!("srs-impossible-m{m}-k{k}"), &inst, emit_ordinal)?;
        }
    }
    Ok(())
}
