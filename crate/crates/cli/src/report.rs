//! `report`: per-size aggregates and log-log growth fits of distortion CSVs.

use std::collections::BTreeMap;

use serde::Deserialize;

use crate::failure::{CliResult, Failure};
use crate::files::{read_bytes, write};
use crate::ReportArgs;

#[derive(Debug, Deserialize)]
struct Row {
    #[allow(dead_code)]
    seed: u64,
    n: usize,
    m: usize,
    lambda: usize,
    mechanism: String,
    distortion: f64,
    bound: Option<f64>,
    slack: Option<f64>,
}

#[derive(Default)]
struct Group {
    distortions: Vec<f64>,
    bound: Option<f64>,
    slacks: Vec<f64>,
    violations: usize,
}

/// Least-squares slope and intercept of `ys` against `xs`.
pub fn fit_line(xs: &[f64], ys: &[f64]) -> Option<(f64, f64)> {
    let n = xs.len() as f64;
    if xs.len() < 2 {
        return None;
    }
    let (mx, my) = (xs.iter().sum::<f64>() / n, ys.iter().sum::<f64>() / n);
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    if sxx == 0.0 {
        return None;
    }
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    Some((slope, my - slope * mx))
}

fn csv_err(e: csv::Error) -> Failure {
    Failure::param(e)
}

pub fn cmd_report(args: ReportArgs) -> CliResult<()> {
    let mut groups: BTreeMap<(String, usize, usize, usize), Group> = BTreeMap::new();
    for path in &args.input {
        let bytes = read_bytes(path)?;
        let mut reader = csv::Reader::from_reader(bytes.as_slice());
        for row in reader.deserialize::<Row>() {
            let row = row.map_err(|e| Failure::param(format!("{}: {e}", path.display())))?;
            let g = groups.entry((row.mechanism.clone(), row.lambda, row.n, row.m)).or_default();
            g.distortions.push(row.distortion);
            g.bound = row.bound;
            g.slacks.extend(row.slack);
            if row.bound.is_some_and(|b| row.distortion > b * (1.0 + 1e-9)) {
                g.violations += 1;
            }
        }
    }
    if groups.is_empty() {
        return Err(Failure::param("no rows to report"));
    }

    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record([
        "mechanism",
        "lambda",
        "n",
        "m",
        "trials",
        "max_distortion",
        "mean_distortion",
        "bound",
        "min_slack",
        "mean_slack",
        "violations",
    ])
    .map_err(csv_err)?;
    let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
    for ((mech, lambda, n, m), g) in &groups {
        let max = g.distortions.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let mean = g.distortions.iter().sum::<f64>() / g.distortions.len() as f64;
        let min_slack = g.slacks.iter().copied().reduce(f64::min);
        let mean_slack = (!g.slacks.is_empty()).then(|| g.slacks.iter().sum::<f64>() / g.slacks.len() as f64);
        w.write_record([
            mech.clone(),
            lambda.to_string(),
            n.to_string(),
            m.to_string(),
            g.distortions.len().to_string(),
            max.to_string(),
            mean.to_string(),
            opt(g.bound),
            opt(min_slack),
            opt(mean_slack),
            g.violations.to_string(),
        ])
        .map_err(csv_err)?;
    }
    let summary = w.into_inner().map_err(|e| Failure::param(e))?;
    match &args.out {
        Some(p) => write(p, &summary)?,
        None => print!("{}", String::from_utf8_lossy(&summary)),
    }

    // growth of the per-size maximum, against m when it varies, else n
    let mut series: BTreeMap<(String, usize), Vec<(usize, usize, f64)>> = BTreeMap::new();
    for ((mech, lambda, n, m), g) in &groups {
        let max = g.distortions.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        series.entry((mech.clone(), *lambda)).or_default().push((*n, *m, max));
    }
    let mut fit = csv::Writer::from_writer(Vec::new());
    fit.write_record(["mechanism", "lambda", "axis", "points", "slope", "intercept"]).map_err(csv_err)?;
    for ((mech, lambda), pts) in &series {
        let ms: std::collections::BTreeSet<usize> = pts.iter().map(|p| p.1).collect();
        let axis = if ms.len() > 1 { "m" } else { "n" };
        let usable: Vec<(f64, f64)> = pts
            .iter()
            .filter(|p| p.2.is_finite() && p.2 > 0.0)
            .map(|p| (((if axis == "m" { p.1 } else { p.0 }) as f64).ln(), p.2.ln()))
            .collect();
        let xs: Vec<f64> = usable.iter().map(|p| p.0).collect();
        let ys: Vec<f64> = usable.iter().map(|p| p.1).collect();
        if let Some((slope, intercept)) = fit_line(&xs, &ys) {
            eprintln!("fit {mech} lambda={lambda}: log-log slope {slope:.4} against {axis} over {} sizes", xs.len());
            fit.write_record([
                mech.clone(),
                lambda.to_string(),
                axis.to_string(),
                xs.len().to_string(),
                slope.to_string(),
                intercept.to_string(),
            ])
            .map_err(csv_err)?;
        }
    }
    if let Some(p) = &args.fit {
        write(p, &fit.into_inner().map_err(|e| Failure::param(e))?)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fits_a_power_law() {
        let xs: Vec<f64> = [16.0f64, 64.0, 256.0].iter().map(|x| x.ln()).collect();
        let ys: Vec<f64> = [4.0f64, 8.0, 16.0].iter().map(|y| y.ln()).collect();
        let (slope, _) = fit_line(&xs, &ys).unwrap();
        assert!((slope - 0.5).abs() < 1e-12);
        assert_eq!(fit_line(&xs[..1], &ys[..1]), None);
    }
}
