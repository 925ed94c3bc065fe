//! Tabulated lambda scans: Evans value, Maslov index, crossing count and drift per row.

use std::io::{Read, Write};
use std::str::FromStr;

use rayon::prelude::*;
use serde_json::json;

use crate::error::{MaslovError, Result};
use crate::evans::evans_from_trajectory;
use crate::integrator::{constraint_drift, solve, Coordinates, SolverOptions};
use crate::maslov::{maslov_index_2d, maslov_index_angle, maslov_index_intersection};
use crate::problems::Problem;

pub const CSV_HEADER: [&str; 5] = ["lambda", "evans", "maslov", "crossings", "drift"];
pub const NEAR_EIGENVALUE: &str = "near-eigenvalue";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Angle,
    Intersection,
    Both,
}

impl FromStr for Method {
    type Err = MaslovError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "angle" => Ok(Method::Angle),
            "intersection" => Ok(Method::Intersection),
            "both" => Ok(Method::Both),
            other => Err(MaslovError::InvalidParameter(format!(
                "unknown method '{other}'"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScanRow {
    pub lambda: f64,
    pub evans: f64,
    /// None near an eigenvalue, where the winding is not close to an integer.
    pub maslov: Option<i64>,
    pub crossings: usize,
    pub drift: f64,
}

/// A finished scan. `disagreements` lists lambdas where the two methods differ.
#[derive(Debug, Clone, Default)]
pub struct ScanTable {
    pub rows: Vec<ScanRow>,
    pub disagreements: Vec<(f64, i64, i64)>,
}

pub fn lambda_grid(lo: f64, hi: f64, n: usize) -> Result<Vec<f64>> {
    if !lo.is_finite() || !hi.is_finite() || lo >= hi {
        return Err(MaslovError::Precondition(format!(
            "need lambda-min < lambda-max (got {lo}, {hi})"
        )));
    }
    if n < 2 {
        return Err(MaslovError::Precondition(
            "grid needs at least two points".into(),
        ));
    }
    Ok((0..n)
        .map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64)
        .collect())
}

fn intersection(problem: &Problem, lambda: f64, opts: &SolverOptions) -> Result<(i64, usize)> {
    let r = match problem.n() {
        1 => maslov_index_2d(problem, lambda, opts)?,
        _ => maslov_index_intersection(problem, lambda, opts)?,
    };
    Ok((r.index, r.events.len()))
}

/// Rows with |D| below this fraction of max |D| on the grid carry no index.
pub const NEAR_ROOT_FRACTION: f64 = 1e-6;

struct Sample {
    lambda: f64,
    evans: f64,
    drift: f64,
}

fn sample(problem: &Problem, lambda: f64, opts: &SolverOptions) -> Result<Sample> {
    let (inf, traj) = solve(problem, lambda, opts, Coordinates::Original)?;
    Ok(Sample {
        lambda,
        evans: evans_from_trajectory(&inf, &traj).d,
        drift: constraint_drift(&traj).max(),
    })
}

fn row(
    problem: &Problem,
    s: &Sample,
    near: bool,
    method: Method,
    opts: &SolverOptions,
) -> Result<(ScanRow, Option<i64>)> {
    let marker = ScanRow {
        lambda: s.lambda,
        evans: s.evans,
        maslov: None,
        crossings: 0,
        drift: s.drift,
    };
    if near {
        return Ok((marker, None));
    }
    let angle = match maslov_index_angle(problem, s.lambda, opts) {
        Ok(a) => a,
        Err(MaslovError::NearEigenvalue { .. }) => return Ok((marker, None)),
        Err(e) => return Err(e),
    };
    let mut r = ScanRow {
        maslov: Some(angle.index),
        crossings: angle.crossings,
        ..marker
    };
    let mut other = None;
    match method {
        Method::Angle => {}
        Method::Intersection => {
            let (index, crossings) = intersection(problem, s.lambda, opts)?;
            r.maslov = Some(index);
            r.crossings = crossings;
        }
        Method::Both => {
            let (index, crossings) = intersection(problem, s.lambda, opts)?;
            r.crossings = crossings;
            other = Some(index);
        }
    }
    Ok((r, other))
}

/// Evaluates every lambda in parallel; rows come back sorted by lambda.
pub fn scan(
    problem: &Problem,
    lambdas: &[f64],
    method: Method,
    opts: &SolverOptions,
) -> Result<ScanTable> {
    for &l in lambdas {
        problem.check_lambda(l)?;
    }
    let mut samples: Vec<Sample> = lambdas
        .par_iter()
        .map(|&l| sample(problem, l, opts))
        .collect::<Result<_>>()?;
    samples.sort_by(|a, b| a.lambda.total_cmp(&b.lambda));
    let range = samples.iter().fold(0.0f64, |m, s| m.max(s.evans.abs()));
    let results: Vec<(ScanRow, Option<i64>)> = samples
        .par_iter()
        .map(|s| {
            row(
                problem,
                s,
                s.evans.abs() < NEAR_ROOT_FRACTION * range,
                method,
                opts,
            )
        })
        .collect::<Result<_>>()?;
    let disagreements = results
        .iter()
        .filter_map(|(r, other)| match (r.maslov, other) {
            (Some(a), Some(b)) if a != *b => Some((r.lambda, a, *b)),
            _ => None,
        })
        .collect();
    Ok(ScanTable {
        rows: results.into_iter().map(|(r, _)| r).collect(),
        disagreements,
    })
}

/// 17 significant digits, enough to round-trip any f64.
pub fn format_float(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn write_csv<W: Write>(rows: &[ScanRow], w: W) -> Result<()> {
    let mut wr = csv::Writer::from_writer(w);
    wr.write_record(CSV_HEADER)?;
    for r in rows {
        let maslov = r
            .maslov
            .map_or(NEAR_EIGENVALUE.to_string(), |m| m.to_string());
        wr.write_record([
            format_float(r.lambda),
            format_float(r.evans),
            maslov,
            r.crossings.to_string(),
            format_float(r.drift),
        ])?;
    }
    wr.flush()?;
    Ok(())
}

pub fn read_csv<R: Read>(r: R) -> Result<Vec<ScanRow>> {
    let mut rd = csv::Reader::from_reader(r);
    if rd.headers()?.iter().collect::<Vec<_>>() != CSV_HEADER {
        return Err(MaslovError::InvalidParameter(format!(
            "scan CSV header must be {}",
            CSV_HEADER.join(",")
        )));
    }
    let num = |s: &str| -> Result<f64> {
        s.parse()
            .map_err(|_| MaslovError::InvalidParameter(format!("bad number '{s}'")))
    };
    let mut rows = Vec::new();
    for rec in rd.records() {
        let rec = rec?;
        if rec.len() != CSV_HEADER.len() {
            return Err(MaslovError::InvalidParameter(format!(
                "expected 5 fields, got {}",
                rec.len()
            )));
        }
        let maslov = match &rec[2] {
            NEAR_EIGENVALUE => None,
            m => Some(
                m.parse()
                    .map_err(|_| MaslovError::InvalidParameter(format!("bad index '{m}'")))?,
            ),
        };
        let crossings = rec[3].parse().map_err(|_| {
            MaslovError::InvalidParameter(format!("bad crossing count '{}'", &rec[3]))
        })?;
        rows.push(ScanRow {
            lambda: num(&rec[0])?,
            evans: num(&rec[1])?,
            maslov,
            crossings,
            drift: num(&rec[4])?,
        });
    }
    Ok(rows)
}

pub fn to_json(rows: &[ScanRow]) -> serde_json::Value {
    rows.iter()
        .map(|r| {
            json!({
                "lambda": r.lambda,
                "evans": r.evans,
                "maslov": r.maslov.map_or(json!(NEAR_EIGENVALUE), |m| json!(m)),
                "crossings": r.crossings,
                "drift": r.drift,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_round_trip_is_identical() {
        let rows = vec![
            ScanRow {
                lambda: -0.1,
                evans: 1.0 / 3.0,
                maslov: Some(2),
                crossings: 2,
                drift: 0.0,
            },
            ScanRow {
                lambda: 0.2,
                evans: -1e-300,
                maslov: None,
                crossings: 0,
                drift: 5e-14,
            },
        ];
        let mut first = Vec::new();
        write_csv(&rows, &mut first).unwrap();
        let parsed = read_csv(first.as_slice()).unwrap();
        assert_eq!(parsed, rows);
        let mut second = Vec::new();
        write_csv(&parsed, &mut second).unwrap();
        assert_eq!(first, second);
    }

    #[test]
    fn grid_endpoints_included() {
        let g = lambda_grid(-1.0, 1.0, 5).unwrap();
        assert_eq!(g, vec![-1.0, -0.5, 0.0, 0.5, 1.0]);
        assert!(lambda_grid(1.0, 0.0, 5).is_err());
    }
}
