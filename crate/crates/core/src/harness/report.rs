//! Order regression, CSV files and gnuplot scripts.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::experiment::ExperimentResult;
use super::HarnessError;
use crate::schemes::Convergence;

/// Least-squares line through `(log₂ h, log₂ error)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Fit {
    pub slope: f64,
    pub intercept: f64,
    /// Root mean square of the residuals, in log₂ units.
    pub residual: f64,
}

pub fn estimate_order(hs: &[f64], errors: &[f64]) -> Result<Fit, HarnessError> {
    if hs.len() != errors.len() {
        return Err(HarnessError::Fit("step sizes and errors differ in length".into()));
    }
    if hs.len() < 2 {
        return Err(HarnessError::Fit("need at least two points".into()));
    }
    if let Some(v) = hs.iter().chain(errors).find(|v| !(**v > 0.0) || !v.is_finite()) {
        return Err(HarnessError::Fit(format!("nonpositive or non-finite value {v}")));
    }
    let x: Vec<f64> = hs.iter().map(|h| h.log2()).collect();
    let y: Vec<f64> = errors.iter().map(|e| e.log2()).collect();
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    if sxx == 0.0 {
        return Err(HarnessError::Fit("all step sizes are equal".into()));
    }
    let sxy: f64 = x.iter().zip(&y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss: f64 = x
        .iter()
        .zip(&y)
        .map(|(a, b)| (b - intercept - slope * a).powi(2))
        .sum();
    Ok(Fit {
        slope,
        intercept,
        residual: (ss / n).sqrt(),
    })
}

#[derive(Debug, Serialize, Deserialize)]
struct Row {
    h: f64,
    error: f64,
    stderr: f64,
    #[serde(rename = "M")]
    paths: usize,
    scheme: String,
    method: String,
    iters: String,
    seed: u64,
}

/// Writes `result` to `path` and a gnuplot script beside it; returns the
/// script's path.
pub fn write_csv(result: &ExperimentResult, path: &Path) -> Result<PathBuf, HarnessError> {
    let mut w = csv::Writer::from_path(path)?;
    for i in 0..result.step_sizes.len() {
        w.serialize(Row {
            h: result.step_sizes[i],
            error: result.errors[i],
            stderr: result.stderrs[i],
            paths: result.paths,
            scheme: result.scheme.clone(),
            method: result.method.clone(),
            iters: result.iters.clone(),
            seed: result.seed,
        })?;
    }
    w.flush()?;
    let script = path.with_extension("gp");
    fs::write(&script, gnuplot_script(result, path))?;
    Ok(script)
}

/// Reads a file written by [`write_csv`]. Abort counts are not stored and
/// come back as zero.
pub fn read_csv(path: &Path, convergence: Convergence) -> Result<ExperimentResult, HarnessError> {
    let mut r = csv::Reader::from_path(path)?;
    let rows: Vec<Row> = r.deserialize().collect::<Result<_, _>>()?;
    let first = rows
        .first()
        .ok_or_else(|| HarnessError::Config(format!("{} has no rows", path.display())))?;
    let step_sizes: Vec<f64> = rows.iter().map(|r| r.h).collect();
    let errors: Vec<f64> = rows.iter().map(|r| r.error).collect();
    let fit = estimate_order(&step_sizes, &errors)?;
    Ok(ExperimentResult {
        convergence,
        scheme: first.scheme.clone(),
        method: first.method.clone(),
        iters: first.iters.clone(),
        stderrs: rows.iter().map(|r| r.stderr).collect(),
        aborted: vec![0; rows.len()],
        paths: first.paths,
        seed: first.seed,
        step_sizes,
        errors,
        fit,
    })
}

pub fn gnuplot_script(result: &ExperimentResult, csv: &Path) -> String {
    let name = csv.file_name().map_or_else(|| csv.display().to_string(), |n| n.to_string_lossy().into_owned());
    let kind = match result.convergence {
        Convergence::Strong => "strong",
        Convergence::Weak => "weak",
    };
    format!(
        "set datafile separator ','\n\
         set logscale xy 2\n\
         set key top left\n\
         set xlabel 'h'\n\
         set ylabel '{kind} error'\n\
         set title '{scheme}, {method} x {iters}: slope {slope:.3}'\n\
         fit_line(x) = 2**({intercept:.6}) * x**({slope:.6})\n\
         plot '{name}' every ::1 using 1:2:3 with yerrorbars title 'error', \\\n     \
         fit_line(x) with lines title 'fit'\n\
         pause -1\n",
        scheme = result.scheme,
        method = result.method,
        iters = result.iters,
        slope = result.fit.slope,
        intercept = result.fit.intercept,
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_power_laws() {
        let hs = [0.5, 0.25, 0.125];
        let fit = estimate_order(&hs, &hs.map(|h| 3.0 * h)).unwrap();
        assert!((fit.slope - 1.0).abs() < 1e-14);
        assert!((fit.intercept - 3f64.log2()).abs() < 1e-14);
        let fit = estimate_order(&hs, &hs.map(|h| 0.7 * h * h.sqrt())).unwrap();
        assert!((fit.slope - 1.5).abs() < 1e-14);
        assert!(fit.residual < 1e-14);
    }

    #[test]
    fn invalid_inputs() {
        assert!(estimate_order(&[0.5], &[0.1]).is_err());
        assert!(estimate_order(&[0.5, 0.25], &[0.1, 0.0]).is_err());
        assert!(estimate_order(&[0.5, 0.5], &[0.1, 0.2]).is_err());
        assert!(estimate_order(&[0.5, 0.25], &[0.1]).is_err());
    }
}
