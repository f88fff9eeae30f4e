use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::io::Write;

use serde::Serialize;
use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::error::{Error, Result};

/// Least-squares slope of `ln y` against `ln x` with its 95% half-width.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SlopeFit {
    pub slope: f64,
    pub intercept: f64,
    /// NaN with fewer than three points.
    pub half_width: f64,
    pub n: usize,
}

pub fn fit_slope(x: &[f64], y: &[f64]) -> Result<SlopeFit> {
    if x.len() != y.len() || x.len() < 2 {
        return Err(Error::InvalidParams("slope fit needs at least two paired points".into()));
    }
    if x.iter().chain(y).any(|v| !(*v > 0.0 && v.is_finite())) {
        return Err(Error::DomainError("slope fit needs positive finite values".into()));
    }
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let n = lx.len();
    let mx = lx.iter().sum::<f64>() / n as f64;
    let my = ly.iter().sum::<f64>() / n as f64;
    let sxx: f64 = lx.iter().map(|a| (a - mx).powi(2)).sum();
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let half_width = if n > 2 {
        let rss: f64 = lx.iter().zip(&ly).map(|(a, b)| (b - intercept - slope * a).powi(2)).sum();
        let se = (rss / (n - 2) as f64 / sxx).sqrt();
        let t = StudentsT::new(0.0, 1.0, (n - 2) as f64).map_err(|e| Error::DomainError(e.to_string()))?;
        t.inverse_cdf(0.975) * se
    } else {
        f64::NAN
    };
    Ok(SlopeFit { slope, intercept, half_width, n })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceRow {
    pub epsilon: f64,
    pub metrics: BTreeMap<String, f64>,
}

/// Error metrics per `eps`, rows sorted by decreasing `eps`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceTable {
    pub experiment: String,
    pub rows: Vec<ConvergenceRow>,
    pub fits: BTreeMap<String, SlopeFit>,
    /// Exponent of the upper bound the metric is compared against.
    pub predicted_slope: f64,
    pub notes: Vec<String>,
}

impl ConvergenceTable {
    pub fn new(experiment: &str, mut rows: Vec<ConvergenceRow>, predicted_slope: f64) -> Result<Self> {
        rows.sort_by(|a, b| b.epsilon.total_cmp(&a.epsilon));
        if rows.windows(2).any(|w| w[0].epsilon <= w[1].epsilon) {
            return Err(Error::InvalidParams("epsilons must be distinct".into()));
        }
        if rows.iter().any(|r| r.metrics.values().any(|v| !v.is_finite())) {
            return Err(Error::DomainError("non-finite error metric".into()));
        }
        let mut fits = BTreeMap::new();
        if rows.len() >= 2 {
            let eps: Vec<f64> = rows.iter().map(|r| r.epsilon).collect();
            for name in rows[0].metrics.keys() {
                let y: Vec<f64> = rows.iter().map(|r| r.metrics[name]).collect();
                if let Ok(f) = fit_slope(&eps, &y) {
                    fits.insert(name.clone(), f);
                }
            }
        }
        Ok(ConvergenceTable { experiment: experiment.to_string(), rows, fits, predicted_slope, notes: Vec::new() })
    }

    pub fn column(&self, metric: &str) -> Vec<f64> {
        self.rows.iter().map(|r| r.metrics.get(metric).copied().unwrap_or(f64::NAN)).collect()
    }

    /// Whether the metric strictly decreases as `eps` decreases.
    pub fn is_monotone_decreasing(&self, metric: &str) -> bool {
        self.column(metric).windows(2).all(|w| w[1] < w[0])
    }

    /// Rows as CSV with `#` metadata lines for fits and notes; see `docs/formats.md`.
    pub fn write_csv<W: Write>(&self, out: &mut W) -> Result<()> {
        let names: Vec<&String> = self.rows.first().map(|r| r.metrics.keys().collect()).unwrap_or_default();
        let mut header = String::from("epsilon");
        for n in &names {
            write!(header, ",{n}").unwrap();
        }
        writeln!(out, "{header}")?;
        for r in &self.rows {
            let mut line = format!("{:.6e}", r.epsilon);
            for n in &names {
                write!(line, ",{:.12e}", r.metrics[*n]).unwrap();
            }
            writeln!(out, "{line}")?;
        }
        for (name, f) in &self.fits {
            writeln!(out, "# fit {name} slope={:.6} half_width={:.6} n={}", f.slope, f.half_width, f.n)?;
        }
        writeln!(out, "# predicted_slope={:.6}", self.predicted_slope)?;
        for note in &self.notes {
            writeln!(out, "# note {note}")?;
        }
        Ok(())
    }

    /// Log-log plot of the named metric against `eps` with its fitted line.
    pub fn to_svg(&self, metric: &str) -> String {
        let (w, h, pad) = (480.0, 360.0, 50.0);
        let pts: Vec<(f64, f64)> =
            self.rows.iter().filter_map(|r| r.metrics.get(metric).map(|v| (r.epsilon.log10(), v.log10()))).collect();
        let mut s = format!("<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w}\" height=\"{h}\">\n");
        if pts.is_empty() {
            s.push_str("</svg>\n");
            return s;
        }
        let (x0, x1) = minmax(pts.iter().map(|p| p.0));
        let (y0, y1) = minmax(pts.iter().map(|p| p.1));
        let sx = |x: f64| pad + (x - x0) / (x1 - x0).max(1e-12) * (w - 2.0 * pad);
        let sy = |y: f64| h - pad - (y - y0) / (y1 - y0).max(1e-12) * (h - 2.0 * pad);
        writeln!(s, "<rect x=\"{pad}\" y=\"{pad}\" width=\"{}\" height=\"{}\" fill=\"none\" stroke=\"black\"/>", w - 2.0 * pad, h - 2.0 * pad).unwrap();
        let line: Vec<String> = pts.iter().map(|(x, y)| format!("{:.2},{:.2}", sx(*x), sy(*y))).collect();
        writeln!(s, "<polyline points=\"{}\" fill=\"none\" stroke=\"steelblue\"/>", line.join(" ")).unwrap();
        for (x, y) in &pts {
            writeln!(s, "<circle cx=\"{:.2}\" cy=\"{:.2}\" r=\"3\" fill=\"steelblue\"/>", sx(*x), sy(*y)).unwrap();
        }
        if let Some(f) = self.fits.get(metric) {
            let l10 = std::f64::consts::LN_10;
            let fy = |x: f64| (f.intercept / l10) + f.slope * x;
            writeln!(
                s,
                "<line x1=\"{:.2}\" y1=\"{:.2}\" x2=\"{:.2}\" y2=\"{:.2}\" stroke=\"gray\" stroke-dasharray=\"4\"/>",
                sx(x0),
                sy(fy(x0)),
                sx(x1),
                sy(fy(x1))
            )
            .unwrap();
            writeln!(s, "<text x=\"{pad}\" y=\"{:.0}\" font-size=\"12\">{metric}: slope {:.3}</text>", pad - 10.0, f.slope).unwrap();
        }
        writeln!(s, "<text x=\"{:.0}\" y=\"{:.0}\" font-size=\"12\">log10 eps</text>", w / 2.0 - 30.0, h - 15.0).unwrap();
        s.push_str("</svg>\n");
        s
    }
}

fn minmax(it: impl Iterator<Item = f64>) -> (f64, f64) {
    it.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v), b.max(v)))
}
