//! Measured-series ingestion, theory bands from carrier-density uncertainty,
//! and confidence-level exclusion verdicts.
//!
//! The error model is Gaussian: a stated half-width at confidence `p`
//! converts to one standard deviation through the two-sided normal quantile
//! `z_p`, experimental and theory-band uncertainties combine in quadrature,
//! and a point is excluded at level `p` when its distance to the *nearest*
//! band edge exceeds `z_p * sigma_combined`. The band is a set prediction
//! (density uncertainty), so nearest-edge distances keep the test
//! conservative.

use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use serde::{Deserialize, Serialize};

use crate::error::{CasimirError, Result};
use crate::kahan::KahanSum;
use crate::lifshitz::{observable_difference, DifferenceKind, Plate, System, SummationSettings};

/// What a measurement series records.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SeriesKind {
    /// Sphere-plate force difference, N.
    ForceDifference,
    /// Plate-plate pressure difference, Pa.
    PressureDifference,
    /// Absolute plate-plate pressure, Pa.
    Pressure,
}

impl SeriesKind {
    pub fn label(&self) -> &'static str {
        match self {
            SeriesKind::ForceDifference => "force-difference",
            SeriesKind::PressureDifference => "pressure-difference",
            SeriesKind::Pressure => "pressure",
        }
    }

    fn parse(s: &str) -> Option<Self> {
        match s {
            "force-difference" => Some(SeriesKind::ForceDifference),
            "pressure-difference" => Some(SeriesKind::PressureDifference),
            "pressure" => Some(SeriesKind::Pressure),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeasurementPoint {
    /// Separation, m.
    pub separation: f64,
    pub value: f64,
    /// Half-width of the stated confidence interval, same unit as `value`.
    pub half_width: f64,
}

/// Experimental points with errors stated at one confidence level.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeasurementSeries {
    pub kind: SeriesKind,
    /// Confidence of the half-widths, e.g. 0.70.
    pub confidence: f64,
    pub label: String,
    pub temperature: f64,
    pub points: Vec<MeasurementPoint>,
}

impl MeasurementSeries {
    pub fn validate(&self) -> Result<()> {
        if !(self.confidence > 0.5 && self.confidence < 1.0) {
            return Err(CasimirError::domain(
                "stated confidence must lie in (0.5, 1)",
            ));
        }
        if self.points.is_empty() {
            return Err(CasimirError::domain("measurement series is empty"));
        }
        for w in self.points.windows(2) {
            if !(w[1].separation > w[0].separation) {
                return Err(CasimirError::domain(
                    "separations must be strictly increasing",
                ));
            }
        }
        for p in &self.points {
            if !(p.half_width > 0.0 && p.half_width.is_finite()) {
                return Err(CasimirError::domain("half-widths must be positive"));
            }
            if !p.value.is_finite() || !p.separation.is_finite() || p.separation <= 0.0 {
                return Err(CasimirError::domain("non-finite measurement row"));
            }
        }
        Ok(())
    }

    pub fn separations(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.separation).collect()
    }
}

fn schema_err(path: &str, line: usize, message: impl Into<String>) -> CasimirError {
    CasimirError::Schema {
        path: path.to_string(),
        line,
        message: message.into(),
    }
}

fn unit_factor(tag: &str) -> Option<f64> {
    match tag {
        "m" => Some(1.0),
        "um" => Some(1e-6),
        "nm" => Some(1e-9),
        _ => None,
    }
}

/// Parse the measurement CSV schema:
///
/// ```text
/// a_unit,kind,confidence[,label,temperature_k]
/// nm,force-difference,0.70[,dark-vs-light,295]
/// a,value,half_width
/// 100,-3.2e-13,1.1e-13
/// ...
/// ```
///
/// Separations convert to meters on load according to the unit tag.
pub fn read_series<R: std::io::Read>(reader: R, path: &str) -> Result<MeasurementSeries> {
    let buf = BufReader::new(reader);
    let mut lines = buf.lines().enumerate();

    let (_, header) = lines
        .next()
        .ok_or_else(|| schema_err(path, 1, "empty file"))?;
    let header = header?;
    let head: Vec<&str> = header.trim().split(',').collect();
    if head.len() < 3 || head[0] != "a_unit" || head[1] != "kind" || head[2] != "confidence" {
        return Err(schema_err(
            path,
            1,
            "header must start with `a_unit,kind,confidence`",
        ));
    }

    let (_, meta) = lines
        .next()
        .ok_or_else(|| schema_err(path, 2, "missing metadata row"))?;
    let meta = meta?;
    let fields: Vec<&str> = meta.trim().split(',').collect();
    if fields.len() < 3 {
        return Err(schema_err(path, 2, "metadata row needs a_unit, kind, confidence"));
    }
    let factor = unit_factor(fields[0])
        .ok_or_else(|| schema_err(path, 2, format!("unknown separation unit `{}`", fields[0])))?;
    let kind = SeriesKind::parse(fields[1])
        .ok_or_else(|| schema_err(path, 2, format!("unknown series kind `{}`", fields[1])))?;
    let confidence: f64 = fields[2]
        .parse()
        .map_err(|_| schema_err(path, 2, "confidence is not a number"))?;
    let label = fields.get(3).map(|s| s.to_string()).unwrap_or_else(|| {
        Path::new(path)
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| "series".into())
    });
    let temperature: f64 = match fields.get(4) {
        Some(s) => s
            .parse()
            .map_err(|_| schema_err(path, 2, "temperature is not a number"))?,
        None => 295.0,
    };

    let (_, cols) = lines
        .next()
        .ok_or_else(|| schema_err(path, 3, "missing column header"))?;
    let cols = cols?;
    if cols.trim() != "a,value,half_width" {
        return Err(schema_err(path, 3, "column header must be `a,value,half_width`"));
    }

    let mut points = Vec::new();
    for (idx, line) in lines {
        let line_no = idx + 1;
        let line = line?;
        let row = line.trim();
        if row.is_empty() {
            continue;
        }
        let cells: Vec<&str> = row.split(',').collect();
        if cells.len() != 3 {
            return Err(schema_err(path, line_no, "expected 3 comma-separated values"));
        }
        let parse = |cell: &str, what: &str| -> Result<f64> {
            cell.parse::<f64>()
                .map_err(|_| schema_err(path, line_no, format!("{what} is not a number")))
        };
        let a = parse(cells[0], "separation")? * factor;
        let value = parse(cells[1], "value")?;
        let half_width = parse(cells[2], "half_width")?;
        if !a.is_finite() || !value.is_finite() || !half_width.is_finite() {
            return Err(schema_err(path, line_no, "non-finite value"));
        }
        if half_width <= 0.0 {
            return Err(schema_err(path, line_no, "half_width must be > 0"));
        }
        if let Some(last) = points.last() {
            let last: &MeasurementPoint = last;
            if a <= last.separation {
                return Err(schema_err(
                    path,
                    line_no,
                    "separations must be strictly increasing",
                ));
            }
        }
        points.push(MeasurementPoint {
            separation: a,
            value,
            half_width,
        });
    }

    let series = MeasurementSeries {
        kind,
        confidence,
        label,
        temperature,
        points,
    };
    series.validate().map_err(|e| match e {
        CasimirError::Domain(msg) => schema_err(path, 2, msg),
        other => other,
    })?;
    Ok(series)
}

pub fn load_series(path: &Path) -> Result<MeasurementSeries> {
    let file = std::fs::File::open(path)?;
    read_series(file, &path.to_string_lossy())
}

/// Write a series in the same schema (separations in meters, full precision).
pub fn write_series<W: Write>(series: &MeasurementSeries, mut w: W) -> Result<()> {
    writeln!(w, "a_unit,kind,confidence,label,temperature_k")?;
    writeln!(
        w,
        "m,{},{},{},{}",
        series.kind.label(),
        series.confidence,
        series.label,
        series.temperature
    )?;
    writeln!(w, "a,value,half_width")?;
    for p in &series.points {
        writeln!(w, "{},{},{}", p.separation, p.value, p.half_width)?;
    }
    Ok(())
}

/// Inverse standard normal CDF by Acklam's rational approximation
/// (relative error below 1.15e-9 over (0,1)); NaN outside (0,1).
///
/// The test suite checks it against an independent erf-series bisection
/// oracle at the quantiles the exclusion test uses.
pub fn inverse_normal_cdf(p: f64) -> f64 {
    if !(p > 0.0 && p < 1.0) {
        return f64::NAN;
    }
    const A: [f64; 6] = [
        -3.969683028665376e+01,
        2.209460984245205e+02,
        -2.759285104469687e+02,
        1.383577518672690e+02,
        -3.066479806614716e+01,
        2.506628277459239e+00,
    ];
    const B: [f64; 5] = [
        -5.447609879822406e+01,
        1.615858368580409e+02,
        -1.556989798598866e+02,
        6.680131188771972e+01,
        -1.328068155288572e+01,
    ];
    const C: [f64; 6] = [
        -7.784894002430293e-03,
        -3.223964580411365e-01,
        -2.400758277161838e+00,
        -2.549732539343734e+00,
        4.374664141464968e+00,
        2.938163982698783e+00,
    ];
    const D: [f64; 4] = [
        7.784695709041462e-03,
        3.224671290700398e-01,
        2.445134137142996e+00,
        3.754408661907416e+00,
    ];
    const P_LOW: f64 = 0.02425;

    if p < P_LOW {
        let q = (-2.0 * p.ln()).sqrt();
        (((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    } else if p <= 1.0 - P_LOW {
        let q = p - 0.5;
        let r = q * q;
        (((((A[0] * r + A[1]) * r + A[2]) * r + A[3]) * r + A[4]) * r + A[5]) * q
            / (((((B[0] * r + B[1]) * r + B[2]) * r + B[3]) * r + B[4]) * r + 1.0)
    } else {
        let q = (-2.0 * (1.0 - p).ln()).sqrt();
        -(((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    }
}

/// Two-sided z for a confidence level: `z = Phi^-1((1 + level) / 2)`.
pub fn two_sided_z(level: f64) -> f64 {
    inverse_normal_cdf(0.5 * (1.0 + level))
}

/// Carrier-density uncertainty applied to the modified configuration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DensityBand {
    pub n_min: f64,
    pub n_max: f64,
    /// Sweep plate A's carrier gas.
    pub apply_a: bool,
    /// Sweep plate B's carrier gas.
    pub apply_b: bool,
}

impl DensityBand {
    pub fn validate(&self) -> Result<()> {
        if !(self.n_min >= 0.0 && self.n_min <= self.n_max) {
            return Err(CasimirError::domain("density band needs 0 <= n_min <= n_max"));
        }
        if !(self.apply_a || self.apply_b) {
            return Err(CasimirError::domain("density band applies to no plate"));
        }
        Ok(())
    }
}

/// Per-separation theory envelope from the density band.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TheoryBand {
    pub kind: SeriesKind,
    pub separations: Vec<f64>,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    /// Engine error estimate (truncation + quadrature) per separation.
    pub numerical_error: Vec<f64>,
}

impl TheoryBand {
    pub fn half_width(&self, i: usize) -> f64 {
        0.5 * (self.upper[i] - self.lower[i])
    }

    pub fn center(&self, i: usize) -> f64 {
        0.5 * (self.upper[i] + self.lower[i])
    }
}

fn redensify(system: &System, band: &DensityBand, n: f64) -> Result<System> {
    let apply = |plate: &Plate, on: bool| -> Result<Plate> {
        if !on {
            return Ok(plate.clone());
        }
        match plate {
            Plate::Ideal => Err(CasimirError::domain(
                "density band points at an ideal plate",
            )),
            Plate::Material(m) => Ok(Plate::Material(m.with_carrier_density(n)?)),
        }
    };
    Ok(System {
        plate_a: apply(&system.plate_a, band.apply_a)?,
        plate_b: apply(&system.plate_b, band.apply_b)?,
        scheme: system.scheme,
    })
}

fn difference_kind(kind: SeriesKind) -> DifferenceKind {
    match kind {
        SeriesKind::ForceDifference => DifferenceKind::Force,
        SeriesKind::PressureDifference | SeriesKind::Pressure => DifferenceKind::Pressure,
    }
}

/// Evaluate `modified - base` at the band's density endpoints over the grid
/// and take the per-separation envelope.
///
/// `base = None` means a zero baseline (absolute observable): internally a
/// vacuum plate pair, which contributes exactly nothing. The signed
/// convention throughout is theory = modified - base.
#[allow(clippy::too_many_arguments)]
pub fn theory_band(
    grid: &[f64],
    base: Option<&System>,
    modified: &System,
    band: Option<&DensityBand>,
    kind: SeriesKind,
    radius: Option<f64>,
    temperature: f64,
    settings: &SummationSettings,
) -> Result<TheoryBand> {
    let vacuum_base = System::symmetric(Plate::Material(crate::dielectric::Material::vacuum("vacuum")), modified.scheme);
    let base = base.unwrap_or(&vacuum_base);
    let dkind = difference_kind(kind);

    let configs: Vec<System> = match band {
        None => vec![modified.clone()],
        Some(b) => {
            b.validate()?;
            if b.n_min == b.n_max {
                vec![redensify(modified, b, b.n_min)?]
            } else {
                vec![
                    redensify(modified, b, b.n_min)?,
                    redensify(modified, b, b.n_max)?,
                ]
            }
        }
    };

    let mut lower = vec![f64::INFINITY; grid.len()];
    let mut upper = vec![f64::NEG_INFINITY; grid.len()];
    let mut numerical_error = vec![0.0f64; grid.len()];
    for config in &configs {
        let pts = observable_difference(base, config, grid, dkind, radius, temperature, settings)?;
        for (i, p) in pts.iter().enumerate() {
            lower[i] = lower[i].min(p.value);
            upper[i] = upper[i].max(p.value);
            numerical_error[i] =
                numerical_error[i].max(p.truncation_error + p.quadrature_error);
        }
    }

    Ok(TheoryBand {
        kind,
        separations: grid.to_vec(),
        lower,
        upper,
        numerical_error,
    })
}

/// Per-point exclusion outcome.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PointOutcome {
    pub separation: f64,
    /// Distance from the measured mean to the nearest band edge, in
    /// combined-sigma units; 0 inside the band.
    pub distance_sigma: f64,
    pub sigma_combined: f64,
    /// Levels (ascending) at which this point is excluded.
    pub excluded_at: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LevelVerdict {
    pub level: f64,
    pub excluded: bool,
    /// Fraction of window points excluded at this level.
    pub fraction: f64,
}

/// Exclusion outcome across all requested levels.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComparisonVerdict {
    pub points: Vec<PointOutcome>,
    pub levels: Vec<LevelVerdict>,
    /// Fraction of points that must be excluded for an overall verdict.
    pub point_fraction: f64,
    /// Analysis window in separation, if restricted.
    pub window: Option<(f64, f64)>,
}

/// Test a measured series against a theory band at the given confidence
/// levels.
///
/// Overall: excluded at level `p` when at least `point_fraction` of the
/// points inside the window are individually excluded at `p`.
pub fn exclusion_test(
    series: &MeasurementSeries,
    band: &TheoryBand,
    levels: &[f64],
    window: Option<(f64, f64)>,
    point_fraction: f64,
) -> Result<ComparisonVerdict> {
    series.validate()?;
    if band.separations.len() != series.points.len()
        || band
            .separations
            .iter()
            .zip(&series.points)
            .any(|(&a, p)| a != p.separation)
    {
        return Err(CasimirError::GridMismatch(
            "theory band and series are on different separation grids".into(),
        ));
    }
    if !(point_fraction > 0.0 && point_fraction <= 1.0) {
        return Err(CasimirError::domain("point fraction must lie in (0, 1]"));
    }
    let mut levels: Vec<f64> = levels.to_vec();
    levels.sort_by(|a, b| a.partial_cmp(b).unwrap());
    levels.dedup();
    for &l in &levels {
        if !(l > 0.5 && l < 1.0) {
            return Err(CasimirError::domain("confidence levels must lie in (0.5, 1)"));
        }
    }

    let z_stated = two_sided_z(series.confidence);
    let zs: Vec<f64> = levels.iter().map(|&l| two_sided_z(l)).collect();

    let mut points = Vec::with_capacity(series.points.len());
    for (i, p) in series.points.iter().enumerate() {
        let sigma_expt = p.half_width / z_stated;
        let sigma_theory = band.half_width(i) / z_stated;
        let sigma = (sigma_expt * sigma_expt + sigma_theory * sigma_theory).sqrt();
        let distance = if p.value < band.lower[i] {
            band.lower[i] - p.value
        } else if p.value > band.upper[i] {
            p.value - band.upper[i]
        } else {
            0.0
        };
        let excluded_at: Vec<f64> = levels
            .iter()
            .zip(&zs)
            .filter(|&(_, &z)| distance > z * sigma)
            .map(|(&l, _)| l)
            .collect();
        points.push(PointOutcome {
            separation: p.separation,
            distance_sigma: distance / sigma,
            sigma_combined: sigma,
            excluded_at,
        });
    }

    let in_window = |a: f64| window.map_or(true, |(lo, hi)| a >= lo && a <= hi);
    let window_count = points.iter().filter(|p| in_window(p.separation)).count();
    if window_count == 0 {
        return Err(CasimirError::domain(
            "analysis window contains no measurement points",
        ));
    }

    let level_verdicts = levels
        .iter()
        .map(|&l| {
            let count = points
                .iter()
                .filter(|p| in_window(p.separation) && p.excluded_at.contains(&l))
                .count();
            let fraction = count as f64 / window_count as f64;
            LevelVerdict {
                level: l,
                excluded: fraction >= point_fraction,
                fraction,
            }
        })
        .collect();

    Ok(ComparisonVerdict {
        points,
        levels: level_verdicts,
        point_fraction,
        window,
    })
}

/// Machine-readable comparison report.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Report {
    pub series: MeasurementSeries,
    pub band: TheoryBand,
    /// Signed convention of band values.
    pub convention: String,
    pub per_point: Vec<PointOutcome>,
    pub overall: Vec<LevelVerdict>,
}

pub fn build_report(
    series: &MeasurementSeries,
    band: &TheoryBand,
    verdict: &ComparisonVerdict,
) -> Report {
    Report {
        series: series.clone(),
        band: band.clone(),
        convention: "theory = modified - base; distances from measured mean to nearest band edge"
            .into(),
        per_point: verdict.points.clone(),
        overall: verdict.levels.clone(),
    }
}

pub fn write_report_json<W: Write>(report: &Report, w: W) -> Result<()> {
    serde_json::to_writer_pretty(w, report)
        .map_err(|e| CasimirError::domain(format!("report serialization failed: {e}")))?;
    Ok(())
}

/// Per-point CSV suitable for external plotting.
pub fn write_points_csv<W: Write>(report: &Report, mut w: W) -> Result<()> {
    writeln!(
        w,
        "a_m,measured,half_width,band_lower,band_upper,distance_sigma,sigma_combined,excluded_at"
    )?;
    for (i, p) in report.per_point.iter().enumerate() {
        let levels = p
            .excluded_at
            .iter()
            .map(|l| l.to_string())
            .collect::<Vec<_>>()
            .join(";");
        writeln!(
            w,
            "{},{},{},{},{},{},{},{}",
            p.separation,
            report.series.points[i].value,
            report.series.points[i].half_width,
            report.band.lower[i],
            report.band.upper[i],
            p.distance_sigma,
            p.sigma_combined,
            levels
        )?;
    }
    Ok(())
}

/// Reload the numeric columns of a per-point CSV (round-trip checks).
pub fn read_points_csv<R: std::io::Read>(reader: R) -> Result<Vec<Vec<f64>>> {
    let buf = BufReader::new(reader);
    let mut rows = Vec::new();
    for (i, line) in buf.lines().enumerate() {
        let line = line?;
        if i == 0 {
            continue;
        }
        let cells: Vec<&str> = line.trim().split(',').collect();
        if cells.len() < 7 {
            return Err(schema_err("points-csv", i + 1, "short row"));
        }
        let nums: Vec<f64> = cells[..7]
            .iter()
            .map(|c| c.parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|_| schema_err("points-csv", i + 1, "non-numeric cell"))?;
        rows.push(nums);
    }
    Ok(rows)
}

/// Deterministic synthetic series drawn around the band center.
///
/// Per point: `value = center + sigma * (offset_sigma + N(0,1))` with
/// `sigma = sigma_rel * |center|` (floored at a tenth of the mean magnitude
/// so zero-crossing centers keep a finite width), and
/// `half_width = z(confidence) * sigma`. Sampling is inverse-transform
/// through the same quantile the exclusion test uses, seeded ChaCha.
#[allow(clippy::too_many_arguments)]
pub fn synthesize_series(
    band: &TheoryBand,
    confidence: f64,
    sigma_rel: f64,
    offset_sigma: f64,
    seed: u64,
    label: impl Into<String>,
    temperature: f64,
) -> Result<MeasurementSeries> {
    if !(confidence > 0.5 && confidence < 1.0) {
        return Err(CasimirError::domain("confidence must lie in (0.5, 1)"));
    }
    if !(sigma_rel > 0.0) {
        return Err(CasimirError::domain("sigma_rel must be > 0"));
    }
    let z = two_sided_z(confidence);
    let mean_mag = {
        let mut k = KahanSum::new();
        for i in 0..band.separations.len() {
            k.add(band.center(i).abs());
        }
        k.value() / band.separations.len().max(1) as f64
    };
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let mut points = Vec::with_capacity(band.separations.len());
    for i in 0..band.separations.len() {
        let center = band.center(i);
        let scale = center.abs().max(0.1 * mean_mag).max(f64::MIN_POSITIVE);
        let sigma = sigma_rel * scale;
        let mut u: f64 = rng.gen();
        while u == 0.0 {
            u = rng.gen();
        }
        let value = center + sigma * (offset_sigma + inverse_normal_cdf(u));
        points.push(MeasurementPoint {
            separation: band.separations[i],
            value,
            half_width: z * sigma,
        });
    }
    let series = MeasurementSeries {
        kind: band.kind,
        confidence,
        label: label.into(),
        temperature,
        points,
    };
    series.validate()?;
    Ok(series)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn flat_band(n: usize, center: f64, half: f64) -> TheoryBand {
        let separations: Vec<f64> = (0..n).map(|i| 1e-7 * (i + 1) as f64).collect();
        TheoryBand {
            kind: SeriesKind::ForceDifference,
            lower: vec![center - half; n],
            upper: vec![center + half; n],
            numerical_error: vec![0.0; n],
            separations,
        }
    }

    fn series_on(band: &TheoryBand, values: Vec<f64>, half_width: f64, conf: f64) -> MeasurementSeries {
        MeasurementSeries {
            kind: band.kind,
            confidence: conf,
            label: "test".into(),
            temperature: 295.0,
            points: band
                .separations
                .iter()
                .zip(values)
                .map(|(&a, v)| MeasurementPoint {
                    separation: a,
                    value: v,
                    half_width,
                })
                .collect(),
        }
    }

    // independent oracle: erf by Taylor series, then bisection on the CDF
    fn erf_series(x: f64) -> f64 {
        let mut term = x;
        let mut sum = x;
        for n in 1..200 {
            term *= -x * x / n as f64;
            sum += term / (2.0 * n as f64 + 1.0);
        }
        sum * 2.0 / std::f64::consts::PI.sqrt()
    }

    fn phi(z: f64) -> f64 {
        0.5 * (1.0 + erf_series(z / std::f64::consts::SQRT_2))
    }

    fn probit_oracle(p: f64) -> f64 {
        let (mut lo, mut hi) = (-9.0f64, 9.0f64);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if phi(mid) < p {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }

    #[test]
    fn inverse_normal_matches_series_oracle() {
        for &p in &[0.6, 0.75, 0.85, 0.95, 0.975, 0.999, 0.9995, 0.01, 0.3] {
            let got = inverse_normal_cdf(p);
            let want = probit_oracle(p);
            assert!(
                (got - want).abs() <= 2e-9 * (1.0 + want.abs()),
                "p={p}: {got} vs {want}"
            );
        }
        // frozen quantiles used by the exclusion examples
        assert!((two_sided_z(0.70) - 1.036433).abs() < 1e-5);
        assert!((two_sided_z(0.95) - 1.959964).abs() < 1e-5);
        assert!((two_sided_z(0.999) - 3.290527).abs() < 1e-5);
        assert!(inverse_normal_cdf(0.0).is_nan());
    }

    #[test]
    fn loader_happy_path_and_units() {
        let text = "a_unit,kind,confidence\nnm,force-difference,0.70\na,value,half_width\n\
                    100,1.0e-13,2e-14\n200,0.5e-13,2e-14\n300,0.2e-13,2e-14\n";
        let s = read_series(text.as_bytes(), "inline").unwrap();
        assert_eq!(s.points.len(), 3);
        assert_eq!(s.kind, SeriesKind::ForceDifference);
        assert!((s.points[0].separation - 1e-7).abs() < 1e-22);
        assert_eq!(s.temperature, 295.0);
    }

    #[test]
    fn loader_rejects_bad_rows_with_line_numbers() {
        let zero_width = "a_unit,kind,confidence\nm,pressure,0.95\na,value,half_width\n\
                          1e-6,5.0,0.1\n2e-6,5.0,0\n";
        match read_series(zero_width.as_bytes(), "bad") {
            Err(CasimirError::Schema { line, .. }) => assert_eq!(line, 5),
            other => panic!("expected schema error, got {other:?}"),
        }

        let non_monotone = "a_unit,kind,confidence\nm,pressure,0.95\na,value,half_width\n\
                            2e-6,5.0,0.1\n1e-6,5.0,0.1\n";
        assert!(matches!(
            read_series(non_monotone.as_bytes(), "bad"),
            Err(CasimirError::Schema { line: 5, .. })
        ));

        let nan_row = "a_unit,kind,confidence\nm,pressure,0.95\na,value,half_width\n\
                       1e-6,NaN,0.1\n";
        assert!(read_series(nan_row.as_bytes(), "bad").is_err());
    }

    #[test]
    fn series_roundtrip() {
        let band = flat_band(4, -2.5e-13, 1e-14);
        let s = synthesize_series(&band, 0.7, 0.1, 0.0, 7, "synthetic", 295.0).unwrap();
        let mut buf = Vec::new();
        write_series(&s, &mut buf).unwrap();
        let reloaded = read_series(buf.as_slice(), "mem").unwrap();
        assert_eq!(s, reloaded);
    }

    #[test]
    fn point_on_band_edge_not_excluded() {
        let band = flat_band(3, 1.0, 0.2);
        let series = series_on(&band, vec![1.2, 0.8, 1.0], 0.1, 0.70);
        let v = exclusion_test(&series, &band, &[0.70, 0.95, 0.999], None, 0.95).unwrap();
        for p in &v.points {
            assert_eq!(p.distance_sigma, 0.0);
            assert!(p.excluded_at.is_empty());
        }
        for l in &v.levels {
            assert!(!l.excluded);
        }
    }

    #[test]
    fn sigma_distances_pick_correct_levels() {
        // zero-width band, half_width = z_0.70 * sigma with sigma = 1
        let z = two_sided_z(0.70);
        let band = flat_band(2, 0.0, 0.0);
        // 4 sigma away: excluded at all three levels; 1.5 sigma: only at 0.70
        let series = series_on(&band, vec![4.0, 1.5], z, 0.70);
        let v = exclusion_test(&series, &band, &[0.70, 0.95, 0.999], None, 0.95).unwrap();
        assert_eq!(v.points[0].excluded_at, vec![0.70, 0.95, 0.999]);
        assert_eq!(v.points[1].excluded_at, vec![0.70]);
        assert!((v.points[0].distance_sigma - 4.0).abs() < 1e-12);
    }

    #[test]
    fn monotone_exclusion_invariant() {
        let band = flat_band(5, 0.0, 0.1);
        let z = two_sided_z(0.8);
        let series = series_on(&band, vec![0.05, 0.3, 0.9, 2.5, 7.0], z * 0.3, 0.8);
        let levels = [0.6, 0.8, 0.95, 0.999];
        let v = exclusion_test(&series, &band, &levels, None, 0.95).unwrap();
        for p in &v.points {
            // excluded at p implies excluded at every smaller level
            for (i, &l) in levels.iter().enumerate() {
                if p.excluded_at.contains(&l) {
                    for &smaller in &levels[..i] {
                        assert!(p.excluded_at.contains(&smaller));
                    }
                }
            }
        }
    }

    #[test]
    fn negation_symmetry() {
        let band = flat_band(3, 2.0, 0.5);
        let series = series_on(&band, vec![4.0, 2.1, -1.0], 0.4, 0.85);
        let v1 = exclusion_test(&series, &band, &[0.85, 0.99], None, 0.95).unwrap();

        let neg_band = TheoryBand {
            kind: band.kind,
            separations: band.separations.clone(),
            lower: band.upper.iter().map(|x| -x).collect(),
            upper: band.lower.iter().map(|x| -x).collect(),
            numerical_error: band.numerical_error.clone(),
        };
        let neg_series = MeasurementSeries {
            points: series
                .points
                .iter()
                .map(|p| MeasurementPoint {
                    separation: p.separation,
                    value: -p.value,
                    half_width: p.half_width,
                })
                .collect(),
            ..series.clone()
        };
        let v2 = exclusion_test(&neg_series, &neg_band, &[0.85, 0.99], None, 0.95).unwrap();
        for (a, b) in v1.points.iter().zip(&v2.points) {
            assert!((a.distance_sigma - b.distance_sigma).abs() < 1e-12);
            assert_eq!(a.excluded_at, b.excluded_at);
        }
        for (a, b) in v1.levels.iter().zip(&v2.levels) {
            assert_eq!(a.excluded, b.excluded);
        }
    }

    #[test]
    fn grid_mismatch_rejected() {
        let band = flat_band(3, 1.0, 0.1);
        let other = flat_band(4, 1.0, 0.1);
        let series = series_on(&other, vec![1.0; 4], 0.1, 0.7);
        assert!(matches!(
            exclusion_test(&series, &band, &[0.7], None, 0.95),
            Err(CasimirError::GridMismatch(_))
        ));
    }

    #[test]
    fn calibration_small_sample() {
        // at the band center with matching stated confidence, the per-point
        // exclusion rate at that level tends to 1 - p
        let band = flat_band(10, -3e-13, 0.0);
        let trials = 400usize;
        let mut excluded = 0usize;
        let mut total = 0usize;
        for t in 0..trials {
            let s = synthesize_series(&band, 0.70, 0.05, 0.0, 1000 + t as u64, "cal", 295.0)
                .unwrap();
            let v = exclusion_test(&s, &band, &[0.70], None, 0.95).unwrap();
            excluded += v
                .points
                .iter()
                .filter(|p| p.excluded_at.contains(&0.70))
                .count();
            total += v.points.len();
        }
        let rate = excluded as f64 / total as f64;
        let sigma = (0.3f64 * 0.7 / total as f64).sqrt();
        assert!(
            (rate - 0.30).abs() < 4.0 * sigma,
            "rate {rate} vs 0.30 +- {sigma}"
        );
    }

    #[test]
    fn report_roundtrip_and_shape() {
        let band = flat_band(3, 1.0, 0.2);
        let series = series_on(&band, vec![1.5, 0.9, 2.0], 0.15, 0.70);
        let v = exclusion_test(&series, &band, &[0.70, 0.999], None, 0.95).unwrap();
        let report = build_report(&series, &band, &v);

        let mut json = Vec::new();
        write_report_json(&report, &mut json).unwrap();
        let text = String::from_utf8(json).unwrap();
        for key in ["series", "band", "per_point", "overall", "convention"] {
            assert!(text.contains(key), "report missing block {key}");
        }

        let mut csv = Vec::new();
        write_points_csv(&report, &mut csv).unwrap();
        let rows = read_points_csv(csv.as_slice()).unwrap();
        assert_eq!(rows.len(), 3);
        for (i, row) in rows.iter().enumerate() {
            assert_eq!(row[0], band.separations[i]);
            assert_eq!(row[1], series.points[i].value);
            assert_eq!(row[5], v.points[i].distance_sigma);
        }
    }

    #[test]
    fn empty_levels_report_has_distances_only() {
        let band = flat_band(2, 1.0, 0.1);
        let series = series_on(&band, vec![2.0, 1.0], 0.2, 0.70);
        let v = exclusion_test(&series, &band, &[], None, 0.95).unwrap();
        assert!(v.levels.is_empty());
        assert!(v.points.iter().all(|p| p.excluded_at.is_empty()));
        assert!(v.points[0].distance_sigma > 0.0);
    }

    #[test]
    fn window_restricts_overall_fraction() {
        let band = flat_band(4, 0.0, 0.0);
        let z = two_sided_z(0.7);
        // two far points in the window, two near points outside it
        let series = series_on(&band, vec![5.0, 5.0, 0.1, 0.1], z, 0.7);
        let window = Some((band.separations[0], band.separations[1]));
        let v = exclusion_test(&series, &band, &[0.7], window, 0.95).unwrap();
        assert!(v.levels[0].excluded);
        let v_all = exclusion_test(&series, &band, &[0.7], None, 0.95).unwrap();
        assert!(!v_all.levels[0].excluded);
    }
}
