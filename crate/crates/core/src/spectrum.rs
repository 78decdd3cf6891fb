//! Spectra on detuning grids, exact line lists, and the weight-conserving
//! binning between them. Intensities are spectral densities (1/Hz) so that
//! the trapezoid area carries the declared normalization.

use crate::error::{Error, Result};
use std::io::{BufRead, Write};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Normalization {
    /// Trapezoid area 1.
    UnitArea,
    /// Maximum intensity 1.
    PeakUnit,
    /// No constraint.
    Raw,
}

impl Normalization {
    pub fn tag(&self) -> &'static str {
        match self {
            Normalization::UnitArea => "unit-area",
            Normalization::PeakUnit => "peak-unit",
            Normalization::Raw => "raw",
        }
    }

    pub fn from_tag(tag: &str) -> Result<Self> {
        match tag {
            "unit-area" => Ok(Normalization::UnitArea),
            "peak-unit" => Ok(Normalization::PeakUnit),
            "raw" => Ok(Normalization::Raw),
            other => Err(Error::InvalidArgument(format!(
                "unknown normalization tag '{other}'"
            ))),
        }
    }
}

#[derive(Debug, Clone)]
pub struct Spectrum {
    detunings: Vec<f64>,
    intensities: Vec<f64>,
    normalization: Normalization,
}

impl Spectrum {
    pub fn new(
        detunings: Vec<f64>,
        intensities: Vec<f64>,
        normalization: Normalization,
    ) -> Result<Self> {
        if detunings.len() != intensities.len() || detunings.len() < 2 {
            return Err(Error::InvalidArgument(format!(
                "spectrum needs matching axes with >= 2 points, got {} and {}",
                detunings.len(),
                intensities.len()
            )));
        }
        if !detunings.windows(2).all(|w| w[1] > w[0]) {
            return Err(Error::InvalidArgument(
                "detunings must be strictly increasing".into(),
            ));
        }
        if let Some(&bad) = intensities.iter().find(|&&v| !(v >= 0.0) || !v.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "intensities must be non-negative and finite, found {bad}"
            )));
        }
        let s = Self {
            detunings,
            intensities,
            normalization,
        };
        s.check_normalization()?;
        Ok(s)
    }

    fn check_normalization(&self) -> Result<()> {
        let err = match self.normalization {
            Normalization::UnitArea => (self.area() - 1.0).abs(),
            Normalization::PeakUnit => (self.peak_intensity() - 1.0).abs(),
            Normalization::Raw => 0.0,
        };
        if err > 1e-6 {
            return Err(Error::NormalizationViolated {
                tag: self.normalization.tag().into(),
                error: err,
            });
        }
        Ok(())
    }

    pub fn detunings(&self) -> &[f64] {
        &self.detunings
    }

    pub fn intensities(&self) -> &[f64] {
        &self.intensities
    }

    pub fn normalization(&self) -> Normalization {
        self.normalization
    }

    pub fn len(&self) -> usize {
        self.detunings.len()
    }

    pub fn is_empty(&self) -> bool {
        self.detunings.is_empty()
    }

    /// Trapezoid area.
    pub fn area(&self) -> f64 {
        trapezoid(&self.detunings, &self.intensities)
    }

    pub fn peak_intensity(&self) -> f64 {
        self.intensities.iter().cloned().fold(0.0, f64::max)
    }

    /// Detuning of the highest sample, refined parabolically.
    pub fn peak_position(&self) -> f64 {
        let i = self
            .intensities
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.total_cmp(b.1))
            .map(|(i, _)| i)
            .unwrap();
        if i == 0 || i == self.len() - 1 {
            return self.detunings[i];
        }
        let (x0, x1, x2) = (
            self.detunings[i - 1],
            self.detunings[i],
            self.detunings[i + 1],
        );
        let (y0, y1, y2) = (
            self.intensities[i - 1],
            self.intensities[i],
            self.intensities[i + 1],
        );
        let d01 = (y1 - y0) / (x1 - x0);
        let d12 = (y2 - y1) / (x2 - x1);
        let second = (d12 - d01) / (x2 - x0);
        if second < 0.0 {
            let v = 0.5 * (x0 + x1) - d01 / (2.0 * second);
            if v > x0 && v < x2 {
                return v;
            }
        }
        x1
    }

    /// First moment of the area-normalized density.
    pub fn first_moment(&self) -> f64 {
        let weighted: Vec<f64> = self
            .detunings
            .iter()
            .zip(&self.intensities)
            .map(|(&x, &y)| x * y)
            .collect();
        trapezoid(&self.detunings, &weighted) / self.area()
    }

    /// Central second moment of the area-normalized density.
    pub fn variance(&self) -> f64 {
        let mu = self.first_moment();
        let weighted: Vec<f64> = self
            .detunings
            .iter()
            .zip(&self.intensities)
            .map(|(&x, &y)| (x - mu) * (x - mu) * y)
            .collect();
        trapezoid(&self.detunings, &weighted) / self.area()
    }

    pub fn into_normalized(mut self, normalization: Normalization) -> Result<Self> {
        let scale = match normalization {
            Normalization::UnitArea => self.area(),
            Normalization::PeakUnit => self.peak_intensity(),
            Normalization::Raw => 1.0,
        };
        if !(scale > 0.0) {
            return Err(Error::InvalidArgument(
                "cannot normalize an empty spectrum".into(),
            ));
        }
        for v in self.intensities.iter_mut() {
            *v /= scale;
        }
        self.normalization = normalization;
        self.check_normalization()?;
        Ok(self)
    }

    /// L1 distance between two spectra sharing a detuning grid.
    pub fn l1_distance(&self, other: &Spectrum) -> Result<f64> {
        if self.detunings != other.detunings {
            return Err(Error::InvalidArgument(
                "spectra live on different grids".into(),
            ));
        }
        let diff: Vec<f64> = self
            .intensities
            .iter()
            .zip(&other.intensities)
            .map(|(&a, &b)| (a - b).abs())
            .collect();
        Ok(trapezoid(&self.detunings, &diff))
    }

    /// CSV export: comment line with the normalization tag, then a header
    /// and one `detuning_hz,intensity` row per sample.
    pub fn to_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "# normalization: {}", self.normalization.tag())?;
        writeln!(out, "detuning_hz,intensity")?;
        for (&x, &y) in self.detunings.iter().zip(&self.intensities) {
            writeln!(out, "{x:.17e},{y:.17e}")?;
        }
        Ok(())
    }

    pub fn from_csv<R: BufRead>(reader: R) -> Result<Self> {
        let mut normalization = Normalization::Raw;
        let mut detunings = Vec::new();
        let mut intensities = Vec::new();
        let mut saw_header = false;
        for (lineno, line) in reader.lines().enumerate() {
            let line = line?;
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            if let Some(rest) = line.strip_prefix('#') {
                if let Some(tag) = rest.trim().strip_prefix("normalization:") {
                    normalization = Normalization::from_tag(tag.trim())?;
                }
                continue;
            }
            if !saw_header {
                if line != "detuning_hz,intensity" {
                    return Err(Error::CsvParse {
                        line: lineno + 1,
                        msg: format!("expected header 'detuning_hz,intensity', got '{line}'"),
                    });
                }
                saw_header = true;
                continue;
            }
            let mut parts = line.split(',');
            let x = parse_field(parts.next(), lineno)?;
            let y = parse_field(parts.next(), lineno)?;
            detunings.push(x);
            intensities.push(y);
        }
        Spectrum::new(detunings, intensities, normalization)
    }
}

fn parse_field(field: Option<&str>, lineno: usize) -> Result<f64> {
    field
        .ok_or(Error::CsvParse {
            line: lineno + 1,
            msg: "missing field".into(),
        })?
        .trim()
        .parse()
        .map_err(|e| Error::CsvParse {
            line: lineno + 1,
            msg: format!("{e}"),
        })
}

pub fn trapezoid(x: &[f64], y: &[f64]) -> f64 {
    let mut acc = 0.0;
    for i in 0..x.len() - 1 {
        acc += 0.5 * (x[i + 1] - x[i]) * (y[i] + y[i + 1]);
    }
    acc
}

/// Uniform detuning grid, inclusive of both ends.
pub fn uniform_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    let step = (hi - lo) / (n - 1) as f64;
    (0..n).map(|i| lo + i as f64 * step).collect()
}

/// A spectrum as an exact list of (detuning, weight) lines; moments are
/// computed from the list, free of binning error.
#[derive(Debug, Clone, Default)]
pub struct LineSpectrum {
    lines: Vec<(f64, f64)>,
}

impl LineSpectrum {
    pub fn new(lines: Vec<(f64, f64)>) -> Self {
        Self { lines }
    }

    pub fn push(&mut self, position_hz: f64, weight: f64) {
        self.lines.push((position_hz, weight));
    }

    pub fn lines(&self) -> &[(f64, f64)] {
        &self.lines
    }

    pub fn total_weight(&self) -> f64 {
        self.lines.iter().map(|&(_, w)| w).sum()
    }

    pub fn mean(&self) -> f64 {
        let w = self.total_weight();
        self.lines.iter().map(|&(x, wi)| x * wi).sum::<f64>() / w
    }

    pub fn variance(&self) -> f64 {
        let w = self.total_weight();
        let mu = self.mean();
        self.lines
            .iter()
            .map(|&(x, wi)| (x - mu) * (x - mu) * wi)
            .sum::<f64>()
            / w
    }

    /// Deposit the lines onto a grid by the nearest-two-node linear split,
    /// which conserves both total weight and first moment exactly. Lines
    /// falling off the grid abort with the lost weight.
    pub fn bin_onto(&self, grid: &[f64]) -> Result<Spectrum> {
        let n = grid.len();
        if n < 2 {
            return Err(Error::InvalidArgument("binning grid too short".into()));
        }
        let mut node_weights = vec![0.0f64; n];
        let mut lost = 0.0f64;
        for &(x, w) in &self.lines {
            if x < grid[0] || x > grid[n - 1] {
                lost += w;
                continue;
            }
            let mut lo = 0usize;
            let mut hi = n - 1;
            while hi - lo > 1 {
                let mid = (lo + hi) / 2;
                if grid[mid] <= x {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            let t = (x - grid[lo]) / (grid[hi] - grid[lo]);
            node_weights[lo] += w * (1.0 - t);
            node_weights[hi] += w * t;
        }
        if lost > 0.0 {
            return Err(Error::GridNotCovering { lost_weight: lost });
        }
        // convert node weights to densities against the trapezoid weights
        let mut trap = vec![0.0f64; n];
        for i in 0..n - 1 {
            let half = 0.5 * (grid[i + 1] - grid[i]);
            trap[i] += half;
            trap[i + 1] += half;
        }
        let intensities: Vec<f64> = node_weights
            .iter()
            .zip(&trap)
            .map(|(&w, &t)| w / t)
            .collect();
        Spectrum::new(grid.to_vec(), intensities, Normalization::Raw)
    }
}
