//! Two-dimensional benchmark datasets (moons, circles), stratified splits,
//! phase scaling and CSV persistence.

use std::f64::consts::PI;
use std::fs;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::svm::Label;
use crate::util::format_sig12;

pub const DEFAULT_CIRCLES_FACTOR: f64 = 0.8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Generator {
    Moons,
    Circles,
    Loaded,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetMeta {
    pub generator: Generator,
    pub n: usize,
    pub zeta: f64,
    pub factor: Option<f64>,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    pub points: Vec<[f64; 2]>,
    pub labels: Vec<Label>,
    pub meta: DatasetMeta,
}

impl Dataset {
    pub fn new(points: Vec<[f64; 2]>, labels: Vec<Label>, meta: DatasetMeta) -> Result<Self> {
        if points.len() != labels.len() {
            return Err(Error::dims(
                "Dataset::new",
                format!("{} points vs {} labels", points.len(), labels.len()),
            ));
        }
        if let Some(l) = labels.iter().find(|&&l| l != 1 && l != -1) {
            return Err(Error::invalid(format!("labels must be +1 or -1, got {l}")));
        }
        if points.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::invalid("dataset contains non-finite coordinates"));
        }
        Ok(Dataset { points, labels, meta })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// `(count of +1, count of −1)`.
    pub fn class_counts(&self) -> (usize, usize) {
        let pos = self.labels.iter().filter(|&&l| l == 1).count();
        (pos, self.labels.len() - pos)
    }

    /// Per-dimension `(min, max)`.
    pub fn bounds(&self) -> Option<[(f64, f64); 2]> {
        if self.is_empty() {
            return None;
        }
        let mut b = [(f64::INFINITY, f64::NEG_INFINITY); 2];
        for p in &self.points {
            for d in 0..2 {
                b[d].0 = b[d].0.min(p[d]);
                b[d].1 = b[d].1.max(p[d]);
            }
        }
        Some(b)
    }

    fn subset(&self, idx: &[usize]) -> Dataset {
        Dataset {
            points: idx.iter().map(|&i| self.points[i]).collect(),
            labels: idx.iter().map(|&i| self.labels[i]).collect(),
            meta: self.meta.clone(),
        }
    }
}

/// `n` evenly spaced values from `start` to `stop`, including `stop` when `endpoint`.
fn linspace(start: f64, stop: f64, n: usize, endpoint: bool) -> impl Iterator<Item = f64> {
    let div = if endpoint { n.saturating_sub(1).max(1) } else { n.max(1) } as f64;
    let step = (stop - start) / div;
    (0..n).map(move |i| start + step * i as f64)
}

fn check_size(n: usize, zeta: f64) -> Result<()> {
    if n < 4 || n % 2 != 0 {
        return Err(Error::invalid(format!("n must be even and at least 4, got {n}")));
    }
    if !(zeta >= 0.0 && zeta.is_finite()) {
        return Err(Error::invalid(format!("noise level must be finite and >= 0, got {zeta}")));
    }
    Ok(())
}

fn add_noise(points: &mut [[f64; 2]], zeta: f64, seed: u64) {
    if zeta == 0.0 {
        return;
    }
    let normal = Normal::new(0.0, zeta).expect("validated noise level");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for p in points.iter_mut() {
        p[0] += normal.sample(&mut rng);
        p[1] += normal.sample(&mut rng);
    }
}

/// Two interleaving half circles. The upper arc is labelled `+1`.
pub fn make_moons(n: usize, zeta: f64, seed: u64) -> Result<Dataset> {
    check_size(n, zeta)?;
    let half = n / 2;
    let mut points: Vec<[f64; 2]> = linspace(0.0, PI, half, true)
        .map(|t| [t.cos(), t.sin()])
        .collect();
    points.extend(linspace(0.0, PI, half, true).map(|t| [1.0 - t.cos(), 0.5 - t.sin()]));
    let mut labels = vec![1; half];
    labels.extend(vec![-1; half]);
    add_noise(&mut points, zeta, seed);
    Dataset::new(
        points,
        labels,
        DatasetMeta {
            generator: Generator::Moons,
            n,
            zeta,
            factor: None,
            seed,
        },
    )
}

/// Unit circle (`+1`) around a concentric circle of radius `factor` (`−1`).
pub fn make_circles(n: usize, zeta: f64, factor: f64, seed: u64) -> Result<Dataset> {
    check_size(n, zeta)?;
    if !(factor > 0.0 && factor < 1.0) {
        return Err(Error::invalid(format!("factor must lie in (0, 1), got {factor}")));
    }
    let half = n / 2;
    let mut points: Vec<[f64; 2]> = linspace(0.0, 2.0 * PI, half, false)
        .map(|t| [t.cos(), t.sin()])
        .collect();
    points.extend(linspace(0.0, 2.0 * PI, half, false).map(|t| [factor * t.cos(), factor * t.sin()]));
    let mut labels = vec![1; half];
    labels.extend(vec![-1; half]);
    add_noise(&mut points, zeta, seed);
    Dataset::new(
        points,
        labels,
        DatasetMeta {
            generator: Generator::Circles,
            n,
            zeta,
            factor: Some(factor),
            seed,
        },
    )
}

/// Stratified shuffle split. The training side gets `round(n·fraction)`
/// points, drawn from each class in proportion.
pub fn split(ds: &Dataset, train_fraction: f64, seed: u64) -> Result<(Dataset, Dataset)> {
    if !(train_fraction > 0.0 && train_fraction < 1.0) {
        return Err(Error::invalid(format!(
            "train fraction must lie in (0, 1), got {train_fraction}"
        )));
    }
    let n = ds.len();
    let n_train = (n as f64 * train_fraction).round() as usize;
    if n_train == 0 || n_train == n {
        return Err(Error::invalid(format!(
            "train fraction {train_fraction} leaves one side of a {n}-point split empty"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut pos: Vec<usize> = (0..n).filter(|&i| ds.labels[i] == 1).collect();
    let mut neg: Vec<usize> = (0..n).filter(|&i| ds.labels[i] == -1).collect();
    pos.shuffle(&mut rng);
    neg.shuffle(&mut rng);
    let pos_train = ((pos.len() as f64 * n_train as f64 / n as f64).round() as usize)
        .min(pos.len())
        .min(n_train);
    let neg_train = n_train - pos_train;
    if neg_train > neg.len() {
        return Err(Error::invalid("cannot stratify this split"));
    }
    let mut train: Vec<usize> = pos[..pos_train].iter().chain(&neg[..neg_train]).copied().collect();
    let mut test: Vec<usize> = pos[pos_train..].iter().chain(&neg[neg_train..]).copied().collect();
    train.shuffle(&mut rng);
    test.shuffle(&mut rng);
    Ok((ds.subset(&train), ds.subset(&test)))
}

/// Target phase interval `[start, start + width)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhaseInterval {
    pub start: f64,
    pub width: f64,
}

impl Default for PhaseInterval {
    fn default() -> Self {
        PhaseInterval {
            start: 0.0,
            width: 2.0 * PI,
        }
    }
}

impl PhaseInterval {
    pub fn new(start: f64, width: f64) -> Result<Self> {
        if !start.is_finite() || !(width > 0.0 && width.is_finite()) {
            return Err(Error::invalid(format!(
                "phase interval needs finite start and positive width, got ({start}, {width})"
            )));
        }
        Ok(PhaseInterval { start, width })
    }

    fn end(&self) -> f64 {
        self.start + self.width
    }
}

/// Per-dimension affine map from the training bounding box onto a phase interval.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhaseScaler {
    pub lo: [f64; 2],
    pub hi: [f64; 2],
    pub interval: PhaseInterval,
}

impl PhaseScaler {
    pub fn fit(train: &Dataset) -> Result<Self> {
        Self::fit_with_interval(train, PhaseInterval::default())
    }

    pub fn fit_with_interval(train: &Dataset, interval: PhaseInterval) -> Result<Self> {
        let b = train
            .bounds()
            .ok_or_else(|| Error::invalid("cannot fit a scaler on an empty dataset"))?;
        for (d, &(lo, hi)) in b.iter().enumerate() {
            if lo >= hi {
                return Err(Error::invalid(format!(
                    "dimension {d} is degenerate (min == max == {lo})"
                )));
            }
        }
        Ok(PhaseScaler {
            lo: [b[0].0, b[1].0],
            hi: [b[0].1, b[1].1],
            interval,
        })
    }

    /// Scales one point, clamping into `[start, start + width)`.
    pub fn transform_point(&self, p: [f64; 2]) -> [f64; 2] {
        let top = self.interval.end().next_down();
        let mut out = [0.0; 2];
        for d in 0..2 {
            let v = self.interval.start
                + self.interval.width * (p[d] - self.lo[d]) / (self.hi[d] - self.lo[d]);
            out[d] = v.clamp(self.interval.start, top);
        }
        out
    }

    pub fn inverse_point(&self, q: [f64; 2]) -> [f64; 2] {
        let mut out = [0.0; 2];
        for d in 0..2 {
            out[d] = self.lo[d]
                + (q[d] - self.interval.start) * (self.hi[d] - self.lo[d]) / self.interval.width;
        }
        out
    }

    pub fn apply(&self, ds: &Dataset) -> Dataset {
        Dataset {
            points: ds.points.iter().map(|&p| self.transform_point(p)).collect(),
            labels: ds.labels.clone(),
            meta: ds.meta.clone(),
        }
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let text = serde_json::to_string_pretty(self)?;
        fs::write(path, text + "\n").map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Ok(serde_json::from_str(&text)?)
    }
}

pub fn to_csv_string(ds: &Dataset) -> String {
    let mut s = String::from("x1,x2,label\n");
    for (p, l) in ds.points.iter().zip(&ds.labels) {
        s.push_str(&format!("{},{},{}\n", format_sig12(p[0]), format_sig12(p[1]), l));
    }
    s
}

pub fn save_csv(ds: &Dataset, path: &Path) -> Result<()> {
    fs::write(path, to_csv_string(ds)).map_err(|e| Error::io(path, e))
}

pub fn load_csv(path: &Path) -> Result<Dataset> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    parse_csv(&bytes, path)
}

fn parse_csv(bytes: &[u8], path: &Path) -> Result<Dataset> {
    let parse_err = |line: u64, msg: String| Error::Parse {
        path: path.to_path_buf(),
        line,
        msg,
    };
    if bytes.iter().all(|b| b.is_ascii_whitespace()) {
        return Err(Error::invalid(format!("{} is empty", path.display())));
    }
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .from_reader(bytes);
    let header = rdr.headers().map_err(|e| parse_err(1, e.to_string()))?.clone();
    if header.iter().map(str::trim).ne(["x1", "x2", "label"]) {
        return Err(parse_err(1, format!("expected header x1,x2,label, got {:?}", header.as_slice())));
    }
    let mut points = Vec::new();
    let mut labels = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line());
            parse_err(line, e.to_string())
        })?;
        let line = rec.position().map_or(0, |p| p.line());
        if rec.len() != 3 {
            return Err(parse_err(line, format!("expected 3 fields, found {}", rec.len())));
        }
        let coord = |k: usize| -> Result<f64> {
            let v: f64 = rec[k]
                .trim()
                .parse()
                .map_err(|_| parse_err(line, format!("bad coordinate {:?}", &rec[k])))?;
            if !v.is_finite() {
                return Err(parse_err(line, format!("non-finite coordinate {:?}", &rec[k])));
            }
            Ok(v)
        };
        let p = [coord(0)?, coord(1)?];
        let label: Label = match rec[2].trim() {
            "1" | "+1" => 1,
            "-1" => -1,
            other => return Err(parse_err(line, format!("label must be +1 or -1, got {other:?}"))),
        };
        points.push(p);
        labels.push(label);
    }
    if points.is_empty() {
        return Err(Error::invalid(format!("{} has no samples", path.display())));
    }
    let n = points.len();
    Dataset::new(
        points,
        labels,
        DatasetMeta {
            generator: Generator::Loaded,
            n,
            zeta: 0.0,
            factor: None,
            seed: 0,
        },
    )
}
