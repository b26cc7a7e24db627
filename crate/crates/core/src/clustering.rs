//! Average-linkage clustering of the four daily price columns (O, H, L, C)
//! across all symbols of a day, with `1 − pearson` as the distance.

use std::io::Write;

use chrono::NaiveDate;

use crate::analytics::pearson;
use crate::error::{Error, Result};
use crate::market_data::MarketDay;
use crate::numeric::fixed8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PriceColumn {
    Open,
    High,
    Low,
    Close,
}

impl PriceColumn {
    pub const ALL: [PriceColumn; 4] = [PriceColumn::Open, PriceColumn::High, PriceColumn::Low, PriceColumn::Close];

    pub fn label(self) -> &'static str {
        match self {
            PriceColumn::Open => "O",
            PriceColumn::High => "H",
            PriceColumn::Low => "L",
            PriceColumn::Close => "C",
        }
    }
}

/// Four price columns over the same `m` symbols.
#[derive(Debug, Clone, PartialEq)]
pub struct PriceMatrix {
    pub day: NaiveDate,
    columns: [Vec<f64>; 4],
}

impl PriceMatrix {
    pub const MIN_SYMBOLS: usize = 3;

    pub fn new(day: NaiveDate, open: Vec<f64>, high: Vec<f64>, low: Vec<f64>, close: Vec<f64>) -> Result<Self> {
        let columns = [open, high, low, close];
        let m = columns[0].len();
        if let Some(c) = columns.iter().find(|c| c.len() != m) {
            return Err(Error::LengthMismatch(m, c.len()));
        }
        if m < Self::MIN_SYMBOLS {
            return Err(Error::TooFewSymbols { got: m, min: Self::MIN_SYMBOLS });
        }
        if columns.iter().flatten().any(|p| !(p.is_finite() && *p > 0.0)) {
            return Err(Error::NonPositivePrice(day));
        }
        Ok(Self { day, columns })
    }

    /// Columns built from the day's accepted bars.
    pub fn from_market_day(day: &MarketDay) -> Result<Self> {
        let bars: Vec<_> = day.accepted().collect();
        Self::new(
            day.date(),
            bars.iter().map(|b| b.open).collect(),
            bars.iter().map(|b| b.high).collect(),
            bars.iter().map(|b| b.low).collect(),
            bars.iter().map(|b| b.close).collect(),
        )
    }

    pub fn column(&self, c: PriceColumn) -> &[f64] {
        &self.columns[c as usize]
    }

    pub fn symbols(&self) -> usize {
        self.columns[0].len()
    }
}

/// Whether prices are correlated as-is or after taking logs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PriceTransform {
    #[default]
    Raw,
    Log,
}

fn distance_named(a: &[f64], b: &[f64], names: (&'static str, &'static str)) -> Result<f64> {
    match pearson(a, b) {
        Ok(r) => Ok(1.0 - r),
        Err(Error::UndefinedCorrelation) => {
            let flat = |xs: &[f64]| xs.windows(2).all(|w| w[0] == w[1]);
            Err(Error::DegenerateColumn(if flat(a) { names.0 } else { names.1 }))
        }
        Err(e) => Err(e),
    }
}

/// Correlation distance `1 − r`, in `[0, 2]`.
pub fn corr_distance(a: &[f64], b: &[f64]) -> Result<f64> {
    distance_named(a, b, ("a", "b"))
}

/// One merge of two clusters.
#[derive(Debug, Clone, PartialEq)]
pub struct Merge {
    pub left: String,
    pub right: String,
    pub height: f64,
    /// Leaves in the merged cluster.
    pub size: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dendrogram {
    pub day: NaiveDate,
    /// Three merges for four leaves, in merge order.
    pub merges: Vec<Merge>,
    /// A merge height fell below its predecessor.
    pub inversion: bool,
    newick: String,
}

impl Dendrogram {
    pub fn to_newick(&self) -> &str {
        &self.newick
    }

    /// `step,left,right,height,size`.
    pub fn write_merge_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["step", "left", "right", "height", "size"])?;
        for (i, m) in self.merges.iter().enumerate() {
            w.write_record([
                (i + 1).to_string(),
                m.left.clone(),
                m.right.clone(),
                fixed8(m.height),
                m.size.to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

const INVERSION_TOLERANCE: f64 = 1e-12;

struct Cluster {
    /// Leaf labels concatenated in sorted order; also the tie-break key.
    label: String,
    leaves: Vec<usize>,
    height: f64,
    newick: String,
}

/// Pairwise leaf distances, indexed in [`PriceColumn::ALL`] order.
pub fn distance_matrix(pm: &PriceMatrix, transform: PriceTransform) -> Result<[[f64; 4]; 4]> {
    let cols: Vec<Vec<f64>> = PriceColumn::ALL
        .iter()
        .map(|&c| {
            let col = pm.column(c);
            match transform {
                PriceTransform::Raw => col.to_vec(),
                PriceTransform::Log => col.iter().map(|p| p.ln()).collect(),
            }
        })
        .collect();
    let mut d = [[0.0; 4]; 4];
    for i in 0..4 {
        for j in i + 1..4 {
            let names = (PriceColumn::ALL[i].label(), PriceColumn::ALL[j].label());
            d[i][j] = distance_named(&cols[i], &cols[j], names)?;
            d[j][i] = d[i][j];
        }
    }
    Ok(d)
}

fn average_distance(d: &[[f64; 4]; 4], a: &Cluster, b: &Cluster) -> f64 {
    let mut sum = 0.0;
    for &i in &a.leaves {
        for &j in &b.leaves {
            sum += d[i][j];
        }
    }
    sum / (a.leaves.len() * b.leaves.len()) as f64
}

pub fn agglomerate(pm: &PriceMatrix) -> Result<Dendrogram> {
    agglomerate_with(pm, PriceTransform::Raw)
}

/// UPGMA over the four price columns.
///
/// At each step the pair with the smallest mean leaf-to-leaf distance merges;
/// exact ties go to the lexicographically smallest pair of cluster labels.
pub fn agglomerate_with(pm: &PriceMatrix, transform: PriceTransform) -> Result<Dendrogram> {
    let d = distance_matrix(pm, transform)?;
    let mut clusters: Vec<Cluster> = PriceColumn::ALL
        .iter()
        .enumerate()
        .map(|(i, c)| Cluster { label: c.label().to_string(), leaves: vec![i], height: 0.0, newick: c.label().into() })
        .collect();

    let mut merges = Vec::with_capacity(3);
    let mut inversion = false;
    while clusters.len() > 1 {
        let mut best: Option<(f64, (String, String), usize, usize)> = None;
        for i in 0..clusters.len() {
            for j in i + 1..clusters.len() {
                let dist = average_distance(&d, &clusters[i], &clusters[j]);
                let (a, b) = (&clusters[i].label, &clusters[j].label);
                let key = if a < b { (a.clone(), b.clone()) } else { (b.clone(), a.clone()) };
                let better = match &best {
                    None => true,
                    Some((bd, bk, _, _)) => dist < *bd || (dist == *bd && key < *bk),
                };
                if better {
                    best = Some((dist, key, i, j));
                }
            }
        }
        let (mut height, _, i, j) = best.expect("at least two clusters");
        if let Some(prev) = merges.last().map(|m: &Merge| m.height) {
            // Averaging equal distances can land an ulp low; only a real drop counts.
            if height < prev - INVERSION_TOLERANCE {
                inversion = true;
            } else {
                height = height.max(prev);
            }
        }
        let right = clusters.remove(j);
        let left = clusters.remove(i);
        let (left, right) = if left.label <= right.label { (left, right) } else { (right, left) };
        let mut leaves = [left.leaves.clone(), right.leaves.clone()].concat();
        leaves.sort_unstable();
        let mut chars: Vec<char> = format!("{}{}", left.label, right.label).chars().collect();
        chars.sort_unstable();
        let newick = format!(
            "({}:{},{}:{})",
            left.newick,
            fixed8((height - left.height).max(0.0)),
            right.newick,
            fixed8((height - right.height).max(0.0))
        );
        merges.push(Merge { left: left.label.clone(), right: right.label.clone(), height, size: leaves.len() });
        clusters.push(Cluster { label: chars.into_iter().collect(), leaves, height, newick });
    }
    let newick = format!("{};", clusters[0].newick);
    Ok(Dendrogram { day: pm.day, merges, inversion, newick })
}
