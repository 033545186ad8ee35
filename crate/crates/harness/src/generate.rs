use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::dataset::Dataset;
use crate::error::Result;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BlockVariant {
    /// Noisy block on the decision boundary.
    Center,
    /// Single-class block far from the decision boundary.
    Corner,
}

/// Two Gaussian clusters on the first axis plus a dense uniform block.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BlockGeometry {
    /// Split evenly between the two clusters.
    pub n_informative: usize,
    /// Clusters sit at `(-separation, 0)` and `(+separation, 0)`.
    pub separation: f64,
    pub cluster_sd: f64,
    pub n_block: usize,
    /// The center block is `[-w, w]^2`.
    pub center_half_width: f64,
    /// The corner block is `[lo, hi]^2`.
    pub corner_lo: f64,
    pub corner_hi: f64,
}

impl Default for BlockGeometry {
    fn default() -> Self {
        Self {
            n_informative: 250,
            separation: 2.0,
            cluster_sd: 1.0,
            n_block: 100,
            center_half_width: 0.3,
            corner_lo: 3.0,
            corner_hi: 4.0,
        }
    }
}

/// Equal-size isotropic Gaussian blobs with centers evenly spaced on a circle.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BlobGeometry {
    pub n_classes: usize,
    pub n_per_class: usize,
    pub radius: f64,
    pub sd: f64,
}

impl Default for BlobGeometry {
    fn default() -> Self {
        Self { n_classes: 3, n_per_class: 60, radius: 2.0, sd: 1.0 }
    }
}

/// Binary block dataset. Rows are the negative cluster, the positive
/// cluster, then the block.
pub fn gen_block(variant: BlockVariant, geometry: &BlockGeometry, seed: u64) -> Result<Dataset> {
    let g = geometry;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let noise = Normal::new(0.0, g.cluster_sd).map_err(|e| crate::error::HarnessError::Config(e.to_string()))?;
    let n = g.n_informative + g.n_block;
    let mut x = DMatrix::zeros(n, 2);
    let mut labels = Vec::with_capacity(n);
    let half = g.n_informative / 2;
    for i in 0..g.n_informative {
        let class = usize::from(i >= half);
        let cx = if class == 0 { -g.separation } else { g.separation };
        x[(i, 0)] = cx + noise.sample(&mut rng);
        x[(i, 1)] = noise.sample(&mut rng);
        labels.push(class);
    }
    for i in g.n_informative..n {
        let (lo, hi, label) = match variant {
            BlockVariant::Center => (-g.center_half_width, g.center_half_width, usize::from(rng.random_bool(0.5))),
            BlockVariant::Corner => (g.corner_lo, g.corner_hi, 1),
        };
        x[(i, 0)] = rng.random_range(lo..=hi);
        x[(i, 1)] = rng.random_range(lo..=hi);
        labels.push(label);
    }
    let name = match variant {
        BlockVariant::Center => "block_center",
        BlockVariant::Corner => "block_corner",
    };
    Dataset::new(x, labels, vec!["neg".into(), "pos".into()], format!("synthetic:{name}:seed={seed}"))
}

/// Multiclass blob dataset, rows grouped by class.
pub fn gen_blobs(geometry: &BlobGeometry, seed: u64) -> Result<Dataset> {
    let g = geometry;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let noise = Normal::new(0.0, g.sd).map_err(|e| crate::error::HarnessError::Config(e.to_string()))?;
    let n = g.n_classes * g.n_per_class;
    let mut x = DMatrix::zeros(n, 2);
    let mut labels = Vec::with_capacity(n);
    for c in 0..g.n_classes {
        let angle = std::f64::consts::TAU * c as f64 / g.n_classes as f64;
        let (cx, cy) = (g.radius * angle.cos(), g.radius * angle.sin());
        for k in 0..g.n_per_class {
            let i = c * g.n_per_class + k;
            x[(i, 0)] = cx + noise.sample(&mut rng);
            x[(i, 1)] = cy + noise.sample(&mut rng);
            labels.push(c);
        }
    }
    let names = (0..g.n_classes).map(|c| format!("c{c}")).collect();
    Dataset::new(x, labels, names, format!("synthetic:blobs:seed={seed}"))
}
