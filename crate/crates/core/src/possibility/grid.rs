use nalgebra::{DMatrix, DVector};

use super::{CovarianceReport, GaussianPossibility};
use crate::error::{Error, Result};
use crate::linalg::{covariance_from_precision, is_numerically_singular, symmetrize};
use crate::scalar::Real;

const NORMALIZATION_TOL: f64 = 1e-9;
const MAX_DIMS: usize = 3;

/// Curvatures at or below this value are indistinguishable from flat on the
/// grids this type is meant for, and leave the covariance undefined.
pub const CURVATURE_FLOOR: f64 = 1e-6;

/// One uniformly spaced grid axis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridAxis<T: Real> {
    pub start: T,
    pub step: T,
    pub len: usize,
}

impl<T: Real> GridAxis<T> {
    pub fn new(start: T, step: T, len: usize) -> Result<Self> {
        if !(step > T::zero()) || len == 0 {
            return Err(Error::InvalidParameter(format!(
                "grid axis needs step > 0 and len > 0 (step {step}, len {len})"
            )));
        }
        Ok(Self { start, step, len })
    }

    /// `len` points from `lo` to `hi` inclusive.
    pub fn linspace(lo: T, hi: T, len: usize) -> Result<Self> {
        if len < 2 || !(hi > lo) {
            return Err(Error::InvalidParameter("linspace needs hi > lo and at least two points".into()));
        }
        Self::new(lo, (hi - lo) / T::from_usize(len - 1).unwrap(), len)
    }

    /// Grid over `[lo, hi]` with spacing `step` (the last point may fall
    /// short of `hi` by less than one step).
    pub fn with_step(lo: T, hi: T, step: T) -> Result<Self> {
        let n = ((hi - lo) / step).as_f64().round() as usize + 1;
        Self::new(lo, step, n)
    }

    pub fn point(&self, i: usize) -> T {
        self.start + self.step * T::from_usize(i).unwrap()
    }
}

/// A possibility function tabulated on a regular grid in one to three
/// dimensions. Values are stored row-major (last axis fastest).
#[derive(Debug, Clone, PartialEq)]
pub struct GridPossibility<T: Real> {
    axes: Vec<GridAxis<T>>,
    values: Vec<T>,
}

impl<T: Real> GridPossibility<T> {
    pub fn new(axes: Vec<GridAxis<T>>, values: Vec<T>) -> Result<Self> {
        let n = check_axes(&axes)?;
        if values.len() != n {
            return Err(Error::DimensionMismatch { expected: n, got: values.len() });
        }
        let tol = T::tol(NORMALIZATION_TOL);
        let mut max = T::zero();
        for &v in &values {
            if !v.is_finite() || v < T::zero() || v > T::one() + tol {
                return Err(Error::NotNormalized(format!("value {v} outside [0, 1]")));
            }
            max = max.max(v);
        }
        if (max - T::one()).abs() > tol {
            return Err(Error::NotNormalized(format!("maximum is {max}, expected 1")));
        }
        Ok(Self { axes, values })
    }

    /// Samples `f` on the grid and rescales so that the maximum is one.
    pub fn from_fn(axes: Vec<GridAxis<T>>, mut f: impl FnMut(&[T]) -> T) -> Result<Self> {
        let n = check_axes(&axes)?;
        let mut point = vec![T::zero(); axes.len()];
        let mut values = Vec::with_capacity(n);
        for flat in 0..n {
            fill_point(&axes, flat, &mut point);
            values.push(f(&point));
        }
        let max = values.iter().copied().fold(T::zero(), |a, b| a.max(b));
        if !(max > T::zero()) || !max.is_finite() || values.iter().any(|v| !v.is_finite() || *v < T::zero()) {
            return Err(Error::NotNormalized(
                "sampled function must be finite, non-negative and not identically zero".into(),
            ));
        }
        for v in &mut values {
            *v /= max;
        }
        Self::new(axes, values)
    }

    pub fn from_gaussian(gp: &GaussianPossibility<T>, axes: Vec<GridAxis<T>>) -> Result<Self> {
        if gp.dim() != axes.len() {
            return Err(Error::DimensionMismatch { expected: gp.dim(), got: axes.len() });
        }
        Self::from_fn(axes, |p| gp.evaluate(&DVector::from_column_slice(p)).expect("dimension checked above"))
    }

    pub fn uninformative(axes: Vec<GridAxis<T>>) -> Result<Self> {
        let n = check_axes(&axes)?;
        Self::new(axes, vec![T::one(); n])
    }

    /// Indicator of the single grid point `flat`.
    pub fn indicator(axes: Vec<GridAxis<T>>, flat: usize) -> Result<Self> {
        let n = check_axes(&axes)?;
        if flat >= n {
            return Err(Error::InvalidIndices(format!("flat index {flat} out of range {n}")));
        }
        let mut values = vec![T::zero(); n];
        values[flat] = T::one();
        Self::new(axes, values)
    }

    pub fn axes(&self) -> &[GridAxis<T>] {
        &self.axes
    }

    pub fn dims(&self) -> usize {
        self.axes.len()
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn multi_index(&self, flat: usize) -> Vec<usize> {
        multi_index(&self.axes, flat)
    }

    pub fn flat_index(&self, idx: &[usize]) -> usize {
        idx.iter().zip(&self.axes).fold(0, |acc, (&i, ax)| acc * ax.len + i)
    }

    pub fn point(&self, flat: usize) -> Vec<T> {
        let mut p = vec![T::zero(); self.dims()];
        fill_point(&self.axes, flat, &mut p);
        p
    }

    pub fn cell_volume(&self) -> T {
        self.axes.iter().fold(T::one(), |acc, ax| acc * ax.step)
    }

    /// Flat index of the maximum; ties go to the lowest index.
    pub fn argmax(&self) -> usize {
        let mut best = 0;
        for (i, &v) in self.values.iter().enumerate() {
            if v > self.values[best] {
                best = i;
            }
        }
        best
    }

    pub fn mode(&self) -> Vec<T> {
        self.point(self.argmax())
    }

    /// Riemann sum of the tabulated values times the cell volume.
    pub fn integral(&self) -> T {
        self.values.iter().fold(T::zero(), |a, &b| a + b) * self.cell_volume()
    }

    /// Posterior possibility `p(y|x) f(x) / max_x p(y|x) f(x)`.
    pub fn bayes_update(&self, likelihood: &[T]) -> Result<Self> {
        if likelihood.len() != self.len() {
            return Err(Error::DimensionMismatch { expected: self.len(), got: likelihood.len() });
        }
        if likelihood.iter().any(|&p| !p.is_finite() || p < T::zero()) {
            return Err(Error::InvalidParameter("likelihood values must be finite and non-negative".into()));
        }
        let products: Vec<T> = self.values.iter().zip(likelihood).map(|(&f, &p)| f * p).collect();
        let max = products.iter().copied().fold(T::zero(), |a, b| a.max(b));
        if !(max > T::zero()) {
            return Err(Error::ImpossibleObservation);
        }
        let values = products.into_iter().map(|v| (v / max).min(T::one())).collect();
        Ok(Self { axes: self.axes.clone(), values })
    }

    /// Sup-marginal onto the axes listed in `keep` (in that order).
    pub fn sup_marginal(&self, keep: &[usize]) -> Result<Self> {
        super::check_index_set(keep, self.dims())?;
        let axes: Vec<GridAxis<T>> = keep.iter().map(|&a| self.axes[a]).collect();
        let n: usize = axes.iter().map(|a| a.len).product();
        let mut values = vec![T::zero(); n];
        for (flat, &v) in self.values.iter().enumerate() {
            let idx = self.multi_index(flat);
            let target = keep.iter().zip(&axes).fold(0, |acc, (&a, ax)| acc * ax.len + idx[a]);
            if v > values[target] {
                values[target] = v;
            }
        }
        Self::new(axes, values)
    }

    /// Precision as the central finite-difference Hessian of `-log f` at the
    /// grid mode, with step equal to the grid spacing.
    pub fn precision_at_mode(&self) -> Result<CovarianceReport<T>> {
        let mode = self.argmax();
        let idx = self.multi_index(mode);
        for (i, ax) in idx.iter().zip(&self.axes) {
            if *i == 0 || *i + 1 >= ax.len {
                return Err(Error::BoundaryMode(mode));
            }
        }
        let d = self.dims();
        let neg_log = |offsets: &[(usize, isize)]| -> Result<T> {
            let mut j = idx.clone();
            for &(axis, o) in offsets {
                j[axis] = (j[axis] as isize + o) as usize;
            }
            let v = self.values[self.flat_index(&j)];
            if v > T::zero() {
                Ok(-v.ln())
            } else {
                Err(Error::NonFiniteLog)
            }
        };
        let center = neg_log(&[])?;
        let mut h = DMatrix::zeros(d, d);
        for a in 0..d {
            let ha = self.axes[a].step;
            let plus = neg_log(&[(a, 1)])?;
            let minus = neg_log(&[(a, -1)])?;
            h[(a, a)] = (plus - T::lit(2.0) * center + minus) / (ha * ha);
            for b in 0..a {
                let hb = self.axes[b].step;
                let pp = neg_log(&[(a, 1), (b, 1)])?;
                let pm = neg_log(&[(a, 1), (b, -1)])?;
                let mp = neg_log(&[(a, -1), (b, 1)])?;
                let mm = neg_log(&[(a, -1), (b, -1)])?;
                let v = (pp - pm - mp + mm) / (T::lit(4.0) * ha * hb);
                h[(a, b)] = v;
                h[(b, a)] = v;
            }
        }
        let h = symmetrize(&h);
        let covariance =
            if is_numerically_singular(&h, T::lit(CURVATURE_FLOOR)) { None } else { covariance_from_precision(&h) };
        Ok(CovarianceReport { mode: DVector::from_vec(self.point(mode)), precision: h, covariance })
    }
}

fn check_axes<T: Real>(axes: &[GridAxis<T>]) -> Result<usize> {
    if axes.is_empty() || axes.len() > MAX_DIMS {
        return Err(Error::InvalidParameter(format!("grids have 1 to {MAX_DIMS} axes, got {}", axes.len())));
    }
    if axes.iter().any(|a| a.len == 0 || !(a.step > T::zero())) {
        return Err(Error::InvalidParameter("grid axes need positive step and length".into()));
    }
    Ok(axes.iter().map(|a| a.len).product())
}

fn multi_index<T: Real>(axes: &[GridAxis<T>], mut flat: usize) -> Vec<usize> {
    let mut idx = vec![0; axes.len()];
    for (slot, ax) in idx.iter_mut().zip(axes).rev() {
        *slot = flat % ax.len;
        flat /= ax.len;
    }
    idx
}

fn fill_point<T: Real>(axes: &[GridAxis<T>], flat: usize, out: &mut [T]) {
    for ((o, ax), i) in out.iter_mut().zip(axes).zip(multi_index(axes, flat)) {
        *o = ax.point(i);
    }
}
