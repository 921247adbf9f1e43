//! Time-ordered point clouds, self-similarity matrices, and the conditioning
//! steps (scaling, histogram matching, smoothing, resampling) applied to
//! SSMs before they are compared.

use crate::error::{Error, Result};

/// `N` time-indexed points in a `d`-dimensional feature space, stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeOrderedPointCloud {
    dim: usize,
    coords: Vec<f64>,
    timestamps: Vec<f64>,
}

impl TimeOrderedPointCloud {
    pub fn new(points: &[Vec<f64>], timestamps: Vec<f64>) -> Result<Self> {
        let n = points.len();
        if n < 2 {
            return Err(Error::TooFewPoints(n));
        }
        let dim = points[0].len();
        if dim == 0 {
            return Err(Error::InvalidArgument("points must have dimension >= 1".into()));
        }
        let mut coords = Vec::with_capacity(n * dim);
        for (index, p) in points.iter().enumerate() {
            if p.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: p.len(),
                    index,
                });
            }
            coords.extend_from_slice(p);
        }
        Self::from_flat(dim, coords, timestamps)
    }

    /// Builds a cloud from row-major coordinates (`coords.len() == N * dim`).
    pub fn from_flat(dim: usize, coords: Vec<f64>, timestamps: Vec<f64>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidArgument("points must have dimension >= 1".into()));
        }
        if !coords.len().is_multiple_of(dim) {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: coords.len() % dim,
                index: coords.len() / dim,
            });
        }
        let n = coords.len() / dim;
        if n < 2 {
            return Err(Error::TooFewPoints(n));
        }
        if timestamps.len() != n {
            return Err(Error::SizeMismatch(n, timestamps.len()));
        }
        if let Some(i) = timestamps.windows(2).position(|w| !(w[1] > w[0])) {
            return Err(Error::NonMonotoneTime(i + 1));
        }
        if coords.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument("non-finite coordinate".into()));
        }
        Ok(Self {
            dim,
            coords,
            timestamps,
        })
    }

    /// A 1-D cloud from a scalar series.
    pub fn from_series(values: Vec<f64>, timestamps: Vec<f64>) -> Result<Self> {
        Self::from_flat(1, values, timestamps)
    }

    /// Timestamps `0, 1, ..., n-1`.
    pub fn index_times(n: usize) -> Vec<f64> {
        (0..n).map(|i| i as f64).collect()
    }

    pub fn len(&self) -> usize {
        self.timestamps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.timestamps.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn timestamps(&self) -> &[f64] {
        &self.timestamps
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.coords[i * self.dim..(i + 1) * self.dim]
    }

    pub fn points(&self) -> impl Iterator<Item = &[f64]> + '_ {
        self.coords.chunks_exact(self.dim)
    }

    /// Row-major coordinates.
    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    /// Values of coordinate `axis` over time.
    pub fn column(&self, axis: usize) -> Vec<f64> {
        self.points().map(|p| p[axis]).collect()
    }
}

/// Symmetric `N x N` matrix of pairwise distances, stored row-major.
///
/// Matrices produced by [`build_ssm`] have a zero diagonal. Smoothed matrices
/// ([`gaussian_smooth`]) keep symmetry and nonnegativity but not the zero
/// diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct SelfSimilarityMatrix {
    size: usize,
    values: Vec<f64>,
}

impl SelfSimilarityMatrix {
    /// Validates squareness, finiteness, exact symmetry and nonnegativity.
    pub fn from_values(size: usize, values: Vec<f64>) -> Result<Self> {
        if size == 0 || values.len() != size * size {
            return Err(Error::SizeMismatch(size * size, values.len()));
        }
        for i in 0..size {
            for j in 0..size {
                let v = values[i * size + j];
                if !v.is_finite() || v < 0.0 {
                    return Err(Error::InvalidArgument(format!(
                        "entry ({i}, {j}) = {v} is not a finite nonnegative value"
                    )));
                }
                if j > i && v != values[j * size + i] {
                    return Err(Error::InvalidArgument(format!(
                        "matrix is not symmetric at ({i}, {j})"
                    )));
                }
            }
        }
        Ok(Self { size, values })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        let mut values = Vec::with_capacity(n * n);
        for r in rows {
            if r.len() != n {
                return Err(Error::SizeMismatch(n, r.len()));
            }
            values.extend_from_slice(r);
        }
        Self::from_values(n, values)
    }

    pub(crate) fn from_values_unchecked(size: usize, values: Vec<f64>) -> Self {
        debug_assert_eq!(values.len(), size * size);
        Self { size, values }
    }

    pub fn zeros(size: usize) -> Self {
        Self {
            size,
            values: vec![0.0; size * size],
        }
    }

    pub fn size(&self) -> usize {
        self.size
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.size + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.size..(i + 1) * self.size]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        self.values.chunks_exact(self.size).map(<[f64]>::to_vec).collect()
    }

    pub fn min_max(&self) -> (f64, f64) {
        self.values
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
                (lo.min(v), hi.max(v))
            })
    }

    /// Population standard deviation over all `N^2` entries.
    pub fn std(&self) -> f64 {
        population_std(&self.values)
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!(self.size, other.size);
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self {
            size: self.size,
            values: self.values.iter().map(|&v| f(v)).collect(),
        }
    }

    /// Averages with the transpose; repairs floating-point asymmetry.
    fn symmetrize(mut self) -> Self {
        let n = self.size;
        for i in 0..n {
            for j in i + 1..n {
                let v = 0.5 * (self.values[i * n + j] + self.values[j * n + i]);
                self.values[i * n + j] = v;
                self.values[j * n + i] = v;
            }
        }
        self
    }
}

pub(crate) fn population_std(values: &[f64]) -> f64 {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    var.sqrt()
}

/// Pairwise Euclidean distances of a point cloud.
pub fn build_ssm(topc: &TimeOrderedPointCloud) -> SelfSimilarityMatrix {
    let n = topc.len();
    let mut values = vec![0.0; n * n];
    for i in 0..n {
        let a = topc.point(i);
        for j in i + 1..n {
            let b = topc.point(j);
            let d = a
                .iter()
                .zip(b)
                .map(|(x, y)| (x - y) * (x - y))
                .sum::<f64>()
                .sqrt();
            values[i * n + j] = d;
            values[j * n + i] = d;
        }
    }
    SelfSimilarityMatrix::from_values_unchecked(n, values)
}

/// Scales the matrix to unit population standard deviation.
pub fn znorm_ssm(ssm: &SelfSimilarityMatrix) -> Result<SelfSimilarityMatrix> {
    let std = ssm.std();
    if !(std > 0.0) {
        return Err(Error::DegenerateSsm);
    }
    Ok(ssm.map(|v| v / std))
}

/// Output of [`histogram_match`].
#[derive(Debug, Clone, PartialEq)]
pub struct HistogramMatch {
    pub ssm: SelfSimilarityMatrix,
    /// Set when the source was single-valued and returned unchanged.
    pub degenerate: bool,
}

/// Equal-width histogram over `[lo, hi]` with its piecewise-linear CDF
/// evaluated at the `bins + 1` edges.
struct EdgeCdf {
    lo: f64,
    width: f64,
    cdf: Vec<f64>,
}

impl EdgeCdf {
    fn new(values: &[f64], bins: usize) -> Self {
        let (lo, hi) = values
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
        let width = (hi - lo) / bins as f64;
        let mut counts = vec![0usize; bins];
        for &v in values {
            counts[bin_index(v, lo, width, bins)] += 1;
        }
        let total = values.len() as f64;
        let mut cdf = Vec::with_capacity(bins + 1);
        cdf.push(0.0);
        let mut acc = 0usize;
        for c in counts {
            acc += c;
            cdf.push(acc as f64 / total);
        }
        *cdf.last_mut().unwrap() = 1.0;
        Self { lo, width, cdf }
    }

    fn bins(&self) -> usize {
        self.cdf.len() - 1
    }

    fn edge(&self, k: usize) -> f64 {
        self.lo + k as f64 * self.width
    }

    /// Piecewise-linear CDF at `x`.
    fn forward(&self, x: f64) -> f64 {
        let k = bin_index(x, self.lo, self.width, self.bins());
        let frac = ((x - self.edge(k)) / self.width).clamp(0.0, 1.0);
        self.cdf[k] + frac * (self.cdf[k + 1] - self.cdf[k])
    }

    /// Generalized inverse of the piecewise-linear CDF.
    fn inverse(&self, u: f64) -> f64 {
        // first edge index whose CDF reaches u
        let k = self.cdf.partition_point(|&c| c < u);
        if k == 0 {
            return self.lo;
        }
        if k > self.bins() {
            return self.edge(self.bins());
        }
        let (c0, c1) = (self.cdf[k - 1], self.cdf[k]);
        let frac = if c1 > c0 { (u - c0) / (c1 - c0) } else { 1.0 };
        self.edge(k - 1) + frac * self.width
    }
}

fn bin_index(v: f64, lo: f64, width: f64, bins: usize) -> usize {
    if width <= 0.0 {
        return 0;
    }
    (((v - lo) / width).floor().max(0.0) as usize).min(bins - 1)
}

/// Remaps `source` through a monotone function so that its histogram
/// approximates the histogram of `target`.
///
/// Both matrices are discretized into `bins` equal-width bins over their own
/// range. The map is the composition of the source CDF with the inverse target
/// CDF (both piecewise linear over bin edges), made exactly monotone by a
/// running maximum over the sorted distinct source values.
pub fn histogram_match(
    source: &SelfSimilarityMatrix,
    target: &SelfSimilarityMatrix,
    bins: usize,
) -> Result<HistogramMatch> {
    if bins < 2 {
        return Err(Error::InvalidArgument(format!("bins must be >= 2, got {bins}")));
    }
    let (tlo, thi) = target.min_max();
    if !(thi > tlo) {
        return Err(Error::DegenerateSsm);
    }
    let (slo, shi) = source.min_max();
    if !(shi > slo) {
        log::warn!("histogram_match: single-valued source returned unchanged");
        return Ok(HistogramMatch {
            ssm: source.clone(),
            degenerate: true,
        });
    }

    let src = EdgeCdf::new(source.values(), bins);
    let tgt = EdgeCdf::new(target.values(), bins);

    let mut distinct: Vec<f64> = source.values().to_vec();
    distinct.sort_by(f64::total_cmp);
    distinct.dedup();
    let mut mapped: Vec<f64> = distinct.iter().map(|&x| tgt.inverse(src.forward(x))).collect();
    for i in 1..mapped.len() {
        if mapped[i] < mapped[i - 1] {
            mapped[i] = mapped[i - 1];
        }
    }

    let values = source
        .values()
        .iter()
        .map(|x| {
            let k = distinct
                .binary_search_by(|p| p.total_cmp(x))
                .expect("value present in its own sorted set");
            mapped[k].max(0.0)
        })
        .collect();
    Ok(HistogramMatch {
        ssm: SelfSimilarityMatrix::from_values_unchecked(source.size(), values),
        degenerate: false,
    })
}

/// Normalized 1-D Gaussian kernel truncated at `ceil(3 sigma)`.
pub fn gaussian_kernel(sigma: f64) -> Vec<f64> {
    let radius = (3.0 * sigma).ceil() as isize;
    let mut k: Vec<f64> = (-radius..=radius)
        .map(|x| (-(x * x) as f64 / (2.0 * sigma * sigma)).exp())
        .collect();
    let sum: f64 = k.iter().sum();
    k.iter_mut().for_each(|w| *w /= sum);
    k
}

/// Reflect-mode boundary (`d c b a | a b c d | d c b a`).
#[inline]
pub(crate) fn reflect_index(k: isize, n: usize) -> usize {
    let n = n as isize;
    let period = 2 * n;
    let m = k.rem_euclid(period);
    (if m >= n { period - 1 - m } else { m }) as usize
}

/// Separable Gaussian convolution of a `rows x cols` image with reflected
/// borders.
pub fn smooth_image(rows: usize, cols: usize, values: &[f64], sigma: f64) -> Vec<f64> {
    let kernel = gaussian_kernel(sigma);
    let radius = (kernel.len() / 2) as isize;
    let mut tmp = vec![0.0; rows * cols];
    for r in 0..rows {
        let row = &values[r * cols..(r + 1) * cols];
        for c in 0..cols {
            let mut acc = 0.0;
            for (t, w) in kernel.iter().enumerate() {
                acc += w * row[reflect_index(c as isize + t as isize - radius, cols)];
            }
            tmp[r * cols + c] = acc;
        }
    }
    let mut out = vec![0.0; rows * cols];
    for r in 0..rows {
        for (t, w) in kernel.iter().enumerate() {
            let src = reflect_index(r as isize + t as isize - radius, rows);
            let src_row = &tmp[src * cols..(src + 1) * cols];
            for (o, s) in out[r * cols..(r + 1) * cols].iter_mut().zip(src_row) {
                *o += w * s;
            }
        }
    }
    out
}

/// Gaussian smoothing used as a conditioning step before persistence.
/// The diagonal is left as smoothed.
pub fn gaussian_smooth(ssm: &SelfSimilarityMatrix, sigma: f64) -> Result<SelfSimilarityMatrix> {
    if !(sigma > 0.0) {
        return Err(Error::InvalidArgument(format!("sigma must be > 0, got {sigma}")));
    }
    let n = ssm.size();
    let values = smooth_image(n, n, ssm.values(), sigma);
    Ok(SelfSimilarityMatrix::from_values_unchecked(n, values).symmetrize())
}

/// Entrywise mean of equally sized SSMs.
pub fn average_ssms(ssms: &[SelfSimilarityMatrix]) -> Result<SelfSimilarityMatrix> {
    let first = ssms
        .first()
        .ok_or_else(|| Error::InvalidArgument("cannot average an empty list".into()))?;
    let n = first.size();
    let mut acc = vec![0.0; n * n];
    for s in ssms {
        if s.size() != n {
            return Err(Error::SizeMismatch(n, s.size()));
        }
        for (a, v) in acc.iter_mut().zip(s.values()) {
            *a += v;
        }
    }
    let count = ssms.len() as f64;
    acc.iter_mut().for_each(|a| *a /= count);
    Ok(SelfSimilarityMatrix::from_values_unchecked(n, acc))
}

/// Bilinear resampling onto a `target_size` grid whose corner samples align
/// with the source corners. The result is re-symmetrized and its diagonal
/// zeroed.
pub fn resize_ssm(ssm: &SelfSimilarityMatrix, target_size: usize) -> Result<SelfSimilarityMatrix> {
    if target_size < 2 {
        return Err(Error::InvalidArgument(format!(
            "target size must be >= 2, got {target_size}"
        )));
    }
    let n = ssm.size();
    if n == target_size {
        return Ok(ssm.clone());
    }
    let scale = (n - 1) as f64 / (target_size - 1) as f64;
    let coord = |u: usize| {
        let x = u as f64 * scale;
        let i0 = (x.floor() as usize).min(n - 1);
        let i1 = (i0 + 1).min(n - 1);
        (i0, i1, x - i0 as f64)
    };
    let mut values = vec![0.0; target_size * target_size];
    for u in 0..target_size {
        let (r0, r1, fr) = coord(u);
        for v in 0..target_size {
            let (c0, c1, fc) = coord(v);
            let top = ssm.get(r0, c0) * (1.0 - fc) + ssm.get(r0, c1) * fc;
            let bottom = ssm.get(r1, c0) * (1.0 - fc) + ssm.get(r1, c1) * fc;
            values[u * target_size + v] = top * (1.0 - fr) + bottom * fr;
        }
    }
    let mut out = SelfSimilarityMatrix::from_values_unchecked(target_size, values).symmetrize();
    for i in 0..target_size {
        out.values[i * target_size + i] = 0.0;
    }
    Ok(out)
}
