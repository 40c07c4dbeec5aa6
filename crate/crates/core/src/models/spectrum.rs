use std::ops::Range;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{DenseOperator, C64};

/// Default relative clustering tolerance for levels and gaps.
pub const DEFAULT_CLUSTER_TOL: f64 = 1e-9;

/// Partition of the (ascending) spectrum into degenerate multiplets.
///
/// Because eigenvalues are sorted, each class is a contiguous index range.
#[derive(Clone, Debug)]
pub struct LevelClasses {
    ranges: Vec<Range<usize>>,
    values: Vec<f64>,
    class_of: Vec<usize>,
}

impl LevelClasses {
    pub fn len(&self) -> usize {
        self.ranges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ranges.is_empty()
    }

    /// Eigenvector indices belonging to class `c`.
    pub fn members(&self, c: usize) -> Range<usize> {
        self.ranges[c].clone()
    }

    /// Mean energy of class `c`, used as the level's representative `Ẽ_c`.
    pub fn value(&self, c: usize) -> f64 {
        self.values[c]
    }

    pub fn class_of(&self, k: usize) -> usize {
        self.class_of[k]
    }

    pub fn is_nondegenerate(&self) -> bool {
        self.ranges.iter().all(|r| r.len() == 1)
    }
}

/// Partition of all ordered eigenvector pairs `(k, m)` by the gap `Ẽ_k − Ẽ_m`.
///
/// Gaps are formed from level representatives, so members of one degenerate
/// multiplet share every gap exactly and the classes do not depend on the basis
/// chosen inside a multiplet.
#[derive(Clone, Debug)]
pub struct GapClasses {
    dim: usize,
    pairs: Vec<(u32, u32)>,
    offsets: Vec<usize>,
    values: Vec<f64>,
    class_of_pair: Vec<u32>,
}

impl GapClasses {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Ordered pairs `(k, m)` in class `c`, sorted.
    pub fn pairs(&self, c: usize) -> &[(u32, u32)] {
        &self.pairs[self.offsets[c]..self.offsets[c + 1]]
    }

    /// Mean gap of class `c`.
    pub fn value(&self, c: usize) -> f64 {
        self.values[c]
    }

    pub fn class_of(&self, k: usize, m: usize) -> usize {
        self.class_of_pair[k * self.dim + m] as usize
    }

    /// The class holding the diagonal pairs `(k, k)`.
    pub fn zero_class(&self) -> usize {
        self.class_of(0, 0)
    }

    /// Size of the largest class.
    pub fn max_class_size(&self) -> usize {
        self.offsets.windows(2).map(|w| w[1] - w[0]).max().unwrap_or(0)
    }
}

/// Eigensystem of a Hermitian operator with level and gap clustering.
#[derive(Clone, Debug)]
pub struct SpectralData {
    eigenvalues: Vec<f64>,
    eigenvectors: DenseOperator,
    levels: LevelClasses,
    gaps: GapClasses,
    tol_level: f64,
    tol_gap: f64,
}

/// Diagonalizes `h` and clusters its levels and gaps.
///
/// Tolerances are relative to the spectral range `E_max − E_min` (or absolute when
/// the range is zero). Two values belong to the same class when a chain of
/// neighbours, each within the threshold, connects them.
pub fn eigendecompose(h: &DenseOperator, tol_level: f64, tol_gap: f64) -> Result<SpectralData> {
    let scale = h.max_abs().max(1.0);
    h.require_hermitian(1e-10 * scale)?;
    let d = h.rows();
    let eig = SymmetricEigen::try_new(h.as_matrix().clone(), f64::EPSILON, 1000 * d.max(10))
        .ok_or_else(|| Error::Numerical(format!("eigensolver did not converge for d = {d}")))?;
    let raw: Vec<f64> = eig.eigenvalues.iter().copied().collect();
    SpectralData::from_eigensystem(raw, DenseOperator::from_matrix(eig.eigenvectors), tol_level, tol_gap)
}

impl SpectralData {
    /// Assembles spectral data from a known eigensystem (columns of `vectors`).
    ///
    /// Eigenpairs are re-sorted by ascending energy; `vectors` must be unitary.
    pub fn from_eigensystem(values: Vec<f64>, vectors: DenseOperator, tol_level: f64, tol_gap: f64) -> Result<Self> {
        let d = values.len();
        if d == 0 || vectors.rows() != d || vectors.cols() != d {
            return Err(Error::DimensionMismatch(format!(
                "{d} eigenvalues with a {}x{} eigenvector matrix",
                vectors.rows(),
                vectors.cols()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Numerical("non-finite eigenvalue".into()));
        }
        if !(tol_level >= 0.0 && tol_gap >= 0.0) {
            return Err(Error::InvalidInput("clustering tolerances must be ≥ 0".into()));
        }
        vectors.require_unitary(1e-10)?;

        let mut order: Vec<usize> = (0..d).collect();
        order.sort_by(|&a, &b| values[a].total_cmp(&values[b]).then(a.cmp(&b)));
        let eigenvalues: Vec<f64> = order.iter().map(|&k| values[k]).collect();
        let src = vectors.as_matrix();
        let eigenvectors = DenseOperator::from_matrix(DMatrix::from_fn(d, d, |i, j| src[(i, order[j])]));

        let range = eigenvalues[d - 1] - eigenvalues[0];
        let unit = if range > 0.0 { range } else { 1.0 };
        let levels = cluster_levels(&eigenvalues, tol_level * unit);
        let gaps = cluster_gaps(&levels, d, tol_gap * unit);
        Ok(Self {
            eigenvalues,
            eigenvectors,
            levels,
            gaps,
            tol_level,
            tol_gap,
        })
    }

    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    /// Unitary whose columns are the eigenvectors, in eigenvalue order.
    pub fn eigenvectors(&self) -> &DenseOperator {
        &self.eigenvectors
    }

    /// Amplitudes of `|φ_k⟩`.
    pub fn eigenvector(&self, k: usize) -> Vec<C64> {
        self.eigenvectors.as_matrix().column(k).iter().copied().collect()
    }

    pub fn level_classes(&self) -> &LevelClasses {
        &self.levels
    }

    pub fn gap_classes(&self) -> &GapClasses {
        &self.gaps
    }

    pub fn tol_level(&self) -> f64 {
        self.tol_level
    }

    pub fn tol_gap(&self) -> f64 {
        self.tol_gap
    }

    pub fn spectral_range(&self) -> f64 {
        self.eigenvalues[self.dim() - 1] - self.eigenvalues[0]
    }

    /// `V f(E) V†` for a function of the energies.
    pub fn spectral_function(&self, f: impl Fn(f64) -> C64) -> DenseOperator {
        let v = self.eigenvectors.as_matrix();
        let phases = DVector::from_iterator(self.dim(), self.eigenvalues.iter().map(|&e| f(e)));
        let mut scaled = v.clone();
        for (j, mut col) in scaled.column_iter_mut().enumerate() {
            col *= phases[j];
        }
        DenseOperator::from_matrix(scaled * v.adjoint())
    }

    /// `U_t = exp(−iHt)`.
    pub fn evolution(&self, t: f64) -> DenseOperator {
        self.spectral_function(|e| C64::from_polar(1.0, -e * t))
    }

    /// Gibbs state `exp(−βH)/Z`, shifted by the ground energy for stability.
    pub fn thermal_state(&self, beta: f64) -> DenseOperator {
        let e0 = self.eigenvalues[0];
        let z: f64 = self.eigenvalues.iter().map(|&e| (-beta * (e - e0)).exp()).sum();
        self.spectral_function(|e| C64::new((-beta * (e - e0)).exp() / z, 0.0))
    }

    /// `Σ_k E_k |φ_k⟩⟨φ_k|`.
    pub fn reconstruct(&self) -> DenseOperator {
        self.spectral_function(|e| C64::new(e, 0.0))
    }

    pub fn nrc_report(&self) -> NrcReport {
        nrc_report(self)
    }
}

fn cluster_levels(sorted: &[f64], threshold: f64) -> LevelClasses {
    let d = sorted.len();
    let mut ranges = Vec::new();
    let mut start = 0;
    for k in 1..=d {
        if k == d || sorted[k] - sorted[k - 1] > threshold {
            ranges.push(start..k);
            start = k;
        }
    }
    let values = ranges
        .iter()
        .map(|r| sorted[r.clone()].iter().sum::<f64>() / r.len() as f64)
        .collect();
    let mut class_of = vec![0; d];
    for (c, r) in ranges.iter().enumerate() {
        for k in r.clone() {
            class_of[k] = c;
        }
    }
    LevelClasses {
        ranges,
        values,
        class_of,
    }
}

fn cluster_gaps(levels: &LevelClasses, d: usize, threshold: f64) -> GapClasses {
    let gap = |p: usize| {
        let (k, m) = (p / d, p % d);
        levels.value(levels.class_of(k)) - levels.value(levels.class_of(m))
    };
    let mut order: Vec<usize> = (0..d * d).collect();
    let gaps: Vec<f64> = order.iter().map(|&p| gap(p)).collect();
    order.sort_by(|&a, &b| gaps[a].total_cmp(&gaps[b]).then(a.cmp(&b)));

    let mut pairs = Vec::with_capacity(d * d);
    let mut offsets = vec![0];
    let mut values = Vec::new();
    let mut class_of_pair = vec![0u32; d * d];
    let mut start = 0;
    for idx in 1..=order.len() {
        if idx == order.len() || gaps[order[idx]] - gaps[order[idx - 1]] > threshold {
            let members = &order[start..idx];
            let c = values.len() as u32;
            values.push(members.iter().map(|&p| gaps[p]).sum::<f64>() / members.len() as f64);
            let mut sorted: Vec<usize> = members.to_vec();
            sorted.sort_unstable();
            for p in sorted {
                class_of_pair[p] = c;
                pairs.push(((p / d) as u32, (p % d) as u32));
            }
            offsets.push(pairs.len());
            start = idx;
        }
    }
    GapClasses {
        dim: d,
        pairs,
        offsets,
        values,
        class_of_pair,
    }
}

/// Which no-resonance conditions the clustered spectrum satisfies.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct NrcReport {
    /// Nondegenerate levels and every nonzero gap realized by exactly one ordered pair.
    pub nrc: bool,
    /// Every nonzero gap realized by a single ordered pair of distinct levels.
    pub nrc_plus: bool,
    pub n_levels: usize,
    pub n_gap_classes: usize,
    /// Level classes with more than one member.
    pub degenerate_levels: usize,
    /// Nonzero-gap classes with more than one ordered pair.
    pub degenerate_gaps: usize,
    /// Gap classes mixing different ordered level pairs.
    pub nrc_plus_violations: usize,
    /// Set when some level is degenerate, so estimates built from individual
    /// eigenvectors depend on the basis returned by the solver.
    pub basis_dependent: bool,
}

pub fn nrc_report(spec: &SpectralData) -> NrcReport {
    let levels = spec.level_classes();
    let gaps = spec.gap_classes();
    let zero = gaps.zero_class();
    let degenerate_levels = (0..levels.len()).filter(|&c| levels.members(c).len() > 1).count();
    let mut degenerate_gaps = 0;
    let mut nrc_plus_violations = 0;
    let mut zero_class_mixed = false;
    for c in 0..gaps.len() {
        let pairs = gaps.pairs(c);
        let level_pair = |&(k, m): &(u32, u32)| (levels.class_of(k as usize), levels.class_of(m as usize));
        if c == zero {
            zero_class_mixed = pairs.iter().map(level_pair).any(|(a, b)| a != b);
            if zero_class_mixed {
                nrc_plus_violations += 1;
            }
            continue;
        }
        if pairs.len() > 1 {
            degenerate_gaps += 1;
        }
        let first = level_pair(&pairs[0]);
        if pairs.iter().map(level_pair).any(|lp| lp != first) {
            nrc_plus_violations += 1;
        }
    }
    NrcReport {
        nrc: degenerate_levels == 0 && degenerate_gaps == 0 && !zero_class_mixed,
        nrc_plus: nrc_plus_violations == 0,
        n_levels: levels.len(),
        n_gap_classes: gaps.len(),
        degenerate_levels,
        degenerate_gaps,
        nrc_plus_violations,
        basis_dependent: degenerate_levels > 0,
    }
}
