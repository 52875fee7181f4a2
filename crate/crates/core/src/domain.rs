//! Heterogeneous points, per-coordinate intervals, subcubes and sparsity.
//!
//! Every coordinate is mapped into `[0, 1]` before any geometry happens:
//! continuous columns affinely, categorical columns by giving code `c` of a
//! domain of size `D` the cell `[c/D, (c+1)/D)` with the point placed at its
//! centre. Interval lengths are then `hi - lo` for ranges and `|codes| / D`
//! for code sets, and all volumes are carried as base-2 logarithms.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Schema-level column kind, before any data has been observed.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ColumnKind {
    Continuous,
    CategoricalOrdered { domain_size: u32 },
    CategoricalUnordered { domain_size: u32 },
}

/// A column's kind together with what ingestion observed about it.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum AttributeSpec<F> {
    Continuous { observed_min: F, observed_max: F },
    CategoricalOrdered { domain_size: u32 },
    CategoricalUnordered { domain_size: u32 },
}

impl<F: Scalar> AttributeSpec<F> {
    pub fn kind(&self) -> ColumnKind {
        match *self {
            AttributeSpec::Continuous { .. } => ColumnKind::Continuous,
            AttributeSpec::CategoricalOrdered { domain_size } => {
                ColumnKind::CategoricalOrdered { domain_size }
            }
            AttributeSpec::CategoricalUnordered { domain_size } => {
                ColumnKind::CategoricalUnordered { domain_size }
            }
        }
    }

    fn validate(&self, column: usize) -> Result<()> {
        match *self {
            AttributeSpec::Continuous {
                observed_min,
                observed_max,
            } => {
                if !(observed_min.is_finite() && observed_max.is_finite()) {
                    return Err(Error::InvalidAttribute {
                        column,
                        reason: "non-finite bounds".into(),
                    });
                }
                if observed_min > observed_max {
                    return Err(Error::InvalidAttribute {
                        column,
                        reason: format!("observed_min {observed_min} > observed_max {observed_max}"),
                    });
                }
            }
            AttributeSpec::CategoricalOrdered { domain_size }
            | AttributeSpec::CategoricalUnordered { domain_size } => {
                if domain_size == 0 {
                    return Err(Error::InvalidAttribute {
                        column,
                        reason: "domain_size must be at least 1".into(),
                    });
                }
            }
        }
        Ok(())
    }
}

/// Column-typed point collection stored row-major.
///
/// Continuous columns hold reals, categorical columns hold integer codes
/// (as scalars) in `[0, domain_size)`.
#[derive(Clone, Debug, PartialEq)]
pub struct Dataset<F> {
    names: Vec<String>,
    columns: Vec<AttributeSpec<F>>,
    values: Vec<F>,
    labels: Option<Vec<bool>>,
}

impl<F: Scalar> Dataset<F> {
    /// Builds a dataset from raw rows, computing continuous bounds from the data.
    pub fn from_rows(
        names: Vec<String>,
        kinds: &[ColumnKind],
        rows: &[Vec<F>],
        labels: Option<Vec<bool>>,
    ) -> Result<Self> {
        let d = kinds.len();
        if d == 0 {
            return Err(Error::NoColumns);
        }
        if names.len() != d {
            return Err(Error::Shape(format!("{} names for {d} columns", names.len())));
        }
        let mut values = Vec::with_capacity(rows.len() * d);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != d {
                return Err(Error::Shape(format!("row {i} has {} values, expected {d}", row.len())));
            }
            values.extend_from_slice(row);
        }
        Self::from_values(names, kinds, values, labels)
    }

    /// Builds a dataset from a row-major table, computing continuous bounds from the data.
    pub fn from_values(
        names: Vec<String>,
        kinds: &[ColumnKind],
        values: Vec<F>,
        labels: Option<Vec<bool>>,
    ) -> Result<Self> {
        let d = kinds.len();
        if d == 0 {
            return Err(Error::NoColumns);
        }
        let columns = kinds
            .iter()
            .enumerate()
            .map(|(j, kind)| match *kind {
                ColumnKind::Continuous => {
                    let (lo, hi) = values
                        .iter()
                        .skip(j)
                        .step_by(d)
                        .fold((F::infinity(), F::neg_infinity()), |(lo, hi), &v| {
                            (lo.min(v), hi.max(v))
                        });
                    let (lo, hi) = if values.is_empty() { (F::zero(), F::zero()) } else { (lo, hi) };
                    AttributeSpec::Continuous {
                        observed_min: lo,
                        observed_max: hi,
                    }
                }
                ColumnKind::CategoricalOrdered { domain_size } => {
                    AttributeSpec::CategoricalOrdered { domain_size }
                }
                ColumnKind::CategoricalUnordered { domain_size } => {
                    AttributeSpec::CategoricalUnordered { domain_size }
                }
            })
            .collect();
        Self::new(names, columns, values, labels)
    }

    /// All-continuous dataset with default column names `x0, x1, ...`.
    pub fn continuous(rows: &[Vec<F>]) -> Result<Self> {
        let d = rows.first().map_or(0, Vec::len);
        let names = (0..d).map(|j| format!("x{j}")).collect();
        Self::from_rows(names, &vec![ColumnKind::Continuous; d], rows, None)
    }

    /// Validating constructor over a row-major value table.
    pub fn new(
        names: Vec<String>,
        columns: Vec<AttributeSpec<F>>,
        values: Vec<F>,
        labels: Option<Vec<bool>>,
    ) -> Result<Self> {
        let d = columns.len();
        if d == 0 {
            return Err(Error::NoColumns);
        }
        if names.len() != d {
            return Err(Error::Shape(format!("{} names for {d} columns", names.len())));
        }
        if !values.len().is_multiple_of(d) {
            return Err(Error::Shape(format!("{} values is not a multiple of d = {d}", values.len())));
        }
        let n = values.len() / d;
        if let Some(l) = &labels {
            if l.len() != n {
                return Err(Error::Shape(format!("{} labels for {n} rows", l.len())));
            }
        }
        for (j, spec) in columns.iter().enumerate() {
            spec.validate(j)?;
        }
        for (i, row) in values.chunks_exact(d).enumerate() {
            for (j, (&v, spec)) in row.iter().zip(&columns).enumerate() {
                check_value(v, spec).map_err(|reason| Error::OutOfDomain { row: i, column: j, reason })?;
            }
        }
        Ok(Self {
            names,
            columns,
            values,
            labels,
        })
    }

    pub fn n(&self) -> usize {
        self.values.len() / self.columns.len()
    }

    pub fn d(&self) -> usize {
        self.columns.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn columns(&self) -> &[AttributeSpec<F>] {
        &self.columns
    }

    pub fn labels(&self) -> Option<&[bool]> {
        self.labels.as_deref()
    }

    pub fn row(&self, i: usize) -> &[F] {
        let d = self.d();
        &self.values[i * d..(i + 1) * d]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[F]> {
        self.values.chunks_exact(self.d())
    }

    pub fn values(&self) -> &[F] {
        &self.values
    }

    pub fn column(&self, j: usize) -> impl Iterator<Item = F> + '_ {
        self.values.iter().skip(j).step_by(self.d()).copied()
    }

    pub fn with_labels(mut self, labels: Option<Vec<bool>>) -> Result<Self> {
        if let Some(l) = &labels {
            if l.len() != self.n() {
                return Err(Error::Shape(format!("{} labels for {} rows", l.len(), self.n())));
            }
        }
        self.labels = labels;
        Ok(self)
    }
}

fn check_value<F: Scalar>(v: F, spec: &AttributeSpec<F>) -> std::result::Result<(), String> {
    match *spec {
        AttributeSpec::Continuous {
            observed_min,
            observed_max,
        } => {
            if !v.is_finite() {
                return Err(format!("non-finite value {v}"));
            }
            if v < observed_min || v > observed_max {
                return Err(format!("{v} outside [{observed_min}, {observed_max}]"));
            }
        }
        AttributeSpec::CategoricalOrdered { domain_size }
        | AttributeSpec::CategoricalUnordered { domain_size } => {
            if v.fract() != F::zero() || v < F::zero() || v >= F::of(domain_size as f64) {
                return Err(format!("{v} is not a code in [0, {domain_size})"));
            }
        }
    }
    Ok(())
}

/// One coordinate of a subcube.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Interval<F> {
    /// Closed range `[lo, hi]` in normalized coordinates.
    Range { lo: F, hi: F },
    /// Sorted set of admissible category codes.
    Codes { codes: Vec<u32>, domain_size: u32 },
}

impl<F: Scalar> Interval<F> {
    pub fn unit() -> Self {
        Interval::Range {
            lo: F::zero(),
            hi: F::one(),
        }
    }

    pub fn all_codes(domain_size: u32) -> Self {
        Interval::Codes {
            codes: (0..domain_size).collect(),
            domain_size,
        }
    }

    /// Range constructor; rejects `lo > hi` and anything outside `[0, 1]`.
    pub fn range(lo: F, hi: F) -> Result<Self> {
        if !(F::zero() <= lo && lo <= hi && hi <= F::one()) {
            return Err(Error::InvalidParameter(format!("interval [{lo}, {hi}] not within [0, 1]")));
        }
        Ok(Interval::Range { lo, hi })
    }

    pub fn codes(mut codes: Vec<u32>, domain_size: u32) -> Result<Self> {
        codes.sort_unstable();
        codes.dedup();
        if codes.last().is_some_and(|&c| c >= domain_size) {
            return Err(Error::InvalidParameter(format!("code outside domain of size {domain_size}")));
        }
        Ok(Interval::Codes { codes, domain_size })
    }

    pub fn length(&self) -> F {
        match self {
            Interval::Range { lo, hi } => *hi - *lo,
            Interval::Codes { codes, domain_size } => {
                F::of_usize(codes.len()) / F::of(*domain_size as f64)
            }
        }
    }

    pub fn log2_length(&self) -> F {
        match self {
            Interval::Codes { codes, domain_size } if codes.len() == *domain_size as usize => {
                F::zero()
            }
            Interval::Range { lo, hi } if lo.is_zero() && hi.is_one() => F::zero(),
            _ => self.length().log2(),
        }
    }

    pub fn is_full(&self) -> bool {
        match self {
            Interval::Range { lo, hi } => lo.is_zero() && hi.is_one(),
            Interval::Codes { codes, domain_size } => codes.len() == *domain_size as usize,
        }
    }

    /// Membership of a normalized coordinate value.
    pub fn contains(&self, x: F) -> bool {
        match self {
            Interval::Range { lo, hi } => *lo <= x && x <= *hi,
            Interval::Codes { codes, domain_size } => {
                codes.binary_search(&code_of(x, *domain_size)).is_ok()
            }
        }
    }
}

/// Category code of a normalized categorical coordinate.
#[inline]
pub fn code_of<F: Scalar>(x: F, domain_size: u32) -> u32 {
    let c = (x * F::of(domain_size as f64)).floor().to_u32().unwrap_or(0);
    c.min(domain_size.saturating_sub(1))
}

/// Normalized position (cell centre) of a category code.
#[inline]
pub fn position_of<F: Scalar>(code: u32, domain_size: u32) -> F {
    (F::of(code as f64) + F::of(0.5)) / F::of(domain_size as f64)
}

/// Product of one interval per coordinate, with its cached log2-volume.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Subcube<F> {
    intervals: Vec<Interval<F>>,
    log2_volume: F,
}

impl<F: Scalar> Subcube<F> {
    pub fn new(intervals: Vec<Interval<F>>) -> Self {
        let log2_volume = intervals.iter().map(Interval::log2_length).sum();
        Self {
            intervals,
            log2_volume,
        }
    }

    /// The whole normalized space for the given coordinate kinds.
    pub fn full(kinds: &[CoordKind]) -> Self {
        Self::new(
            kinds
                .iter()
                .map(|k| match *k {
                    CoordKind::Unordered { domain_size } => Interval::all_codes(domain_size),
                    _ => Interval::unit(),
                })
                .collect(),
        )
    }

    /// Copy with coordinate `j` replaced.
    pub fn with_interval(&self, j: usize, interval: Interval<F>) -> Self {
        let mut intervals = self.intervals.clone();
        intervals[j] = interval;
        Self::new(intervals)
    }

    pub fn intervals(&self) -> &[Interval<F>] {
        &self.intervals
    }

    pub fn dim(&self) -> usize {
        self.intervals.len()
    }

    /// Log2 of the volume; `-inf` for a degenerate subcube.
    pub fn log2_volume(&self) -> F {
        self.log2_volume
    }

    pub fn is_degenerate(&self) -> bool {
        self.intervals.iter().any(|i| i.length() <= F::zero())
    }

    pub fn contains(&self, point: &[F]) -> bool {
        point.len() == self.intervals.len()
            && self.intervals.iter().zip(point).all(|(i, &x)| i.contains(x))
    }

    /// Coordinates whose interval is not the full domain.
    pub fn constrained(&self) -> impl Iterator<Item = usize> + '_ {
        self.intervals
            .iter()
            .enumerate()
            .filter(|(_, i)| !i.is_full())
            .map(|(j, _)| j)
    }
}

/// Log2 of the sparsity `vol(C) / count`.
pub fn sparsity<F: Scalar>(subcube: &Subcube<F>, count: usize) -> Result<F> {
    if count == 0 {
        return Err(Error::EmptyCell);
    }
    if let Some(j) = subcube.intervals.iter().position(|i| i.length() <= F::zero()) {
        return Err(Error::DegenerateSubcube(j));
    }
    Ok(subcube.log2_volume - F::of_usize(count).log2())
}

/// How a normalized coordinate is interpreted by the split machinery.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CoordKind {
    Continuous,
    Ordered { domain_size: u32 },
    Unordered { domain_size: u32 },
}

/// Per-column affine (or categorical) map into `[0, 1]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "map", rename_all = "snake_case")]
pub enum ColumnTransform<F> {
    Affine { min: F, span: F },
    /// Constant training column; every value maps to 0.5 and the column never splits.
    Constant { value: F },
    Ordered { domain_size: u32 },
    Unordered { domain_size: u32 },
}

impl<F: Scalar> ColumnTransform<F> {
    fn fit(spec: &AttributeSpec<F>) -> Self {
        match *spec {
            AttributeSpec::Continuous {
                observed_min,
                observed_max,
            } => {
                let span = observed_max - observed_min;
                if span > F::zero() {
                    ColumnTransform::Affine {
                        min: observed_min,
                        span,
                    }
                } else {
                    ColumnTransform::Constant {
                        value: observed_min,
                    }
                }
            }
            AttributeSpec::CategoricalOrdered { domain_size } => {
                ColumnTransform::Ordered { domain_size }
            }
            AttributeSpec::CategoricalUnordered { domain_size } => {
                ColumnTransform::Unordered { domain_size }
            }
        }
    }

    pub fn coord_kind(&self) -> CoordKind {
        match *self {
            ColumnTransform::Affine { .. } | ColumnTransform::Constant { .. } => {
                CoordKind::Continuous
            }
            ColumnTransform::Ordered { domain_size } => CoordKind::Ordered { domain_size },
            ColumnTransform::Unordered { domain_size } => CoordKind::Unordered { domain_size },
        }
    }

    pub fn splittable(&self) -> bool {
        match *self {
            ColumnTransform::Affine { .. } => true,
            ColumnTransform::Constant { .. } => false,
            ColumnTransform::Ordered { domain_size } | ColumnTransform::Unordered { domain_size } => {
                domain_size > 1
            }
        }
    }

    /// Raw value to normalized coordinate; continuous values are clipped to `[0, 1]`.
    pub fn forward(&self, raw: F) -> std::result::Result<F, String> {
        if raw.is_nan() {
            return Err("NaN value".into());
        }
        match *self {
            ColumnTransform::Affine { min, span } => {
                Ok(((raw - min) / span).max(F::zero()).min(F::one()))
            }
            ColumnTransform::Constant { .. } => Ok(F::of(0.5)),
            ColumnTransform::Ordered { domain_size } | ColumnTransform::Unordered { domain_size } => {
                if raw.fract() != F::zero() || raw < F::zero() || raw >= F::of(domain_size as f64) {
                    return Err(format!("{raw} is not a code in [0, {domain_size})"));
                }
                Ok(position_of(raw.to_u32().unwrap_or(0), domain_size))
            }
        }
    }

    /// Normalized range endpoint back to original units.
    pub fn inverse(&self, x: F) -> F {
        match *self {
            ColumnTransform::Affine { min, span } => min + x * span,
            ColumnTransform::Constant { value } => value,
            ColumnTransform::Ordered { domain_size } | ColumnTransform::Unordered { domain_size } => {
                x * F::of(domain_size as f64)
            }
        }
    }
}

/// Stored map from raw rows to normalized coordinates, used again at scoring time.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NormalizationTransform<F> {
    pub columns: Vec<ColumnTransform<F>>,
}

impl<F: Scalar> NormalizationTransform<F> {
    pub fn fit(dataset: &Dataset<F>) -> Self {
        Self {
            columns: dataset.columns().iter().map(ColumnTransform::fit).collect(),
        }
    }

    pub fn d(&self) -> usize {
        self.columns.len()
    }

    pub fn coord_kinds(&self) -> Vec<CoordKind> {
        self.columns.iter().map(ColumnTransform::coord_kind).collect()
    }

    /// Normalizes one raw row. `row_index` is only used for error messages.
    pub fn apply_row(&self, raw: &[F], row_index: usize, out: &mut Vec<F>) -> Result<()> {
        if raw.len() != self.columns.len() {
            return Err(Error::SchemaMismatch(format!(
                "row {row_index} has {} values, model expects {}",
                raw.len(),
                self.columns.len()
            )));
        }
        for (j, (t, &v)) in self.columns.iter().zip(raw).enumerate() {
            out.push(t.forward(v).map_err(|reason| Error::OutOfDomain {
                row: row_index,
                column: j,
                reason,
            })?);
        }
        Ok(())
    }
}

/// A dataset mapped into `[0, 1]^d` together with per-coordinate metadata.
#[derive(Clone, Debug, PartialEq)]
pub struct NormalizedData<F> {
    n: usize,
    kinds: Vec<CoordKind>,
    splittable: Vec<bool>,
    values: Vec<F>,
    labels: Option<Vec<bool>>,
}

impl<F: Scalar> NormalizedData<F> {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn d(&self) -> usize {
        self.kinds.len()
    }

    pub fn kinds(&self) -> &[CoordKind] {
        &self.kinds
    }

    /// False for constant continuous columns and single-code domains.
    pub fn splittable(&self) -> &[bool] {
        &self.splittable
    }

    pub fn row(&self, i: usize) -> &[F] {
        let d = self.d();
        &self.values[i * d..(i + 1) * d]
    }

    #[inline]
    pub fn value(&self, i: usize, j: usize) -> F {
        self.values[i * self.kinds.len() + j]
    }

    pub fn values(&self) -> &[F] {
        &self.values
    }

    pub fn labels(&self) -> Option<&[bool]> {
        self.labels.as_deref()
    }

    /// Whether any usable coordinate takes at least two distinct values.
    pub fn has_usable_attribute(&self) -> bool {
        (0..self.d()).any(|j| {
            self.splittable[j] && {
                let first = self.value(0, j);
                (1..self.n).any(|i| self.value(i, j) != first)
            }
        })
    }
}

/// Maps a dataset into `[0, 1]^d` and returns the transform for unseen points.
pub fn normalize<F: Scalar>(dataset: &Dataset<F>) -> Result<(NormalizedData<F>, NormalizationTransform<F>)> {
    if dataset.d() == 0 {
        return Err(Error::NoColumns);
    }
    if dataset.is_empty() {
        return Err(Error::EmptyInput);
    }
    let transform = NormalizationTransform::fit(dataset);
    let mut values = Vec::with_capacity(dataset.values().len());
    for (i, row) in dataset.rows().enumerate() {
        transform.apply_row(row, i, &mut values)?;
    }
    let data = NormalizedData {
        n: dataset.n(),
        kinds: transform.coord_kinds(),
        splittable: transform.columns.iter().map(ColumnTransform::splittable).collect(),
        values,
        labels: dataset.labels().map(<[bool]>::to_vec),
    };
    Ok((data, transform))
}
