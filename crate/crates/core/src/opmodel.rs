//! Operator models: declared structure, materialization, and resolvent solves.
//!
//! A model is either a dense matrix, a diagonal model split into a Riesz part
//! (eigenvalues marching to 0) and an invertible part (bounded away from 0),
//! or a direct sum of models. Diagonal models keep their eigenvalues as data
//! so every downstream operation has an exact oracle; dense models exercise
//! the generic linear-algebra paths.
//!
//! Everything here is finite-dimensional: operators are everywhere defined,
//! so domain-stabilization conditions on iterated powers hold vacuously and
//! every model is admissible for the constructions downstream.

use ndarray::s;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{self, CMat};
use crate::tol;

#[derive(Debug, Clone, PartialEq)]
pub enum OperatorModel {
    Dense {
        entries: CMat,
    },
    /// Riesz eigenvalues materialize first, invertible eigenvalues after.
    Diagonal {
        riesz: Vec<Complex64>,
        invertible: Vec<Complex64>,
    },
    DirectSum {
        summands: Vec<OperatorModel>,
    },
}

/// Index split of the coordinates into the invertible part M and the Riesz
/// part N.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Reduction {
    pub m_indices: Vec<usize>,
    pub n_indices: Vec<usize>,
}

impl OperatorModel {
    pub fn dense(entries: CMat) -> Self {
        OperatorModel::Dense { entries }
    }

    pub fn diagonal(riesz: Vec<Complex64>, invertible: Vec<Complex64>) -> Self {
        OperatorModel::Diagonal { riesz, invertible }
    }

    pub fn direct_sum(summands: Vec<OperatorModel>) -> Self {
        OperatorModel::DirectSum { summands }
    }

    pub fn dim(&self) -> usize {
        match self {
            OperatorModel::Dense { entries } => entries.nrows(),
            OperatorModel::Diagonal { riesz, invertible } => riesz.len() + invertible.len(),
            OperatorModel::DirectSum { summands } => summands.iter().map(|m| m.dim()).sum(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            OperatorModel::Dense { entries } => {
                if entries.nrows() != entries.ncols() {
                    return Err(Error::InvalidModel(format!(
                        "dense model must be square, got {}x{}",
                        entries.nrows(),
                        entries.ncols()
                    )));
                }
                if entries.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
                    return Err(Error::InvalidModel("dense model has non-finite entries".into()));
                }
                Ok(())
            }
            OperatorModel::Diagonal { riesz, invertible } => {
                let max_riesz = riesz.iter().map(|z| z.norm()).fold(0.0, f64::max);
                for z in invertible {
                    if z.norm() <= 2.0 * tol::EPS_SPEC {
                        return Err(Error::InvalidModel(format!(
                            "invertible eigenvalue {z} is not bounded away from 0"
                        )));
                    }
                    if z.norm() <= max_riesz {
                        return Err(Error::InvalidModel(format!(
                            "invertible eigenvalue {z} not separated above the Riesz part (max modulus {max_riesz})"
                        )));
                    }
                }
                Ok(())
            }
            OperatorModel::DirectSum { summands } => {
                if summands.is_empty() {
                    return Err(Error::InvalidModel("direct sum needs at least one summand".into()));
                }
                for sub in summands {
                    sub.validate()?;
                }
                Ok(())
            }
        }
    }

    /// Dense n x n representation; diagonal models place Riesz eigenvalues
    /// first, invertible after.
    pub fn materialize(&self) -> Result<CMat> {
        let dim = self.dim();
        if dim > tol::DIM_CAP {
            return Err(Error::ModelTooLarge { dim, cap: tol::DIM_CAP });
        }
        self.validate()?;
        Ok(self.materialize_unchecked())
    }

    fn materialize_unchecked(&self) -> CMat {
        match self {
            OperatorModel::Dense { entries } => entries.clone(),
            OperatorModel::Diagonal { riesz, invertible } => {
                let all: Vec<Complex64> = riesz.iter().chain(invertible.iter()).copied().collect();
                linalg::diag(&all)
            }
            OperatorModel::DirectSum { summands } => {
                let dim = self.dim();
                let mut out = CMat::zeros((dim, dim));
                let mut offset = 0;
                for sub in summands {
                    let block = sub.materialize_unchecked();
                    let d = block.nrows();
                    out.slice_mut(s![offset..offset + d, offset..offset + d]).assign(&block);
                    offset += d;
                }
                out
            }
        }
    }

    /// Declared nonzero Riesz eigenvalues, sorted by strictly decreasing
    /// modulus with modulus ties broken by ascending argument. Duplicates are
    /// kept (multiplicity is recorded, not an error).
    pub fn riesz_sequence(&self) -> Result<Vec<Complex64>> {
        if matches!(self, OperatorModel::Dense { .. }) {
            return Err(Error::NotStructured(
                "a dense model declares no Riesz sequence".into(),
            ));
        }
        let mut seq = Vec::new();
        self.collect_riesz(&mut seq);
        seq.retain(|z| z.norm() > 0.0);
        seq.sort_by(|a, b| b.norm().total_cmp(&a.norm()).then(a.arg().total_cmp(&b.arg())));
        Ok(seq)
    }

    fn collect_riesz(&self, out: &mut Vec<Complex64>) {
        match self {
            OperatorModel::Dense { .. } => {}
            OperatorModel::Diagonal { riesz, .. } => out.extend_from_slice(riesz),
            OperatorModel::DirectSum { summands } => {
                for sub in summands {
                    sub.collect_riesz(out);
                }
            }
        }
    }

    /// Declared invertible-part eigenvalues from all diagonal parts.
    pub fn declared_invertible(&self) -> Vec<Complex64> {
        let mut out = Vec::new();
        self.collect_invertible(&mut out);
        out
    }

    fn collect_invertible(&self, out: &mut Vec<Complex64>) {
        match self {
            OperatorModel::Dense { .. } => {}
            OperatorModel::Diagonal { invertible, .. } => out.extend_from_slice(invertible),
            OperatorModel::DirectSum { summands } => {
                for sub in summands {
                    sub.collect_invertible(out);
                }
            }
        }
    }

    pub fn prepare(&self) -> Result<Prepared> {
        Prepared::new(self)
    }
}

enum BlockKind {
    /// Diagonal entries; the first `riesz_len` coordinates carry the Riesz part.
    Diag { entries: Vec<Complex64>, riesz_len: usize },
    Dense { matrix: CMat, spectrum: Vec<Complex64> },
}

struct Block {
    offset: usize,
    kind: BlockKind,
}

impl Block {
    fn dim(&self) -> usize {
        match &self.kind {
            BlockKind::Diag { entries, .. } => entries.len(),
            BlockKind::Dense { matrix, .. } => matrix.nrows(),
        }
    }
}

/// A validated model with its materialization, realized spectrum, and the
/// block structure needed for exact resolvent solves.
pub struct Prepared {
    pub matrix: CMat,
    /// Realized eigenvalues with algebraic multiplicity, in coordinate order
    /// for structured blocks.
    pub spectrum: Vec<Complex64>,
    blocks: Vec<Block>,
    dim: usize,
}

/// Borrowed view of one direct summand.
pub enum BlockView<'a> {
    Diag(&'a [Complex64]),
    Dense(&'a CMat),
}

impl Prepared {
    pub fn new(model: &OperatorModel) -> Result<Self> {
        let matrix = model.materialize()?;
        let dim = matrix.nrows();
        let mut blocks = Vec::new();
        collect_blocks(model, 0, &mut blocks)?;
        let mut spectrum = Vec::with_capacity(dim);
        for block in &blocks {
            match &block.kind {
                BlockKind::Diag { entries, .. } => spectrum.extend_from_slice(entries),
                BlockKind::Dense { spectrum: s, .. } => spectrum.extend_from_slice(s),
            }
        }
        Ok(Prepared { matrix, spectrum, blocks, dim })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Diagonal entries in coordinate order, if every block is diagonal.
    pub fn diag_entries(&self) -> Option<Vec<Complex64>> {
        let mut out = Vec::with_capacity(self.dim);
        for block in &self.blocks {
            match &block.kind {
                BlockKind::Diag { entries, .. } => out.extend_from_slice(entries),
                BlockKind::Dense { .. } => return None,
            }
        }
        Some(out)
    }

    /// Distance from lambda to the realized spectrum, with the closest
    /// eigenvalue.
    pub fn spectrum_distance(&self, lambda: Complex64) -> (f64, Complex64) {
        let mut best = (f64::INFINITY, Complex64::new(0.0, 0.0));
        for &e in &self.spectrum {
            let d = (lambda - e).norm();
            if d < best.0 {
                best = (d, e);
            }
        }
        best
    }

    /// Solves (lambda I - A) X = rhs block by block; diagonal blocks divide
    /// exactly, dense blocks go through LU.
    pub fn resolvent(&self, lambda: Complex64, rhs: &CMat) -> Result<CMat> {
        assert_eq!(rhs.nrows(), self.dim, "rhs row count must match model dimension");
        let (dist, eigenvalue) = self.spectrum_distance(lambda);
        if dist <= tol::EPS_SPEC {
            return Err(Error::NearSingular { lambda, eigenvalue, distance: dist });
        }
        let mut out = CMat::zeros(rhs.dim());
        for block in &self.blocks {
            let lo = block.offset;
            let hi = lo + block.dim();
            match &block.kind {
                BlockKind::Diag { entries, .. } => {
                    for (i, &d) in entries.iter().enumerate() {
                        let factor = Complex64::new(1.0, 0.0) / (lambda - d);
                        for j in 0..rhs.ncols() {
                            out[[lo + i, j]] = rhs[[lo + i, j]] * factor;
                        }
                    }
                }
                BlockKind::Dense { matrix, .. } => {
                    let n = matrix.nrows();
                    let shifted = linalg::identity(n) * lambda - matrix;
                    let sub_rhs = rhs.slice(s![lo..hi, ..]).to_owned();
                    let solved = linalg::lu_solve(&shifted, &sub_rhs)?;
                    out.slice_mut(s![lo..hi, ..]).assign(&solved);
                }
            }
        }
        Ok(out)
    }

    /// (lambda I - A)^{-1}.
    pub fn resolvent_identity(&self, lambda: Complex64) -> Result<CMat> {
        self.resolvent(lambda, &linalg::identity(self.dim))
    }

    /// Block offsets with views, in coordinate order.
    pub fn blocks(&self) -> impl Iterator<Item = (usize, BlockView<'_>)> {
        self.blocks.iter().map(|b| {
            let view = match &b.kind {
                BlockKind::Diag { entries, .. } => BlockView::Diag(entries),
                BlockKind::Dense { matrix, .. } => BlockView::Dense(matrix),
            };
            (b.offset, view)
        })
    }

    /// M/N coordinate split. Dense blocks classify as Riesz when their whole
    /// spectrum sits at 0 (quasinilpotent at truncation scale) and as
    /// invertible when it is bounded away from 0; a mixed dense block leaves
    /// the model without a declared reduction.
    pub fn reduction(&self) -> Option<Reduction> {
        let mut m_indices = Vec::new();
        let mut n_indices = Vec::new();
        for block in &self.blocks {
            let lo = block.offset;
            match &block.kind {
                BlockKind::Diag { entries, riesz_len } => {
                    n_indices.extend(lo..lo + riesz_len);
                    m_indices.extend(lo + riesz_len..lo + entries.len());
                }
                BlockKind::Dense { spectrum, matrix } => {
                    let max_mod = spectrum.iter().map(|e| e.norm()).fold(0.0, f64::max);
                    let min_mod = spectrum.iter().map(|e| e.norm()).fold(f64::INFINITY, f64::min);
                    if max_mod <= tol::EPS_SPEC {
                        n_indices.extend(lo..lo + matrix.nrows());
                    } else if min_mod > 2.0 * tol::EPS_SPEC {
                        m_indices.extend(lo..lo + matrix.nrows());
                    } else {
                        return None;
                    }
                }
            }
        }
        Some(Reduction { m_indices, n_indices })
    }
}

fn collect_blocks(model: &OperatorModel, offset: usize, out: &mut Vec<Block>) -> Result<usize> {
    match model {
        OperatorModel::Dense { entries } => {
            let spectrum = linalg::eigenvalues(entries)?;
            out.push(Block {
                offset,
                kind: BlockKind::Dense { matrix: entries.clone(), spectrum },
            });
            Ok(offset + entries.nrows())
        }
        OperatorModel::Diagonal { riesz, invertible } => {
            let entries: Vec<Complex64> = riesz.iter().chain(invertible.iter()).copied().collect();
            let dim = entries.len();
            out.push(Block {
                offset,
                kind: BlockKind::Diag { entries, riesz_len: riesz.len() },
            });
            Ok(offset + dim)
        }
        OperatorModel::DirectSum { summands } => {
            let mut cursor = offset;
            for sub in summands {
                cursor = collect_blocks(sub, cursor, out)?;
            }
            Ok(cursor)
        }
    }
}

// ---------------------------------------------------------------------------
// Spec-surface operations
// ---------------------------------------------------------------------------

pub fn materialize(model: &OperatorModel) -> Result<CMat> {
    model.materialize()
}

/// Solves (lambda I - A) X = rhs with the relative residual contract
/// |.(lambda I - A) X - rhs| <= 1e-10 |rhs|.
pub fn resolvent_solve(model: &OperatorModel, lambda: Complex64, rhs: &CMat) -> Result<CMat> {
    model.prepare()?.resolvent(lambda, rhs)
}

pub fn riesz_sequence(model: &OperatorModel) -> Result<Vec<Complex64>> {
    model.riesz_sequence()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{identity, max_abs, ONE, ZERO};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn jordan_block(n: usize, eigenvalue: Complex64) -> CMat {
        let mut j = CMat::zeros((n, n));
        for i in 0..n {
            j[[i, i]] = eigenvalue;
            if i + 1 < n {
                j[[i, i + 1]] = ONE;
            }
        }
        j
    }

    #[test]
    fn materialize_diagonal_orders_riesz_first() {
        let model = OperatorModel::diagonal(vec![c(0.0, 0.25), c(0.0, 1.0 / 6.0)], vec![c(-1.0, 0.0)]);
        let m = model.materialize().unwrap();
        assert_eq!(m[[0, 0]], c(0.0, 0.25));
        assert_eq!(m[[1, 1]], c(0.0, 1.0 / 6.0));
        assert_eq!(m[[2, 2]], c(-1.0, 0.0));
        assert_eq!(m[[0, 1]], ZERO);
    }

    #[test]
    fn materialize_dense_is_identity_on_kind() {
        let entries = jordan_block(2, ZERO);
        let model = OperatorModel::dense(entries.clone());
        assert_eq!(model.materialize().unwrap(), entries);
    }

    #[test]
    fn materialize_direct_sum_is_block_concatenation() {
        let a = OperatorModel::diagonal(vec![], vec![c(1.0, 0.0)]);
        let b = OperatorModel::diagonal(vec![], vec![c(2.0, 0.0)]);
        let m = OperatorModel::direct_sum(vec![a, b]).materialize().unwrap();
        assert_eq!(m, linalg::diag(&[c(1.0, 0.0), c(2.0, 0.0)]));
    }

    #[test]
    fn materialize_rejects_oversized_model() {
        let riesz = vec![ZERO; tol::DIM_CAP + 1];
        let model = OperatorModel::diagonal(riesz, vec![]);
        assert!(matches!(model.materialize(), Err(Error::ModelTooLarge { .. })));
    }

    #[test]
    fn direct_sum_materializes_to_exact_block_diagonal() {
        let model = OperatorModel::direct_sum(vec![
            OperatorModel::dense(jordan_block(2, ZERO)),
            OperatorModel::diagonal(vec![c(0.25, 0.0)], vec![c(2.0, 0.0)]),
        ]);
        let m = model.materialize().unwrap();
        let expected = {
            let mut e = CMat::zeros((4, 4));
            e[[0, 1]] = ONE;
            e[[2, 2]] = c(0.25, 0.0);
            e[[3, 3]] = c(2.0, 0.0);
            e
        };
        assert_eq!(m, expected);
    }

    #[test]
    fn resolvent_on_diagonal_is_exact() {
        let model = OperatorModel::diagonal(vec![ZERO], vec![c(1.0, 0.0)]);
        let x = resolvent_solve(&model, c(0.5, 0.0), &identity(2)).unwrap();
        assert_eq!(x[[0, 0]], c(2.0, 0.0));
        assert_eq!(x[[1, 1]], c(-2.0, 0.0));
    }

    #[test]
    fn resolvent_on_jordan_block() {
        let model = OperatorModel::dense(jordan_block(2, ZERO));
        let x = resolvent_solve(&model, ONE, &identity(2)).unwrap();
        let expected = ndarray::array![[ONE, ONE], [ZERO, ONE]];
        assert!(max_abs(&(&x - &expected)) < 1e-14);
    }

    #[test]
    fn resolvent_rejects_spectrum_point() {
        let model = OperatorModel::diagonal(vec![ZERO], vec![c(1.0, 0.0)]);
        let err = resolvent_solve(&model, ZERO, &identity(2)).unwrap_err();
        assert!(matches!(err, Error::NearSingular { .. }));
    }

    #[test]
    fn riesz_sequence_sorts_by_decreasing_modulus() {
        let model = OperatorModel::diagonal(vec![c(0.125, 0.0), c(0.25, 0.0)], vec![]);
        assert_eq!(model.riesz_sequence().unwrap(), vec![c(0.25, 0.0), c(0.125, 0.0)]);
    }

    #[test]
    fn riesz_sequence_breaks_modulus_ties_by_argument() {
        let model = OperatorModel::diagonal(vec![c(0.0, 0.25), c(0.25, 0.0)], vec![]);
        assert_eq!(model.riesz_sequence().unwrap(), vec![c(0.25, 0.0), c(0.0, 0.25)]);
    }

    #[test]
    fn riesz_sequence_drops_realized_zeros() {
        let model = OperatorModel::diagonal(vec![ZERO, c(1.0 / 3.0, 0.0)], vec![c(2.0, 0.0)]);
        assert_eq!(model.riesz_sequence().unwrap(), vec![c(1.0 / 3.0, 0.0)]);
    }

    #[test]
    fn riesz_sequence_rejects_dense() {
        let model = OperatorModel::dense(jordan_block(2, ZERO));
        assert!(matches!(model.riesz_sequence(), Err(Error::NotStructured(_))));
    }

    #[test]
    fn validate_rejects_unseparated_invertible_part() {
        let model = OperatorModel::diagonal(vec![c(0.4, 0.0)], vec![c(0.3, 0.0)]);
        assert!(matches!(model.validate(), Err(Error::InvalidModel(_))));
    }

    #[test]
    fn reduction_splits_declared_parts() {
        let model = OperatorModel::direct_sum(vec![
            OperatorModel::dense(jordan_block(2, ZERO)),
            OperatorModel::diagonal(vec![c(0.25, 0.0)], vec![c(2.0, 0.0)]),
        ]);
        let red = model.prepare().unwrap().reduction().unwrap();
        assert_eq!(red.n_indices, vec![0, 1, 2]);
        assert_eq!(red.m_indices, vec![3]);
    }

    #[test]
    fn prepared_spectrum_of_structured_model_is_declared() {
        let model = OperatorModel::diagonal(vec![ZERO, c(1.0 / 3.0, 0.0)], vec![c(2.0, 0.0)]);
        let p = model.prepare().unwrap();
        assert_eq!(p.spectrum, vec![ZERO, c(1.0 / 3.0, 0.0), c(2.0, 0.0)]);
    }
}
