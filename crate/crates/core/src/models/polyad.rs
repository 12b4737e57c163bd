use std::collections::BTreeMap;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::fock::OperatorMatrix;

use super::eigen::jacobi_eigen;
use super::levels::{Level, LevelSpectrum};

/// Off-block entries at or above this magnitude break the polyad structure.
pub const BLOCK_LEAKAGE_TOLERANCE: f64 = 1e-12;

/// Symmetry tolerance on the input of [`diagonalize`].
pub const SYMMETRY_TOLERANCE: f64 = 1e-10;

/// Relative tie window when picking the dominant basis label of an eigenvector.
const ASSIGNMENT_TIE: f64 = 1e-9;

/// Submatrix on the basis states of one total-quanta value.
#[derive(Debug, Clone, PartialEq)]
pub struct PolyadBlock {
    pub polyad: u32,
    pub labels: Vec<Vec<u32>>,
    pub indices: Vec<usize>,
    pub matrix: DMatrix<f64>,
}

/// Splits an operator into blocks of fixed total quanta.
///
/// Fails with a structure error naming the first entry (row-major) that
/// connects different polyads with magnitude `>= BLOCK_LEAKAGE_TOLERANCE`.
pub fn polyad_decompose(h: &OperatorMatrix) -> Result<Vec<PolyadBlock>> {
    let basis = h.basis();
    let labels: Vec<Vec<u32>> = basis.labels().collect();
    let polyads: Vec<u32> = labels.iter().map(|l| l.iter().sum()).collect();
    let e = h.entries();
    for row in 0..basis.dimension() {
        for col in 0..basis.dimension() {
            let value = e[(row, col)];
            if polyads[row] != polyads[col] && value.abs() >= BLOCK_LEAKAGE_TOLERANCE {
                return Err(Error::Structure {
                    row,
                    col,
                    value,
                    from: polyads[col],
                    to: polyads[row],
                });
            }
        }
    }

    let mut groups: BTreeMap<u32, Vec<usize>> = BTreeMap::new();
    for (i, &p) in polyads.iter().enumerate() {
        groups.entry(p).or_default().push(i);
    }
    Ok(groups
        .into_iter()
        .map(|(polyad, indices)| {
            let m = indices.len();
            let matrix = DMatrix::from_fn(m, m, |r, c| e[(indices[r], indices[c])]);
            PolyadBlock {
                polyad,
                labels: indices.iter().map(|&i| labels[i].clone()).collect(),
                indices,
                matrix,
            }
        })
        .collect())
}

/// Assigns each eigenvector of a block to a distinct basis label.
///
/// Eigenvectors are taken in ascending energy; each claims the still
/// unclaimed label with the largest absolute component, ties within
/// `ASSIGNMENT_TIE` going to the lexicographically smallest label.
fn assign_block(block: &PolyadBlock) -> Vec<Level> {
    let eig = jacobi_eigen(&block.matrix);
    let m = block.labels.len();
    let mut taken = vec![false; m];
    let mut out = Vec::with_capacity(m);
    for (k, &energy) in eig.values.iter().enumerate() {
        let mut best: Option<usize> = None;
        for (r, label) in block.labels.iter().enumerate() {
            if taken[r] {
                continue;
            }
            let w = eig.vectors[(r, k)].abs();
            let better = match best {
                None => true,
                Some(b) => {
                    let bw = eig.vectors[(b, k)].abs();
                    w > bw + ASSIGNMENT_TIE
                        || ((w - bw).abs() <= ASSIGNMENT_TIE && *label < block.labels[b])
                }
            };
            if better {
                best = Some(r);
            }
        }
        let r = best.expect("one label per eigenvector");
        taken[r] = true;
        out.push(Level::new(block.labels[r].clone(), energy));
    }
    out
}

/// Diagonalizes a polyad-conserving Hamiltonian block by block.
///
/// Energies are the eigenvalues of the matrix as given; no zero-point shift
/// is applied.
pub fn diagonalize(h: &OperatorMatrix) -> Result<LevelSpectrum> {
    let asym = h.asymmetry();
    if asym.is_nan() || asym > SYMMETRY_TOLERANCE {
        return Err(Error::Asymmetric(asym));
    }
    let blocks = polyad_decompose(h)?;
    let levels = blocks.iter().flat_map(assign_block).collect();
    LevelSpectrum::new(levels)
}
