//! Truncated multi-mode number basis and dense operator matrices.

use std::ops::{Add, Mul, Sub};

use nalgebra::DMatrix;

use crate::deformation::{DeformationParameter, QDeformation, SymmetricDeformation};
use crate::error::{Error, Result};

pub const DEFAULT_DIMENSION_CAP: usize = 100_000;

/// Full tensor-product basis `|n_1, ..., n_l>` with `0 <= n_i <= n_max`.
///
/// Flat indices follow lexicographic order with `n_1` varying slowest.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct FockBasis {
    modes: usize,
    n_max: u32,
    dimension: usize,
}

impl FockBasis {
    pub fn new(modes: usize, n_max: u32) -> Result<Self> {
        Self::with_cap(modes, n_max, DEFAULT_DIMENSION_CAP)
    }

    pub fn with_cap(modes: usize, n_max: u32, cap: usize) -> Result<Self> {
        if modes == 0 {
            return Err(Error::Argument("basis needs at least one mode".into()));
        }
        if n_max == 0 {
            return Err(Error::Argument(
                "basis cutoff n_max must be positive".into(),
            ));
        }
        let side = n_max as usize + 1;
        let dimension = (0..modes)
            .try_fold(1usize, |acc, _| acc.checked_mul(side))
            .unwrap_or(usize::MAX);
        if dimension > cap {
            return Err(Error::Resource { dimension, cap });
        }
        Ok(FockBasis {
            modes,
            n_max,
            dimension,
        })
    }

    pub fn modes(&self) -> usize {
        self.modes
    }

    pub fn n_max(&self) -> u32 {
        self.n_max
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn label(&self, index: usize) -> Vec<u32> {
        let side = self.n_max as usize + 1;
        let mut label = vec![0u32; self.modes];
        let mut rest = index;
        for slot in label.iter_mut().rev() {
            *slot = (rest % side) as u32;
            rest /= side;
        }
        label
    }

    /// Flat index of a label, `None` if any occupation exceeds the cutoff.
    pub fn index(&self, label: &[u32]) -> Option<usize> {
        if label.len() != self.modes {
            return None;
        }
        let side = self.n_max as usize + 1;
        label.iter().try_fold(0usize, |acc, &n| {
            (n <= self.n_max).then(|| acc * side + n as usize)
        })
    }

    pub fn labels(&self) -> impl Iterator<Item = Vec<u32>> + '_ {
        (0..self.dimension).map(move |i| self.label(i))
    }

    fn check_mode(&self, mode: usize) -> Result<usize> {
        if mode == 0 || mode > self.modes {
            Err(Error::Argument(format!(
                "mode {mode} out of range 1..={}",
                self.modes
            )))
        } else {
            Ok(mode - 1)
        }
    }
}

/// Dense real operator on a [`FockBasis`].
#[derive(Debug, Clone, PartialEq)]
pub struct OperatorMatrix {
    basis: FockBasis,
    entries: DMatrix<f64>,
}

impl OperatorMatrix {
    pub fn zeros(basis: &FockBasis) -> Self {
        let d = basis.dimension();
        OperatorMatrix {
            basis: *basis,
            entries: DMatrix::zeros(d, d),
        }
    }

    pub fn identity(basis: &FockBasis) -> Self {
        let d = basis.dimension();
        OperatorMatrix {
            basis: *basis,
            entries: DMatrix::identity(d, d),
        }
    }

    pub fn from_entries(basis: &FockBasis, entries: DMatrix<f64>) -> Result<Self> {
        let d = basis.dimension();
        if entries.nrows() != d || entries.ncols() != d {
            return Err(Error::BasisMismatch);
        }
        Ok(OperatorMatrix {
            basis: *basis,
            entries,
        })
    }

    /// Diagonal operator whose entry at each basis label is `f(label)`.
    pub fn diagonal_from(basis: &FockBasis, mut f: impl FnMut(&[u32]) -> f64) -> Self {
        let mut op = Self::zeros(basis);
        for (i, label) in basis.labels().enumerate() {
            op.entries[(i, i)] = f(&label);
        }
        op
    }

    pub fn basis(&self) -> &FockBasis {
        &self.basis
    }

    pub fn entries(&self) -> &DMatrix<f64> {
        &self.entries
    }

    pub fn entries_mut(&mut self) -> &mut DMatrix<f64> {
        &mut self.entries
    }

    pub fn get(&self, row: &[u32], col: &[u32]) -> f64 {
        match (self.basis.index(row), self.basis.index(col)) {
            (Some(r), Some(c)) => self.entries[(r, c)],
            _ => 0.0,
        }
    }

    pub fn diagonal(&self) -> Vec<f64> {
        self.entries.diagonal().iter().copied().collect()
    }

    pub fn transpose(&self) -> Self {
        OperatorMatrix {
            basis: self.basis,
            entries: self.entries.transpose(),
        }
    }

    pub fn scaled(&self, factor: f64) -> Self {
        OperatorMatrix {
            basis: self.basis,
            entries: &self.entries * factor,
        }
    }

    pub fn try_mul(&self, other: &Self) -> Result<Self> {
        self.same_basis(other)?;
        Ok(OperatorMatrix {
            basis: self.basis,
            entries: &self.entries * &other.entries,
        })
    }

    pub fn try_add(&self, other: &Self) -> Result<Self> {
        self.same_basis(other)?;
        Ok(OperatorMatrix {
            basis: self.basis,
            entries: &self.entries + &other.entries,
        })
    }

    pub fn try_sub(&self, other: &Self) -> Result<Self> {
        self.same_basis(other)?;
        Ok(OperatorMatrix {
            basis: self.basis,
            entries: &self.entries - &other.entries,
        })
    }

    /// `P A P`.
    pub fn project(&self, projector: &Self) -> Result<Self> {
        projector.try_mul(self)?.try_mul(projector)
    }

    /// Largest absolute entry.
    pub fn max_abs(&self) -> f64 {
        self.entries.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn asymmetry(&self) -> f64 {
        let n = self.entries.nrows();
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in (i + 1)..n {
                worst = worst.max((self.entries[(i, j)] - self.entries[(j, i)]).abs());
            }
        }
        worst
    }

    fn same_basis(&self, other: &Self) -> Result<()> {
        if self.basis == other.basis {
            Ok(())
        } else {
            Err(Error::BasisMismatch)
        }
    }
}

impl Add for &OperatorMatrix {
    type Output = OperatorMatrix;
    fn add(self, rhs: Self) -> OperatorMatrix {
        self.try_add(rhs).expect("operator bases differ")
    }
}

impl Sub for &OperatorMatrix {
    type Output = OperatorMatrix;
    fn sub(self, rhs: Self) -> OperatorMatrix {
        self.try_sub(rhs).expect("operator bases differ")
    }
}

impl Mul for &OperatorMatrix {
    type Output = OperatorMatrix;
    fn mul(self, rhs: Self) -> OperatorMatrix {
        self.try_mul(rhs).expect("operator bases differ")
    }
}

pub fn build_basis(modes: usize, n_max: u32) -> Result<FockBasis> {
    FockBasis::new(modes, n_max)
}

/// `N_i`, diagonal with the occupation of mode `i` (1-based).
pub fn number_operator(basis: &FockBasis, mode: usize) -> Result<OperatorMatrix> {
    let m = basis.check_mode(mode)?;
    Ok(OperatorMatrix::diagonal_from(basis, |label| {
        label[m] as f64
    }))
}

/// `sum_i N_i`.
pub fn total_number_operator(basis: &FockBasis) -> OperatorMatrix {
    OperatorMatrix::diagonal_from(basis, |label| label.iter().map(|&n| n as f64).sum())
}

/// Lowering operator with `<.., n-1, ..| op |.., n, ..> = element(n)` on mode `m`.
fn lowering_with(
    basis: &FockBasis,
    m: usize,
    mut element: impl FnMut(u32) -> Result<f64>,
) -> Result<OperatorMatrix> {
    let mut op = OperatorMatrix::zeros(basis);
    for (col, label) in basis.labels().enumerate() {
        let n = label[m];
        if n == 0 {
            continue;
        }
        let mut target = label.clone();
        target[m] = n - 1;
        let row = basis
            .index(&target)
            .expect("lowered label stays in the basis");
        op.entries[(row, col)] = element(n)?;
    }
    Ok(op)
}

/// Q-oscillator lowering operator `b_i`: `b|n> = sqrt([n]_Q) |n-1>`.
///
/// The raising operator `b_i^dagger` is the transpose.
pub fn lowering_q(
    basis: &FockBasis,
    mode: usize,
    d: &DeformationParameter,
) -> Result<OperatorMatrix> {
    let q = d.as_q()?;
    lowering_q_with(basis, mode, &q)
}

pub(crate) fn lowering_q_with(
    basis: &FockBasis,
    mode: usize,
    q: &QDeformation,
) -> Result<OperatorMatrix> {
    let m = basis.check_mode(mode)?;
    lowering_with(basis, m, |n| {
        let b = q.bracket(n as f64);
        if b < 0.0 {
            Err(Error::Domain(format!("[{n}]_Q = {b} is negative")))
        } else {
            Ok(b.sqrt())
        }
    })
}

/// Symmetric q-oscillator lowering operator `a_i`: `a|n> = sqrt([n]_q) |n-1>`.
///
/// For a phase deformation every bracket under the square root must be
/// positive, which holds iff `|tau| (n_max + 1) < pi`.
pub fn lowering_symmetric(
    basis: &FockBasis,
    mode: usize,
    d: &DeformationParameter,
) -> Result<OperatorMatrix> {
    let sym = d.as_symmetric()?;
    check_phase_window(basis, &sym)?;
    let m = basis.check_mode(mode)?;
    lowering_with(basis, m, |n| Ok(sym.bracket(n as f64).sqrt()))
}

pub(crate) fn check_phase_window(basis: &FockBasis, sym: &SymmetricDeformation) -> Result<()> {
    if !sym.is_phase() {
        return Ok(());
    }
    for n in 1..=basis.n_max() + 1 {
        if sym.tau().abs() * n as f64 >= std::f64::consts::PI {
            return Err(Error::Domain(format!(
                "phase deformation tau = {} leaves [{n}]_q non-positive; need |tau| (n_max + 1) < pi",
                sym.tau()
            )));
        }
    }
    Ok(())
}

/// Diagonal 0/1 operator selecting states with every `n_i <= n_max - margin`.
pub fn margin_projector(basis: &FockBasis, margin: u32) -> Result<OperatorMatrix> {
    if margin > basis.n_max() {
        return Err(Error::Argument(format!(
            "margin {margin} exceeds cutoff {}",
            basis.n_max()
        )));
    }
    let limit = basis.n_max() - margin;
    Ok(OperatorMatrix::diagonal_from(basis, |label| {
        if label.iter().all(|&n| n <= limit) {
            1.0
        } else {
            0.0
        }
    }))
}

/// `AB - BA`.
pub fn commutator(a: &OperatorMatrix, b: &OperatorMatrix) -> Result<OperatorMatrix> {
    a.try_mul(b)?.try_sub(&b.try_mul(a)?)
}
