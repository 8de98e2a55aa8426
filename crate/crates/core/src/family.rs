//! Materialized families of lattice atoms and their frame sums.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{FrameError, Result};
use crate::numerics::{norm_sq, Grid, GridSignal};
use crate::report::{BoundMethod, FrameReport, TAIL_FLAG_THRESHOLD};

/// Finite range `|m| ≤ m_max`, `|n| ≤ n_max` standing in for `m, n ∈ ℤ`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LatticeTruncation {
    pub m_max: u32,
    pub n_max: u32,
}

impl LatticeTruncation {
    pub fn new(m_max: u32, n_max: u32) -> Self {
        LatticeTruncation { m_max, n_max }
    }

    /// `m_max = n_max = 64`.
    pub fn acceptance() -> Self {
        LatticeTruncation { m_max: 64, n_max: 64 }
    }

    pub fn ms(&self) -> std::ops::RangeInclusive<i64> {
        -(self.m_max as i64)..=self.m_max as i64
    }

    pub fn ns(&self) -> std::ops::RangeInclusive<i64> {
        -(self.n_max as i64)..=self.n_max as i64
    }

    fn on_last_shell(&self, idx: AtomIndex) -> bool {
        idx.m.unsigned_abs() == self.m_max as u64 || idx.n.unsigned_abs() == self.n_max as u64
    }
}

/// Lattice label `(m, n, l)`; `l` is zero-based here.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct AtomIndex {
    pub m: i64,
    pub n: i64,
    pub l: usize,
}

/// Samples of an atom restricted to the index window where it can be nonzero.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct SparseAtom {
    pub start: usize,
    pub values: Vec<Complex64>,
}

impl SparseAtom {
    pub fn empty() -> Self {
        SparseAtom::default()
    }

    pub fn from_signal(s: &GridSignal) -> Self {
        let v = s.samples();
        let Some(first) = v.iter().position(|z| z.norm_sqr() > 0.0) else {
            return SparseAtom::empty();
        };
        let last = v.iter().rposition(|z| z.norm_sqr() > 0.0).unwrap_or(first);
        SparseAtom { start: first, values: v[first..=last].to_vec() }
    }

    pub fn to_signal(&self, grid: Grid) -> GridSignal {
        let mut s = GridSignal::zeros(grid);
        s.samples_mut()[self.start..self.start + self.values.len()].copy_from_slice(&self.values);
        s
    }

    /// `⟨atom|f⟩` with the rectangle rule.
    pub fn coefficient(&self, f: &GridSignal, dx: f64) -> Complex64 {
        let seg = &f.samples()[self.start..self.start + self.values.len()];
        let s: Complex64 = self.values.iter().zip(seg).map(|(a, b)| a.conj() * b).sum();
        s * dx
    }

    /// `⟨atom|f⟩ − ⟨other|f⟩` computed from the difference atom.
    fn difference_coefficient(&self, other: &SparseAtom, f: &GridSignal, dx: f64) -> Complex64 {
        if self.start == other.start && self.values.len() == other.values.len() {
            let seg = &f.samples()[self.start..self.start + self.values.len()];
            let s: Complex64 = self
                .values
                .iter()
                .zip(&other.values)
                .zip(seg)
                .map(|((a, b), v)| (a - b).conj() * v)
                .sum();
            s * dx
        } else {
            self.coefficient(f, dx) - other.coefficient(f, dx)
        }
    }
}

/// A frame sum together with the contribution of the outermost shell.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrameSum {
    pub total: f64,
    pub last_shell: f64,
}

impl FrameSum {
    pub fn relative_tail(&self) -> f64 {
        if self.total > 0.0 {
            self.last_shell / self.total
        } else {
            0.0
        }
    }
}

/// Atoms of a truncated lattice family, stored in a fixed index order so that
/// every reduction over the family is deterministic.
#[derive(Debug, Clone, PartialEq)]
pub struct AtomFamily {
    grid: Grid,
    trunc: LatticeTruncation,
    indices: Vec<AtomIndex>,
    atoms: Vec<SparseAtom>,
}

impl AtomFamily {
    /// Builds a family by evaluating `make` at every `(m, n, l)` in the
    /// truncation, `l < generators`, in parallel.
    pub fn build<F>(grid: Grid, trunc: LatticeTruncation, generators: usize, make: F) -> Result<Self>
    where
        F: Fn(AtomIndex) -> Result<SparseAtom> + Sync,
    {
        let mut indices = Vec::new();
        for l in 0..generators {
            for n in trunc.ns() {
                for m in trunc.ms() {
                    indices.push(AtomIndex { m, n, l });
                }
            }
        }
        let atoms = indices.par_iter().map(|&i| make(i)).collect::<Result<Vec<_>>>()?;
        Ok(AtomFamily { grid, trunc, indices, atoms })
    }

    pub fn from_parts(
        grid: Grid,
        trunc: LatticeTruncation,
        indices: Vec<AtomIndex>,
        atoms: Vec<SparseAtom>,
    ) -> Result<Self> {
        if indices.len() != atoms.len() {
            return Err(FrameError::IndexMismatch(format!(
                "{} indices for {} atoms",
                indices.len(),
                atoms.len()
            )));
        }
        Ok(AtomFamily { grid, trunc, indices, atoms })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn truncation(&self) -> LatticeTruncation {
        self.trunc
    }

    pub fn indices(&self) -> &[AtomIndex] {
        &self.indices
    }

    pub fn atoms(&self) -> &[SparseAtom] {
        &self.atoms
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn atom(&self, idx: AtomIndex) -> Option<&SparseAtom> {
        self.indices.iter().position(|&i| i == idx).map(|k| &self.atoms[k])
    }

    /// Every atom multiplied by the same complex factor.
    pub fn scaled(&self, factor: Complex64) -> AtomFamily {
        let atoms = self
            .atoms
            .iter()
            .map(|a| SparseAtom { start: a.start, values: a.values.iter().map(|v| v * factor).collect() })
            .collect();
        AtomFamily { atoms, ..self.clone() }
    }

    /// The family with `extra` added to the atom at `idx`.
    pub fn with_atom_added(&self, idx: AtomIndex, extra: &GridSignal) -> Result<AtomFamily> {
        if !extra.grid().same_as(&self.grid) {
            return Err(FrameError::GridMismatch);
        }
        let k = self
            .indices
            .iter()
            .position(|&i| i == idx)
            .ok_or_else(|| FrameError::IndexMismatch(format!("{idx:?} not in family")))?;
        let mut full = self.atoms[k].to_signal(self.grid);
        for (a, b) in full.samples_mut().iter_mut().zip(extra.samples()) {
            *a += b;
        }
        let mut out = self.clone();
        out.atoms[k] = SparseAtom::from_signal(&full);
        Ok(out)
    }

    fn check_signal(&self, f: &GridSignal) -> Result<()> {
        if f.grid().same_as(&self.grid) {
            Ok(())
        } else {
            Err(FrameError::GridMismatch)
        }
    }

    /// `|⟨atom_k|f⟩|²` for every atom, in index order.
    pub fn coefficient_energies(&self, f: &GridSignal) -> Result<Vec<f64>> {
        self.check_signal(f)?;
        let dx = self.grid.dx();
        Ok(self.atoms.par_iter().map(|a| a.coefficient(f, dx).norm_sqr()).collect())
    }

    /// `Σ_k |⟨atom_k|f⟩|²`, with the last-shell share as a tail diagnostic.
    pub fn frame_sum(&self, f: &GridSignal) -> Result<FrameSum> {
        let energies = self.coefficient_energies(f)?;
        Ok(self.reduce(&energies))
    }

    fn reduce(&self, energies: &[f64]) -> FrameSum {
        let mut total = 0.0;
        let mut last_shell = 0.0;
        for (e, &idx) in energies.iter().zip(&self.indices) {
            total += e;
            if self.trunc.on_last_shell(idx) {
                last_shell += e;
            }
        }
        FrameSum { total, last_shell }
    }

    /// `Σ_k |⟨atom_k − other_k|f⟩|²` for two aligned families.
    pub fn difference_sum(&self, other: &AtomFamily, f: &GridSignal) -> Result<f64> {
        self.check_aligned(other)?;
        self.check_signal(f)?;
        let dx = self.grid.dx();
        let energies: Vec<f64> = self
            .atoms
            .par_iter()
            .zip(&other.atoms)
            .map(|(a, b)| a.difference_coefficient(b, f, dx).norm_sqr())
            .collect();
        Ok(energies.iter().sum())
    }

    pub fn check_aligned(&self, other: &AtomFamily) -> Result<()> {
        if !self.grid.same_as(&other.grid) {
            return Err(FrameError::GridMismatch);
        }
        if self.indices != other.indices {
            return Err(FrameError::IndexMismatch(format!(
                "index sets differ ({} vs {} atoms)",
                self.indices.len(),
                other.indices.len()
            )));
        }
        Ok(())
    }

    /// Empirical Rayleigh-quotient bracket `min/max frame_sum(f)/‖f‖²` over
    /// a signal battery. Witnesses are the battery indices of the extremes.
    pub fn oracle_bounds(&self, signals: &[GridSignal]) -> Result<FrameReport> {
        if signals.is_empty() {
            return Err(FrameError::InvalidParameter("empty signal battery".into()));
        }
        let mut lower = f64::INFINITY;
        let mut upper = f64::NEG_INFINITY;
        let mut wit = (0.0, 0.0);
        let mut defect: f64 = 0.0;
        for (k, f) in signals.iter().enumerate() {
            let nsq = norm_sq(f);
            if nsq == 0.0 {
                return Err(FrameError::ZeroSignal(k));
            }
            let s = self.frame_sum(f)?;
            let q = s.total / nsq;
            if q < lower {
                lower = q;
                wit.0 = k as f64;
            }
            if q > upper {
                upper = q;
                wit.1 = k as f64;
            }
            defect = defect.max(s.relative_tail());
        }
        Ok(FrameReport {
            lower,
            upper,
            method: BoundMethod::Oracle,
            witnesses: Some(wit),
            truncation_defect: defect,
            lower_certified: false,
            tail_flagged: defect > TAIL_FLAG_THRESHOLD,
        })
    }
}
