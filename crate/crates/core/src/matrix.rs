//! Dense matrices of polynomials, row-major.

use crate::modgb::VecPoly;
use crate::poly::Polynomial;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PolyMatrix {
    pub nrows: usize,
    pub ncols: usize,
    entries: Vec<Polynomial>,
}

impl PolyMatrix {
    pub fn new(nrows: usize, ncols: usize, entries: Vec<Polynomial>) -> Self {
        assert_eq!(entries.len(), nrows * ncols);
        PolyMatrix {
            nrows,
            ncols,
            entries,
        }
    }

    pub fn zero(nrows: usize, ncols: usize, nvars: usize) -> Self {
        PolyMatrix {
            nrows,
            ncols,
            entries: vec![Polynomial::zero(nvars); nrows * ncols],
        }
    }

    pub fn identity(n: usize, nvars: usize) -> Self {
        let mut m = PolyMatrix::zero(n, n, nvars);
        for i in 0..n {
            *m.at_mut(i, i) = Polynomial::one(nvars);
        }
        m
    }

    pub fn from_columns(nrows: usize, cols: &[VecPoly], nvars: usize) -> Self {
        let ncols = cols.len();
        let mut m = PolyMatrix::zero(nrows, ncols, nvars);
        for (j, c) in cols.iter().enumerate() {
            assert_eq!(c.len(), nrows);
            for (i, entry) in c.iter().enumerate() {
                *m.at_mut(i, j) = entry.clone();
            }
        }
        m
    }

    pub fn at(&self, i: usize, j: usize) -> &Polynomial {
        &self.entries[i * self.ncols + j]
    }

    pub fn at_mut(&mut self, i: usize, j: usize) -> &mut Polynomial {
        &mut self.entries[i * self.ncols + j]
    }

    pub fn column(&self, j: usize) -> VecPoly {
        (0..self.nrows).map(|i| self.at(i, j).clone()).collect()
    }

    pub fn columns(&self) -> Vec<VecPoly> {
        (0..self.ncols).map(|j| self.column(j)).collect()
    }

    pub fn transpose(&self) -> PolyMatrix {
        let nvars = self.nvars();
        let mut m = PolyMatrix::zero(self.ncols, self.nrows, nvars);
        for i in 0..self.nrows {
            for j in 0..self.ncols {
                *m.at_mut(j, i) = self.at(i, j).clone();
            }
        }
        m
    }

    fn nvars(&self) -> usize {
        self.entries.first().map(|p| p.nvars()).unwrap_or(0)
    }

    pub fn map<F: Fn(&Polynomial) -> Polynomial>(&self, f: F) -> PolyMatrix {
        PolyMatrix {
            nrows: self.nrows,
            ncols: self.ncols,
            entries: self.entries.iter().map(f).collect(),
        }
    }

    pub fn mul(&self, other: &PolyMatrix) -> PolyMatrix {
        assert_eq!(self.ncols, other.nrows);
        let nvars = if self.entries.is_empty() {
            other.nvars()
        } else {
            self.nvars()
        };
        let mut out = PolyMatrix::zero(self.nrows, other.ncols, nvars);
        for i in 0..self.nrows {
            for j in 0..other.ncols {
                let mut acc = Polynomial::zero(nvars);
                for k in 0..self.ncols {
                    acc = acc.add(&self.at(i, k).mul(other.at(k, j)));
                }
                *out.at_mut(i, j) = acc;
            }
        }
        out
    }

    pub fn apply(&self, v: &VecPoly) -> VecPoly {
        assert_eq!(self.ncols, v.len());
        let nvars = self.nvars().max(v.first().map(|p| p.nvars()).unwrap_or(0));
        (0..self.nrows)
            .map(|i| {
                let mut acc = Polynomial::zero(nvars);
                for (k, entry) in v.iter().enumerate() {
                    acc = acc.add(&self.at(i, k).mul(entry));
                }
                acc
            })
            .collect()
    }

    pub fn hstack(&self, other: &PolyMatrix) -> PolyMatrix {
        assert_eq!(self.nrows, other.nrows);
        let mut cols = self.columns();
        cols.extend(other.columns());
        PolyMatrix::from_columns(self.nrows, &cols, self.nvars().max(other.nvars()))
    }

    pub fn sub(&self, other: &PolyMatrix) -> PolyMatrix {
        assert_eq!(self.nrows, other.nrows);
        assert_eq!(self.ncols, other.ncols);
        PolyMatrix {
            nrows: self.nrows,
            ncols: self.ncols,
            entries: self
                .entries
                .iter()
                .zip(&other.entries)
                .map(|(a, b)| a.sub(b))
                .collect(),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().all(|p| p.is_zero())
    }
}
