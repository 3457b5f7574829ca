//! Dense square matrices of attention weights, row-major.
//!
//! Entry `(i, j)` is the weight token `i` puts on token `j`; rows of a softmax output sum to 1.

/// Borrowed `n × n` row-major weight matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeightsView<'a> {
    n: usize,
    data: &'a [f64],
}

impl<'a> WeightsView<'a> {
    /// Panics if `data.len() != n * n`.
    pub fn new(n: usize, data: &'a [f64]) -> Self {
        assert_eq!(data.len(), n * n, "weights must be n×n");
        WeightsView { n, data }
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.data[row * self.n + col]
    }

    pub fn row(&self, row: usize) -> &'a [f64] {
        &self.data[row * self.n..(row + 1) * self.n]
    }

    pub fn as_slice(&self) -> &'a [f64] {
        self.data
    }

    pub fn to_owned(&self) -> SquareMatrix {
        SquareMatrix {
            n: self.n,
            data: self.data.to_vec(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SquareMatrix {
    n: usize,
    data: Vec<f64>,
}

impl SquareMatrix {
    pub fn zeros(n: usize) -> Self {
        SquareMatrix {
            n,
            data: vec![0.0; n * n],
        }
    }

    /// Panics if `data.len() != n * n`.
    pub fn from_vec(n: usize, data: Vec<f64>) -> Self {
        assert_eq!(data.len(), n * n, "weights must be n×n");
        SquareMatrix { n, data }
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Self {
        let n = rows.len();
        let mut data = Vec::with_capacity(n * n);
        for r in rows {
            assert_eq!(r.len(), n, "rows must have length n");
            data.extend_from_slice(r);
        }
        SquareMatrix { n, data }
    }

    /// 0/1 incidence matrix of a set of `(row, col)` cells.
    pub fn incidence(n: usize, cells: &[(usize, usize)]) -> Self {
        let mut m = Self::zeros(n);
        for &(r, c) in cells {
            m.set(r, c, 1.0);
        }
        m
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.data[row * self.n + col]
    }

    pub fn set(&mut self, row: usize, col: usize, value: f64) {
        self.data[row * self.n + col] = value;
    }

    pub fn view(&self) -> WeightsView<'_> {
        WeightsView {
            n: self.n,
            data: &self.data,
        }
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.data
    }
}
