use crate::domain::Mesh;
use crate::Exec;

/// Compressed-sparse-row matrix with sorted column indices per row.
#[derive(Clone, Debug, PartialEq)]
pub struct CsrMatrix {
    pub n: usize,
    pub row_ptr: Vec<usize>,
    pub col_idx: Vec<usize>,
    pub vals: Vec<f64>,
}

impl CsrMatrix {
    pub fn identity(n: usize) -> Self {
        Self {
            n,
            row_ptr: (0..=n).collect(),
            col_idx: (0..n).collect(),
            vals: vec![1.0; n],
        }
    }

    /// Builds from a dense row-major matrix, dropping exact zeros.
    pub fn from_dense(rows: &[Vec<f64>]) -> Self {
        let n = rows.len();
        let mut row_ptr = vec![0];
        let mut col_idx = Vec::new();
        let mut vals = Vec::new();
        for r in rows {
            assert_eq!(r.len(), n, "dense matrix must be square");
            for (c, &v) in r.iter().enumerate() {
                if v != 0.0 {
                    col_idx.push(c);
                    vals.push(v);
                }
            }
            row_ptr.push(col_idx.len());
        }
        Self {
            n,
            row_ptr,
            col_idx,
            vals,
        }
    }

    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    pub fn row(&self, r: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let (s, e) = (self.row_ptr[r], self.row_ptr[r + 1]);
        self.col_idx[s..e].iter().copied().zip(self.vals[s..e].iter().copied())
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        let (s, e) = (self.row_ptr[r], self.row_ptr[r + 1]);
        match self.col_idx[s..e].binary_search(&c) {
            Ok(k) => self.vals[s + k],
            Err(_) => 0.0,
        }
    }

    /// `y = A x`; each row is summed in column order whatever the policy.
    pub fn matvec(&self, exec: Exec, x: &[f64], y: &mut [f64]) {
        assert_eq!(x.len(), self.n);
        assert_eq!(y.len(), self.n);
        exec.fill(y, |r, out| {
            let mut acc = 0.0;
            for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                acc += self.vals[k] * x[self.col_idx[k]];
            }
            *out = acc;
        });
    }

    pub fn mul(&self, exec: Exec, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.n];
        self.matvec(exec, x, &mut y);
        y
    }

    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let mut d = vec![vec![0.0; self.n]; self.n];
        for (r, row) in d.iter_mut().enumerate() {
            for (c, v) in self.row(r) {
                row[c] = v;
            }
        }
        d
    }

    pub fn is_finite(&self) -> bool {
        self.vals.iter().all(|v| v.is_finite())
    }

    pub fn scale_row(&mut self, r: usize, s: f64) {
        for v in &mut self.vals[self.row_ptr[r]..self.row_ptr[r + 1]] {
            *v *= s;
        }
    }
}

/// One linear system `A x = rhs`.
#[derive(Clone, Debug, PartialEq)]
pub struct SparseSystem {
    pub matrix: CsrMatrix,
    pub rhs: Vec<f64>,
}

impl SparseSystem {
    pub fn n(&self) -> usize {
        self.matrix.n
    }

    /// Multiplies the rows of each interleaved component by one constant so
    /// that the largest diagonal magnitude of that component becomes one.
    /// Returns the factors used.
    pub fn equilibrate_components(&mut self) -> [f64; 2] {
        let mut dmax = [0.0f64; 2];
        for r in 0..self.n() {
            dmax[r % 2] = dmax[r % 2].max(self.matrix.get(r, r).abs());
        }
        let s = dmax.map(|d| if d > 0.0 && d.is_finite() { 1.0 / d } else { 1.0 });
        for r in 0..self.n() {
            self.matrix.scale_row(r, s[r % 2]);
            self.rhs[r] *= s[r % 2];
        }
        s
    }
}

/// Block sparsity of a P1 mesh with two unknowns per node, plus the slot
/// map from element-local couplings to CSR positions.
#[derive(Clone, Debug)]
pub struct Pattern {
    pub(crate) row_ptr: Vec<usize>,
    pub(crate) col_idx: Vec<usize>,
    /// For triangle `t`, local test node `a`, local trial node `b`: the
    /// neighbour index of the trial node within the test node's list.
    pub(crate) slots: Vec<[[usize; 3]; 3]>,
}

impl Pattern {
    pub fn new(mesh: &Mesh) -> Self {
        let n = mesh.node_count();
        let mut nbrs: Vec<Vec<usize>> = (0..n).map(|p| vec![p]).collect();
        for t in &mesh.triangles {
            for &p in &t.nodes {
                for &q in &t.nodes {
                    nbrs[p].push(q);
                }
            }
        }
        for l in &mut nbrs {
            l.sort_unstable();
            l.dedup();
        }
        let mut row_ptr = Vec::with_capacity(2 * n + 1);
        let mut col_idx = Vec::new();
        row_ptr.push(0);
        for l in &nbrs {
            for _ in 0..2 {
                for &q in l {
                    col_idx.extend([2 * q, 2 * q + 1]);
                }
                row_ptr.push(col_idx.len());
            }
        }
        let slots = mesh
            .triangles
            .iter()
            .map(|t| {
                let mut s = [[0; 3]; 3];
                for a in 0..3 {
                    for b in 0..3 {
                        s[a][b] = nbrs[t.nodes[a]]
                            .binary_search(&t.nodes[b])
                            .expect("element couplings are in the pattern");
                    }
                }
                s
            })
            .collect();
        Self {
            row_ptr,
            col_idx,
            slots,
        }
    }

    /// CSR position of (row `2p + j`, column `2q + i`) where `k` is the
    /// neighbour index of `q` in `p`'s list.
    #[inline]
    pub(crate) fn position(&self, p: usize, j: usize, k: usize, i: usize) -> usize {
        self.row_ptr[2 * p + j] + 2 * k + i
    }

    pub(crate) fn neighbour_index(&self, p: usize, q: usize) -> usize {
        let (s, e) = (self.row_ptr[2 * p], self.row_ptr[2 * p + 1]);
        self.col_idx[s..e]
            .binary_search(&(2 * q))
            .expect("node pair is in the pattern")
            / 2
    }

    pub fn empty_matrix(&self) -> CsrMatrix {
        CsrMatrix {
            n: self.row_ptr.len() - 1,
            row_ptr: self.row_ptr.clone(),
            col_idx: self.col_idx.clone(),
            vals: vec![0.0; self.col_idx.len()],
        }
    }
}
