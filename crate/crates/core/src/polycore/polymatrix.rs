use num_traits::Zero;

use super::monomial::{default_names, Monomial};
use super::rational::Rational;
use super::{PolyError, Polynomial};

/// Dense matrix of polynomials sharing one variable count, row-major.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct PolyMatrix {
    rows: usize,
    cols: usize,
    nvars: usize,
    entries: Vec<Polynomial>,
}

impl PolyMatrix {
    pub fn new(rows: usize, cols: usize, nvars: usize, entries: Vec<Polynomial>) -> Self {
        assert_eq!(entries.len(), rows * cols, "entry count");
        assert!(entries.iter().all(|p| p.nvars() == nvars), "entries must share nvars");
        Self {
            rows,
            cols,
            nvars,
            entries,
        }
    }

    pub fn from_rows(nvars: usize, rows: Vec<Vec<Polynomial>>) -> Result<Self, PolyError> {
        let r = rows.len();
        let c = rows.first().map_or(0, |row| row.len());
        if rows.iter().any(|row| row.len() != c) {
            return Err(PolyError::Shape("ragged rows".into()));
        }
        let entries: Vec<Polynomial> = rows.into_iter().flatten().collect();
        if let Some(p) = entries.iter().find(|p| p.nvars() != nvars) {
            return Err(PolyError::NvarsMismatch {
                left: nvars,
                right: p.nvars(),
            });
        }
        Ok(Self::new(r, c, nvars, entries))
    }

    pub fn from_fn(rows: usize, cols: usize, nvars: usize, f: impl Fn(usize, usize) -> Polynomial) -> Self {
        let mut entries = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                entries.push(f(i, j));
            }
        }
        Self::new(rows, cols, nvars, entries)
    }

    pub fn identity(n: usize, nvars: usize) -> Self {
        Self::from_fn(n, n, nvars, |i, j| {
            if i == j {
                Polynomial::one(nvars)
            } else {
                Polynomial::zero(nvars)
            }
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn get(&self, i: usize, j: usize) -> &Polynomial {
        &self.entries[i * self.cols + j]
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn is_symmetric(&self) -> bool {
        self.is_square() && (0..self.rows).all(|i| (0..i).all(|j| self.get(i, j) == self.get(j, i)))
    }

    pub fn transpose(&self) -> PolyMatrix {
        Self::from_fn(self.cols, self.rows, self.nvars, |i, j| self.get(j, i).clone())
    }

    pub fn mul(&self, other: &PolyMatrix) -> Result<PolyMatrix, PolyError> {
        if self.cols != other.rows {
            return Err(PolyError::Shape(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        if self.nvars != other.nvars {
            return Err(PolyError::NvarsMismatch {
                left: self.nvars,
                right: other.nvars,
            });
        }
        Ok(Self::from_fn(self.rows, other.cols, self.nvars, |i, j| {
            let mut acc = Polynomial::zero(self.nvars);
            for k in 0..self.cols {
                acc = &acc + &(self.get(i, k) * other.get(k, j));
            }
            acc
        }))
    }

    pub fn submatrix(&self, rows: &[usize], cols: &[usize]) -> PolyMatrix {
        Self::from_fn(rows.len(), cols.len(), self.nvars, |i, j| self.get(rows[i], cols[j]).clone())
    }

    /// `sum_ij y_i P_ij(x) y_j` in `yvar_offset + m` variables, where the
    /// `y` block occupies indices `yvar_offset..yvar_offset + m`.
    pub fn quadratic_form_in_y(&self, yvar_offset: usize) -> Result<Polynomial, PolyError> {
        if !self.is_square() {
            return Err(PolyError::Shape("quadratic form needs a square matrix".into()));
        }
        if yvar_offset < self.nvars {
            return Err(PolyError::Shape(format!(
                "y offset {yvar_offset} overlaps the {} x variables",
                self.nvars
            )));
        }
        let m = self.rows;
        let total = yvar_offset + m;
        let mut out = Polynomial::zero(total);
        for i in 0..m {
            for j in 0..m {
                let yy = Monomial::var(total, yvar_offset + i).mul(&Monomial::var(total, yvar_offset + j));
                for (mono, c) in self.get(i, j).terms() {
                    let mut e = mono.exps().to_vec();
                    e.resize(total, 0);
                    out.add_term(Monomial::new(e).mul(&yy), c.clone());
                }
            }
        }
        Ok(out)
    }

    /// Determinant by fraction-free (Bareiss) elimination with exact division.
    pub fn determinant(&self) -> Result<Polynomial, PolyError> {
        if !self.is_square() {
            return Err(PolyError::Shape("determinant needs a square matrix".into()));
        }
        let n = self.rows;
        if n == 0 {
            return Ok(Polynomial::one(self.nvars));
        }
        let mut a: Vec<Vec<Polynomial>> = (0..n).map(|i| (0..n).map(|j| self.get(i, j).clone()).collect()).collect();
        let mut negate = false;
        let mut prev = Polynomial::one(self.nvars);
        for k in 0..n - 1 {
            if a[k][k].is_zero() {
                match (k + 1..n).find(|&r| !a[r][k].is_zero()) {
                    Some(r) => {
                        a.swap(k, r);
                        negate = !negate;
                    }
                    None => return Ok(Polynomial::zero(self.nvars)),
                }
            }
            for i in k + 1..n {
                for j in k + 1..n {
                    let num = &(&a[k][k] * &a[i][j]) - &(&a[i][k] * &a[k][j]);
                    a[i][j] = num.div_exact(&prev).ok_or(PolyError::InexactDivision)?;
                }
                a[i][k] = Polynomial::zero(self.nvars);
            }
            prev = a[k][k].clone();
        }
        let det = a[n - 1][n - 1].clone();
        Ok(if negate { -&det } else { det })
    }

    pub fn map(&self, f: impl Fn(&Polynomial) -> Polynomial) -> PolyMatrix {
        Self::new(self.rows, self.cols, self.nvars, self.entries.iter().map(f).collect())
    }

    pub fn is_constant_zero(&self) -> bool {
        self.entries.iter().all(|p| p.is_zero())
    }

    pub fn scale(&self, c: &Rational) -> PolyMatrix {
        if c.is_zero() {
            return self.map(|p| Polynomial::zero(p.nvars()));
        }
        self.map(|p| p.scale(c))
    }

    pub fn format_with(&self, names: &[String]) -> String {
        let mut out = String::new();
        for i in 0..self.rows {
            let row: Vec<String> = (0..self.cols).map(|j| self.get(i, j).format_with(names)).collect();
            out.push_str(&format!("[{}]\n", row.join(", ")));
        }
        out
    }
}

impl std::fmt::Display for PolyMatrix {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.format_with(&default_names(self.nvars)))
    }
}
