//! Weighted adjacency matrices: validation, structural analysis, generators
//! and the plain-text matrix format.
//!
//! The text format is a first line holding `n`, followed by `n` lines of `n`
//! whitespace-separated decimal reals. Values are written in Rust's shortest
//! round-trip representation (never more than 17 significant digits), so a
//! write followed by a read reproduces the matrix bit for bit.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::matrix::Matrix;

/// Maximum allowed deviation of a row sum from 1.
pub const ROW_SUM_TOL: f64 = 1e-12;

/// Entrywise tolerance for the symmetry check.
pub const SYMMETRY_TOL: f64 = 1e-12;

/// A validated non-negative row-stochastic `n x n` matrix; `a[i][j]` is the
/// weight agent `i` assigns to agent `j`.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedAdjacency {
    weights: Matrix,
}

impl WeightedAdjacency {
    pub fn n(&self) -> usize {
        self.weights.rows()
    }

    pub fn weights(&self) -> &Matrix {
        &self.weights
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.weights[(i, j)]
    }

    pub fn is_symmetric(&self) -> bool {
        self.asymmetry().is_none()
    }

    /// First entry pair violating symmetry, if any.
    pub(crate) fn asymmetry(&self) -> Option<(usize, usize)> {
        let n = self.n();
        for i in 0..n {
            for j in (i + 1)..n {
                if (self.get(i, j) - self.get(j, i)).abs() > SYMMETRY_TOL {
                    return Some((i, j));
                }
            }
        }
        None
    }
}

/// Structural properties of the sparsity pattern of a weight matrix.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StructureReport {
    pub symmetric: bool,
    pub irreducible: bool,
    pub primitive: bool,
    /// Smallest `k` with `A^k > 0`, present iff `primitive`.
    pub witness_k: Option<usize>,
}

/// Checks non-negativity and row-stochasticity and wraps the matrix.
pub fn validate(rows: &[Vec<f64>]) -> Result<WeightedAdjacency> {
    let n = rows.len();
    for (i, row) in rows.iter().enumerate() {
        if row.len() != n {
            return Err(Error::NotSquare { row: i, len: row.len(), expected: n });
        }
    }
    if n < 2 {
        return Err(Error::TooSmall(n));
    }
    for (i, row) in rows.iter().enumerate() {
        for (j, &w) in row.iter().enumerate() {
            if !w.is_finite() {
                return Err(Error::NonFiniteWeight(i, j));
            }
            if w < 0.0 {
                return Err(Error::NegativeWeight(i, j));
            }
        }
        let sum: f64 = row.iter().sum();
        if (sum - 1.0).abs() > ROW_SUM_TOL {
            return Err(Error::RowSumViolation(i, sum));
        }
    }
    Ok(WeightedAdjacency { weights: Matrix::from_rows(rows) })
}

/// Validates an already-assembled [`Matrix`].
pub fn validate_matrix(m: &Matrix) -> Result<WeightedAdjacency> {
    if m.rows() != m.cols() {
        return Err(Error::NotSquare { row: 0, len: m.cols(), expected: m.rows() });
    }
    validate(&m.to_rows())
}

/// Boolean matrix stored as one bitset per row.
#[derive(Clone, PartialEq, Eq)]
struct Pattern {
    n: usize,
    words: usize,
    bits: Vec<u64>,
}

impl Pattern {
    fn of(a: &WeightedAdjacency) -> Self {
        let n = a.n();
        let mut p = Pattern::empty(n);
        for i in 0..n {
            for j in 0..n {
                if a.get(i, j) > 0.0 {
                    p.set(i, j);
                }
            }
        }
        p
    }

    fn empty(n: usize) -> Self {
        let words = n.div_ceil(64);
        Pattern { n, words, bits: vec![0; n * words] }
    }

    fn identity(n: usize) -> Self {
        let mut p = Pattern::empty(n);
        for i in 0..n {
            p.set(i, i);
        }
        p
    }

    fn set(&mut self, i: usize, j: usize) {
        self.bits[i * self.words + j / 64] |= 1 << (j % 64);
    }

    fn get(&self, i: usize, j: usize) -> bool {
        self.bits[i * self.words + j / 64] >> (j % 64) & 1 == 1
    }

    fn row(&self, i: usize) -> &[u64] {
        &self.bits[i * self.words..(i + 1) * self.words]
    }

    /// Boolean product `self * other`.
    fn mul(&self, other: &Pattern) -> Pattern {
        let mut out = Pattern::empty(self.n);
        for i in 0..self.n {
            for k in 0..self.n {
                if self.get(i, k) {
                    let src = other.row(k);
                    let dst = &mut out.bits[i * self.words..(i + 1) * self.words];
                    for (d, s) in dst.iter_mut().zip(src) {
                        *d |= s;
                    }
                }
            }
        }
        out
    }

    fn union_with(&mut self, other: &Pattern) {
        for (d, s) in self.bits.iter_mut().zip(&other.bits) {
            *d |= s;
        }
    }

    fn is_full(&self) -> bool {
        (0..self.n).all(|i| (0..self.n).all(|j| self.get(i, j)))
    }
}

/// Symmetry, irreducibility and primitivity of `a`.
///
/// Irreducibility is the power-sum test `sum_{k=0}^{n-1} A^k > 0` and
/// primitivity the search for a positive power `A^k` with
/// `k <= (n-1)^2 + 1`, both carried out on the boolean pattern. Irreducible
/// patterns with a cycle-length gcd above one are periodic and skip the
/// power search.
pub fn analyze_structure(a: &WeightedAdjacency) -> StructureReport {
    let n = a.n();
    let symmetric = a.is_symmetric();
    let pattern = Pattern::of(a);

    let mut sum = Pattern::identity(n);
    let mut power = Pattern::identity(n);
    for _ in 1..n {
        power = power.mul(&pattern);
        sum.union_with(&power);
    }
    let irreducible = sum.is_full();

    let witness_k = if irreducible && period(&pattern) == 1 {
        let bound = (n - 1) * (n - 1) + 1;
        let mut power = pattern.clone();
        let mut found = None;
        for k in 1..=bound {
            if power.is_full() {
                found = Some(k);
                break;
            }
            power = power.mul(&pattern);
        }
        found
    } else {
        None
    };

    StructureReport { symmetric, irreducible, primitive: witness_k.is_some(), witness_k }
}

/// Period of a strongly connected pattern: gcd over edges `u -> v` of
/// `level(u) + 1 - level(v)`, with BFS levels from node 0.
fn period(p: &Pattern) -> usize {
    let n = p.n;
    let mut level = vec![usize::MAX; n];
    level[0] = 0;
    let mut queue = std::collections::VecDeque::from([0]);
    while let Some(u) = queue.pop_front() {
        for v in 0..n {
            if p.get(u, v) && level[v] == usize::MAX {
                level[v] = level[u] + 1;
                queue.push_back(v);
            }
        }
    }
    let mut g = 0usize;
    for u in 0..n {
        for v in 0..n {
            if p.get(u, v) {
                let d = (level[u] + 1).abs_diff(level[v]);
                g = gcd(g, d);
            }
        }
    }
    g
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// Circulant ring: self-weight `self_loop`, `(1 - self_loop) / 2` to each
/// of the two ring neighbours.
pub fn make_ring(n: usize, self_loop: f64) -> Result<WeightedAdjacency> {
    if n < 3 {
        return Err(Error::BadParameter(format!("ring needs n >= 3, got {n}")));
    }
    if !(0.0..1.0).contains(&self_loop) {
        return Err(Error::BadParameter(format!("self-loop weight {self_loop} not in [0, 1)")));
    }
    let side = (1.0 - self_loop) / 2.0;
    let m = Matrix::from_fn(n, n, |i, j| {
        if i == j {
            self_loop
        } else if (i + 1) % n == j || (j + 1) % n == i {
            side
        } else {
            0.0
        }
    });
    validate_matrix(&m)
}

/// Complete graph with uniform weights `1/n`, self-loops included.
pub fn make_complete(n: usize) -> Result<WeightedAdjacency> {
    if n < 2 {
        return Err(Error::TooSmall(n));
    }
    let w = 1.0 / n as f64;
    validate_matrix(&Matrix::from_fn(n, n, |_, _| w))
}

pub fn parse_matrix(text: &str) -> Result<WeightedAdjacency> {
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l));
    let (first_no, first) = lines
        .by_ref()
        .find(|(_, l)| !l.trim().is_empty())
        .ok_or_else(|| Error::Parse { line: 1, reason: "empty input".into() })?;
    let n: usize = first.trim().parse().map_err(|_| Error::Parse {
        line: first_no,
        reason: format!("expected matrix size, found {:?}", first.trim()),
    })?;

    let mut rows = Vec::with_capacity(n);
    let mut last_line = first_no;
    for r in 0..n {
        let Some((line_no, line)) = lines.next() else {
            return Err(Error::Parse {
                line: last_line + 1,
                reason: format!("row {}: missing (expected {n} rows)", r + 1),
            });
        };
        last_line = line_no;
        let row = line
            .split_whitespace()
            .map(|tok| {
                tok.parse::<f64>().map_err(|_| Error::Parse {
                    line: line_no,
                    reason: format!("row {}: invalid number {tok:?}", r + 1),
                })
            })
            .collect::<Result<Vec<f64>>>()?;
        if row.len() != n {
            return Err(Error::Parse {
                line: line_no,
                reason: format!(
                    "row {}: wrong count, expected {n} values, found {}",
                    r + 1,
                    row.len()
                ),
            });
        }
        rows.push(row);
    }
    if let Some((line_no, _)) = lines.find(|(_, l)| !l.trim().is_empty()) {
        return Err(Error::Parse { line: line_no, reason: "trailing data after last row".into() });
    }
    validate(&rows)
}

pub fn format_matrix(a: &WeightedAdjacency) -> String {
    let n = a.n();
    let mut out = format!("{n}\n");
    for i in 0..n {
        for j in 0..n {
            if j > 0 {
                out.push(' ');
            }
            write!(out, "{}", a.get(i, j)).unwrap();
        }
        out.push('\n');
    }
    out
}

pub fn read_matrix(path: impl AsRef<Path>) -> Result<WeightedAdjacency> {
    parse_matrix(&fs::read_to_string(path)?)
}

pub fn write_matrix(a: &WeightedAdjacency, path: impl AsRef<Path>) -> Result<()> {
    fs::write(path, format_matrix(a))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn identity(n: usize) -> Vec<Vec<f64>> {
        (0..n).map(|i| (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect()).collect()
    }

    /// Brute-force primitivity: sequential boolean powers up to the
    /// Wielandt bound on a plain `Vec<Vec<bool>>`.
    fn brute_primitive(a: &WeightedAdjacency) -> Option<usize> {
        let n = a.n();
        let p: Vec<Vec<bool>> =
            (0..n).map(|i| (0..n).map(|j| a.get(i, j) > 0.0).collect()).collect();
        let mut cur = p.clone();
        for k in 1..=(n - 1) * (n - 1) + 1 {
            if cur.iter().all(|r| r.iter().all(|&b| b)) {
                return Some(k);
            }
            cur = (0..n)
                .map(|i| (0..n).map(|j| (0..n).any(|m| cur[i][m] && p[m][j])).collect())
                .collect();
        }
        None
    }

    #[test]
    fn validate_accepts_identity_and_ring() {
        assert!(validate(&identity(2)).is_ok());
        let ring = vec![
            vec![0.0, 0.5, 0.0, 0.5],
            vec![0.5, 0.0, 0.5, 0.0],
            vec![0.0, 0.5, 0.0, 0.5],
            vec![0.5, 0.0, 0.5, 0.0],
        ];
        assert!(validate(&ring).is_ok());
    }

    #[test]
    fn validate_rejects_bad_rows() {
        let err = validate(&[vec![0.5, 0.6], vec![0.5, 0.5]]).unwrap_err();
        match err {
            Error::RowSumViolation(0, s) => assert!((s - 1.1).abs() < 1e-15),
            other => panic!("unexpected {other:?}"),
        }
        assert_eq!(
            validate(&[vec![1.5, -0.5], vec![0.5, 0.5]]).unwrap_err(),
            Error::NegativeWeight(0, 1)
        );
        assert!(matches!(
            validate(&[vec![1.0, 0.0], vec![1.0]]),
            Err(Error::NotSquare { row: 1, .. })
        ));
        assert_eq!(validate(&[vec![1.0]]).unwrap_err(), Error::TooSmall(1));
    }

    #[test]
    fn ring_structure() {
        let r = analyze_structure(&make_ring(4, 0.0).unwrap());
        assert!(r.symmetric && r.irreducible && !r.primitive);
        assert_eq!(r.witness_k, None);

        let r = analyze_structure(&make_ring(4, 0.1).unwrap());
        assert!(r.primitive && r.irreducible);
        // A^1 has zeros at distance 2, A^2 reaches every node.
        assert_eq!(r.witness_k, Some(2));
    }

    #[test]
    fn ring_power_patterns_alternate_parity() {
        // A^k for the pure 4-ring only connects nodes whose distance has the
        // parity of k.
        let a = make_ring(4, 0.0).unwrap();
        let p = Pattern::of(&a);
        let mut cur = p.clone();
        for k in 1..=10 {
            for i in 0..4 {
                for j in 0..4 {
                    let dist = (i as i64 - j as i64).rem_euclid(2) as usize;
                    assert_eq!(cur.get(i, j), dist == k % 2, "k={k} ({i},{j})");
                }
            }
            cur = cur.mul(&p);
        }
    }

    #[test]
    fn identity_is_reducible() {
        let r = analyze_structure(&validate(&identity(2)).unwrap());
        assert!(!r.irreducible && !r.primitive);
    }

    #[test]
    fn make_ring_rows() {
        let a = make_ring(4, 0.0).unwrap();
        assert_eq!(a.weights().row(0), &[0.0, 0.5, 0.0, 0.5]);
        assert_eq!(a.weights().row(1), &[0.5, 0.0, 0.5, 0.0]);
        let a = make_ring(4, 0.1).unwrap();
        assert_eq!(a.weights().row(0), &[0.1, 0.45, 0.0, 0.45]);
        assert_eq!(a.weights().row(3), &[0.45, 0.0, 0.45, 0.1]);
        let a = make_ring(3, 0.0).unwrap();
        assert_eq!(a.weights().row(0), &[0.0, 0.5, 0.5]);
        assert!(matches!(make_ring(4, 1.0), Err(Error::BadParameter(_))));
        assert!(matches!(make_ring(4, -0.1), Err(Error::BadParameter(_))));
        assert!(matches!(make_ring(2, 0.0), Err(Error::BadParameter(_))));
    }

    #[test]
    fn pure_ring_primitive_iff_odd() {
        for n in 3..=8 {
            let r = analyze_structure(&make_ring(n, 0.0).unwrap());
            assert!(r.symmetric && r.irreducible);
            assert_eq!(r.primitive, n % 2 == 1, "n={n}");
        }
    }

    #[test]
    fn witness_matches_brute_force() {
        for n in 3..=7 {
            for s in [0.0, 0.2] {
                let a = make_ring(n, s).unwrap();
                let r = analyze_structure(&a);
                assert_eq!(r.witness_k, brute_primitive(&a), "n={n} s={s}");
                if let Some(k) = r.witness_k {
                    assert!(k >= 1 && k <= (n - 1) * (n - 1) + 1);
                }
            }
        }
        // Directed cycle with one chord: primitive with a large exponent.
        let mut rows = vec![vec![0.0; 4]; 4];
        for (i, row) in rows.iter_mut().enumerate() {
            row[(i + 1) % 4] = 1.0;
        }
        rows[3] = vec![0.5, 0.5, 0.0, 0.0];
        let a = validate(&rows).unwrap();
        let r = analyze_structure(&a);
        assert!(!r.symmetric);
        assert_eq!(r.witness_k, brute_primitive(&a));
        assert!(r.witness_k.is_some());
    }

    #[test]
    fn parse_examples() {
        let a = parse_matrix("2\n0.5 0.5\n0.5 0.5\n").unwrap();
        assert_eq!(a.weights().to_rows(), vec![vec![0.5, 0.5], vec![0.5, 0.5]]);

        match parse_matrix("2\n0.5\n").unwrap_err() {
            Error::Parse { line, reason } => {
                assert_eq!(line, 2);
                assert!(reason.contains("row 1") && reason.contains("wrong count"), "{reason}");
            }
            other => panic!("unexpected {other:?}"),
        }
        assert!(matches!(parse_matrix("2\n0.5 0.5\n"), Err(Error::Parse { line: 3, .. })));
        assert!(matches!(parse_matrix("x\n"), Err(Error::Parse { line: 1, .. })));
        assert!(matches!(parse_matrix("2\n0.5 zz\n0.5 0.5\n"), Err(Error::Parse { line: 2, .. })));
        assert!(matches!(
            parse_matrix("2\n0.5 0.5\n0.5 0.5\n1\n"),
            Err(Error::Parse { line: 4, .. })
        ));
        assert!(matches!(parse_matrix("2\n0.5 0.6\n0.5 0.5\n"), Err(Error::RowSumViolation(0, _))));
    }

    #[test]
    fn file_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("ring.txt");
        let a = make_ring(4, 0.1).unwrap();
        write_matrix(&a, &path).unwrap();
        assert_eq!(read_matrix(&path).unwrap(), a);
    }
}
