//! Reference Betti numbers of a filtration at a fixed scale.
//!
//! Rebuilds the complex from scratch, writes each boundary map as a dense
//! Z₂ matrix and takes ranks by Gaussian elimination. No state is shared
//! with [`crate::persistence`]; the two are only ever compared.

use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;

use thiserror::Error;

use crate::filtration::Filtration;

pub const DEFAULT_SIMPLEX_LIMIT: usize = 20_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum OracleError {
    #[error("complex has {count} simplices, above the oracle limit of {limit}")]
    ComplexTooLarge { count: usize, limit: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct BettiTriple {
    pub b0: usize,
    pub b1: usize,
    pub b2: usize,
}

impl BettiTriple {
    pub fn as_array(&self) -> [usize; 3] {
        [self.b0, self.b1, self.b2]
    }
}

struct BitMatrix {
    words: usize,
    cols: Vec<Vec<u64>>,
}

impl BitMatrix {
    fn new(rows: usize) -> BitMatrix {
        BitMatrix { words: rows.div_ceil(64), cols: Vec::new() }
    }

    fn push_column(&mut self, rows: &[usize]) {
        let mut col = vec![0u64; self.words];
        for &r in rows {
            col[r / 64] ^= 1 << (r % 64);
        }
        self.cols.push(col);
    }

    fn rank(mut self) -> usize {
        let mut rank = 0;
        let mut row_pivot: Vec<Option<usize>> = vec![None; self.words * 64];
        for c in 0..self.cols.len() {
            loop {
                let low = highest_bit(&self.cols[c]);
                let Some(low) = low else { break };
                match row_pivot[low] {
                    Some(p) => {
                        let (a, b) = if p < c {
                            let (left, right) = self.cols.split_at_mut(c);
                            (&mut right[0], &left[p])
                        } else {
                            unreachable!("pivots always come from earlier columns")
                        };
                        for (x, y) in a.iter_mut().zip(b.iter()) {
                            *x ^= *y;
                        }
                    }
                    None => {
                        row_pivot[low] = Some(c);
                        rank += 1;
                        break;
                    }
                }
            }
        }
        rank
    }
}

fn highest_bit(col: &[u64]) -> Option<usize> {
    col.iter()
        .enumerate()
        .rev()
        .find(|(_, w)| **w != 0)
        .map(|(i, w)| i * 64 + 63 - w.leading_zeros() as usize)
}

/// Betti numbers of the subcomplex of simplices with value `<= eps`.
pub fn betti_at(f: &Filtration, eps: f64) -> Result<BettiTriple, OracleError> {
    betti_at_with_limit(f, eps, DEFAULT_SIMPLEX_LIMIT)
}

pub fn betti_at_with_limit(
    f: &Filtration,
    eps: f64,
    limit: usize,
) -> Result<BettiTriple, OracleError> {
    // simplices per dimension, keyed by vertex list
    let mut cells: [BTreeMap<Vec<u32>, usize>; 4] = Default::default();
    let mut count = 0;
    for s in f.simplices() {
        if s.value <= eps {
            count += 1;
            let by_dim = &mut cells[s.dim()];
            let next = by_dim.len();
            by_dim.insert(s.vertices().to_vec(), next);
        }
    }
    if count > limit {
        return Err(OracleError::ComplexTooLarge { count, limit });
    }

    // rank of the boundary map from dimension q to q - 1
    let boundary_rank = |q: usize| -> usize {
        if q == 0 || q > 3 || cells[q].is_empty() {
            return 0;
        }
        let mut m = BitMatrix::new(cells[q - 1].len());
        for verts in cells[q].keys() {
            let rows: Vec<usize> = (0..verts.len())
                .map(|skip| {
                    let face: Vec<u32> = verts
                        .iter()
                        .enumerate()
                        .filter(|&(i, _)| i != skip)
                        .map(|(_, &v)| v)
                        .collect();
                    *cells[q - 1].get(&face).expect("complex is closed under faces")
                })
                .collect();
            m.push_column(&rows);
        }
        m.rank()
    };

    let ranks: Vec<usize> = (0..=4).map(boundary_rank).collect();
    let betti = |q: usize| cells[q].len() - ranks[q] - ranks[q + 1];
    Ok(BettiTriple { b0: betti(0), b1: betti(1), b2: betti(2) })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::filtration::Partition;

    fn explicit(n: usize, simplices: &[(&[u32], f64)]) -> Filtration {
        Filtration::from_simplices(
            n,
            Partition::singletons(n),
            simplices.iter().map(|(v, t)| (v.to_vec(), *t)).collect(),
        )
        .unwrap()
    }

    #[test]
    fn hollow_square() {
        let f = explicit(
            4,
            &[
                (&[0], 0.0),
                (&[1], 0.0),
                (&[2], 0.0),
                (&[3], 0.0),
                (&[0, 1], 1.0),
                (&[1, 2], 1.0),
                (&[2, 3], 1.0),
                (&[0, 3], 1.0),
            ],
        );
        assert_eq!(betti_at(&f, 1.0).unwrap(), BettiTriple { b0: 1, b1: 1, b2: 0 });
        assert_eq!(betti_at(&f, 0.5).unwrap(), BettiTriple { b0: 4, b1: 0, b2: 0 });
    }

    #[test]
    fn filled_triangle() {
        let f = explicit(
            3,
            &[
                (&[0], 0.0),
                (&[1], 0.0),
                (&[2], 0.0),
                (&[0, 1], 1.0),
                (&[1, 2], 1.0),
                (&[0, 2], 1.0),
                (&[0, 1, 2], 1.0),
            ],
        );
        assert_eq!(betti_at(&f, 1.0).unwrap(), BettiTriple { b0: 1, b1: 0, b2: 0 });
    }

    #[test]
    fn hollow_tetrahedron_has_a_void() {
        let mut s: Vec<(Vec<u32>, f64)> = Vec::new();
        for v in 0..4u32 {
            s.push((vec![v], 0.0));
        }
        for a in 0..4u32 {
            for b in a + 1..4 {
                s.push((vec![a, b], 1.0));
                for c in b + 1..4 {
                    s.push((vec![a, b, c], 2.0));
                }
            }
        }
        s.push((vec![0, 1, 2, 3], 3.0));
        let f = Filtration::from_simplices(4, Partition::singletons(4), s).unwrap();
        assert_eq!(betti_at(&f, 2.0).unwrap(), BettiTriple { b0: 1, b1: 0, b2: 1 });
        assert_eq!(betti_at(&f, 3.0).unwrap(), BettiTriple { b0: 1, b1: 0, b2: 0 });
        assert_eq!(betti_at(&f, 1.0).unwrap(), BettiTriple { b0: 1, b1: 3, b2: 0 });
    }

    #[test]
    fn size_limit() {
        let f = explicit(2, &[(&[0], 0.0), (&[1], 0.0), (&[0, 1], 1.0)]);
        assert_eq!(
            betti_at_with_limit(&f, 1.0, 2),
            Err(OracleError::ComplexTooLarge { count: 3, limit: 2 })
        );
    }
}
