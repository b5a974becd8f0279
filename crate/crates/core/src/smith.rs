//! Smith normal form over the integers with unimodular transforms.

use crate::error::{domain, Error, Result};

/// `u * m * v = d` with `d` diagonal, nonnegative, and each diagonal entry
/// dividing the next. `v_inv` is the exact inverse of `v`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SmithForm {
    pub u: Vec<Vec<i64>>,
    pub d: Vec<Vec<i64>>,
    pub v: Vec<Vec<i64>>,
    pub v_inv: Vec<Vec<i64>>,
}

impl SmithForm {
    pub fn invariants(&self) -> Vec<i64> {
        let k = self.d.len().min(self.d.first().map_or(0, |r| r.len()));
        (0..k).map(|i| self.d[i][i]).collect()
    }
}

type Mat = Vec<Vec<i128>>;

fn identity(n: usize) -> Mat {
    (0..n)
        .map(|i| (0..n).map(|j| i128::from(i == j)).collect())
        .collect()
}

fn overflow() -> Error {
    Error::Domain("integer overflow in Smith normal form".into())
}

struct Work {
    a: Mat,
    u: Mat,
    v: Mat,
    v_inv: Mat,
}

impl Work {
    fn swap_rows(&mut self, i: usize, j: usize) {
        self.a.swap(i, j);
        self.u.swap(i, j);
    }

    fn swap_cols(&mut self, i: usize, j: usize) {
        for row in self.a.iter_mut().chain(self.v.iter_mut()) {
            row.swap(i, j);
        }
        self.v_inv.swap(i, j);
    }

    /// row_i -= q * row_j
    fn sub_row(&mut self, i: usize, j: usize, q: i128) -> Result<()> {
        for m in [&mut self.a, &mut self.u] {
            for c in 0..m[i].len() {
                let t = q.checked_mul(m[j][c]).ok_or_else(overflow)?;
                m[i][c] = m[i][c].checked_sub(t).ok_or_else(overflow)?;
            }
        }
        Ok(())
    }

    /// col_i -= q * col_j, with the matching row update on v_inv
    fn sub_col(&mut self, i: usize, j: usize, q: i128) -> Result<()> {
        for m in [&mut self.a, &mut self.v] {
            for row in m.iter_mut() {
                let t = q.checked_mul(row[j]).ok_or_else(overflow)?;
                row[i] = row[i].checked_sub(t).ok_or_else(overflow)?;
            }
        }
        for c in 0..self.v_inv[j].len() {
            let t = q.checked_mul(self.v_inv[i][c]).ok_or_else(overflow)?;
            self.v_inv[j][c] = self.v_inv[j][c].checked_add(t).ok_or_else(overflow)?;
        }
        Ok(())
    }

    fn negate_row(&mut self, i: usize) {
        for m in [&mut self.a, &mut self.u] {
            for x in m[i].iter_mut() {
                *x = -*x;
            }
        }
    }
}

fn to_i64(m: Mat) -> Result<Vec<Vec<i64>>> {
    m.into_iter()
        .map(|r| {
            r.into_iter()
                .map(|x| i64::try_from(x).map_err(|_| overflow()))
                .collect()
        })
        .collect()
}

pub fn smith_normal_form(m: &[Vec<i64>]) -> Result<SmithForm> {
    let rows = m.len();
    let cols = m.first().map_or(0, |r| r.len());
    if m.iter().any(|r| r.len() != cols) {
        return domain("ragged integer matrix");
    }
    let mut w = Work {
        a: m.iter()
            .map(|r| r.iter().map(|&x| i128::from(x)).collect())
            .collect(),
        u: identity(rows),
        v: identity(cols),
        v_inv: identity(cols),
    };

    for t in 0..rows.min(cols) {
        loop {
            let mut best: Option<(usize, usize)> = None;
            for i in t..rows {
                for j in t..cols {
                    let x = w.a[i][j].abs();
                    if x != 0 && best.is_none_or(|(bi, bj)| x < w.a[bi][bj].abs()) {
                        best = Some((i, j));
                    }
                }
            }
            let Some((pi, pj)) = best else {
                return finish(w);
            };
            w.swap_rows(t, pi);
            w.swap_cols(t, pj);

            let p = w.a[t][t];
            let mut clean = true;
            for i in t + 1..rows {
                let q = w.a[i][t].div_euclid(p);
                if q != 0 {
                    w.sub_row(i, t, q)?;
                }
                clean &= w.a[i][t] == 0;
            }
            for j in t + 1..cols {
                let q = w.a[t][j].div_euclid(p);
                if q != 0 {
                    w.sub_col(j, t, q)?;
                }
                clean &= w.a[t][j] == 0;
            }
            if !clean {
                continue;
            }
            let bad = (t + 1..rows)
                .find(|&i| (t + 1..cols).any(|j| w.a[i][j] % p != 0));
            match bad {
                Some(i) => w.sub_row(t, i, -1)?,
                None => break,
            }
        }
        if w.a[t][t] < 0 {
            w.negate_row(t);
        }
    }
    finish(w)
}

fn finish(w: Work) -> Result<SmithForm> {
    Ok(SmithForm {
        u: to_i64(w.u)?,
        d: to_i64(w.a)?,
        v: to_i64(w.v)?,
        v_inv: to_i64(w.v_inv)?,
    })
}

/// Index of the image of a nonsingular 2x2 integer matrix and whether the
/// cokernel is cyclic.
pub fn smith_index(m: [[i64; 2]; 2]) -> Result<(u64, bool)> {
    let det = i128::from(m[0][0]) * i128::from(m[1][1]) - i128::from(m[0][1]) * i128::from(m[1][0]);
    if det == 0 {
        return domain("singular matrix has infinite index");
    }
    let sf = smith_normal_form(&[m[0].to_vec(), m[1].to_vec()])?;
    let inv = sf.invariants();
    let index = u64::try_from(det.unsigned_abs()).map_err(|_| overflow())?;
    debug_assert_eq!(u128::from(index), (inv[0] as u128) * (inv[1] as u128));
    Ok((index, inv[0] == 1))
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_integer::Integer;
    use proptest::prelude::*;

    fn mul(a: &[Vec<i64>], b: &[Vec<i64>]) -> Vec<Vec<i64>> {
        let n = b.first().map_or(0, |r| r.len());
        a.iter()
            .map(|r| {
                (0..n)
                    .map(|j| r.iter().zip(b).map(|(x, row)| x * row[j]).sum())
                    .collect()
            })
            .collect()
    }

    #[test]
    fn index_examples() {
        assert_eq!(smith_index([[1, 0], [0, 1]]).unwrap(), (1, true));
        assert_eq!(smith_index([[1, 0], [0, 7]]).unwrap(), (7, true));
        assert_eq!(smith_index([[2, 0], [0, 2]]).unwrap(), (4, false));
        assert!(smith_index([[2, 4], [1, 2]]).is_err());
    }

    proptest! {
        #[test]
        fn transforms_are_consistent(entries in proptest::collection::vec(-30i64..30, 8)) {
            let m: Vec<Vec<i64>> = entries.chunks(4).map(|c| c.to_vec()).collect();
            let sf = smith_normal_form(&m).unwrap();
            prop_assert_eq!(mul(&mul(&sf.u, &m), &sf.v), sf.d.clone());
            let eye: Vec<Vec<i64>> = (0..4).map(|i| (0..4).map(|j| i64::from(i == j)).collect()).collect();
            prop_assert_eq!(mul(&sf.v, &sf.v_inv), eye);
            let inv = sf.invariants();
            if inv[0] != 0 && inv[1] != 0 {
                prop_assert_eq!(inv[1] % inv[0], 0);
            }
            for (i, row) in sf.d.iter().enumerate() {
                for (j, &x) in row.iter().enumerate() {
                    if i != j { prop_assert_eq!(x, 0); }
                }
            }
        }

        #[test]
        fn first_invariant_is_entry_gcd(a in -50i64..50, b in -50i64..50, c in -50i64..50, d in -50i64..50) {
            prop_assume!(a * d - b * c != 0);
            let (index, cyclic) = smith_index([[a, b], [c, d]]).unwrap();
            prop_assert_eq!(index, (a * d - b * c).unsigned_abs());
            let g = a.gcd(&b).gcd(&c).gcd(&d);
            prop_assert_eq!(cyclic, g == 1);
        }
    }
}
