//! Small GF(2) linear algebra over packed rows (at most 128 columns).

/// Incrementally built row-echelon basis; supports span membership.
#[derive(Debug, Clone, Default)]
pub struct Basis {
    // (pivot bit, row), row has no bits at other rows' pivots below it
    rows: Vec<(u32, u128)>,
}

impl Basis {
    pub fn new() -> Self {
        Basis::default()
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    pub fn reduce(&self, mut v: u128) -> u128 {
        for &(p, r) in &self.rows {
            if v >> p & 1 == 1 {
                v ^= r;
            }
        }
        v
    }

    pub fn contains(&self, v: u128) -> bool {
        self.reduce(v) == 0
    }

    /// Adds `v`; returns false when it was already in the span.
    pub fn insert(&mut self, v: u128) -> bool {
        let r = self.reduce(v);
        if r == 0 {
            return false;
        }
        let p = 127 - r.leading_zeros();
        for row in self.rows.iter_mut() {
            if row.1 >> p & 1 == 1 {
                row.1 ^= r;
            }
        }
        self.rows.push((p, r));
        true
    }
}

pub fn rank(rows: &[u128]) -> usize {
    let mut b = Basis::new();
    rows.iter().filter(|&&r| b.insert(r)).count()
}

/// Reduced row echelon form scanning columns from bit 0 upward.
/// Returns the nonzero rows (one per pivot) and their pivot columns.
pub fn rref(rows: &[u64], n_cols: usize) -> (Vec<u64>, Vec<usize>) {
    let mut m: Vec<u64> = rows.to_vec();
    let mut pivots = Vec::new();
    let mut r = 0;
    for col in 0..n_cols {
        let bit = 1u64 << col;
        let Some(found) = (r..m.len()).find(|&i| m[i] & bit != 0) else {
            continue;
        };
        m.swap(r, found);
        for i in 0..m.len() {
            if i != r && m[i] & bit != 0 {
                m[i] ^= m[r];
            }
        }
        pivots.push(col);
        r += 1;
    }
    m.truncate(r);
    (m, pivots)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn span_and_rank() {
        let mut b = Basis::new();
        assert!(b.insert(0b011));
        assert!(b.insert(0b110));
        assert!(!b.insert(0b101));
        assert!(b.contains(0b101));
        assert!(!b.contains(0b001));
        assert_eq!(rank(&[0b011, 0b110, 0b101, 0b1000]), 3);
    }

    #[test]
    fn rref_identity_pivots() {
        let (rows, piv) = rref(&[0b1011, 0b0110, 0b1101], 4);
        assert_eq!(piv, vec![0, 1]);
        for (r, p) in rows.iter().zip(&piv) {
            for (r2, _) in rows.iter().zip(&piv) {
                if r != r2 {
                    assert_eq!(r2 >> p & 1, 0);
                }
            }
        }
    }
}
