//! The two three-level Kraus families that illustrate FSIO versus FIO:
//!
//! ```text
//! K_i  = [[0, a_i, 0], [b_i, 0, 0], [0, 0, c_i]]    (FSIO, pi = 1->2, 2->1, 3->3)
//! K'_i = [[0, a_i, 0], [b_i, 0, c_i], [0, 0, 0]]    (FIO only: row 2 is shared)
//! ```
//!
//! with concrete coefficients chosen so that both sets are complete.

use num_complex::Complex64;

use super::kraus::KrausSet;
use crate::qstate::ComplexMatrix;

fn three_by_three(entries: [(usize, usize, Complex64); 3]) -> ComplexMatrix {
    let mut m = ComplexMatrix::zeros(3, 3);
    for (r, c, z) in entries {
        m[(r, c)] = z;
    }
    m
}

pub fn fsio_example() -> KrausSet {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let a = [Complex64::new(0.6, 0.0), Complex64::new(0.8, 0.0)];
    let b = [Complex64::new(0.8, 0.0), Complex64::new(0.0, 0.6)];
    let c = [Complex64::new(s, 0.0), Complex64::new(-s, 0.0)];
    let ops = (0..2)
        .map(|i| three_by_three([(0, 1, a[i]), (1, 0, b[i]), (2, 2, c[i])]))
        .collect();
    KrausSet::new(ops).expect("fixture is complete")
}

pub fn fio_example() -> KrausSet {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let a = [Complex64::new(0.6, 0.0), Complex64::new(0.0, 0.8)];
    // b and c orthogonal across operators so the shared row stays complete
    let b = [Complex64::new(s, 0.0), Complex64::new(s, 0.0)];
    let c = [Complex64::new(s, 0.0), Complex64::new(-s, 0.0)];
    let ops = (0..2)
        .map(|i| three_by_three([(0, 1, a[i]), (1, 0, b[i]), (1, 2, c[i])]))
        .collect();
    KrausSet::new(ops).expect("fixture is complete")
}
