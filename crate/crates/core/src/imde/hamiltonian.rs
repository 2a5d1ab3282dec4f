use super::closed_form::multilinear;
use crate::algebra::tower::{self, Tower};
use crate::algebra::VectorField;
use crate::error::{Error, Result};

/// Jacobian `g'(x)`, row `i` holding the partials of component `i`.
pub fn jacobian<G: VectorField<Tower> + ?Sized>(g: &G, x: &[f64]) -> Result<Vec<Vec<f64>>> {
    let n = x.len();
    let at = tower::lift(x);
    let mut jac = vec![vec![0.0; n]; n];
    for j in 0..n {
        let mut e = vec![Tower::Num(0.0); n];
        e[j] = Tower::Num(1.0);
        let col = multilinear(g, &at, &[e])?;
        for (i, v) in col.iter().enumerate() {
            jac[i][j] = v.value();
        }
    }
    Ok(jac)
}

/// `J A` with `J = [[0, I], [-I, 0]]`.
pub fn apply_j(a: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let n = a.len();
    let d = n / 2;
    (0..n).map(|i| if i < d { a[i + d].clone() } else { a[i - d].iter().map(|v| -v).collect() }).collect()
}

/// Largest `||J g' - (J g')^T||_inf` over the sample points; zero exactly
/// when `g` is locally Hamiltonian.
pub fn hamiltonicity_defect<G: VectorField<Tower> + ?Sized>(g: &G, samples: &[Vec<f64>]) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for x in samples {
        let n = x.len();
        if n % 2 != 0 {
            return Err(Error::OddDimension(n));
        }
        let ja = apply_j(&jacobian(g, x)?);
        for i in 0..n {
            let row: f64 = (0..n).map(|j| (ja[i][j] - ja[j][i]).abs()).sum();
            worst = worst.max(row);
        }
    }
    Ok(worst)
}
