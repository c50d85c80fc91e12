use crate::error::{Error, Result};

const MAX_SWEEPS: usize = 60;

/// Eigenvalues and eigenvectors of a real symmetric tridiagonal matrix by
/// implicit QL with Wilkinson shifts.
///
/// Returns `(values, vectors)` with `vectors` row-major `n×n`; column `j`
/// is the unit eigenvector of `values[j]`. Values are not sorted.
pub fn symmetric_tridiagonal_eigen(
    diagonal: &[f64],
    off_diagonal: &[f64],
) -> Result<(Vec<f64>, Vec<f64>)> {
    let n = diagonal.len();
    if off_diagonal.len() + 1 != n.max(1) {
        return Err(Error::DimensionMismatch {
            what: "off-diagonal",
            expected: n.saturating_sub(1),
            got: off_diagonal.len(),
        });
    }
    let mut d = diagonal.to_vec();
    // e[i] couples rows i and i + 1; e[n − 1] is padding.
    let mut e = off_diagonal.to_vec();
    e.push(0.0);
    let mut z = vec![0.0; n * n];
    for i in 0..n {
        z[i * n + i] = 1.0;
    }

    for l in 0..n {
        let mut sweeps = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= f64::EPSILON * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            sweeps += 1;
            if sweeps > MAX_SWEEPS {
                return Err(Error::Eigensolver(l));
            }

            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            g = d[m] - d[l] + e[l] / (g + r.copysign(g));
            let (mut s, mut c, mut p) = (1.0, 1.0, 0.0);
            let mut deflated = false;
            for i in (l..m).rev() {
                let f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    deflated = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
                for k in 0..n {
                    let zi1 = z[k * n + i + 1];
                    let zi = z[k * n + i];
                    z[k * n + i + 1] = s * zi + c * zi1;
                    z[k * n + i] = c * zi - s * zi1;
                }
            }
            if deflated {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }
    Ok((d, z))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reconstructs_matrix() {
        let diag = [2.0, -1.0, 0.5, 3.0, 0.0];
        let off = [1.0, -0.3, 2.0, 0.7];
        let n = diag.len();
        let (vals, vecs) = symmetric_tridiagonal_eigen(&diag, &off).unwrap();
        for i in 0..n {
            for j in 0..n {
                let a: f64 = (0..n).map(|k| vecs[i * n + k] * vals[k] * vecs[j * n + k]).sum();
                let expected = if i == j {
                    diag[i]
                } else if i + 1 == j {
                    off[i]
                } else if j + 1 == i {
                    off[j]
                } else {
                    0.0
                };
                assert!((a - expected).abs() < 1e-13, "({i},{j}) {a} vs {expected}");
            }
        }
    }

    #[test]
    fn uniform_chain_band() {
        let n = 12;
        let (mut vals, _) = symmetric_tridiagonal_eigen(&vec![0.0; n], &vec![-1.0; n - 1]).unwrap();
        vals.sort_by(f64::total_cmp);
        for (j, v) in vals.iter().enumerate() {
            let exact = -2.0 * (std::f64::consts::PI * (j + 1) as f64 / (n + 1) as f64).cos();
            assert!((v - exact).abs() < 1e-13);
        }
    }

    #[test]
    fn single_site() {
        let (vals, vecs) = symmetric_tridiagonal_eigen(&[4.0], &[]).unwrap();
        assert_eq!(vals, vec![4.0]);
        assert_eq!(vecs, vec![1.0]);
    }

    #[test]
    fn rejects_bad_lengths() {
        assert!(symmetric_tridiagonal_eigen(&[1.0, 2.0], &[]).is_err());
    }
}
