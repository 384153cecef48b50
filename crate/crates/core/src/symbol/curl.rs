use nalgebra::{Matrix3, Vector3};

/// `C(xi)_{ij} = -eps_{ijk} xi_k`, so that `C(xi) v = xi x v`.
pub fn curl_symbol(xi: &Vector3<f64>) -> Matrix3<f64> {
    Matrix3::new(0.0, -xi[2], xi[1], xi[2], 0.0, -xi[0], -xi[1], xi[0], 0.0)
}

/// Classical adjugate (transposed cofactor matrix), defined minor-wise so singular input is fine.
pub fn adjugate(b: &Matrix3<f64>) -> Matrix3<f64> {
    let mut cof = Matrix3::zeros();
    for i in 0..3 {
        for j in 0..3 {
            let r: Vec<usize> = (0..3).filter(|&k| k != i).collect();
            let c: Vec<usize> = (0..3).filter(|&k| k != j).collect();
            let minor = b[(r[0], c[0])] * b[(r[1], c[1])] - b[(r[0], c[1])] * b[(r[1], c[0])];
            let sign = if (i + j) % 2 == 0 { 1.0 } else { -1.0 };
            cof[(i, j)] = sign * minor;
        }
    }
    cof.transpose()
}

/// `|| B^T C(xi) B - C(adj(B) xi) ||_F`
pub fn adjugate_identity_residual(b: &Matrix3<f64>, xi: &Vector3<f64>) -> f64 {
    (b.transpose() * curl_symbol(xi) * b - curl_symbol(&(adjugate(b) * xi))).norm()
}

/// `|| C(xi)^2 - (xi xi^T - |xi|^2 I) ||_F`
pub fn c_squared_residual(xi: &Vector3<f64>) -> f64 {
    let c = curl_symbol(xi);
    (c * c - (xi * xi.transpose() - Matrix3::identity() * xi.norm_squared())).norm()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn e3_pattern() {
        let c = curl_symbol(&Vector3::new(0.0, 0.0, 1.0));
        assert_eq!(c[(0, 1)], -1.0);
        assert_eq!(c[(1, 0)], 1.0);
        assert_eq!(c[(2, 2)], 0.0);
    }

    #[test]
    fn acts_as_cross_product() {
        let xi = Vector3::new(0.3, -1.2, 2.0);
        let v = Vector3::new(1.0, 0.5, -0.7);
        assert!((curl_symbol(&xi) * v - xi.cross(&v)).norm() < 1e-15);
    }

    #[test]
    fn diagonal_adjugate_example() {
        let b = Matrix3::from_diagonal(&Vector3::new(2.0, 1.0, 1.0));
        let xi = Vector3::new(0.0, 0.0, 1.0);
        assert_eq!(adjugate(&b), Matrix3::from_diagonal(&Vector3::new(1.0, 2.0, 2.0)));
        assert_eq!(b.transpose() * curl_symbol(&xi) * b, curl_symbol(&Vector3::new(0.0, 0.0, 2.0)));
    }
}
