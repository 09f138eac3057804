//! Gauss–Legendre rules and a tensor-product rule for Haar averages.

use std::f64::consts::PI;

use crate::error::{config, Result};
use crate::rotation::Rotation3;

/// Gauss–Legendre nodes and weights on [−1, 1].
#[derive(Debug, Clone, PartialEq)]
pub struct GaussLegendre {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussLegendre {
    /// `n`-point rule by Newton iteration on the Legendre recurrence.
    pub fn new(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(config("Gauss-Legendre rule needs at least one node"));
        }
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let nf = n as f64;
        for i in 0..n.div_ceil(2) {
            // Tricomi initial guess for the i-th largest root.
            let mut x = (PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre_with_derivative(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre_with_derivative(n, x);
            dp = if d != 0.0 { d } else { dp };
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        if n % 2 == 1 {
            nodes[n / 2] = 0.0;
        }
        Ok(Self { nodes, weights })
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Nodes and weights mapped affinely onto [a, b].
    pub fn on_interval(&self, a: f64, b: f64) -> impl Iterator<Item = (f64, f64)> + '_ {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(move |(&x, &w)| (mid + half * x, half * w))
    }

    pub fn integrate<F: Fn(f64) -> f64>(&self, a: f64, b: f64, f: F) -> f64 {
        self.on_interval(a, b).map(|(x, w)| w * f(x)).sum()
    }
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let p = if n == 0 { 1.0 } else { p1 };
    let dp = n as f64 * (x * p - p0) / (x * x - 1.0);
    (p, dp)
}

/// Weighted rotations approximating the normalized Haar integral
/// `∫dΩ f(Ω)` through Z–Y–Z Euler angles `(α, cos β, γ)`:
/// `dΩ = dα d(cos β) dγ / 8π²`.
#[derive(Debug, Clone)]
pub struct HaarQuadrature {
    rotations: Vec<(Rotation3, f64)>,
}

impl HaarQuadrature {
    pub const DEFAULT_NODES: usize = 32;

    /// Tensor-product rule with `nodes` Gauss–Legendre points per Euler angle.
    pub fn new(nodes: usize) -> Result<Self> {
        let gl = GaussLegendre::new(nodes)?;
        let norm = 1.0 / (8.0 * PI * PI);
        let mut rotations = Vec::with_capacity(nodes * nodes * nodes);
        for (alpha, wa) in gl.on_interval(0.0, 2.0 * PI) {
            for (cos_beta, wb) in gl.on_interval(-1.0, 1.0) {
                let beta = cos_beta.clamp(-1.0, 1.0).acos();
                for (gamma, wg) in gl.on_interval(0.0, 2.0 * PI) {
                    rotations.push((
                        Rotation3::from_euler_zyz(alpha, beta, gamma),
                        wa * wb * wg * norm,
                    ));
                }
            }
        }
        Ok(Self { rotations })
    }

    pub fn len(&self) -> usize {
        self.rotations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rotations.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &(Rotation3, f64)> {
        self.rotations.iter()
    }

    pub fn integrate<F: Fn(&Rotation3) -> f64>(&self, f: F) -> f64 {
        self.rotations.iter().map(|(r, w)| w * f(r)).sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bloch::BlochVector;

    #[test]
    fn known_small_rules() {
        let g = GaussLegendre::new(2).unwrap();
        let r = 1.0 / 3f64.sqrt();
        assert!((g.nodes[0] + r).abs() < 1e-15 && (g.nodes[1] - r).abs() < 1e-15);
        assert!((g.weights[0] - 1.0).abs() < 1e-15);

        let g = GaussLegendre::new(3).unwrap();
        assert_eq!(g.nodes[1], 0.0);
        assert!((g.weights[1] - 8.0 / 9.0).abs() < 1e-15);
        assert!((g.nodes[2] - 0.6f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn exact_for_polynomials_up_to_degree_2n_minus_1() {
        for n in [1usize, 4, 9, 32, 64] {
            let g = GaussLegendre::new(n).unwrap();
            assert!((g.weights.iter().sum::<f64>() - 2.0).abs() < 1e-13);
            let deg = 2 * n - 1;
            let exact = |k: usize| {
                if k % 2 == 1 {
                    0.0
                } else {
                    2.0 / (k as f64 + 1.0)
                }
            };
            for k in 0..=deg.min(40) {
                let q = g.integrate(-1.0, 1.0, |x| x.powi(k as i32));
                assert!((q - exact(k)).abs() < 1e-13, "n={n} k={k}: {q}");
            }
        }
    }

    #[test]
    fn zero_nodes_rejected() {
        assert!(GaussLegendre::new(0).is_err());
        assert!(HaarQuadrature::new(0).is_err());
    }

    #[test]
    fn haar_rule_is_normalized_and_isotropic() {
        let q = HaarQuadrature::new(16).unwrap();
        assert!((q.integrate(|_| 1.0) - 1.0).abs() < 1e-14);
        let e = BlochVector::new(0.2, -0.5, 0.7).normalized().unwrap();
        for i in 0..3 {
            for j in 0..3 {
                let m = q.integrate(|r| {
                    let v = r.apply(e).to_array();
                    v[i] * v[j]
                });
                let target = if i == j { 1.0 / 3.0 } else { 0.0 };
                assert!((m - target).abs() < 1e-13, "({i},{j}) {m}");
            }
        }
    }
}
