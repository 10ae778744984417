//! Midpoint grid on the torus, kept in the symmetric view (-1/2, 1/2].

/// Reduce to the unit view [0, 1).
pub fn unit_view(k: f64) -> f64 {
    let r = k.rem_euclid(1.0);
    if r == 1.0 {
        0.0
    } else {
        r
    }
}

/// Reduce to the symmetric view (-1/2, 1/2].
pub fn sym_view(k: f64) -> f64 {
    let r = unit_view(k);
    if r > 0.5 {
        r - 1.0
    } else {
        r
    }
}

/// Uniform midpoint grid: nodes k_i = -1/2 + (i + 1/2)/n, weights 1/n.
/// Midpoints never hit k = 0, where the dispersion is not differentiable.
#[derive(Debug, Clone, PartialEq)]
pub struct WaveGrid {
    pub n: usize,
    pub nodes: Vec<f64>,
    pub weight: f64,
}

impl WaveGrid {
    pub fn new(n: usize) -> Self {
        let nodes = (0..n)
            .map(|i| -0.5 + (i as f64 + 0.5) / n as f64)
            .collect();
        WaveGrid {
            n,
            nodes,
            weight: 1.0 / n as f64,
        }
    }

    /// Index of the unit-view cell containing `k`: nodes in unit order are
    /// (j + 1/2)/n for j = 0..n.
    pub fn unit_index(&self, k: f64) -> usize {
        let x = unit_view(k) * self.n as f64 - 0.5;
        (x.round() as isize).rem_euclid(self.n as isize) as usize
    }

    /// Permutation from symmetric-view storage order to unit-view order:
    /// unit node j corresponds to symmetric node (j + n/2) mod n.
    pub fn sym_to_unit_perm(&self) -> Vec<usize> {
        (0..self.n).map(|j| (j + self.n / 2) % self.n).collect()
    }
}
