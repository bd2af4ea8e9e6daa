//! Bond vertices of the field-diagonal representation and their directed-loop exit tables.
//!
//! Legs 0 and 1 sit below the operator on sites i and j, legs 2 and 3 above.
//! Bit k of a configuration is set when leg k is in the S^x = +1/2 state.

/// Weights of H_b = C + γ_i S^x_i + γ_j S^x_j + K S^z_i S^z_j in the S^x basis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BondWeights {
    pub gamma_i: f64,
    pub gamma_j: f64,
    pub coupling: f64,
    pub offset: f64,
}

fn half(bit: u8) -> f64 {
    if bit != 0 {
        0.5
    } else {
        -0.5
    }
}

impl BondWeights {
    pub fn new(gamma_i: f64, gamma_j: f64, coupling: f64) -> Self {
        BondWeights { gamma_i, gamma_j, coupling, offset: 0.5 * (gamma_i + gamma_j) + 0.25 * coupling }
    }

    pub fn diagonal(&self, si: bool, sj: bool) -> f64 {
        self.offset + self.gamma_i * half(si as u8) + self.gamma_j * half(sj as u8)
    }

    pub fn weight(&self, conf: u8) -> f64 {
        let below = conf & 3;
        let above = (conf >> 2) & 3;
        if below == above {
            self.diagonal(below & 1 != 0, below & 2 != 0)
        } else if above == below ^ 3 {
            0.25 * self.coupling
        } else {
            0.0
        }
    }

    /// Largest diagonal weight.
    pub fn max_diagonal(&self) -> f64 {
        self.diagonal(true, true)
    }
}

/// Symmetric non-negative matrix a with row sums r and the least possible trace,
/// all of it on the largest row when r_max exceeds the sum of the others.
pub fn solve_directed_loop(r: [f64; 4]) -> [[f64; 4]; 4] {
    let mut a = [[0.0; 4]; 4];
    let mut w = r;
    let m = (0..4).max_by(|&x, &y| r[x].total_cmp(&r[y])).unwrap();
    let rest: f64 = (0..4).filter(|&k| k != m).map(|k| r[k]).sum();
    if r[m] > rest {
        a[m][m] = r[m] - rest;
        w[m] = rest;
    }
    let total: f64 = w.iter().sum();
    let matchings = [((0, 1), (2, 3)), ((0, 2), (1, 3)), ((0, 3), (1, 2))];
    let d: Vec<f64> = matchings.iter().map(|&((p, q), (s, t))| 0.5 * (w[p] + w[q] - w[s] - w[t])).collect();
    let slack = (0.5 * total - d.iter().map(|x| x.abs()).sum::<f64>()).max(0.0) / 3.0;
    for (k, &((p, q), (s, t))) in matchings.iter().enumerate() {
        let sum = d[k].abs() + slack;
        let first = (0.5 * (sum + d[k])).max(0.0);
        let second = (0.5 * (sum - d[k])).max(0.0);
        a[p][q] = first;
        a[q][p] = first;
        a[s][t] = second;
        a[t][s] = second;
    }
    a
}

/// Cumulative exit probabilities indexed by [configuration][entrance][exit].
#[derive(Debug, Clone, PartialEq)]
pub struct ExitTable {
    pub weights: BondWeights,
    prob: [[[f64; 4]; 4]; 16],
}

impl ExitTable {
    pub fn new(weights: BondWeights) -> Self {
        let mut prob = [[[0.0; 4]; 4]; 16];
        for conf in 0..16u8 {
            let w = weights.weight(conf);
            if w <= 0.0 {
                continue;
            }
            for enter in 0..4 {
                let mid = conf ^ (1 << enter);
                let r = [0, 1, 2, 3].map(|e| weights.weight(mid ^ (1 << e)));
                let a = solve_directed_loop(r);
                for exit in 0..4 {
                    prob[conf as usize][enter][exit] = a[enter][exit] / w;
                }
            }
        }
        ExitTable { weights, prob }
    }

    pub fn probability(&self, conf: u8, enter: usize, exit: usize) -> f64 {
        self.prob[conf as usize][enter][exit]
    }

    /// Exit leg for a uniform deviate u in [0, 1).
    pub fn sample(&self, conf: u8, enter: usize, u: f64) -> usize {
        let row = &self.prob[conf as usize][enter];
        let mut acc = 0.0;
        for (exit, &p) in row.iter().enumerate() {
            acc += p;
            if u < acc {
                return exit;
            }
        }
        (0..4).rev().find(|&e| row[e] > 0.0).unwrap_or(enter)
    }
}
