//! Operator strings of the series expansion.

/// One slot of the operator string.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Op {
    Identity,
    /// Constant site operator (z basis).
    SiteDiag(u32),
    /// Site spin flip (z basis).
    SiteFlip(u32),
    /// Diagonal bond operator.
    BondDiag(u32),
    /// Bond operator flipping both spins (x basis).
    BondFlip(u32),
}

impl Op {
    pub fn is_identity(self) -> bool {
        self == Op::Identity
    }

    pub fn is_diagonal(self) -> bool {
        matches!(self, Op::SiteDiag(_) | Op::BondDiag(_))
    }

    /// Sites acted on; the second entry is unused for site operators.
    pub fn sites(self, bonds: &[(usize, usize)]) -> Option<(usize, Option<usize>)> {
        match self {
            Op::Identity => None,
            Op::SiteDiag(i) | Op::SiteFlip(i) => Some((i as usize, None)),
            Op::BondDiag(b) | Op::BondFlip(b) => {
                let (i, j) = bonds[b as usize];
                Some((i, Some(j)))
            }
        }
    }

    /// Applies the operator to a basis state.
    pub fn act(self, bonds: &[(usize, usize)], state: &mut [bool]) {
        match self {
            Op::SiteFlip(i) => state[i as usize] = !state[i as usize],
            Op::BondFlip(b) => {
                let (i, j) = bonds[b as usize];
                state[i] = !state[i];
                state[j] = !state[j];
            }
            _ => {}
        }
    }
}

/// Fixed-length operator string with its basis state at propagation time zero.
#[derive(Debug, Clone, PartialEq)]
pub struct OperatorString {
    pub ops: Vec<Op>,
    pub n_ops: usize,
    pub state: Vec<bool>,
}

impl OperatorString {
    pub fn new(state: Vec<bool>, cutoff: usize) -> Self {
        OperatorString { ops: vec![Op::Identity; cutoff], n_ops: 0, state }
    }

    pub fn cutoff(&self) -> usize {
        self.ops.len()
    }

    /// Appends identity slots up to `cutoff`.
    pub fn grow(&mut self, cutoff: usize) {
        if cutoff > self.ops.len() {
            self.ops.resize(cutoff, Op::Identity);
        }
    }

    /// True when propagation through every operator returns the initial state.
    pub fn is_periodic(&self, bonds: &[(usize, usize)]) -> bool {
        let mut s = self.state.clone();
        for op in &self.ops {
            op.act(bonds, &mut s);
        }
        s == self.state
    }

    /// Calls f with the state just before each non-identity operator.
    pub fn for_each_propagated(&self, bonds: &[(usize, usize)], mut f: impl FnMut(&[bool])) {
        let mut s = self.state.clone();
        for &op in self.ops.iter().filter(|op| !op.is_identity()) {
            f(&s);
            op.act(bonds, &mut s);
        }
    }
}
