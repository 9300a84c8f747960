use std::ops::AddAssign;

/// Operations counted by an instrumented estimate.
///
/// Classes follow the closed-form cost: `flow_solves` are weighted by the
/// cost `a` of one ODE solve, `normal_vectors` (one `d`-vector of normals)
/// by `Z`, `bernoulli` by `B`; everything else is a unit operation.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct OpCounts {
    pub flow_solves: u64,
    pub normal_vectors: u64,
    pub bernoulli: u64,
    pub unit_ops: u64,
}

impl OpCounts {
    pub fn weighted(&self, a: u64, b: u64, z: u64) -> u128 {
        u128::from(self.flow_solves) * u128::from(a)
            + u128::from(self.normal_vectors) * u128::from(z)
            + u128::from(self.bernoulli) * u128::from(b)
            + u128::from(self.unit_ops)
    }

    /// Count with every class at unit cost.
    pub fn total_unit_weights(&self) -> u128 {
        self.weighted(1, 1, 1)
    }
}

impl AddAssign for OpCounts {
    fn add_assign(&mut self, o: Self) {
        self.flow_solves += o.flow_solves;
        self.normal_vectors += o.normal_vectors;
        self.bernoulli += o.bernoulli;
        self.unit_ops += o.unit_ops;
    }
}

/// Closed-form operation count of the extrapolated estimator:
/// `M (5m + n((d+1)a + Z + 1) sum(theta) + nB + 1) + 2m`.
pub fn cost_estimate(thetas: &[u32], n: u64, paths: u64, d: u64, a: u64, b: u64, z: u64) -> u128 {
    let m = thetas.len() as u128;
    let sum: u128 = thetas.iter().map(|&t| u128::from(t)).sum();
    let (n, paths, d, a, b, z) = (
        n as u128,
        paths as u128,
        d as u128,
        a as u128,
        b as u128,
        z as u128,
    );
    paths * (5 * m + n * ((d + 1) * a + z + 1) * sum + n * b + 1) + 2 * m
}
