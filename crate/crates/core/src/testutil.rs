//! Shared fixtures: kernels are expensive enough to build once per process.

use alloc::sync::Arc;
use std::sync::OnceLock;

use crate::field::{FieldSampler, GridSpec};
use crate::kernels::{FieldParams, SeedKernel};

pub fn seed1() -> Arc<SeedKernel> {
    static K: OnceLock<Arc<SeedKernel>> = OnceLock::new();
    K.get_or_init(|| Arc::new(SeedKernel::build(1, 4096).unwrap())).clone()
}

pub fn seed2() -> Arc<SeedKernel> {
    static K: OnceLock<Arc<SeedKernel>> = OnceLock::new();
    K.get_or_init(|| Arc::new(SeedKernel::build(2, 4096).unwrap())).clone()
}

pub fn params(dim: usize, a: f64, alpha: f64) -> FieldParams {
    let seed = if dim == 1 { seed1() } else { seed2() };
    FieldParams::new(alpha, a, seed).unwrap()
}

pub fn sampler(dim: usize, a: f64, alpha: f64, m: usize, t_max: f64) -> Arc<FieldSampler> {
    let grid = GridSpec::new(dim, m).unwrap();
    Arc::new(FieldSampler::new(params(dim, a, alpha), grid, t_max, 0.25).unwrap())
}
