//! Fixed problem instances shared by the benchmarks.

use pascu_core::{DiskGrid, KernelSpec, ParameterSet};

pub fn komatu() -> (KernelSpec, ParameterSet) {
    (KernelSpec::komatu(0.0, 3.0).unwrap(), ParameterSet::from_mu_nu(1.0, 2.0, 0.1, 1.0).unwrap())
}

pub fn hohlov() -> (KernelSpec, ParameterSet) {
    (KernelSpec::hohlov(1.0, 1.0, 4.0).unwrap(), ParameterSet::from_mu_nu(1.0, 2.0, 0.1, 1.0).unwrap())
}

pub fn small_grid() -> DiskGrid {
    DiskGrid { radii: vec![0.5, 0.9, 0.99], angles: 32, epsilon_count: 8 }
}
