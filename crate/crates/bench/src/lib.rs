//! Shared fixtures for the benchmarks.

use eedesign::{DesignPoint, HardwareParams, NetworkParams, PowerModel};

/// Default network at λ = 100 with SINR target `gamma`.
pub fn network(gamma: f64) -> NetworkParams {
    NetworkParams::default().with_gamma(gamma)
}

pub fn power_model(net: &NetworkParams) -> PowerModel {
    PowerModel::build(net, &HardwareParams::default()).expect("default hardware is valid")
}

/// The ZF optimum at γ = 3.
pub fn design() -> DesignPoint {
    DesignPoint::new(7.24, 10.0, 91.0)
}
