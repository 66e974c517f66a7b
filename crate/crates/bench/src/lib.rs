//! Fixtures shared by the kernel benchmarks.

use dods_core::catalog::{self, InvariantFamily, Params};
use dods_core::{DODSystem, Expr, JetPoint, LinearDODS};

/// A nested expression in all seven jet variables.
pub fn jet_expression() -> Expr {
    Expr::parse(
        "exp(-x^2/8) * sin(y + y_) + log(1 + dy^2) / (2 + cos(x_)) + atan2(yd, 1 + dx^2)",
        &dods_core::system::JET_VARS,
    )
    .expect("fixture parses")
}

pub fn jet() -> JetPoint {
    JetPoint::new(1.3, 0.7, 0.4, -0.2, 0.9)
}

/// `yd = y_` with `x_ = x - 1`, the textbook method-of-steps problem.
pub fn unit_delay() -> DODSystem {
    DODSystem::explicit("y_", "x - 1", (-1.0, 50.0)).expect("fixture builds")
}

/// `yd = y_^2 / y` with proportional delay `x_ = x / 2`.
pub fn proportional_delay() -> DODSystem {
    DODSystem::explicit("y_^2 / y", "x/2", (0.5, 50.0)).expect("fixture builds")
}

pub fn scaling_family() -> InvariantFamily {
    catalog::family("A3,4", &Params::new()).expect("catalog family")
}

pub fn shift_linear() -> LinearDODS {
    LinearDODS::new("0", "1", "0", "x - 1", (1.0, 5.0)).expect("fixture builds")
}
