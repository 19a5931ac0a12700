//! Closed-loop simulator for haptic shared steering with lane-keep and
//! lane-change assistance.

pub mod authority;
pub mod config;
pub mod consistency;
pub mod controller;
pub mod driver;
pub mod dynamics;
pub mod error;
pub mod intent;
pub mod metrics;
pub mod scalar;
pub mod scenario;
pub mod telemetry;
pub mod trajectory;
pub mod verify;

pub use error::{Error, Result};
pub use scalar::Real;

pub type VehicleState = dynamics::VehicleState<f64>;
pub type VehicleStateF32 = dynamics::VehicleState<f32>;
pub type SteeringState = dynamics::SteeringState<f64>;
pub type SteeringStateF32 = dynamics::SteeringState<f32>;
pub type VehicleParams = dynamics::VehicleParams<f64>;
pub type VehicleParamsF32 = dynamics::VehicleParams<f32>;
pub type ColumnParams = dynamics::ColumnParams<f64>;
pub type ColumnParamsF32 = dynamics::ColumnParams<f32>;
pub type LaneGeometry = trajectory::LaneGeometry<f64>;
pub type TrajectoryPlan = trajectory::TrajectoryPlan<f64>;
pub type ControllerConfig = controller::ControllerConfig<f64>;
pub type ConsistencyConfig = consistency::ConsistencyConfig<f64>;
pub type AuthorityConfig = authority::AuthorityConfig<f64>;
