//! Radio environment: layout and SINR, link abstraction, frame budgets and
//! user placement.

pub mod layout;
pub mod link;
pub mod radio;
pub mod users;

pub use layout::{DeliveryMode, NetworkLayout, Point, Propagation};
pub use link::{allocator_erasure, BlerModel, ErasureView, UserContext};
pub use radio::{n_hat, source_elements, tb_capacity, RadioConfig, MAX_MCS, MIN_TX_MCS};
pub use users::{place_users, user_positions, Shadowing, UserPattern};
