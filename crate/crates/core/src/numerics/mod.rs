//! Dense 64-bit kernel used by the hand-derived recurrent models.
//!
//! Vectors are plain `[f64]` slices; matrices are row-major [`Matrix`]. Hot
//! loops (`matvec_acc`, `add_outer`) only debug-assert their shapes, the
//! public algebraic operations return [`Error::Shape`](crate::Error::Shape).

mod activation;
mod gradcheck;
mod matrix;
mod optim;
mod params;
mod rng;

pub use activation::{cross_entropy, hadamard, sigmoid, sigmoid_in_place, softmax, tanh, tanh_in_place};
pub use gradcheck::{grad_check, BlockCheck, GradCheck};
pub use matrix::Matrix;
pub use optim::{clip_gradients, global_norm, sgd_step, ClipMode, SgdConfig};
pub use params::{read_snapshot, read_snapshot_into, write_snapshot, Parameters, SNAPSHOT_MAGIC, SNAPSHOT_VERSION};
pub use rng::{derive_seed, seeded, stream, xavier_uniform};
