//! Single-hidden-layer feedforward networks trained as extreme learning
//! machines, either with random hidden weights (ELM) or with hidden weights
//! constructed so the hidden layer output matrix has full column rank (EELM).

pub mod bench;
pub mod data;
pub mod error;
pub mod learners;
pub mod matrix;
pub mod model_io;
pub mod order_embed;
pub mod weight_select;

pub use data::{Dataset, Task};
pub use error::{Error, Result};
pub use learners::{
    predict, train_eelm, train_elm, AnchorStrategy, EelmOptions, PinvPath, Provenance, SlfnModel,
    TrainReport,
};
pub use matrix::Mat;
pub use weight_select::Activation;
