//! Landmark-driven face video synthesis: a recurrent generator trained
//! against frame and video discriminators, with landmark and identity
//! objectives.

pub mod adam;
pub mod checkpoint;
pub mod cli;
pub mod config;
pub mod error;
pub mod generate;
pub mod losses;
pub mod networks;
pub mod tensor;
pub mod trainer;

pub use config::{NetConfig, TrainConfig};
pub use error::{Error, Result};
pub use generate::{generate_frames, GenerationMode};
pub use losses::{LossReport, LossWeights};
pub use networks::{FaceEmbedder, Generator, GeneratorState, Networks};
pub use trainer::Trainer;
