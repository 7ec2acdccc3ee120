//! Synthetic reverberant scenes: image-source responses, scene sampling,
//! level-calibrated mixing and reverberation-time measurement.

mod geometry;
mod mix;
mod rir;
mod scene;
mod t60;

pub use geometry::{distance, ArrayGeometry, Point};
pub use mix::{mix_scene, MixGains, MixOutput, MixSpec, Stems, CLIP_SECONDS, SIR_GRID_DB, SNR_GRID_DB};
pub use rir::{simulate_rir, AbsorptionModel, Rir, ShoeboxRoom, SPEED_OF_SOUND};
pub use scene::{
    sample_scene, sample_scene_with_roles, RoomScene, SceneConstraints, Source, SourceRole, T60_TEST_GRID,
    T60_TRAIN_GRID,
};
pub use t60::{measure_t60, measure_t60_taps, schroeder_curve_db};
