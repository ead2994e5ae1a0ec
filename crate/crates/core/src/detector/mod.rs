//! The two-window spectral detector.
//!
//! At every timestep the most recent `w` moment vectors form the test window
//! and the `w_ref` vectors before them the reference window. The statistic
//! `D_t` compares the two; an alarm fires when `D_t >= theta` and at least
//! `cooldown` steps have passed since the previous alarm.

mod config;
mod online;
mod output;
pub(crate) mod window;

pub use config::{DetectorConfig, DistanceMode, Threshold, Weighting, WindowSpec};
pub use online::{calibrate_percentile, default_calibration_len, detect_stream, OnlineDetector};
pub use output::{apply_threshold, read_score_csv, write_detections_json, write_score_csv, ScoreRecord, ScoreSeries};
pub use window::{weighted_mean, window_statistic};
