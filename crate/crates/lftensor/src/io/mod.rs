//! File containers: light fields as PNG view grids with a JSON descriptor,
//! disparity as PFM, optical flow as Middlebury .flo, layer stacks as PNG
//! directories.

mod flo;
mod lf_dir;
mod pfm;
mod png;
mod stack_dir;

pub use flo::load_flow_flo;
pub use lf_dir::{load_light_field, save_light_field};
pub use pfm::{load_disparity_pfm, save_disparity_pfm};
pub use png::{load_image_png, load_single_channel_png, quantize_unit, save_image_png};
pub use stack_dir::{load_layer_stack, save_layer_stack};
